"""OLS with heteroscedasticity-robust covariance and the simple ATE estimators."""
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EmptySampleError
from .numkit import qr_factor, r_inverse, two_sided_pvalue

ESTIMATOR_KINDS = ("mean_difference", "ols_controls", "double_lasso",
                   "ipw_total", "ob_component", "ipw_component")


@dataclass
class EffectEstimate:
    """A scalar effect with its standard error and normal p-value."""

    estimate: float
    standard_error: float
    p_value: float
    estimator_kind: str
    n_used: int
    warnings: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.estimator_kind not in ESTIMATOR_KINDS:
            raise DomainError(f"unknown estimator kind {self.estimator_kind!r}")

    @classmethod
    def from_estimate(cls, estimate, standard_error, kind, n_used, **kw):
        est, se = float(estimate), float(standard_error)
        return cls(est, se, two_sided_pvalue(est, se), kind, int(n_used), **kw)

    def to_dict(self):
        return {
            "estimator": self.estimator_kind,
            "est": self.estimate,
            "se": self.standard_error,
            "pval": self.p_value,
            "n_used": self.n_used,
            "warnings": list(self.warnings),
        }


@dataclass
class OlsFit:
    coefficients: np.ndarray
    residuals: np.ndarray = field(repr=False)
    robust_covariance: np.ndarray = field(repr=False)
    cov_type: str = "HC1"

    @property
    def standard_errors(self):
        return np.sqrt(np.clip(np.diag(self.robust_covariance), 0.0, None))


def fit_ols(design, response, cov_type="HC1"):
    """Least squares with a sandwich covariance (``HC0``, ``HC1`` or ``HC3``)."""
    x = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    n, k = x.shape
    q, r = qr_factor(x)
    rinv = r_inverse(r)
    coef = rinv @ (q.T @ y)
    resid = y - x @ coef
    if cov_type == "HC3":
        lev = np.sum(q * q, axis=1)
        u = resid / np.where(lev < 1.0, 1.0 - lev, np.inf)
    elif cov_type in ("HC0", "HC1"):
        u = resid
    else:
        raise DomainError(f"unknown covariance type {cov_type!r}")
    a = (q * u[:, None]) @ rinv.T
    cov = a.T @ a
    if cov_type == "HC1":
        if n <= k:
            raise DomainError("HC1 needs more rows than columns")
        cov *= n / (n - k)
    cov = 0.5 * (cov + cov.T)
    return OlsFit(coef, resid, cov, cov_type)


def _check_treatment(treated, n):
    d = np.asarray(treated, dtype=float)
    if d.shape != (n,):
        raise DomainError("treatment and outcome lengths differ")
    if not np.all((d == 0) | (d == 1)):
        raise DomainError("treatment must be binary 0/1")
    return d.astype(bool)


def ate_mean_difference(outcome, treated):
    """Difference in means with the unequal-variance (Welch) standard error."""
    y = np.asarray(outcome, dtype=float)
    d = _check_treatment(treated, y.shape[0])
    y1, y0 = y[d], y[~d]
    if y1.size == 0 or y0.size == 0:
        raise EmptySampleError("mean difference needs both treatment groups")
    if y1.size < 2 or y0.size < 2:
        raise DomainError("each group needs at least two observations for a variance")
    est = y1.mean() - y0.mean()
    se = np.sqrt(y1.var(ddof=1) / y1.size + y0.var(ddof=1) / y0.size)
    return EffectEstimate.from_estimate(est, se, "mean_difference", y.size)


def ate_ols_controls(outcome, treated, controls, cov_type="HC1"):
    """Coefficient on the treatment in an OLS of outcome on [1, D, W]."""
    y = np.asarray(outcome, dtype=float)
    d = _check_treatment(treated, y.shape[0])
    if d.all() or not d.any():
        raise EmptySampleError("OLS with controls needs both treatment groups")
    w = np.asarray(controls, dtype=float).reshape(y.shape[0], -1)
    x = np.column_stack([np.ones_like(y), d.astype(float), w])
    fit = fit_ols(x, y, cov_type=cov_type)
    return EffectEstimate.from_estimate(
        fit.coefficients[1], fit.standard_errors[1], "ols_controls", y.size,
        diagnostics={"cov_type": cov_type})
