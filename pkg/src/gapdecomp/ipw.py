"""Inverse-probability-weighted mediation decomposition.

Propensities ``Pr(G=1|W)`` and ``Pr(G=1|X,W)`` come from probit fits on the
complete cases; rows with extreme scores are trimmed and Hajek-normalized
weights are recomputed on the remaining rows. Group coding as in
:mod:`gapdecomp.oaxaca` (1 = male).

With ``p = Pr(G=1|W)`` and ``q = Pr(G=1|X,W)`` the four weighted means are

* ``E[Y(1,X(1))]``: G=1 rows, weight ``1/p``
* ``E[Y(1,X(0))]``: G=1 rows, weight ``(1-q) / (q (1-p))``
* ``E[Y(0,X(0))]``: G=0 rows, weight ``1/(1-p)``
* ``E[Y(0,X(1))]``: G=0 rows, weight ``q / ((1-q) p)``

each normalized to sum to one within its group.
"""
from dataclasses import dataclass, field

import numpy as np

from .data import complete_cases, mediator_set_tag
from .errors import DomainError, EmptySampleError
from .oaxaca import DecompositionResult
from .probit import fit_probit, predict_proba

TRIM_ON = ("both", "xw")


@dataclass(frozen=True)
class TrimmingPolicy:
    lower: float = 0.02
    upper: float = 0.98
    on: str = "both"

    def __post_init__(self):
        if not (0.0 <= self.lower < self.upper <= 1.0):
            raise DomainError(
                f"trimming bounds must satisfy 0 <= lower < upper <= 1, got "
                f"({self.lower}, {self.upper})")
        if self.on not in TRIM_ON:
            raise DomainError(f"trim 'on' must be one of {TRIM_ON}")

    @classmethod
    def symmetric(cls, level, on="both"):
        return cls(level, 1.0 - level, on)


@dataclass
class PropensityPair:
    p_w: np.ndarray
    p_xw: np.ndarray
    kept_row_indices: np.ndarray = field(default=None, repr=False)
    n_dropped_missing: int = 0
    fits: tuple = field(default=(), repr=False)

    def __post_init__(self):
        self.p_w = np.asarray(self.p_w, dtype=float)
        self.p_xw = np.asarray(self.p_xw, dtype=float)
        if self.p_w.shape != self.p_xw.shape:
            raise DomainError("score vectors differ in length")


def _designs(sub, roles, mediators):
    n = sub.n_rows
    w = sub.matrix(list(roles.controls))
    x = sub.matrix(mediators)
    d_w = np.column_stack([np.ones(n), w])
    d_xw = np.column_stack([np.ones(n), x, w])
    return d_w, d_xw


def propensity_scores(g, design_w, design_xw, starts=(None, None)):
    fw = fit_probit(design_w, g, start=starts[0])
    fxw = fit_probit(design_xw, g, start=starts[1])
    return fw, fxw


def estimate_propensities(data, roles, mediator_set="M1"):
    """Probit fits of G on [1, W] and on [1, X, W] over the complete cases."""
    mediators = roles.mediators(mediator_set)
    used = [roles.group, roles.outcome, *mediators, *roles.controls]
    sample = complete_cases(data, used)
    sub = data.take(sample.kept_row_indices)
    d_w, d_xw = _designs(sub, roles, mediators)
    fw, fxw = propensity_scores(sub.column(roles.group), d_w, d_xw)
    return PropensityPair(fw.fitted_probabilities, fxw.fitted_probabilities,
                          sample.kept_row_indices, sample.n_dropped_missing,
                          (fw, fxw))


def trim(scores, policy=TrimmingPolicy()):
    """Positions kept by ``policy`` and the number trimmed.

    A row is dropped when a checked score lies outside ``[lower, upper]``;
    ``policy.on`` selects both score vectors or only ``p_xw``.
    """
    def inside(p):
        return (p >= policy.lower) & (p <= policy.upper)
    ok = inside(scores.p_xw)
    if policy.on == "both":
        ok &= inside(scores.p_w)
    kept = np.flatnonzero(ok)
    if kept.size == 0:
        raise EmptySampleError("every observation was trimmed")
    return kept, int(ok.size - kept.size)


def _normalized(raw):
    s = raw.sum()
    if not s > 0:
        raise EmptySampleError("weights sum to zero within a group")
    return raw / s


def ipw_weights(g, p_w, p_xw):
    """The four normalized weight vectors, each over its own group's rows."""
    g = np.asarray(g) == 1
    p, q = np.asarray(p_w, float), np.asarray(p_xw, float)
    if g.all() or not g.any():
        raise EmptySampleError("IPW mediation needs observations in both groups")
    return {
        "y1x1": _normalized(1.0 / p[g]),
        "y1x0": _normalized((1.0 - q[g]) / (q[g] * (1.0 - p[g]))),
        "y0x0": _normalized(1.0 / (1.0 - p[~g])),
        "y0x1": _normalized(q[~g] / ((1.0 - q[~g]) * p[~g])),
    }


def ipw_components(y, g, p_w, p_xw):
    """Decomposition vector (COMPONENTS order) from given scores; no trimming."""
    y = np.asarray(y, dtype=float)
    gb = np.asarray(g) == 1
    wts = ipw_weights(gb, p_w, p_xw)
    y1, y0 = y[gb], y[~gb]
    m11 = wts["y1x1"] @ y1
    m10 = wts["y1x0"] @ y1
    m00 = wts["y0x0"] @ y0
    m01 = wts["y0x1"] @ y0
    return np.array([m11 - m00, m01 - m00, m11 - m01, m11 - m10, m10 - m00])


def ipw_from_arrays(y, g, x, w, policy=TrimmingPolicy(), starts=(None, None)):
    """Fit propensities, trim and decompose. Returns ``(vector, n_trimmed, fits)``."""
    y = np.asarray(y, dtype=float)
    g = np.asarray(g, dtype=float)
    n = y.shape[0]
    x = np.asarray(x, dtype=float).reshape(n, -1)
    w = np.asarray(w, dtype=float).reshape(n, -1)
    d_w = np.column_stack([np.ones(n), w])
    d_xw = np.column_stack([np.ones(n), x, w])
    fw, fxw = propensity_scores(g, d_w, d_xw, starts)
    scores = PropensityPair(fw.fitted_probabilities, fxw.fitted_probabilities)
    kept, n_trim = trim(scores, policy)
    vec = ipw_components(y[kept], g[kept], scores.p_w[kept], scores.p_xw[kept])
    return vec, n_trim, (fw, fxw)


def ipw_mediation(data, roles, mediator_set="M1", policy=TrimmingPolicy()):
    """IPW decomposition: listwise deletion, probit fits, trimming, reweighting."""
    tag = mediator_set_tag(mediator_set)
    mediators = roles.mediators(tag)
    used = [roles.group, roles.outcome, *mediators, *roles.controls]
    sample = complete_cases(data, used)
    sub = data.take(sample.kept_row_indices)
    vec, n_trim, fits = ipw_from_arrays(
        sub.column(roles.outcome), sub.column(roles.group),
        sub.matrix(mediators), sub.matrix(list(roles.controls)), policy)
    return DecompositionResult.from_vector(
        "ipw", tag, vec, n_used=sample.n_kept - n_trim,
        n_dropped_missing=sample.n_dropped_missing, n_trimmed=n_trim,
        details={"policy": {"lower": policy.lower, "upper": policy.upper,
                            "on": policy.on},
                 "probit_coefficients": [f.coefficients.tolist() for f in fits]})


def ipw_estimator(roles, mediator_set="M1", policy=TrimmingPolicy(), starts=(None, None)):
    """Dataset -> component vector closure; propensities are refit on every call."""
    mediators = roles.mediators(mediator_set_tag(mediator_set))
    controls = list(roles.controls)

    def estimator(sub):
        vec, _, _ = ipw_from_arrays(sub.column(roles.outcome), sub.column(roles.group),
                                    sub.matrix(mediators), sub.matrix(controls),
                                    policy, starts)
        return vec
    return estimator
