"""Linear Oaxaca-Blinder decomposition of a group gap, both reference groups.

Group coding: ``G = 1`` is the male side and ``G = 0`` the female side, so
``total_gap`` is mean(Y | G=1) - mean(Y | G=0) ("total m-f"). The
male-referenced components weight the mediator-mean difference with the
G=1 coefficients; the female-referenced ones with the G=0 coefficients.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from .data import complete_cases, mediator_set_tag
from .errors import EmptySampleError, SingularMatrixError
from .numkit import solve_least_squares

COMPONENTS = ("total", "indirect_ref_female", "direct_ref_female",
              "indirect_ref_male", "direct_ref_male")
# short column labels used by the text tables
SHORT_LABELS = ("total m-f", "indir.f", "dir.f", "indir.m", "dir.m")


@dataclass
class DecompositionResult:
    method: str
    mediator_set: str
    total_gap: float
    indirect_ref_female: float
    direct_ref_female: float
    indirect_ref_male: float
    direct_ref_male: float
    n_used: int
    n_dropped_missing: int = 0
    n_trimmed: int = 0
    standard_errors: dict = None
    p_values: dict = None
    bootstrap: dict = None
    details: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_vector(cls, method, mediator_set, vec, **kw):
        vals = dict(zip(("total_gap",) + COMPONENTS[1:], map(float, vec)))
        return cls(method=method, mediator_set=mediator_set, **vals, **kw)

    def vector(self):
        return np.array([self.total_gap, self.indirect_ref_female,
                         self.direct_ref_female, self.indirect_ref_male,
                         self.direct_ref_male])

    def with_inference(self, boot):
        """Copy carrying the bootstrap standard errors and p-values."""
        return replace(
            self,
            standard_errors=dict(zip(COMPONENTS, boot.standard_errors.tolist())),
            p_values=dict(zip(COMPONENTS, boot.p_values.tolist())),
            bootstrap={"replications": boot.replications,
                       "n_failed_replicates": boot.n_failed_replicates,
                       "seed": boot.seed,
                       "warning": boot.warning})

    def adding_up_error(self):
        t = self.total_gap
        return max(abs(self.indirect_ref_female + self.direct_ref_female - t),
                   abs(self.indirect_ref_male + self.direct_ref_male - t))


def _group_fit(y, x, names, label):
    design = np.column_stack([np.ones(y.shape[0]), x])
    try:
        return solve_least_squares(design, y)
    except SingularMatrixError as exc:
        j = exc.column
        col = "intercept" if j == 0 else (names[j - 1] if j - 1 < len(names) else None)
        raise SingularMatrixError(
            f"{label} subsample: regressor {col!r} is collinear with "
            f"earlier columns (intercept included)", column=j, column_name=col) from None


def oaxaca_components(y, g, x, names=None):
    """Point estimates in COMPONENTS order from arrays.

    ``x`` holds the regressors (mediators, plus controls if requested),
    one column each; ``g`` is binary with 1 = male.
    """
    y = np.asarray(y, dtype=float)
    g = np.asarray(g) == 1
    x = np.asarray(x, dtype=float).reshape(y.shape[0], -1)
    if names is None:
        names = [f"x{j}" for j in range(x.shape[1])]
    if g.all() or not g.any():
        raise EmptySampleError("Oaxaca-Blinder needs observations in both groups")
    b1 = _group_fit(y[g], x[g], names, "G=1 (male)")
    b0 = _group_fit(y[~g], x[~g], names, "G=0 (female)")
    xbar1, xbar0 = x[g].mean(axis=0), x[~g].mean(axis=0)
    dx = xbar1 - xbar0
    dc = b1[0] - b0[0]
    db = b1[1:] - b0[1:]
    total = y[g].mean() - y[~g].mean()
    ind_m = dx @ b1[1:]
    dir_m = dc + xbar0 @ db
    ind_f = dx @ b0[1:]
    dir_f = dc + xbar1 @ db
    return np.array([total, ind_f, dir_f, ind_m, dir_m])


def oaxaca_columns(roles, mediator_set, include_controls=False):
    regressors = roles.mediators(mediator_set)
    if include_controls:
        regressors = regressors + list(roles.controls)
    return regressors


def oaxaca_decompose(data, roles, mediator_set="M1", include_controls=False):
    """Oaxaca-Blinder decomposition of the outcome gap on the complete cases.

    Controls are left out of the group regressions unless
    ``include_controls`` is set.
    """
    tag = mediator_set_tag(mediator_set)
    regressors = oaxaca_columns(roles, tag, include_controls)
    used = [roles.group, roles.outcome] + regressors
    sample = complete_cases(data, used)
    sub = data.take(sample.kept_row_indices)
    vec = oaxaca_components(sub.column(roles.outcome), sub.column(roles.group),
                            sub.matrix(regressors), regressors)
    return DecompositionResult.from_vector(
        "oaxaca", tag, vec, n_used=sample.n_kept,
        n_dropped_missing=sample.n_dropped_missing,
        details={"regressors": regressors, "include_controls": include_controls})


def oaxaca_estimator(roles, mediator_set="M1", include_controls=False):
    """Dataset -> component vector closure for the bootstrap."""
    regressors = oaxaca_columns(roles, mediator_set_tag(mediator_set), include_controls)

    def estimator(sub):
        return oaxaca_components(sub.column(roles.outcome), sub.column(roles.group),
                                 sub.matrix(regressors), regressors)
    return estimator
