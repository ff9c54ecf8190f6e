"""Synthetic data with known direct and indirect effects, and a Monte Carlo harness.

Structural equations (``W`` iid standard normal)::

    G = 1{ U < Phi(gamma0 + W gamma) }
    X = alpha G + W delta + noise_sd_x * e_x
    Y = theta G + X beta + G (X interaction) + (X**2) beta_sq + W kappa + noise_sd_y * e_y

The defaults have no interaction and no squared term, so both reference
groups share the same truth: direct = theta, indirect = alpha'beta.
"""
import configparser
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .bootstrap import bootstrap
from .data import Dataset, RoleMap
from .errors import DomainError, GapDecompError
from .ipw import TrimmingPolicy, ipw_from_arrays
from .numkit import RngState, normal_cdf, rng_derive_substream
from .oaxaca import COMPONENTS, oaxaca_components


def _vec(v):
    return np.atleast_1d(np.asarray(v, dtype=float))


@dataclass
class SyntheticDgp:
    n: int
    dim_w: int
    gamma: np.ndarray
    alpha: np.ndarray
    delta: np.ndarray
    theta: float
    beta: np.ndarray
    kappa: np.ndarray
    noise_sd_x: float = 1.0
    noise_sd_y: float = 1.0
    seed: int = 0
    gamma0: float = 0.0
    beta_sq: np.ndarray = None
    interaction: np.ndarray = None
    n_m2: int = 0

    def __post_init__(self):
        self.gamma = _vec(self.gamma)
        self.alpha = _vec(self.alpha)
        self.beta = _vec(self.beta)
        self.kappa = _vec(self.kappa)
        dx = self.alpha.size
        self.delta = np.asarray(self.delta, dtype=float).reshape(self.dim_w, dx)
        self.beta_sq = np.zeros(dx) if self.beta_sq is None else _vec(self.beta_sq)
        self.interaction = (np.zeros(dx) if self.interaction is None
                            else _vec(self.interaction))
        if self.gamma.size != self.dim_w or self.kappa.size != self.dim_w:
            raise DomainError("gamma and kappa need dim_w entries")
        if self.beta.size != dx or self.beta_sq.size != dx or self.interaction.size != dx:
            raise DomainError("beta, beta_sq and interaction need one entry per mediator")
        if not (self.noise_sd_x > 0 and self.noise_sd_y > 0):
            raise DomainError("noise standard deviations must be positive")
        if self.n < 1 or not 0 <= self.n_m2 <= dx:
            raise DomainError("invalid n or n_m2")

    @property
    def dim_x(self):
        return self.alpha.size

    def roles(self):
        xs = [f"x{j + 1}" for j in range(self.dim_x)]
        cut = self.dim_x - self.n_m2
        return RoleMap(group="g", outcome="y",
                       controls=[f"w{j + 1}" for j in range(self.dim_w)],
                       mediators_m1=xs[:cut], mediators_m2=xs[cut:])


@dataclass
class TrueEffects:
    direct: float
    indirect: float
    total: float
    indirect_ref_female: float
    direct_ref_female: float

    @property
    def indirect_ref_male(self):
        return self.indirect

    @property
    def direct_ref_male(self):
        return self.direct

    def vector(self):
        return np.array([self.total, self.indirect_ref_female, self.direct_ref_female,
                         self.indirect, self.direct])


def true_effects(dgp):
    """Population direct/indirect/total effects; ``direct``/``indirect`` use G=1 as reference."""
    a, b, z, s = dgp.alpha, dgp.beta, dgp.interaction, dgp.beta_sq
    sq = float(s @ (a * a))
    ind_m = float(a @ (b + z)) + sq
    dir_m = float(dgp.theta)
    ind_f = float(a @ b) + sq
    dir_f = float(dgp.theta + a @ z)
    return TrueEffects(dir_m, ind_m, dir_m + ind_m, ind_f, dir_f)


def simulate_arrays(dgp, state=None):
    """Draw ``(y, g, x, w)`` arrays; ``state`` defaults to ``RngState(dgp.seed)``."""
    gen = (state or RngState(dgp.seed)).generator()
    n = dgp.n
    w = gen.standard_normal((n, dgp.dim_w))
    g = (gen.random(n) < normal_cdf(dgp.gamma0 + w @ dgp.gamma)).astype(float)
    x = (g[:, None] * dgp.alpha + w @ dgp.delta
         + dgp.noise_sd_x * gen.standard_normal((n, dgp.dim_x)))
    y = (dgp.theta * g + x @ dgp.beta + g * (x @ dgp.interaction)
         + (x * x) @ dgp.beta_sq + w @ dgp.kappa
         + dgp.noise_sd_y * gen.standard_normal(n))
    return y, g, x, w


def generate(dgp, state=None):
    """Role-tagged Dataset drawn from ``dgp`` (deterministic in the seed)."""
    y, g, x, w = simulate_arrays(dgp, state)
    roles = dgp.roles()
    cols = {"g": g, "y": y}
    cols.update({c: x[:, j] for j, c in enumerate(roles.mediators("all"))})
    cols.update({c: w[:, j] for j, c in enumerate(roles.controls)})
    return Dataset.from_columns(cols)


@dataclass
class ExperimentDgp:
    """Randomized binary treatment with a sparse linear outcome.

    ``Y = tau D + W coef + noise``, with ``coef`` nonzero (value
    ``signal``) on the first ``n_relevant`` of ``n_covariates`` columns.
    """

    n: int = 2000
    n_covariates: int = 50
    n_relevant: int = 5
    tau: float = 2.0
    signal: float = 1.0
    noise_sd: float = 1.0
    p_treat: float = 0.5
    seed: int = 0

    def coefficients(self):
        c = np.zeros(self.n_covariates)
        c[:self.n_relevant] = self.signal
        return c


def simulate_experiment(dgp, state=None):
    """Draw ``(y, d, w)`` for an ExperimentDgp."""
    gen = (state or RngState(dgp.seed)).generator()
    w = gen.standard_normal((dgp.n, dgp.n_covariates))
    d = (gen.random(dgp.n) < dgp.p_treat).astype(float)
    y = dgp.tau * d + w @ dgp.coefficients() + dgp.noise_sd * gen.standard_normal(dgp.n)
    return y, d, w


@dataclass
class MonteCarloReport:
    estimator: str
    replications: int
    components: tuple
    truth: np.ndarray
    estimates: np.ndarray = field(repr=False)
    standard_errors: np.ndarray = field(repr=False)
    n_failed: int = 0

    def _ok(self):
        return ~np.isnan(self.estimates).any(axis=1)

    @property
    def mean_bias(self):
        return self.estimates[self._ok()].mean(axis=0) - self.truth

    @property
    def rmse(self):
        err = self.estimates[self._ok()] - self.truth
        return np.sqrt(np.mean(err ** 2, axis=0))

    @property
    def ci_coverage(self):
        if self.standard_errors is None:
            return np.full(len(self.components), np.nan)
        ok = self._ok() & ~np.isnan(self.standard_errors).any(axis=1)
        half = 1.96 * self.standard_errors[ok]
        return np.mean(np.abs(self.estimates[ok] - self.truth) <= half, axis=0)

    def to_dict(self):
        return {
            "estimator": self.estimator,
            "replications": self.replications,
            "n_failed": self.n_failed,
            "components": {
                c: {"truth": float(t), "mean_bias": float(b), "rmse": float(r),
                    "ci_coverage": None if np.isnan(cv) else float(cv)}
                for c, t, b, r, cv in zip(self.components, self.truth, self.mean_bias,
                                          self.rmse, self.ci_coverage)},
        }


DECOMP_ESTIMATORS = ("oaxaca", "ipw")
ATE_ESTIMATORS = ("mean_difference", "ols_controls", "double_lasso")


def _decomp_replication(dgp, estimator, r, bootstrap_b, policy, root):
    state = rng_derive_substream(root, r)
    y, g, x, w = simulate_arrays(dgp, rng_derive_substream(state, 0))
    dx = x.shape[1]
    if estimator == "oaxaca":
        def est(a):
            return oaxaca_components(a[:, 0], a[:, 1], a[:, 2:2 + dx])
    else:
        _, _, fits = ipw_from_arrays(y, g, x, w, policy)
        starts = tuple(f.coefficients for f in fits)

        def est(a):
            vec, _, _ = ipw_from_arrays(a[:, 0], a[:, 1], a[:, 2:2 + dx], a[:, 2 + dx:],
                                        policy, starts)
            return vec
    arr = np.column_stack([y, g, x, w])
    point = est(arr)
    if not bootstrap_b:
        return point, None
    boot = bootstrap(est, arr, B=bootstrap_b, seed=rng_derive_substream(state, 1))
    return point, boot.standard_errors


def _ate_replication(dgp, estimator, r, root):
    from .lasso import ate_double_lasso
    from .ols import ate_mean_difference, ate_ols_controls
    state = rng_derive_substream(root, r)
    y, d, w = simulate_experiment(dgp, rng_derive_substream(state, 0))
    if estimator == "mean_difference":
        e = ate_mean_difference(y, d)
    elif estimator == "ols_controls":
        e = ate_ols_controls(y, d, w)
    else:
        e = ate_double_lasso(y, d, w, seed=int(state.generator().integers(2**63)))
    return np.array([e.estimate]), np.array([e.standard_error])


def monte_carlo(dgp, estimator, replications, bootstrap_b=0, seed=None,
                policy=TrimmingPolicy(), workers=1):
    """Repeatedly simulate, estimate and compare with the closed-form truth.

    Decomposition estimators (``oaxaca``, ``ipw``) take a SyntheticDgp and
    get coverage from ``estimate +- 1.96 * bootstrap SE`` when
    ``bootstrap_b > 0``. The ATE estimators take an ExperimentDgp and use
    their own analytic standard errors. Replication ``r`` draws from
    substream ``r`` of ``seed`` (default: the dgp seed).
    """
    if replications < 2:
        raise DomainError("need at least two replications")
    root = RngState(dgp.seed if seed is None else seed)
    if estimator in DECOMP_ESTIMATORS:
        if not isinstance(dgp, SyntheticDgp):
            raise DomainError(f"{estimator} needs a SyntheticDgp")
        truth = true_effects(dgp).vector()
        comps = COMPONENTS

        def job(r):
            return _decomp_replication(dgp, estimator, r, bootstrap_b, policy, root)
    elif estimator in ATE_ESTIMATORS:
        if not isinstance(dgp, ExperimentDgp):
            raise DomainError(f"{estimator} needs an ExperimentDgp")
        truth = np.array([dgp.tau])
        comps = ("ate",)

        def job(r):
            return _ate_replication(dgp, estimator, r, root)
    else:
        raise DomainError(f"unknown estimator {estimator!r}")

    def safe(r):
        try:
            return job(r)
        except GapDecompError:
            return None

    if workers and workers > 1:
        from joblib import Parallel, delayed
        results = Parallel(n_jobs=workers)(delayed(safe)(r) for r in range(replications))
    else:
        results = [safe(r) for r in range(replications)]
    k = len(comps)
    est = np.full((replications, k), np.nan)
    ses = np.full((replications, k), np.nan)
    has_se = False
    failed = 0
    for r, res in enumerate(results):
        if res is None:
            failed += 1
            continue
        est[r] = res[0]
        if res[1] is not None:
            ses[r] = res[1]
            has_se = True
    return MonteCarloReport(estimator, replications, comps, truth, est,
                            ses if has_se else None, failed)


# -- config files -----------------------------------------------------------

_ARRAY_FIELDS = {"gamma", "alpha", "beta", "kappa", "beta_sq", "interaction"}
_INT_FIELDS = {"n", "dim_w", "seed", "n_m2"}


def _parse_list(text):
    return [float(t) for t in text.replace(";", ",").split(",") if t.strip()]


def dgp_from_config(cp, section="dgp"):
    """SyntheticDgp from a ConfigParser section; ``delta`` rows are ';'-separated."""
    if not cp.has_section(section):
        raise DomainError(f"config has no [{section}] section")
    sec = cp[section]
    kw = {}
    names = {f.name for f in fields(SyntheticDgp)}
    for key, raw in sec.items():
        if key not in names:
            raise DomainError(f"unknown dgp key {key!r}")
        if key in _ARRAY_FIELDS:
            kw[key] = _parse_list(raw)
        elif key == "delta":
            rows = [r for r in raw.split(";") if r.strip()]
            kw[key] = [[float(t) for t in r.split(",") if t.strip()] for r in rows]
        elif key in _INT_FIELDS:
            kw[key] = int(raw)
        else:
            kw[key] = float(raw)
    if "delta" not in kw:
        kw["delta"] = np.zeros((kw.get("dim_w", 0), len(kw.get("alpha", []))))
    return SyntheticDgp(**kw)


def load_dgp(path):
    cp = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    return dgp_from_config(cp)


def dgp_to_config(dgp, section="dgp"):
    cp = configparser.ConfigParser()
    out = {}
    for f in fields(SyntheticDgp):
        v = getattr(dgp, f.name)
        if f.name == "delta":
            out[f.name] = "; ".join(", ".join(repr(float(t)) for t in row) for row in v) \
                if v.size else ""
        elif f.name in _ARRAY_FIELDS:
            out[f.name] = ", ".join(repr(float(t)) for t in v)
        else:
            out[f.name] = repr(v) if isinstance(v, float) else str(v)
    cp[section] = out
    return cp


def with_seed(dgp, seed):
    return replace(dgp, seed=seed)
