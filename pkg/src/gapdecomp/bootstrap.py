"""Nonparametric (row-resampling) bootstrap for any estimator closure."""
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GapDecompError, InferenceError
from .numkit import RngState, rng_derive_substream, two_sided_pvalue

log = logging.getLogger(__name__)


@dataclass
class BootstrapResult:
    point_estimate: np.ndarray
    replicate_estimates: np.ndarray = field(repr=False)
    standard_errors: np.ndarray
    p_values: np.ndarray
    n_failed_replicates: int
    replications: int
    seed: int
    warning: bool = False

    def __eq__(self, other):
        if not isinstance(other, BootstrapResult):
            return NotImplemented
        return (self.n_failed_replicates == other.n_failed_replicates
                and self.replications == other.replications
                and self.seed == other.seed
                and all(np.array_equal(a, b, equal_nan=True) for a, b in (
                    (self.point_estimate, other.point_estimate),
                    (self.replicate_estimates, other.replicate_estimates),
                    (self.standard_errors, other.standard_errors),
                    (self.p_values, other.p_values))))


def resample_indices(n, state, strata=None):
    """Row indices for one replicate: n draws with replacement (within strata if given)."""
    gen = state.generator()
    if strata is None:
        return gen.integers(0, n, n)
    strata = np.asarray(strata)
    idx = np.empty(n, dtype=np.int64)
    for s in np.unique(strata):
        rows = np.flatnonzero(strata == s)
        idx[rows] = rows[gen.integers(0, rows.size, rows.size)]
    return idx


def _take(data, idx):
    if hasattr(data, "take") and not isinstance(data, np.ndarray):
        return data.take(idx)
    return np.asarray(data)[idx]


def _one(estimator, data, n, root, b, strata):
    idx = resample_indices(n, rng_derive_substream(root, b), strata)
    try:
        return np.atleast_1d(np.asarray(estimator(_take(data, idx)), dtype=float))
    except (GapDecompError, np.linalg.LinAlgError, FloatingPointError) as exc:
        log.debug("bootstrap replicate %d failed: %s", b, exc)
        return None


def bootstrap(estimator, data, B=499, seed=0, workers=1, strata=None):
    """Bootstrap standard errors and normal p-values for ``estimator(data)``.

    Parameters
    ----------
    estimator : callable
        Pure function of a dataset (anything with ``take(rows)`` or an
        array) returning a real vector.
    data : Dataset or ndarray
    B : int
        Number of replicates; replicate ``b`` always uses substream ``b``.
    seed : int or RngState
    workers : int
        Process pool size; the result does not depend on it.
    strata : array_like, optional
        Resample within these groups instead of over all rows.

    Replicates whose estimator raises a package error are excluded and
    counted. More than ``B/2`` failures raise InferenceError; ``B/10`` or
    more set ``warning``.
    """
    if B < 2:
        raise DomainError("bootstrap needs B >= 2")
    n = len(data)
    root = seed if isinstance(seed, RngState) else RngState(int(seed))
    point = np.atleast_1d(np.asarray(estimator(data), dtype=float))
    if workers is None or workers <= 1:
        reps = [_one(estimator, data, n, root, b, strata) for b in range(B)]
    else:
        from joblib import Parallel, delayed
        reps = Parallel(n_jobs=workers)(
            delayed(_one)(estimator, data, n, root, b, strata) for b in range(B))
    out = np.full((B, point.size), np.nan)
    failed = 0
    for b, r in enumerate(reps):
        if r is None or r.shape != point.shape:
            failed += 1
        else:
            out[b] = r
    if failed > B / 2:
        raise InferenceError(f"{failed} of {B} bootstrap replicates failed")
    ok = out[~np.isnan(out).any(axis=1)]
    se = ok.std(axis=0, ddof=1)
    se[np.ptp(ok, axis=0) == 0] = 0.0  # rounding in the mean must not fake spread
    pv = np.array([two_sided_pvalue(e, s) for e, s in zip(point, se)])
    warn = failed >= B / 10
    if warn:
        log.warning("%d of %d bootstrap replicates failed", failed, B)
    return BootstrapResult(point, out, se, pv, failed, B,
                           root.seed if root.stream == () else seed, warn)
