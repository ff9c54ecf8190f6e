"""Numerical kernels shared by the estimators.

Dense least squares through a Householder QR factorization, Gaussian
distribution functions and a counter-based random stream that can be split
into independent substreams.
"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg, special

from .errors import DomainError, SingularMatrixError

# |R_jj| below this fraction of the column norm flags a dependent column.
RANK_TOL = 1e-10

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


def as_matrix(a, name="design"):
    """Return ``a`` as a finite 2-D float array (a read-only copy)."""
    m = np.array(a, dtype=float, copy=True)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise DomainError(f"{name} must be two-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError(f"{name} contains non-finite entries")
    m.setflags(write=False)
    return m


def qr_factor(design):
    """Economy QR of ``design`` with a rank check.

    Returns ``(q, r)``. Raises SingularMatrixError naming the first column
    that is (numerically) a linear combination of the preceding ones.
    """
    x = np.asarray(design, dtype=float)
    n, k = x.shape
    if n < k:
        raise SingularMatrixError(
            f"design has {n} rows but {k} columns", column=n)
    q, r = np.linalg.qr(x, mode="reduced")
    col_norms = np.linalg.norm(x, axis=0)
    diag = np.abs(np.diag(r))
    bad = np.flatnonzero(diag <= RANK_TOL * col_norms)
    if bad.size:
        j = int(bad[0])
        raise SingularMatrixError(
            f"design is rank deficient: column {j} is collinear with earlier columns",
            column=j)
    return q, r


def solve_least_squares(design, response):
    """Least-squares coefficients of ``response`` on ``design``.

    Parameters
    ----------
    design : (n, k) array_like
        Full column rank, ``n >= k``.
    response : (n,) array_like

    Returns
    -------
    ndarray of shape (k,)
    """
    q, r = qr_factor(design)
    y = np.asarray(response, dtype=float)
    return linalg.solve_triangular(r, q.T @ y, lower=False)


def r_inverse(r):
    """Inverse of the upper-triangular QR factor; ``(X'X)^-1 = Rinv @ Rinv.T``."""
    return linalg.solve_triangular(r, np.eye(r.shape[0]), lower=False)


def normal_cdf(x):
    return special.ndtr(x)


def normal_logcdf(x):
    """log Phi(x); the asymptotic routine is only used in the far lower tail."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    hi = x > 0
    lo = x < -5.0
    mid = ~hi & ~lo
    out[hi] = np.log1p(-special.ndtr(-x[hi]))
    out[mid] = np.log(special.ndtr(x[mid]))
    out[lo] = special.log_ndtr(x[lo])
    return out


def normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x - _LOG_SQRT_2PI)


def normal_logpdf(x):
    x = np.asarray(x, dtype=float)
    return -0.5 * x * x - _LOG_SQRT_2PI


def normal_quantile(p):
    """Inverse of the standard normal CDF; ``p`` must lie strictly in (0, 1)."""
    arr = np.asarray(p, dtype=float)
    if np.any(~(arr > 0.0) | ~(arr < 1.0)):
        raise DomainError("normal_quantile requires 0 < p < 1")
    return special.ndtri(arr)


def two_sided_pvalue(estimate, standard_error):
    """Normal-approximation two-sided p-value.

    A zero standard error gives 0 for a nonzero estimate and 1 otherwise.
    """
    if standard_error > 0:
        return float(2.0 * special.ndtr(-abs(estimate / standard_error)))
    return 0.0 if estimate != 0 else 1.0


@dataclass(frozen=True)
class RngState:
    """Position in a tree of random streams.

    ``stream`` is the path of substream indices from the root ``seed``;
    the same ``(seed, stream)`` yields the same draws on every platform.
    """

    seed: int
    stream: tuple = ()

    def generator(self):
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        return np.random.Generator(np.random.Philox(ss))


def rng_derive_substream(state, index):
    """Child stream ``index`` of ``state``; pure, no shared mutable state."""
    if index < 0:
        raise DomainError("substream index must be nonnegative")
    return RngState(state.seed, tuple(state.stream) + (int(index),))


def rng_draw_uniform(state, size=None):
    """Uniform draws on [0, 1) from the start of ``state``'s stream."""
    return state.generator().random(size)
