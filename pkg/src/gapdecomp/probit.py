"""Maximum-likelihood probit regression."""
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NonConvergenceError, SeparationError, SingularMatrixError
from .numkit import (normal_cdf, normal_logcdf, normal_logpdf, qr_factor,
                     solve_least_squares)

# Fitted probabilities this close to 0 or 1 signal (quasi-)separation.
SEPARATION_EPS = 1e-12
_PROB_CLIP = 1e-15
_MAX_HALVINGS = 40
# relative Newton step size that still counts as movement at the stopping point
_STEP_TOL = 1e-6


@dataclass
class ProbitFit:
    coefficients: np.ndarray
    log_likelihood: float
    iterations: int
    converged: bool
    fitted_probabilities: np.ndarray = field(repr=False)
    gradient: np.ndarray = field(repr=False, default=None)
    history: list = field(repr=False, default_factory=list)


def _check_inputs(design, response):
    x = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise DomainError(
            f"design shape {x.shape} does not match response length {y.shape[0]}")
    if not np.all((y == 0) | (y == 1)):
        raise DomainError("probit response must be binary 0/1")
    if not (np.all(np.isfinite(x))):
        raise DomainError("design contains non-finite entries")
    return x, y


def log_likelihood(coefficients, design, response):
    """Sum over rows of y log Phi(xb) + (1-y) log(1 - Phi(xb))."""
    eta = np.asarray(design) @ np.asarray(coefficients, dtype=float)
    q = 2.0 * np.asarray(response, dtype=float) - 1.0
    return float(np.sum(normal_logcdf(q * eta)))


def _score_terms(eta, q):
    # r = phi(q eta) / Phi(q eta), computed in logs for stability in the tails
    r = np.exp(normal_logpdf(eta) - normal_logcdf(q * eta))
    score = q * r
    weight = r * (r + q * eta)
    return score, weight


def gradient(coefficients, design, response):
    """Gradient of the log-likelihood divided by the number of rows."""
    x = np.asarray(design, dtype=float)
    eta = x @ np.asarray(coefficients, dtype=float)
    q = 2.0 * np.asarray(response, dtype=float) - 1.0
    score, _ = _score_terms(eta, q)
    return x.T @ score / x.shape[0]


def fit_probit(design, response, tol=1e-8, max_iter=100, start=None):
    """Fit ``Pr(y=1|x) = Phi(x b)`` by Newton-Raphson with step-halving.

    Each Newton step solves the weighted least-squares problem implied by the
    observed information through a QR factorization. Convergence is declared
    when the max-norm of the per-observation mean gradient is at most ``tol``.

    Raises
    ------
    SeparationError
        At the stopping point some fitted probability lies within 1e-12 of
        0 or 1 and the Newton step is still not negligible, i.e. the
        likelihood has no finite maximizer.
    NonConvergenceError
        ``max_iter`` Newton steps were not enough.
    """
    x, y = _check_inputs(design, response)
    n, k = x.shape
    qr_factor(x)  # rank check up front so the error names the bad column
    q = 2.0 * y - 1.0
    beta = np.zeros(k) if start is None else np.array(start, dtype=float)
    eta = x @ beta
    ll = float(np.sum(normal_logcdf(q * eta)))
    history = [ll]
    it = 0
    while True:
        score, weight = _score_terms(eta, q)
        grad = x.T @ score / n
        gmax = float(np.max(np.abs(grad))) if k else 0.0
        p = normal_cdf(eta)
        near = (p < SEPARATION_EPS) | (p > 1.0 - SEPARATION_EPS)
        if gmax <= tol or it >= max_iter:
            if np.any(near) and _diverging(x, score, weight, beta):
                raise SeparationError(
                    f"{int(near.sum())} fitted probabilities within {SEPARATION_EPS:g} "
                    f"of 0 or 1 and the coefficients keep growing; no finite MLE")
            if gmax <= tol:
                return ProbitFit(beta, ll, it, True,
                                 np.clip(p, _PROB_CLIP, 1 - _PROB_CLIP), grad, history)
            raise NonConvergenceError(
                f"probit did not converge in {max_iter} iterations "
                f"(max gradient {gmax:.3g})", last_iterate=beta)
        step = _newton_step(x, score, weight)
        t = 1.0
        for _ in range(_MAX_HALVINGS):
            cand = beta + t * step
            eta_c = x @ cand
            ll_c = float(np.sum(normal_logcdf(q * eta_c)))
            if ll_c >= ll:
                break
            t *= 0.5
        else:
            raise NonConvergenceError(
                f"probit step-halving failed at iteration {it} "
                f"(max gradient {gmax:.3g})", last_iterate=beta)
        beta, eta, ll = cand, eta_c, ll_c
        history.append(ll)
        it += 1


def _newton_step(x, score, weight):
    # observed-information Newton step as a weighted least-squares solve;
    # rows whose weight underflows to zero carry no information
    sw = np.sqrt(weight)
    z = np.divide(score, sw, out=np.zeros_like(score), where=sw > 0)
    return solve_least_squares(x * sw[:, None], z)


def _diverging(x, score, weight, beta):
    """True when the Newton step at ``beta`` is still large (no finite optimum)."""
    try:
        step = _newton_step(x, score, weight)
    except SingularMatrixError:
        return True
    return float(np.max(np.abs(step))) > _STEP_TOL * (1.0 + float(np.max(np.abs(beta))))


def predict_proba(fit, design):
    """Phi(x b) per row, clipped away from exactly 0 and 1.

    ``fit`` may be a ProbitFit or a bare coefficient vector.
    """
    coef = fit.coefficients if isinstance(fit, ProbitFit) else np.asarray(fit, float)
    x = np.asarray(design, dtype=float)
    if x.ndim != 2 or x.shape[1] != coef.shape[0]:
        raise DomainError(
            f"design has shape {x.shape}, expected {coef.shape[0]} columns")
    return np.clip(normal_cdf(x @ coef), _PROB_CLIP, 1 - _PROB_CLIP)
