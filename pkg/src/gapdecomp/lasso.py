"""L1-penalized regression by coordinate descent and a cross-fitted AIPW ATE.

Both solvers work on internally standardized columns (mean 0, variance 1,
population scaling) with an unpenalized intercept, and report coefficients
on the original scale. The penalty for the ATE nuisance models is chosen by
K-fold cross-validation over a geometric grid.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EmptySampleError, NonConvergenceError
from .numkit import RngState, rng_derive_substream
from .ols import EffectEstimate

PROB_CLAMP = 1e-6
_MIN_IRLS_WEIGHT = 1e-5


@dataclass
class LassoFit:
    intercept: float
    coefficients: np.ndarray
    lam: float
    active_set: list
    family: str = "gaussian"
    iterations: int = 0
    converged: bool = True
    std_coefficients: np.ndarray = field(default=None, repr=False)
    center: np.ndarray = field(default=None, repr=False)
    scale: np.ndarray = field(default=None, repr=False)
    objective_trace: list = field(default=None, repr=False)

    @property
    def lambda_(self):
        return self.lam

    def linear_predictor(self, design):
        return self.intercept + np.asarray(design, dtype=float) @ self.coefficients

    def predict(self, design):
        """Fitted mean; for the binomial family, clamped probabilities."""
        eta = self.linear_predictor(design)
        if self.family == "binomial":
            return np.clip(_sigmoid(eta), PROB_CLAMP, 1 - PROB_CLAMP)
        return eta


def _sigmoid(eta):
    return 0.5 * (1.0 + np.tanh(0.5 * eta))


def soft_threshold(z, lam):
    return np.sign(z) * np.maximum(np.abs(z) - lam, 0.0)


def _standardize(x):
    if not np.all(np.isfinite(x)):
        raise DomainError("lasso design contains non-finite entries")
    center = x.mean(axis=0)
    scale = x.std(axis=0)
    live = scale > 1e-12 * np.maximum(1.0, np.abs(center))
    safe = np.where(live, scale, 1.0)
    z = (x - center) / safe
    z[:, ~live] = 0.0
    return z, center, safe, live


def _finish(b0_std, beta_std, center, scale, lam, family, it, conv, trace=None):
    coef = beta_std / scale
    intercept = float(b0_std - center @ coef)
    return LassoFit(intercept, coef, float(lam),
                    np.flatnonzero(beta_std).tolist(), family, it, conv,
                    beta_std, center, scale, trace)


def _cd_gram(gram, c, lam, beta, tol, max_sweeps, live, trace=None, quad=None):
    """Coordinate descent on ``0.5 b'Gb - c'b + lam |b|_1``.

    Alternates full sweeps with sweeps over the active set. Works in place on ``beta``; returns ``(sweeps, converged)``. ``trace``,
    if given, collects the objective after every sweep (``quad`` is the
    constant term).
    """
    diag = np.diag(gram)
    grad = c - gram @ beta
    cols = np.flatnonzero(live & (diag > 0))
    sweeps = 0
    full = True
    while sweeps < max_sweeps:
        sweeps += 1
        todo = cols if full else cols[beta[cols] != 0]
        dmax = 0.0
        for j in todo:
            old = beta[j]
            z = grad[j] + diag[j] * old
            new = np.sign(z) * max(abs(z) - lam, 0.0) / diag[j]
            if new != old:
                delta = new - old
                beta[j] = new
                grad -= gram[:, j] * delta
                if abs(delta) > dmax:
                    dmax = abs(delta)
        if trace is not None:
            trace.append(quad + 0.5 * beta @ gram @ beta - c @ beta
                         + lam * np.abs(beta).sum())
        if dmax <= tol:
            if full:
                return sweeps, True
            full = True
        else:
            full = False
    return sweeps, False


class _Problem:
    """Standardized design shared by every penalty on a path."""

    def __init__(self, design, response, family):
        x = np.asarray(design, dtype=float)
        y = np.asarray(response, dtype=float)
        if x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise DomainError("design and response sizes differ")
        if not np.all(np.isfinite(y)):
            raise DomainError("response contains non-finite entries")
        if family == "binomial":
            if not np.all((y == 0) | (y == 1)):
                raise DomainError("logistic lasso response must be binary 0/1")
            if y.min() == y.max():
                raise DomainError("logistic lasso response is constant; no finite intercept")
        self.family = family
        self.n, self.k = x.shape
        self.y = y
        self.z, self.center, self.scale, self.live = _standardize(x)
        self.ybar = y.mean()
        if family == "gaussian":
            yc = y - self.ybar
            self.gram = self.z.T @ self.z / self.n
            self.c = self.z.T @ yc / self.n
            self.quad = 0.5 * yc @ yc / self.n
        else:
            self.a = np.column_stack([np.ones(self.n), self.z])
            self.live_a = np.concatenate([[True], self.live])

    def lambda_max(self):
        if self.k == 0:
            return 0.0
        return float(np.max(np.abs(self.z.T @ (self.y - self.ybar))) / self.n)


def _check_lam(lam):
    if not lam >= 0 or not np.isfinite(lam):
        raise DomainError("lambda must be a nonnegative finite number")


def _solve_gaussian(prob, lam, tol, max_sweeps=100000, start=None, trace=False):
    _check_lam(lam)
    beta = np.zeros(prob.k) if start is None else np.array(start, dtype=float)
    tr = [] if trace else None
    sweeps, conv = _cd_gram(prob.gram, prob.c, lam, beta, tol, max_sweeps,
                            prob.live, tr, quad=prob.quad)
    if not conv:
        raise NonConvergenceError(
            f"lasso coordinate descent did not converge in {max_sweeps} sweeps",
            last_iterate=beta)
    return _finish(prob.ybar, beta, prob.center, prob.scale, lam, "gaussian",
                   sweeps, conv, tr)


def fit_lasso(design, response, lam, tol=1e-7, max_sweeps=100000, start=None,
              trace=False):
    """Gaussian lasso.

    Minimizes ``(1/2n)||y - b0 - Z b||^2 + lam ||b||_1`` over standardized
    columns ``Z`` by cyclic coordinate descent with covariance updates,
    until the largest coefficient change in a full sweep is at most ``tol``.
    ``start`` holds standardized-scale slopes; ``trace`` records the
    objective after each sweep in ``fit.objective_trace``.
    """
    return _solve_gaussian(_Problem(design, response, "gaussian"), lam, tol,
                           max_sweeps, start, trace)


def _logistic_objective(eta, y, beta, lam):
    # mean negative log-likelihood + penalty
    nll = np.mean(np.logaddexp(0.0, eta) - y * eta)
    return nll + lam * np.abs(beta).sum()


def _solve_logistic(prob, lam, tol, max_iter=100, start=None):
    _check_lam(lam)
    a, y, n = prob.a, prob.y, prob.n
    if start is None:
        theta = np.zeros(prob.k + 1)
        theta[0] = np.log(prob.ybar / (1.0 - prob.ybar))
    else:
        theta = np.array(start, dtype=float)
    eta = a @ theta
    obj = _logistic_objective(eta, y, theta[1:], lam)
    for it in range(1, max_iter + 1):
        p = _sigmoid(eta)
        w = np.maximum(p * (1.0 - p), _MIN_IRLS_WEIGHT)
        work = eta + (y - p) / w
        aw = a * w[:, None]
        gram = aw.T @ a / n
        c = aw.T @ work / n
        new = theta.copy()
        _cd_weighted(gram, c, lam, new, tol * 0.1, prob.live_a)
        step = new - theta
        t = 1.0
        for _ in range(30):
            cand = theta + t * step
            eta_c = a @ cand
            obj_c = _logistic_objective(eta_c, y, cand[1:], lam)
            if obj_c <= obj + 1e-15:
                break
            t *= 0.5
        change = float(np.max(np.abs(cand - theta)))
        theta, eta, obj = cand, eta_c, obj_c
        if change <= tol:
            return _finish(theta[0], theta[1:], prob.center, prob.scale, lam,
                           "binomial", it, True)
    raise NonConvergenceError(
        f"logistic lasso did not converge in {max_iter} IRLS iterations",
        last_iterate=theta)


def fit_logistic_lasso(design, response, lam, tol=1e-8, max_iter=100, start=None):
    """L1-penalized logistic regression by iteratively reweighted coordinate descent.

    Each outer iteration forms the weighted quadratic approximation of the
    binomial log-likelihood and minimizes its penalized version by coordinate
    descent; the step is halved if the penalized objective would increase.
    Stops when no parameter moves by more than ``tol``; ``max_iter`` outer
    iterations is the cap.
    """
    return _solve_logistic(_Problem(design, response, "binomial"), lam, tol,
                           max_iter, start)


def _cd_weighted(gram, c, lam, theta, tol, live, max_sweeps=100000):
    """CD for 0.5 t'Gt - c't + lam |t[1:]|_1 (coordinate 0 unpenalized)."""
    diag = np.diag(gram)
    grad = c - gram @ theta
    cols = np.flatnonzero(live & (diag > 0))
    full = True
    for _ in range(max_sweeps):
        todo = cols if full else cols[(theta[cols] != 0) | (cols == 0)]
        dmax = 0.0
        for j in todo:
            old = theta[j]
            zj = grad[j] + diag[j] * old
            if j == 0:
                new = zj / diag[j]
            else:
                new = np.sign(zj) * max(abs(zj) - lam, 0.0) / diag[j]
            if new != old:
                delta = new - old
                theta[j] = new
                grad -= gram[:, j] * delta
                if abs(delta) > dmax:
                    dmax = abs(delta)
        if dmax <= tol:
            if full:
                return
            full = True
        else:
            full = False
    raise NonConvergenceError("weighted coordinate descent did not converge",
                              last_iterate=theta)


def kkt_violation(fit, design, response):
    """Largest violation of the lasso optimality conditions, on the standardized scale.

    Zero coefficients need ``|g_j| <= lam``; nonzero ones need
    ``g_j = -sign(b_j) lam``, where ``g`` is the gradient of the smooth loss.
    """
    x = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    n = x.shape[0]
    z = (x - fit.center) / fit.scale
    live = x.std(axis=0) > 1e-12 * np.maximum(1.0, np.abs(fit.center))
    z[:, ~live] = 0.0
    b0 = fit.intercept + fit.center @ fit.coefficients
    eta = b0 + z @ fit.std_coefficients
    if fit.family == "binomial":
        g = -z.T @ (y - _sigmoid(eta)) / n
    else:
        g = -z.T @ (y - eta) / n
    b = fit.std_coefficients
    viol = np.where(b == 0, np.maximum(np.abs(g) - fit.lam, 0.0),
                    np.abs(g + np.sign(b) * fit.lam))
    viol = viol[live]
    return float(viol.max()) if viol.size else 0.0


def lambda_max(design, response, family="gaussian"):
    """Smallest penalty at which every slope is zero."""
    return _Problem(design, response, family).lambda_max()


def lambda_grid(lam_max, n_lambda=20, ratio=1e-3):
    if lam_max <= 0:
        return np.array([0.0])
    return lam_max * np.geomspace(1.0, ratio, n_lambda)


def _fold_ids(n, folds, rng_state, strata=None):
    gen = rng_state.generator()
    ids = np.empty(n, dtype=int)
    groups = [np.arange(n)] if strata is None else [
        np.flatnonzero(strata == s) for s in np.unique(strata)]
    offset = 0
    for rows in groups:
        perm = gen.permutation(rows)
        ids[perm] = (np.arange(perm.size) + offset) % folds
        offset += perm.size
    return ids


def _fit_path(x, y, grid, family, tol=None):
    prob = _Problem(x, y, family)
    fits = []
    start = None
    for lam in grid:
        if family == "binomial":
            f = _solve_logistic(prob, lam, tol or 1e-8, start=start)
            start = np.concatenate([[f.intercept + f.center @ f.coefficients],
                                    f.std_coefficients])
        else:
            f = _solve_gaussian(prob, lam, tol or 1e-7, start=start)
            start = f.std_coefficients.copy()
        fits.append(f)
    return fits


def _loss(fit, x, y):
    if fit.family == "binomial":
        p = fit.predict(x)
        return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))
    return float(np.mean((y - fit.predict(x)) ** 2))


def cv_lasso(design, response, family="gaussian", folds=5, rng_state=None,
             n_lambda=20, ratio=1e-3, cv_tol=1e-5):
    """Choose the penalty by K-fold CV (min mean loss) and refit on all rows.

    Fold fits only feed the loss curve and run at the looser ``cv_tol``; the
    returned refit uses the solvers' default tolerance.
    ``fit.cv_losses`` holds the loss curve.
    """
    x = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    if rng_state is None:
        rng_state = RngState(0)
    if family == "gaussian" and np.ptp(y) == 0:
        f = fit_lasso(x, y, 0.0)
        f.cv_losses = None
        return f
    grid = lambda_grid(lambda_max(x, y, family), n_lambda, ratio)
    if grid.size == 1:
        f = fit_lasso(x, y, 0.0) if family == "gaussian" else fit_logistic_lasso(x, y, 0.0)
        f.cv_losses = None
        return f
    strata = y if family == "binomial" else None
    ids = _fold_ids(x.shape[0], folds, rng_state, strata)
    losses = np.zeros(grid.size)
    for k in range(folds):
        tr, te = ids != k, ids == k
        for i, f in enumerate(_fit_path(x[tr], y[tr], grid, family, cv_tol)):
            losses[i] += _loss(f, x[te], y[te]) * te.sum()
    losses /= x.shape[0]
    best = int(np.argmin(losses))
    path = _fit_path(x, y, grid[:best + 1], family)
    f = path[-1]
    f.cv_losses = losses
    return f


def ate_double_lasso(outcome, treated, controls, folds=5, seed=0,
                     propensity_controls=None, cv_folds=5, n_lambda=20):
    """Cross-fitted doubly-robust (AIPW) average treatment effect.

    Outcome models are gaussian lassos fitted separately per treatment arm;
    the propensity is a logistic lasso. Folds are drawn within treatment arms
    from the seeded stream so each fold holds both arms. Propensities are
    clamped to ``[1e-6, 1 - 1e-6]``; a warning is attached when the clamp
    binds on more than 10% of rows.

    ``propensity_controls`` (default: ``controls``) allows a different
    covariate set for the propensity model.
    """
    y = np.asarray(outcome, dtype=float)
    d = np.asarray(treated, dtype=float)
    n = y.shape[0]
    w = np.asarray(controls, dtype=float).reshape(n, -1)
    wp = w if propensity_controls is None else \
        np.asarray(propensity_controls, dtype=float).reshape(n, -1)
    if not np.all((d == 0) | (d == 1)):
        raise DomainError("treatment must be binary 0/1")
    if d.all() or not d.any():
        raise EmptySampleError("double lasso needs both treatment groups")
    root = RngState(seed)
    ids = _fold_ids(n, folds, rng_derive_substream(root, 0), strata=d)
    m1 = np.empty(n)
    m0 = np.empty(n)
    ps = np.empty(n)
    raw_ps = np.empty(n)
    kkt = 0.0
    lambdas = []
    for k in range(folds):
        tr, te = ids != k, ids == k
        tr1, tr0 = tr & (d == 1), tr & (d == 0)
        if tr1.sum() < 2 or tr0.sum() < 2 or te.sum() == 0:
            raise EmptySampleError(f"fold {k} lacks observations in a treatment arm")
        sub = rng_derive_substream(root, k + 1)
        f1 = cv_lasso(w[tr1], y[tr1], "gaussian", cv_folds,
                      rng_derive_substream(sub, 1), n_lambda)
        f0 = cv_lasso(w[tr0], y[tr0], "gaussian", cv_folds,
                      rng_derive_substream(sub, 0), n_lambda)
        fp = cv_lasso(wp[tr], d[tr], "binomial", cv_folds,
                      rng_derive_substream(sub, 2), n_lambda)
        kkt = max(kkt, kkt_violation(f1, w[tr1], y[tr1]),
                  kkt_violation(f0, w[tr0], y[tr0]),
                  kkt_violation(fp, wp[tr], d[tr]))
        lambdas.append((f1.lam, f0.lam, fp.lam))
        m1[te] = f1.predict(w[te])
        m0[te] = f0.predict(w[te])
        raw_ps[te] = _sigmoid(fp.linear_predictor(wp[te]))
        ps[te] = fp.predict(wp[te])
    clamped = int(np.sum((raw_ps < PROB_CLAMP) | (raw_ps > 1 - PROB_CLAMP)))
    phi = m1 - m0 + d * (y - m1) / ps - (1 - d) * (y - m0) / (1 - ps)
    tau = phi.mean()
    se = phi.std(ddof=1) / np.sqrt(n)
    warnings = []
    if clamped > 0.1 * n:
        warnings.append(f"propensity clamp engaged on {clamped} of {n} rows")
    return EffectEstimate.from_estimate(
        tau, se, "double_lasso", n, warnings=warnings,
        diagnostics={"max_kkt_violation": kkt, "n_clamped": clamped,
                     "lambdas": lambdas, "folds": folds})
