"""End-to-end analyses behind the command line: config in, report dict out."""
import os
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .balance import balance_table, common_support, ipw_balance_weights
from .bootstrap import bootstrap
from .data import (RoleMap, complete_cases, load_csv, load_roles, mediator_set_tag,
                   write_csv, write_roles)
from .errors import DomainError
from .ipw import TrimmingPolicy, estimate_propensities, ipw_estimator, ipw_mediation, trim
from .lasso import ate_double_lasso
from .oaxaca import COMPONENTS, SHORT_LABELS, oaxaca_decompose, oaxaca_estimator
from .ols import ate_mean_difference, ate_ols_controls
from .synthetic import ATE_ESTIMATORS, ExperimentDgp, generate, load_dgp, monte_carlo

SCHEMA_VERSION = "1.0"
ANALYSES = ("oaxaca", "ipw", "ate_experiment", "balance", "support", "synth_mc",
            "generate")
REFERENCES = ("female", "male", "both")
FORMATS = ("text", "csv", "json")

_REF_COMPONENTS = {
    "both": COMPONENTS,
    "female": ("total", "indirect_ref_female", "direct_ref_female"),
    "male": ("total", "indirect_ref_male", "direct_ref_male"),
}


@dataclass
class RunConfig:
    data_path: str = None
    roles_path: str = None
    analysis: str = "oaxaca"
    mediator_set: str = "M1"
    reference_group: str = "both"
    trim: float = 0.02
    bootstrap_b: int = 499
    seed: int = 42
    output_format: str = "json"
    out_path: str = None
    missing_token: str = ""
    include_controls: bool = False
    trim_on: str = "both"
    dgp_path: str = None
    estimator: str = "oaxaca"
    replications: int = 200
    bins: int = 20

    def __post_init__(self):
        if self.analysis not in ANALYSES:
            raise DomainError(f"analysis must be one of {ANALYSES}")
        if self.reference_group not in REFERENCES:
            raise DomainError(f"reference must be one of {REFERENCES}")
        if self.output_format not in FORMATS:
            raise DomainError(f"format must be one of {FORMATS}")
        if not 0.0 <= self.trim < 0.5:
            raise DomainError("trim must lie in [0, 0.5)")
        if self.bootstrap_b < 2:
            raise DomainError("bootstrap replications must be at least 2")
        self.mediator_set = mediator_set_tag(self.mediator_set)

    def echo(self):
        return {k: v for k, v in asdict(self).items() if k != "out_path"}


def _workers():
    try:
        return max(1, int(os.environ.get("GAPDECOMP_WORKERS", "1")))
    except ValueError:
        return 1


def _clean(x):
    """JSON-safe copy: numpy scalars to Python, NaN to None."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return None if not np.isfinite(x) else x
    if isinstance(x, np.integer):
        return int(x)
    return x


def decomposition_report(result, reference="both"):
    comps = _REF_COMPONENTS[reference]
    labels = dict(zip(COMPONENTS, SHORT_LABELS))
    vec = dict(zip(COMPONENTS, result.vector()))
    out = {}
    for c in comps:
        out[c] = {
            "label": labels[c],
            "est": vec[c],
            "se": None if result.standard_errors is None else result.standard_errors[c],
            "pval": None if result.p_values is None else result.p_values[c],
        }
    return {
        "method": result.method,
        "mediator_set": result.mediator_set,
        "components": out,
        "adding_up_error": result.adding_up_error(),
        "n_used": result.n_used,
        "n_dropped_missing": result.n_dropped_missing,
        "n_trimmed": result.n_trimmed,
        "bootstrap": result.bootstrap,
    }


def _load(cfg):
    if not cfg.data_path or not cfg.roles_path:
        raise DomainError(f"analysis {cfg.analysis} needs --data and --roles")
    roles = load_roles(cfg.roles_path)
    return load_csv(cfg.data_path, roles, cfg.missing_token), roles


def _policy(cfg):
    return TrimmingPolicy.symmetric(cfg.trim, cfg.trim_on)


def run_decomposition(cfg):
    data, roles = _load(cfg)
    if cfg.analysis == "oaxaca":
        res = oaxaca_decompose(data, roles, cfg.mediator_set, cfg.include_controls)
        est = oaxaca_estimator(roles, cfg.mediator_set, cfg.include_controls)
        used = [roles.group, roles.outcome] + res.details["regressors"]
    else:
        res = ipw_mediation(data, roles, cfg.mediator_set, _policy(cfg))
        starts = tuple(np.array(c) for c in res.details["probit_coefficients"])
        est = ipw_estimator(roles, cfg.mediator_set, _policy(cfg), starts)
        used = [roles.group, roles.outcome, *roles.mediators(cfg.mediator_set),
                *roles.controls]
    sample = complete_cases(data, used)
    boot = bootstrap(est, data.take(sample.kept_row_indices), B=cfg.bootstrap_b,
                     seed=cfg.seed, workers=_workers())
    return decomposition_report(res.with_inference(boot), cfg.reference_group)


def _ate_rows(y, d, w, seed):
    rows = []
    for fn in (lambda: ate_mean_difference(y[0], d[0]),
               lambda: ate_ols_controls(y[1], d[1], w),
               lambda: ate_double_lasso(y[1], d[1], w, seed=seed)):
        e = fn()
        rows.append(dict(e.to_dict(), diagnostics={
            k: v for k, v in e.diagnostics.items() if k in ("max_kkt_violation", "n_clamped")}))
    return rows


def run_ate_experiment(cfg):
    data, roles = _load(cfg)
    if roles.treatment is None:
        raise DomainError("ate_experiment needs a [treatment] section in the roles file")
    controls = [c for c in roles.controls if c != roles.treatment]
    subsets = [("all", None)]
    if roles.group in data:
        subsets += [("female", 0.0), ("male", 1.0)]
    report = {"treatment": roles.treatment, "outcome": roles.outcome, "subsamples": {}}
    for label, gval in subsets:
        need_g = [] if gval is None else [roles.group]
        s_md = complete_cases(data, [roles.outcome, roles.treatment] + need_g)
        s_ols = complete_cases(data, [roles.outcome, roles.treatment] + need_g + controls)
        r_md, r_ols = s_md.kept_row_indices, s_ols.kept_row_indices
        if gval is not None:
            r_md = r_md[data.column(roles.group)[r_md] == gval]
            r_ols = r_ols[data.column(roles.group)[r_ols] == gval]
        ys = (data.column(roles.outcome)[r_md], data.column(roles.outcome)[r_ols])
        ds = (data.column(roles.treatment)[r_md], data.column(roles.treatment)[r_ols])
        w = data.matrix(controls)[r_ols]
        report["subsamples"][label] = {
            "estimates": _ate_rows(ys, ds, w, cfg.seed),
            "mean_among_controls": float(ys[0][ds[0] == 0].mean()),
            "n_dropped_missing": {"mean_difference": s_md.n_dropped_missing,
                                  "with_controls": s_ols.n_dropped_missing},
        }
    return report


def run_balance(cfg):
    data, roles = _load(cfg)
    policy = _policy(cfg)
    orig = balance_table(data, roles)
    sub, wts = ipw_balance_weights(data, roles, cfg.mediator_set, policy)
    names = [*roles.controls, *roles.mediators(cfg.mediator_set)]
    after = balance_table(sub, roles, wts, variables=names, trim_policy=policy)
    out = {"original": orig.to_dict(), "reweighted": after.to_dict(),
           "n_reweighted_rows": sub.n_rows}
    if roles.treatment is not None:
        troles = RoleMap(group=roles.treatment, outcome=roles.outcome,
                         controls=[c for c in roles.controls if c != roles.treatment])
        out["experiment"] = balance_table(
            data, troles, variables=[roles.group, *troles.controls]).to_dict()
    return out


def run_support(cfg):
    data, roles = _load(cfg)
    scores = estimate_propensities(data, roles, cfg.mediator_set)
    kept, n_trim = trim(scores, _policy(cfg))
    g = data.column(roles.group)[scores.kept_row_indices[kept]]
    hist = common_support(scores.p_xw[kept], g, cfg.bins)
    return dict(hist.to_dict(), n_dropped_missing=scores.n_dropped_missing,
                n_trimmed=n_trim)


def run_synth_mc(cfg):
    path = cfg.dgp_path or cfg.data_path
    if cfg.estimator in ATE_ESTIMATORS:
        dgp = ExperimentDgp(seed=cfg.seed)
    else:
        if not path:
            raise DomainError("synth_mc needs --dgp (a DGP config file)")
        dgp = load_dgp(path)
    rep = monte_carlo(dgp, cfg.estimator, cfg.replications,
                      bootstrap_b=cfg.bootstrap_b if cfg.estimator in ("oaxaca", "ipw") else 0,
                      seed=cfg.seed, policy=_policy(cfg), workers=_workers())
    return rep.to_dict()


def run_generate(cfg):
    path = cfg.dgp_path or cfg.data_path
    if not path or not cfg.out_path:
        raise DomainError("generate needs --dgp and --out")
    dgp = load_dgp(path)
    data = generate(dgp)
    write_csv(data, cfg.out_path, cfg.missing_token)
    if cfg.roles_path:
        write_roles(dgp.roles(), cfg.roles_path)
    return {"rows": data.n_rows, "columns": data.column_names,
            "csv": str(cfg.out_path), "roles": cfg.roles_path}


_RUNNERS = {
    "oaxaca": run_decomposition,
    "ipw": run_decomposition,
    "ate_experiment": run_ate_experiment,
    "balance": run_balance,
    "support": run_support,
    "synth_mc": run_synth_mc,
    "generate": run_generate,
}


def run(cfg):
    """Execute ``cfg.analysis`` and return the versioned report dict."""
    result = _RUNNERS[cfg.analysis](cfg)
    return _clean({
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "analysis": cfg.analysis,
        "seed": cfg.seed,
        "config": cfg.echo(),
        "result": result,
    })
