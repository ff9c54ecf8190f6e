"""Render analysis reports as JSON, CSV or publication-style text tables."""
import csv
import io
import json


def to_json(report):
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def _f(v, width=9, digits=3):
    return f"{'':>{width}}" if v is None else f"{v:>{width}.{digits}f}"


def _decomp_text(res):
    comps = res["components"]
    title = {"oaxaca": "Oaxaca-Blinder decomposition",
             "ipw": "IPW decomposition"}[res["method"]]
    lines = [f"{title} (mediators: {res['mediator_set']})",
             " " * 6 + "".join(f"{c['label']:>11}" for c in comps.values())]
    for key in ("est", "se", "pval"):
        lines.append(f"{key:<6}" + "".join(_f(c[key], 11) for c in comps.values()))
    lines.append(f"missings / trimmed: {res['n_dropped_missing']} / {res['n_trimmed']}"
                 f"    n used: {res['n_used']}")
    if res.get("bootstrap"):
        b = res["bootstrap"]
        lines.append(f"bootstrap: {b['replications']} replications, "
                     f"{b['n_failed_replicates']} failed")
    return lines


def _ate_text(res):
    lines = [f"Intervention effects (treatment: {res['treatment']}, "
             f"outcome: {res['outcome']})"]
    for label, sub in res["subsamples"].items():
        lines.append(f"[{label}]  mean among controls: {sub['mean_among_controls']:.3f}")
        lines.append(f"{'':<18}{'est':>9}{'se':>9}{'pval':>9}{'n':>7}")
        for e in sub["estimates"]:
            lines.append(f"{e['estimator']:<18}{_f(e['est'])}{_f(e['se'])}"
                         f"{_f(e['pval'])}{e['n_used']:>7}")
            for w in e.get("warnings", []):
                lines.append(f"  warning: {w}")
    return lines


def _balance_block(title, table):
    lines = [title, f"{'variable':<28}{'mean0':>9}{'mean1':>9}{'diff':>9}"
                    f"{'pval':>9}{'miss':>6}"]
    for name, m0, m1, d, p, miss in table["rows"]:
        lines.append(f"{name:<28}{_f(m0)}{_f(m1)}{_f(d)}{_f(p)}{miss:>6}")
    return lines


def _balance_text(res):
    lines = _balance_block("Original sample", res["original"])
    lines += [""] + _balance_block("After re-weighting", res["reweighted"])
    if "experiment" in res:
        lines += [""] + _balance_block("Treatment balance", res["experiment"])
    return lines


def _support_text(res):
    lines = ["Common support for Pr(G=1|X,W)",
             f"{'bin':<15}{'group0':>8}{'group1':>8}"]
    for lo, hi, c0, c1 in res["rows"]:
        lines.append(f"[{lo:.2f}, {hi:.2f}){'':<3}{c0:>8}{c1:>8}")
    lines.append(f"overlap: {res['overlap']:.3f}   trimmed: {res['n_trimmed']}")
    return lines


def _mc_text(res):
    lines = [f"Monte Carlo: {res['estimator']}, {res['replications']} replications "
             f"({res['n_failed']} failed)",
             f"{'component':<22}{'truth':>9}{'bias':>9}{'rmse':>9}{'cover':>9}"]
    for c, v in res["components"].items():
        lines.append(f"{c:<22}{_f(v['truth'])}{_f(v['mean_bias'])}{_f(v['rmse'])}"
                     f"{_f(v['ci_coverage'])}")
    return lines


def to_text(report):
    res = report["result"]
    kind = report["analysis"]
    if kind in ("oaxaca", "ipw"):
        lines = _decomp_text(res)
    elif kind == "ate_experiment":
        lines = _ate_text(res)
    elif kind == "balance":
        lines = _balance_text(res)
    elif kind == "support":
        lines = _support_text(res)
    elif kind == "synth_mc":
        lines = _mc_text(res)
    else:
        lines = [f"wrote {res['rows']} rows to {res['csv']}"]
    lines.append(f"seed: {report['seed']}   schema: {report['schema_version']}")
    return "\n".join(lines) + "\n"


def to_csv(report):
    res = report["result"]
    kind = report["analysis"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if kind in ("oaxaca", "ipw"):
        w.writerow(["component", "label", "est", "se", "pval",
                    "n_used", "n_dropped_missing", "n_trimmed"])
        for c, v in res["components"].items():
            w.writerow([c, v["label"], v["est"], v["se"], v["pval"], res["n_used"],
                        res["n_dropped_missing"], res["n_trimmed"]])
    elif kind == "ate_experiment":
        w.writerow(["subsample", "estimator", "est", "se", "pval", "n_used"])
        for label, sub in res["subsamples"].items():
            for e in sub["estimates"]:
                w.writerow([label, e["estimator"], e["est"], e["se"], e["pval"],
                            e["n_used"]])
    elif kind == "balance":
        w.writerow(["table", "name", "mean_group0", "mean_group1", "difference",
                    "p_value", "n_missing"])
        for tab in ("original", "reweighted", "experiment"):
            for row in res.get(tab, {}).get("rows", []):
                w.writerow([tab, *row])
    elif kind == "support":
        w.writerow(["bin_lower", "bin_upper", "count_group0", "count_group1"])
        w.writerows(res["rows"])
    elif kind == "synth_mc":
        w.writerow(["component", "truth", "mean_bias", "rmse", "ci_coverage"])
        for c, v in res["components"].items():
            w.writerow([c, v["truth"], v["mean_bias"], v["rmse"], v["ci_coverage"]])
    else:
        w.writerow(["rows", "csv"])
        w.writerow([res["rows"], res["csv"]])
    return buf.getvalue()


def render(report, fmt):
    return {"json": to_json, "text": to_text, "csv": to_csv}[fmt](report)
