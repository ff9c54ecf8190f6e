"""Command-line front end.

Example::

    gapdecomp --data survey.csv --roles roles.ini --analysis ipw \\
        --mediators all --trim 0.02 --bootstrap 499 --seed 42 --format text
"""
import argparse
import json
import sys

from .analysis import ANALYSES, FORMATS, REFERENCES, RunConfig, run
from .errors import GapDecompError, NonConvergenceError, SeparationError, InferenceError
from .report import render

EXIT_INPUT = 2
EXIT_ESTIMATION = 3


def build_parser():
    p = argparse.ArgumentParser(
        prog="gapdecomp",
        description="Decompose a group gap into direct and indirect components.")
    p.add_argument("--data", dest="data_path", help="input CSV (header row, comma separated)")
    p.add_argument("--roles", dest="roles_path", help="INI file mapping columns to roles")
    p.add_argument("--analysis", choices=ANALYSES, default="oaxaca")
    p.add_argument("--mediators", dest="mediator_set", choices=("m1", "all"), default="m1")
    p.add_argument("--reference", dest="reference_group", choices=REFERENCES, default="both")
    p.add_argument("--trim", type=float, default=0.02,
                   help="drop rows with propensity below TRIM or above 1-TRIM")
    p.add_argument("--trim-on", choices=("both", "xw"), default="both",
                   help="trim on both score vectors or on Pr(G=1|X,W) only")
    p.add_argument("--bootstrap", dest="bootstrap_b", type=int, default=499)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--format", dest="output_format", choices=FORMATS, default="json")
    p.add_argument("--out", dest="out_path", help="write the report here instead of stdout")
    p.add_argument("--missing-token", default="", help="cell text marking a missing value")
    p.add_argument("--include-controls", action="store_true",
                   help="add the controls W to the Oaxaca-Blinder regressions")
    p.add_argument("--dgp", dest="dgp_path", help="synthetic DGP config (synth_mc, generate)")
    p.add_argument("--estimator", default="oaxaca",
                   choices=("oaxaca", "ipw", "mean_difference", "ols_controls",
                            "double_lasso"),
                   help="estimator evaluated by synth_mc")
    p.add_argument("--replications", type=int, default=200)
    p.add_argument("--bins", type=int, default=20)
    return p


def _error(exc, code):
    rec = exc.to_record() if isinstance(exc, GapDecompError) else {
        "error": type(exc).__name__, "message": str(exc)}
    sys.stderr.write(json.dumps(rec) + "\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    opts = vars(args)
    trim_on = opts.pop("trim_on")
    missing_token = opts.pop("missing_token")
    include_controls = opts.pop("include_controls")
    try:
        cfg = RunConfig(**opts, trim_on=trim_on, missing_token=missing_token,
                        include_controls=include_controls)
        report = run(cfg)
        text = render(report, cfg.output_format)
    except (NonConvergenceError, SeparationError, InferenceError) as exc:
        return _error(exc, EXIT_ESTIMATION)
    except (GapDecompError, OSError) as exc:
        return _error(exc, EXIT_INPUT)
    if cfg.analysis == "generate" or not cfg.out_path:
        sys.stdout.write(text)
    else:
        with open(cfg.out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
