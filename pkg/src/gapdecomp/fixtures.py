"""Bundled synthetic fixtures (decomposition and randomized experiment).

Regenerate with ``python -m gapdecomp.fixtures [outdir]``.
"""
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .data import Dataset, RoleMap, write_csv, write_roles
from .numkit import RngState
from .synthetic import SyntheticDgp, generate

FIXTURE_DGP = SyntheticDgp(
    n=600, dim_w=3, gamma=[0.4, -0.3, 0.2], gamma0=0.1,
    alpha=[0.6, 0.3, -0.4, 0.5], theta=1.0, beta=[1.0, 0.5, 0.5, 0.8],
    delta=[[0.3, 0.0, 0.1, 0.0], [0.0, 0.2, 0.0, 0.1], [0.1, 0.0, 0.0, 0.2]],
    kappa=[0.3, 0.2, -0.2], noise_sd_x=1.0, noise_sd_y=1.0, seed=2024, n_m2=1)


def _with_missing(data, columns, rate, seed):
    gen = RngState(seed).generator()
    miss = data.missing.copy()
    for c in columns:
        j = data.col_index(c)
        miss[:, j] |= gen.random(data.n_rows) < rate
    return Dataset(data.column_names, data.values, miss)


def decomposition_fixture():
    data = generate(FIXTURE_DGP)
    data = _with_missing(data, ["y", "w1", "x4"], 0.02, 7)
    return data, FIXTURE_DGP.roles()


def experiment_fixture(n=800, tau=0.6, seed=11):
    """Randomized ``treat`` with true effect ``tau`` on ``y``."""
    gen = RngState(seed).generator()
    w = gen.standard_normal((n, 8))
    g = (gen.random(n) < 0.5).astype(float)
    d = (gen.random(n) < 0.5).astype(float)
    y = 6.0 + 1.1 * g + tau * d + w[:, :3] @ np.array([0.5, -0.4, 0.3]) \
        + gen.standard_normal(n)
    cols = {"y": y, "treat": d, "g": g}
    cols.update({f"w{j + 1}": w[:, j] for j in range(8)})
    data = _with_missing(Dataset.from_columns(cols), ["y", "w2"], 0.015, 12)
    roles = RoleMap(group="g", outcome="y", treatment="treat",
                    controls=[f"w{j + 1}" for j in range(8)])
    return data, roles


def write_fixtures(outdir):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    data, roles = decomposition_fixture()
    write_csv(data, out / "fixture.csv")
    write_roles(roles, out / "fixture_roles.ini")
    data, roles = experiment_fixture()
    write_csv(data, out / "experiment.csv")
    write_roles(roles, out / "experiment_roles.ini")


def fixture_path(name):
    """Path of a bundled fixture file, e.g. ``fixture_path("fixture.csv")``."""
    return Path(str(resources.files("gapdecomp") / "data" / name))


if __name__ == "__main__":
    write_fixtures(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent / "data")
