"""Covariate balance tables, common-support histograms and wage-gap arithmetic."""
import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .data import mediator_set_tag
from .errors import DomainError, EmptySampleError
from .ipw import TrimmingPolicy, estimate_propensities, trim

CHF_PER_CATEGORY = 500.0

BALANCE_COLUMNS = ("name", "mean_group0", "mean_group1", "difference",
                   "p_value", "n_missing")


@dataclass
class BalanceRow:
    name: str
    mean_group0: float
    mean_group1: float
    difference: float
    p_value: float
    n_missing: int


@dataclass
class BalanceTable:
    rows: list
    weighted: bool = False
    trim_policy: TrimmingPolicy = None

    def row(self, name):
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def max_abs_difference(self, names=None):
        sel = [r for r in self.rows if names is None or r.name in names]
        return max(abs(r.difference) for r in sel)

    def to_dict(self):
        return {
            "weighted": self.weighted,
            "trim_policy": None if self.trim_policy is None else asdict(self.trim_policy),
            "columns": list(BALANCE_COLUMNS),
            "rows": [[getattr(r, c) for c in BALANCE_COLUMNS] for r in self.rows],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(BALANCE_COLUMNS)
        for r in self.rows:
            w.writerow([getattr(r, c) for c in BALANCE_COLUMNS])
        return buf.getvalue()


def weighted_mean_test(x, g, weights):
    """Weighted two-sample mean comparison.

    Weights are normalized within each group and treated as fixed. The
    variance of each weighted mean is ``sum(w^2 (x - m)^2) * k/(k-1)`` with
    Kish effective size ``k = 1/sum(w^2)``, and the p-value uses Welch's
    degrees of freedom on the effective sizes. With equal weights this is
    exactly the unequal-variance t-test.

    Returns ``(mean0, mean1, difference, p_value)``.
    """
    x = np.asarray(x, dtype=float)
    g = np.asarray(g) == 1
    w = np.asarray(weights, dtype=float)
    parts = []
    for sel in (~g, g):
        ws = w[sel]
        if ws.size == 0 or not ws.sum() > 0:
            raise EmptySampleError("balance test needs positive weight in both groups")
        m = (ws @ x[sel]) / ws.sum()
        ws = ws / ws.sum()
        k = 1.0 / np.sum(ws * ws)
        v = np.sum(ws * ws * (x[sel] - m) ** 2) * (k / (k - 1.0) if k > 1 else np.nan)
        parts.append((m, v, k))
    (m0, v0, k0), (m1, v1, k1) = parts
    diff = m1 - m0
    var = v0 + v1
    if not np.isfinite(var):
        return m0, m1, diff, float("nan")
    if var == 0:
        return m0, m1, diff, 0.0 if diff != 0 else 1.0
    df = var ** 2 / (v0 ** 2 / (k0 - 1.0) + v1 ** 2 / (k1 - 1.0))
    p = 2.0 * stats.t.sf(abs(diff) / np.sqrt(var), df)
    return m0, m1, diff, float(p)


def default_balance_variables(roles):
    return [*roles.controls, *roles.mediators_m1, *roles.mediators_m2, roles.outcome]


def balance_table(data, roles, weights=None, variables=None, trim_policy=None):
    """Per-variable group means, difference (group 1 minus group 0) and p-value.

    Without ``weights`` each row is Welch's unequal-variance t-test on the
    non-missing values; with ``weights`` (one per data row, nonnegative) the
    weighted analogue of :func:`weighted_mean_test` is used.
    """
    if variables is None:
        variables = default_balance_variables(roles)
    g = data.column(roles.group)
    g_ok = ~data.column_missing(roles.group)
    if weights is None:
        w = np.ones(data.n_rows)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (data.n_rows,):
            raise DomainError("one weight per data row is required")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DomainError("weights must be finite and nonnegative")
    rows = []
    for name in variables:
        miss = data.column_missing(name)
        ok = g_ok & ~miss
        m0, m1, diff, p = weighted_mean_test(data.column(name)[ok], g[ok], w[ok])
        rows.append(BalanceRow(name, float(m0), float(m1), float(diff), p,
                               int(miss.sum())))
    return BalanceTable(rows, weights is not None, trim_policy)


def ipw_balance_weights(data, roles, mediator_set="M1", policy=TrimmingPolicy()):
    """Reweighting used for the after-reweighting balance check.

    Returns ``(subset, weights)``: the complete, untrimmed rows and weights
    ``1/Pr(G=1|X,W)`` for group 1 and ``1/(1 - Pr(G=1|X,W))`` for group 0.
    """
    scores = estimate_propensities(data, roles, mediator_set_tag(mediator_set))
    kept, _ = trim(scores, policy)
    sub = data.take(scores.kept_row_indices[kept])
    q = scores.p_xw[kept]
    g = sub.column(roles.group) == 1
    return sub, np.where(g, 1.0 / q, 1.0 / (1.0 - q))


@dataclass
class SupportHistogram:
    bin_edges: np.ndarray
    counts_group0: np.ndarray
    counts_group1: np.ndarray
    overlap: float = field(default=0.0)

    def to_dict(self):
        return {"columns": ["bin_lower", "bin_upper", "count_group0", "count_group1"],
                "rows": [[float(a), float(b), int(c0), int(c1)] for a, b, c0, c1 in zip(
                    self.bin_edges[:-1], self.bin_edges[1:],
                    self.counts_group0, self.counts_group1)],
                "overlap": self.overlap}

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        d = self.to_dict()
        w.writerow(d["columns"])
        w.writerows(d["rows"])
        return buf.getvalue()


def common_support(scores, group, bins=20):
    """Histogram of ``Pr(G=1|X,W)`` per group over equal-width bins on [0, 1].

    ``overlap`` is the histogram intersection of the two relative frequency
    distributions: 1 for identical, 0 for disjoint supports.
    """
    if bins < 2:
        raise DomainError("need at least two bins")
    p = scores.p_xw if hasattr(scores, "p_xw") else np.asarray(scores, dtype=float)
    g = np.asarray(group) == 1
    edges = np.round(np.linspace(0.0, 1.0, bins + 1), 12)
    c0, _ = np.histogram(p[~g], bins=edges)
    c1, _ = np.histogram(p[g], bins=edges)
    overlap = 0.0
    if c0.sum() and c1.sum():
        overlap = float(np.minimum(c0 / c0.sum(), c1 / c1.sum()).sum())
    return SupportHistogram(edges, c0, c1, overlap)


def expectation_gap_pct(expected_wage, realized_wage):
    """Percentage by which an expected wage exceeds a realized one."""
    if not realized_wage > 0:
        raise DomainError("realized wage must be positive")
    return 100.0 * (expected_wage - realized_wage) / realized_wage


def categories_to_chf(categories):
    """Wage categories to CHF; one category spans 500 CHF."""
    return categories * CHF_PER_CATEGORY
