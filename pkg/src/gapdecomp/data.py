"""Dataset container, variable roles and listwise deletion."""
import configparser
import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptySampleError, ParseError, SchemaError

M1 = "M1"
M1_PLUS_M2 = "M1_plus_M2"
_MEDIATOR_ALIASES = {
    "m1": M1, "M1": M1,
    "all": M1_PLUS_M2, "m1+m2": M1_PLUS_M2, "M1+M2": M1_PLUS_M2,
    "M1_plus_M2": M1_PLUS_M2,
}


def mediator_set_tag(value):
    """Normalise ``m1``/``all`` style names to ``M1``/``M1_plus_M2``."""
    try:
        return _MEDIATOR_ALIASES[value]
    except KeyError:
        raise SchemaError(f"unknown mediator set {value!r} (use m1 or all)") from None


class Dataset:
    """Immutable table of real-valued columns with per-cell missing flags.

    Missing cells hold 0.0 in ``values`` and are marked in ``missing``;
    NaN never appears as a stored value.
    """

    def __init__(self, column_names, values, missing=None):
        names = [str(c) for c in column_names]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate column names")
        vals = np.array(values, dtype=float, copy=True)
        if vals.ndim != 2 or vals.shape[1] != len(names):
            raise SchemaError(
                f"values shape {vals.shape} does not match {len(names)} columns")
        if missing is None:
            miss = ~np.isfinite(vals)
        else:
            miss = np.array(missing, dtype=bool, copy=True) | ~np.isfinite(vals)
        vals[miss] = 0.0
        vals.setflags(write=False)
        miss.setflags(write=False)
        self.column_names = names
        self.values = vals
        self.missing = miss
        self._index = {c: j for j, c in enumerate(names)}

    @property
    def n_rows(self):
        return self.values.shape[0]

    def __len__(self):
        return self.n_rows

    def __contains__(self, name):
        return name in self._index

    def __repr__(self):
        return f"Dataset(n_rows={self.n_rows}, columns={self.column_names})"

    def col_index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise SchemaError(f"unknown column {name!r}") from None

    def column(self, name):
        return self.values[:, self.col_index(name)]

    def column_missing(self, name):
        return self.missing[:, self.col_index(name)]

    def matrix(self, names):
        """(n_rows, len(names)) array of the named columns."""
        idx = [self.col_index(c) for c in names]
        return self.values[:, idx]

    def missing_counts(self):
        return dict(zip(self.column_names, self.missing.sum(axis=0).tolist()))

    def take(self, rows):
        """New Dataset made of ``rows`` (indices may repeat)."""
        rows = np.asarray(rows, dtype=int)
        return Dataset(self.column_names, self.values[rows], self.missing[rows])

    @classmethod
    def from_columns(cls, columns):
        """Build from a mapping ``name -> 1-D array`` (NaN marks missing)."""
        names = list(columns)
        arr = np.column_stack([np.asarray(columns[c], dtype=float) for c in names])
        return cls(names, arr)


@dataclass(frozen=True)
class RoleMap:
    """Which columns play the group, outcome, control and mediator roles."""

    group: str
    outcome: str
    controls: tuple = ()
    mediators_m1: tuple = ()
    mediators_m2: tuple = ()
    treatment: str = None

    def __post_init__(self):
        for name in ("controls", "mediators_m1", "mediators_m2"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        sets = {
            "group": {self.group},
            "outcome": {self.outcome},
            "controls": set(self.controls),
            "mediators_m1": set(self.mediators_m1),
            "mediators_m2": set(self.mediators_m2),
        }
        keys = list(sets)
        for i, a in enumerate(keys):
            for b in keys[i + 1:]:
                both = sets[a] & sets[b]
                if both:
                    raise SchemaError(
                        f"roles {a} and {b} share columns {sorted(both)}")
        # the treatment may double as a control (it is one in the decomposition)
        if self.treatment is not None and self.treatment in (
                {self.group, self.outcome} | sets["mediators_m1"] | sets["mediators_m2"]):
            raise SchemaError(
                f"treatment column {self.treatment!r} overlaps group/outcome/mediators")

    def mediators(self, mediator_set):
        tag = mediator_set_tag(mediator_set)
        if tag == M1:
            return list(self.mediators_m1)
        return list(self.mediators_m1) + list(self.mediators_m2)

    def all_columns(self):
        cols = [self.group, self.outcome, *self.controls,
                *self.mediators_m1, *self.mediators_m2]
        if self.treatment is not None and self.treatment not in cols:
            cols.append(self.treatment)
        return cols


_ROLE_SECTIONS = ("group", "outcome", "controls", "mediators_m1",
                  "mediators_m2", "treatment")


def _split_names(text):
    return [t.strip() for t in text.replace("\n", ",").split(",") if t.strip()]


def read_config(path):
    cp = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    return cp


def load_roles(path):
    """Read a RoleMap from an INI file with one section per role.

    Each section lists its columns under ``columns =`` (comma or newline
    separated)::

        [group]
        columns = male
        [controls]
        columns = age, swiss
    """
    cp = read_config(path)
    found = {}
    for sec in _ROLE_SECTIONS:
        if cp.has_section(sec):
            found[sec] = _split_names(cp.get(sec, "columns", fallback=""))
    for sec in ("group", "outcome"):
        if len(found.get(sec, [])) != 1:
            raise SchemaError(f"roles file {path}: section [{sec}] must list exactly one column")
    if "treatment" in found and len(found["treatment"]) != 1:
        raise SchemaError(f"roles file {path}: section [treatment] must list exactly one column")
    return RoleMap(
        group=found["group"][0],
        outcome=found["outcome"][0],
        controls=found.get("controls", []),
        mediators_m1=found.get("mediators_m1", []),
        mediators_m2=found.get("mediators_m2", []),
        treatment=found["treatment"][0] if found.get("treatment") else None,
    )


def write_roles(roles, path):
    cp = configparser.ConfigParser()
    for sec in _ROLE_SECTIONS:
        val = getattr(roles, sec)
        if val is None:
            continue
        names = [val] if isinstance(val, str) else list(val)
        cp[sec] = {"columns": ", ".join(names)}
    with open(path, "w", encoding="utf-8") as fh:
        cp.write(fh)


def check_binary(data, name):
    """Raise SchemaError unless the non-missing cells of ``name`` are all 0/1."""
    vals = data.column(name)[~data.column_missing(name)]
    bad = np.setdiff1d(np.unique(vals), [0.0, 1.0])
    if bad.size:
        raise SchemaError(
            f"column {name!r} must be binary 0/1, found values {bad[:5].tolist()}")


def load_csv(path, roles=None, missing_token=""):
    """Parse a UTF-8, comma-separated file with a header row.

    Cells equal to ``missing_token`` (after stripping whitespace) are
    flagged missing. When ``roles`` is given every role column must be in the
    header and the group/treatment columns must be binary.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        rows = list(reader)
    if roles is not None:
        absent = [c for c in roles.all_columns() if c not in header]
        if absent:
            raise SchemaError(f"{path}: header lacks role columns {absent}")
    n, p = len(rows), len(header)
    values = np.zeros((n, p))
    missing = np.zeros((n, p), dtype=bool)
    for i, row in enumerate(rows):
        line = i + 2
        if len(row) != p:
            raise ParseError(
                f"{path}:{line}: expected {p} fields, found {len(row)}",
                row=line, column=None)
        for j, cell in enumerate(row):
            cell = cell.strip()
            if cell == missing_token:
                missing[i, j] = True
                continue
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}:{line}: column {header[j]!r}: cannot parse {cell!r}",
                    row=line, column=header[j]) from None
            if not np.isfinite(v):
                raise ParseError(
                    f"{path}:{line}: column {header[j]!r}: non-finite value {cell!r}",
                    row=line, column=header[j])
            values[i, j] = v
    data = Dataset(header, values, missing)
    if roles is not None:
        check_binary(data, roles.group)
        if roles.treatment is not None:
            check_binary(data, roles.treatment)
    return data


def write_csv(data, path, missing_token=""):
    """Write ``data`` so that :func:`load_csv` restores every value exactly."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(data.column_names)
        for vals, miss in zip(data.values, data.missing):
            w.writerow([missing_token if m else repr(float(v))
                        for v, m in zip(vals, miss)])


@dataclass(frozen=True)
class AnalysisSample:
    kept_row_indices: np.ndarray = field(repr=False)
    n_dropped_missing: int

    @property
    def n_kept(self):
        return int(self.kept_row_indices.size)


def complete_cases(data, used_columns):
    """Rows with no missing flag in any of ``used_columns``, in original order."""
    idx = [data.col_index(c) for c in used_columns]
    bad = data.missing[:, idx].any(axis=1) if idx else np.zeros(data.n_rows, bool)
    kept = np.flatnonzero(~bad)
    if kept.size == 0:
        raise EmptySampleError(
            f"no complete cases among columns {list(used_columns)}")
    return AnalysisSample(kept, int(data.n_rows - kept.size))
