import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gapdecomp.data import (Dataset, RoleMap, complete_cases, load_csv, load_roles,
                            mediator_set_tag, write_csv, write_roles)
from gapdecomp.errors import EmptySampleError, ParseError, SchemaError


@pytest.fixture
def roles():
    return RoleMap(group="g", outcome="y", controls=["w"], mediators_m1=["x1"],
                   mediators_m2=["x2"])


@pytest.fixture
def csv_path(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("g,y,w,x1,x2\n1,2.5,0.1,1,3\n0,,0.2,0,4\n1,1.0,,1,\n0,0.5,0.3,0,2\n")
    return p


class TestLoadCsv:

    def test_values_and_missing(self, csv_path, roles):
        d = load_csv(csv_path, roles)
        assert d.n_rows == 4
        assert d.column_names == ["g", "y", "w", "x1", "x2"]
        assert d.missing_counts() == {"g": 0, "y": 1, "w": 1, "x1": 0, "x2": 1}
        assert d.column("y")[1] == 0.0 and d.column_missing("y")[1]

    def test_unparseable_cell_location(self, tmp_path, roles):
        p = tmp_path / "bad.csv"
        p.write_text("g,y,w,x1,x2\n1,2.5,0.1,1,3\n0,1,0.2,0,4\n1,1.0,abc,1,2\n")
        with pytest.raises(ParseError) as info:
            load_csv(p, roles)
        # the header is line 1, so data row 3 sits on line 4
        assert info.value.row == 4
        assert info.value.column == "w"

    def test_custom_missing_token(self, tmp_path, roles):
        p = tmp_path / "na.csv"
        p.write_text("g,y,w,x1,x2\n1,NA,0.1,1,3\n0,1,0.2,0,4\n")
        d = load_csv(p, roles, missing_token="NA")
        assert d.column_missing("y").tolist() == [True, False]

    def test_missing_role_column(self, tmp_path, roles):
        p = tmp_path / "h.csv"
        p.write_text("g,y,w,x1\n1,2,3,4\n")
        with pytest.raises(SchemaError, match="x2"):
            load_csv(p, roles)

    def test_nonbinary_group(self, tmp_path, roles):
        p = tmp_path / "b.csv"
        p.write_text("g,y,w,x1,x2\n2,2,3,4,5\n")
        with pytest.raises(SchemaError, match="binary"):
            load_csv(p, roles)

    def test_ragged_row(self, tmp_path):
        p = tmp_path / "r.csv"
        p.write_text("a,b\n1,2\n3\n")
        with pytest.raises(ParseError) as info:
            load_csv(p)
        assert info.value.row == 3

    def test_round_trip(self, tmp_path, rng):
        vals = rng.standard_normal((30, 3)) * 1e3
        miss = rng.random((30, 3)) < 0.1
        d = Dataset(["a", "b", "c"], vals, miss)
        write_csv(d, tmp_path / "rt.csv")
        back = load_csv(tmp_path / "rt.csv")
        np.testing.assert_array_equal(back.values, d.values)
        np.testing.assert_array_equal(back.missing, d.missing)


class TestCompleteCases:

    def test_drops_rows_missing_in_used_columns(self, csv_path, roles):
        d = load_csv(csv_path, roles)
        s = complete_cases(d, ["g", "y"])
        assert s.kept_row_indices.tolist() == [0, 2, 3]
        assert s.n_dropped_missing == 1
        assert complete_cases(d, ["g", "y", "w", "x1", "x2"]).kept_row_indices.tolist() == [0, 3]

    def test_empty(self):
        d = Dataset(["a"], [[np.nan], [np.nan]])
        with pytest.raises(EmptySampleError):
            complete_cases(d, ["a"])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_more_columns_never_keep_more_rows(self, seed):
        gen = np.random.default_rng(seed)
        miss = gen.random((40, 4)) < 0.15
        miss[0] = False
        d = Dataset(list("abcd"), gen.standard_normal((40, 4)), miss)
        small = complete_cases(d, ["a", "b"])
        big = complete_cases(d, ["a", "b", "c", "d"])
        assert set(big.kept_row_indices) <= set(small.kept_row_indices)
        assert small.n_kept + small.n_dropped_missing == 40


class TestRoles:

    def test_ini_round_trip(self, tmp_path, roles):
        write_roles(roles, tmp_path / "r.ini")
        assert load_roles(tmp_path / "r.ini") == roles

    def test_ini_parsing(self, tmp_path):
        p = tmp_path / "r.ini"
        p.write_text("[group]\ncolumns = male\n[outcome]\ncolumns = wage\n"
                     "[controls]\ncolumns = age, swiss\n[mediators_m1]\ncolumns =\n  field\n  occ\n"
                     "[treatment]\ncolumns = info\n")
        r = load_roles(p)
        assert r.controls == ("age", "swiss")
        assert r.mediators("m1") == ["field", "occ"]
        assert r.treatment == "info"

    def test_overlap_rejected(self):
        with pytest.raises(SchemaError):
            RoleMap(group="g", outcome="y", controls=["a"], mediators_m1=["a"])

    def test_treatment_may_be_control(self):
        r = RoleMap(group="g", outcome="y", controls=["t", "a"], treatment="t")
        assert r.all_columns().count("t") == 1

    def test_mediator_sets(self, roles):
        assert roles.mediators("M1") == ["x1"]
        assert roles.mediators("all") == ["x1", "x2"]
        assert mediator_set_tag("M1+M2") == "M1_plus_M2"
        with pytest.raises(SchemaError):
            mediator_set_tag("m3")


class TestDataset:

    def test_immutable(self):
        d = Dataset(["a"], [[1.0]])
        with pytest.raises(ValueError):
            d.values[0, 0] = 2.0

    def test_nan_becomes_missing(self):
        d = Dataset.from_columns({"a": [1.0, np.nan]})
        assert d.missing[:, 0].tolist() == [False, True]
        assert d.values[1, 0] == 0.0

    def test_duplicate_names(self):
        with pytest.raises(SchemaError):
            Dataset(["a", "a"], np.zeros((1, 2)))
