import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gapdecomp.data import Dataset, RoleMap
from gapdecomp.errors import EmptySampleError, SingularMatrixError
from gapdecomp.oaxaca import oaxaca_components, oaxaca_decompose
from gapdecomp.numkit import RngState
from gapdecomp.synthetic import SyntheticDgp, generate

ROLES = RoleMap(group="g", outcome="y", controls=["w"], mediators_m1=["x"])


def brute_force(y, g, x):
    """Group regressions via lstsq and the textbook formulas, one mediator."""
    out = {}
    for s in (0, 1):
        a = np.column_stack([np.ones((g == s).sum()), x[g == s]])
        out[s] = np.linalg.lstsq(a, y[g == s], rcond=None)[0]
    m1, m0 = x[g == 1].mean(), x[g == 0].mean()
    return np.array([
        y[g == 1].mean() - y[g == 0].mean(),
        (m1 - m0) * out[0][1],
        out[1][0] - out[0][0] + m1 * (out[1][1] - out[0][1]),
        (m1 - m0) * out[1][1],
        out[1][0] - out[0][0] + m0 * (out[1][1] - out[0][1]),
    ])


class TestOaxaca:

    def test_symmetric_data_gives_zeros(self, rng):
        y = rng.standard_normal(50)
        x = rng.standard_normal(50)
        g = np.repeat([0.0, 1.0], 50)
        vec = oaxaca_components(np.tile(y, 2), g, np.tile(x, 2))
        np.testing.assert_allclose(vec, 0.0, atol=1e-10)

    def test_constant_mediator_within_group(self):
        d = Dataset.from_columns({"g": [1, 1, 1, 0, 0, 0], "y": [5, 5, 5, 2, 2, 2],
                                  "x": [2, 2, 2, 1, 1, 1], "w": [0] * 6})
        with pytest.raises(SingularMatrixError) as info:
            oaxaca_decompose(d, ROLES)
        assert info.value.column_name == "x"
        assert "x" in str(info.value)

    def test_empty_group(self):
        with pytest.raises(EmptySampleError):
            oaxaca_components([1.0, 2.0, 3.0], [1, 1, 1], [0.0, 1.0, 3.0])

    def test_matches_brute_force(self, rng):
        n = 300
        g = (rng.random(n) < 0.4).astype(float)
        x = 0.7 * g + rng.standard_normal(n)
        y = 0.5 * g + 1.2 * x + 0.8 * g * x + rng.standard_normal(n)
        np.testing.assert_allclose(oaxaca_components(y, g, x), brute_force(y, g, x),
                                   atol=1e-10)

    def test_recovers_structural_effects(self):
        dgp = SyntheticDgp(n=10000, dim_w=1, gamma=[0.0], alpha=[0.5], delta=[[0.0]],
                           theta=1.0, beta=[2.0], kappa=[0.0], seed=77)
        res = oaxaca_decompose(generate(dgp), dgp.roles())
        for comp in (res.indirect_ref_female, res.indirect_ref_male):
            assert comp == pytest.approx(1.0, abs=0.1)
        for comp in (res.direct_ref_female, res.direct_ref_male):
            assert comp == pytest.approx(1.0, abs=0.1)

    def test_listwise_deletion_counts(self, rng):
        n = 100
        y = rng.standard_normal(n)
        y[:4] = np.nan
        d = Dataset.from_columns({"g": np.arange(n) % 2, "y": y,
                                  "x": rng.standard_normal(n), "w": np.full(n, np.nan)})
        res = oaxaca_decompose(d, ROLES)  # W is not used by the OB regressions
        assert res.n_used == 96 and res.n_dropped_missing == 4

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(20, 400), st.floats(-50, 50))
    def test_adding_up_and_location_shift(self, seed, n, shift):
        gen = np.random.default_rng(seed)
        g = np.zeros(n)
        g[: n // 2] = 1
        x = gen.standard_normal((n, 2)) + g[:, None]
        y = g + x @ [1.0, -0.5] + gen.standard_normal(n)
        vec = oaxaca_components(y, g, x)
        assert abs(vec[1] + vec[2] - vec[0]) <= 1e-10
        assert abs(vec[3] + vec[4] - vec[0]) <= 1e-10
        np.testing.assert_allclose(oaxaca_components(y + shift, g, x), vec, atol=1e-9)

    def test_include_controls_switch(self):
        dgp = SyntheticDgp(n=500, dim_w=2, gamma=[0.5, 0.0], alpha=[0.5], delta=[[0.3], [0.0]],
                           theta=1.0, beta=[1.0], kappa=[1.0, 0.5], seed=1)
        data = generate(dgp)
        a = oaxaca_decompose(data, dgp.roles())
        b = oaxaca_decompose(data, dgp.roles(), include_controls=True)
        assert a.details["regressors"] == ["x1"]
        assert b.details["regressors"] == ["x1", "w1", "w2"]
        assert a.total_gap == b.total_gap
        assert b.adding_up_error() <= 1e-10
