import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from panelar import InnovationSpec, PanelData, RegimeSpec, confidence_interval, simulate_panel, unit_root_test
from panelar.errors import ConfigError, MissingParameters, RegimeMismatch
from panelar.inference import all_regime_intervals


def geometric_panel(N, T, rho):
    """Rows ``0, 1, rho, rho^2, ...`` so that ``rho_hat`` equals ``rho``."""
    row = np.r_[0.0, rho ** np.arange(T)]
    return PanelData(y=np.tile(row, (N, 1)))


class TestConfidenceInterval:
    def test_unit_root_example(self):
        res = confidence_interval(geometric_panel(100, 100, 1.0), "unit_root", 0.95)
        assert res.rho_hat == 1.0
        assert res.rate == 1000.0
        assert res.ci_low == pytest.approx(1 - 1.959964 * math.sqrt(2) / 1000, abs=1e-8)
        assert round(res.ci_low, 5) == 0.99723
        assert round(res.ci_high, 5) == 1.00277

    def test_stationary_mismatch(self):
        with pytest.raises(RegimeMismatch):
            confidence_interval(geometric_panel(3, 10, 1.2), "stationary")

    def test_explosive_mismatch(self):
        with pytest.raises(RegimeMismatch):
            confidence_interval(geometric_panel(3, 10, 0.8), "explosive")

    def test_level_to_zero(self):
        res = confidence_interval(geometric_panel(5, 20, 0.5), "stationary", 1e-12)
        assert res.ci_high - res.ci_low < 1e-12

    @pytest.mark.parametrize("level", [0.0, 1.0, -0.1, 1.5])
    def test_bad_level(self, level):
        with pytest.raises(ConfigError):
            confidence_interval(geometric_panel(2, 5, 0.5), "unit_root", level)

    def test_stationary_plug_in(self):
        res = confidence_interval(geometric_panel(4, 25, 0.6), "stationary")
        assert res.rate == pytest.approx(math.sqrt(100 / (1 - 0.36)))
        assert res.limit_variance == 1.0

    def test_negative_explosive_rate_positive(self):
        for T in (11, 12):
            res = confidence_interval(geometric_panel(4, T, -1.3), "explosive")
            assert res.rate > 0
            assert res.rate == pytest.approx(2 * 1.3 ** (T - 2), rel=1e-9)
            assert res.limit_variance == pytest.approx((1 - 1 / 1.69) ** 2)

    def test_drifting_regimes_need_parameters(self):
        panel = geometric_panel(4, 50, 0.97)
        with pytest.raises(MissingParameters):
            confidence_interval(panel, "local_to_unity")
        with pytest.raises(MissingParameters):
            confidence_interval(panel, "mildly_integrated", params={"c": 1.0})
        res = confidence_interval(panel, "local_to_unity", params={"c": 1.5})
        assert res.rate == 2 * 50
        res = confidence_interval(panel, "mildly_integrated", params={"c": 1.0, "kt_exponent": 0.5})
        assert res.limit_variance == 2.0

    @settings(max_examples=40, deadline=None)
    @given(
        st.sampled_from(["stationary", "unit_root"]),
        st.floats(min_value=0.01, max_value=0.99),
        st.integers(min_value=0, max_value=2**31),
    )
    def test_interval_invariants(self, kind, level, seed):
        spec = RegimeSpec.stationary(0.5) if kind == "stationary" else RegimeSpec.unit_root()
        panel = simulate_panel(spec, InnovationSpec(), 10, 30, seed)
        res = confidence_interval(panel, kind, level)
        assert res.ci_low <= res.rho_hat <= res.ci_high
        width = 2 * special.ndtri((1 + level) / 2) * math.sqrt(res.limit_variance) / res.rate
        assert res.ci_high - res.ci_low == pytest.approx(width, rel=1e-9)
        wider = confidence_interval(panel, kind, min(0.999, level + 0.005))
        assert wider.ci_high - wider.ci_low > res.ci_high - res.ci_low
        assert wider.rho_hat == res.rho_hat
        assert res.test_statistic is None and res.p_value is None


class TestUnitRootTest:
    def test_null_center(self):
        res = unit_root_test(geometric_panel(100, 100, 1.0))
        assert res.test_statistic == 0.0
        assert res.p_value == 1.0

    def test_example(self):
        res = unit_root_test(geometric_panel(100, 100, 0.999))
        assert res.test_statistic == pytest.approx(-0.70711, abs=1e-5)
        assert res.p_value == pytest.approx(0.4795, abs=1e-4)

    def test_one_sided(self):
        panel = geometric_panel(100, 100, 0.999)
        low = unit_root_test(panel, "stationary_side")
        high = unit_root_test(panel, "explosive_side")
        assert low.p_value + high.p_value == pytest.approx(1.0)
        assert low.p_value < 0.5 < high.p_value

    def test_needs_two_sections(self):
        with pytest.raises(ConfigError):
            unit_root_test(geometric_panel(1, 10, 1.0))

    def test_bad_alternative(self):
        with pytest.raises(ConfigError):
            unit_root_test(geometric_panel(3, 10, 1.0), "left")

    @settings(max_examples=60, deadline=None)
    @given(st.floats(min_value=0.5, max_value=0.999), st.integers(min_value=0, max_value=2**31))
    def test_duality(self, level, seed):
        panel = simulate_panel(RegimeSpec.unit_root(), InnovationSpec(), 20, 40, seed)
        res = unit_root_test(panel, "two_sided", level)
        inside = res.ci_low <= 1.0 <= res.ci_high
        margin = abs(abs(res.test_statistic) - special.ndtri((1 + level) / 2))
        if margin > 1e-9:
            assert (res.p_value < 1 - level) == (not inside)


def test_all_regime_intervals():
    out = all_regime_intervals(geometric_panel(4, 50, 0.97), params={"c": 1.0, "kt_exponent": 0.5})
    assert set(out) == {
        "stationary", "unit_root", "local_to_unity",
        "mildly_integrated", "mildly_explosive", "explosive",
    }
    assert isinstance(out["explosive"], str) and "not applicable" in out["explosive"]
    assert out["unit_root"].regime_assumed == "unit_root"
