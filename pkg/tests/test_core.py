import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from panelar import RegimeKind, RegimeSpec, limit_law, local_to_unity_variance, resolve_rho
from panelar.core import limit_moments, local_to_unity_moment, normalizers, rate_ratio
from panelar.errors import ConfigError, DegenerateT, InvalidRegime

ALL_SPECS = [
    RegimeSpec.stationary(0.5),
    RegimeSpec.stationary(-0.3),
    RegimeSpec.unit_root(),
    RegimeSpec.local_to_unity(1.0),
    RegimeSpec.local_to_unity(-0.5),
    RegimeSpec.mildly_integrated(1.0, 0.5),
    RegimeSpec.mildly_explosive(-1.0, 0.5),
    RegimeSpec.explosive(1.2),
    RegimeSpec.explosive(-1.3),
]


class TestRegimeSpec:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(kind="stationary", rho=1.0),
            dict(kind="stationary", rho=-1.2),
            dict(kind="stationary"),
            dict(kind="explosive", rho=0.9),
            dict(kind="local_to_unity", c=0.0),
            dict(kind="mildly_integrated", c=-1.0, kt_exponent=0.5),
            dict(kind="mildly_integrated", c=1.0, kt_exponent=1.0),
            dict(kind="mildly_explosive", c=1.0, kt_exponent=0.5),
            dict(kind="mildly_explosive", c=-1.0),
            dict(kind="unit_root", rho=1.0),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidRegime):
            RegimeSpec.from_dict(kwargs)

    def test_unknown_kind(self):
        with pytest.raises(InvalidRegime):
            RegimeSpec.from_dict({"kind": "quasi_stationary"})

    def test_local_to_unity_accepts_both_signs(self):
        assert RegimeSpec.local_to_unity(-2.0).c == -2.0
        assert RegimeSpec.local_to_unity(2.0).c == 2.0

    @pytest.mark.parametrize("spec", ALL_SPECS)
    def test_dict_round_trip(self, spec):
        assert RegimeSpec.from_dict(spec.to_dict()) == spec

    def test_kind_parse_accepts_spellings(self):
        assert RegimeKind.parse("UnitRoot") is RegimeKind.UNIT_ROOT
        assert RegimeKind.parse("unit-root") is RegimeKind.UNIT_ROOT


class TestResolveRho:
    def test_unit_root(self):
        assert resolve_rho(RegimeSpec.unit_root(), 50) == 1.0

    def test_local_to_unity(self):
        assert resolve_rho(RegimeSpec.local_to_unity(2.0), 100) == pytest.approx(0.98, abs=1e-15)

    def test_mildly_integrated(self):
        assert resolve_rho(RegimeSpec.mildly_integrated(1.0, 0.5), 100) == pytest.approx(
            0.9, abs=1e-15
        )

    def test_mildly_explosive_above_one(self):
        assert resolve_rho(RegimeSpec.mildly_explosive(-1.0, 0.5), 100) == pytest.approx(1.1)

    def test_mildly_integrated_degenerate(self):
        # 1 - 4 / sqrt(4) = -1 is not in (0, 1)
        with pytest.raises(DegenerateT):
            resolve_rho(RegimeSpec.mildly_integrated(4.0, 0.5), 4)

    def test_t_must_be_positive(self):
        with pytest.raises(ConfigError):
            resolve_rho(RegimeSpec.unit_root(), 0)


class TestLimitLaw:
    def test_unit_root_rate_and_variance(self):
        law = limit_law(RegimeSpec.unit_root(), 100, 400)
        assert law.rate == 4000.0
        assert law.limit_variance == 2.0

    def test_local_to_unity_variance(self):
        law = limit_law(RegimeSpec.local_to_unity(1.0), 10, 50)
        assert law.limit_variance == pytest.approx(4.0 / (1.0 + math.exp(-2.0)), rel=1e-14)
        assert law.limit_variance == pytest.approx(3.52318, abs=1e-5)

    def test_mildly_integrated_variance(self):
        assert limit_law(RegimeSpec.mildly_integrated(0.5, 0.5), 10, 100).limit_variance == 1.0

    def test_mildly_explosive_variance(self):
        law = limit_law(RegimeSpec.mildly_explosive(-1.5, 0.5), 4, 100)
        assert law.limit_variance == pytest.approx(4 * 1.5**2)

    def test_stationary(self):
        law = limit_law(RegimeSpec.stationary(0.5), 100, 100)
        assert law.rate == pytest.approx(math.sqrt(100 * 100 / 0.75))
        assert law.limit_variance == 1.0

    def test_explosive_variance_is_corrected(self):
        # rate sqrt(N) rho^{T-2} has limiting variance (1 - beta^2)^2
        law = limit_law(RegimeSpec.explosive(1.2), 400, 60)
        assert law.limit_variance == pytest.approx((1 - 1 / 1.44) ** 2, rel=1e-14)
        assert law.rate == pytest.approx(20 * 1.2**58, rel=1e-14)

    def test_negative_explosive_rate_carries_sign(self):
        assert limit_law(RegimeSpec.explosive(-1.5), 4, 5).rate < 0
        assert limit_law(RegimeSpec.explosive(-1.5), 4, 6).rate > 0

    @pytest.mark.parametrize("spec", ALL_SPECS)
    def test_rate_identity(self, spec):
        law = limit_law(spec, 37, 64)
        assert law.rate == pytest.approx(math.sqrt(37) * law.p_of_t / law.q_of_t, rel=1e-13)
        assert law.limit_variance > 0

    @pytest.mark.parametrize("spec", ALL_SPECS)
    def test_rate_scales_as_sqrt_n(self, spec):
        r1 = limit_law(spec, 1, 64).rate
        for n in (4, 9, 100, 12345):
            assert limit_law(spec, n, 64).rate == pytest.approx(math.sqrt(n) * r1, rel=1e-14)

    def test_local_to_unity_rate_matches_stationary_up_to_constant(self):
        c = 1.0
        ratios = []
        for T in (100, 1000, 10000):
            rho = 1 - c / T
            stat = limit_law(RegimeSpec.stationary(rho), 10, T).rate
            ltu = limit_law(RegimeSpec.local_to_unity(c), 10, T).rate
            ratios.append(stat / ltu)
        # sqrt(T / (1 - rho^2)) / T -> 1 / sqrt(2c)
        assert all(abs(r - 1 / math.sqrt(2 * c)) < 0.01 for r in ratios)

    def test_unrepresentable_rate(self):
        from panelar.errors import NumericalError

        with pytest.raises(NumericalError):
            limit_law(RegimeSpec.explosive(2.0), 10, 3000)

    def test_rate_ratio_closed_form(self):
        assert rate_ratio(RegimeSpec.unit_root(), 400) == 400.0
        p, q = normalizers(RegimeSpec.unit_root(), 400)
        assert (p, q) == (1 / 400, 1 / 160000)


class TestLocalToUnityMoment:
    @pytest.mark.parametrize("c", np.r_[np.linspace(-5, -0.01, 40), np.linspace(0.01, 5, 40)])
    def test_positive_on_grid(self, c):
        assert 2 * c - 1 + math.exp(-2 * c) > 0
        assert 0 < local_to_unity_variance(c) < math.inf

    @pytest.mark.parametrize("c", [1e-4, -1e-4])
    def test_continuity_to_unit_root(self, c):
        assert abs(local_to_unity_variance(c) - 2.0) < 1e-3

    @given(st.floats(min_value=-5, max_value=5).filter(lambda c: c != 0))
    def test_matches_high_precision(self, c):
        # enough digits to resolve c^2 next to 1
        with mpmath.workdps(40 + int(-2 * math.log10(abs(c))) if abs(c) < 1 else 40):
            cm = mpmath.mpf(c)
            exact = float((2 * cm - 1 + mpmath.exp(-2 * cm)) / (4 * cm * cm))
        assert local_to_unity_moment(c) == pytest.approx(exact, rel=1e-13)

    def test_limit_moments_unit_root(self):
        assert limit_moments(RegimeSpec.unit_root()) == (0.5, 0.5)
