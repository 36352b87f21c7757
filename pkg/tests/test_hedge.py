"""Delta-hedge position and shock-increment stress test."""

from datetime import date

import numpy as np
import pytest

from cblab import (
    ConfigurationError,
    ConversionTerms,
    ConvertibleTerms,
    CouponSchedule,
    DomainError,
    HedgeStressSpec,
    delta,
    hedge_increment,
    hedged_position,
    price_tf_crr,
    stress_curve,
)


def straight_bond():
    issue, maturity = date(2002, 1, 2), date(2007, 1, 2)
    return ConvertibleTerms(
        nominal=100.0, issue=issue, maturity=maturity,
        coupon=CouponSchedule.generate(0.04, 2, 100.0, issue, maturity),
        conversion=ConversionTerms(0.0, issue, maturity),
    )


class TestHedgedPosition:
    def test_straight_bond_position_is_value(self, market, issue):
        terms = straight_bond()
        v = price_tf_crr(terms, market, issue, 100.0, 300).price
        assert hedged_position(terms, market, issue, 100.0, 300) == v

    def test_recomposition_identity(self, table1, market, issue):
        v = price_tf_crr(table1, market, issue, 100.0, 500).price
        d = delta(table1, market, issue, 100.0, 500)
        assert hedged_position(table1, market, issue, 100.0, 500) == pytest.approx(
            v - d * 100.0, rel=1e-12
        )

    def test_deep_itm_position_near_zero_fraction(self, table1, market, issue):
        # pure equity limit: V ~ S and delta ~ 1, so the hedge nets out
        pos = hedged_position(table1, market, issue, 10_000.0, 500)
        assert abs(pos) < 0.02 * 10_000.0


class TestHedgeIncrement:
    def test_zero_shock_zero_increment(self, table1, market, issue):
        assert hedge_increment(table1, market, issue, 100.0, 0.0, 300) == 0.0

    def test_straight_bond_increment_zero(self, market, issue):
        terms = straight_bond()
        for h in (0.5, -0.25, 2.0):
            assert hedge_increment(terms, market, issue, 100.0, h, 300) == pytest.approx(
                0.0, abs=1e-10
            )

    def test_bad_spots_rejected(self, table1, market, issue):
        with pytest.raises(DomainError):
            hedge_increment(table1, market, issue, -1.0, 0.5, 100)
        with pytest.raises(DomainError):
            hedge_increment(table1, market, issue, 0.2, -0.5, 100)


class TestStressCurve:
    def test_singleton_matches_pointwise(self, table1, market, issue):
        spec = HedgeStressSpec(t=issue, spot_grid=np.array([100.0]), steps=300)
        (s, inc, scaled), = stress_curve(spec, table1, market)
        assert s == 100.0
        assert inc == hedge_increment(table1, market, issue, 100.0, 0.5, 300)
        assert scaled == inc * (1_000_000.0 / 100.0)

    def test_scaling_linearity_exact(self, table1, market, issue):
        grid = np.array([80.0, 100.0, 120.0])
        a = stress_curve(HedgeStressSpec(t=issue, spot_grid=grid, steps=200), table1, market)
        b = stress_curve(
            HedgeStressSpec(t=issue, spot_grid=grid, steps=200, contract_size=3_000_000.0),
            table1, market,
        )
        for (_, inc_a, sc_a), (_, inc_b, sc_b) in zip(a, b):
            assert inc_a == inc_b
            assert sc_b == inc_b * 30_000.0
            assert sc_a == inc_a * 10_000.0

    def test_zero_shock_rejected(self, issue):
        with pytest.raises(ConfigurationError):
            HedgeStressSpec(t=issue, shock=0.0)

    def test_smooth_region_taylor_control(self, table1, market, issue):
        """Deep out-of-the-money the increment is second order in the shock up
        to the lattice's decision-boundary noise (measured staircase jumps are
        a few hundredths); the curvature reference uses a stride wide enough
        to average over the staircase."""
        h_shock = 0.5
        inc = hedge_increment(table1, market, issue, 40.0, h_shock, 500)
        hh = 5.0
        vp = price_tf_crr(table1, market, issue, 40.0 + hh, 500).price
        v0 = price_tf_crr(table1, market, issue, 40.0, 500).price
        vm = price_tf_crr(table1, market, issue, 40.0 - hh, 500).price
        g_fd = (vp - 2 * v0 + vm) / hh**2
        noise_allowance = 0.1
        assert abs(inc) <= 0.5 * abs(g_fd) * h_shock**2 + noise_allowance

    def test_oscillation_pathology(self, table1, market, issue):
        spec = HedgeStressSpec(t=issue)  # default grid 50..200 step 0.5, shock 0.5
        curve = stress_curve(spec, table1, market)
        inc = np.array([x[1] for x in curve])
        signs = np.sum(inc[1:] * inc[:-1] < 0)
        assert signs >= 5
        assert np.abs(inc).max() > 0.1  # spikes far beyond the smooth second-order scale

    def test_shrinking_shock_recorded(self, table1, market, issue, capsys):
        """As the shock shrinks the increment should vanish at smooth points;
        near the call region the hedge-ratio error dominates instead.  The
        behavior is recorded here, not bounded: it is the finding."""
        rows = []
        for s in (40.0, 109.0):
            for h in (0.5, 0.1, 0.02):
                inc = hedge_increment(table1, market, issue, s, h, 500)
                rows.append((s, h, inc))
                assert np.isfinite(inc)
        with capsys.disabled():
            print("\n  shock-size sweep (S, h, increment):")
            for s, h, inc in rows:
                print(f"    S={s:6.1f} h={h:4.2f} increment={inc:+.6f}")
