"""Explicit finite-difference solver: stability, boundary handling, reductions,
and agreement with the lattice."""

import math
from datetime import date

import numpy as np
import pytest

from cblab import (
    ConfigurationError,
    ConversionTerms,
    ConvertibleTerms,
    CouponSchedule,
    DomainError,
    FDGrid,
    MarketParams,
    fd_profile,
    price_tf_crr,
    solve_tf_fd,
)
from cblab.fd import stable_time_layers
from cblab.termsheet import Timeline, year_fraction


def straight_bond(rate=0.0):
    issue, maturity = date(2002, 1, 2), date(2007, 1, 2)
    return ConvertibleTerms(
        nominal=100.0, issue=issue, maturity=maturity,
        coupon=CouponSchedule.generate(rate, 2, 100.0, issue, maturity),
        conversion=ConversionTerms(0.0, issue, maturity),
    )


class TestGrid:
    def test_stability_bound_enforced(self, market):
        horizon = 3.0
        n_t = stable_time_layers(market.sigma, 0.07, horizon, 400.0, 401)
        FDGrid(s_max=400.0, n_s=401, n_t=n_t).check_stability(market, horizon)
        with pytest.raises(ConfigurationError):
            FDGrid(s_max=400.0, n_s=401, n_t=n_t // 2).check_stability(market, horizon)

    def test_auto_grid_minimal(self, market):
        grid = FDGrid.auto(market, 3.0)
        grid.check_stability(market, 3.0)
        assert grid.ds == pytest.approx(1.0)

    def test_degenerate_grids_rejected(self):
        with pytest.raises(ConfigurationError):
            FDGrid(s_max=400.0, n_s=2, n_t=100)
        with pytest.raises(ConfigurationError):
            FDGrid(s_max=0.0, n_s=11, n_t=100)


class TestStraightBondReduction:
    def test_zero_coupon_uniform_closed_form(self, market, issue):
        terms = straight_bond()
        span = year_fraction(issue, terms.maturity)
        grid = FDGrid.auto(market, span)
        sol = solve_tf_fd(terms, market, issue, grid)
        for i, tau in enumerate(sol.layer_taus):
            expected = 100.0 * math.exp(-0.07 * (span - tau))
            err = np.max(np.abs(sol.value[i] - expected)) / expected
            assert err < 1e-6
            assert np.max(np.abs(sol.equity[i])) < 1e-6 * expected


class TestZeroSpreadReduction:
    def test_matches_single_equation_roller(self, table1, jan2004):
        """rc = 0 collapses the pair to one equation; march V alone with the
        same stencil and constraints and compare."""
        mkt0 = MarketParams(rate=0.05, credit_spread=0.0, sigma=0.30)
        span = year_fraction(jan2004, table1.maturity)
        grid = FDGrid(s_max=400.0, n_s=101, n_t=stable_time_layers(0.30, 0.05, span, 400.0, 101))
        sol = solve_tf_fd(table1, mkt0, jan2004, grid, snapshot_dates=[jan2004])

        tl = Timeline(table1, jan2004)
        n_s, n_t = grid.n_s, grid.n_t
        S = np.linspace(0.0, 400.0, n_s)
        taus = np.linspace(0.0, span, n_t)
        dt = span / (n_t - 1)
        ds = grid.ds
        S_int = S[1:-1]
        a = 0.5 * 0.09 * S_int**2 / ds**2
        b = 0.05 * S_int / (2 * ds)
        cu, cd = dt * (a + b), dt * (a - b)
        cm = 1.0 - dt * (2 * a + 0.05)
        call = tl.call_dirty(taus)
        conv_on = tl.conversion_active(taus)
        inject = np.zeros(n_t)
        for tc in tl.coupon_taus:
            if tc <= 1e-12 or tc >= span - 1e-12:
                continue
            j = int(np.searchsorted(taus, tc - 1e-12, side="left"))
            inject[j] += tl.coupon_amount * math.exp(0.05 * (taus[j] - tc))
        conv_T = np.where(conv_on[n_t - 1], S, 0.0)
        v = np.maximum(conv_T, tl.redemption)
        for m in range(n_t - 2, -1, -1):
            v_new = np.empty_like(v)
            v_new[1:-1] = cu * v[2:] + cm * v[1:-1] + cd * v[:-2]
            v = v_new
            if inject[m] != 0.0:
                v[1:-1] += inject[m]
            v[0] = max(0.0, tl.risky_cash_pv(taus[m], 0.05))
            v[-1] = max(400.0, tl.risky_cash_pv(taus[m], 0.05))
            conv = np.where(conv_on[m], S[1:-1], 0.0)
            v[1:-1] = np.maximum(np.minimum(v[1:-1], call[m]), conv)
        # compare the t0 layer
        idx = int(np.argmin(np.abs(sol.layer_taus - 0.0)))
        assert np.max(np.abs(sol.value[idx] - v)) < 1e-8


@pytest.fixture(scope="module")
def solved(table1, market, jan2004):
    span = year_fraction(jan2004, table1.maturity)
    grid = FDGrid.auto(market, span)
    return solve_tf_fd(table1, market, jan2004, grid, snapshot_dates=[jan2004]), span


class TestSolutionShape:
    def test_split_identity_everywhere(self, solved):
        sol, _ = solved
        assert np.array_equal(sol.value, sol.equity + sol.debt)
        assert np.all(sol.value >= 0.0)
        assert np.all(sol.debt >= -1e-12)
        assert np.all(np.isfinite(sol.value))

    def test_terminal_layer_exact(self, solved, table1):
        sol, span = solved
        i = int(np.argmin(np.abs(sol.layer_taus - span)))
        S = sol.spots
        expected_v = np.maximum(S, 102.0)  # ratio 1, redemption = nominal + final coupon
        assert np.array_equal(sol.value[i], expected_v)
        assert np.array_equal(sol.debt[i], np.where(S > 102.0, 0.0, 102.0))

    def test_profile_exact_at_grid_nodes(self, solved, table1, jan2004):
        sol, _ = solved
        idx = int(np.argmin(np.abs(sol.layer_taus)))
        rows = fd_profile(sol, jan2004, [100.0, 250.0])
        assert rows[0][1] == sol.value[idx][100]
        assert rows[1][1] == sol.value[idx][250]

    def test_profile_linear_interpolation(self, solved, jan2004):
        sol, _ = solved
        idx = int(np.argmin(np.abs(sol.layer_taus)))
        (_, v, _, _), = fd_profile(sol, jan2004, [100.5])
        assert v == pytest.approx(0.5 * (sol.value[idx][100] + sol.value[idx][101]), rel=1e-14)

    def test_profile_refuses_extrapolation(self, solved, jan2004, table1):
        sol, _ = solved
        with pytest.raises(DomainError):
            fd_profile(sol, jan2004, [401.0])
        with pytest.raises(DomainError):
            fd_profile(sol, date(2003, 12, 31), [100.0])

    def test_monotone_profile_where_lattice_oscillates(self, solved, jan2004):
        sol, _ = solved
        spots = np.round(np.arange(105.0, 112.0001, 0.1), 6)
        v = np.array([r[1] for r in fd_profile(sol, jan2004, spots)])
        assert np.all(v[1:] >= v[:-1] - 1e-6)

    def test_lattice_agreement_at_spot_100(self, solved, table1, market, jan2004):
        sol, _ = solved
        v_fd = fd_profile(sol, jan2004, [100.0])[0][1]
        v_lat = price_tf_crr(table1, market, jan2004, 100.0, 500).price
        assert abs(v_lat - v_fd) / v_fd < 5e-3


class TestSpreadMonotonicity:
    def test_value_never_increases_with_spread(self, table1, jan2004):
        span = year_fraction(jan2004, table1.maturity)
        grid = FDGrid(s_max=400.0, n_s=101,
                      n_t=stable_time_layers(0.30, 0.10, span, 400.0, 101))
        layers = {}
        for rc in (0.0, 0.02, 0.05):
            mkt = MarketParams(rate=0.05, credit_spread=rc, sigma=0.30)
            sol = solve_tf_fd(table1, mkt, jan2004, grid, snapshot_dates=[jan2004])
            idx = int(np.argmin(np.abs(sol.layer_taus)))
            layers[rc] = sol.value[idx]
        assert np.all(layers[0.02] <= layers[0.0] + 1e-9)
        assert np.all(layers[0.05] <= layers[0.02] + 1e-9)


class TestGridRefinement:
    def test_first_order_consistency(self, table1, market, jan2004):
        """Halving dS (with dt re-tied to the stability bound) changes the
        (t0, S=100) value by less than 4x the subsequent halving's change."""
        span = year_fraction(jan2004, table1.maturity)
        vals = {}
        for n_s in (201, 401, 801):
            grid = FDGrid(s_max=400.0, n_s=n_s,
                          n_t=stable_time_layers(0.30, 0.07, span, 400.0, n_s))
            sol = solve_tf_fd(table1, market, jan2004, grid, snapshot_dates=[jan2004])
            vals[n_s] = fd_profile(sol, jan2004, [100.0])[0][1]
        c1 = abs(vals[201] - vals[401])
        c2 = abs(vals[401] - vals[801])
        assert c1 < 4.0 * c2
