"""Explicit finite-difference solution of the coupled convertible PDE system.

Marches the pair of equations

    V_t + (1/2) sigma^2 S^2 V_SS + r S V_S - r V - r_c B = 0
    B_t + (1/2) sigma^2 S^2 B_SS + r S B_S - (r + r_c) B = 0

backward from expiry with central differences in S and forward Euler in time,
re-imposing the contract constraints (put floor, conversion floor, call cap)
and the S=0 / S=S_max boundary rows after every layer.  The node decision and
the E/B classification are shared with the lattice module so the two methods
are directly comparable; only the discretization differs.

Stability of the explicit march is enforced by construction:
dt <= dS^2 / (sigma^2 S_max^2 + (r + r_c) dS^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date

import numpy as np

from .errors import ConfigurationError, DomainError, NumericalError
from .lattice import _constrain
from .termsheet import ConvertibleTerms, MarketParams, Timeline, year_fraction

__all__ = ["FDGrid", "FDSolution", "solve_tf_fd", "fd_profile", "stable_time_layers"]

_FINITE_CHECK_EVERY = 2000


def _stability_limit(sigma: float, risky_rate: float, s_max: float, ds: float) -> float:
    return ds * ds / (sigma * sigma * s_max * s_max + risky_rate * ds * ds)


def stable_time_layers(
    sigma: float, risky_rate: float, horizon: float, s_max: float, n_s: int
) -> int:
    """Smallest layer count satisfying the explicit-scheme stability bound."""
    ds = s_max / (n_s - 1)
    dt_max = _stability_limit(sigma, risky_rate, s_max, ds)
    return int(math.ceil(horizon / dt_max)) + 1


@dataclass(frozen=True)
class FDGrid:
    """Uniform (S, t) grid for the explicit march."""

    s_max: float
    n_s: int
    n_t: int

    def __post_init__(self) -> None:
        if self.n_s < 3:
            raise ConfigurationError("need at least 3 spot nodes")
        if self.n_t < 2:
            raise ConfigurationError("need at least 2 time layers")
        if self.s_max <= 0:
            raise ConfigurationError("s_max must be > 0")

    @property
    def ds(self) -> float:
        return self.s_max / (self.n_s - 1)

    def dt(self, horizon: float) -> float:
        return horizon / (self.n_t - 1)

    def check_stability(self, mkt: MarketParams, horizon: float) -> None:
        limit = _stability_limit(mkt.sigma, mkt.rate + mkt.credit_spread, self.s_max, self.ds)
        if self.dt(horizon) > limit * (1.0 + 1e-12):
            raise ConfigurationError(
                f"explicit scheme unstable: dt={self.dt(horizon):.3e} exceeds "
                f"limit {limit:.3e}; raise n_t to at least "
                f"{stable_time_layers(mkt.sigma, mkt.rate + mkt.credit_spread, horizon, self.s_max, self.n_s)}"
            )

    @classmethod
    def auto(
        cls,
        mkt: MarketParams,
        horizon: float,
        s_max: float = 400.0,
        n_s: int = 401,
    ) -> "FDGrid":
        """Default grid: unit spot spacing to 4x the strike scale, minimal
        stable layer count."""
        n_t = stable_time_layers(mkt.sigma, mkt.rate + mkt.credit_spread, horizon, s_max, n_s)
        return cls(s_max=s_max, n_s=n_s, n_t=n_t)


@dataclass(frozen=True)
class FDSolution:
    """Stored solution layers (a subset of the marched layers) plus the grid."""

    terms: ConvertibleTerms
    grid: FDGrid
    t0: date
    spots: np.ndarray        # (n_s,)
    layer_taus: np.ndarray   # (n_stored,) years from t0, ascending
    value: np.ndarray        # (n_stored, n_s)
    equity: np.ndarray
    debt: np.ndarray


def solve_tf_fd(
    terms: ConvertibleTerms,
    mkt: MarketParams,
    t0: date,
    grid: FDGrid,
    snapshot_dates: list[date] | None = None,
) -> FDSolution:
    """March the coupled system from expiry back to t0 and keep snapshots.

    Snapshots are stored at the marched layer nearest each requested date (plus
    t0 and expiry always); with the stability-bound time step the layer spacing
    is well under an hour of calendar time.
    """
    timeline = Timeline(terms, t0)
    span = timeline.tau_maturity
    grid.check_stability(mkt, span)

    n_s, n_t = grid.n_s, grid.n_t
    S = np.linspace(0.0, grid.s_max, n_s)
    taus = np.linspace(0.0, span, n_t)
    dt = grid.dt(span)
    ds = grid.ds
    r, rc, sigma = mkt.rate, mkt.credit_spread, mkt.sigma
    risky = r + rc

    # update stencil coefficients on interior nodes
    S_int = S[1:-1]
    a = 0.5 * sigma * sigma * S_int * S_int / (ds * ds)
    b = r * S_int / (2.0 * ds)
    cu = dt * (a + b)
    cd = dt * (a - b)
    cm_v = 1.0 - dt * (2.0 * a + r)
    cm_b = 1.0 - dt * (2.0 * a + risky)

    call_levels = timeline.call_dirty(taus)
    put_levels = timeline.put_dirty(taus)
    conv_active = timeline.conversion_active(taus)
    ratio = timeline.ratio

    # coupons: first layer at-or-after the pay date, compounded over the gap
    inject = np.zeros(n_t)
    for tau_c in timeline.coupon_taus:
        if tau_c <= 1e-12 or tau_c >= span - 1e-12:
            continue
        j = int(np.searchsorted(taus, tau_c - 1e-12, side="left"))
        inject[j] += timeline.coupon_amount * math.exp(risky * (taus[j] - tau_c))

    # expiry layer
    red = timeline.redemption
    conv_T = ratio * S if conv_active[n_t - 1] else np.zeros_like(S)
    take_conv = conv_T > red
    V = np.where(take_conv, conv_T, red)
    B = np.where(take_conv, 0.0, red)
    if inject[n_t - 1] != 0.0:
        # pre-expiry coupon bucketing into the final layer: received either way
        V = V + inject[n_t - 1]
        B = B + inject[n_t - 1]

    # snapshot bookkeeping
    want = {0, n_t - 1}
    if snapshot_dates is not None:
        for d in snapshot_dates:
            if d < t0 or d > terms.maturity:
                raise DomainError(f"snapshot date {d} outside [{t0}, {terms.maturity}]")
            want.add(int(round(year_fraction(t0, d) / dt)))
    else:
        want.update(int(round(x)) for x in np.linspace(0, n_t - 1, 41))
    stored: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    if (n_t - 1) in want:
        stored[n_t - 1] = (V.copy(), B.copy())

    conv_top = ratio * grid.s_max if conv_active[n_t - 1] else 0.0
    for m in range(n_t - 2, -1, -1):
        V_new = np.empty_like(V)
        B_new = np.empty_like(B)
        V_new[1:-1] = cu * V[2:] + cm_v * V[1:-1] + cd * V[:-2] - (dt * rc) * B[1:-1]
        B_new[1:-1] = cu * B[2:] + cm_b * B[1:-1] + cd * B[:-2]
        V, B = V_new, B_new
        tau_m = taus[m]

        if inject[m] != 0.0:
            B[1:-1] += inject[m]
            V[1:-1] += inject[m]

        # S = 0: equity worthless forever, claim is pure risky debt (put-floored)
        debt_pv = timeline.risky_cash_pv(tau_m, risky)
        floor0 = max(put_levels[m], debt_pv)
        V[0] = floor0
        B[0] = floor0
        # S = S_max: conversion dominates when there is anything to convert into
        if conv_top > debt_pv:
            V[-1] = conv_top
            B[-1] = 0.0
        else:
            V[-1] = debt_pv
            B[-1] = debt_pv

        conv = ratio * S_int if conv_active[m] else np.zeros_like(S_int)
        E_int, B_int, _, _, _ = _constrain(
            V[1:-1] - B[1:-1], B[1:-1], call_levels[m], put_levels[m], conv
        )
        V[1:-1] = E_int + B_int
        B[1:-1] = B_int

        if m % _FINITE_CHECK_EVERY == 0 and not (np.isfinite(V).all() and np.isfinite(B).all()):
            raise NumericalError(f"non-finite values at layer {m} (tau={tau_m:.6f})")
        if m in want:
            stored[m] = (V.copy(), B.copy())

    idx = sorted(stored)
    value = np.array([stored[i][0] for i in idx])
    debt = np.array([stored[i][1] for i in idx])
    return FDSolution(
        terms=terms,
        grid=grid,
        t0=t0,
        spots=S,
        layer_taus=taus[idx],
        value=value,
        equity=value - debt,
        debt=debt,
    )


def fd_profile(solution: FDSolution, t: date, spots) -> list[tuple[float, float, float, float]]:
    """Section of the solution at date t: (S, V, E, B) rows.

    Nearest stored layer in time, linear interpolation in S (exact on grid
    nodes).  Spots outside [0, S_max] or dates outside the solved span are
    refused rather than extrapolated.
    """
    if t < solution.t0 or t > solution.terms.maturity:
        raise DomainError(f"date {t} outside the solved span")
    tau = year_fraction(solution.t0, t)
    layer = int(np.argmin(np.abs(solution.layer_taus - tau)))
    spots = np.asarray(spots, dtype=float)
    if np.any(spots < 0) or np.any(spots > solution.grid.s_max):
        raise DomainError("spot outside the solved grid; extrapolation refused")
    V = np.interp(spots, solution.spots, solution.value[layer])
    E = np.interp(spots, solution.spots, solution.equity[layer])
    B = np.interp(spots, solution.spots, solution.debt[layer])
    return [(float(s), float(v), float(e), float(b)) for s, v, e, b in zip(spots, V, E, B)]
