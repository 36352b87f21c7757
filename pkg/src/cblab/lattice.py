"""Binomial-lattice pricing of convertibles with split risk-free/risky discounting.

The bond value at every node is carried as two components, an equity part E
(discounted at the risk-free rate) and a cash-only part B (discounted at the
risky rate), with V = E + B.  Rollback applies the node decision rule
max[min(Q1, Q2), Q3, Q4] where Q1 is the held value, Q2 the dirty call price,
Q3 the dirty put price and Q4 the conversion value.  Conversion is the only
outcome settled in shares; cash outcomes (redemption, call, put) keep their
value in B, which is what couples the credit spread to the exercise decisions.

The rollback kernel is vectorized over a batch of root spot prices: every spot
still gets its own full tree, and batch results are bit-identical to pricing
each spot alone (all operations are elementwise).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date

import numpy as np

from .errors import ConfigurationError, DomainError
from .termsheet import ConvertibleTerms, MarketParams, Timeline

__all__ = [
    "LatticeParams",
    "NodeValue",
    "BindCounts",
    "PriceResult",
    "build_crr_params",
    "apply_constraints",
    "price_tf_crr",
    "price_profile_raw",
    "rollback_batch",
]

_COUPON_EPS = 1e-12


@dataclass(frozen=True)
class LatticeParams:
    """Step count and per-step dynamics of a recombining binomial tree."""

    steps: int
    dt: float
    up: float
    down: float
    p_up: float

    def __post_init__(self) -> None:
        if not 0.0 < self.p_up < 1.0:
            raise ConfigurationError(
                f"risk-neutral probability {self.p_up:.6f} outside (0,1); "
                "dt too large for this sigma/rate"
            )


@dataclass(frozen=True)
class NodeValue:
    """TF value split at one node: equity part E, cash-only part B."""

    equity: float
    debt: float

    @property
    def value(self) -> float:
        return self.equity + self.debt


@dataclass(frozen=True)
class BindCounts:
    """How many nodes were decided by each constraint during one rollback."""

    conversion: int
    call: int
    put: int


@dataclass(frozen=True)
class PriceResult:
    """Root node value plus the lattice diagnostics of the pricing run."""

    node: NodeValue
    params: LatticeParams
    binds: BindCounts

    @property
    def price(self) -> float:
        """Dirty price at the root."""
        return self.node.value


def build_crr_params(sigma: float, rate: float, horizon: float, steps: int) -> LatticeParams:
    """Standard recombining-tree parameters: u = exp(sigma*sqrt(dt)), d = 1/u,
    p = (exp(r*dt) - d)/(u - d)."""
    if steps < 1:
        raise ConfigurationError("steps must be >= 1")
    if horizon <= 0:
        raise ConfigurationError("horizon must be positive")
    if sigma <= 0:
        raise ConfigurationError("sigma must be > 0")
    dt = horizon / steps
    up = math.exp(sigma * math.sqrt(dt))
    down = 1.0 / up
    p_up = (math.exp(rate * dt) - down) / (up - down)
    return LatticeParams(steps=steps, dt=dt, up=up, down=down, p_up=p_up)


def _constrain(E, B, call_level, put_level, conv_value):
    """Vectorized node decision: V* = max(min(E+B, call), put, conv).

    Ties resolve continuation > conversion > call > put.  Returns the new
    (E, B) and the boolean masks of where conversion/call/put bound.

    Classification: conversion pays shares (all equity); a binding call or put
    pays contractual cash, so the proceeds sit in the credit-risky debt part.
    """
    V = E + B
    v_star = np.maximum(np.maximum(np.minimum(V, call_level), put_level), conv_value)
    no_clip = V <= call_level
    cont = no_clip & (v_star == V)
    convb = ~cont & (v_star == conv_value)
    callb = ~cont & ~convb & ~no_clip & (v_star == call_level)
    putb = ~(cont | convb | callb)
    E_out = np.where(cont, E, np.where(convb, conv_value, 0.0))
    B_out = np.where(cont, B, np.where(convb, 0.0, np.where(callb, call_level, put_level)))
    return E_out, B_out, convb, callb, putb


def apply_constraints(q1: NodeValue, q2: float, q3: float, q4: float) -> NodeValue:
    """Decide one node given held value q1, dirty call q2, dirty put q3,
    conversion value q4; classify the E/B split accordingly."""
    for name, v in (("q1.equity", q1.equity), ("q1.debt", q1.debt), ("q3", q3), ("q4", q4)):
        if not np.isfinite(v) or v < 0:
            raise DomainError(f"{name} must be finite and >= 0, got {v}")
    E, B, _, _, _ = _constrain(
        np.array([q1.equity]), np.array([q1.debt]), q2, q3, np.array([q4])
    )
    return NodeValue(equity=float(E[0]), debt=float(B[0]))


@dataclass(frozen=True)
class BatchResult:
    """Vectorized rollback output for a batch of root spots."""

    equity: np.ndarray        # (m,) root E per spot
    debt: np.ndarray          # (m,) root B per spot
    params: LatticeParams
    conv_binds: np.ndarray    # (m,) node counts per spot
    call_binds: np.ndarray
    put_binds: np.ndarray
    fronts: list[np.ndarray]  # constrained V at layers 0..front_layers, (m, k+1) each

    @property
    def value(self) -> np.ndarray:
        return self.equity + self.debt


def rollback_batch(
    terms: ConvertibleTerms,
    mkt: MarketParams,
    t0: date,
    spots: np.ndarray,
    steps: int,
    front_layers: int = 0,
) -> BatchResult:
    """Roll the split-value tree back to t0 for a whole vector of root spots.

    `front_layers` > 0 additionally records the constrained node values V of
    the first few layers (needed for lattice delta/gamma).
    """
    spots = np.asarray(spots, dtype=float)
    if spots.ndim != 1 or spots.size == 0:
        raise DomainError("spots must be a nonempty 1-D array")
    if not np.all(np.isfinite(spots)) or np.any(spots <= 0):
        raise DomainError("spot prices must be finite and > 0")
    timeline = Timeline(terms, t0)
    lp = build_crr_params(mkt.sigma, mkt.rate, timeline.tau_maturity, steps)
    if front_layers > steps:
        raise ConfigurationError("front_layers cannot exceed the step count")

    N = steps
    taus = timeline.tau_maturity * np.arange(N + 1) / N
    call_levels = timeline.call_dirty(taus)
    put_levels = timeline.put_dirty(taus)
    conv_active = timeline.conversion_active(taus)
    ratio = timeline.ratio

    # cash coupons: attach each to the first layer at-or-after its pay date,
    # compounded over the sub-step gap at the risky rate so the present value
    # at every earlier layer is exact; the final coupon rides on redemption
    risky = mkt.rate + mkt.credit_spread
    inject = np.zeros(N + 1)
    for tau_c in timeline.coupon_taus:
        if tau_c <= _COUPON_EPS or tau_c >= timeline.tau_maturity - _COUPON_EPS:
            continue
        j = int(np.searchsorted(taus, tau_c - _COUPON_EPS, side="left"))
        inject[j] += timeline.coupon_amount * math.exp(risky * (taus[j] - tau_c))

    m = spots.size
    rs = ratio * spots  # shares-per-bond times root spot; node conv = rs * u^(2j-i)
    E = np.empty((m, N + 1))
    B = np.empty((m, N + 1))
    scratch = np.empty((m, N + 1))
    v_buf = np.empty((m, N + 1))
    vstar_buf = np.empty((m, N + 1))
    conv_buf = np.empty((m, N + 1))

    j_idx = np.arange(N + 1)
    if conv_active[N]:
        np.multiply(rs[:, None], lp.up ** (2.0 * j_idx - N)[None, :], out=conv_buf)
    else:
        conv_buf.fill(0.0)
    red = timeline.redemption
    take_conv = conv_buf > red
    np.copyto(E, 0.0)
    np.copyto(E, conv_buf, where=take_conv)
    np.copyto(B, red)
    np.copyto(B, 0.0, where=take_conv)
    if inject[N] != 0.0:
        # a coupon paid strictly before maturity that buckets into the terminal
        # layer (coarse trees only) is received cash either way: conversion at
        # expiry forfeits the final coupon, not this one
        B += inject[N]
    conv_binds = take_conv.sum(axis=1)
    call_binds = np.zeros(m, dtype=np.int64)
    put_binds = np.zeros(m, dtype=np.int64)

    disc_E = math.exp(-mkt.rate * lp.dt)
    disc_B = math.exp(-risky * lp.dt)
    p, q = lp.p_up, 1.0 - lp.p_up

    fronts: dict[int, np.ndarray] = {}
    if front_layers >= N:
        fronts[N] = E + B
    for i in range(N - 1, -1, -1):
        w = i + 1
        Ew, Bw = E[:, :w], B[:, :w]
        # in-place rollback: X <- disc * (p * X_up + q * X_down)
        for X, disc in ((E, disc_E), (B, disc_B)):
            Xw = X[:, :w]
            np.multiply(X[:, 1 : w + 1], p, out=scratch[:, :w])
            np.multiply(Xw, q, out=Xw)
            np.add(Xw, scratch[:, :w], out=Xw)
            np.multiply(Xw, disc, out=Xw)
        if inject[i] != 0.0:
            Bw += inject[i]

        conv = conv_buf[:, :w]
        if conv_active[i]:
            np.multiply(rs[:, None], lp.up ** (2.0 * np.arange(w) - i)[None, :], out=conv)
        else:
            conv.fill(0.0)
        call_level, put_level = call_levels[i], put_levels[i]
        V = v_buf[:, :w]
        np.add(Ew, Bw, out=V)
        v_star = vstar_buf[:, :w]
        np.minimum(V, call_level, out=v_star)
        np.maximum(v_star, put_level, out=v_star)
        np.maximum(v_star, conv, out=v_star)
        no_clip = V <= call_level
        cont = no_clip & (v_star == V)
        not_cont = ~cont
        convb = not_cont & (v_star == conv)
        callb = not_cont & ~convb & ~no_clip & (v_star == call_level)
        putb = not_cont & ~(convb | callb)
        np.copyto(Ew, 0.0, where=not_cont)
        np.copyto(Ew, conv, where=convb)
        np.copyto(Bw, 0.0, where=not_cont)
        if callb.any():
            np.copyto(Bw, call_level, where=callb)
        if putb.any():
            np.copyto(Bw, put_level, where=putb)
        conv_binds += convb.sum(axis=1)
        call_binds += callb.sum(axis=1)
        put_binds += putb.sum(axis=1)
        if i <= front_layers:
            fronts[i] = Ew + Bw

    return BatchResult(
        equity=E[:, 0].copy(),
        debt=B[:, 0].copy(),
        params=lp,
        conv_binds=conv_binds,
        call_binds=call_binds,
        put_binds=put_binds,
        fronts=[fronts[k] for k in sorted(fronts)],
    )


def price_tf_crr(
    terms: ConvertibleTerms, mkt: MarketParams, t0: date, spot: float, steps: int
) -> PriceResult:
    """Price the convertible at (t0, spot) on an N-step tree; returns the dirty
    root value split into its equity and debt parts."""
    if spot <= 0:
        raise DomainError("spot must be > 0")
    res = rollback_batch(terms, mkt, t0, np.array([spot]), steps)
    return PriceResult(
        node=NodeValue(equity=float(res.equity[0]), debt=float(res.debt[0])),
        params=res.params,
        binds=BindCounts(
            conversion=int(res.conv_binds[0]),
            call=int(res.call_binds[0]),
            put=int(res.put_binds[0]),
        ),
    )


def price_profile_raw(
    terms: ConvertibleTerms, mkt: MarketParams, t0: date, spot_grid, steps: int
) -> list[tuple[float, NodeValue]]:
    """Price a whole ascending spot grid at once; elementwise identical to
    calling price_tf_crr per point."""
    grid = np.asarray(spot_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("spot grid must be a nonempty 1-D array")
    if np.any(np.diff(grid) < 0):
        raise DomainError("spot grid must be ascending")
    res = rollback_batch(terms, mkt, t0, grid, steps)
    return [
        (float(s), NodeValue(equity=float(e), debt=float(b)))
        for s, e, b in zip(grid, res.equity, res.debt)
    ]
