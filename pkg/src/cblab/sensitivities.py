"""Lattice Greeks and (t, S) evaluation grids.

Delta and gamma are read off the first two layers of the same tree that prices
the bond: delta = (V+ - V-)/((u-d)S) from the step-1 nodes, gamma from the two
step-1 deltas formed out of the step-2 node values.  The trader's delta
(delta_pct) rescales by the conversion ratio.  No smoothing or extrapolation is
applied anywhere; oscillations in these numbers are signal, not noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date

import numpy as np

from .errors import ConfigurationError, DomainError
from .lattice import rollback_batch
from .termsheet import ConvertibleTerms, MarketParams, accrued_interest

__all__ = ["GreekPoint", "Surface", "delta", "delta_pct", "gamma", "greek_point", "surface"]


@dataclass(frozen=True)
class GreekPoint:
    """Value split and sensitivities of the bond at one (t, S) point."""

    t: date
    spot: float
    value: float
    equity: float
    debt: float
    delta: float
    delta_pct: float
    gamma: float


@dataclass(frozen=True)
class Surface:
    """Dense evaluation of prices and Greeks over a (t, S) rectangle.

    Arrays are indexed [time, spot] and match the grids elementwise.
    """

    t_grid: tuple[date, ...]
    spot_grid: np.ndarray
    value: np.ndarray
    equity: np.ndarray
    debt: np.ndarray
    delta: np.ndarray
    delta_pct: np.ndarray
    gamma: np.ndarray

    def point(self, i: int, j: int) -> GreekPoint:
        """The GreekPoint at row i (time) and column j (spot)."""
        return GreekPoint(
            t=self.t_grid[i],
            spot=float(self.spot_grid[j]),
            value=float(self.value[i, j]),
            equity=float(self.equity[i, j]),
            debt=float(self.debt[i, j]),
            delta=float(self.delta[i, j]),
            delta_pct=float(self.delta_pct[i, j]),
            gamma=float(self.gamma[i, j]),
        )


def _greek_arrays(terms, mkt, t, spots, steps):
    """One rollback per spot (batched): root split plus delta and gamma."""
    if steps < 3:
        raise ConfigurationError("greeks need at least 3 tree steps to maturity")
    res = rollback_batch(terms, mkt, t, spots, steps, front_layers=2)
    lp = res.params
    v0, v1, v2 = res.fronts  # constrained V at layers 0, 1, 2
    spread = (lp.up - lp.down) * spots
    dlt = (v1[:, 1] - v1[:, 0]) / spread
    d_up = (v2[:, 2] - v2[:, 1]) / ((lp.up - lp.down) * spots * lp.up)
    d_dn = (v2[:, 1] - v2[:, 0]) / ((lp.up - lp.down) * spots * lp.down)
    gma = (d_up - d_dn) / spread
    return res.equity, res.debt, v0[:, 0], dlt, gma


def delta(terms: ConvertibleTerms, mkt: MarketParams, t: date, spot: float, steps: int) -> float:
    """Hedge ratio dV/dS read from the step-1 nodes of the tree rooted at (t, spot)."""
    if steps < 2:
        raise ConfigurationError("delta needs at least 2 tree steps")
    res = rollback_batch(terms, mkt, t, np.array([float(spot)]), steps, front_layers=1)
    lp = res.params
    v1 = res.fronts[1]
    return float((v1[0, 1] - v1[0, 0]) / ((lp.up - lp.down) * spot))


def delta_pct(terms: ConvertibleTerms, mkt: MarketParams, t: date, spot: float, steps: int) -> float:
    """Delta rescaled by the conversion ratio; the market convention for equity
    sensitivity.  Not clamped to [0, 1]: excursions outside are reportable."""
    ratio = terms.conversion.ratio
    if ratio == 0:
        raise DomainError("delta_pct undefined for zero conversion ratio")
    return delta(terms, mkt, t, spot, steps) / ratio


def gamma(terms: ConvertibleTerms, mkt: MarketParams, t: date, spot: float, steps: int) -> float:
    """Second derivative estimate from the step-2 layer of the same tree."""
    if steps < 3:
        raise ConfigurationError("gamma needs at least 3 tree steps")
    _, _, _, _, g = _greek_arrays(terms, mkt, t, np.array([float(spot)]), steps)
    return float(g[0])


def greek_point(terms: ConvertibleTerms, mkt: MarketParams, t: date, spot: float, steps: int) -> GreekPoint:
    """Price split, delta, delta_pct and gamma at one (t, S), from one tree."""
    eq, db, v0, dlt, gma = _greek_arrays(terms, mkt, t, np.array([float(spot)]), steps)
    ratio = terms.conversion.ratio
    return GreekPoint(
        t=t,
        spot=float(spot),
        value=float(v0[0]),
        equity=float(eq[0]),
        debt=float(db[0]),
        delta=float(dlt[0]),
        delta_pct=float(dlt[0] / ratio) if ratio > 0 else np.nan,
        gamma=float(gma[0]),
    )


def surface(
    terms: ConvertibleTerms,
    mkt: MarketParams,
    t_grid,
    spot_grid,
    steps: int,
) -> Surface:
    """Evaluate prices and Greeks over a (t, S) rectangle; one tree per point,
    whole spot rows batched."""
    t_grid = tuple(t_grid)
    spots = np.asarray(spot_grid, dtype=float)
    if not t_grid or spots.size == 0:
        raise DomainError("grids must be nonempty")
    if np.any(np.diff(spots) < 0) or any(b < a for a, b in zip(t_grid, t_grid[1:])):
        raise DomainError("grids must be ascending")
    if any(t >= terms.maturity for t in t_grid):
        raise DomainError("all surface dates must be before maturity")

    ratio = terms.conversion.ratio
    nt, ns = len(t_grid), spots.size
    out = {k: np.empty((nt, ns)) for k in ("value", "equity", "debt", "delta", "delta_pct", "gamma")}
    for i, t in enumerate(t_grid):
        try:
            eq, db, v0, dlt, gma = _greek_arrays(terms, mkt, t, spots, steps)
        except Exception as exc:
            raise type(exc)(f"surface row t={t}: {exc}") from exc
        out["value"][i] = v0
        out["equity"][i] = eq
        out["debt"][i] = db
        out["delta"][i] = dlt
        out["delta_pct"][i] = dlt / ratio if ratio > 0 else np.nan
        out["gamma"][i] = gma
    return Surface(t_grid=t_grid, spot_grid=spots, **out)


def clean_value(terms: ConvertibleTerms, t: date, dirty: float) -> float:
    """Clean price: dirty minus accrued interest at t."""
    return dirty - accrued_interest(terms, t)


def monotonicity_violations(values, tol: float = 0.0) -> int:
    """Count adjacent pairs where the series strictly falls by more than tol."""
    v = np.asarray(values, dtype=float)
    return int(np.sum(v[1:] < v[:-1] - tol))


def second_difference_sign_changes(values) -> int:
    """Sign flips of the discrete second difference; a convexity-break counter."""
    v = np.asarray(values, dtype=float)
    d2 = v[2:] - 2.0 * v[1:-1] + v[:-2]
    return int(np.sum(d2[1:] * d2[:-1] < 0.0))


def local_extrema_count(values) -> int:
    """Interior points where the series direction reverses."""
    v = np.asarray(values, dtype=float)
    d = np.diff(v)
    return int(np.sum(d[1:] * d[:-1] < 0.0))
