"""Delta-hedged position valuation and the one-shot stress test.

The hedged position is long one bond, short delta shares: P(S) = V(S) - delta*S.
The stress increment after an instantaneous spot shock h, with the hedge struck
at the pre-shock delta, is V(S+h) - V(S) - h*delta(S).  For a locally smooth
price this is ~ gamma*h^2/2; spikes far above that scale expose hedge-ratio
noise rather than genuine convexity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date

import numpy as np

from .errors import ConfigurationError, DomainError
from .lattice import rollback_batch
from .termsheet import ConvertibleTerms, MarketParams

__all__ = ["HedgeStressSpec", "hedged_position", "hedge_increment", "stress_curve"]


def _default_grid() -> np.ndarray:
    return np.arange(50.0, 200.0 + 1e-9, 0.5)


@dataclass(frozen=True)
class HedgeStressSpec:
    """Stress-test configuration: shock size, spot grid, date, tree steps,
    position size in nominal units."""

    t: date
    shock: float = 0.5
    spot_grid: np.ndarray = field(default_factory=_default_grid)
    steps: int = 500
    contract_size: float = 1_000_000.0

    def __post_init__(self) -> None:
        if self.shock == 0:
            raise ConfigurationError("shock must be nonzero")
        grid = np.asarray(self.spot_grid, dtype=float)
        if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) < 0):
            raise ConfigurationError("spot grid must be ascending and positive")
        object.__setattr__(self, "spot_grid", grid)

    def scaling(self, terms: ConvertibleTerms) -> float:
        """Positions per bond of `nominal`: contract size / nominal."""
        return self.contract_size / terms.nominal


def _value_and_delta(terms, mkt, t, spots, steps):
    res = rollback_batch(terms, mkt, t, spots, steps, front_layers=1)
    lp = res.params
    v1 = res.fronts[1]
    dlt = (v1[:, 1] - v1[:, 0]) / ((lp.up - lp.down) * spots)
    return res.value, dlt


def hedged_position(terms: ConvertibleTerms, mkt: MarketParams, t: date, spot: float, steps: int) -> float:
    """Value of long bond / short delta*S, per bond of `nominal` face."""
    if spot <= 0:
        raise DomainError("spot must be > 0")
    value, dlt = _value_and_delta(terms, mkt, t, np.array([float(spot)]), steps)
    return float(value[0] - dlt[0] * spot)


def hedge_increment(
    terms: ConvertibleTerms, mkt: MarketParams, t: date, spot: float, shock: float, steps: int
) -> float:
    """Change of the hedged position when the spot jumps by `shock`, the hedge
    having been struck at the pre-shock delta."""
    if spot <= 0 or spot + shock <= 0:
        raise DomainError("spot and shocked spot must be > 0")
    if shock == 0:
        return 0.0
    value, dlt = _value_and_delta(terms, mkt, t, np.array([float(spot)]), steps)
    bumped = rollback_batch(terms, mkt, t, np.array([float(spot + shock)]), steps)
    return float(bumped.value[0] - value[0] - shock * dlt[0])


def stress_curve(
    spec: HedgeStressSpec, terms: ConvertibleTerms, mkt: MarketParams
) -> list[tuple[float, float, float]]:
    """Shock increments over the whole grid: (S, increment, scaled increment)."""
    spots = spec.spot_grid
    value, dlt = _value_and_delta(terms, mkt, spec.t, spots, spec.steps)
    bumped = rollback_batch(terms, mkt, spec.t, spots + spec.shock, spec.steps)
    inc = bumped.value - value - spec.shock * dlt
    scale = spec.scaling(terms)
    return [(float(s), float(x), float(x * scale)) for s, x in zip(spots, inc)]
