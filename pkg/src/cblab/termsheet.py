"""Convertible-bond contract representation.

Term sheet types (coupon schedule, conversion/call/put windows), act/365 date
arithmetic, accrued interest, and the contract-level price functions (conversion
value, dirty call, dirty put).  Everything here is immutable and pure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from datetime import date, timedelta
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DomainError, TermSheetError

__all__ = [
    "DayCount",
    "CouponSchedule",
    "ConversionTerms",
    "CallTerms",
    "PutTerms",
    "ConvertibleTerms",
    "MarketParams",
    "year_fraction",
    "accrued_interest",
    "conversion_value",
    "dirty_call_price",
    "dirty_put_price",
    "load_terms",
    "dump_terms",
    "terms_to_dict",
    "terms_from_dict",
    "reference_terms",
    "reference_market",
    "reference_terms_path",
]


class DayCount(Enum):
    """Day-count convention; act/365 is the only one the instruments here use."""

    ACT_365 = "ACT_365"


def year_fraction(d1: date, d2: date, dc: DayCount = DayCount.ACT_365) -> float:
    """Year fraction between two dates, exact day count over 365."""
    if d1 > d2:
        raise DomainError(f"year_fraction: {d1} is after {d2}")
    if dc is not DayCount.ACT_365:
        raise ConfigurationError(f"unsupported day count {dc}")
    return (d2 - d1).days / 365.0


def _add_months(d: date, months: int) -> date:
    """Shift a date by calendar months, clamping the day into the target month."""
    m = d.month - 1 + months
    y = d.year + m // 12
    m = m % 12 + 1
    # clamp day for short months (31st -> 30th/28th etc.)
    for day in range(d.day, 27, -1):
        try:
            return date(y, m, day)
        except ValueError:
            continue
    return date(y, m, min(d.day, 28))


@dataclass(frozen=True)
class CouponSchedule:
    """Fixed-rate coupon stream; dates step back from maturity in even months."""

    rate: float
    frequency: int
    nominal: float
    dates: tuple[date, ...]

    def __post_init__(self) -> None:
        if self.frequency < 1:
            raise ConfigurationError("coupon frequency must be >= 1 per year")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ConfigurationError("coupon dates must be strictly increasing")

    @property
    def amount(self) -> float:
        """Cash paid per coupon date."""
        return self.nominal * self.rate / self.frequency

    @classmethod
    def generate(
        cls, rate: float, frequency: int, nominal: float, issue: date, maturity: date
    ) -> "CouponSchedule":
        """Build the schedule by stepping 12/frequency months back from maturity."""
        if 12 % frequency != 0:
            raise ConfigurationError(f"frequency {frequency} does not divide the year evenly")
        step = 12 // frequency
        dates: list[date] = []
        d = maturity
        while d > issue:
            dates.append(d)
            d = _add_months(d, -step)
        if d != issue:
            raise ConfigurationError(
                f"coupon grid from {maturity} does not land on issue date {issue}"
            )
        return cls(rate=rate, frequency=frequency, nominal=nominal, dates=tuple(sorted(dates)))


@dataclass(frozen=True)
class ConversionTerms:
    """Right to exchange the bond for `ratio` shares inside [start, end]."""

    ratio: float
    start: date
    end: date

    def __post_init__(self) -> None:
        if self.ratio < 0:
            raise ConfigurationError("conversion ratio must be >= 0")
        if self.start > self.end:
            raise ConfigurationError("conversion window start is after its end")


@dataclass(frozen=True)
class CallTerms:
    """Issuer redemption right at a clean level inside [start, end].

    `schedule`, when nonempty, lists (effective-from date, clean price) steps and
    overrides the flat `price`.
    """

    price: float
    start: date
    end: date
    schedule: tuple[tuple[date, float], ...] = ()

    def __post_init__(self) -> None:
        levels = [self.price] + [p for _, p in self.schedule]
        if any(p <= 0 for p in levels):
            raise ConfigurationError("call price must be > 0 inside the window")

    def clean_level(self, t: date) -> float:
        level = self.price
        for eff, p in sorted(self.schedule):
            if eff <= t:
                level = p
        return level


@dataclass(frozen=True)
class PutTerms:
    """Holder sell-back right at a clean level inside [start, end]."""

    price: float
    start: date
    end: date
    schedule: tuple[tuple[date, float], ...] = ()

    def __post_init__(self) -> None:
        levels = [self.price] + [p for _, p in self.schedule]
        if any(p <= 0 for p in levels):
            raise ConfigurationError("put price must be > 0 inside the window")

    def clean_level(self, t: date) -> float:
        level = self.price
        for eff, p in sorted(self.schedule):
            if eff <= t:
                level = p
        return level


@dataclass(frozen=True)
class ConvertibleTerms:
    """Full convertible-bond term sheet."""

    nominal: float
    issue: date
    maturity: date
    coupon: CouponSchedule
    conversion: ConversionTerms
    call: CallTerms | None = None
    put: PutTerms | None = None
    day_count: DayCount = DayCount.ACT_365

    def __post_init__(self) -> None:
        if self.issue >= self.maturity:
            raise ConfigurationError("issue date must precede maturity")
        if self.coupon.dates:
            if self.coupon.dates[0] <= self.issue:
                raise ConfigurationError("first coupon date must be after issue")
            if self.coupon.dates[-1] != self.maturity:
                raise ConfigurationError("last coupon date must equal maturity")
        for name, window in (("conversion", self.conversion), ("call", self.call), ("put", self.put)):
            if window is None:
                continue
            if window.start < self.issue or window.end > self.maturity:
                raise ConfigurationError(f"{name} window must lie inside the bond life")

    def with_nominal_scaled(self, factor: float) -> "ConvertibleTerms":
        """Scale nominal, coupon basis, conversion ratio and call/put levels together."""
        scale_sched = lambda s: tuple((d, p * factor) for d, p in s)
        return replace(
            self,
            nominal=self.nominal * factor,
            coupon=replace(self.coupon, nominal=self.coupon.nominal * factor),
            conversion=replace(self.conversion, ratio=self.conversion.ratio * factor),
            call=None
            if self.call is None
            else replace(self.call, price=self.call.price * factor, schedule=scale_sched(self.call.schedule)),
            put=None
            if self.put is None
            else replace(self.put, price=self.put.price * factor, schedule=scale_sched(self.put.schedule)),
        )


@dataclass(frozen=True)
class MarketParams:
    """Flat market inputs: risk-free rate, credit spread, stock volatility.

    Rates are continuously compounded per year; sigma is per sqrt(year).
    """

    rate: float
    credit_spread: float
    sigma: float

    def __post_init__(self) -> None:
        if self.sigma <= 0:
            raise ConfigurationError("sigma must be > 0")
        if not (np.isfinite(self.rate) and np.isfinite(self.credit_spread)):
            raise ConfigurationError("rate and credit spread must be finite")


# ---------------------------------------------------------------------------
# Contract functions
# ---------------------------------------------------------------------------

def _check_in_life(terms: ConvertibleTerms, t: date) -> None:
    if t < terms.issue or t > terms.maturity:
        raise DomainError(f"{t} is outside the bond life [{terms.issue}, {terms.maturity}]")


def accrued_interest(terms: ConvertibleTerms, t: date) -> float:
    """Coupon accrued since the last coupon date (or issue), act/365 pro-rata.

    Zero exactly on coupon dates and at issue; grows linearly in day count up to
    the full coupon amount just before the next payment.
    """
    _check_in_life(terms, t)
    sched = terms.coupon
    if not sched.dates or sched.amount == 0.0:
        return 0.0
    bounds = (terms.issue,) + sched.dates
    if t in bounds:
        return 0.0
    idx = max(i for i, b in enumerate(bounds) if b < t)
    prev, nxt = bounds[idx], bounds[idx + 1]
    frac = year_fraction(prev, t, terms.day_count) / year_fraction(prev, nxt, terms.day_count)
    return sched.amount * frac


def conversion_value(terms: ConvertibleTerms, S: float, t: date) -> float:
    """ratio * S inside the conversion window, 0 outside; carries no accrued."""
    if S < 0:
        raise DomainError("stock price must be >= 0")
    c = terms.conversion
    return c.ratio * S if c.start <= t <= c.end else 0.0


def dirty_call_price(terms: ConvertibleTerms, t: date) -> float:
    """Clean call level plus accrued inside the call window; +inf when not callable."""
    _check_in_life(terms, t)
    c = terms.call
    if c is None or not (c.start <= t <= c.end):
        return np.inf
    return c.clean_level(t) + accrued_interest(terms, t)


def dirty_put_price(terms: ConvertibleTerms, t: date) -> float:
    """Clean put level plus accrued inside the put window; 0 when not puttable."""
    _check_in_life(terms, t)
    p = terms.put
    if p is None or not (p.start <= t <= p.end):
        return 0.0
    return p.clean_level(t) + accrued_interest(terms, t)


# ---------------------------------------------------------------------------
# Engine-facing timeline (year-fraction coordinates)
# ---------------------------------------------------------------------------

_WINDOW_EPS = 1e-12  # fp guard when grid times land on window boundaries


class Timeline:
    """Contract quantities re-expressed as year fractions from an anchor date.

    Pricing engines work in continuous time; all date arithmetic happens here,
    once, at construction.  Times before the anchor come out negative.
    """

    def __init__(self, terms: ConvertibleTerms, t0: date):
        if t0 < terms.issue or t0 >= terms.maturity:
            raise DomainError(f"anchor {t0} must satisfy issue <= t0 < maturity")
        self.terms = terms
        self.t0 = t0
        self.tau_maturity = year_fraction(t0, terms.maturity)
        self.ratio = terms.conversion.ratio
        self.nominal = terms.nominal
        self.coupon_amount = terms.coupon.amount

        to_tau = lambda d: (d - t0).days / 365.0
        self.coupon_taus = np.array([to_tau(d) for d in terms.coupon.dates])
        self._accrual_bounds = np.array([to_tau(terms.issue)] + [to_tau(d) for d in terms.coupon.dates])
        self._conv_window = (to_tau(terms.conversion.start), to_tau(terms.conversion.end))
        self._call_window = None if terms.call is None else (to_tau(terms.call.start), to_tau(terms.call.end))
        self._put_window = None if terms.put is None else (to_tau(terms.put.start), to_tau(terms.put.end))
        # clean levels sampled per coupon-period boundary would be wrong for stepped
        # schedules; sample lazily at query times instead
        self.redemption = terms.nominal + terms.coupon.amount if terms.coupon.dates else terms.nominal

    def _clean_level(self, window, tau: float) -> float:
        """Clean call/put level at tau; schedules step on dates, so map back."""
        t = self.t0 + timedelta(days=round(tau * 365.0))
        return window.clean_level(t)

    def accrued(self, tau) -> np.ndarray:
        """Accrued interest at year-fraction times tau (1-D); piecewise linear."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        b = self._accrual_bounds
        if len(b) < 2 or self.coupon_amount == 0.0:
            return np.zeros_like(tau)
        idx = np.clip(np.searchsorted(b, tau + _WINDOW_EPS, side="right") - 1, 0, len(b) - 2)
        frac = (tau - b[idx]) / (b[idx + 1] - b[idx])
        out = self.coupon_amount * np.clip(frac, 0.0, 1.0)
        # exact zero on boundaries (payment resets accrual)
        on_bound = np.isclose(tau[:, None], b[None, :], rtol=0.0, atol=_WINDOW_EPS).any(axis=1)
        return np.where(on_bound, 0.0, out)

    def _in_window(self, window, tau: np.ndarray) -> np.ndarray:
        if window is None:
            return np.zeros(tau.shape, dtype=bool)
        lo, hi = window
        return (tau >= lo - _WINDOW_EPS) & (tau <= hi + _WINDOW_EPS)

    def _dirty_levels(self, window, terms_side, tau: np.ndarray, outside: float) -> np.ndarray:
        levels = np.full(tau.shape, outside)
        if window is None:
            return levels
        inside = self._in_window(window, tau)
        if inside.any():
            if terms_side.schedule:
                clean = np.array([self._clean_level(terms_side, t) for t in tau[inside]])
            else:
                clean = terms_side.price
            levels[inside] = clean + self.accrued(tau[inside])
        return levels

    def call_dirty(self, tau) -> np.ndarray:
        """Dirty call level at tau: clean + accrued inside the window, +inf outside."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        return self._dirty_levels(self._call_window, self.terms.call, tau, np.inf)

    def put_dirty(self, tau) -> np.ndarray:
        """Dirty put level at tau: clean + accrued inside the window, 0 outside."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        return self._dirty_levels(self._put_window, self.terms.put, tau, 0.0)

    def conversion_active(self, tau) -> np.ndarray:
        """Boolean mask: is conversion permitted at each tau."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        return self._in_window(self._conv_window, tau)

    def risky_cash_pv(self, tau: float, risky_rate: float) -> float:
        """PV at tau of all remaining contractual cash (coupons + nominal) at risky_rate.

        A coupon falling exactly on tau counts as already paid.
        """
        pv = self.nominal * np.exp(-risky_rate * (self.tau_maturity - tau))
        future = self.coupon_taus[self.coupon_taus > tau + _WINDOW_EPS]
        if future.size:
            pv += self.coupon_amount * np.exp(-risky_rate * (future - tau)).sum()
        return float(pv)


# ---------------------------------------------------------------------------
# Term-sheet file format (key/value JSON, ISO-8601 dates)
# ---------------------------------------------------------------------------

def terms_to_dict(terms: ConvertibleTerms) -> dict:
    """Serialize a term sheet to the plain key/value form used on disk."""
    out: dict = {
        "nominal": terms.nominal,
        "coupon_rate": terms.coupon.rate,
        "coupon_frequency": terms.coupon.frequency,
        "issue_date": terms.issue.isoformat(),
        "maturity_date": terms.maturity.isoformat(),
        "conversion": {
            "ratio": terms.conversion.ratio,
            "start": terms.conversion.start.isoformat(),
            "end": terms.conversion.end.isoformat(),
        },
    }
    if terms.call is not None:
        out["call"] = {
            "price": terms.call.price,
            "start": terms.call.start.isoformat(),
            "end": terms.call.end.isoformat(),
        }
    if terms.put is not None:
        out["put"] = {
            "price": terms.put.price,
            "start": terms.put.start.isoformat(),
            "end": terms.put.end.isoformat(),
        }
    out["day_count"] = terms.day_count.value
    return out


def terms_from_dict(data: dict) -> ConvertibleTerms:
    """Inverse of terms_to_dict; raises TermSheetError on malformed input."""
    try:
        issue = date.fromisoformat(data["issue_date"])
        maturity = date.fromisoformat(data["maturity_date"])
        conv = data["conversion"]
        conversion = ConversionTerms(
            ratio=float(conv["ratio"]),
            start=date.fromisoformat(conv["start"]),
            end=date.fromisoformat(conv["end"]),
        )
        call = None
        if "call" in data and data["call"] is not None:
            c = data["call"]
            call = CallTerms(
                price=float(c["price"]),
                start=date.fromisoformat(c["start"]),
                end=date.fromisoformat(c["end"]),
            )
        put = None
        if "put" in data and data["put"] is not None:
            p = data["put"]
            put = PutTerms(
                price=float(p["price"]),
                start=date.fromisoformat(p["start"]),
                end=date.fromisoformat(p["end"]),
            )
        coupon = CouponSchedule.generate(
            rate=float(data["coupon_rate"]),
            frequency=int(data["coupon_frequency"]),
            nominal=float(data["nominal"]),
            issue=issue,
            maturity=maturity,
        )
        return ConvertibleTerms(
            nominal=float(data["nominal"]),
            issue=issue,
            maturity=maturity,
            coupon=coupon,
            conversion=conversion,
            call=call,
            put=put,
            day_count=DayCount(data.get("day_count", "ACT_365")),
        )
    except (KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise TermSheetError(f"malformed term sheet: {exc}") from exc


def load_terms(path: str | Path) -> ConvertibleTerms:
    """Load a term sheet from a JSON file."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise TermSheetError(f"cannot read term sheet {path}: {exc}") from exc
    return terms_from_dict(data)


def dump_terms(terms: ConvertibleTerms, path: str | Path) -> None:
    """Write a term sheet as formatted JSON (round-trips losslessly)."""
    Path(path).write_text(json.dumps(terms_to_dict(terms), indent=2) + "\n")


# ---------------------------------------------------------------------------
# Reference instrument: 5y 4% semi-annual convertible, callable at 110 from
# year 2, conversion 1:1 over the whole life, act/365
# ---------------------------------------------------------------------------

def reference_terms_path() -> Path:
    """Location of the packaged reference term sheet."""
    return Path(__file__).parent / "data" / "tf_table1.json"


def reference_terms() -> ConvertibleTerms:
    """The reference convertible used throughout the docs, demos, and tests."""
    return load_terms(reference_terms_path())


def reference_market() -> MarketParams:
    """Flat market calibration that goes with the reference instrument."""
    return MarketParams(rate=0.05, credit_spread=0.02, sigma=0.30)
