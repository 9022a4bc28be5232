"""Market data, barrier contracts and monitoring policies.

All types are frozen dataclasses. ``validate`` collects every violated
invariant instead of stopping at the first one; pricing entry points call
``require_valid`` which raises :class:`~barrierfd.errors.ValidationError`.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

from .errors import ValidationError

DAYS_PER_YEAR = 250
WEEKS_PER_YEAR = 50
DAYS_PER_WEEK = 5


@dataclass(frozen=True)
class MarketParams:
    r: float
    q: float
    sigma: float

    @property
    def mu(self) -> float:
        """Risk-neutral drift r - q."""
        return self.r - self.q


class BarrierKind(str, Enum):
    DOWN_AND_OUT = "down"
    UP_AND_OUT = "up"
    DOUBLE_KNOCK_OUT = "double"


@dataclass(frozen=True)
class BarrierGeometry:
    kind: BarrierKind
    lower: Optional[float] = None
    upper: Optional[float] = None

    @classmethod
    def down_and_out(cls, barrier: float) -> "BarrierGeometry":
        return cls(BarrierKind.DOWN_AND_OUT, lower=barrier)

    @classmethod
    def up_and_out(cls, barrier: float) -> "BarrierGeometry":
        return cls(BarrierKind.UP_AND_OUT, upper=barrier)

    @classmethod
    def double_knock_out(cls, lower: float, upper: float) -> "BarrierGeometry":
        return cls(BarrierKind.DOUBLE_KNOCK_OUT, lower=lower, upper=upper)

    @property
    def barrier(self) -> float:
        """The single barrier level (down or up geometries only)."""
        if self.kind is BarrierKind.DOWN_AND_OUT:
            return self.lower
        if self.kind is BarrierKind.UP_AND_OUT:
            return self.upper
        raise AttributeError("double knock-out has two barriers; use lower/upper")

    @property
    def levels(self) -> tuple:
        return tuple(b for b in (self.lower, self.upper) if b is not None)


class Frequency(str, Enum):
    DAILY = "daily"
    WEEKLY = "weekly"
    COUNT = "count"


@dataclass(frozen=True)
class MonitoringPolicy:
    frequency: Optional[Frequency] = None
    count: Optional[int] = None

    @classmethod
    def continuous(cls) -> "MonitoringPolicy":
        return cls()

    @classmethod
    def daily(cls) -> "MonitoringPolicy":
        return cls(Frequency.DAILY)

    @classmethod
    def weekly(cls) -> "MonitoringPolicy":
        return cls(Frequency.WEEKLY)

    @classmethod
    def explicit(cls, n: int) -> "MonitoringPolicy":
        return cls(Frequency.COUNT, int(n))

    @classmethod
    def parse(cls, text: str) -> "MonitoringPolicy":
        """Parse ``continuous``, ``daily``, ``weekly`` or ``count:N``."""
        text = text.strip().lower()
        if text == "continuous":
            return cls.continuous()
        if text == "daily":
            return cls.daily()
        if text == "weekly":
            return cls.weekly()
        if text.startswith("count:"):
            return cls.explicit(int(text.split(":", 1)[1]))
        raise ValueError(f"unknown monitoring policy {text!r}")

    @property
    def is_discrete(self) -> bool:
        return self.frequency is not None

    def n_dates(self, T: float) -> int:
        """Number of monitoring dates in (0, T] under the 250-day year."""
        if self.frequency is Frequency.DAILY:
            return int(round(DAYS_PER_YEAR * T))
        if self.frequency is Frequency.WEEKLY:
            return int(round(WEEKS_PER_YEAR * T))
        if self.frequency is Frequency.COUNT:
            return self.count
        raise ValueError("continuous monitoring has no monitoring dates")

    def __str__(self) -> str:
        if self.frequency is None:
            return "continuous"
        if self.frequency is Frequency.COUNT:
            return f"count:{self.count}"
        return self.frequency.value


@dataclass(frozen=True)
class BarrierContract:
    K: float
    T: float
    S0: float
    geometry: BarrierGeometry
    rebate: float = 0.0
    monitoring: MonitoringPolicy = field(default_factory=MonitoringPolicy.continuous)

    @property
    def kind(self) -> BarrierKind:
        return self.geometry.kind

    def with_spot(self, S0: float) -> "BarrierContract":
        return BarrierContract(self.K, self.T, S0, self.geometry, self.rebate, self.monitoring)


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _finite(x) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def validate(contract: BarrierContract, market: MarketParams) -> ValidationResult:
    """Check every economic invariant; never raises."""
    v = []
    if not (_finite(market.sigma) and market.sigma > 0):
        v.append("sigma must be positive")
    if not _finite(market.r):
        v.append("r must be finite")
    if not _finite(market.q):
        v.append("q must be finite")
    if not (_finite(contract.K) and contract.K > 0):
        v.append("K must be positive")
    if not (_finite(contract.T) and contract.T > 0):
        v.append("T must be positive")
    if not (_finite(contract.S0) and contract.S0 > 0):
        v.append("S0 must be positive")
    if not (_finite(contract.rebate) and contract.rebate >= 0):
        v.append("rebate must be nonnegative")

    geo = contract.geometry
    levels_ok = True
    for name, level in (("B_l" if geo.kind is BarrierKind.DOUBLE_KNOCK_OUT else "B", geo.lower),
                        ("B_u" if geo.kind is BarrierKind.DOUBLE_KNOCK_OUT else "B", geo.upper)):
        if level is None:
            continue
        if not (_finite(level) and level > 0):
            v.append(f"{name} must be positive")
            levels_ok = False
    if geo.kind is BarrierKind.DOWN_AND_OUT and geo.lower is None:
        v.append("down-and-out requires a barrier")
        levels_ok = False
    if geo.kind is BarrierKind.UP_AND_OUT and geo.upper is None:
        v.append("up-and-out requires a barrier")
        levels_ok = False
    if geo.kind is BarrierKind.DOUBLE_KNOCK_OUT:
        if geo.lower is None or geo.upper is None:
            v.append("double knock-out requires both barriers")
            levels_ok = False
        elif levels_ok and not geo.lower < geo.upper:
            v.append("B_l < B_u required")
            levels_ok = False

    mon = contract.monitoring
    if mon.is_discrete:
        if mon.frequency is Frequency.COUNT and (mon.count is None or mon.count < 1):
            v.append("monitoring count must be at least 1")
        elif _finite(contract.T) and contract.T > 0 and mon.n_dates(contract.T) < 1:
            v.append("expiry too short for at least one monitoring date")
    elif levels_ok and _finite(contract.S0):
        S0 = contract.S0
        if geo.kind is BarrierKind.DOWN_AND_OUT and not S0 > geo.lower:
            v.append("S0 must exceed B")
        elif geo.kind is BarrierKind.UP_AND_OUT and not S0 < geo.upper:
            v.append("S0 must be below B")
        elif geo.kind is BarrierKind.DOUBLE_KNOCK_OUT and not geo.lower < S0 < geo.upper:
            v.append("B_l < S0 < B_u required")
    return ValidationResult(tuple(v))


def require_valid(contract: BarrierContract, market: MarketParams) -> None:
    result = validate(contract, market)
    if not result.ok:
        raise ValidationError(result.violations)


CONFIG_KEYS = (
    "strike", "expiry", "s0", "barrier_type", "barrier", "barrier_low",
    "barrier_high", "rebate", "monitoring", "r", "q", "sigma",
)


def parse_config(text: str) -> dict:
    """Parse ``key = value`` lines (``#`` comments allowed) into a dict."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.read_string("[contract]\n" + text)
    return dict(parser["contract"])


def contract_from_mapping(values: dict) -> tuple[BarrierContract, MarketParams]:
    """Build a contract and market from configuration keys.

    ``barrier_type`` is one of ``down``, ``up`` or ``double``; single barriers
    read ``barrier``, double barriers read ``barrier_low`` and ``barrier_high``.
    """
    unknown = set(values) - set(CONFIG_KEYS) - {"delta"}
    if unknown:
        raise ValueError(f"unknown configuration keys: {sorted(unknown)}")
    try:
        kind = BarrierKind(values.get("barrier_type", "down").strip().lower())
        if kind is BarrierKind.DOUBLE_KNOCK_OUT:
            geometry = BarrierGeometry.double_knock_out(
                float(values["barrier_low"]), float(values["barrier_high"]))
        elif kind is BarrierKind.DOWN_AND_OUT:
            geometry = BarrierGeometry.down_and_out(float(values["barrier"]))
        else:
            geometry = BarrierGeometry.up_and_out(float(values["barrier"]))
        contract = BarrierContract(
            K=float(values["strike"]),
            T=float(values["expiry"]),
            S0=float(values["s0"]),
            geometry=geometry,
            rebate=float(values.get("rebate", 0.0)),
            monitoring=MonitoringPolicy.parse(values.get("monitoring", "continuous")),
        )
        market = MarketParams(
            r=float(values["r"]), q=float(values.get("q", 0.0)), sigma=float(values["sigma"]))
    except KeyError as exc:
        raise ValueError(f"missing configuration key {exc.args[0]!r}") from None
    return contract, market


def load_config(path) -> tuple[BarrierContract, MarketParams, dict]:
    """Load a contract file. Returns (contract, market, raw key/value dict)."""
    values = parse_config(Path(path).read_text())
    contract, market = contract_from_mapping(values)
    return contract, market, values
