"""High-order finite difference pricing of knock-out barrier calls.

Continuously monitored contracts are solved on a domain truncated at the
probability cutoff with exact vanilla data on the far edge; discretely
monitored contracts use knock-out projection at the monitoring dates.
"""

from .analytic import (double_knock_out_call, down_and_in_call, down_and_out_call, up_and_in_call,
                       up_and_out_call, vanilla_call)
from .boundary import CutoffConfig, DoubleClass, classify_double, cutoff
from .contracts import (BarrierContract, BarrierGeometry, BarrierKind, MarketParams, MonitoringPolicy,
                        load_config, validate)
from .discrete import price_discrete, schedule
from .engine import PriceReport, ThetaPolicy, price_continuous
from .errors import (AdmissibilityError, DomainError, GeometryError, NumericalError, PricingError,
                     StabilityError, ValidationError)
from .harness import price_with_scheme, run_table
from .schemes import ExplicitConfig, SMax, error_profile, price_habis, price_mefd, price_obes

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError", "BarrierContract", "BarrierGeometry", "BarrierKind", "CutoffConfig",
    "DomainError", "DoubleClass", "ExplicitConfig", "GeometryError", "MarketParams",
    "MonitoringPolicy", "NumericalError", "PriceReport", "PricingError", "SMax", "StabilityError",
    "ThetaPolicy", "ValidationError", "classify_double", "cutoff", "double_knock_out_call",
    "down_and_in_call", "down_and_out_call", "error_profile", "load_config", "price_continuous",
    "price_discrete", "price_habis", "price_mefd", "price_obes", "price_with_scheme", "run_table",
    "schedule", "up_and_in_call", "up_and_out_call", "validate", "vanilla_call",
]
