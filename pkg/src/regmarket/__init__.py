"""Evolutionary model of regulatory markets for AI.

Firms choose how safely to develop AI, regulators choose whether to invest
in detection, and both populations learn by imitation.  The package
computes the long-run behavior of that system under different government
incentive schemes.
"""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    Behavior,
    CompanyStrategy,
    IncentiveScheme,
    ModelParams,
    ModelVariant,
    RegulatorStrategy,
    WelfareConfig,
)
from .estimator import RegulatoryMarket  # noqa: E402

__all__ = [
    "Behavior",
    "CompanyStrategy",
    "IncentiveScheme",
    "ModelParams",
    "ModelVariant",
    "RegulatorStrategy",
    "RegulatoryMarket",
    "WelfareConfig",
]
