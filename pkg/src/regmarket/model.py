"""Parameters and per-interaction payoffs for firms and regulators."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace


class CompanyStrategy(enum.Enum):
    AS = "AS"  # always safe
    AU = "AU"  # always unsafe
    VS = "VS"  # safe only when the regulator is high quality


class RegulatorStrategy(enum.Enum):
    HQ = "HQ"
    LQ = "LQ"


class Behavior(enum.Enum):
    SAFE = "Safe"
    UNSAFE = "Unsafe"


class IncentiveScheme(enum.Enum):
    NONE = "None"
    FLAT = "Flat"
    BOUNTY = "Bounty"
    VIGILANT = "Vigilant"

    @classmethod
    def parse(cls, value: "IncentiveScheme | str") -> "IncentiveScheme":
        if isinstance(value, cls):
            return value
        for member in cls:
            if member.value.lower() == str(value).lower():
                return member
        raise ValueError(f"unknown incentive scheme {value!r}")


class RiskModel(enum.Enum):
    INDIVIDUAL = "Individual"
    COLLECTIVE = "Collective"


class CatchupDenominator(enum.Enum):
    ONE = "One"  # phi / (phi + 1)
    S = "S"  # phi / (phi + s)


def _parse_enum(enum_cls, value):
    if isinstance(value, enum_cls):
        return value
    for member in enum_cls:
        if member.value.lower() == str(value).lower() or member.name.lower() == str(value).lower():
            return member
    raise ValueError(f"unknown {enum_cls.__name__} {value!r}")


@dataclass(frozen=True)
class ModelParams:
    """All model parameters with their validity ranges.

    The survival probability ``p = 1 - p_r`` is exposed as a property and
    never stored.  Construction raises ``ValueError`` when any range
    constraint is violated.
    """

    b: float = 4.0
    big_b: float = 100.0
    w: float = 1.0
    c: float = 1.0
    s: float = 1.5
    p_r: float = 0.6
    p_l: float = 0.0
    p_h: float = 0.6
    phi: float = 0.5
    g: float = 1.2
    r_l: float = 0.0
    r_h: float = -1.0
    beta: float = 0.02
    z_reg: int = 50
    z_ai: int = 50

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.type in ("int",):
                if isinstance(value, bool) or int(value) != value:
                    raise ValueError(f"{f.name} must be an integer, got {value!r}")
                object.__setattr__(self, f.name, int(value))
            else:
                value = float(value)
                if not math.isfinite(value):
                    raise ValueError(f"{f.name} must be finite, got {value!r}")
                object.__setattr__(self, f.name, value)

        def check(cond, msg):
            if not cond:
                raise ValueError(msg)

        check(self.b >= 0, f"b must be >= 0, got {self.b}")
        check(self.big_b > 0, f"big_b must be > 0, got {self.big_b}")
        check(self.w > 0, f"w must be > 0, got {self.w}")
        check(self.c >= 0, f"c must be >= 0, got {self.c}")
        check(self.s >= 1, f"s must be >= 1, got {self.s}")
        for name in ("p_r", "p_l", "p_h", "phi"):
            v = getattr(self, name)
            check(0.0 <= v <= 1.0, f"{name} must lie in [0, 1], got {v}")
        check(self.p_h >= self.p_l, f"p_h ({self.p_h}) must be >= p_l ({self.p_l})")
        check(self.g >= 0, f"g must be >= 0, got {self.g}")
        check(self.r_h <= self.r_l, f"r_h ({self.r_h}) must be <= r_l ({self.r_l})")
        check(self.beta >= 0, f"beta must be >= 0, got {self.beta}")
        check(self.z_reg >= 2, f"z_reg must be >= 2, got {self.z_reg}")
        check(self.z_ai >= 2, f"z_ai must be >= 2, got {self.z_ai}")

    @property
    def p(self) -> float:
        """Probability that an unsafe firm avoids disaster."""
        return 1.0 - self.p_r

    @property
    def prize(self) -> float:
        """Prize rate ``B / W``."""
        return self.big_b / self.w

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class ModelVariant:
    """Switches between readings of the firm payoff table."""

    risk_model: RiskModel = RiskModel.INDIVIDUAL
    au_vs_as_speedup: bool = True
    catchup_denominator: CatchupDenominator = CatchupDenominator.ONE
    both_caught_full_punishment: bool = False

    def __post_init__(self):
        object.__setattr__(self, "risk_model", _parse_enum(RiskModel, self.risk_model))
        object.__setattr__(
            self, "catchup_denominator", _parse_enum(CatchupDenominator, self.catchup_denominator)
        )
        object.__setattr__(self, "au_vs_as_speedup", bool(self.au_vs_as_speedup))
        object.__setattr__(
            self, "both_caught_full_punishment", bool(self.both_caught_full_punishment)
        )


@dataclass(frozen=True)
class WelfareConfig:
    externality_scale: float = 0.0
    include_regulator_surplus: bool = False
    include_government_cost: bool = False

    def __post_init__(self):
        object.__setattr__(self, "externality_scale", float(self.externality_scale))
        if not self.externality_scale >= 0:
            raise ValueError(f"externality_scale must be >= 0, got {self.externality_scale}")


DEFAULT_VARIANT = ModelVariant()


def detection_rate(params: ModelParams, reg: RegulatorStrategy) -> float:
    return params.p_h if reg is RegulatorStrategy.HQ else params.p_l


def effective_behavior(strategy: CompanyStrategy, reg: RegulatorStrategy) -> Behavior:
    if strategy is CompanyStrategy.AS:
        return Behavior.SAFE
    if strategy is CompanyStrategy.AU:
        return Behavior.UNSAFE
    return Behavior.SAFE if reg is RegulatorStrategy.HQ else Behavior.UNSAFE


def firm_payoff(
    params: ModelParams,
    variant: ModelVariant,
    own: Behavior,
    opp: Behavior,
    q: float,
) -> float:
    """Payoff to a firm behaving ``own`` against a firm behaving ``opp``.

    Parameters
    ----------
    params, variant
        Model parameters and payoff-table reading.
    own, opp
        Effective behaviors of the focal firm and its opponent.
    q
        Probability the regulator catches an unsafe firm.

    Returns
    -------
    float
        Expected prize rate, net of the safety cost.  The short-term
        market value ``b`` is a constant shift and is left out.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"detection rate must lie in [0, 1], got {q}")
    prize = params.prize
    p = params.p
    if variant.catchup_denominator is CatchupDenominator.ONE:
        denom = params.phi + 1.0
    else:
        denom = params.phi + params.s
    catchup = params.phi / denom

    if own is Behavior.SAFE and opp is Behavior.SAFE:
        return prize / 2.0 - params.c
    if own is Behavior.SAFE:
        return q * (1.0 / denom) * prize - params.c
    if opp is Behavior.SAFE:
        sigma = params.s if variant.au_vs_as_speedup else 1.0
        return p * (1.0 - q) * sigma * prize + q * catchup * prize
    survive = p if variant.risk_model is RiskModel.INDIVIDUAL else p * p
    kappa = 0.0 if variant.both_caught_full_punishment else 1.0
    return (
        survive * (1.0 - q * q) * params.s * prize / 2.0
        + kappa * q * q * catchup * prize / 2.0
    )


def behavior_payoff_table(params: ModelParams, variant: ModelVariant, q: float) -> dict:
    """The 2x2 firm payoff table keyed by ``(own, opp)`` behaviors."""
    return {
        (own, opp): firm_payoff(params, variant, own, opp, q)
        for own in Behavior
        for opp in Behavior
    }


def firm_payoff_vs(
    params: ModelParams,
    variant: ModelVariant,
    own: CompanyStrategy,
    opp: CompanyStrategy,
    reg: RegulatorStrategy,
) -> float:
    return firm_payoff(
        params,
        variant,
        effective_behavior(own, reg),
        effective_behavior(opp, reg),
        detection_rate(params, reg),
    )


def incentive_paid(
    params: ModelParams,
    scheme: IncentiveScheme,
    reg: RegulatorStrategy,
    firms: CompanyStrategy,
) -> float:
    """Government transfer to a regulator of type ``reg`` overseeing ``firms``."""
    scheme = IncentiveScheme.parse(scheme)
    q = detection_rate(params, reg)
    unsafe = effective_behavior(firms, reg) is Behavior.UNSAFE
    if scheme is IncentiveScheme.NONE:
        return 0.0
    if scheme is IncentiveScheme.FLAT:
        return params.g
    if scheme is IncentiveScheme.BOUNTY:
        return params.g * q if unsafe else 0.0
    # Vigilant: the payment survives only if every unsafe firm in the pair is caught.
    return params.g * q * q if unsafe else params.g


def regulator_payoff(
    params: ModelParams,
    scheme: IncentiveScheme,
    reg: RegulatorStrategy,
    firms: CompanyStrategy,
) -> float:
    base = params.r_h if reg is RegulatorStrategy.HQ else params.r_l
    return base + incentive_paid(params, scheme, reg, firms)


def firm_population_payoffs(
    params: ModelParams,
    variant: ModelVariant,
    reg: RegulatorStrategy,
    mutant: CompanyStrategy,
    resident: CompanyStrategy,
    k,
):
    """Expected payoffs of mutant and resident firms when ``k`` firms are mutants.

    Matching is uniform over the other ``z_ai - 1`` firms.  ``k`` may be a
    scalar or an integer array; the result has the same shape.
    """
    import numpy as np

    if mutant is resident:
        raise ValueError("mutant and resident strategies must differ")
    z = params.z_ai
    k_arr = np.asarray(k)
    if np.any(k_arr < 1) or np.any(k_arr > z - 1):
        raise ValueError(f"k must lie in [1, {z - 1}], got {k}")
    mm = firm_payoff_vs(params, variant, mutant, mutant, reg)
    mr = firm_payoff_vs(params, variant, mutant, resident, reg)
    rm = firm_payoff_vs(params, variant, resident, mutant, reg)
    rr = firm_payoff_vs(params, variant, resident, resident, reg)
    pi_mutant = ((k_arr - 1) * mm + (z - k_arr) * mr) / (z - 1)
    pi_resident = (k_arr * rm + (z - k_arr - 1) * rr) / (z - 1)
    if np.ndim(k) == 0:
        return float(pi_mutant), float(pi_resident)
    return pi_mutant, pi_resident


def regulator_fitness_diff(
    params: ModelParams, scheme: IncentiveScheme, firms: CompanyStrategy
) -> float:
    """Payoff advantage of HQ over LQ regulators facing ``firms``."""
    return regulator_payoff(params, scheme, RegulatorStrategy.HQ, firms) - regulator_payoff(
        params, scheme, RegulatorStrategy.LQ, firms
    )
