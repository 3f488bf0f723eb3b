"""Equilibrium, threshold and welfare analyses built on the rare-mutation chain."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import egt
from .model import (
    DEFAULT_VARIANT,
    Behavior,
    CompanyStrategy,
    IncentiveScheme,
    ModelParams,
    ModelVariant,
    RegulatorStrategy,
    WelfareConfig,
    behavior_payoff_table,
    detection_rate,
    effective_behavior,
    firm_payoff,
    incentive_paid,
    regulator_payoff,
)

BISECTION_TOL = 1e-12
SWEEPABLE = ("s", "p_r", "g", "p_h")


class Dominance(enum.Enum):
    SAFE = "Safe"
    UNSAFE = "Unsafe"
    TIE = "Tie"


class NoCrossing(ValueError):
    """The classification never changes over the searched interval."""


class SweepCellError(RuntimeError):
    def __init__(self, coords: dict, cause: Exception):
        self.coords = coords
        self.cause = cause
        where = ", ".join(f"{k}={v!r}" for k, v in coords.items())
        super().__init__(f"sweep cell ({where}) failed: {cause}")


def _compare(lhs: float, rhs: float) -> Dominance:
    if lhs > rhs:
        return Dominance.SAFE
    if lhs < rhs:
        return Dominance.UNSAFE
    return Dominance.TIE


def risk_dominant_behavior(params: ModelParams, variant: ModelVariant, q: float) -> Dominance:
    t = behavior_payoff_table(params, variant, q)
    S, U = Behavior.SAFE, Behavior.UNSAFE
    return _compare(t[S, S] + t[S, U], t[U, S] + t[U, U])


def socially_preferred_behavior(
    params: ModelParams, variant: ModelVariant, q: float
) -> Dominance:
    S, U = Behavior.SAFE, Behavior.UNSAFE
    return _compare(
        2.0 * firm_payoff(params, variant, S, S, q), 2.0 * firm_payoff(params, variant, U, U, q)
    )


def _bisect_p(classify, tol: float = BISECTION_TOL) -> float:
    lo, hi = 0.0, 1.0
    c_lo, c_hi = classify(lo), classify(hi)
    if c_lo is c_hi:
        raise NoCrossing(f"classification is {c_lo.value} over the whole interval")
    if c_lo is Dominance.TIE:
        return lo
    if c_hi is Dominance.TIE:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        c = classify(mid)
        if c is Dominance.TIE:
            return mid
        if c is c_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def rd_threshold_p(
    params: ModelParams, variant: ModelVariant, q: float, s: float | None = None
) -> float:
    """Survival probability ``p`` at which the risk-dominant behavior flips.

    Raises
    ------
    NoCrossing
        If one behavior is risk dominant for every ``p`` in ``[0, 1]``.
    """
    base = params if s is None else params.with_(s=s)
    return _bisect_p(
        lambda p: risk_dominant_behavior(base.with_(p_r=1.0 - p), variant, q)
    )


def social_threshold_p(
    params: ModelParams, variant: ModelVariant, q: float, s: float | None = None
) -> float:
    """Survival probability ``p`` at which society's preferred behavior flips."""
    base = params if s is None else params.with_(s=s)
    return _bisect_p(
        lambda p: socially_preferred_behavior(base.with_(p_r=1.0 - p), variant, q)
    )


def dilemma_zone(params: ModelParams, variant: ModelVariant = DEFAULT_VARIANT) -> bool:
    q = params.p_l
    return (
        socially_preferred_behavior(params, variant, q) is Dominance.SAFE
        and risk_dominant_behavior(params, variant, q) is Dominance.UNSAFE
    )


def firm_equilibrium(params: ModelParams, variant: ModelVariant, q: float) -> Behavior:
    """Behavior selected in the symmetric firm subgame at detection rate ``q``.

    Pure symmetric equilibria are found first; if both exist (or neither),
    risk dominance decides and a tie goes to Unsafe.
    """
    t = behavior_payoff_table(params, variant, q)
    S, U = Behavior.SAFE, Behavior.UNSAFE
    safe_ne = t[S, S] >= t[U, S]
    unsafe_ne = t[U, U] >= t[S, U]
    if safe_ne and not unsafe_ne:
        return S
    if unsafe_ne and not safe_ne:
        return U
    return S if risk_dominant_behavior(params, variant, q) is Dominance.SAFE else U


@dataclass(frozen=True)
class SpneOutcome:
    regulator_choice: RegulatorStrategy
    firm_response: dict
    regulator_payoffs: dict

    @property
    def firm_strategy(self) -> CompanyStrategy | None:
        """The firm strategy implied by the responses in both subgames."""
        hq = self.firm_response[RegulatorStrategy.HQ]
        lq = self.firm_response[RegulatorStrategy.LQ]
        if hq is lq:
            return hq
        if hq is CompanyStrategy.AS and lq is CompanyStrategy.AU:
            return CompanyStrategy.VS
        return None


def critical_vigilant_g(params: ModelParams) -> float:
    """Smallest Vigilant incentive that makes HQ the SPNE choice against VS firms."""
    return (params.r_l - params.r_h) / (1.0 - params.p_l**2)


def spne(
    params: ModelParams, variant: ModelVariant, scheme: IncentiveScheme
) -> SpneOutcome:
    scheme = IncentiveScheme.parse(scheme)
    response = {}
    payoffs = {}
    for reg in RegulatorStrategy:
        beh = firm_equilibrium(params, variant, detection_rate(params, reg))
        firms = CompanyStrategy.AS if beh is Behavior.SAFE else CompanyStrategy.AU
        response[reg] = firms
        payoffs[reg] = regulator_payoff(params, scheme, reg, firms)
    choice = (
        RegulatorStrategy.HQ
        if payoffs[RegulatorStrategy.HQ] > payoffs[RegulatorStrategy.LQ]
        else RegulatorStrategy.LQ
    )
    return SpneOutcome(choice, response, payoffs)


def is_unsafe_state(state: egt.MarketState) -> bool:
    return effective_behavior(state.firm, state.reg) is Behavior.UNSAFE


def state_welfare(
    params: ModelParams,
    variant: ModelVariant,
    wcfg: WelfareConfig,
    state: egt.MarketState,
    scheme: IncentiveScheme = IncentiveScheme.NONE,
) -> float:
    """Welfare of a monomorphic market state: both firms' payoffs less externalities."""
    q = detection_rate(params, state.reg)
    beh = effective_behavior(state.firm, state.reg)
    total = 2.0 * firm_payoff(params, variant, beh, beh, q)
    if wcfg.externality_scale and beh is Behavior.UNSAFE:
        harm = wcfg.externality_scale * params.s * params.prize
        total -= harm * 2.0 * (1.0 - q) * params.p_r
    if wcfg.include_regulator_surplus:
        total += regulator_payoff(params, scheme, state.reg, state.firm)
    if wcfg.include_government_cost:
        total -= incentive_paid(params, scheme, state.reg, state.firm)
    return total


def baseline_params(params: ModelParams) -> ModelParams:
    """The same world without a regulatory market: no incentive, no detection."""
    return params.with_(g=0.0, p_h=0.0, p_l=0.0)


def expected_welfare(
    params: ModelParams,
    variant: ModelVariant,
    wcfg: WelfareConfig,
    scheme: IncentiveScheme,
    stationary: egt.StationaryDistribution,
) -> float:
    return float(
        sum(
            stationary[st] * state_welfare(params, variant, wcfg, st, scheme)
            for st in stationary.labels
        )
    )


def baseline_welfare(params: ModelParams, variant: ModelVariant, wcfg: WelfareConfig) -> float:
    base = baseline_params(params)
    v = egt.stationary_distribution(base, variant, IncentiveScheme.NONE)
    return expected_welfare(base, variant, wcfg, IncentiveScheme.NONE, v)


def delta_welfare(
    params: ModelParams,
    variant: ModelVariant,
    wcfg: WelfareConfig,
    scheme: IncentiveScheme,
) -> float:
    scheme = IncentiveScheme.parse(scheme)
    v = egt.stationary_distribution(params, variant, scheme)
    return expected_welfare(params, variant, wcfg, scheme, v) - baseline_welfare(
        params, variant, wcfg
    )


@dataclass(frozen=True)
class CellResult:
    unsafe_frequency: float
    lq_frequency: float
    hq_frequency: float
    delta_welfare: float
    stationary: egt.StationaryDistribution

    def metric(self, name: str) -> float:
        return {
            "unsafe_freq": self.unsafe_frequency,
            "lq_freq": self.lq_frequency,
            "hq_freq": self.hq_frequency,
            "delta_welfare": self.delta_welfare,
        }[name]


METRICS = ("unsafe_freq", "lq_freq", "hq_freq", "delta_welfare")


def summarize(
    params: ModelParams,
    variant: ModelVariant,
    wcfg: WelfareConfig,
    scheme: IncentiveScheme,
    stationary: egt.StationaryDistribution,
    baseline: float | None = None,
) -> CellResult:
    labels = stationary.labels
    unsafe = float(sum(stationary[st] for st in labels if is_unsafe_state(st)))
    lq = float(sum(stationary[st] for st in labels if st.reg is RegulatorStrategy.LQ))
    if baseline is None:
        baseline = baseline_welfare(params, variant, wcfg)
    welfare = expected_welfare(params, variant, wcfg, scheme, stationary)
    return CellResult(unsafe, lq, 1.0 - lq, welfare - baseline, stationary)


def evaluate_cell(
    params: ModelParams,
    variant: ModelVariant = DEFAULT_VARIANT,
    wcfg: WelfareConfig = WelfareConfig(),
    scheme: IncentiveScheme = IncentiveScheme.VIGILANT,
) -> CellResult:
    """Full pipeline for one parameter point: chain, stationary vector, summaries."""
    scheme = IncentiveScheme.parse(scheme)
    v = egt.stationary_distribution(params, variant, scheme)
    return summarize(params, variant, wcfg, scheme, v)


GOVERNMENT_STATES = tuple(
    egt.MarketState(RegulatorStrategy.HQ, f) for f in CompanyStrategy
)


def government_variant(
    params: ModelParams,
    variant: ModelVariant = DEFAULT_VARIANT,
    wcfg: WelfareConfig = WelfareConfig(),
) -> CellResult:
    """A permanent high-quality government regulator in place of the market.

    Only the firm population evolves, over the three HQ states.  Welfare is
    measured against the same no-market baseline as the market cells.
    """
    P = egt.build_transition_matrix(params, variant, IncentiveScheme.NONE, GOVERNMENT_STATES)
    v = egt.gth_stationary(P)
    unsafe = float(sum(v[st] for st in v.labels if is_unsafe_state(st)))
    welfare = 0.0
    for st in v.labels:
        w = state_welfare(params, variant, wcfg, st, IncentiveScheme.NONE)
        if wcfg.include_government_cost:
            w -= params.g
        welfare += v[st] * w
    return CellResult(unsafe, 0.0, 1.0, welfare - baseline_welfare(params, variant, wcfg), v)


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if self.name not in SWEEPABLE:
            raise ValueError(f"axis must be one of {SWEEPABLE}, got {self.name!r}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"axis resolution must be a positive integer, got {self.n}")
        if self.hi < self.lo:
            raise ValueError(f"axis {self.name}: max {self.hi} is below min {self.lo}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def values(self) -> np.ndarray:
        """Cell-centre coordinates of the ``n`` equal-width cells on ``[lo, hi]``."""
        width = (self.hi - self.lo) / self.n
        return self.lo + (np.arange(self.n) + 0.5) * width


@dataclass
class SweepGrid:
    axis1: Axis
    axis2: Axis
    cells: list = field(repr=False)
    scheme: IncentiveScheme = IncentiveScheme.VIGILANT

    @property
    def shape(self) -> tuple:
        return (self.axis1.n, self.axis2.n)

    def metric(self, name: str) -> np.ndarray:
        return np.array([[cell.metric(name) for cell in row] for row in self.cells])

    def coords(self) -> Iterable:
        for i, x in enumerate(self.axis1.values):
            for j, y in enumerate(self.axis2.values):
                yield i, j, float(x), float(y)


def _cell_task(args):
    params, variant, wcfg, scheme, government, coords = args
    try:
        if government:
            return government_variant(params, variant, wcfg)
        return evaluate_cell(params, variant, wcfg, scheme)
    except Exception as exc:  # noqa: BLE001 - re-raised with coordinates
        raise SweepCellError(coords, exc) from exc


def sweep(
    base: ModelParams,
    variant: ModelVariant,
    wcfg: WelfareConfig,
    scheme: IncentiveScheme,
    axis1: Axis,
    axis2: Axis,
    n_jobs: int = 1,
    government: bool = False,
) -> SweepGrid:
    """Evaluate every cell of a two-parameter grid.

    Cells are independent; with ``n_jobs != 1`` they are farmed out through
    joblib and collected back into their fixed grid slots, so the result
    does not depend on scheduling.
    """
    scheme = IncentiveScheme.parse(scheme)
    if axis1.name == axis2.name:
        raise ValueError("the two sweep axes must differ")
    tasks = []
    for _, _, x, y in SweepGrid(axis1, axis2, []).coords():
        coords = {axis1.name: x, axis2.name: y}
        try:
            params = base.with_(**coords)
        except ValueError as exc:
            raise SweepCellError(coords, exc) from exc
        tasks.append((params, variant, wcfg, scheme, government, coords))
    if n_jobs == 1:
        flat = [_cell_task(t) for t in tasks]
    else:
        from joblib import Parallel, delayed

        flat = Parallel(n_jobs=n_jobs)(delayed(_cell_task)(t) for t in tasks)
    cells = [flat[i * axis2.n : (i + 1) * axis2.n] for i in range(axis1.n)]
    return SweepGrid(axis1, axis2, cells, scheme)


def expected_delta_welfare(
    base: ModelParams,
    variant: ModelVariant,
    wcfg: WelfareConfig,
    scheme: IncentiveScheme,
    region: Sequence[tuple],
    resolution: int | Sequence[int] = 41,
) -> float:
    """Mean delta welfare over a uniform grid on ``region``.

    ``region`` is a pair of ``(name, lo, hi)`` triples.
    """
    if isinstance(resolution, int):
        resolution = (resolution, resolution)
    (n1, lo1, hi1), (n2, lo2, hi2) = region
    grid = sweep(
        base,
        variant,
        wcfg,
        scheme,
        Axis(n1, lo1, hi1, resolution[0]),
        Axis(n2, lo2, hi2, resolution[1]),
    )
    return float(np.mean(grid.metric("delta_welfare")))


def dilemma_mask(grid: SweepGrid, base: ModelParams, variant: ModelVariant) -> np.ndarray:
    mask = np.zeros(grid.shape, dtype=bool)
    for i, j, x, y in grid.coords():
        mask[i, j] = dilemma_zone(base.with_(**{grid.axis1.name: x, grid.axis2.name: y}), variant)
    return mask


def calibrate_beta(payoff_sd: float, adoption_probability: float) -> float:
    """Selection strength at which a one-SD payoff edge is adopted with the given probability."""
    if not payoff_sd > 0:
        raise ValueError(f"payoff_sd must be positive, got {payoff_sd}")
    if not 0.5 < adoption_probability < 1.0:
        raise ValueError(
            f"adoption_probability must lie in (0.5, 1), got {adoption_probability}"
        )
    return math.log(adoption_probability / (1.0 - adoption_probability)) / payoff_sd
