"""Agent-level Monte Carlo of the two-population imitation process.

Independent of the analytic chain: it runs the microscopic pairwise-Fermi
updates with a small explicit mutation rate and records which monomorphic
state the populations sit near.  Only the payoff tables are shared with
:mod:`regmarket.model`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numba
import numpy as np

from . import egt
from .model import (
    CompanyStrategy,
    IncentiveScheme,
    ModelParams,
    ModelVariant,
    RegulatorStrategy,
    firm_payoff_vs,
    regulator_payoff,
)

RNG_ALGORITHM = "numba-MT19937"

_REGS = (RegulatorStrategy.HQ, RegulatorStrategy.LQ)
_FIRMS = (CompanyStrategy.AS, CompanyStrategy.AU, CompanyStrategy.VS)
_REG_POP, _FIRM_POP = 0, 1


@dataclass(frozen=True)
class SimConfig:
    mutation_rate: float = 1e-3
    steps: int = 10_000_000
    burn_in: int = 100_000
    seed: int = 0
    report_every: int = 0

    def __post_init__(self):
        if not 0.0 < self.mutation_rate < 1.0:
            raise ValueError(f"mutation_rate must lie in (0, 1), got {self.mutation_rate}")
        for name in ("steps", "burn_in", "report_every", "seed"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.steps < 1:
            raise ValueError("steps must be positive")
        if self.burn_in >= self.steps:
            raise ValueError(f"burn_in ({self.burn_in}) must be below steps ({self.steps})")
        if self.seed >= 2**64:
            raise ValueError("seed must fit in 64 bits")


@dataclass(frozen=True)
class OccupancyReport:
    occupancy: dict
    unclassified_fraction: float
    non_monomorphic_fraction: float
    steps: int
    seed: int
    rng: str = RNG_ALGORITHM
    replicas: int = 1
    counts: tuple = field(default=(), repr=False)
    trace: list = field(default_factory=list, repr=False)

    def vector(self, states=egt.STATES) -> np.ndarray:
        return np.array([self.occupancy[st] for st in states])


def _kernel_seed(seed: int) -> int:
    # Fold a 64-bit seed into the 32-bit range the kernel generator accepts.
    return int(np.random.SeedSequence(seed).generate_state(1, dtype=np.uint32)[0])


def payoff_tables(params: ModelParams, variant: ModelVariant, scheme: IncentiveScheme):
    """Firm table ``[reg, own, opp]`` and regulator table ``[reg, firm]``."""
    firm = np.array(
        [[[firm_payoff_vs(params, variant, a, b, r) for b in _FIRMS] for a in _FIRMS] for r in _REGS]
    )
    reg = np.array([[regulator_payoff(params, scheme, r, f) for f in _FIRMS] for r in _REGS])
    return firm, reg


@numba.njit(cache=True)
def _draw(counts, total):
    # Index of the strategy held by a uniformly chosen individual.
    u = np.random.random() * total
    acc = 0.0
    for i in range(counts.shape[0]):
        acc += counts[i]
        if u < acc:
            return i
    return counts.shape[0] - 1


@numba.njit(cache=True)
def _firm_payoff(a, firm_counts, reg_counts, firm_tab, z_ai, z_reg):
    total = 0.0
    for r in range(2):
        xr = reg_counts[r] / z_reg
        if xr == 0.0:
            continue
        acc = 0.0
        for b in range(3):
            nb = firm_counts[b] - (1 if b == a else 0)
            acc += nb * firm_tab[r, a, b]
        total += xr * acc / (z_ai - 1)
    return total


@numba.njit(cache=True)
def _reg_payoff(r, firm_counts, reg_tab, z_ai):
    acc = 0.0
    for f in range(3):
        acc += firm_counts[f] * reg_tab[r, f]
    return acc / z_ai


@numba.njit(cache=True)
def _update(pop, reg_counts, firm_counts, firm_tab, reg_tab, beta, mu, z_reg, z_ai):
    """One microstep in population ``pop``.  Returns True if a strategy changed."""
    if pop == 0:
        counts, z, n_strat = reg_counts, z_reg, 2
    else:
        counts, z, n_strat = firm_counts, z_ai, 3
    focal = _draw(counts, z)
    # Each alternative strategy is reached at rate mu, as in the embedded chain.
    if np.random.random() < mu * (n_strat - 1):
        new = int(np.random.random() * (n_strat - 1))
        if new >= n_strat - 1:
            new = n_strat - 2
        if new >= focal:
            new += 1
        counts[focal] -= 1
        counts[new] += 1
        return True
    counts[focal] -= 1
    model = _draw(counts, z - 1)
    counts[focal] += 1
    if model == focal:
        return False
    if pop == 0:
        gap = _reg_payoff(model, firm_counts, reg_tab, z_ai) - _reg_payoff(
            focal, firm_counts, reg_tab, z_ai
        )
    else:
        gap = _firm_payoff(model, firm_counts, reg_counts, firm_tab, z_ai, z_reg) - _firm_payoff(
            focal, firm_counts, reg_counts, firm_tab, z_ai, z_reg
        )
    if np.random.random() < 1.0 / (1.0 + math.exp(-beta * gap)):
        counts[focal] -= 1
        counts[model] += 1
        return True
    return False


@numba.njit(cache=True)
def _majority(counts, z):
    for i in range(counts.shape[0]):
        if 2 * counts[i] > z:
            return i
    return -1


@numba.njit(cache=True)
def _run(seed, reg_counts, firm_counts, firm_tab, reg_tab, beta, mu, z_reg, z_ai,
         steps, burn_in, report_every):
    np.random.seed(seed)
    occ = np.zeros(6, dtype=np.int64)
    unclassified = 0
    mixed = 0
    n_reports = steps // report_every if report_every > 0 else 0
    trace = np.zeros((n_reports, 6), dtype=np.int64)
    ri = 0
    for t in range(steps):
        pop = 0 if np.random.random() < 0.5 else 1
        _update(pop, reg_counts, firm_counts, firm_tab, reg_tab, beta, mu, z_reg, z_ai)
        if t >= burn_in:
            r = _majority(reg_counts, z_reg)
            f = _majority(firm_counts, z_ai)
            if r < 0 or f < 0:
                unclassified += 1
            else:
                occ[3 * r + f] += 1
            if reg_counts.max() < z_reg or firm_counts.max() < z_ai:
                mixed += 1
        if report_every > 0 and (t + 1) % report_every == 0 and ri < n_reports:
            trace[ri, :] = occ
            ri += 1
    return occ, unclassified, mixed, trace


def simulate(
    params: ModelParams,
    variant: ModelVariant,
    scheme: IncentiveScheme,
    cfg: SimConfig,
    beta: float | None = None,
    initial: egt.MarketState | None = None,
) -> OccupancyReport:
    """Run the imitation process with mutation and report state occupancy.

    Each step picks a population with equal probability and a focal
    individual within it.  The focal switches to each other strategy of
    its population with probability ``cfg.mutation_rate``; otherwise it
    copies a distinct random role model with the Fermi probability of
    their expected-payoff gap.  Payoffs are exact expectations against
    the current composition of both populations.  Steps before
    ``cfg.burn_in`` are not counted.  ``beta`` overrides ``params.beta``
    for the simulation only.
    """
    scheme = IncentiveScheme.parse(scheme)
    beta = params.beta if beta is None else float(beta)
    firm_tab, reg_tab = payoff_tables(params, variant, scheme)
    initial = initial or egt.MarketState(RegulatorStrategy.LQ, CompanyStrategy.AU)
    reg_counts = np.zeros(2, dtype=np.int64)
    firm_counts = np.zeros(3, dtype=np.int64)
    reg_counts[_REGS.index(initial.reg)] = params.z_reg
    firm_counts[_FIRMS.index(initial.firm)] = params.z_ai
    occ, unclassified, mixed, trace = _run(
        _kernel_seed(cfg.seed), reg_counts, firm_counts, firm_tab, reg_tab, beta,
        cfg.mutation_rate, params.z_reg, params.z_ai, cfg.steps, cfg.burn_in, cfg.report_every,
    )
    counted = cfg.steps - cfg.burn_in
    classified = int(occ.sum())
    if classified == 0:
        raise ArithmeticError("no step had a strict majority in both populations")
    occupancy = {st: occ[i] / classified for i, st in enumerate(egt.STATES)}
    return OccupancyReport(
        occupancy=occupancy,
        unclassified_fraction=unclassified / counted,
        non_monomorphic_fraction=mixed / counted,
        steps=cfg.steps,
        seed=cfg.seed,
        counts=(tuple(int(c) for c in occ), int(unclassified), int(mixed), counted),
        trace=[row.copy() for row in trace],
    )


def replica_seeds(seed: int, replicas: int) -> list:
    children = np.random.SeedSequence(seed).spawn(replicas)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def simulate_replicas(
    params: ModelParams,
    variant: ModelVariant,
    scheme: IncentiveScheme,
    cfg: SimConfig,
    replicas: int = 1,
    beta: float | None = None,
    n_jobs: int = 1,
) -> OccupancyReport:
    """Pool the occupancy counts of independent replicas.

    Replica seeds are spawned from ``cfg.seed``; pooling happens in seed
    order, so the result does not depend on ``n_jobs``.
    """
    if replicas < 1:
        raise ValueError("replicas must be positive")
    if replicas == 1:
        return simulate(params, variant, scheme, cfg, beta=beta)
    cfgs = [replace(cfg, seed=s) for s in replica_seeds(cfg.seed, replicas)]
    if n_jobs == 1:
        reports = [simulate(params, variant, scheme, c, beta=beta) for c in cfgs]
    else:
        from joblib import Parallel, delayed

        reports = Parallel(n_jobs=n_jobs)(
            delayed(simulate)(params, variant, scheme, c, beta=beta) for c in cfgs
        )
    occ = np.sum([r.counts[0] for r in reports], axis=0)
    unclassified = sum(r.counts[1] for r in reports)
    mixed = sum(r.counts[2] for r in reports)
    counted = sum(r.counts[3] for r in reports)
    return OccupancyReport(
        occupancy={st: occ[i] / occ.sum() for i, st in enumerate(egt.STATES)},
        unclassified_fraction=unclassified / counted,
        non_monomorphic_fraction=mixed / counted,
        steps=cfg.steps * replicas,
        seed=cfg.seed,
        replicas=replicas,
        counts=(tuple(int(c) for c in occ), unclassified, mixed, counted),
    )


@numba.njit(cache=True)
def _fixation_trials(seed, pop, mutant, resident, reg_counts0, firm_counts0, firm_tab, reg_tab,
                     beta, z_reg, z_ai, trials):
    np.random.seed(seed)
    fixed = 0
    for _ in range(trials):
        reg_counts = reg_counts0.copy()
        firm_counts = firm_counts0.copy()
        counts = reg_counts if pop == 0 else firm_counts
        z = z_reg if pop == 0 else z_ai
        while 0 < counts[mutant] < z:
            _update(pop, reg_counts, firm_counts, firm_tab, reg_tab, beta, 0.0, z_reg, z_ai)
        if counts[mutant] == z:
            fixed += 1
    return fixed


def estimate_fixation(
    params: ModelParams,
    variant: ModelVariant,
    reg_context,
    mutant,
    resident,
    trials: int,
    seed: int,
    scheme: IncentiveScheme = IncentiveScheme.NONE,
) -> tuple:
    """Empirical fixation probability of a single mutant, with its standard error.

    For a firm mutant ``reg_context`` is the fixed regulator type; for a
    regulator mutant it is the fixed firm strategy.  Mutation is off and
    only the invaded population is updated (steps in the other one would
    be no-ops).
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    if mutant == resident:
        raise ValueError("mutant and resident strategies must differ")
    scheme = IncentiveScheme.parse(scheme)
    firm_tab, reg_tab = payoff_tables(params, variant, scheme)
    reg_counts = np.zeros(2, dtype=np.int64)
    firm_counts = np.zeros(3, dtype=np.int64)
    if isinstance(mutant, CompanyStrategy):
        pop = _FIRM_POP
        reg_counts[_REGS.index(reg_context)] = params.z_reg
        m, r = _FIRMS.index(mutant), _FIRMS.index(resident)
        firm_counts[m] = 1
        firm_counts[r] = params.z_ai - 1
    else:
        pop = _REG_POP
        firm_counts[_FIRMS.index(reg_context)] = params.z_ai
        m, r = _REGS.index(mutant), _REGS.index(resident)
        reg_counts[m] = 1
        reg_counts[r] = params.z_reg - 1
    fixed = _fixation_trials(
        _kernel_seed(seed), pop, m, r, reg_counts, firm_counts, firm_tab, reg_tab,
        params.beta, params.z_reg, params.z_ai, int(trials),
    )
    est = fixed / trials
    return est, math.sqrt(max(est * (1.0 - est), 1e-300) / trials)


def total_variation(a, b) -> float:
    return 0.5 * float(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)).sum())
