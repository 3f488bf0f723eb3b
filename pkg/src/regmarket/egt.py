"""Pairwise-comparison dynamics in the rare-mutation limit.

A mutant appears in one population at a time and either fixes or goes
extinct before the next mutation, so the joint system only visits the six
monomorphic ``(regulator, firm)`` states.  Transitions between them are
weighted by fixation probabilities and the long-run frequencies are the
stationary vector of that chain.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import (
    CompanyStrategy,
    IncentiveScheme,
    ModelParams,
    ModelVariant,
    RegulatorStrategy,
    firm_population_payoffs,
    regulator_fitness_diff,
)

# Double-precision tolerances shared by the solvers and the tests.
ARITHMETIC_TOL = 1e-12
STATIONARY_TOL = 1e-10
STOCHASTIC_TOL = 1e-9


class ReducibleChainError(ArithmeticError):
    """Raised when state elimination meets a state that cannot be left."""


@dataclass(frozen=True)
class MarketState:
    reg: RegulatorStrategy
    firm: CompanyStrategy

    @property
    def label(self) -> str:
        return f"{self.reg.value}-{self.firm.value}"

    @property
    def index(self) -> int:
        return STATES.index(self)

    @classmethod
    def from_index(cls, i: int) -> "MarketState":
        return STATES[i]

    @classmethod
    def from_label(cls, label: str) -> "MarketState":
        reg, firm = label.split("-")
        return cls(RegulatorStrategy(reg), CompanyStrategy(firm))

    def __str__(self):
        return self.label


STATES: tuple = tuple(
    MarketState(r, f)
    for r in (RegulatorStrategy.HQ, RegulatorStrategy.LQ)
    for f in (CompanyStrategy.AS, CompanyStrategy.AU, CompanyStrategy.VS)
)


def _position(labels: tuple, key) -> int:
    """Index of ``key`` in ``labels``; states may also be given by their text label."""
    if key in labels:
        return labels.index(key)
    for i, lab in enumerate(labels):
        if str(lab) == key:
            return i
    raise KeyError(key)


@dataclass(frozen=True)
class TransitionMatrix:
    matrix: np.ndarray
    labels: tuple

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != len(self.labels):
            raise ValueError("transition matrix must be square and match its labels")
        object.__setattr__(self, "matrix", m)

    def __getitem__(self, key):
        return self.matrix[key]

    def entry(self, src, dst) -> float:
        return float(self.matrix[_position(self.labels, src), _position(self.labels, dst)])


@dataclass(frozen=True)
class StationaryDistribution:
    vector: np.ndarray
    labels: tuple

    def __getitem__(self, state) -> float:
        return float(self.vector[_position(self.labels, state)])

    def as_dict(self) -> dict:
        return {str(lab): float(v) for lab, v in zip(self.labels, self.vector)}

    def argmax(self):
        return self.labels[int(np.argmax(self.vector))]


def _log_sum_exp(x: np.ndarray) -> float:
    top = x.max()
    return float(top + np.log(np.exp(x - top).sum()))


def fixation_probability(fitness_diff, z: int, beta: float) -> float:
    """Probability that one mutant takes over a population of size ``z``.

    Parameters
    ----------
    fitness_diff : callable or array_like
        ``f(k)`` = mutant payoff minus resident payoff with ``k`` mutants,
        for ``k = 1 .. z-1``.  Either a callable accepting an integer array
        or the precomputed values of length ``z - 1``.
    z : int
        Population size, at least 2.
    beta : float
        Selection strength, non-negative.

    Notes
    -----
    ``rho = 1 / (1 + sum_j exp(-beta * sum_{k<=j} f(k)))``.  The outer sum
    is accumulated with log-sum-exp so large ``beta * f`` cannot overflow.
    Positive fitness advantages give ``rho > 1/z``.
    """
    z = int(z)
    if z < 2:
        raise ValueError(f"population size must be >= 2, got {z}")
    if not beta >= 0:
        raise ValueError(f"beta must be non-negative, got {beta}")
    if callable(fitness_diff):
        f = np.asarray(fitness_diff(np.arange(1, z)), dtype=float)
        if f.ndim == 0:
            f = np.full(z - 1, float(f))
    else:
        f = np.asarray(fitness_diff, dtype=float)
    if f.shape != (z - 1,):
        raise ValueError(f"fitness differences must have length {z - 1}, got {f.shape}")
    if beta == 0:
        return 1.0 / z
    # log of each term 1, e^{-beta F_1}, ..., e^{-beta F_{z-1}}
    log_terms = np.concatenate(([0.0], -beta * np.cumsum(f)))
    return float(np.exp(-_log_sum_exp(log_terms)))


def constant_fixation(delta: float, z: int, beta: float) -> float:
    """Closed form of :func:`fixation_probability` for a constant advantage."""
    x = beta * delta
    if x == 0:
        return 1.0 / z
    if x > 0:
        return float(np.expm1(-x) / np.expm1(-x * z))
    y = -x
    return float(np.exp(y - y * z) * np.expm1(-y) / np.expm1(-y * z))


def firm_fitness_diff(
    params: ModelParams,
    variant: ModelVariant,
    reg: RegulatorStrategy,
    mutant: CompanyStrategy,
    resident: CompanyStrategy,
) -> np.ndarray:
    k = np.arange(1, params.z_ai)
    pi_m, pi_r = firm_population_payoffs(params, variant, reg, mutant, resident, k)
    return pi_m - pi_r


def firm_fixation(
    params: ModelParams,
    variant: ModelVariant,
    reg: RegulatorStrategy,
    mutant: CompanyStrategy,
    resident: CompanyStrategy,
    beta: float | None = None,
) -> float:
    beta = params.beta if beta is None else beta
    f = firm_fitness_diff(params, variant, reg, mutant, resident)
    return fixation_probability(f, params.z_ai, beta)


def regulator_fixation(
    params: ModelParams,
    scheme: IncentiveScheme,
    firms: CompanyStrategy,
    mutant: RegulatorStrategy,
    resident: RegulatorStrategy,
    beta: float | None = None,
) -> float:
    if mutant is resident:
        raise ValueError("mutant and resident strategies must differ")
    beta = params.beta if beta is None else beta
    delta = regulator_fitness_diff(params, scheme, firms)
    if mutant is RegulatorStrategy.LQ:
        delta = -delta
    return fixation_probability(np.full(params.z_reg - 1, delta), params.z_reg, beta)


def build_transition_matrix(
    params: ModelParams,
    variant: ModelVariant,
    scheme: IncentiveScheme,
    states: Sequence[MarketState] = STATES,
) -> TransitionMatrix:
    """Embedded chain over monomorphic states.

    Off-diagonal entries between states that differ in one population are
    ``rho / (S - 1)``; the remaining mass sits on the diagonal.
    """
    scheme = IncentiveScheme.parse(scheme)
    n = len(states)
    P = np.zeros((n, n))
    for i, src in enumerate(states):
        for j, dst in enumerate(states):
            if i == j:
                continue
            if src.reg is dst.reg and src.firm is not dst.firm:
                rho = firm_fixation(params, variant, src.reg, dst.firm, src.firm)
            elif src.firm is dst.firm and src.reg is not dst.reg:
                rho = regulator_fixation(params, scheme, src.firm, dst.reg, src.reg)
            else:
                continue
            P[i, j] = rho / (n - 1)
        P[i, i] = 1.0 - P[i].sum()
    return TransitionMatrix(P, tuple(states))


def _as_array(P) -> tuple:
    if isinstance(P, TransitionMatrix):
        return P.matrix, P.labels
    m = np.asarray(P, dtype=float)
    return m, tuple(range(m.shape[0]))


def check_stochastic(P: np.ndarray, tol: float = STOCHASTIC_TOL) -> None:
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError(f"transition matrix must be square, got shape {P.shape}")
    if np.any(P < -tol):
        raise ValueError("transition matrix has negative entries")
    rows = P.sum(axis=1)
    bad = np.flatnonzero(np.abs(rows - 1.0) > tol)
    if bad.size:
        raise ValueError(f"rows {bad.tolist()} do not sum to 1 (sums {rows[bad].tolist()})")


def gth_stationary(P) -> StationaryDistribution:
    """Stationary vector by Grassmann-Taksar-Heyman state elimination.

    States are folded away from the last one down; each pivot's exit mass
    is computed as a sum of off-diagonal entries rather than ``1 - P_kk``,
    so no cancellation occurs.  Back substitution then rebuilds the
    unnormalised vector.

    Raises
    ------
    ValueError
        If a row is not stochastic to within ``STOCHASTIC_TOL``.
    ReducibleChainError
        If a pivot's exit mass underflows to zero.
    """
    m, labels = _as_array(P)
    check_stochastic(m)
    A = m.copy()
    n = A.shape[0]
    for k in range(n - 1, 0, -1):
        exit_mass = A[k, :k].sum()
        if not exit_mass > 0:
            raise ReducibleChainError(f"state {labels[k]} cannot reach lower-indexed states")
        A[:k, k] /= exit_mass
        A[:k, :k] += np.outer(A[:k, k], A[k, :k])
    v = np.zeros(n)
    v[0] = 1.0
    for k in range(1, n):
        v[k] = v[:k] @ A[:k, k]
    v /= v.sum()
    return StationaryDistribution(v, labels)


def power_iteration_stationary(P, tol: float = 1e-15, max_iter: int = 1_000_000) -> np.ndarray:
    """Left Perron vector by repeated multiplication; an independent check on GTH."""
    m, _ = _as_array(P)
    n = m.shape[0]
    # Averaging with the identity removes periodicity without moving the fixed point.
    lazy = 0.5 * (m + np.eye(n))
    v = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = v @ lazy
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - v)) < tol:
            return nxt
        v = nxt
    raise ArithmeticError("power iteration did not converge")


def stationary_distribution(
    params: ModelParams, variant: ModelVariant, scheme: IncentiveScheme
) -> StationaryDistribution:
    return gth_stationary(build_transition_matrix(params, variant, scheme))


def birth_death_fixation(fitness_diff: np.ndarray, z: int, beta: float) -> float:
    """Absorption probability of the pairwise-Fermi birth-death chain.

    Solves the linear hitting equations directly instead of using the
    product formula, so it can serve as an oracle for
    :func:`fixation_probability`.
    """
    f = np.asarray(fitness_diff, dtype=float)
    fermi_up = 1.0 / (1.0 + np.exp(-beta * f))
    fermi_down = 1.0 / (1.0 + np.exp(beta * f))
    k = np.arange(1, z)
    meet = k * (z - k) / (z * (z - 1.0))
    up = meet * fermi_up
    down = meet * fermi_down
    # x_k = down_k x_{k-1} + up_k x_{k+1} + (1 - up_k - down_k) x_k, x_0 = 0, x_z = 1
    A = np.zeros((z - 1, z - 1))
    rhs = np.zeros(z - 1)
    for i in range(z - 1):
        A[i, i] = up[i] + down[i]
        if i > 0:
            A[i, i - 1] = -down[i]
        if i < z - 2:
            A[i, i + 1] = -up[i]
        else:
            rhs[i] = up[i]
    return float(np.linalg.solve(A, rhs)[0])
