"""Developer effort: cost and data-size families, hidden-action optimum, moral hazard.

Under the symmetric operating point both error rates equal
``p(a) = Q(D * h(a))``. A risk-neutral developer who keeps a share
``1 - rho`` of the loss minimises ``c(a) + p(a) * lbar`` with
``lbar = (1 - rho) * D_AI * (l_FP + l_FN)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

from .errors import DomainError, ValidationError
from .mathkernel import Tolerance, find_root, gaussian_q, normal_pdf
from .roc import RocModel, fair_threshold_errors


class EffortFunction(Protocol):
    def value(self, a: float) -> float: ...

    def derivative(self, a: float) -> float: ...


@dataclass(frozen=True)
class QuadraticCost:
    c0: float

    def __post_init__(self):
        if not self.c0 > 0:
            raise ValidationError(f"c0 must be positive, got {self.c0}")

    def value(self, a: float) -> float:
        return self.c0 * a * a

    def derivative(self, a: float) -> float:
        return 2.0 * self.c0 * a


@dataclass(frozen=True)
class LinearSamples:
    h0: float

    def __post_init__(self):
        if not self.h0 > 0:
            raise ValidationError(f"h0 must be positive, got {self.h0}")

    def value(self, a: float) -> float:
        return self.h0 * a

    def derivative(self, a: float) -> float:
        return self.h0


@dataclass(frozen=True)
class EffortModel:
    cost: EffortFunction
    samples: EffortFunction

    @classmethod
    def quadratic_linear(cls, c0: float, h0: float) -> "EffortModel":
        return cls(QuadraticCost(c0), LinearSamples(h0))


@dataclass(frozen=True)
class EffortSolution:
    a_opt: float
    objective_value: float
    interior: bool


@dataclass(frozen=True)
class TwoActionChoice:
    a_low: float
    a_high: float
    chosen: str  # "high" or "low"
    condition_satisfied: bool
    probability_drop: float  # Q(D h(a_L)) - Q(D h(a_H))
    cost_threshold: float  # (c(a_H) - c(a_L)) / lbar


def _check_effort(a: float) -> None:
    if a < 0:
        raise DomainError(f"effort must be >= 0, got {a}")


def error_prob(em: EffortModel, roc: RocModel, a: float) -> float:
    _check_effort(a)
    return gaussian_q(roc.d_const * em.samples.value(a))


def error_prob_derivative(em: EffortModel, roc: RocModel, a: float) -> float:
    """``d/da Q(D h(a)) = -φ(D h(a)) * D * h'(a)``."""
    _check_effort(a)
    return -normal_pdf(roc.d_const * em.samples.value(a)) * roc.d_const * em.samples.derivative(a)


def hidden_action_objective(em: EffortModel, roc: RocModel, lbar: float, a: float) -> float:
    return em.cost.value(a) + error_prob(em, roc, a) * lbar


def objective_derivative(em: EffortModel, roc: RocModel, lbar: float, a: float) -> float:
    return em.cost.derivative(a) + error_prob_derivative(em, roc, a) * lbar


def optimality_conditions(
    em: EffortModel, roc: RocModel, lbar: float, a: float, tol: Tolerance = Tolerance()
) -> tuple[bool, bool]:
    """Stationarity and the participation-style bound ``c(a) < (1 - p(a)) * lbar``.

    The bound is the abstract form that assumes error probability 1 at zero
    effort. With ``p(0) = Q(0) = 1/2`` it is implied by, but weaker than,
    beating the zero-effort objective.
    """
    grad = objective_derivative(em, roc, lbar, a)
    scale = em.cost.derivative(a) + abs(error_prob_derivative(em, roc, a)) * lbar
    stationary = abs(grad) <= max(tol.abs_tol, tol.rel_tol * scale)
    bounded = em.cost.value(a) < (1.0 - error_prob(em, roc, a)) * lbar
    return stationary, bounded


def _effort_bracket(em: EffortModel, roc: RocModel, lbar: float) -> float:
    hi = 1.0
    while objective_derivative(em, roc, lbar, hi) <= 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise DomainError("objective derivative never turns positive; is c convex increasing?")
    return hi


def solve_optimal_effort(
    em: EffortModel, roc: RocModel, lbar: float, tol: Tolerance = Tolerance()
) -> EffortSolution:
    if lbar < 0:
        raise DomainError(f"lbar must be >= 0, got {lbar}")
    zero = EffortSolution(0.0, hidden_action_objective(em, roc, lbar, 0.0), False)
    if lbar == 0.0 or objective_derivative(em, roc, lbar, 0.0) >= 0.0:
        return zero
    hi = _effort_bracket(em, roc, lbar)
    # bracket down to a few ulps so the stationarity check below is not limited by rel_tol
    root_tol = Tolerance(tol.abs_tol, min(tol.rel_tol, 1e-14), max(tol.max_iter, 400))
    a = find_root(lambda x: objective_derivative(em, roc, lbar, x), 0.0, hi, root_tol)
    stationary, bounded = optimality_conditions(em, roc, lbar, a, tol)
    value = hidden_action_objective(em, roc, lbar, a)
    if not (stationary and bounded) or value > zero.objective_value:
        return zero
    return EffortSolution(a, value, True)


def moral_hazard_check(
    em: EffortModel, roc: RocModel, lbar: float, a_low: float, a_high: float
) -> TwoActionChoice:
    """Whether the developer picks the high effort the insurer prefers.

    High effort is chosen iff the drop in error probability outweighs the
    extra cost per unit of retained exposure. Ties go to high effort, which
    matches a weak argmin of the objective that breaks ties upward.
    """
    if lbar <= 0:
        raise DomainError("lbar must be positive for the two-action comparison")
    if not a_high > a_low >= 0:
        raise DomainError(f"need a_high > a_low >= 0, got {a_low}, {a_high}")
    drop = error_prob(em, roc, a_low) - error_prob(em, roc, a_high)
    threshold = (em.cost.value(a_high) - em.cost.value(a_low)) / lbar
    ok = drop >= threshold
    return TwoActionChoice(a_low, a_high, "high" if ok else "low", ok, drop, threshold)


def retained_exposure(scenario, rho: float) -> float:
    """``lbar = (1 - rho) * D_AI * (l_FP + l_FN)``."""
    if not 0.0 <= rho <= 1.0:
        raise DomainError(f"rho must lie in [0, 1], got {rho}")
    return (1.0 - rho) * scenario.d_ai * (scenario.damages.l_fp + scenario.damages.l_fn)


def first_best_effort(
    scenario,
    contract,
    candidates: Sequence[float],
    sigma_sq: float | None = None,
    insurer_wealth: float = 0.0,
) -> float:
    """Effort on the grid that maximises the insurer's expected wealth.

    ``sigma_sq`` defaults to the scenario's initial uncertainty variance.
    """
    from .risk_model import expected_loss

    if len(candidates) == 0:
        raise DomainError("candidate effort grid is empty")
    em = scenario.effort_model
    if em is None:
        raise DomainError("scenario has no effort model")
    if sigma_sq is None:
        sigma_sq = scenario.uncertainty.sigma0_sq
    best_a, best_v = None, -math.inf
    for a in candidates:
        _check_effort(a)
        op = fair_threshold_errors(scenario.roc, em.samples.value(a))
        v = insurer_wealth + contract.premium - contract.coverage * expected_loss(scenario, op, sigma_sq)
        if v > best_v or (v == best_v and a > best_a):
            best_a, best_v = a, v
    return best_a
