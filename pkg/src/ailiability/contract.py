"""Linear insurance contracts under exponential utility."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, DomainError, UtilityOverflowError, ValidationError
from .mathkernel import RandomStream
from .risk_model import (
    RiskScenario,
    expected_loss,
    log_loss_mgf,
    sample_total_losses,
)
from .roc import OperatingPoint


@dataclass(frozen=True)
class Participant:
    wealth: float
    epsilon: float  # >0 risk averse, 0 neutral, <0 risk seeking

    def __post_init__(self):
        if self.wealth < 0:
            raise ValidationError(f"wealth must be >= 0, got {self.wealth}")


@dataclass(frozen=True)
class Contract:
    premium: float
    coverage: float

    def __post_init__(self):
        if self.premium < 0:
            raise ValidationError(f"premium must be >= 0, got {self.premium}")
        if not 0.0 <= self.coverage <= 1.0:
            raise ValidationError(f"coverage must lie in [0, 1], got {self.coverage}")


@dataclass(frozen=True)
class PremiumInterval:
    lower: float
    upper: float  # +inf when the loss MGF does not exist
    diverged: bool = False

    @property
    def nonempty(self) -> bool:
        return self.lower <= self.upper

    @property
    def width(self) -> float:
        return self.upper - self.lower


def utility(p: Participant, x: float) -> float:
    """``1 - exp(-eps * x)``, or ``x`` for a risk-neutral participant."""
    if not math.isfinite(x):
        raise DomainError(f"utility needs a finite argument, got {x!r}")
    if p.epsilon == 0.0:
        return x
    try:
        return -math.expm1(-p.epsilon * x)
    except OverflowError:
        raise UtilityOverflowError(
            f"exp(-{p.epsilon} * {x}) overflows; rescale wealth or epsilon"
        ) from None


def _check_rho(rho: float) -> None:
    if rho == 0.0:
        raise DomainError("coverage rho = 0 is a degenerate contract")
    if not 0.0 < rho <= 1.0:
        raise DomainError(f"rho must lie in (0, 1], got {rho}")


def fair_premium(s: RiskScenario, op: OperatingPoint, sigma_sq: float, rho: float) -> float:
    _check_rho(rho)
    return rho * expected_loss(s, op, sigma_sq)


def premium_interval(
    s: RiskScenario, op: OperatingPoint, sigma_sq: float, rho: float, epsilon: float
) -> PremiumInterval:
    """Premiums acceptable to a risk-neutral insurer and a CARA agent.

    The lower end is the insurer's break-even; the upper end is the agent's
    certainty equivalent of the covered loss share.
    """
    _check_rho(rho)
    if not epsilon > 0:
        raise DomainError(f"premium bounds need a risk-averse agent (epsilon > 0), got {epsilon}")
    lower = rho * expected_loss(s, op, sigma_sq)
    try:
        upper = float(log_loss_mgf(s, op, sigma_sq, epsilon * rho) / epsilon)
    except DivergenceError:
        return PremiumInterval(lower, math.inf, diverged=True)
    # Jensen guarantees upper >= lower; clip rounding noise in the risk-neutral limit
    return PremiumInterval(lower, max(upper, lower))


def indifference_premium(
    s: RiskScenario, op: OperatingPoint, sigma_sq: float, rho: float, epsilon: float
) -> float:
    """Largest premium a CARA agent pays for coverage ``rho``.

    Solves E[u(w - pi - (1 - rho) x)] = E[u(w - x)] exactly. Equals the
    interval's upper end at full coverage and exceeds it otherwise, since the
    retained share keeps part of the tail risk. Returns inf if the loss MGF
    diverges.
    """
    _check_rho(rho)
    if not epsilon > 0:
        raise DomainError(f"indifference premium needs epsilon > 0, got {epsilon}")
    try:
        full = log_loss_mgf(s, op, sigma_sq, epsilon)
    except DivergenceError:
        return math.inf
    kept = log_loss_mgf(s, op, sigma_sq, epsilon * (1.0 - rho)) if rho < 1 else 0.0
    return float(max((full - kept) / epsilon, rho * expected_loss(s, op, sigma_sq)))


@dataclass(frozen=True)
class ParticipationCheck:
    accepted: bool
    mean_gain: float  # insured minus uninsured, in units of exp(-eps * (w - c))
    std_error: float


def participation_gain(
    s: RiskScenario,
    op: OperatingPoint,
    sigma_sq: float,
    contract: Contract,
    agent: Participant,
    effort_cost: float,
    mc_n: int,
    stream: RandomStream,
) -> ParticipationCheck:
    """Monte Carlo utility gain from insuring, with paired draws.

    For CARA utility ``U(w - c - y) = 1 - exp(-eps (w - c)) * exp(eps y)``, so
    the positive wealth factor is divided out; this keeps the comparison
    meaningful when ``exp(-eps w)`` underflows. Wealth and effort cost
    therefore do not affect the verdict.
    """
    if mc_n < 10_000:
        raise DomainError("participation check needs mc_n >= 10^4")
    x = sample_total_losses(s, op, sigma_sq, stream.generator(), mc_n)
    eps = agent.epsilon
    retained = contract.premium + (1.0 - contract.coverage) * x
    if eps == 0.0:
        diff = x - retained
    else:
        with np.errstate(over="raise"):
            diff = np.exp(eps * x) - np.exp(eps * retained)
    mean = float(diff.mean())
    se = float(diff.std(ddof=1) / math.sqrt(mc_n))
    return ParticipationCheck(mean >= -4.0 * se, mean, se)


def verify_participation(
    s: RiskScenario,
    op: OperatingPoint,
    sigma_sq: float,
    contract: Contract,
    agent: Participant,
    effort_cost: float,
    mc_n: int,
    stream: RandomStream,
) -> bool:
    """True when insuring is at least as good as going bare, up to 4 standard errors."""
    return participation_gain(
        s, op, sigma_sq, contract, agent, effort_cost, mc_n, stream
    ).accepted
