"""Loss decomposition of an insured diagnosis product.

Total loss per period is ``x = D_AI * (l_AI + v * theta**2)`` where ``l_AI``
is a three-outcome draw (false positive, false negative, no error) and
``theta ~ N(0, sigma^2)`` is independent of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import DivergenceError, DomainError, ValidationError
from .mathkernel import RandomStream, as_generator
from .roc import OperatingPoint, RocModel

if TYPE_CHECKING:
    from .effort import EffortModel


@dataclass(frozen=True)
class PopulationModel:
    k: float  # AI speed-up relative to a doctor
    n: int  # deployed machines
    d_doc: float  # patients per doctor per period

    def __post_init__(self):
        if not self.k > 0:
            raise ValidationError(f"k must be positive, got {self.k}")
        if self.n < 1:
            raise ValidationError(f"n must be >= 1, got {self.n}")
        if self.d_doc < 0:
            raise ValidationError(f"d_doc must be >= 0, got {self.d_doc}")


def population_size(p: PopulationModel, as_count: bool = False) -> float:
    """Affected population ``k * n * d_doc``."""
    size = p.k * p.n * p.d_doc
    return round(size) if as_count else size


def loss_false_positive(alpha: float, w: float, t_quarantine: float) -> float:
    """Productivity lost to an unnecessary quarantine, ``alpha * W * T``."""
    return alpha * w * t_quarantine


def loss_false_negative(
    m_treatment: float, beta: float, w: float, t_quarantine: float, r0: float
) -> float:
    """Delayed treatment plus own and spread productivity loss.

    Spread cost is ``r0 * beta * W * T``: each missed case infects ``r0``
    colleagues who lose the same productivity.
    """
    own = beta * w * t_quarantine
    return m_treatment + own + r0 * own


@dataclass(frozen=True)
class DamageModel:
    alpha: float
    beta: float
    w: float
    t_quarantine: float
    m_treatment: float
    r0: float

    def __post_init__(self):
        for name in ("alpha", "beta", "w", "t_quarantine", "m_treatment", "r0"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ("alpha", "beta"):
            if not 0.0 < getattr(self, name) <= 1.0:
                raise ValidationError(f"{name} must lie in (0, 1], got {getattr(self, name)}")
        if not self.l_fn > self.l_fp:
            raise ValidationError(
                f"false-negative loss {self.l_fn} must exceed false-positive loss {self.l_fp}"
            )

    @property
    def l_fp(self) -> float:
        return loss_false_positive(self.alpha, self.w, self.t_quarantine)

    @property
    def l_fn(self) -> float:
        return loss_false_negative(self.m_treatment, self.beta, self.w, self.t_quarantine, self.r0)


@dataclass(frozen=True)
class UncertaintyModel:
    v: float  # loss per unit theta^2
    sigma0_sq: float
    m: float  # yearly decay rate of the variance

    def __post_init__(self):
        for name in ("v", "sigma0_sq", "m"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0, got {getattr(self, name)}")


def uncertainty_variance_at(u: UncertaintyModel, t: float) -> float:
    if t < 0:
        raise DomainError(f"time must be >= 0, got {t}")
    return u.sigma0_sq * math.exp(-u.m * t)


@dataclass(frozen=True)
class RiskScenario:
    population: PopulationModel
    damages: DamageModel
    uncertainty: UncertaintyModel
    roc: RocModel
    effort_model: "EffortModel | None" = None

    @property
    def d_ai(self) -> float:
        return population_size(self.population)


def _check_mixture(op: OperatingPoint) -> None:
    if op.p_f + op.p_m > 1.0 + 1e-12:
        raise DomainError(f"p_f + p_m = {op.p_f + op.p_m} exceeds 1")


def misclassification_loss(s: RiskScenario, op: OperatingPoint) -> float:
    """Expected per-user loss from classification errors alone."""
    return op.p_f * s.damages.l_fp + op.p_m * s.damages.l_fn


def expected_loss(s: RiskScenario, op: OperatingPoint, sigma_sq: float) -> float:
    if sigma_sq < 0:
        raise DomainError(f"sigma_sq must be >= 0, got {sigma_sq}")
    return s.d_ai * (misclassification_loss(s, op) + s.uncertainty.v * sigma_sq)


def sample_total_losses(
    s: RiskScenario,
    op: OperatingPoint,
    sigma_sq: float,
    rng: np.random.Generator,
    size: int,
) -> np.ndarray:
    """``size`` independent realisations of the total loss."""
    _check_mixture(op)
    u = rng.random(size)
    l_ai = np.where(u < op.p_f, s.damages.l_fp, np.where(u < op.p_f + op.p_m, s.damages.l_fn, 0.0))
    theta = rng.normal(0.0, math.sqrt(sigma_sq), size)
    return s.d_ai * (l_ai + s.uncertainty.v * theta * theta)


def sample_total_loss(
    s: RiskScenario,
    op: OperatingPoint,
    sigma_sq: float,
    stream: RandomStream | np.random.Generator,
) -> float:
    return float(sample_total_losses(s, op, sigma_sq, as_generator(stream), 1)[0])


def log_loss_mgf(s: RiskScenario, op: OperatingPoint, sigma_sq: float, s_param: float) -> float:
    """``log E[exp(s_param * x)]`` in a form that stays accurate for tiny ``s_param``."""
    _check_mixture(op)
    c = s_param * s.d_ai * s.uncertainty.v * sigma_sq
    if c >= 0.5:
        raise DivergenceError(
            f"MGF diverges: s*D_AI*v*sigma^2 = {c:.6g} >= 1/2 (Gaussian tail of theta)"
        )
    a_fp = s_param * s.d_ai * s.damages.l_fp
    a_fn = s_param * s.d_ai * s.damages.l_fn
    p_none = 1.0 - op.p_f - op.p_m
    if max(abs(a_fp), abs(a_fn)) < 700.0:
        log_mix = math.log1p(op.p_f * math.expm1(a_fp) + op.p_m * math.expm1(a_fn))
    else:
        terms = [(op.p_f, a_fp), (op.p_m, a_fn), (p_none, 0.0)]
        top = max(a for p, a in terms if p > 0)
        log_mix = top + math.log(sum(p * math.exp(a - top) for p, a in terms if p > 0))
    # chi-square(1) MGF: E[exp(c' theta^2)] = (1 - 2 c' sigma^2)^(-1/2)
    return log_mix - 0.5 * math.log1p(-2.0 * c)


def loss_mgf(s: RiskScenario, op: OperatingPoint, sigma_sq: float, s_param: float) -> float:
    return math.exp(log_loss_mgf(s, op, sigma_sq, s_param))
