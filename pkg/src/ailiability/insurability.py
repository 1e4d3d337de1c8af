"""Insurability verdicts, insurable regions over the ROC square, premium schedules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .contract import fair_premium, premium_interval
from .errors import DomainError, ValidationError
from .mathkernel import find_root
from .risk_model import (
    RiskScenario,
    log_loss_mgf,
    misclassification_loss,
    uncertainty_variance_at,
)
from .roc import OperatingPoint, accuracy

ACCURACY_THRESHOLD = 0.8
# accuracies within this distance of the threshold count as "on the boundary" and fail
ACCURACY_BOUNDARY_TOL = 1e-12
PRICE_POINTS = ("lower", "mid", "upper")


@dataclass(frozen=True)
class ChecklistItem:
    passed: bool
    evidence: str = ""


@dataclass(frozen=True)
class QualityChecklist:
    items: Mapping[str, ChecklistItem] = field(default_factory=dict)

    @classmethod
    def all_clear(cls, *names: str) -> "QualityChecklist":
        return cls({n: ChecklistItem(True, "assumed") for n in names})

    @property
    def ok(self) -> bool:
        return all(item.passed for item in self.items.values())

    def failing(self) -> list[str]:
        return [name for name, item in self.items.items() if not item.passed]


@dataclass(frozen=True)
class InsurabilityVerdict:
    accuracy_ok: bool
    premium_ok: bool
    prerequisites_ok: bool
    acc_value: float
    premium_value: float
    failing_prerequisites: tuple[str, ...] = ()

    @property
    def insurable(self) -> bool:
        return self.accuracy_ok and self.premium_ok and self.prerequisites_ok

    def failing(self) -> list[str]:
        out = []
        if not self.accuracy_ok:
            out.append("accuracy")
        if not self.premium_ok:
            out.append("premium")
        if not self.prerequisites_ok:
            out.append("prerequisites")
        return out


def accuracy_passes(acc):
    return acc - ACCURACY_THRESHOLD > ACCURACY_BOUNDARY_TOL


def assess(
    scenario: RiskScenario,
    op: OperatingPoint,
    sigma_sq: float,
    max_premium: float,
    checklist: QualityChecklist,
) -> InsurabilityVerdict:
    """Accuracy above 0.8, full-coverage fair premium within budget, prerequisites met."""
    if max_premium < 0:
        raise DomainError(f"max_premium must be >= 0, got {max_premium}")
    acc = accuracy(op)
    premium = fair_premium(scenario, op, sigma_sq, 1.0)
    return InsurabilityVerdict(
        accuracy_ok=bool(accuracy_passes(acc)),
        premium_ok=premium <= max_premium,
        prerequisites_ok=checklist.ok,
        acc_value=acc,
        premium_value=premium,
        failing_prerequisites=tuple(checklist.failing()),
    )


@dataclass
class RegionGrid:
    """Verdicts on cell centres; 2-D arrays are indexed ``[i_pf, j_pt]``."""

    resolution: float
    p_f: np.ndarray
    p_t: np.ndarray
    acc_ok: np.ndarray
    premium_ok: np.ndarray
    premium: np.ndarray
    parameters: dict

    @property
    def insurable(self) -> np.ndarray:
        return self.acc_ok & self.premium_ok

    def insurable_cells(self) -> set[tuple[int, int]]:
        return set(zip(*map(lambda a: a.tolist(), np.nonzero(self.insurable))))

    def to_csv(self, comments: Sequence[str] = ()) -> str:
        lines = [f"# {c}" for c in comments]
        lines += [f"# {k}={v}" for k, v in self.parameters.items()]
        lines.append("p_f,p_t,acc_ok,premium_ok,insurable,premium")
        ins = self.insurable
        for i, pf in enumerate(self.p_f.tolist()):
            for j, pt in enumerate(self.p_t.tolist()):
                lines.append(
                    f"{pf!r},{pt!r},{int(self.acc_ok[i, j])},{int(self.premium_ok[i, j])},"
                    f"{int(ins[i, j])},{float(self.premium[i, j])!r}"
                )
        return "\n".join(lines) + "\n"


def grid_cells(resolution: float) -> int:
    n = round(1.0 / resolution)
    if n < 1 or abs(n * resolution - 1.0) > 1e-9:
        raise DomainError(f"resolution {resolution} does not divide 1 evenly")
    return n


def insurable_region(
    scenario: RiskScenario, sigma_sq: float, max_premium: float, resolution: float = 1 / 200
) -> RegionGrid:
    """Evaluate :func:`assess` on every cell centre of the ROC square.

    Vectorised, but with the same operation order as the scalar path so
    both give bit-identical verdicts.
    """
    if sigma_sq < 0:
        raise DomainError(f"sigma_sq must be >= 0, got {sigma_sq}")
    n = grid_cells(resolution)
    centres = (np.arange(n) + 0.5) / n
    pf = centres[:, None]
    pt = centres[None, :]
    acc = (pt + 1.0 - pf) / 2.0
    pm = 1.0 - pt
    d = scenario.damages
    misclass = pf * d.l_fp + pm * d.l_fn
    premium = 1.0 * (scenario.d_ai * (misclass + scenario.uncertainty.v * sigma_sq))
    params = {
        "resolution": resolution,
        "d_ai": scenario.d_ai,
        "v": scenario.uncertainty.v,
        "sigma_sq": sigma_sq,
        "max_premium": max_premium,
        "l_fp": d.l_fp,
        "l_fn": d.l_fn,
    }
    return RegionGrid(
        resolution=resolution,
        p_f=centres.copy(),
        p_t=centres.copy(),
        acc_ok=np.asarray(accuracy_passes(acc)),
        premium_ok=premium <= max_premium,
        premium=premium,
        parameters=params,
    )


@dataclass(frozen=True)
class PremiumSchedule:
    times: tuple[float, ...]
    premiums: tuple[float, ...]
    floor: float
    price_point: str = "lower"
    diverged: tuple[bool, ...] = ()

    def to_csv(self, comments: Sequence[str] = ()) -> str:
        lines = [f"# {c}" for c in comments]
        lines.append("t,premium,floor")
        for t, p in zip(self.times, self.premiums):
            lines.append(f"{t!r},{p!r},{self.floor!r}")
        return "\n".join(lines) + "\n"


def _price(scenario, op, sigma_sq, rho, price_point, epsilon) -> tuple[float, bool]:
    if price_point == "lower":
        return fair_premium(scenario, op, sigma_sq, rho), False
    iv = premium_interval(scenario, op, sigma_sq, rho, epsilon)
    if price_point == "upper":
        return iv.upper, iv.diverged
    return 0.5 * (iv.lower + iv.upper), iv.diverged


def schedule_floor(scenario, op, rho, price_point="lower", epsilon=None) -> float:
    """Premium in the limit of vanishing uncertainty."""
    lower = rho * scenario.d_ai * misclassification_loss(scenario, op)
    if price_point == "lower":
        return lower
    upper = log_loss_mgf(scenario, op, 0.0, epsilon * rho) / epsilon
    upper = max(upper, lower)
    return upper if price_point == "upper" else 0.5 * (lower + upper)


def premium_schedule(
    scenario: RiskScenario,
    op: OperatingPoint,
    rho: float,
    t_grid: Sequence[float],
    price_point: str = "lower",
    epsilon: float | None = None,
) -> PremiumSchedule:
    if price_point not in PRICE_POINTS:
        raise DomainError(f"price_point must be one of {PRICE_POINTS}, got {price_point!r}")
    if price_point != "lower" and (epsilon is None or not epsilon > 0):
        raise DomainError(f"price_point {price_point!r} needs epsilon > 0")
    if len(t_grid) == 0:
        raise DomainError("t_grid is empty")
    if any(t < 0 for t in t_grid) or any(b < a for a, b in zip(t_grid, t_grid[1:])):
        raise DomainError("t_grid must be nonnegative and nondecreasing")
    premiums, diverged = [], []
    for t in t_grid:
        sigma_sq = uncertainty_variance_at(scenario.uncertainty, t)
        p, div = _price(scenario, op, sigma_sq, rho, price_point, epsilon)
        premiums.append(p)
        diverged.append(div)
    floor = schedule_floor(scenario, op, rho, price_point, epsilon)
    return PremiumSchedule(
        tuple(float(t) for t in t_grid), tuple(premiums), floor, price_point, tuple(diverged)
    )


def first_insurable_time(
    scenario: RiskScenario, op: OperatingPoint, max_premium: float, rho: float = 1.0
) -> float:
    """Earliest time the fair premium drops to ``max_premium``; ``math.inf`` means never."""
    u = scenario.uncertainty

    def excess(t: float) -> float:
        return fair_premium(scenario, op, uncertainty_variance_at(u, t), rho) - max_premium

    if excess(0.0) <= 0.0:
        return 0.0
    floor = schedule_floor(scenario, op, rho)
    if u.m == 0.0 or floor >= max_premium:
        return math.inf
    hi = 1.0
    while excess(hi) > 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise ValidationError("premium never reaches the market maximum")
    return find_root(excess, 0.0, hi)
