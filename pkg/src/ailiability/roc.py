"""Binormal ROC model, operating points, AUC, and empirical ROC ingestion."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, ValidationError
from .mathkernel import (
    composite_simpson,
    gaussian_q,
    gaussian_q_array,
    gaussian_q_inv,
    normal_pdf,
)

AUC_NODES = 2001
# standard normal mass beyond this many sigmas is below 1e-23
_Z_TAIL = 10.0


@dataclass(frozen=True)
class RocModel:
    """Separation constant D; the detectability index is ``d = D * n_samples``."""

    d_const: float

    def __post_init__(self):
        if not self.d_const > 0:
            raise ValidationError(f"d_const must be positive, got {self.d_const}")

    def separation(self, n_samples: float) -> float:
        if n_samples < 0:
            raise DomainError(f"n_samples must be >= 0, got {n_samples}")
        return self.d_const * n_samples


@dataclass(frozen=True)
class OperatingPoint:
    p_f: float
    p_t: float

    def __post_init__(self):
        for name in ("p_f", "p_t"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {val}")

    @property
    def p_m(self) -> float:
        return 1.0 - self.p_t


@dataclass(frozen=True)
class EmpiricalRoc:
    """Piecewise-linear ROC through ordered points, endpoints included."""

    points: tuple[OperatingPoint, ...]

    def __post_init__(self):
        pts = self.points
        if len(pts) < 2:
            raise ValidationError("an empirical ROC needs at least two points")
        for i in range(1, len(pts)):
            if pts[i].p_f < pts[i - 1].p_f or pts[i].p_t < pts[i - 1].p_t:
                raise ValidationError(
                    f"ROC points must be nondecreasing in p_f and p_t (point {i})"
                )

    @classmethod
    def from_pairs(cls, pairs, extend: bool = True) -> "EmpiricalRoc":
        """Build from ``(p_f, p_t)`` pairs, attaching (0,0) and (1,1) when ``extend``."""
        pts = [OperatingPoint(float(f), float(t)) for f, t in pairs]
        if extend:
            if not pts or (pts[0].p_f, pts[0].p_t) != (0.0, 0.0):
                pts.insert(0, OperatingPoint(0.0, 0.0))
            if (pts[-1].p_f, pts[-1].p_t) != (1.0, 1.0):
                pts.append(OperatingPoint(1.0, 1.0))
        return cls(tuple(pts))

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.array([p.p_f for p in self.points]),
            np.array([p.p_t for p in self.points]),
        )

    def true_positive_at(self, p_f: float) -> float:
        """Linear interpolation of p_t at a given false-positive rate."""
        f, t = self.arrays()
        return float(np.interp(p_f, f, t))


def roc_point(model: RocModel, n_samples: float, p_t: float) -> OperatingPoint:
    """Point on the binormal curve ``p_f = Q(d - Q^-1(1 - p_t))``."""
    if not 0.0 <= p_t <= 1.0:
        raise DomainError(f"p_t must lie in [0, 1], got {p_t}")
    if p_t == 0.0:
        return OperatingPoint(0.0, 0.0)
    if p_t == 1.0:
        return OperatingPoint(1.0, 1.0)
    d = model.separation(n_samples)
    return OperatingPoint(gaussian_q(d - gaussian_q_inv(1.0 - p_t)), p_t)


def fair_threshold_errors(model: RocModel, n_samples: float) -> OperatingPoint:
    """Symmetric-error operating point with ``p_f = p_m = Q(d)``."""
    p = gaussian_q(model.separation(n_samples))
    return OperatingPoint(p, 1.0 - p)


def auc(model: RocModel, n_samples: float) -> float:
    """Area under the model curve.

    Integrates ``p_t dp_f`` after the substitution ``p_f = Q(z)``, giving
    ``∫ Q(z - d) φ(z) dz``; the integrand is smooth, unlike the raw curve
    whose slope is unbounded at the origin.
    """
    d = model.separation(n_samples)
    if d == 0.0:
        return 0.5
    z = np.linspace(-_Z_TAIL, d + _Z_TAIL, AUC_NODES)
    dens = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    return composite_simpson(gaussian_q_array(z - d) * dens, z)


def binormal_auc(d: float) -> float:
    """Closed form ``Φ(d/√2)``."""
    return 1.0 - gaussian_q(d / math.sqrt(2.0))


def model_curve(model: RocModel, n_samples: float, n_points: int = 1000) -> EmpiricalRoc:
    """Sample the model curve at ``n_points`` probit-spaced thresholds."""
    d = model.separation(n_samples)
    z = np.linspace(-_Z_TAIL, d + _Z_TAIL, n_points)[::-1]
    p_f = gaussian_q_array(z)
    p_t = gaussian_q_array(z - d)
    return EmpiricalRoc.from_pairs(zip(p_f, p_t))


def auc_empirical(roc: EmpiricalRoc) -> float:
    f, t = roc.arrays()
    return float(np.sum(np.diff(f) * (t[1:] + t[:-1]) / 2.0))


def accuracy(op: OperatingPoint) -> float:
    """Balanced accuracy ``(p_t + 1 - p_f) / 2``."""
    return (op.p_t + 1.0 - op.p_f) / 2.0


def parse_roc_csv(text: str, source: str = "<string>") -> EmpiricalRoc:
    """Parse a ``p_f,p_t`` file with one header line; errors cite line numbers."""
    lines = [ln for ln in text.splitlines()]
    body = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip() and not ln.startswith("#")]
    if not body:
        raise ValidationError(f"{source}: empty ROC file")
    header_line, header = body[0]
    cols = [c.strip() for c in header.split(",")]
    if cols != ["p_f", "p_t"]:
        raise ValidationError(f"{source}:{header_line}: expected header 'p_f,p_t', got {header!r}")
    pairs = []
    for lineno, row in body[1:]:
        fields = next(csv.reader(io.StringIO(row)))
        if len(fields) != 2:
            raise ValidationError(f"{source}:{lineno}: expected 2 columns, got {len(fields)}")
        try:
            p_f, p_t = float(fields[0]), float(fields[1])
        except ValueError:
            raise ValidationError(f"{source}:{lineno}: non-numeric value in {row!r}") from None
        if not (0.0 <= p_f <= 1.0 and 0.0 <= p_t <= 1.0):
            raise ValidationError(f"{source}:{lineno}: rates must lie in [0, 1]")
        if pairs and (p_f < pairs[-1][0] or p_t < pairs[-1][1]):
            raise ValidationError(f"{source}:{lineno}: points must be sorted by p_f ascending")
        pairs.append((p_f, p_t))
    return EmpiricalRoc.from_pairs(pairs)


def load_roc_csv(path: str | Path) -> EmpiricalRoc:
    path = Path(path)
    return parse_roc_csv(path.read_text(), source=str(path))


def format_roc_csv(roc: EmpiricalRoc, comments: list[str] | None = None) -> str:
    out = [f"# {c}" for c in comments or []]
    out.append("p_f,p_t")
    out.extend(f"{p.p_f!r},{p.p_t!r}" for p in roc.points)
    return "\n".join(out) + "\n"
