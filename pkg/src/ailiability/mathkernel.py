"""Numerical primitives: Gaussian tail function, root finding, quadrature, seeded streams."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BracketError, ConvergenceError, DomainError

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_iter: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0 or not self.rel_tol > 0:
            raise DomainError("tolerances must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be at least 1")


@dataclass(frozen=True)
class RandomStream:
    """Seed plus substream index; every call to :meth:`generator` restarts the same sequence."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, offset: int) -> "RandomStream":
        return RandomStream(self.seed, self.stream_id * 1_000_003 + offset + 1)


def as_generator(stream: RandomStream | np.random.Generator) -> np.random.Generator:
    if isinstance(stream, RandomStream):
        return stream.generator()
    return stream


def gaussian_q(x: float) -> float:
    """Upper tail probability P[Z > x] of the standard normal."""
    if not math.isfinite(x):
        raise DomainError(f"gaussian_q needs a finite argument, got {x!r}")
    return 0.5 * math.erfc(x / SQRT2)


def gaussian_q_array(x: np.ndarray) -> np.ndarray:
    """Vectorised :func:`gaussian_q`; infinities map to the limits 0 and 1."""
    x = np.asarray(x, dtype=float)
    erfc = np.frompyfunc(math.erfc, 1, 1)
    out = np.where(np.isposinf(x), 0.0, np.where(np.isneginf(x), 1.0, 0.0))
    finite = np.isfinite(x)
    out[finite] = 0.5 * erfc(x[finite] / SQRT2).astype(float)
    return out


def normal_pdf(x: float) -> float:
    return INV_SQRT_2PI * math.exp(-0.5 * x * x)


def gaussian_q_inv(p: float) -> float:
    """Inverse of :func:`gaussian_q` by bisection.

    Bisects until the bracket cannot be split further in floating point, so
    the result is as accurate as ``gaussian_q`` itself allows.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"gaussian_q_inv needs 0 < p < 1, got {p!r}")
    lo, hi = -40.0, 40.0
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        q = gaussian_q(mid)
        if q == p:
            return mid
        if q > p:
            lo = mid
        else:
            hi = mid
    # pick whichever endpoint reproduces p more closely
    return lo if abs(gaussian_q(lo) - p) < abs(gaussian_q(hi) - p) else hi


def find_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: Tolerance = Tolerance(),
) -> float:
    """Bracketed root of ``f`` on ``[lo, hi]``.

    Secant steps are taken when they land inside the current bracket and
    shrink it by at least half; otherwise the step falls back to bisection,
    so convergence is never lost.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if math.isnan(flo) or math.isnan(fhi) or flo * fhi > 0.0:
        raise BracketError(f"no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")

    for _ in range(tol.max_iter):
        width = hi - lo
        x = lo - flo * width / (fhi - flo)
        if not (lo < x < hi):
            x = 0.5 * (lo + hi)
        fx = f(x)
        if abs(fx) <= tol.abs_tol:
            return x
        if (fx < 0.0) == (flo < 0.0):
            lo, flo = x, fx
        else:
            hi, fhi = x, fx
        if hi - lo > 0.5 * width:
            # secant crept along one side; force a halving step
            mid = 0.5 * (lo + hi)
            fmid = f(mid)
            if abs(fmid) <= tol.abs_tol:
                return mid
            if (fmid < 0.0) == (flo < 0.0):
                lo, flo = mid, fmid
            else:
                hi, fhi = mid, fmid
        centre = 0.5 * (lo + hi)
        if hi - lo <= tol.rel_tol * abs(centre) or hi - lo <= 4 * math.ulp(centre):
            return lo if abs(flo) <= abs(fhi) else hi
    raise ConvergenceError(f"find_root exceeded {tol.max_iter} iterations on [{lo}, {hi}]")


def adaptive_simpson(
    f: Callable[[float], float], a: float, b: float, abs_tol: float = 1e-12, max_depth: int = 60
) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""

    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return recurse(a, m, fa, flm, fm, left, tol / 2, depth - 1) + recurse(
            m, b, fm, frm, fb, right, tol / 2, depth - 1
        )

    fa, fb = f(a), f(b)
    fm = f(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), abs_tol, max_depth)


def composite_simpson(y: np.ndarray, x: np.ndarray) -> float:
    """Composite Simpson rule on an odd number of equally spaced samples."""
    y = np.asarray(y, dtype=float)
    if len(y) < 3 or len(y) % 2 == 0:
        raise DomainError("composite Simpson needs an odd number (>= 3) of samples")
    h = (x[-1] - x[0]) / (len(y) - 1)
    return float(h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum()))


def expectation_mc(
    sampler: Callable[[np.random.Generator, int], np.ndarray],
    n: int,
    stream: RandomStream,
) -> tuple[float, float]:
    """Sample mean and standard error of ``n`` draws.

    ``sampler(rng, n)`` must return ``n`` independent draws as an array. The
    result depends only on ``(stream.seed, stream.stream_id, n)``.
    """
    if n < 2:
        raise DomainError("expectation_mc needs n >= 2")
    draws = np.asarray(sampler(stream.generator(), n), dtype=float)
    if draws.shape != (n,):
        raise DomainError(f"sampler returned shape {draws.shape}, expected ({n},)")
    mean = float(draws.mean())
    std_error = float(draws.std(ddof=1) / math.sqrt(n))
    return mean, std_error


def combine_estimates(estimates: list[tuple[float, float, int]]) -> tuple[float, float]:
    """Pool ``(mean, std_error, n)`` estimates from independent substreams."""
    total = sum(n for _, _, n in estimates)
    mean = sum(m * n for m, _, n in estimates) / total
    var = sum((n / total) ** 2 * se**2 for _, se, n in estimates)
    return mean, math.sqrt(var)
