"""Adaptive Gauss-Legendre panel quadrature with an evaluation budget.

Only what the pointwise oracles need: finite segments with known
breakpoints, and half-lines split into geometrically growing panels.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import NonConvergence

DEFAULT_BUDGET = 10**6
_ORDER = 20


@lru_cache(maxsize=None)
def _legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


class Budget:
    """Counts integrand evaluations and raises once ``limit`` is exceeded."""

    def __init__(self, limit: int = DEFAULT_BUDGET):
        self.limit = limit
        self.used = 0

    def charge(self, k: int):
        self.used += k
        if self.used > self.limit:
            raise NonConvergence(f"quadrature budget of {self.limit} evaluations exhausted")


def gauss(f, a: float, b: float, budget: Budget, n: int = _ORDER) -> float:
    t, w = _legendre(n)
    half = 0.5 * (b - a)
    budget.charge(n)
    return half * float(np.dot(w, f(a + half * (t + 1.0))))


def adaptive(f, a: float, b: float, abstol: float, budget: Budget, max_depth: int = 12) -> float:
    """Bisect ``[a, b]`` until a panel and its two halves agree to ``abstol``.

    Panels at ``max_depth`` are accepted as they are: at that point the
    disagreement is integrand roundoff, not discretization error.
    """
    total = 0.0
    stack = [(a, b, gauss(f, a, b, budget), abstol, 0)]
    while stack:
        lo, hi, whole, tol, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = gauss(f, lo, mid, budget)
        right = gauss(f, mid, hi, budget)
        if abs(left + right - whole) <= tol or depth >= max_depth:
            total += left + right
        else:
            stack.append((lo, mid, left, 0.5 * tol, depth + 1))
            stack.append((mid, hi, right, 0.5 * tol, depth + 1))
    return total


def integrate_segments(f, edges, rtol: float, budget: Budget, atol: float = 0.0) -> float:
    """Integrate over consecutive ``edges`` (sorted breakpoints) to relative ``rtol``."""
    edges = np.unique(np.asarray(edges, dtype=float))
    pieces = list(zip(edges[:-1], edges[1:]))
    if not pieces:
        return 0.0
    coarse = [gauss(f, lo, hi, budget) for lo, hi in pieces]
    scale = max(abs(sum(coarse)), sum(abs(c) for c in coarse) * 1e-3)
    tol = max(rtol * scale, atol) / len(pieces)
    return sum(adaptive(f, lo, hi, tol, budget) for lo, hi in pieces)


def integrate_tail(f, start: float, rtol: float, budget: Budget, reference: float = 0.0) -> float:
    """Integrate ``f`` over ``[start, inf)`` with doubling panels.

    Stops once the geometric extrapolation of the remaining panels is below
    ``rtol`` times the running total (plus ``reference``, the magnitude of
    whatever this tail will be added to); the extrapolated remainder is added.
    """
    total = 0.0
    prev = None
    lo = start
    while True:
        hi = 2.0 * lo
        part = adaptive(f, lo, hi, rtol * max(abs(total) + abs(reference), 1e-300) * 1e-2, budget)
        total += part
        if prev is not None and prev != 0.0:
            ratio = part / prev
            if 0.0 <= ratio < 1.0:
                remainder = part * ratio / (1.0 - ratio)
                if abs(remainder) <= rtol * (abs(total) + abs(reference)):
                    return total + remainder
        elif part == 0.0 and prev == 0.0:
            return total
        prev = part
        lo = hi
        if not np.isfinite(lo):
            raise NonConvergence("tail integral does not decay")
