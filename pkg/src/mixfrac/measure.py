"""Signed measures on the order interval [0, 1].

A measure is stored as two lists of nonnegative components (atoms and
piecewise-constant densities), ``mu = plus - minus``, together with the
threshold ``sbar`` that separates the orders where negative mass is allowed
from those where positive mass is required.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import HypothesisViolation

DEFAULT_NODES_PER_PIECE = 32


@dataclass(frozen=True)
class Atom:
    s: float
    weight: float

    def __post_init__(self):
        if not 0.0 <= self.s <= 1.0:
            raise ValueError(f"atom location {self.s} outside [0, 1]")
        if not (self.weight > 0 and np.isfinite(self.weight)):
            raise ValueError(f"atom weight must be positive and finite, got {self.weight}")

    def mass(self, lo: float, hi: float, include_hi: bool = True) -> float:
        inside = lo <= self.s <= hi if include_hi else lo <= self.s < hi
        return self.weight if inside else 0.0

    def scaled(self, t: float) -> "Atom":
        return Atom(self.s, self.weight * t)


@dataclass(frozen=True)
class Density:
    """Constant density ``coeff`` (mass per unit order) on ``[s_lo, s_hi]``."""

    s_lo: float
    s_hi: float
    coeff: float

    def __post_init__(self):
        if not 0.0 <= self.s_lo < self.s_hi <= 1.0:
            raise ValueError(f"density support [{self.s_lo}, {self.s_hi}] invalid")
        if not (self.coeff >= 0 and np.isfinite(self.coeff)):
            raise ValueError(f"density coefficient must be >= 0, got {self.coeff}")

    def mass(self, lo: float, hi: float, include_hi: bool = True) -> float:
        # endpoints carry no mass for an absolutely continuous piece
        overlap = min(hi, self.s_hi) - max(lo, self.s_lo)
        return self.coeff * overlap if overlap > 0 else 0.0

    def scaled(self, t: float) -> "Density":
        return Density(self.s_lo, self.s_hi, self.coeff * t)


MeasureComponent = Union[Atom, Density]


def mass(components: Iterable[MeasureComponent], lo: float = 0.0, hi: float = 1.0,
         include_hi: bool = True) -> float:
    """Mass of ``components`` on ``[lo, hi]`` (or ``[lo, hi)`` if ``include_hi`` is false)."""
    if lo > hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    return float(sum(c.mass(lo, hi, include_hi) for c in components))


@dataclass(frozen=True)
class SignedMeasure:
    plus: tuple = ()
    minus: tuple = ()
    sbar: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "plus", tuple(self.plus))
        object.__setattr__(self, "minus", tuple(self.minus))
        if not 0.0 < self.sbar <= 1.0:
            raise ValueError(f"sbar must lie in (0, 1], got {self.sbar}")
        if not self.plus and not self.minus:
            raise ValueError("degenerate measure: both sides are empty")
        for c in self.plus + self.minus:
            if not isinstance(c, (Atom, Density)):
                raise TypeError(f"unsupported measure component {c!r}")

    def __add__(self, other: "SignedMeasure") -> "SignedMeasure":
        if self.sbar != other.sbar:
            raise ValueError("cannot add measures with different thresholds")
        return SignedMeasure(self.plus + other.plus, self.minus + other.minus, self.sbar)

    def scale_minus(self, t: float) -> "SignedMeasure":
        return SignedMeasure(self.plus, tuple(c.scaled(t) for c in self.minus), self.sbar)

    @property
    def has_minus(self) -> bool:
        return mass(self.minus) > 0

    def fractional_plus_mass(self) -> float:
        """``mu+((0, 1))``, the mass carried strictly between the endpoint orders."""
        total = mass(self.plus)
        return total - mass(self.plus, 0.0, 0.0) - mass(self.plus, 1.0, 1.0)

    @classmethod
    def from_dict(cls, d: dict) -> "SignedMeasure":
        return cls(
            plus=tuple(_component_from_dict(c) for c in d.get("plus", ())),
            minus=tuple(_component_from_dict(c) for c in d.get("minus", ())),
            sbar=float(d.get("sbar", 1.0)),
        )

    def to_dict(self) -> dict:
        return {
            "sbar": self.sbar,
            "plus": [_component_to_dict(c) for c in self.plus],
            "minus": [_component_to_dict(c) for c in self.minus],
        }


def _component_from_dict(d: dict) -> MeasureComponent:
    kind = d.get("kind")
    if kind == "atom":
        return Atom(float(d["s"]), float(d["weight"]))
    if kind == "density":
        return Density(float(d["s_lo"]), float(d["s_hi"]), float(d["coeff"]))
    raise ValueError(f"unknown measure component kind {kind!r}")


def _component_to_dict(c: MeasureComponent) -> dict:
    if isinstance(c, Atom):
        return {"kind": "atom", "s": c.s, "weight": c.weight}
    return {"kind": "density", "s_lo": c.s_lo, "s_hi": c.s_hi, "coeff": c.coeff}


@dataclass(frozen=True)
class HypothesisReport:
    mu0_ok: bool
    mu1_ok: bool
    gamma: float | None
    s_sharp: float | None
    sbar: float = field(default=1.0)

    @property
    def ok(self) -> bool:
        return self.mu0_ok and self.mu1_ok

    def to_dict(self) -> dict:
        return {
            "mu0_ok": self.mu0_ok,
            "mu1_ok": self.mu1_ok,
            "gamma": self.gamma,
            "s_sharp": self.s_sharp,
            "sbar": self.sbar,
        }


def check_hypotheses(m: SignedMeasure) -> HypothesisReport:
    """Evaluate the positivity/reabsorption conditions without raising.

    ``gamma`` is the smallest admissible constant in
    ``mu-([0, sbar)) <= gamma * mu+([sbar, 1])`` and ``s_sharp`` the supremum
    of the orders ``s >= sbar`` with ``mu+([s, 1]) > 0``.
    """
    upper_plus = mass(m.plus, m.sbar, 1.0)
    mu0_ok = upper_plus > 0
    mu1_ok = mass(m.minus, m.sbar, 1.0) == 0
    gamma = s_sharp = None
    if mu0_ok:
        gamma = mass(m.minus, 0.0, m.sbar, include_hi=False) / upper_plus
        candidates = []
        for c in m.plus:
            if c.mass(m.sbar, 1.0) <= 0:
                continue
            candidates.append(c.s if isinstance(c, Atom) else c.s_hi)
        s_sharp = max(candidates)
    return HypothesisReport(mu0_ok, mu1_ok, gamma, s_sharp, m.sbar)


def validate_hypotheses(m: SignedMeasure) -> HypothesisReport:
    report = check_hypotheses(m)
    if not report.mu0_ok:
        raise HypothesisViolation(f"mu+([{m.sbar}, 1]) = 0: no positive mass above sbar", report)
    if not report.mu1_ok:
        raise HypothesisViolation(f"mu- charges [{m.sbar}, 1]", report)
    return report


@dataclass(frozen=True)
class QuadratureNode:
    s: float
    w: float
    sign: int


def _gauss_legendre(lo: float, hi: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (t + 1.0), half * w


def _atomize_side(components: Sequence[MeasureComponent], sign: int, sbar: float,
                  nodes_per_piece: int) -> list[QuadratureNode]:
    nodes = []
    for c in components:
        if isinstance(c, Atom):
            nodes.append(QuadratureNode(c.s, c.weight, sign))
            continue
        if c.coeff == 0:
            continue
        cuts = [c.s_lo, c.s_hi]
        if c.s_lo < sbar < c.s_hi:
            cuts.insert(1, sbar)
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            xs, ws = _gauss_legendre(lo, hi, nodes_per_piece)
            nodes.extend(QuadratureNode(float(x), float(c.coeff * w), sign) for x, w in zip(xs, ws))
    nodes.sort(key=lambda q: q.s)
    return nodes


def atomize(m: SignedMeasure, nodes_per_piece: int = DEFAULT_NODES_PER_PIECE) -> list[QuadratureNode]:
    """Replace ``m`` by a finite list of signed point masses.

    Atoms pass through; each density piece becomes a Gauss-Legendre rule on
    its support (split at ``sbar`` when it straddles it). Plus nodes come
    first, each side sorted by ascending order ``s``.
    """
    if nodes_per_piece < 1:
        raise ValueError("nodes_per_piece must be >= 1")
    return (_atomize_side(m.plus, +1, m.sbar, nodes_per_piece)
            + _atomize_side(m.minus, -1, m.sbar, nodes_per_piece))
