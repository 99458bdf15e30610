"""Discrete superposition operator and its bilinear forms.

The operator is ``sum_nodes sign * w * component_matrix(grid, s)`` over the
quadrature nodes of the measure. Forms are measured against the lumped mass
matrix ``h * I``: ``<u, v> = h * v @ A @ u``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import HypothesisViolation, IndefiniteForm
from .kernel import Grid, component_matrix, gagliardo_seminorm_sq, values_on
from .measure import (DEFAULT_NODES_PER_PIECE, HypothesisReport, SignedMeasure,
                      atomize, check_hypotheses)

INDEFINITE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    grid: Grid
    matrix: np.ndarray
    nodes: tuple
    hypothesis: HypothesisReport
    measure: SignedMeasure
    plus_matrix: np.ndarray
    # minus nodes below sbar only; with mu1 in force this is the whole minus part
    minus_matrix: np.ndarray
    # plus and minus nodes at orders >= sbar, with sign
    upper_matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def h(self) -> float:
        return self.grid.h

    def min_eigenvalue(self) -> float:
        return float(scipy.linalg.eigvalsh(self.matrix, subset_by_index=[0, 0])[0])


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def assemble(m: SignedMeasure, grid: Grid, nodes_per_piece: int = DEFAULT_NODES_PER_PIECE,
             force: bool = False) -> OperatorMatrix:
    """Assemble the discrete ``L_mu`` on ``grid``.

    Raises HypothesisViolation when the measure fails the positivity or
    support conditions, unless ``force`` is set.
    """
    report = check_hypotheses(m)
    if not report.ok and not force:
        problem = "mu0" if not report.mu0_ok else "mu1"
        raise HypothesisViolation(f"measure violates {problem}; pass force=True to assemble anyway",
                                  report)
    nodes = tuple(atomize(m, nodes_per_piece))
    n = grid.n
    plus = np.zeros((n, n))
    minus_low = np.zeros((n, n))
    minus_high = np.zeros((n, n))
    upper = np.zeros((n, n))
    for q in nodes:
        term = q.w * component_matrix(grid, q.s)
        if q.sign > 0:
            plus += term
        elif q.s < m.sbar:
            minus_low += term
        else:
            minus_high += term
        if q.s >= m.sbar:
            upper += q.sign * term
    matrix = plus - minus_low - minus_high
    return OperatorMatrix(grid, _freeze(matrix), nodes, report, m, _freeze(plus),
                          _freeze(minus_low), _freeze(upper))


def _form(mat: np.ndarray, u, v, op: OperatorMatrix) -> float:
    uu = values_on(u, op.grid)
    vv = values_on(v, op.grid)
    return float(op.h * (vv @ (mat @ uu)))


def inner_plus(u, v, op: OperatorMatrix) -> float:
    return _form(op.plus_matrix, u, v, op)


def inner_minus(u, v, op: OperatorMatrix) -> float:
    """Form of the negative part restricted to orders below ``sbar``."""
    return _form(op.minus_matrix, u, v, op)


def inner(u, v, op: OperatorMatrix) -> float:
    return inner_plus(u, v, op) - inner_minus(u, v, op)


def _checked_sqrt(value: float, what: str) -> float:
    if value < -INDEFINITE_TOL:
        raise IndefiniteForm(f"{what} has negative square {value:.3e}")
    return float(np.sqrt(max(value, 0.0)))


def norm_X(u, op: OperatorMatrix) -> float:
    return _checked_sqrt(inner_plus(u, u, op), "positive-part norm")


def norm_mixed(u, op: OperatorMatrix) -> float:
    """``sqrt(<u,u>_+ - <u,u>_-)``; IndefiniteForm when the radicand is negative."""
    return _checked_sqrt(inner(u, u, op), "mixed norm")


def empirical_reabsorption_constant(op: OperatorMatrix, samples: int = 256, seed: int = 0) -> float:
    """Largest sampled ratio of the negative energy to the energy above ``sbar``.

    The samples are i.i.d. standard normal grid functions. The value is a
    lower bound for the reabsorption constant ``c0 * gamma``; see
    :func:`reabsorption_bound` for the supremum over the whole grid space.
    """
    if not op.hypothesis.mu0_ok:
        raise HypothesisViolation("no positive mass above sbar", op.hypothesis)
    if not np.any(op.minus_matrix):
        return 0.0
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((samples, op.n))
    num = np.einsum("ij,jk,ik->i", u, op.minus_matrix, u)
    den = np.einsum("ij,jk,ik->i", u, op.upper_matrix, u)
    return float(np.max(num / den))


def reabsorption_bound(op: OperatorMatrix) -> float:
    """Supremum over grid functions of the ratio sampled by :func:`empirical_reabsorption_constant`."""
    if not np.any(op.minus_matrix):
        return 0.0
    return float(scipy.linalg.eigh(op.minus_matrix, op.upper_matrix, eigvals_only=True)[-1])


def critical_minus_scale(m: SignedMeasure, grid: Grid, t_max: float = 1e6, rtol: float = 1e-10,
                         nodes_per_piece: int = DEFAULT_NODES_PER_PIECE) -> float:
    """Scale ``t*`` of the negative part at which the assembled form stops being positive definite.

    Sweeps ``t`` upward by doubling, then bisects on the sign of the smallest
    eigenvalue of ``assemble(m.scale_minus(t))``. Returns ``inf`` if the form
    is still positive definite at ``t_max``.
    """
    op = assemble(m, grid, nodes_per_piece, force=True)
    negative = op.plus_matrix - op.matrix

    # linearity: assemble(m.scale_minus(t)) == plus - t * negative
    def positive(t):
        mat = op.plus_matrix - t * negative
        return scipy.linalg.eigvalsh(mat, subset_by_index=[0, 0])[0] > 0

    if not positive(0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while positive(hi):
        lo, hi = hi, 2.0 * hi
        if hi > t_max:
            return float("inf")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if positive(mid):
            lo = mid
        else:
            hi = mid
    return hi


def seminorm_ratio_bound(grid: Grid, s_low: float, s_high: float) -> float:
    """Smallest ``C`` with ``[u]_{s_low}^2 <= C [u]_{s_high}^2`` for every grid function."""
    a = component_matrix(grid, s_low)
    b = component_matrix(grid, s_high)
    return float(scipy.linalg.eigh(a, b, eigvals_only=True)[-1])


def seminorm_ratio(u, grid: Grid, s_low: float, s_high: float) -> float:
    return gagliardo_seminorm_sq(u, s_low, grid) / gagliardo_seminorm_sq(u, s_high, grid)
