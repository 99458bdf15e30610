"""Maximum-principle harnesses and the capped-parabola counterexample.

Two conventions for the fractional Laplacian of the capped parabola ``u_R``
are in play. ``"paper"`` is the one-sided principal value
``PV int (u(x) - u(y)) |x-y|^{-1-2s} dy`` with no constant in front;
``"normalized"`` is the operator of :mod:`mixfrac.kernel`, which equals
``2 c_{1,s}`` times the former.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import quadrature
from .errors import (DomainError, IndefiniteForm, NotFound,
                     PreconditionError, SingularSystem)
from .kernel import Exterior, Grid, GridFunction, frac_laplacian_pointwise, normalization_constant, values_on
from .measure import DEFAULT_NODES_PER_PIECE, Atom, SignedMeasure, atomize
from .operator import OperatorMatrix, assemble

CONVENTIONS = ("paper", "normalized")
# crossover guard for the s = 1/2 branch of the closed forms
HALF_GUARD = 1e-8
CONFIRM_TOL = 1e-8
MP_TOL = 1e-10


def solve_dirichlet(op: OperatorMatrix, f) -> GridFunction:
    """Solve ``A u = f`` at the interior nodes (exterior data zero)."""
    fv = values_on(f, op.grid)
    try:
        factor = scipy.linalg.cho_factor(op.matrix)
    except np.linalg.LinAlgError as exc:
        raise IndefiniteForm("operator matrix is not positive definite") from exc
    diag = np.abs(np.diag(factor[0]))
    if diag.min() <= np.finfo(float).eps * diag.max():
        raise SingularSystem("operator matrix is numerically singular")
    return GridFunction(op.grid, scipy.linalg.cho_solve(factor, fv))


@dataclass(frozen=True)
class MPReport:
    trials: int
    min_solution_value: float
    violations: int
    seed: int


def _require_unsigned(m: SignedMeasure):
    if m.has_minus:
        raise PreconditionError("maximum-principle harnesses need a measure without negative part")


def weak_mp_trials(m: SignedMeasure, grid: Grid, trials: int = 100, seed: int = 0,
                   tol: float = MP_TOL, nodes_per_piece: int = DEFAULT_NODES_PER_PIECE) -> MPReport:
    """Solve for ``trials`` random nonnegative right-hand sides and count negative solutions.

    Right-hand sides are i.i.d. uniform on [0, 1] at the nodes, drawn from
    per-trial streams spawned from ``seed``; an all-zero draw is redrawn.
    """
    _require_unsigned(m)
    op = assemble(m, grid, nodes_per_piece)
    streams = np.random.SeedSequence(seed).spawn(trials)
    overall = np.inf
    violations = 0
    for ss in streams:
        rng = np.random.default_rng(ss)
        f = rng.uniform(0.0, 1.0, grid.n)
        while not np.any(f):
            f = rng.uniform(0.0, 1.0, grid.n)
        low = float(np.min(solve_dirichlet(op, f).values))
        overall = min(overall, low)
        violations += low < -tol
    return MPReport(trials, overall, violations, seed)


@dataclass(frozen=True)
class StrongMPReport:
    checked: bool
    passed: bool
    min_value: float
    fractional_mass: float


def strong_mp_check(m: SignedMeasure, grid: Grid, f, tol: float = 1e-12,
                    nodes_per_piece: int = DEFAULT_NODES_PER_PIECE) -> StrongMPReport:
    """Check that a nonnegative, nonzero source gives a strictly positive solution.

    Positivity is tested as ``u_i > tol * max|u|`` at every interior node. A
    zero source is reported as unchecked.
    """
    _require_unsigned(m)
    fv = values_on(f, grid)
    if np.any(fv < 0):
        raise PreconditionError("source must be nonnegative")
    frac = m.fractional_plus_mass()
    if not np.any(fv):
        return StrongMPReport(False, True, 0.0, frac)
    u = solve_dirichlet(assemble(m, grid, nodes_per_piece), fv).values
    scale = float(np.max(np.abs(u)))
    low = float(np.min(u))
    return StrongMPReport(True, low > tol * scale, low, frac)


def u_R_eval(x, R: float):
    """Capped parabola: ``x^2 - 1`` for ``|x| <= 1 + R``, ``(1+R)^2 - 1`` beyond."""
    x = np.asarray(x, dtype=float)
    cap = 1.0 + R
    out = np.where(np.abs(x) <= cap, x * x - 1.0, cap * cap - 1.0)
    return float(out) if out.ndim == 0 else out


def _check_args(x: float, R: float, s: float):
    if not R > 0:
        raise DomainError(f"R must be positive, got {R}")
    if not 0.0 < s < 1.0:
        raise DomainError(f"s must lie in (0, 1), got {s}")
    if not -1.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [-1, 1], got {x}")


def _power_diff_over(p: float, q: float, eps: float) -> float:
    # (p**eps - q**eps) / eps, tending to log(p/q) as eps -> 0
    if eps == 0.0:
        return math.log(p / q)
    return (math.expm1(eps * math.log(p)) - math.expm1(eps * math.log(q))) / eps


def tail_terms(x: float, R: float, s: float) -> tuple[float, float]:
    """Contributions of the two outer plateaus, ``y < -1-R`` and ``y > 1+R``."""
    _check_args(x, R, s)
    p, q = 1.0 + R + x, 1.0 + R - x
    left = -q * p ** (1 - 2 * s) / (2 * s)
    right = -p * q ** (1 - 2 * s) / (2 * s)
    return left, right


def inner_term(x: float, R: float, s: float) -> float:
    """Principal value over the parabolic part ``|y| < 1+R``."""
    _check_args(x, R, s)
    p, q = 1.0 + R + x, 1.0 + R - x
    if abs(s - 0.5) < HALF_GUARD:
        return 2 * x * math.log(p / q) - 2 - 2 * R
    eps = 1.0 - 2.0 * s
    return (2 * x * _power_diff_over(p, q, eps)
            - (p ** (2 - 2 * s) + q ** (2 - 2 * s)) / (2 - 2 * s))


def fraclap_uR_closed(x: float, R: float, s: float) -> float:
    """Closed form of the one-sided PV integral of ``u_R`` at ``x`` (``"paper"`` convention)."""
    left, right = tail_terms(x, R, s)
    return left + right + inner_term(x, R, s)


def g_eval(x: float, R: float, s: float) -> float:
    """Aggregated closed form for ``s != 1/2``, written term by term as a single expression."""
    _check_args(x, R, s)
    if abs(s - 0.5) < HALF_GUARD:
        raise DomainError("g is the s != 1/2 branch; use h_eval at s = 1/2")
    p, q = 1.0 + R + x, 1.0 + R - x
    return (-(q * p ** (1 - 2 * s) + p * q ** (1 - 2 * s)) / (2 * s)
            + 2 * x / (1 - 2 * s) * (p ** (1 - 2 * s) - q ** (1 - 2 * s))
            - (p ** (2 - 2 * s) + q ** (2 - 2 * s)) / (2 - 2 * s))


def h_eval(x: float, R: float) -> float:
    _check_args(x, R, 0.5)
    return 2 * x * math.log((1 + R + x) / (1 + R - x)) - 4 - 4 * R


def edge_value(R: float, s: float) -> float:
    """``g_{R,s}(1)``, or ``h_R(1)`` on the ``s = 1/2`` branch."""
    if abs(s - 0.5) < HALF_GUARD:
        return h_eval(1.0, R)
    return g_eval(1.0, R, s)


def find_R0(alpha: float, s: float, R_max: float = 1e8, resolution: float = 1e-6) -> float:
    """Smallest radius with ``g_{R,s}(1) <= -2/alpha``, located by doubling then bisection.

    The returned value always satisfies the inequality; the radius just below
    it (by less than ``resolution``) does not.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    target = -2.0 / alpha

    def ok(R):
        return edge_value(R, s) <= target

    hi = 1.0
    if ok(hi):
        lo = 0.5
        while ok(lo):
            hi, lo = lo, 0.5 * lo
            if lo < 1e-300:
                raise NotFound("inequality holds for arbitrarily small R")
    else:
        lo = hi
        while not ok(hi):
            lo, hi = hi, 2.0 * hi
            if hi > R_max:
                raise NotFound(f"no R <= {R_max} satisfies g(1) <= {target}")
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class CounterexampleReport:
    alpha: float
    s: float
    R0: float
    grid_residual_min: float
    u_max_interior: float
    closedform_oracle_dev: float
    convention: str = "paper"
    # coefficient in front of the fractional term in the chosen convention
    operator_alpha: float = 0.0
    x: np.ndarray = field(default=None, repr=False, compare=False)
    u: np.ndarray = field(default=None, repr=False, compare=False)
    residual: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def confirmed(self) -> bool:
        return self.grid_residual_min >= -CONFIRM_TOL and self.u_max_interior < 0


def _uR_callable(R: float):
    return lambda z: u_R_eval(z, R)


def oracle_pv(x: float, R: float, s: float, tol: float = 1e-10) -> float:
    """Quadrature value of the one-sided PV integral (kernel oracle divided by ``2 c_{1,s}``)."""
    cap = 1.0 + R
    value = frac_laplacian_pointwise(_uR_callable(R), x, s, tol, h0=2e-3, breakpoints=(-cap, cap),
                                     exterior=Exterior(cap, cap * cap - 1.0))
    return value / (2.0 * normalization_constant(1, s))


def verify_counterexample(alpha: float, s: float, n: int = 201, convention: str = "paper",
                          oracle_points: int = 11) -> CounterexampleReport:
    """Check ``-u_R'' - alpha (-Delta)^s u_R >= 0`` on a grid of (-1, 1) with ``R = find_R0``.

    ``-u_R''`` is exactly ``-2`` inside the interval. In the normalized
    convention the fractional term is ``2 c_{1,s}`` times the closed form and
    its coefficient is ``alpha / (2 c_{1,s})``, which leaves the residual
    unchanged. The closed form is cross-checked against the quadrature
    oracle at ``oracle_points`` equispaced nodes of [-1, 1].
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")
    R0 = find_R0(alpha, s)
    grid = Grid(-1.0, 1.0, n)
    x = grid.x
    pv = np.array([fraclap_uR_closed(float(xi), R0, s) for xi in x])
    if convention == "paper":
        coeff, frac = alpha, pv
    else:
        scale = 2.0 * normalization_constant(1, s)
        coeff, frac = alpha / scale, scale * pv
    residual = -2.0 - coeff * frac
    u = u_R_eval(x, R0)
    dev = 0.0
    for xi in np.linspace(-1.0, 1.0, oracle_points):
        closed = fraclap_uR_closed(float(xi), R0, s)
        dev = max(dev, abs(oracle_pv(float(xi), R0, s) - closed) / abs(closed))
    return CounterexampleReport(alpha, s, R0, float(residual.min()), float(u.max()), dev,
                                convention, coeff, x, u, residual)


def counterexample_measure(alpha: float, s: float, sbar: float = 1.0) -> SignedMeasure:
    """``delta_1 - alpha delta_s`` (needs ``s < sbar`` to satisfy the support condition)."""
    return SignedMeasure((Atom(1.0, 1.0),), (Atom(s, alpha),), sbar)


def tail_norm(u, m: SignedMeasure, tol: float = 1e-8, breakpoints=(),
              nodes_per_piece: int = DEFAULT_NODES_PER_PIECE) -> float:
    """``int_{(0,1)} c_{1,s} int |u(x)| / (1 + |x|^{1+2s}) dx dmu+(s)``.

    Endpoint orders carry no weight. The inner integral is split at
    ``breakpoints`` and covered with doubling panels beyond them.
    """
    total = 0.0
    for q in atomize(m, nodes_per_piece):
        if q.sign < 0 or q.s in (0.0, 1.0):
            continue
        budget = quadrature.Budget()
        expo = 1.0 + 2.0 * q.s

        def f(z, expo=expo):
            return np.abs(u(z)) / (1.0 + np.abs(z) ** expo)

        def mirrored(z, f=f):
            return f(z) + f(-z)

        cuts = sorted({0.0, 1.0} | {abs(b) for b in breakpoints})
        body = quadrature.integrate_segments(mirrored, cuts, tol, budget)
        tail = quadrature.integrate_tail(mirrored, cuts[-1], tol, budget, reference=abs(body))
        total += q.w * normalization_constant(1, q.s) * (body + tail)
    return total
