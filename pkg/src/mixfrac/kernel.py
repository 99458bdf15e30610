"""Fractional Laplacian on a 1-D interval with exterior-zero data.

Three views of ``(-Delta)^s`` live here:

* :func:`normalization_constant`, the constant ``c_{N,s}`` that makes the
  symmetrized second-difference integral have symbol ``|2 pi xi|^{2s}``;
* :func:`component_matrix`, a dense symmetric Toeplitz discretization;
* :func:`frac_laplacian_pointwise`, an adaptive-quadrature oracle for a
  function given on all of the real line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import toeplitz
from scipy.special import roots_jacobi

from . import quadrature
from .errors import GridMismatch, NonConvergence


@dataclass(frozen=True)
class Grid:
    """Uniform partition of ``(a, b)`` with ``n`` interior nodes."""

    a: float
    b: float
    n: int

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError(f"need b > a, got ({self.a}, {self.b})")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"need at least 2 interior nodes, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n + 1)

    @property
    def x(self) -> np.ndarray:
        return self.a + self.h * np.arange(1, self.n + 1)

    @property
    def length(self) -> float:
        return self.b - self.a

    def subgrid(self, start: int, stop: int) -> "Grid":
        """Grid on the nested interval spanned by interior nodes ``start..stop-1``.

        The spacing is unchanged, so functions on the subgrid embed into this
        grid by zero extension.
        """
        h = self.h
        return Grid(self.a + start * h, self.a + (stop + 1) * h, stop - start)


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function has non-finite samples")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, grid: Grid, f) -> "GridFunction":
        return cls(grid, f(grid.x))


def values_on(u, grid: Grid) -> np.ndarray:
    """Samples of ``u`` (a GridFunction or a plain array) on ``grid``."""
    if isinstance(u, GridFunction):
        if u.grid != grid:
            raise GridMismatch(f"function lives on {u.grid}, expected {grid}")
        return u.values
    v = np.asarray(u, dtype=float)
    if v.shape != (grid.n,):
        raise GridMismatch(f"expected {grid.n} samples, got shape {v.shape}")
    return v


def normalization_constant(N: int, s: float) -> float:
    """``c_{N,s} = 2^{2s-1} Gamma((N+2s)/2) / (pi^{N/2} Gamma(2-s)) * s(1-s)``."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"order {s} outside [0, 1]")
    if s == 0.0 or s == 1.0:
        return 0.0
    return (2.0 ** (2 * s - 1) * math.gamma((N + 2 * s) / 2)
            / (math.pi ** (N / 2) * math.gamma(2 - s)) * s * (1 - s))


def _phi(t: float, eps: float) -> float:
    # (t**eps - 1) / eps, continuous through eps = 0
    if eps == 0.0:
        return math.log(t)
    return math.expm1(eps * math.log(t)) / eps


def toeplitz_weights(s: float, count: int) -> tuple[np.ndarray, float]:
    """Dimensionless interaction weights ``omega_1..omega_count`` and their infinite sum.

    ``omega_k`` is the coefficient of the second difference
    ``2u_i - u_{i+k} - u_{i-k}`` obtained by integrating ``t^{-1-2s}`` against
    the piecewise-linear interpolant of that second difference on ``t >= 1``,
    with the quadratic model ``t^2 (2u_i - u_{i+1} - u_{i-1})`` on ``t < 1``.
    All weights are positive; the series sums to ``1/(2-2s) + 1/(2s)``.
    """
    if not 0.0 < s < 1.0:
        raise ValueError(f"order {s} outside (0, 1)")
    eps = 1.0 - 2.0 * s
    w = np.empty(count)
    if count >= 1:
        w[0] = 1.0 / (2.0 - 2.0 * s) + (1.0 - _phi(2.0, eps)) / (2.0 * s)
    if count >= 2:
        k = np.arange(2, count + 1, dtype=float)
        u = 1.0 / k
        # second difference of t**eps / eps at t = k, written without cancellation
        if eps == 0.0:
            second = np.log1p(-u * u)
        else:
            m = 0.5 * eps * np.log1p(-u * u)
            d = eps * np.arctanh(u)
            second = np.exp(eps * np.log(k)) * 2.0 * (np.expm1(m) * np.cosh(d)
                                                      + 2.0 * np.sinh(0.5 * d) ** 2) / eps
        w[1:] = -second / (2.0 * s)
    return w, 1.0 / (2.0 - 2.0 * s) + 1.0 / (2.0 * s)


def laplacian_matrix(grid: Grid) -> np.ndarray:
    n, h = grid.n, grid.h
    col = np.zeros(n)
    col[0], col[1] = 2.0 / h**2, -1.0 / h**2
    return toeplitz(col)


@lru_cache(maxsize=256)
def _component_matrix(a: float, b: float, n: int, s: float) -> np.ndarray:
    grid = Grid(a, b, n)
    if s == 0.0:
        mat = np.eye(n)
    elif s == 1.0:
        mat = laplacian_matrix(grid)
    else:
        omega, total = toeplitz_weights(s, n - 1)
        scale = 2.0 * normalization_constant(1, s) * grid.h ** (-2.0 * s)
        col = np.empty(n)
        col[0] = 2.0 * total
        col[1:] = -omega
        mat = scale * toeplitz(col)
    mat.setflags(write=False)
    return mat


def component_matrix(grid: Grid, s: float) -> np.ndarray:
    """Dense symmetric matrix of ``(-Delta)^s`` acting on interior samples.

    ``s = 0`` gives the identity, ``s = 1`` the three-point Dirichlet
    Laplacian. In between, row ``i`` is
    ``2 c_{1,s} h^{-2s} sum_{k>=1} omega_k (2u_i - u_{i+k} - u_{i-k})`` with
    samples outside the interior set to zero; the infinite sum of the
    diagonal contributions is taken in closed form. The result is Toeplitz,
    has nonpositive off-diagonals and strictly positive row sums.

    The returned array is cached and read-only.
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"order {s} outside [0, 1]")
    return _component_matrix(float(grid.a), float(grid.b), grid.n, float(s))


def gagliardo_seminorm_sq(u, s: float, grid: Grid | None = None) -> float:
    """Discrete ``[u]_s^2``: lumped L2 at ``s=0``, Dirichlet energy at ``s=1``.

    For ``0 < s < 1`` this is ``h * u.T @ component_matrix(grid, s) @ u`` so the
    seminorm and the matrix quadratic form agree by construction.
    """
    if grid is None:
        grid = u.grid
    v = values_on(u, grid)
    h = grid.h
    if s == 0.0:
        return float(h * np.dot(v, v))
    if s == 1.0:
        padded = np.concatenate(([0.0], v, [0.0]))
        return float(np.sum(np.diff(padded) ** 2) / h)
    return float(h * v @ (component_matrix(grid, s) @ v))


@dataclass(frozen=True)
class Exterior:
    """``u(z) = value`` for every ``|z| >= radius``."""

    radius: float
    value: float


# few nodes on purpose: D(y)/y^2 is smooth, and nodes close to y = 0 only add roundoff
_NEAR_ORDER = 6


def _near_field(second_diff, s: float, h0: float, order: int) -> float:
    # int_0^h0 D(y) y^{-1-2s} dy with D(y)/y^2 smooth: Gauss-Jacobi, weight y^{1-2s}
    t, w = roots_jacobi(order, 0.0, 1.0 - 2.0 * s)
    y = 0.5 * h0 * (t + 1.0)
    g = second_diff(y) / y**2
    return (0.5 * h0) ** (2.0 - 2.0 * s) * float(np.dot(w, g))


def frac_laplacian_pointwise(u, x: float, s: float, tol: float = 1e-10, *,
                             h0: float = 1e-3, breakpoints=(), exterior: Exterior | None = None,
                             max_evals: int = quadrature.DEFAULT_BUDGET) -> float:
    """Evaluate ``c_{1,s} * int (2u(x) - u(x+y) - u(x-y)) |y|^{-1-2s} dy`` by quadrature.

    ``u`` must accept numpy arrays. ``breakpoints`` lists points where ``u``
    is not smooth (panel edges are placed on them). When ``exterior`` is
    given the tail beyond the plateau is added in closed form; otherwise the
    half-line is covered with doubling panels until the extrapolated
    remainder is below ``tol``. The near field ``|y| <= h0`` is a
    Gauss-Jacobi rule for the weight ``|y|^{1-2s}`` applied to
    ``D(y)/y^2``, which is smooth wherever ``u`` is C^2 (``h0`` is shrunk
    below half the distance to the nearest breakpoint).

    Raises NonConvergence once ``max_evals`` integrand evaluations are spent.
    """
    if not 0.0 < s < 1.0:
        raise ValueError(f"order {s} outside (0, 1)")
    budget = quadrature.Budget(max_evals)
    ux = float(u(np.array([x]))[0])

    def second_diff(y):
        y = np.asarray(y, dtype=float)
        return 2.0 * ux - u(x + y) - u(x - y)

    def integrand(y):
        return second_diff(y) * y ** (-1.0 - 2.0 * s)

    kinks = [abs(b - x) for b in breakpoints if b != x]
    if exterior is not None:
        kinks += [abs(exterior.radius - x), abs(exterior.radius + x)]
    kinks = [k for k in kinks if k > 0]
    if kinks:
        h0 = min(h0, 0.5 * min(kinks))

    near = _near_field(second_diff, s, h0, _NEAR_ORDER)
    budget.charge(2 * _NEAR_ORDER)

    if exterior is not None:
        end = abs(x) + exterior.radius
        edges = [h0, end] + [k for k in kinks if h0 < k < end]
        far = quadrature.integrate_segments(integrand, sorted(edges), tol, budget,
                                            atol=1e-3 * tol * abs(near))
        tail = (2.0 * ux - 2.0 * exterior.value) * end ** (-2.0 * s) / (2.0 * s)
    else:
        end = max([h0 * 2.0] + [2.0 * k for k in kinks])
        edges = [h0, end] + [k for k in kinks if h0 < k < end]
        far = quadrature.integrate_segments(integrand, sorted(edges), tol, budget)
        tail = quadrature.integrate_tail(integrand, end, tol, budget,
                                         reference=abs(near) + abs(far))
    total = near + far + tail
    if not np.isfinite(total):
        raise NonConvergence(f"non-finite fractional Laplacian at x={x}")
    return 2.0 * normalization_constant(1, s) * total
