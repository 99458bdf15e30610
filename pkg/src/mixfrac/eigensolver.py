"""Dirichlet spectrum of the discrete superposition operator.

Two independent routes:

* :func:`solve_direct` - dense symmetric eigendecomposition;
* :func:`solve_recursive_rayleigh` - minimize the Rayleigh quotient
  ``<u,u> / ||u||_{L2}^2`` one eigenvalue at a time, each minimization
  restricted to functions orthogonal (in the mixed form) to the
  eigenfunctions already found.

With the lumped mass matrix ``h I`` the generalized problem
``A u = lambda h u`` (forms scaled by ``h``) reduces to the standard
eigenproblem of ``A``; eigenvectors are rescaled so ``h * e.T @ e == 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConvergenceFailure, HypothesisViolation, IndefiniteForm
from .kernel import values_on
from .operator import OperatorMatrix, inner, norm_mixed

GROUP_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class Spectrum:
    lambdas: np.ndarray
    # one eigenvector per column, L2-normalized under h * sum
    vectors: np.ndarray
    groups: tuple
    method: str
    iterations: tuple = field(default=())

    @property
    def k(self) -> int:
        return len(self.lambdas)

    def vector(self, i: int) -> np.ndarray:
        return self.vectors[:, i]


def _check_gate(op: OperatorMatrix, k: int):
    if not op.hypothesis.mu0_ok:
        raise HypothesisViolation("no positive mass above sbar; spectrum undefined", op.hypothesis)
    if not 1 <= k <= op.n:
        raise ValueError(f"need 1 <= k <= {op.n}, got {k}")


def _fix_sign(v: np.ndarray) -> np.ndarray:
    big = np.abs(v) > 1e-8 * np.max(np.abs(v))
    return -v if v[np.argmax(big)] < 0 else v


def _group_indices(lambdas, rel_tol: float) -> tuple:
    groups, current = [], [0]
    for i in range(1, len(lambdas)):
        a, b = lambdas[i - 1], lambdas[i]
        if abs(b - a) < rel_tol * max(abs(a), abs(b)):
            current.append(i)
        else:
            groups.append(tuple(current))
            current = [i]
    groups.append(tuple(current))
    return tuple(groups)


def _finish(lambdas, vectors, method, iterations=()) -> Spectrum:
    lambdas = np.asarray(lambdas, dtype=float)
    vectors = np.array(vectors, dtype=float)
    for j in range(vectors.shape[1]):
        vectors[:, j] = _fix_sign(vectors[:, j])
    lambdas.setflags(write=False)
    vectors.setflags(write=False)
    return Spectrum(lambdas, vectors, _group_indices(lambdas, GROUP_RTOL), method, tuple(iterations))


def solve_direct(op: OperatorMatrix, k: int | None = None) -> Spectrum:
    """Lowest ``k`` eigenpairs by dense symmetric eigendecomposition."""
    k = op.n if k is None else k
    _check_gate(op, k)
    try:
        w, v = scipy.linalg.eigh(op.matrix)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"symmetric eigensolver failed: {exc}") from exc
    if w[0] <= 0:
        raise IndefiniteForm(f"smallest eigenvalue {w[0]:.6e} is not positive")
    return _finish(w[:k], v[:, :k] / np.sqrt(op.h), "direct")


def solve_recursive_rayleigh(op: OperatorMatrix, k: int, tol: float = 1e-14, max_iter: int = 5000,
                             seed: int = 0, residual_tol: float = 1e-11) -> Spectrum:
    """Lowest ``k`` eigenpairs by successive constrained Rayleigh-quotient minimization.

    Each minimizer is found by inverse iteration (shift 0) from a seeded
    random start; after every sweep the iterate is re-projected onto the
    ``<.,.>``-orthogonal complement of the eigenfunctions already accepted.
    An eigenpair is accepted when the Rayleigh quotient moves less than
    ``tol`` (relative) between sweeps and the eigen-residual
    ``||A u - rho u|| / (rho ||u||)`` is below ``residual_tol``.
    """
    _check_gate(op, k)
    h = op.h
    try:
        factor = scipy.linalg.cho_factor(op.matrix)
    except np.linalg.LinAlgError as exc:
        raise IndefiniteForm("assembled form is not positive definite") from exc
    rng = np.random.default_rng(seed)
    found: list[np.ndarray] = []
    # A e_j, cached for the deflation <u, e_j> = h e_j . (A u)
    found_a: list[np.ndarray] = []
    lambdas, iterations = [], []

    def deflate(u):
        for e, ae in zip(found, found_a):
            # <u, e> / <e, e> with <e, e> = h e.A e
            u = u - (h * (ae @ u)) / (h * (ae @ e)) * e
        return u

    for _ in range(k):
        u = deflate(rng.standard_normal(op.n))
        u /= np.sqrt(h * (u @ u))
        rho_old = np.inf
        for it in range(1, max_iter + 1):
            u = scipy.linalg.cho_solve(factor, u)
            u = deflate(deflate(u))
            u /= np.sqrt(h * (u @ u))
            au = op.matrix @ u
            rho = h * (u @ au) / (h * (u @ u))
            if rho <= 0:
                raise IndefiniteForm(f"non-positive Rayleigh quotient {rho:.6e}")
            residual = np.linalg.norm(au - rho * u) / (rho * np.linalg.norm(u))
            if abs(rho - rho_old) <= tol * rho and residual <= residual_tol:
                break
            rho_old = rho
        else:
            raise ConvergenceFailure(f"eigenpair {len(found) + 1} not converged in {max_iter} sweeps")
        found.append(u)
        found_a.append(au)
        lambdas.append(rho)
        iterations.append(it)
    return _finish(lambdas, np.column_stack(found), "recursive", iterations)


@dataclass(frozen=True)
class CheckReport:
    passed: bool
    values: dict


def verify_orthogonality(spec: Spectrum, op: OperatorMatrix, l2_tol: float = 1e-10,
                         form_rtol: float = 1e-8) -> CheckReport:
    """L2-orthonormality and orthogonality in the mixed form."""
    e = spec.vectors
    gram = op.h * (e.T @ e)
    energy = op.h * (e.T @ (op.matrix @ e))
    off = ~np.eye(spec.k, dtype=bool)
    l2_off = float(np.max(np.abs(gram[off]))) if spec.k > 1 else 0.0
    l2_diag = float(np.max(np.abs(np.diag(gram) - 1.0)))
    form_off = float(np.max(np.abs(energy[off]))) if spec.k > 1 else 0.0
    bound = form_rtol * float(np.max(spec.lambdas))
    passed = l2_off <= l2_tol and l2_diag <= l2_tol and form_off <= bound
    return CheckReport(passed, {"l2_offdiag": l2_off, "l2_diag_dev": l2_diag,
                                "form_offdiag": form_off, "form_bound": bound})


def rayleigh_identity(spec: Spectrum, op: OperatorMatrix, rtol: float = 1e-8) -> CheckReport:
    """``<e_k, e_k> = lambda_k`` for every computed pair."""
    devs = [abs(inner(spec.vector(i), spec.vector(i), op) - lam) / (1.0 + lam)
            for i, lam in enumerate(spec.lambdas)]
    worst = max(devs)
    return CheckReport(worst <= rtol, {"max_scaled_dev": worst})


def _eigen_residual(op: OperatorMatrix, v: np.ndarray, lam: float) -> float:
    return float(np.linalg.norm(op.matrix @ v - lam * v) / (abs(lam) * np.linalg.norm(v)))


def multiplicity_groups(spec: Spectrum, op: OperatorMatrix, rel_tol: float = GROUP_RTOL,
                        relation_tol: float = 1e-7, seed: int = 0) -> CheckReport:
    """Group equal eigenvalues and check each group spans an eigenspace.

    For every group a random combination of its vectors must satisfy the
    eigen-relation to ``relation_tol``; adding a vector of a different group
    must break it.
    """
    rng = np.random.default_rng(seed)
    groups = _group_indices(spec.lambdas, rel_tol)
    inside, mixed = [], []
    for g in groups:
        lam = float(np.mean(spec.lambdas[list(g)]))
        combo = spec.vectors[:, list(g)] @ rng.standard_normal(len(g))
        inside.append(_eigen_residual(op, combo, lam))
        others = [i for i in range(spec.k) if i not in g]
        if others:
            j = others[int(rng.integers(len(others)))]
            mixed.append(_eigen_residual(op, combo + spec.vector(j), lam))
    passed = max(inside) <= relation_tol and all(r > relation_tol for r in mixed)
    return CheckReport(passed, {"groups": groups, "max_inside": max(inside),
                                "min_mixed": min(mixed) if mixed else None})


@dataclass(frozen=True)
class Expansion:
    coefficients: np.ndarray
    residual: float
    partial_residuals: np.ndarray
    norm: float


def expand_in_eigenbasis(f, spec: Spectrum, op: OperatorMatrix) -> Expansion:
    """Expand ``f`` in the mixed-form-normalized eigenbasis.

    ``c_i = <f, e_i / ||e_i||>``; residuals are measured in the mixed norm
    after each additional term.
    """
    fv = values_on(f, op.grid)
    basis = np.column_stack([spec.vector(i) / norm_mixed(spec.vector(i), op) for i in range(spec.k)])
    coeffs = op.h * (basis.T @ (op.matrix @ fv))
    partial = np.empty(spec.k)
    approx = np.zeros_like(fv)
    for i in range(spec.k):
        approx = approx + coeffs[i] * basis[:, i]
        partial[i] = norm_mixed(fv - approx, op)
    return Expansion(coeffs, float(partial[-1]), partial, norm_mixed(fv, op))
