import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from mixfrac import (Atom, Density, Grid, HypothesisViolation, IndefiniteForm, SignedMeasure, assemble,
                     component_matrix, gagliardo_seminorm_sq, inner, inner_minus, inner_plus, norm_mixed,
                     norm_X)
from mixfrac.operator import (critical_minus_scale, empirical_reabsorption_constant, reabsorption_bound,
                              seminorm_ratio, seminorm_ratio_bound)

from conftest import MEASURES, laplacian_only

SMALL = Grid(0.0, 1.0, 3)


def test_assembly_examples():
    tri = np.array([[32.0, -16.0, 0.0], [-16.0, 32.0, -16.0], [0.0, -16.0, 32.0]])
    np.testing.assert_allclose(assemble(laplacian_only(), SMALL).matrix, tri, rtol=1e-15)
    both = SignedMeasure((Atom(1.0, 1.0), Atom(0.0, 1.0)), ())
    np.testing.assert_allclose(assemble(both, SMALL).matrix, tri + np.eye(3), rtol=1e-15)


def test_signed_assembly_flips_fractional_off_diagonals():
    g = Grid(0.0, 1.0, 9)
    alpha = 0.01
    m = SignedMeasure((Atom(1.0, 1.0),), (Atom(0.5, alpha),), 1.0)
    op = assemble(m, g)
    expected = component_matrix(g, 1.0) - alpha * component_matrix(g, 0.5)
    np.testing.assert_allclose(op.matrix, expected, rtol=1e-14)
    # beyond the tridiagonal band only the flipped fractional entries remain
    assert np.all(op.matrix[0, 2:] > 0)


def test_hypothesis_gate_and_force():
    m = SignedMeasure((Atom(0.25, 1.0),), (), 0.5)
    with pytest.raises(HypothesisViolation):
        assemble(m, SMALL)
    assert assemble(m, SMALL, force=True).matrix.shape == (3, 3)


measure_st = st.builds(
    lambda w1, a, d, wm: SignedMeasure((Atom(1.0, w1), Atom(a, 0.5), Density(0.5, 0.9, d)),
                                       (Atom(0.2, wm),), 0.5),
    st.floats(0.1, 3.0), st.floats(0.5, 1.0), st.floats(0.0, 2.0), st.floats(0.001, 0.05))


@settings(max_examples=30, deadline=None)
@given(measure_st, measure_st)
def test_assembly_linear(m1, m2):
    g = Grid(0.0, 2.0, 12)
    both = assemble(m1 + m2, g, 8).matrix
    parts = assemble(m1, g, 8).matrix + assemble(m2, g, 8).matrix
    assert np.max(np.abs(both - parts)) <= 1e-13 * np.max(np.abs(parts))


@settings(max_examples=30, deadline=None)
@given(measure_st, st.integers(0, 2**32 - 1))
def test_form_matrix_consistency_and_symmetry(m, seed):
    g = Grid(0.0, 1.0, 15)
    op = assemble(m, g, 8)
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal((2, g.n))
    direct = g.h * v @ (op.matrix @ u)
    assert math.isclose(inner(u, v, op), direct, rel_tol=1e-12, abs_tol=1e-12 * abs(direct) + 1e-13)
    assert math.isclose(inner(u, v, op), inner(v, u, op), rel_tol=1e-13, abs_tol=1e-13)
    assert math.isclose(inner_plus(u, v, op) - inner_minus(u, v, op), inner(u, v, op),
                        rel_tol=1e-12, abs_tol=1e-10)


def test_single_atom_forms():
    g = Grid(0.0, 1.0, 20)
    op = assemble(laplacian_only(), g)
    u = np.sin(np.pi * g.x) + 0.3 * g.x
    assert math.isclose(inner(u, u, op), gagliardo_seminorm_sq(u, 1.0, g), rel_tol=1e-13)
    assert inner_minus(u, u, op) == 0.0
    assert norm_mixed(u, op) == norm_X(u, op)


def test_norm_mixed_below_norm_X():
    g = Grid(0.0, 1.0, 31)
    op = assemble(MEASURES["signed"], g)
    rng = np.random.default_rng(7)
    for _ in range(100):
        u = rng.standard_normal(g.n)
        assert norm_mixed(u, op) <= norm_X(u, op)


def test_indefinite_form_raises():
    g = Grid(0.0, 1.0, 15)
    m = SignedMeasure((Atom(1.0, 1.0),), (Atom(0.0, 1e4),), 0.5)
    op = assemble(m, g)
    with pytest.raises(IndefiniteForm):
        norm_mixed(np.ones(g.n), op)


def test_min_eigenvalue_monotone_in_minus_weight():
    g = Grid(0.0, 1.0, 31)
    base = SignedMeasure((Atom(1.0, 1.0), Atom(0.75, 0.5)), (Atom(0.25, 0.01), Atom(0.1, 0.02)), 0.5)
    values = [assemble(base.scale_minus(t), g).min_eigenvalue() for t in (1, 2, 4, 8, 16)]
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_critical_scale_matches_generalized_eigenvalue():
    g = Grid(0.0, 1.0, 31)
    m = SignedMeasure((Atom(1.0, 1.0),), (Atom(0.25, 1.0),), 0.5)
    t_star = critical_minus_scale(m, g)
    op = assemble(m, g)
    # plus - t * minus is singular where t = 1 / max eig(minus, plus)
    oracle = 1.0 / scipy.linalg.eigh(op.minus_matrix, op.plus_matrix, eigvals_only=True)[-1]
    assert 0 < t_star < np.inf
    assert math.isclose(t_star, oracle, rel_tol=1e-8)
    assert assemble(m.scale_minus(0.99 * t_star), g).min_eigenvalue() > 0
    assert assemble(m.scale_minus(1.01 * t_star), g).min_eigenvalue() < 0


def test_reabsorption_constant():
    g = Grid(0.0, 1.0, 127)
    assert empirical_reabsorption_constant(assemble(laplacian_only(), g)) == 0.0
    m = SignedMeasure((Atom(1.0, 1.0),), (Atom(0.25, 0.01),), 0.5)
    op = assemble(m, g)
    value = empirical_reabsorption_constant(op, seed=3)
    assert 0 < value < 1
    assert value <= reabsorption_bound(op) * (1 + 1e-12)
    doubled = empirical_reabsorption_constant(assemble(m.scale_minus(2.0), g), seed=3)
    assert math.isclose(doubled, 2 * value, rel_tol=1e-12)
    assert empirical_reabsorption_constant(op, seed=3) == value


def test_seminorm_ratio_bounded():
    g = Grid(0.0, 1.0, 31)
    bound = seminorm_ratio_bound(g, 0.25, 0.75)
    assert np.isfinite(bound) and bound > 0
    rng = np.random.default_rng(11)
    for _ in range(50):
        u = rng.standard_normal(g.n)
        assert seminorm_ratio(u, g, 0.25, 0.75) <= bound * (1 + 1e-10)
