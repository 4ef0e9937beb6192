import numpy as np
import pytest
import scipy.sparse as sp

from vkfem import (DiscreteSolution, SolverError, assemble_biharmonic,
                   assemble_load, build_dofmap, is_spd, linear_solve,
                   newton_order, newton_solve, residual, spd_solve,
                   uniform_refine)
from vkfem.femspace import DofMap
from vkfem.problems import exact_square


def loads_of(exact):
    return (exact.f, exact.g)


def test_identity_system():
    b = np.array([3.0, -1.0, 2.5])
    x = linear_solve(sp.identity(3, format="csr"), b)
    assert np.allclose(x, b, atol=1e-14)


def test_one_by_one_morley_system(two_tri):
    dm = build_dofmap(two_tri, "morley")
    a = assemble_biharmonic(two_tri, dm)
    x = linear_solve(a, np.array([2.0]))
    assert x[0] == pytest.approx(2.0 / a[0, 0], rel=1e-12)


def test_random_spd_against_dense_oracle():
    rng = np.random.default_rng(12)
    m = rng.standard_normal((50, 50))
    a = m.T @ m + np.eye(50)
    b = rng.standard_normal(50)
    x = linear_solve(sp.csr_matrix(a), b)
    assert np.abs(x - np.linalg.solve(a, b)).max() < 1e-9


def test_singular_matrix_raises():
    a = sp.csr_matrix(np.array([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(SolverError):
        linear_solve(a, np.array([1.0, 1.0]))


def test_shape_mismatch_raises():
    with pytest.raises(SolverError):
        linear_solve(sp.identity(3, format="csr"), np.ones(4))


def test_spd_detection():
    assert is_spd(sp.diags([2.0, 1.0, 5.0]).tocsc())
    assert not is_spd(sp.diags([2.0, -1.0, 5.0]).tocsc())
    # nonsymmetric matrices are rejected
    assert not is_spd(sp.csr_matrix(np.array([[1.0, 1.0], [0.0, 1.0]])))
    # large sparse path (SuperLU pivots)
    n = 2000
    lap = sp.diags([-np.ones(n - 1), 2.0 * np.ones(n), -np.ones(n - 1)],
                   [-1, 0, 1]).tocsc()
    assert is_spd(lap)
    assert not is_spd((lap - 4.0 * sp.identity(n)).tocsc())


def test_spd_solve_solves():
    rng = np.random.default_rng(13)
    m = rng.standard_normal((40, 40))
    a = sp.csr_matrix(m.T @ m + 40 * np.eye(40))
    b = rng.standard_normal(40)
    solve = spd_solve(a)
    assert np.abs(a @ solve(b) - b).max() < 1e-9


def test_newton_zero_loads_one_iteration(square1):
    dm = build_dofmap(square1, "morley")
    zero = lambda x, y: np.zeros_like(x)
    psi, report = newton_solve(square1, dm, loads=(zero, zero))
    assert report.converged
    assert report.iterations == 1
    assert np.abs(psi.u).max() == 0.0 and np.abs(psi.v).max() == 0.0


def test_newton_tiny_loads_two_iterations(square1):
    dm = build_dofmap(square1, "c0ip")
    ex = exact_square()
    tiny_f = lambda x, y: 1e-8 * ex.f(x, y)
    tiny_g = lambda x, y: 1e-8 * ex.g(x, y)
    psi, report = newton_solve(square1, dm, loads=(tiny_f, tiny_g))
    assert report.converged
    assert report.iterations <= 2


def test_newton_converges_and_history_decreases(square2):
    ex = exact_square()
    for method in ("morley", "c0ip", "dg"):
        dm = build_dofmap(square2, method)
        psi, report = newton_solve(square2, dm, loads=loads_of(ex))
        assert report.converged
        h = report.residual_history
        assert all(h[k + 1] < h[k] for k in range(len(h) - 1))


def test_newton_quadratic_order(square2):
    ex = exact_square()
    dm = build_dofmap(square2, "morley")
    psi, report = newton_solve(square2, dm, loads=loads_of(ex))
    order = newton_order(report.residual_history, floor=1e-11)
    assert order >= 1.7


def test_newton_order_needs_three_residuals():
    with pytest.raises(ValueError):
        newton_order([1.0, 0.5])


def test_residual_of_zero_is_minus_load(square1):
    ex = exact_square()
    dm = build_dofmap(square1, "dg")
    load = assemble_load(ex.f, ex.g, square1, dm)
    zero = DiscreteSolution("dg", np.zeros(dm.n_global),
                            np.zeros(dm.n_global), dm)
    res = residual(zero, loads_of(ex))
    assert np.abs(res + load).max() < 1e-14 * max(1.0, np.abs(load).max())


def test_residual_small_at_converged_solution(square1):
    ex = exact_square()
    dm = build_dofmap(square1, "c0ip")
    psi, report = newton_solve(square1, dm, loads=loads_of(ex))
    res = residual(psi, loads_of(ex))
    assert np.linalg.norm(res) == pytest.approx(report.residual_history[-1],
                                                rel=1e-10)


def test_newton_invalid_arguments(square1):
    dm = build_dofmap(square1, "morley")
    zero = lambda x, y: np.zeros_like(x)
    with pytest.raises(ValueError):
        newton_solve(square1, dm, loads=(zero, zero), tol=0.0)
    with pytest.raises(ValueError):
        newton_solve(square1, dm, loads=(zero, zero), maxit=0)
    with pytest.raises(ValueError):
        newton_solve(square1, dm)


def test_method_solutions_pairwise_close(square2):
    # distances between the three converged solutions are of the same
    # magnitude as their errors (sanity on the common unified norm)
    from vkfem import error_norm, to_dg_coefficients, unified_h_norm
    ex = exact_square()
    solutions, errors = {}, {}
    for method in ("morley", "c0ip", "dg"):
        dm = build_dofmap(square2, method)
        psi, _ = newton_solve(square2, dm, loads=loads_of(ex))
        solutions[method] = psi
        errors[method] = error_norm(psi, ex, "h")[2]
    dg_dm = build_dofmap(square2, "dg")
    embed = {m: (to_dg_coefficients(solutions[m].dofmap, solutions[m].u),
                 to_dg_coefficients(solutions[m].dofmap, solutions[m].v))
             for m in solutions}
    for a, b in (("morley", "c0ip"), ("morley", "dg"), ("c0ip", "dg")):
        du = embed[a][0] - embed[b][0]
        dv = embed[a][1] - embed[b][1]
        dist = np.hypot(unified_h_norm(dg_dm, du), unified_h_norm(dg_dm, dv))
        scale = max(errors[a], errors[b])
        assert 0.05 * scale < dist < 5.0 * scale


def permuted_dofmap(dm, rng):
    perm = rng.permutation(dm.n_global)
    element_dofs = np.where(dm.element_dofs >= 0,
                            perm[np.where(dm.element_dofs >= 0,
                                          dm.element_dofs, 0)], -1)
    return DofMap(dm.mesh, dm.method, dm.n_global, element_dofs), perm


def test_newton_permutation_invariance(square1):
    ex = exact_square()
    dm = build_dofmap(square1, "morley")
    psi, _ = newton_solve(square1, dm, loads=loads_of(ex))
    rng = np.random.default_rng(14)
    dmp, perm = permuted_dofmap(dm, rng)
    psi_p, _ = newton_solve(square1, dmp, loads=loads_of(ex))
    back_u = psi_p.u[perm]
    back_v = psi_p.v[perm]
    scale = max(1.0, np.abs(psi.u).max())
    assert np.abs(back_u - psi.u).max() < 1e-9 * scale
    assert np.abs(back_v - psi.v).max() < 1e-9 * scale
