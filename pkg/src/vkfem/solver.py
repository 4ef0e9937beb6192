"""Sparse linear algebra and Newton's method for the coupled plate system.

The Newton matrix couples the two unknowns antisymmetrically (the direction
of the quadratic coupling flips sign between the two equations), so the
linearised systems are solved by sparse LU; the symmetric positive definite
biharmonic operator used for the initial guess and for coercivity checks
gets a dedicated factorisation helper.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import (DiscreteSolution, assemble_biharmonic, assemble_load,
                       assemble_trilinear_jacobian, assemble_trilinear_vector)
from .femspace import ElementBasis

__all__ = ["SolverError", "NewtonReport", "linear_solve", "spd_solve",
           "is_spd", "newton_solve", "residual", "newton_order"]

_DENSE_SPD_LIMIT = 1200


class SolverError(RuntimeError):
    """Raised when a linear or nonlinear solve fails."""


@dataclass
class NewtonReport:
    """Iteration record of one Newton run."""
    iterations: int
    residual_history: list = field(default_factory=list)
    converged: bool = False


def linear_solve(matrix, rhs, context="linear system"):
    """Solve a sparse square system by LU, verifying the residual.

    Iterative refinement drives the residual to ``1e-10 * ||b||`` when the
    conditioning allows it, and in any case below a normwise backward error
    of ``1e-10`` (``||Ax-b|| <= 1e-10 (||A|| ||x|| + ||b||)``), the sharpest
    contract double precision supports for fourth-order stiffness matrices.
    A singular or badly failing factorisation raises :class:`SolverError`
    naming the context.
    """
    rhs = np.asarray(rhs, dtype=float)
    a = sp.csc_matrix(matrix)
    if a.shape[0] != a.shape[1] or a.shape[0] != len(rhs):
        raise SolverError(f"{context}: non-square system or shape mismatch")
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0.0:
        return np.zeros_like(rhs)
    try:
        lu = spla.splu(a)
        x = lu.solve(rhs)
    except RuntimeError as exc:
        raise SolverError(f"{context}: factorisation failed ({exc})") from exc
    if not np.all(np.isfinite(x)):
        raise SolverError(f"{context}: singular matrix")
    anorm = float(abs(a).sum(axis=1).max())  # induced infinity norm
    for _ in range(8):
        res = rhs - a @ x
        if np.linalg.norm(res) <= 1e-10 * bnorm:
            return x
        x = x + lu.solve(res)
    res = rhs - a @ x
    backward = np.linalg.norm(res) / (anorm * np.linalg.norm(x) + bnorm)
    if backward > 1e-10:
        raise SolverError(
            f"{context}: backward error {backward:.3e} exceeds 1e-10")
    return x


def spd_solve(matrix, context="SPD system"):
    """Factorise a symmetric positive definite sparse matrix.

    Returns a solve callable.  Small systems use a dense Cholesky
    factorisation; larger ones an LU restricted to diagonal pivots whose
    positivity certifies definiteness.  Raises :class:`SolverError` when the
    matrix is not SPD.
    """
    a = sp.csc_matrix(matrix)
    n = a.shape[0]
    asym = abs(a - a.T).max()
    scale = abs(a).max()
    if scale > 0 and asym > 1e-10 * scale:
        raise SolverError(f"{context}: matrix is not symmetric")
    if n <= _DENSE_SPD_LIMIT:
        try:
            chol = scipy.linalg.cho_factor(a.toarray())
        except scipy.linalg.LinAlgError as exc:
            raise SolverError(f"{context}: not positive definite") from exc
        return lambda b: scipy.linalg.cho_solve(chol, b)
    try:
        lu = spla.splu(a, diag_pivot_thresh=0.0, permc_spec="MMD_AT_PLUS_A",
                       options={"SymmetricMode": True})
    except RuntimeError as exc:
        raise SolverError(f"{context}: not positive definite") from exc
    if np.any(lu.U.diagonal() <= 0.0):
        raise SolverError(f"{context}: not positive definite")
    return lu.solve


def is_spd(matrix):
    """True when the symmetric sparse matrix is positive definite."""
    try:
        spd_solve(matrix)
    except SolverError:
        return False
    return True


class NewtonSystem:
    """Assembled operators of one discrete problem, reused across iterates."""

    def __init__(self, mesh, dofmap, method=None, penalty=None, loads=None,
                 quad_degree=8):
        if loads is None:
            raise ValueError("loads=(f, g) is required")
        f, g = loads
        self.dofmap = dofmap
        self.method = dofmap.method if method is None else method
        self.basis = ElementBasis(dofmap)
        self.stiffness = assemble_biharmonic(mesh, dofmap, method, penalty)
        self.block_stiffness = sp.block_diag(
            (self.stiffness, self.stiffness), format="csr")
        self.load = assemble_load(f, g, mesh, dofmap, quad_degree)
        self.load_scale = max(1.0, np.linalg.norm(self.load))

    def residual(self, psi):
        x = np.concatenate([psi.u, psi.v])
        return (self.block_stiffness @ x
                + assemble_trilinear_vector(psi, psi, self.basis) - self.load)

    def jacobian(self, psi):
        return self.block_stiffness + assemble_trilinear_jacobian(psi, self.basis)


def newton_solve(mesh, dofmap, method=None, penalty=None, loads=None,
                 tol=1e-10, maxit=50, quad_degree=8):
    """Newton iteration for the discrete clamped-plate system.

    The iteration starts from the zero pair, whose first Newton step is
    exactly the decoupled linear biharmonic solve; each further step solves
    the exact linearisation (biharmonic operator plus twice the cubic
    coupling at the current iterate).  Convergence means the residual norm
    falls below ``tol * max(1, ||load||)`` or below the attainable
    floating-point floor of the residual evaluation, whichever is larger.
    ``residual_history`` records the norms starting at the zero iterate, so
    zero loads converge after one iteration.

    Returns
    -------
    (DiscreteSolution, NewtonReport)
        ``report.converged`` is False when ``maxit`` was exhausted; linear
        solver failures raise :class:`SolverError`.
    """
    if tol <= 0.0 or maxit < 1:
        raise ValueError("tol must be positive and maxit >= 1")
    system = NewtonSystem(mesh, dofmap, method, penalty, loads, quad_degree)
    n = dofmap.n_global
    label = f"{system.method} (ndof {n})"
    abs_stiffness = abs(system.block_stiffness)
    eps = np.finfo(float).eps
    target = tol * system.load_scale

    psi = DiscreteSolution(system.method, np.zeros(n), np.zeros(n), dofmap)
    res = -system.load  # residual at the zero iterate
    history = [float(np.linalg.norm(res))]
    converged = False
    iterations = 0
    for it in range(maxit):
        # at the zero iterate the Jacobian is the bare biharmonic operator,
        # so the first step is the decoupled linear solve
        delta = linear_solve(system.jacobian(psi), -res,
                             context=f"Newton step {it}, {label}")
        psi.u += delta[:n]
        psi.v += delta[n:]
        iterations += 1
        res = system.residual(psi)
        history.append(float(np.linalg.norm(res)))
        x = np.abs(np.concatenate([psi.u, psi.v]))
        floor = 4.0 * eps * (np.linalg.norm(abs_stiffness @ x)
                             + system.load_scale)
        if history[-1] <= max(target, floor):
            converged = True
            break
    return psi, NewtonReport(iterations, history, converged)


def residual(psi, loads, penalty=None, quad_degree=8):
    """Nonlinear residual vector of a coefficient pair, one entry per dof."""
    system = NewtonSystem(psi.dofmap.mesh, psi.dofmap, psi.method, penalty,
                          loads, quad_degree)
    return system.residual(psi)


def newton_order(history, floor=0.0):
    """Least-squares convergence order fitted from a residual history.

    Fits ``log r_{k+1}`` against ``log r_k`` over the strictly decreasing
    prefix of residuals above ``floor`` (entries at the floating-point floor
    flatten the fit and are dropped); requires at least three usable
    residuals.
    """
    r = []
    for h in history:
        if h <= floor or (r and h >= r[-1]):
            break
        r.append(h)
    if len(r) < 3:
        raise ValueError("need at least three residuals above the floor")
    r = np.asarray(r, dtype=float)
    return float(np.polyfit(np.log(r[:-1]), np.log(r[1:]), 1)[0])
