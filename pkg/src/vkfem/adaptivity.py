"""Residual error estimators, bulk marking and refinement loops.

Each method gets the residual estimator matching its norm: shared volume
terms ``h_K^4 (||f + [u,v]||^2 + ||g - [u,u]/2||^2)`` per element plus

* ``morley`` -- tangential Hessian jumps ``h_E ||[D2 w] tau||^2`` on
  interior edges,
* ``c0ip``  -- normal-normal Hessian jumps ``h_E ||[D2 w nu] . nu||^2`` on
  interior edges and gradient jumps ``h_E^-1 ||[grad w]||^2`` on all edges,
* ``dg``    -- value jumps ``h_E^-3 ||[w]||^2`` and gradient jumps on all
  edges,

for both components ``w = u, v``.  Edge contributions are split half/half
between the two adjacent elements (fully to the one element on the
boundary); the total is attribution-independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analysis import (ConvergenceRecord, error_norm, oscillation)
from .assembly import PenaltyConfig, bracket_elements
from .femspace import EdgeBasis, ElementBasis, build_dofmap, element_hessians
from .mesh import nvb_refine, uniform_refine
from .quadrature import edge_rule, triangle_rule
from .solver import SolverError, newton_solve

__all__ = ["LocalEstimates", "AdaptiveConfig", "LevelState", "estimate",
           "dorfler_mark", "adaptive_levels", "adaptive_loop",
           "uniform_study", "METHOD_NORM"]

#: Norm in which each method's error is naturally measured.
METHOD_NORM = {"morley": "nc", "c0ip": "ip", "dg": "dg"}


@dataclass
class LocalEstimates:
    """Squared local error indicators of one solve."""
    eta2: np.ndarray
    method: str

    @property
    def total(self):
        return float(np.sqrt(self.eta2.sum()))


@dataclass
class AdaptiveConfig:
    """Knobs of the adaptive loop."""
    theta: float = 0.5
    max_levels: int = 12
    max_ndof: Optional[int] = None
    penalty: PenaltyConfig = field(default_factory=PenaltyConfig)
    newton_tol: float = 1e-10
    newton_maxit: int = 50
    quad_degree: int = 8

    def __post_init__(self):
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("bulk parameter theta must be in (0, 1]")
        if self.max_levels < 1:
            raise ValueError("max_levels must be at least 1")


@dataclass
class LevelState:
    """Everything produced on one level of a refinement loop."""
    level: int
    mesh: object
    solution: object
    estimates: LocalEstimates
    record: ConvergenceRecord


def _edge_field_jumps(eb, coef, nq):
    """Value and gradient jumps of a field at the first ``nq`` edge points."""
    vj = 0.0
    gj = 0.0
    coef = np.asarray(coef)
    for side, sign in ((0, 1.0), (1, -1.0)):
        dofs = eb.dofs[side]
        local = np.where(dofs >= 0, coef[np.where(dofs >= 0, dofs, 0)], 0.0)
        vj = vj + sign * np.einsum("eqj,ej->eq", eb.values[side], local)
        gj = gj + sign * np.einsum("eqja,ej->eqa", eb.gradients[side], local)
    return vj[:, :nq], gj[:, :nq]


def estimate(psi, loads, quad_degree=8):
    """Local residual indicators of a converged solution.

    ``loads`` is the callable pair ``(f, g)``.  Volume terms use triangle
    quadrature of the given degree; edge integrands of P2 fields are
    polynomial and integrated exactly.
    """
    dofmap = psi.dofmap
    mesh = dofmap.mesh
    method = psi.method
    basis = ElementBasis(dofmap)
    f, g = loads

    rule = triangle_rule(quad_degree)
    pts = basis.physical_points(rule.points[:, 1:])
    x, y = pts[..., 0], pts[..., 1]
    br_uv = bracket_elements(dofmap, psi.u, psi.v, basis)
    br_uu = bracket_elements(dofmap, psi.u, psi.u, basis)
    res1 = np.asarray(f(x, y), dtype=float) + br_uv[:, None]
    res2 = np.asarray(g(x, y), dtype=float) - 0.5 * br_uu[:, None]
    hk4 = mesh.tri_diameter**4
    eta2 = hk4 * np.einsum("t,q,tq->t", basis.area, rule.weights,
                           res1**2 + res2**2)

    h = mesh.edge_length
    interior = ~mesh.edge_on_boundary
    tri0, tri1 = mesh.edge_tris[:, 0], mesh.edge_tris[:, 1]

    def attribute(term):
        share = np.where(interior, 0.5, 1.0) * term
        np.add.at(eta2, tri0, share)
        np.add.at(eta2, tri1[interior], 0.5 * term[interior])

    if method in ("morley", "c0ip"):
        # Hessian jumps are interior-only and constant along each edge
        hess_jumps = []
        for coef in (psi.u, psi.v):
            he = element_hessians(basis, coef)
            jump = he[tri0] - he[np.where(tri1 >= 0, tri1, 0)]
            jump[~interior] = 0.0
            hess_jumps.append(jump)
        if method == "morley":
            tau = mesh.edge_tangent
            term = np.zeros(mesh.n_edges)
            for jump in hess_jumps:
                jt1 = jump[:, 0] * tau[:, 0] + jump[:, 2] * tau[:, 1]
                jt2 = jump[:, 2] * tau[:, 0] + jump[:, 1] * tau[:, 1]
                term += h**2 * (jt1**2 + jt2**2)
        else:
            nu = mesh.edge_normal
            term = np.zeros(mesh.n_edges)
            for jump in hess_jumps:
                jnn = (jump[:, 0] * nu[:, 0]**2 + jump[:, 1] * nu[:, 1]**2
                       + 2.0 * jump[:, 2] * nu[:, 0] * nu[:, 1])
                term += h**2 * jnn**2
        attribute(term)

    if method in ("c0ip", "dg"):
        erule = edge_rule(5)
        eb = EdgeBasis(basis, erule.points)
        nq = len(erule.points)
        term = np.zeros(mesh.n_edges)
        for coef in (psi.u, psi.v):
            vj, gj = _edge_field_jumps(eb, coef, nq)
            grad2 = np.einsum("q,eqa->e", erule.weights, gj**2)
            term += grad2  # h^-1 * h * sum(w |jump|^2)
            if method == "dg":
                term += np.einsum("q,eq->e", erule.weights, vj**2) / h**2
        attribute(term)

    return LocalEstimates(np.maximum(eta2, 0.0), method)


def dorfler_mark(estimates, theta):
    """Minimal bulk-criterion marking.

    Greedily takes elements by descending ``eta2`` (ties by ascending index)
    until the marked set carries at least ``theta`` times the total squared
    estimator; elements with zero indicator are never marked.
    """
    if not 0.0 < theta <= 1.0:
        raise ValueError("bulk parameter theta must be in (0, 1]")
    eta2 = estimates.eta2 if isinstance(estimates, LocalEstimates) \
        else np.asarray(estimates, dtype=float)
    total = eta2.sum()
    if total <= 0.0:
        return np.empty(0, dtype=np.int64)
    order = np.lexsort((np.arange(len(eta2)), -eta2))
    csum = np.cumsum(eta2[order])
    k = int(np.searchsorted(csum, theta * total * (1.0 - 1e-12), side="left"))
    # bulk criterion met, and dropping the smallest marked element breaks it
    assert csum[k] >= theta * total * (1.0 - 1e-12)
    assert k == 0 or csum[k - 1] < theta * total
    return np.sort(order[:k + 1])


def _solve(mesh, method, problem, config):
    dofmap = build_dofmap(mesh, method)
    loads = (problem.exact.f, problem.exact.g)
    psi, report = newton_solve(mesh, dofmap, method, config.penalty, loads,
                               tol=config.newton_tol,
                               maxit=config.newton_maxit,
                               quad_degree=config.quad_degree)
    return psi, report


def _record(level, psi, problem, eta_total, config, prev):
    exact = problem.exact
    mesh = psi.dofmap.mesh
    e_u, e_v, e_tot = error_norm(psi, exact, "h", config.quad_degree)
    _, _, e_meth = error_norm(psi, exact, METHOD_NORM[psi.method],
                              config.quad_degree)
    osc = np.hypot(oscillation(exact.f, mesh, config.quad_degree),
                   oscillation(exact.g, mesh, config.quad_degree))
    ndof = psi.dofmap.n_global
    rate = float("nan")
    if prev is not None and prev.error_total > 0 and e_tot > 0:
        rate = -(np.log(e_tot) - np.log(prev.error_total)) \
            / (np.log(ndof) - np.log(prev.ndof))
    return ConvergenceRecord(level, ndof, e_u, e_v, e_tot, e_meth,
                             eta_total, float(osc), rate)


def adaptive_levels(problem, method, config, estimator=None):
    """Generator driving Solve - Estimate - Mark - Refine.

    ``estimator`` names the method whose residual indicator steers the
    marking (default: ``method`` itself); when it differs, that method is
    solved alongside on every level.  Yields a :class:`LevelState` per level
    and stops at ``max_levels`` or ``max_ndof``.
    """
    est_method = estimator or method
    mesh = problem.initial_mesh
    prev = None
    for level in range(config.max_levels):
        psi, report = _solve(mesh, method, problem, config)
        if not report.converged:
            raise SolverError(
                f"Newton did not converge at adaptive level {level} "
                f"({method}, {psi.dofmap.n_global} dofs)")
        if est_method == method:
            psi_est = psi
        else:
            psi_est, est_report = _solve(mesh, est_method, problem, config)
            if not est_report.converged:
                raise SolverError(
                    f"Newton did not converge at adaptive level {level} "
                    f"({est_method} estimator solve)")
        eta = estimate(psi_est, (problem.exact.f, problem.exact.g),
                       config.quad_degree)
        record = _record(level, psi, problem, eta.total, config, prev)
        prev = record
        yield LevelState(level, mesh, psi, eta, record)
        if level + 1 >= config.max_levels:
            break
        if config.max_ndof is not None and record.ndof >= config.max_ndof:
            break
        mesh = nvb_refine(mesh, dorfler_mark(eta, config.theta))


def adaptive_loop(problem, method, config, estimator=None):
    """Records of the adaptive loop, one per level."""
    return [state.record for state in
            adaptive_levels(problem, method, config, estimator)]


def uniform_levels(problem, method, levels, config=None):
    """Generator over a uniform (red) refinement hierarchy."""
    config = config or AdaptiveConfig(max_levels=levels)
    mesh = problem.initial_mesh
    prev = None
    for level in range(levels):
        psi, report = _solve(mesh, method, problem, config)
        if not report.converged:
            raise SolverError(
                f"Newton did not converge at uniform level {level} ({method})")
        eta = estimate(psi, (problem.exact.f, problem.exact.g),
                       config.quad_degree)
        record = _record(level, psi, problem, eta.total, config, prev)
        prev = record
        yield LevelState(level, mesh, psi, eta, record)
        if level + 1 < levels:
            mesh = uniform_refine(mesh)


def uniform_study(problem, method, levels, config=None):
    """Records over a uniform (red) refinement hierarchy."""
    return [state.record for state in
            uniform_levels(problem, method, levels, config)]
