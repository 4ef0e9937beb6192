"""Quadratic element bases and degree-of-freedom maps.

Three P2 families share one machinery:

* ``morley`` -- the nonconforming basis with vertex values and edge-mean
  normal derivatives as degrees of freedom; boundary vertices and boundary
  edge means are constrained to zero,
* ``c0ip`` -- continuous Lagrange P2 with all boundary nodes constrained
  (values in H^1_0),
* ``dg`` -- fully discontinuous Lagrange P2, six dofs per triangle.

Constrained local dofs map to the sentinel ``-1`` and are skipped during
assembly.  Local dof order is always three vertex functions followed by the
function attached to local edge 0, 1, 2 (edge ``k`` opposite vertex ``k``).
Morley edge dofs use the mesh's global edge normal, so the two elements
sharing an edge see the same functional and no sign flips are needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import Triangulation
from .quadrature import edge_rule

__all__ = ["METHODS", "DofMap", "build_dofmap", "ElementBasis", "EdgeBasis",
           "eval_basis", "morley_interpolate", "nodal_interpolate",
           "p2_values", "p2_ref_gradients", "P2_REF_HESSIANS", "REF_NODES",
           "gather_coefficients", "element_hessians", "to_dg_coefficients"]

METHODS = ("morley", "c0ip", "dg")

#: Reference nodes: vertices then midpoints of local edges 0, 1, 2.
REF_NODES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0],
                      [0.5, 0.5], [0.0, 0.5], [0.5, 0.0]])

#: Constant reference Hessians as (xx, yy, xy) triplets, shape (6, 3).
P2_REF_HESSIANS = np.array([
    [4.0, 4.0, 4.0],
    [4.0, 0.0, 0.0],
    [0.0, 4.0, 0.0],
    [0.0, 0.0, 4.0],
    [0.0, -8.0, -4.0],
    [-8.0, 0.0, -4.0],
])

_EDGE_MIDPOINTS_REF = REF_NODES[3:]


def p2_values(points):
    """Lagrange P2 shape values at reference points, shape (..., 6)."""
    pts = np.asarray(points, dtype=float)
    x, y = pts[..., 0], pts[..., 1]
    l0 = 1.0 - x - y
    return np.stack([
        l0 * (2.0 * l0 - 1.0),
        x * (2.0 * x - 1.0),
        y * (2.0 * y - 1.0),
        4.0 * x * y,
        4.0 * y * l0,
        4.0 * l0 * x,
    ], axis=-1)


def p2_ref_gradients(points):
    """Reference gradients of the Lagrange P2 shapes, shape (..., 6, 2)."""
    pts = np.asarray(points, dtype=float)
    x, y = pts[..., 0], pts[..., 1]
    l0 = 1.0 - x - y
    g = np.empty(pts.shape[:-1] + (6, 2))
    g[..., 0, 0] = 1.0 - 4.0 * l0
    g[..., 0, 1] = 1.0 - 4.0 * l0
    g[..., 1, 0] = 4.0 * x - 1.0
    g[..., 1, 1] = 0.0
    g[..., 2, 0] = 0.0
    g[..., 2, 1] = 4.0 * y - 1.0
    g[..., 3, 0] = 4.0 * y
    g[..., 3, 1] = 4.0 * x
    g[..., 4, 0] = -4.0 * y
    g[..., 4, 1] = 4.0 * (l0 - y)
    g[..., 5, 0] = 4.0 * (l0 - x)
    g[..., 5, 1] = -4.0 * x
    return g


@dataclass
class DofMap:
    """Method-specific map from element-local dofs to global indices.

    ``element_dofs[t, i]`` is the global dof of local function ``i`` on
    triangle ``t``, or ``-1`` when that dof is constrained to zero by the
    boundary conditions.  Numbering is deterministic: interior vertices in
    vertex order, then interior edges in edge order (``dg``: six consecutive
    dofs per triangle).
    """
    mesh: Triangulation
    method: str
    n_global: int
    element_dofs: np.ndarray
    vertex_dof: np.ndarray | None = field(default=None, repr=False)
    edge_dof: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.element_dofs.setflags(write=False)


def build_dofmap(mesh, method):
    """Build the :class:`DofMap` of one of the three methods."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")
    nt = mesh.n_triangles
    if method == "dg":
        element_dofs = np.arange(6 * nt, dtype=np.int64).reshape(nt, 6)
        return DofMap(mesh, method, 6 * nt, element_dofs)
    vertex_dof = np.full(mesh.n_vertices, -1, dtype=np.int64)
    interior_v = ~mesh.vertex_on_boundary
    vertex_dof[interior_v] = np.arange(interior_v.sum())
    edge_dof = np.full(mesh.n_edges, -1, dtype=np.int64)
    interior_e = ~mesh.edge_on_boundary
    edge_dof[interior_e] = interior_v.sum() + np.arange(interior_e.sum())
    element_dofs = np.empty((nt, 6), dtype=np.int64)
    element_dofs[:, :3] = vertex_dof[mesh.triangles]
    element_dofs[:, 3:] = edge_dof[mesh.tri_edges]
    n_global = int(interior_v.sum() + interior_e.sum())
    return DofMap(mesh, method, n_global, element_dofs, vertex_dof, edge_dof)


class ElementBasis:
    """Per-element shape data of a dof map, in physical coordinates.

    For ``c0ip``/``dg`` this is the Lagrange frame; for ``morley`` the six
    Morley shapes are expressed in the Lagrange frame through a per-element
    transform obtained by inverting the 6x6 dual-pairing matrix (point values
    at the vertices, mean normal derivatives over the edges).

    Attributes
    ----------
    area : ndarray (nt,)
    jac, jac_inv : ndarray (nt, 2, 2)
        Affine map ``x = p0 + jac @ (xi, eta)`` and its inverse.
    hessians : ndarray (nt, 6, 3)
        Constant physical Hessians as (xx, yy, xy) triplets.
    int_phi : ndarray (nt, 6)
        Exact integrals of the shape functions over their triangle.
    transform : ndarray (nt, 6, 6) or None
        Morley-from-Lagrange coefficients, ``None`` for Lagrange frames.
    """

    def __init__(self, dofmap):
        mesh = dofmap.mesh
        self.dofmap = dofmap
        v, t = mesh.vertices, mesh.triangles
        p0 = v[t[:, 0]]
        jac = np.stack([v[t[:, 1]] - p0, v[t[:, 2]] - p0], axis=-1)
        det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        jac_inv = np.empty_like(jac)
        jac_inv[:, 0, 0] = jac[:, 1, 1] / det
        jac_inv[:, 0, 1] = -jac[:, 0, 1] / det
        jac_inv[:, 1, 0] = -jac[:, 1, 0] / det
        jac_inv[:, 1, 1] = jac[:, 0, 0] / det
        self.p0, self.jac, self.jac_inv = p0, jac, jac_inv
        self.area = mesh.area

        href = np.empty((6, 2, 2))
        href[:, 0, 0] = P2_REF_HESSIANS[:, 0]
        href[:, 1, 1] = P2_REF_HESSIANS[:, 1]
        href[:, 0, 1] = href[:, 1, 0] = P2_REF_HESSIANS[:, 2]
        hphys = np.einsum("tba,jbc,tcd->tjad", jac_inv, href, jac_inv)
        lag_hess = np.stack([hphys[:, :, 0, 0], hphys[:, :, 1, 1],
                             hphys[:, :, 0, 1]], axis=-1)

        lag_int = np.zeros((mesh.n_triangles, 6))
        lag_int[:, 3:] = self.area[:, None] / 3.0

        if dofmap.method == "morley":
            self.transform = self._morley_transform(mesh, lag_hess)
            self.hessians = np.einsum("tjk,tkc->tjc", self.transform, lag_hess)
            self.int_phi = np.einsum("tjk,tk->tj", self.transform, lag_int)
        else:
            self.transform = None
            self.hessians = lag_hess
            self.int_phi = lag_int

    def _morley_transform(self, mesh, lag_hess):
        # Dual pairing C[i, j] = functional_i(lagrange_j): rows 0..2 are
        # vertex values, rows 3..5 edge means of the normal derivative (the
        # gradient of a P2 function is linear, so the mean is its midpoint
        # value).
        nt = mesh.n_triangles
        gm = p2_ref_gradients(_EDGE_MIDPOINTS_REF)          # (3, 6, 2)
        gphys = np.einsum("tba,kjb->tkja", self.jac_inv, gm)
        normals = mesh.edge_normal[mesh.tri_edges]           # (nt, 3, 2)
        pairing = np.zeros((nt, 6, 6))
        pairing[:, :3, :3] = np.eye(3)
        pairing[:, 3:, :] = np.einsum("tkja,tka->tkj", gphys, normals)
        return np.linalg.inv(pairing).transpose(0, 2, 1)

    def physical_points(self, ref_points):
        """Map reference points to physical ones, shape (nt, m, 2)."""
        ref = np.asarray(ref_points, dtype=float)
        return self.p0[:, None, :] + np.einsum("tab,mb->tma", self.jac, ref)

    def values(self, ref_points):
        """Shape values at reference points, shape (nt, m, 6)."""
        vals = p2_values(ref_points)
        if self.transform is None:
            return np.broadcast_to(vals, (len(self.area),) + vals.shape).copy()
        return np.einsum("tjk,mk->tmj", self.transform, vals)

    def gradients(self, ref_points):
        """Physical gradients at reference points, shape (nt, m, 6, 2)."""
        g = p2_ref_gradients(ref_points)
        gphys = np.einsum("tba,mjb->tmja", self.jac_inv, g)
        if self.transform is None:
            return gphys
        return np.einsum("tjk,tmka->tmja", self.transform, gphys)


class EdgeBasis:
    """Traces of the element basis on both sides of every edge.

    Evaluation points are ``a + t * (b - a)`` for the sorted edge vertices
    ``(a, b)``, identical for both sides, so jumps and averages pair up
    pointwise.  Side 0 is the lower-indexed adjacent triangle (the one the
    edge normal points away from); on boundary edges side 1 carries zeros and
    dof index ``-1``.
    """

    def __init__(self, basis, tpoints):
        dofmap = basis.dofmap
        mesh = dofmap.mesh
        self.mesh, self.dofmap = mesh, dofmap
        t = np.asarray(tpoints, dtype=float)
        self.tpoints = t
        a = mesh.vertices[mesh.edges[:, 0]]
        b = mesh.vertices[mesh.edges[:, 1]]
        points = a[:, None, :] + t[None, :, None] * (b - a)[:, None, :]
        self.points = points

        self.tri = mesh.edge_tris
        self.values = []
        self.gradients = []
        self.hessians = []
        self.dofs = []
        for side in (0, 1):
            tri = self.tri[:, side]
            valid = tri >= 0
            tt = np.where(valid, tri, 0)
            ref = np.einsum("eab,eqb->eqa", basis.jac_inv[tt],
                            points - basis.p0[tt][:, None, :])
            vals = p2_values(ref)
            grads = np.einsum("eba,eqjb->eqja", basis.jac_inv[tt],
                              p2_ref_gradients(ref))
            if basis.transform is not None:
                w = basis.transform[tt]
                vals = np.einsum("ejk,eqk->eqj", w, vals)
                grads = np.einsum("ejk,eqka->eqja", w, grads)
            hess = basis.hessians[tt].copy()
            dofs = dofmap.element_dofs[tt].copy()
            vals[~valid] = 0.0
            grads[~valid] = 0.0
            hess[~valid] = 0.0
            dofs[~valid] = -1
            self.values.append(vals)
            self.gradients.append(grads)
            self.hessians.append(hess)
            self.dofs.append(dofs)

    def normal_derivatives(self, side):
        """d(shape)/d(nu) along the edge, shape (ne, m, 6)."""
        return np.einsum("eqja,ea->eqj", self.gradients[side],
                         self.mesh.edge_normal)


def eval_basis(dofmap, triangle_index, ref_points, basis=None):
    """Evaluate the six shapes of one triangle at reference points.

    Returns ``(values, gradients, hessians)`` with shapes ``(m, 6)``,
    ``(m, 6, 2)`` and ``(6, 3)``; gradients and Hessians are physical.
    """
    if basis is None:
        basis = ElementBasis(dofmap)
    k = int(triangle_index)
    vals = basis.values(np.atleast_2d(ref_points))[k]
    grads = basis.gradients(np.atleast_2d(ref_points))[k]
    return vals, grads, basis.hessians[k]


def gather_coefficients(dofmap, coefficients):
    """Element-local coefficients with constrained dofs as zero, (nt, 6)."""
    coefficients = np.asarray(coefficients, dtype=float)
    ed = dofmap.element_dofs
    return np.where(ed >= 0, coefficients[np.where(ed >= 0, ed, 0)], 0.0)


def element_hessians(basis, coefficients):
    """Constant Hessian (xx, yy, xy) of a discrete field per element."""
    local = gather_coefficients(basis.dofmap, coefficients)
    return np.einsum("tj,tjc->tc", local, basis.hessians)


def morley_interpolate(value, gradient, mesh, dofmap, degree=10):
    """Interpolate a function into the Morley space.

    Vertex dofs take the point value, edge dofs the mean of the normal
    derivative along the edge (Gauss rule of the given degree).  Boundary
    dofs are constrained and therefore dropped, so functions with
    homogeneous clamped data are reproduced in the element-wise sense.

    Parameters
    ----------
    value : callable
        ``value(x, y) -> array``.
    gradient : callable
        ``gradient(x, y) -> array (..., 2)``.
    """
    if dofmap.method != "morley":
        raise ValueError("morley_interpolate needs a 'morley' dof map")
    coef = np.zeros(dofmap.n_global)
    free_v = np.where(dofmap.vertex_dof >= 0)[0]
    coef[dofmap.vertex_dof[free_v]] = value(mesh.vertices[free_v, 0],
                                            mesh.vertices[free_v, 1])
    free_e = np.where(dofmap.edge_dof >= 0)[0]
    if len(free_e):
        rule = edge_rule(degree)
        a = mesh.vertices[mesh.edges[free_e, 0]]
        b = mesh.vertices[mesh.edges[free_e, 1]]
        pts = a[:, None, :] + rule.points[None, :, None] * (b - a)[:, None, :]
        grads = np.asarray(gradient(pts[..., 0], pts[..., 1]))
        means = np.einsum("q,eqa,ea->e", rule.weights, grads,
                          mesh.edge_normal[free_e])
        coef[dofmap.edge_dof[free_e]] = means
    return coef


def to_dg_coefficients(dofmap, coefficients):
    """Re-express a discrete field in the discontinuous Lagrange frame.

    Evaluates the field at the six Lagrange nodes of every element, which is
    exact for P2 fields of any of the three methods; useful for comparing
    solutions across methods in one norm.
    """
    basis = ElementBasis(dofmap)
    local = gather_coefficients(dofmap, coefficients)
    node_vals = basis.values(REF_NODES)
    return np.einsum("tqj,tj->tq", node_vals, local).ravel()


def nodal_interpolate(value, dofmap):
    """Lagrange nodal interpolation for the ``c0ip`` or ``dg`` dof maps."""
    if dofmap.method == "morley":
        raise ValueError("nodal_interpolate needs a Lagrange-frame dof map")
    mesh = dofmap.mesh
    coef = np.zeros(dofmap.n_global)
    if dofmap.method == "dg":
        basis = ElementBasis(dofmap)
        nodes = basis.physical_points(REF_NODES)
        coef = value(nodes[..., 0], nodes[..., 1]).ravel()
        return coef
    free_v = np.where(dofmap.vertex_dof >= 0)[0]
    coef[dofmap.vertex_dof[free_v]] = value(mesh.vertices[free_v, 0],
                                            mesh.vertices[free_v, 1])
    free_e = np.where(dofmap.edge_dof >= 0)[0]
    mids = 0.5 * (mesh.vertices[mesh.edges[free_e, 0]] +
                  mesh.vertices[mesh.edges[free_e, 1]])
    coef[dofmap.edge_dof[free_e]] = value(mids[:, 0], mids[:, 1])
    return coef
