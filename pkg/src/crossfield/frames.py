"""Per-edge tangent frames and per-triangle transport rotations.

Every mesh edge carries an orthonormal frame: the unit edge direction
(ordered by ascending vertex index), the renormalised average of the
adjacent triangle normals, and their cross product.  Direction data stored
per edge is interpolated inside a triangle after rotating all three edge
values into one shared in-plane reference (the first edge's direction).
For a field invariant under rotations by ``2*pi/order``, that change of
frame only involves the offset angles times ``order``, which the 6x6 block
rotation below encodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import InvalidMeshError

__all__ = [
    "EdgeFrames",
    "TriangleFrames",
    "build_edge_frames",
    "triangle_frames",
    "rotation_matrix",
]


@dataclass(frozen=True)
class EdgeFrames:
    """Orthonormal frame per edge: ``e_hat`` along the edge, ``n_hat`` the
    averaged adjacent-triangle normal, ``t_hat = n_hat x e_hat``."""

    e_hat: np.ndarray
    t_hat: np.ndarray
    n_hat: np.ndarray


@dataclass(frozen=True)
class TriangleFrames:
    """In-plane frame offsets and transport rotations per triangle.

    ``alpha[t, i]`` is the signed angle, about the triangle normal, that
    carries edge ``i``'s frame direction onto the triangle's reference
    direction (edge 0's), with ``alpha[t, 0] == 0``.  ``rotation[t]`` is the
    orthogonal 6x6 matrix mapping the six per-edge components
    ``(f1_0, f1_1, f1_2, f2_0, f2_1, f2_2)`` into the shared frame; it
    depends on ``alpha`` only through ``cos(order * alpha)`` and
    ``sin(order * alpha)``.
    """

    order: int
    alpha: np.ndarray
    rotation: np.ndarray


def _normalize(v, what, tol=1e-14):
    nrm = np.linalg.norm(v, axis=-1)
    if np.any(nrm < tol):
        bad = np.flatnonzero(nrm < tol)[:5]
        raise InvalidMeshError(f"cannot normalise {what} at {bad.tolist()}")
    return v / nrm[..., None]


def build_edge_frames(mesh):
    """Build the orthonormal tangent frame of every edge.

    The edge normal is the average of the two adjacent triangle normals
    (the single adjacent normal on boundary edges), re-orthogonalised
    against the edge direction and renormalised.

    Raises
    ------
    InvalidMeshError
        If two adjacent triangles have (nearly) opposite normals, so their
        average vanishes (fold-over); the message names the edge.
    """
    normals = mesh.triangle_normals()
    n_sum = normals[mesh.edge_facets[:, 0]].copy()
    interior = mesh.edge_facets[:, 1] >= 0
    n_sum[interior] += normals[mesh.edge_facets[interior, 1]]

    nrm = np.linalg.norm(n_sum, axis=1)
    bad = nrm < 1e-8
    if bad.any():
        edges = mesh.edges[np.flatnonzero(bad)[:5]]
        raise InvalidMeshError(
            f"opposite adjacent triangle normals (fold-over) at edges {edges.tolist()}"
        )
    n_hat = n_sum / nrm[:, None]
    e_hat = _normalize(mesh.edge_vectors(), "edge directions")
    n_hat = n_hat - (n_hat * e_hat).sum(axis=1)[:, None] * e_hat
    n_hat = _normalize(n_hat, "edge normals")
    t_hat = np.cross(n_hat, e_hat)
    for arr in (e_hat, t_hat, n_hat):
        arr.setflags(write=False)
    return EdgeFrames(e_hat=e_hat, t_hat=t_hat, n_hat=n_hat)


def rotation_matrix(alpha, order=4):
    """Assemble the 6x6 transport rotation from three frame-offset angles.

    The first edge is the reference (its blocks are the identity); the
    blocks of edges 1 and 2 read ``[[cos(order*a), sin(order*a)],
    [-sin(order*a), cos(order*a)]]`` spread over the component layout
    ``(f1_0, f1_1, f1_2, f2_0, f2_1, f2_2)``.
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (3,):
        raise ValueError("alpha must hold three angles")
    return _rotation_matrices(alpha[None, :], order)[0]


def _rotation_matrices(alpha, order):
    m = len(alpha)
    c = np.cos(order * alpha)
    s = np.sin(order * alpha)
    rot = np.zeros((m, 6, 6))
    for i in range(3):
        rot[:, i, i] = c[:, i]
        rot[:, i, i + 3] = s[:, i]
        rot[:, i + 3, i] = -s[:, i]
        rot[:, i + 3, i + 3] = c[:, i]
    return rot


def triangle_frames(mesh, edge_frames, order=4):
    """Compute the per-triangle frame offsets and transport rotations.

    Each edge frame direction is projected into the triangle plane before
    measuring its in-plane angle to the first edge's direction.

    Raises
    ------
    InvalidMeshError
        If a projected edge direction nearly vanishes, which cannot happen
        for valid adjacent-triangle normals and indicates broken geometry.
    """
    n_tri = mesh.triangle_normals()
    e = edge_frames.e_hat[mesh.facet_edges]            # (m, 3, 3)
    proj = e - (e * n_tri[:, None, :]).sum(axis=2)[:, :, None] * n_tri[:, None, :]
    nrm = np.linalg.norm(proj, axis=2)
    if np.any(nrm < 1e-8):
        bad = np.argwhere(nrm < 1e-8)[:5]
        raise InvalidMeshError(
            f"edge frame projects to zero in triangle plane at (triangle, edge) {bad.tolist()}"
        )
    u = proj / nrm[:, :, None]
    ref = u[:, 0, :]
    cross = np.cross(u, ref[:, None, :])
    sin_a = (cross * n_tri[:, None, :]).sum(axis=2)
    cos_a = (u * ref[:, None, :]).sum(axis=2)
    alpha = np.arctan2(sin_a, cos_a)
    alpha[:, 0] = 0.0
    rot = _rotation_matrices(alpha, order)
    alpha.setflags(write=False)
    rot.setflags(write=False)
    return TriangleFrames(order=order, alpha=alpha, rotation=rot)
