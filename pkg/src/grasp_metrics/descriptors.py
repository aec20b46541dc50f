"""Descriptor functions mapping a hand pose to a fixed-length real vector.

Four descriptors are registered, keyed by (case-insensitive) name:

``identity`` (dim 42)
    Raw coordinates (x0, y0, x1, y1, ..., x20, y20) in index order.

``geometric`` (dim 43)
    Concatenation of three blocks, in this frozen order:
    [0:20]   distances from the wrist to points 1..20, index-ascending;
    [20:34]  the 14 phalange lengths, in ``PHALANGES`` order;
    [34:43]  sin(angle) between the 9 adjacent phalange pairs, in
             ``ADJACENT_PHALANGE_PAIRS`` order, computed as
             |u x v| / (|u| |v|) and clamped to [0, 1]. A pair with a
             zero-length phalange contributes 0.

``denset`` (dim 210)
    Euclidean distance for every unordered point pair (i, j), i < j, in
    lexicographic (i, j) order.

``spectral`` (dim 462)
    Build the 21x21 bone-length-weighted graph Laplacian L: for each bone
    (u, v) of length d, L[u, v] = L[v, u] = -d and both diagonal entries
    gain +d, so each L[v, v] is the total bone length at v and row sums
    are zero. The descriptor is the 21 eigenvalues in ascending order
    followed by the 21 eigenvectors in the same order, column-stacked,
    each eigenvector's sign fixed so that its largest-magnitude component
    (lowest index on ties) is positive.

The entry order of every descriptor is part of the wire format: population
statistics and scores depend on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import EigenFailure, UnknownDescriptor, UnsupportedDescriptor
from .poses import CANONICAL_TOPOLOGY, NUM_POINTS, HandPose, SkeletonTopology

DESCRIPTOR_NAMES = ("identity", "geometric", "denset", "spectral")

DESCRIPTOR_DIMS = {
    "identity": 2 * NUM_POINTS,
    "geometric": (NUM_POINTS - 1) + 14 + 9,
    "denset": NUM_POINTS * (NUM_POINTS - 1) // 2,
    "spectral": NUM_POINTS + NUM_POINTS * NUM_POINTS,
}

# Unordered point pairs in lexicographic order; fixes the denset layout.
PAIR_INDICES: tuple[tuple[int, int], ...] = tuple(
    (i, j) for i in range(NUM_POINTS) for j in range(i + 1, NUM_POINTS)
)

_DEGENERATE_EPS = 1e-12


@dataclass(frozen=True)
class DescriptorVector:
    """A descriptor output, tagged with the descriptor that produced it."""

    descriptor_id: str
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64)
        expected = DESCRIPTOR_DIMS[self.descriptor_id]
        if vals.shape != (expected,):
            raise ValueError(
                f"{self.descriptor_id} descriptor must have shape ({expected},), "
                f"got {vals.shape}"
            )
        if not np.isfinite(vals).all():
            raise ValueError(f"{self.descriptor_id} descriptor contains non-finite values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class DescriptorJacobian:
    """Partial derivatives of descriptor entries w.r.t. the 42 flattened coordinates."""

    descriptor_id: str
    matrix: np.ndarray  # shape (descriptor dim, 42)

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix, dtype=np.float64)
        expected = (DESCRIPTOR_DIMS[self.descriptor_id], 2 * NUM_POINTS)
        if mat.shape != expected:
            raise ValueError(f"jacobian must have shape {expected}, got {mat.shape}")
        if not np.isfinite(mat).all():
            raise ValueError("jacobian contains non-finite values")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)


@lru_cache(maxsize=4)
def _topology_arrays(topo: SkeletonTopology):
    """Index arrays derived from a topology, cached per instance."""
    edges = np.asarray(topo.edges)
    phal = np.asarray(topo.phalanges)
    adj = np.asarray(topo.adjacent_phalange_pairs)
    return edges[:, 0], edges[:, 1], phal[:, 0], phal[:, 1], adj[:, 0], adj[:, 1]


def _identity_values(pts: np.ndarray) -> np.ndarray:
    return pts.ravel().copy()


def _geometric_values(pts: np.ndarray, topo: SkeletonTopology) -> np.ndarray:
    _, _, tails, heads, adj_a, adj_b = _topology_arrays(topo)
    root_rel = np.linalg.norm(pts[1:] - pts[topo.root], axis=1)
    vecs = pts[heads] - pts[tails]
    lengths = np.linalg.norm(vecs, axis=1)
    u, v = vecs[adj_a], vecs[adj_b]
    cross = np.abs(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])
    den = lengths[adj_a] * lengths[adj_b]
    safe = den >= _DEGENERATE_EPS
    sines = np.zeros(len(adj_a))
    sines[safe] = np.clip(cross[safe] / den[safe], 0.0, 1.0)
    return np.concatenate([root_rel, lengths, sines])


def _denset_values(pts: np.ndarray) -> np.ndarray:
    return np.array([np.linalg.norm(pts[i] - pts[j]) for i, j in PAIR_INDICES])


def _laplacian(pts: np.ndarray, topo: SkeletonTopology) -> np.ndarray:
    e0, e1, *_ = _topology_arrays(topo)
    d = np.linalg.norm(pts[e0] - pts[e1], axis=1)
    lap = np.zeros((NUM_POINTS, NUM_POINTS))
    lap[e0, e1] = -d
    lap[e1, e0] = -d
    deg = np.zeros(NUM_POINTS)
    np.add.at(deg, e0, d)
    np.add.at(deg, e1, d)
    lap[np.arange(NUM_POINTS), np.arange(NUM_POINTS)] = deg
    return lap


def _spectral_values(pts: np.ndarray, topo: SkeletonTopology) -> np.ndarray:
    lap = _laplacian(pts, topo)
    try:
        eigvals, eigvecs = np.linalg.eigh(lap)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"Laplacian eigendecomposition failed: {exc}") from exc
    # Fix each eigenvector's sign: largest-|.| component positive,
    # lowest index winning ties (argmax picks the first maximum).
    lead = np.argmax(np.abs(eigvecs), axis=0)
    signs = np.sign(eigvecs[lead, np.arange(NUM_POINTS)])
    signs[signs == 0] = 1.0
    eigvecs = eigvecs * signs
    return np.concatenate([eigvals, eigvecs.T.ravel()])


def identity_desc(pose: HandPose) -> DescriptorVector:
    """Coordinates of every point, in index order."""
    return DescriptorVector("identity", _identity_values(pose.points))


def geometric_desc(pose: HandPose, topo: SkeletonTopology = CANONICAL_TOPOLOGY) -> DescriptorVector:
    """Wrist-relative distances, phalange lengths, adjacent-phalange sines."""
    return DescriptorVector("geometric", _geometric_values(pose.points, topo))


def denset_desc(pose: HandPose) -> DescriptorVector:
    """Euclidean distance between every pair of points."""
    return DescriptorVector("denset", _denset_values(pose.points))


def spectral_desc(pose: HandPose, topo: SkeletonTopology = CANONICAL_TOPOLOGY) -> DescriptorVector:
    """Eigenvalues and sign-fixed eigenvectors of the bone-weighted Laplacian."""
    return DescriptorVector("spectral", _spectral_values(pose.points, topo))


def normalize_descriptor_id(name: str) -> str:
    """Fold case and validate a descriptor name."""
    key = name.strip().lower()
    if key not in DESCRIPTOR_DIMS:
        raise UnknownDescriptor(
            f"unknown descriptor {name!r}; expected one of {', '.join(DESCRIPTOR_NAMES)}"
        )
    return key


def values_function(name: str):
    """Resolve a descriptor name to its raw (21, 2) array -> vector function."""
    key = normalize_descriptor_id(name)
    if key == "identity":
        return _identity_values
    if key == "geometric":
        return lambda pts: _geometric_values(pts, CANONICAL_TOPOLOGY)
    if key == "denset":
        return _denset_values
    return lambda pts: _spectral_values(pts, CANONICAL_TOPOLOGY)


def descriptor_lookup(name: str):
    """Resolve a descriptor name to a ``HandPose -> DescriptorVector`` callable."""
    key = normalize_descriptor_id(name)
    fn = values_function(key)
    def describe(pose: HandPose) -> DescriptorVector:
        return DescriptorVector(key, fn(pose.points))
    describe.__name__ = f"{key}_desc"
    return describe


def _distance_row(row: np.ndarray, pts: np.ndarray, i: int, j: int) -> None:
    """Fill one Jacobian row for the distance |p_i - p_j|; zero when degenerate."""
    diff = pts[i] - pts[j]
    d = np.linalg.norm(diff)
    if d < _DEGENERATE_EPS:
        return
    g = diff / d
    row[2 * i : 2 * i + 2] = g
    row[2 * j : 2 * j + 2] = -g


def _sine_row(
    row: np.ndarray, pts: np.ndarray, a1: int, b1: int, a2: int, b2: int
) -> None:
    """Fill one Jacobian row for |u x v| / (|u||v|) of phalanges (a1,b1), (a2,b2)."""
    u = pts[b1] - pts[a1]
    v = pts[b2] - pts[a2]
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    den = nu * nv
    if den < _DEGENERATE_EPS:
        return
    cross = u[0] * v[1] - u[1] * v[0]
    sgn = np.sign(cross)
    ac = abs(cross)
    # d|c|/du and d|c|/dv, then the quotient rule against |u||v|.
    du = sgn * np.array([v[1], -v[0]]) / den - ac * u / (nu**3 * nv)
    dv = sgn * np.array([-u[1], u[0]]) / den - ac * v / (nu * nv**3)
    row[2 * a1 : 2 * a1 + 2] -= du
    row[2 * b1 : 2 * b1 + 2] += du
    row[2 * a2 : 2 * a2 + 2] -= dv
    row[2 * b2 : 2 * b2 + 2] += dv


def descriptor_jacobian(pose: HandPose, descriptor_id: str) -> DescriptorJacobian:
    """Analytic Jacobian of a descriptor at a pose.

    Supports identity, geometric and denset. Distance entries use
    (p_i - p_j)/|p_i - p_j|; sine entries the quotient rule; any entry
    whose denominator falls below 1e-12 contributes an all-zero row.
    """
    key = normalize_descriptor_id(descriptor_id)
    if key == "spectral":
        raise UnsupportedDescriptor(
            "spectral descriptor has no gradient support (eigenvector "
            "derivatives are ill-conditioned at repeated eigenvalues)"
        )
    pts = pose.points
    dim = DESCRIPTOR_DIMS[key]
    mat = np.zeros((dim, 2 * NUM_POINTS))

    if key == "identity":
        mat = np.eye(2 * NUM_POINTS)
    elif key == "denset":
        for r, (i, j) in enumerate(PAIR_INDICES):
            _distance_row(mat[r], pts, i, j)
    else:  # geometric
        topo = CANONICAL_TOPOLOGY
        for r, i in enumerate(range(1, NUM_POINTS)):
            _distance_row(mat[r], pts, i, topo.root)
        base = NUM_POINTS - 1
        for r, (a, b) in enumerate(topo.phalanges):
            _distance_row(mat[base + r], pts, b, a)
        base += len(topo.phalanges)
        for r, (pa, pb) in enumerate(topo.adjacent_phalange_pairs):
            a1, b1 = topo.phalanges[pa]
            a2, b2 = topo.phalanges[pb]
            _sine_row(mat[base + r], pts, a1, b1, a2, b2)

    return DescriptorJacobian(key, mat)
