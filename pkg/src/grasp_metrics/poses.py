"""Hand-pose graph data model, skeleton topology, file I/O, synthesis.

A hand pose is a graph on 21 indexed 2D keypoints (the standard landmark
layout): node 0 is the wrist, nodes 1-4 the thumb, 5-8 the index finger,
9-12 the middle, 13-16 the ring and 17-20 the pinky, each finger ordered
base to tip. Bones are the 20 tree edges connecting them.

Topology conventions used throughout the package:

* ``edges``     - all 20 bones, the tree rooted at the wrist.
* ``phalanges`` - the 14 finger bones proper (thumb contributes 2, each
  other finger 3); the six near-wrist metacarpal-like edges
  (0,1),(1,2),(0,5),(0,9),(0,13),(0,17) are excluded.
* ``adjacent_phalange_pairs`` - the 9 pairs of consecutive phalanges
  within one finger, indexing into ``phalanges``; each pair shares one
  joint.

Coordinates are unitless; the synthetic generator works in [0, 1]^2.
All types are immutable after construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidParameter,
    NonFiniteCoordinate,
    ParseError,
    ValidationError,
    WrongPointCount,
)

NUM_POINTS = 21
WRIST = 0

EDGES: tuple[tuple[int, int], ...] = (
    (0, 1), (1, 2), (2, 3), (3, 4),        # thumb
    (0, 5), (5, 6), (6, 7), (7, 8),        # index
    (0, 9), (9, 10), (10, 11), (11, 12),   # middle
    (0, 13), (13, 14), (14, 15), (15, 16), # ring
    (0, 17), (17, 18), (18, 19), (19, 20), # pinky
)

METACARPAL_EDGES: tuple[tuple[int, int], ...] = (
    (0, 1), (1, 2), (0, 5), (0, 9), (0, 13), (0, 17),
)

# Proximal-to-distal per finger, thumb first.
PHALANGES: tuple[tuple[int, int], ...] = tuple(
    e for e in EDGES if e not in METACARPAL_EDGES
)

# Pairs of indices into PHALANGES: consecutive phalanges of one finger.
ADJACENT_PHALANGE_PAIRS: tuple[tuple[int, int], ...] = (
    (0, 1),            # thumb
    (2, 3), (3, 4),    # index
    (5, 6), (6, 7),    # middle
    (8, 9), (9, 10),   # ring
    (11, 12), (12, 13),# pinky
)


@dataclass(frozen=True)
class SkeletonTopology:
    """The fixed pose-graph structure shared by every descriptor."""

    root: int
    edges: tuple[tuple[int, int], ...]
    phalanges: tuple[tuple[int, int], ...]
    adjacent_phalange_pairs: tuple[tuple[int, int], ...]


CANONICAL_TOPOLOGY = SkeletonTopology(
    root=WRIST,
    edges=EDGES,
    phalanges=PHALANGES,
    adjacent_phalange_pairs=ADJACENT_PHALANGE_PAIRS,
)


def canonical_topology() -> SkeletonTopology:
    """Return the constant 21-point skeleton topology."""
    return CANONICAL_TOPOLOGY


# Open right hand in [0,1]^2, palm toward the viewer, fingers up, thumb
# left. Zero-noise synthesis reproduces these coordinates exactly.
TEMPLATE_POINTS = np.array(
    [
        [0.50, 0.08],                                          # 0 wrist
        [0.38, 0.18], [0.30, 0.30], [0.24, 0.42], [0.20, 0.52],  # thumb
        [0.42, 0.44], [0.40, 0.60], [0.39, 0.72], [0.38, 0.82],  # index
        [0.52, 0.46], [0.53, 0.64], [0.54, 0.78], [0.54, 0.88],  # middle
        [0.62, 0.44], [0.65, 0.60], [0.67, 0.72], [0.68, 0.82],  # ring
        [0.71, 0.40], [0.76, 0.52], [0.79, 0.62], [0.81, 0.70],  # pinky
    ],
    dtype=np.float64,
)
TEMPLATE_POINTS.setflags(write=False)


@dataclass(frozen=True)
class HandPose:
    """An immutable, validated 21-point 2D hand pose.

    ``points`` is a read-only float64 array of shape (21, 2), row i being
    keypoint i. ``id`` is an optional opaque label carried through I/O.
    """

    points: np.ndarray
    id: str | None = None

    def __post_init__(self) -> None:
        try:
            pts = np.asarray(self.points, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise WrongPointCount(f"pose is not a sequence of (x, y) pairs: {exc}") from exc
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise WrongPointCount(
                f"pose must be a sequence of (x, y) pairs, got array shape {pts.shape}"
            )
        if pts.shape[0] != NUM_POINTS:
            raise WrongPointCount(f"expected {NUM_POINTS} points, got {pts.shape[0]}")
        if not np.isfinite(pts).all():
            bad = np.argwhere(~np.isfinite(pts))[0]
            raise NonFiniteCoordinate(
                f"non-finite coordinate at point {bad[0]}, axis {'xy'[bad[1]]}"
            )
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)


def validate_pose(raw, id: str | None = None) -> HandPose:
    """Validate a raw sequence of 21 coordinate pairs into a HandPose."""
    return HandPose(points=raw, id=id)


@dataclass(frozen=True)
class PosePopulation:
    """An ordered collection of poses, optionally tagged with its source file."""

    poses: tuple[HandPose, ...]
    source: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "poses", tuple(self.poses))

    def __len__(self) -> int:
        return len(self.poses)

    def __iter__(self):
        return iter(self.poses)

    def __getitem__(self, i: int) -> HandPose:
        return self.poses[i]

    def coordinates(self) -> np.ndarray:
        """All pose coordinates stacked into an (n, 21, 2) array."""
        return np.stack([p.points for p in self.poses]) if self.poses else np.empty((0, 21, 2))


def load_poses(path) -> PosePopulation:
    """Load a JSON-Lines pose file.

    Each non-blank line must be an object ``{"id": ..., "points": [[x, y],
    ...x21]}``. Raises OSError for I/O problems, ParseError for malformed
    JSON, and propagates pose validation errors with the line number
    prepended.
    """
    poses: list[HandPose] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"line {lineno}: invalid JSON: {exc.msg}") from exc
            if not isinstance(obj, dict) or "points" not in obj:
                raise ParseError(f'line {lineno}: expected an object with a "points" field')
            pose_id = obj.get("id")
            if pose_id is not None and not isinstance(pose_id, str):
                raise ParseError(f'line {lineno}: "id" must be a string when present')
            try:
                poses.append(validate_pose(obj["points"], id=pose_id))
            except ValidationError as exc:
                raise type(exc)(f"line {lineno}: {exc}") from exc
    return PosePopulation(poses=tuple(poses), source=str(path))


def save_poses(population: PosePopulation, path) -> None:
    """Write a population as JSON Lines; coordinates round-trip exactly."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for pose in population:
            obj: dict = {}
            if pose.id is not None:
                obj["id"] = pose.id
            obj["points"] = [[float(x), float(y)] for x, y in pose.points]
            fh.write(json.dumps(obj, separators=(",", ":")))
            fh.write("\n")


def transform_pose(
    pose: HandPose,
    translation: tuple[float, float] = (0.0, 0.0),
    rotation_angle: float = 0.0,
) -> HandPose:
    """Rotate a pose about its wrist point, then translate it."""
    pts = pose.points
    if rotation_angle == 0.0:
        moved = pts + np.asarray(translation, dtype=np.float64)
    else:
        wrist = pts[WRIST]
        c, s = math.cos(rotation_angle), math.sin(rotation_angle)
        rot = np.array([[c, -s], [s, c]])
        moved = (pts - wrist) @ rot.T + wrist + np.asarray(translation, dtype=np.float64)
    return HandPose(points=moved, id=pose.id)


def synthesize_population(
    count: int,
    seed: int,
    jitter_sigma: float = 0.0,
    translate_range: float = 0.0,
    rotate: bool = False,
) -> PosePopulation:
    """Generate a deterministic population of valid poses from the template.

    Each pose starts from ``TEMPLATE_POINTS``, gets i.i.d. Gaussian jitter
    of standard deviation ``jitter_sigma`` on every coordinate, optionally
    a uniform random rotation about its (jittered) wrist, then a uniform
    translation drawn from [-translate_range, translate_range]^2. The same
    arguments always produce the same population.
    """
    if count < 1:
        raise InvalidParameter(f"count must be >= 1, got {count}")
    if jitter_sigma < 0:
        raise InvalidParameter(f"jitter_sigma must be >= 0, got {jitter_sigma}")
    if translate_range < 0:
        raise InvalidParameter(f"translate_range must be >= 0, got {translate_range}")

    rng = np.random.default_rng(seed)
    pts = np.broadcast_to(TEMPLATE_POINTS, (count, NUM_POINTS, 2)).copy()
    if jitter_sigma > 0:
        pts += rng.normal(0.0, jitter_sigma, size=pts.shape)
    if rotate:
        angles = rng.uniform(0.0, 2.0 * math.pi, size=count)
        c, s = np.cos(angles), np.sin(angles)
        wrists = pts[:, WRIST : WRIST + 1, :]
        rel = pts - wrists
        pts = wrists + np.stack(
            [
                c[:, None] * rel[..., 0] - s[:, None] * rel[..., 1],
                s[:, None] * rel[..., 0] + c[:, None] * rel[..., 1],
            ],
            axis=-1,
        )
    if translate_range > 0:
        pts += rng.uniform(-translate_range, translate_range, size=(count, 1, 2))

    width = len(str(count - 1))
    poses = tuple(
        HandPose(points=pts[i], id=f"synth-{i:0{width}d}") for i in range(count)
    )
    return PosePopulation(poses=poses)
