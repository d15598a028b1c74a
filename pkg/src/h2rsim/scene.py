"""Metric point-cloud scenes: loading, validation, grasp ingest, distance queries.

Scene text format (line-oriented, whitespace-separated):

    scene v1
    cloud <label> <N>
    x y z r g b          (N lines, meters / colors in [0,1])
    ...

Grasp text format:

    grasps v1
    m00 m01 ... m33 score   (16 row-major pose numbers + score per line)

An ASCII PLY importer (x, y, z, red, green, blue) is provided for real
captures, one file per labeled cloud.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyCloud, NonFiniteCoordinate, ParseError
from .geometry import Pose

CLOUD_LABELS = ("object", "hand", "background")

VOXEL_CELL = 0.05  # meters; index resolution for nearest-point queries


class VoxelIndex:
    """Uniform voxel grid over a fixed point set for exact min-distance queries.

    Cells are scanned in expanding Chebyshev rings; ring R can only contain
    points at distance >= (R - 1) * cell, so the scan stops as soon as the
    current best distance beats every unvisited ring. Results are exact.
    """

    def __init__(self, points: np.ndarray, cell: float = VOXEL_CELL):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) == 0:
            raise ValueError("VoxelIndex needs a non-empty (N, 3) point array")
        self._points = pts
        self._cell = float(cell)
        ijk = np.floor(pts / self._cell).astype(np.int64)
        order = np.lexsort((ijk[:, 2], ijk[:, 1], ijk[:, 0]))
        sorted_ijk = ijk[order]
        breaks = np.nonzero(np.any(np.diff(sorted_ijk, axis=0) != 0, axis=1))[0] + 1
        cells: dict[tuple[int, int, int], np.ndarray] = {}
        for group in np.split(order, breaks):
            key = tuple(int(v) for v in ijk[group[0]])
            cells[key] = pts[group]
        self._cells = cells
        self._lo = ijk.min(axis=0)
        self._hi = ijk.max(axis=0)

    def min_distance(self, p) -> float:
        q = np.asarray(p, dtype=np.float64)
        c = np.floor(q / self._cell).astype(np.int64)
        max_ring = int(np.max(np.maximum(np.abs(c - self._lo), np.abs(self._hi - c))))
        best_sq = np.inf
        cell = self._cell
        for ring in range(max_ring + 1):
            lower = (ring - 1) * cell
            if lower > 0.0 and lower * lower > best_sq:
                break
            for key in self._ring_keys(c, ring):
                pts = self._cells.get(key)
                if pts is not None:
                    d = pts - q
                    best_sq = min(best_sq, float(np.min(np.einsum("ij,ij->i", d, d))))
        return float(np.sqrt(best_sq))

    @staticmethod
    def _ring_keys(c, ring):
        ci, cj, ck = int(c[0]), int(c[1]), int(c[2])
        if ring == 0:
            yield (ci, cj, ck)
            return
        for di in range(-ring, ring + 1):
            for dj in range(-ring, ring + 1):
                if max(abs(di), abs(dj)) == ring:
                    dks = range(-ring, ring + 1)
                else:
                    dks = (-ring, ring)
                for dk in dks:
                    yield (ci + di, cj + dj, ck + dk)


@dataclass(frozen=True)
class PointCloud:
    """Labeled metric point cloud with per-point color."""

    points: np.ndarray
    colors: np.ndarray
    label: str

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 3).copy()
        cols = np.asarray(self.colors, dtype=np.float64).reshape(-1, 3).copy()
        if self.label not in CLOUD_LABELS:
            raise ValueError(f"unknown cloud label {self.label!r}")
        if len(pts) != len(cols):
            raise ValueError("points and colors must have the same length")
        if self.label in ("object", "hand") and len(pts) == 0:
            raise EmptyCloud(f"{self.label} cloud must contain at least one point")
        if not np.all(np.isfinite(pts)):
            raise NonFiniteCoordinate(f"{self.label} cloud has non-finite coordinates")
        if not np.all(np.isfinite(cols)) or cols.size and (cols.min() < 0.0 or cols.max() > 1.0):
            raise ValueError(f"{self.label} cloud colors must be finite and in [0, 1]")
        pts.setflags(write=False)
        cols.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "colors", cols)
        object.__setattr__(self, "_index", None)

    def __len__(self) -> int:
        return len(self.points)

    def index(self) -> VoxelIndex:
        """Voxel index over this cloud, built once on first use."""
        idx = getattr(self, "_index")
        if idx is None:
            idx = VoxelIndex(self.points)
            object.__setattr__(self, "_index", idx)
        return idx


@dataclass(frozen=True)
class GraspCandidate:
    """A scored SE(3) grasp hypothesis."""

    pose: Pose
    score: float

    def __post_init__(self):
        if not np.isfinite(self.score):
            raise ValueError("grasp score must be finite")


@dataclass(frozen=True)
class SceneAssets:
    """Object/hand/background clouds plus derived centroids and indices."""

    object: PointCloud
    hand: PointCloud
    background: PointCloud | None = None
    object_mean: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.object.label != "object" or self.hand.label != "hand":
            raise ValueError("clouds must carry their matching labels")
        if self.background is not None and self.background.label != "background":
            raise ValueError("background cloud must be labeled 'background'")
        mean = self.object.points.mean(axis=0)
        mean.setflags(write=False)
        object.__setattr__(self, "object_mean", mean)
        object.__setattr__(self, "_clearance_index", None)

    @property
    def hand_centroid(self) -> np.ndarray:
        return self.hand.points.mean(axis=0)

    def clouds(self) -> list[PointCloud]:
        out = [self.object, self.hand]
        if self.background is not None and len(self.background):
            out.append(self.background)
        return out

    def clearance_distance(self, p) -> float:
        """Exact min distance from p to the object+hand point union."""
        idx = getattr(self, "_clearance_index")
        if idx is None:
            idx = VoxelIndex(np.vstack([self.object.points, self.hand.points]))
            object.__setattr__(self, "_clearance_index", idx)
        return idx.min_distance(p)


def min_distance_to_clouds(p, clouds) -> float:
    """Exact minimum Euclidean distance from p to the union of the clouds."""
    clouds = list(clouds)
    if not clouds:
        raise ValueError("at least one cloud is required")
    return min(c.index().min_distance(p) for c in clouds if len(c))


def align_grasp_to_scene(g: GraspCandidate, scene: SceneAssets,
                         direction: str = "to_scene") -> Pose:
    """Shift a grasp between object-centered and scene coordinates.

    `to_scene` adds the object mean (object-centered grasp into our scenes,
    which keep the object at its captured position); `paper_convention`
    subtracts it. Rotation is untouched either way.
    """
    if direction == "to_scene":
        t = g.pose.translation + scene.object_mean
    elif direction == "paper_convention":
        t = g.pose.translation - scene.object_mean
    else:
        raise ValueError(f"unknown alignment direction {direction!r}")
    return Pose(g.pose.rotation, t)


def _fmt(x: float) -> str:
    return repr(float(x))


def save_scene(scene: SceneAssets, path) -> None:
    lines = ["scene v1"]
    for cloud in scene.clouds():
        lines.append(f"cloud {cloud.label} {len(cloud)}")
        for p, c in zip(cloud.points, cloud.colors):
            lines.append(" ".join(_fmt(v) for v in (*p, *c)))
    Path(path).write_text("\n".join(lines) + "\n")


def load_scene(path) -> SceneAssets:
    """Parse a scene file; raises ParseError / EmptyCloud / NonFiniteCoordinate."""
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as e:
        raise ParseError(f"cannot read scene file {path}: {e}") from e
    lines = [ln.strip() for ln in raw.splitlines() if ln.strip()]
    if not lines or lines[0] != "scene v1":
        raise ParseError(f"{path}: missing 'scene v1' header")
    clouds: dict[str, PointCloud] = {}
    i = 1
    while i < len(lines):
        head = lines[i].split()
        if len(head) != 3 or head[0] != "cloud":
            raise ParseError(f"{path}: expected 'cloud <label> <N>' at line {i + 1}")
        label = head[1]
        if label not in CLOUD_LABELS:
            raise ParseError(f"{path}: unknown cloud label {label!r}")
        if label in clouds:
            raise ParseError(f"{path}: duplicate cloud {label!r}")
        try:
            n = int(head[2])
        except ValueError as e:
            raise ParseError(f"{path}: bad point count {head[2]!r}") from e
        rows = lines[i + 1:i + 1 + n]
        if len(rows) != n:
            raise ParseError(f"{path}: cloud {label!r} declares {n} points, found {len(rows)}")
        data = np.empty((n, 6))
        for j, row in enumerate(rows):
            vals = row.split()
            if len(vals) != 6:
                raise ParseError(f"{path}: cloud {label!r} row {j} has {len(vals)} fields, expected 6")
            try:
                data[j] = [float(v) for v in vals]
            except ValueError as e:
                raise ParseError(f"{path}: cloud {label!r} row {j}: {e}") from e
        try:
            clouds[label] = PointCloud(data[:, :3], data[:, 3:], label)
        except ValueError as e:
            raise ParseError(f"{path}: cloud {label!r}: {e}") from e
        i += 1 + n
    if "object" not in clouds or "hand" not in clouds:
        raise ParseError(f"{path}: scene must contain 'object' and 'hand' clouds")
    return SceneAssets(clouds["object"], clouds["hand"], clouds.get("background"))


def save_grasps(grasps, path) -> None:
    lines = ["grasps v1"]
    for g in grasps:
        lines.append(" ".join(_fmt(v) for v in (*g.pose.as_flat(), g.score)))
    Path(path).write_text("\n".join(lines) + "\n")


def load_grasps(path) -> list[GraspCandidate]:
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as e:
        raise ParseError(f"cannot read grasp file {path}: {e}") from e
    lines = [ln.strip() for ln in raw.splitlines() if ln.strip()]
    if not lines or lines[0] != "grasps v1":
        raise ParseError(f"{path}: missing 'grasps v1' header")
    grasps = []
    for j, row in enumerate(lines[1:]):
        vals = row.split()
        if len(vals) != 17:
            raise ParseError(f"{path}: grasp row {j} has {len(vals)} fields, expected 17")
        try:
            nums = [float(v) for v in vals]
        except ValueError as e:
            raise ParseError(f"{path}: grasp row {j}: {e}") from e
        if not all(np.isfinite(nums)):
            raise ParseError(f"{path}: grasp row {j} has non-finite values")
        grasps.append(GraspCandidate(Pose.from_matrix(np.array(nums[:16])), nums[16]))
    return grasps


def load_ply_cloud(path, label: str) -> PointCloud:
    """Import one labeled cloud from an ASCII PLY with x,y,z,red,green,blue."""
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as e:
        raise ParseError(f"cannot read PLY file {path}: {e}") from e
    lines = raw.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise ParseError(f"{path}: not a PLY file")
    n = None
    props: list[tuple[str, str]] = []
    body_start = None
    in_vertex = False
    for i, ln in enumerate(lines[1:], start=1):
        tok = ln.split()
        if not tok:
            continue
        if tok[0] == "format":
            if tok[1] != "ascii":
                raise ParseError(f"{path}: only ASCII PLY is supported")
        elif tok[0] == "element":
            in_vertex = tok[1] == "vertex"
            if in_vertex:
                n = int(tok[2])
        elif tok[0] == "property" and in_vertex:
            props.append((tok[1], tok[2]))
        elif tok[0] == "end_header":
            body_start = i + 1
            break
    if n is None or body_start is None:
        raise ParseError(f"{path}: malformed PLY header")
    names = [name for _, name in props]
    needed = ("x", "y", "z", "red", "green", "blue")
    if any(k not in names for k in needed):
        raise ParseError(f"{path}: PLY must provide properties {needed}")
    cols_idx = {name: names.index(name) for name in needed}
    rows = [ln.split() for ln in lines[body_start:body_start + n] if ln.strip()]
    if len(rows) != n:
        raise ParseError(f"{path}: vertex element declares {n} rows, found {len(rows)}")
    data = np.array([[float(v) for v in row] for row in rows])
    pts = data[:, [cols_idx["x"], cols_idx["y"], cols_idx["z"]]]
    cols = data[:, [cols_idx["red"], cols_idx["green"], cols_idx["blue"]]]
    types = {name: t for t, name in props}
    if types["red"] in ("uchar", "uint8"):
        cols = cols / 255.0
    return PointCloud(pts, cols, label)
