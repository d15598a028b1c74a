"""Point-splat rendering of hand-eye views and binary mask projection.

Every visible point becomes an isotropic screen-space Gaussian splat;
splats are composited back-to-front with alpha blending (painter's order,
ties broken by point index, so output is deterministic). Masks are
projected from the labeled clouds alone using hard disc footprints.

File formats: RGB as binary PPM (P6), masks as PGM (P5, 0/255), depth as
a little-endian float32 raster behind an 8-byte width/height header.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .geometry import Pose, inverse
from .scene import SceneAssets

POINT_RADIUS = 0.005    # meters; world-space footprint of one splat
ALPHA_PEAK = 0.8        # opacity at the splat center
SIGMA_MIN_PX = 0.5
SIGMA_MAX_PX = 8.0
TRUNCATION_SIGMAS = 3.0
MASK_OCCUPANCY_THRESHOLD = 0.5


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics; the default matches a common RGB-D profile."""

    fx: float = 525.0
    fy: float = 525.0
    cx: float = 320.0
    cy: float = 240.0
    width: int = 640
    height: int = 480
    near: float = 0.05

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 < self.cx < self.width and 0 < self.cy < self.height):
            raise ValueError("principal point must lie inside the image")
        if self.near <= 0:
            raise ValueError("near plane must be positive")


@dataclass(frozen=True)
class RenderedFrame:
    rgb: np.ndarray          # (H, W, 3) uint8
    object_mask: np.ndarray  # (H, W) bool
    hand_mask: np.ndarray    # (H, W) bool
    depth: np.ndarray        # (H, W) float64 meters, 0 where nothing rendered


def project_point(p, camera: Pose, K: CameraIntrinsics):
    """Pinhole projection of a world point; None if behind the near plane
    or outside the image. Returns (u, v, depth) in pixels/meters."""
    c = inverse(camera).apply(p)
    z = float(c[2])
    if z < K.near:
        return None
    u = K.fx * float(c[0]) / z + K.cx
    v = K.fy * float(c[1]) / z + K.cy
    if not (0.0 <= u <= K.width - 1 and 0.0 <= v <= K.height - 1):
        return None
    return u, v, z


@njit(cache=True)
def _composite_splats(order, us, vs, zs, sigmas, colors, height, width,
                      alpha_peak, trunc):
    rgb = np.zeros((height, width, 3))
    depth = np.zeros((height, width))
    for oi in range(order.shape[0]):
        i = order[oi]
        u = us[i]
        v = vs[i]
        z = zs[i]
        sig = sigmas[i]
        r = trunc * sig
        x0 = max(int(math.ceil(u - r)), 0)
        x1 = min(int(math.floor(u + r)), width - 1)
        y0 = max(int(math.ceil(v - r)), 0)
        y1 = min(int(math.floor(v + r)), height - 1)
        if x0 > x1 or y0 > y1:
            continue
        r_sq = r * r
        inv_two_sig_sq = 1.0 / (2.0 * sig * sig)
        cr = colors[i, 0]
        cg = colors[i, 1]
        cb = colors[i, 2]
        for py in range(y0, y1 + 1):
            dy = py - v
            for px in range(x0, x1 + 1):
                dx = px - u
                d_sq = dx * dx + dy * dy
                if d_sq <= r_sq:
                    a = alpha_peak * math.exp(-d_sq * inv_two_sig_sq)
                    one_m = 1.0 - a
                    rgb[py, px, 0] = a * cr + one_m * rgb[py, px, 0]
                    rgb[py, px, 1] = a * cg + one_m * rgb[py, px, 1]
                    rgb[py, px, 2] = a * cb + one_m * rgb[py, px, 2]
                    depth[py, px] = z
    return rgb, depth


@njit(cache=True)
def _stamp_discs(us, vs, radii, height, width):
    occ = np.zeros((height, width))
    for i in range(us.shape[0]):
        u = us[i]
        v = vs[i]
        r = radii[i]
        x0 = max(int(math.ceil(u - r)), 0)
        x1 = min(int(math.floor(u + r)), width - 1)
        y0 = max(int(math.ceil(v - r)), 0)
        y1 = min(int(math.floor(v + r)), height - 1)
        r_sq = r * r
        for py in range(y0, y1 + 1):
            dy = py - v
            for px in range(x0, x1 + 1):
                dx = px - u
                if dx * dx + dy * dy <= r_sq:
                    occ[py, px] = 1.0
    return occ


def _camera_frame_points(points: np.ndarray, camera: Pose) -> np.ndarray:
    w2c = inverse(camera)
    return points @ w2c.rotation.as_matrix().T + w2c.translation


def _screen_quantities(cam_pts: np.ndarray, K: CameraIntrinsics):
    """Cull against the near plane, project, and size the splats."""
    keep = cam_pts[:, 2] >= K.near
    idx = np.nonzero(keep)[0]
    z = cam_pts[idx, 2]
    u = K.fx * cam_pts[idx, 0] / z + K.cx
    v = K.fy * cam_pts[idx, 1] / z + K.cy
    sig = np.clip(POINT_RADIUS * K.fx / z, SIGMA_MIN_PX, SIGMA_MAX_PX)
    reach = TRUNCATION_SIGMAS * sig
    on_screen = ((u + reach >= 0.0) & (u - reach <= K.width - 1)
                 & (v + reach >= 0.0) & (v - reach <= K.height - 1))
    return idx[on_screen], u[on_screen], v[on_screen], z[on_screen], sig[on_screen]


def render(scene: SceneAssets, camera: Pose, K: CameraIntrinsics) -> RenderedFrame:
    """Render the RGB view plus object/hand masks and a depth raster."""
    clouds = scene.clouds()
    points = np.vstack([c.points for c in clouds])
    colors = np.vstack([c.colors for c in clouds])
    labels = np.concatenate([np.full(len(c), i) for i, c in enumerate(clouds)])

    cam_pts = _camera_frame_points(points, camera)
    idx, u, v, z, sig = _screen_quantities(cam_pts, K)

    if len(idx) == 0:
        shape = (K.height, K.width)
        return RenderedFrame(np.zeros((*shape, 3), dtype=np.uint8),
                             np.zeros(shape, dtype=bool),
                             np.zeros(shape, dtype=bool),
                             np.zeros(shape))

    # Painter's order: farthest first, ties broken by original point index.
    order = np.lexsort((idx, -z))
    rgb_f, depth = _composite_splats(order, u, v, z, sig, colors[idx],
                                     K.height, K.width, ALPHA_PEAK,
                                     TRUNCATION_SIGMAS)
    rgb = np.rint(np.clip(rgb_f, 0.0, 1.0) * 255.0).astype(np.uint8)

    masks = {}
    kept_labels = labels[idx]
    for label_id, cloud in enumerate(clouds):
        if cloud.label not in ("object", "hand"):
            continue
        sel = kept_labels == label_id
        # Disc radius of at least one pixel so every projected point owns
        # its rounded pixel; never larger than the 3-sigma color footprint.
        radii = np.maximum(sig[sel], 1.0)
        occ = _stamp_discs(u[sel], v[sel], radii, K.height, K.width)
        masks[cloud.label] = occ >= MASK_OCCUPANCY_THRESHOLD

    empty = np.zeros((K.height, K.width), dtype=bool)
    return RenderedFrame(rgb, masks.get("object", empty), masks.get("hand", empty),
                         depth)


def masked_input(frame: RenderedFrame) -> RenderedFrame:
    """Zero the RGB outside the hand/object masks (background removal)."""
    keep = frame.object_mask | frame.hand_mask
    rgb = np.where(keep[..., None], frame.rgb, 0).astype(np.uint8)
    return RenderedFrame(rgb, frame.object_mask, frame.hand_mask, frame.depth)


def write_ppm(path, rgb: np.ndarray) -> None:
    h, w, _ = rgb.shape
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode())
        f.write(np.ascontiguousarray(rgb, dtype=np.uint8).tobytes())


def read_ppm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    fields, offset = _read_pnm_header(data, b"P6")
    w, h = fields
    return np.frombuffer(data, dtype=np.uint8, count=w * h * 3,
                         offset=offset).reshape(h, w, 3).copy()


def write_pgm(path, mask: np.ndarray) -> None:
    h, w = mask.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode())
        f.write((mask.astype(np.uint8) * 255).tobytes())


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    fields, offset = _read_pnm_header(data, b"P5")
    w, h = fields
    raw = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=offset)
    return (raw.reshape(h, w) >= 128).copy()


def _read_pnm_header(data: bytes, magic: bytes):
    if not data.startswith(magic):
        raise ValueError(f"expected {magic.decode()} header")
    # Three ASCII integers, then exactly one whitespace byte before the raster.
    pos = len(magic)
    vals = []
    for _ in range(3):
        while data[pos] in b" \t\r\n":
            pos += 1
        start = pos
        while data[pos] not in b" \t\r\n":
            pos += 1
        vals.append(int(data[start:pos]))
    pos += 1
    w, h, maxval = vals
    if maxval != 255:
        raise ValueError("only 8-bit PNM rasters are supported")
    return (w, h), pos


def write_depth(path, depth: np.ndarray) -> None:
    h, w = depth.shape
    with open(path, "wb") as f:
        f.write(struct.pack("<II", w, h))
        f.write(depth.astype("<f4").tobytes())


def read_depth(path) -> np.ndarray:
    data = Path(path).read_bytes()
    w, h = struct.unpack_from("<II", data, 0)
    return np.frombuffer(data, dtype="<f4", count=w * h, offset=8).reshape(h, w).astype(np.float64)
