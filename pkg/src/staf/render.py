"""Overlay rendering of tracked poses to portable pixmaps.

Binary PPM needs no codec, keeps fixtures byte-exact, and every common
viewer opens it. Each tracklet id hashes to a stable color, so the same
person keeps the same color across frames and runs.
"""

from __future__ import annotations

import colorsys

import numpy as np

from .body import BodyTopology
from .tracking import PoseFrame

DOT_RADIUS = 2


def id_color(ident: int) -> tuple[int, int, int]:
    """Stable, well-spread color for a tracklet id.

    Successive ids step the hue by the golden ratio, which keeps any small
    set of ids visually distinct without a palette table.
    """
    hue = (ident * 0.6180339887498949) % 1.0
    r, g, b = colorsys.hsv_to_rgb(hue, 0.85, 0.95)
    return int(255 * r), int(255 * g), int(255 * b)


def _limb_pairs(topology: BodyTopology) -> list[tuple[int, int]]:
    if topology.spatial_edges:
        return [(e.src, e.dst) for e in topology.spatial_edges]
    # no in-frame edges defined: fall back to the limbs behind the temporal set
    seen = []
    for e in topology.temporal_edges:
        pair = (min(e.src_prev, e.dst_cur), max(e.src_prev, e.dst_cur))
        if pair[0] != pair[1] and pair not in seen:
            seen.append(pair)
    return seen


def _draw_line(img: np.ndarray, a, b, color) -> None:
    h, w = img.shape[:2]
    n = int(max(abs(b[0] - a[0]), abs(b[1] - a[1]))) + 1
    t = np.linspace(0.0, 1.0, n + 1)
    xs = np.rint(a[0] + t * (b[0] - a[0])).astype(int)
    ys = np.rint(a[1] + t * (b[1] - a[1])).astype(int)
    keep = (xs >= 0) & (xs < w) & (ys >= 0) & (ys < h)
    img[ys[keep], xs[keep]] = color


def _draw_dot(img: np.ndarray, x: float, y: float, color, radius: int = DOT_RADIUS) -> None:
    h, w = img.shape[:2]
    cx, cy = int(round(x)), int(round(y))
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            if dx * dx + dy * dy > radius * radius:
                continue
            px, py = cx + dx, cy + dy
            if 0 <= px < w and 0 <= py < h:
                img[py, px] = color


def render_frame(
    frame: PoseFrame,
    width: int,
    height: int,
    topology: BodyTopology,
) -> np.ndarray:
    """Draw one frame's poses onto a black canvas; (height, width, 3) uint8."""
    img = np.zeros((height, width, 3), np.uint8)
    limbs = _limb_pairs(topology)
    for pose in frame.poses:
        color = id_color(pose.ident)
        for a, b in limbs:
            if pose.visible[a] and pose.visible[b]:
                _draw_line(img, pose.keypoints[a], pose.keypoints[b], color)
        for kp in range(len(pose.visible)):
            if pose.visible[kp]:
                _draw_dot(img, pose.keypoints[kp, 0], pose.keypoints[kp, 1], color)
    return img


def write_ppm(img: np.ndarray, path) -> None:
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise ValueError("expected (height, width, 3) uint8 image")
    h, w = img.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode())
        fh.write(img.tobytes())


def read_ppm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"P6":
            raise ValueError(f"{path}: not a binary pixmap")
        dims = fh.readline().split()
        maxval = fh.readline().strip()
        if len(dims) != 2 or maxval != b"255":
            raise ValueError(f"{path}: unsupported pixmap header")
        w, h = int(dims[0]), int(dims[1])
        raw = fh.read(w * h * 3)
    return np.frombuffer(raw, np.uint8).reshape(h, w, 3)
