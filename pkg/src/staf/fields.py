"""Ground-truth field synthesis: keypoint heatmaps and limb/temporal vector fields.

This module plays the role of the heatmap-producing network. Given annotated
poses it rasterizes, on a stride-aligned grid:

  * one confidence channel per keypoint (per-cell max of Gaussians),
  * one 2-channel unit-vector field per limb edge (same-frame pairs),
  * one 2-channel unit-vector field per temporal edge (prev-frame src to
    current-frame dst, matched by person id).

Cells written by several people are averaged and re-normalized to unit
length. When no previous frame exists the temporal channels are warm-started
by rasterizing with the current frame standing in for the previous one, so
that in the zero-motion case the temporal fields coincide exactly with the
spatial ones.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .body import BodyTopology

MAGIC = b"STAF"
FORMAT_VERSION = 1

DEFAULT_SIGMA = 7.0  # input pixels; peak support ~2 cells at stride 8
DEFAULT_RADIUS = 8.0  # input pixels; one cell of field thickness


@dataclass(frozen=True)
class GridSpec:
    """Heatmap grid geometry: cells plus input-pixels-per-cell stride.

    Cell (row i, col j) has its center at ((j + 0.5) * stride,
    (i + 0.5) * stride) in input coordinates.
    """

    width: int = 46
    height: int = 46
    stride: int = 8

    def __post_init__(self):
        if self.width < 8 or self.height < 8:
            raise ValueError("grid must be at least 8x8 cells")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")

    @property
    def input_width(self) -> int:
        return self.width * self.stride

    @property
    def input_height(self) -> int:
        return self.height * self.stride

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """(xs[width], ys[height]) of cell centers in input pixels."""
        xs = (np.arange(self.width) + 0.5) * self.stride
        ys = (np.arange(self.height) + 0.5) * self.stride
        return xs, ys


@dataclass
class AnnotatedPose:
    """Ground-truth pose: per-keypoint input-pixel positions and visibility."""

    person_id: int
    keypoints: np.ndarray  # (K, 2) float, garbage where not visible
    visible: np.ndarray  # (K,) bool
    head_size: float = 0.0

    def present(self) -> int:
        return int(self.visible.sum())


@dataclass
class FieldStack:
    """Dense channel grid for one frame, laid out per the topology channel map."""

    spec: GridSpec
    layout: BodyTopology
    data: np.ndarray  # (H, W, C) float32
    frame_index: int = 0

    @classmethod
    def zeros(cls, spec: GridSpec, layout: BodyTopology, frame_index: int = 0):
        data = np.zeros((spec.height, spec.width, layout.n_channels), np.float32)
        return cls(spec, layout, data, frame_index)

    def confidence(self, keypoint: int) -> np.ndarray:
        return self.data[:, :, keypoint]

    def spatial_field(self, edge_index: int) -> np.ndarray:
        c = self.layout.spatial_channel(edge_index)
        return self.data[:, :, c : c + 2]

    def temporal_field(self, edge_index: int) -> np.ndarray:
        c = self.layout.temporal_channel(edge_index)
        return self.data[:, :, c : c + 2]

    def copy(self) -> "FieldStack":
        return FieldStack(self.spec, self.layout, self.data.copy(), self.frame_index)


def rasterize_confidence(
    poses: list[AnnotatedPose],
    sigma: float,
    spec: GridSpec,
    out: np.ndarray | None = None,
    n_keypoints: int = 21,
) -> np.ndarray:
    """Write per-keypoint Gaussian peaks, max-combined over people.

    Each cell of channel k holds max_p exp(-d^2 / sigma^2) with d the
    input-pixel distance from the cell center to person p's keypoint k.
    Values below 1e-12 are flushed to zero; far tails would otherwise fill
    the grid with subnormal floats whose arithmetic is pathologically slow.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if out is None:
        out = np.zeros((spec.height, spec.width, n_keypoints), np.float32)
    xs, ys = spec.cell_centers()
    inv = 1.0 / (sigma * sigma)
    for pose in poses:
        for k in range(out.shape[2]):
            if not pose.visible[k]:
                continue
            px, py = pose.keypoints[k]
            d2 = (xs[None, :] - px) ** 2 + (ys[:, None] - py) ** 2
            np.maximum(out[:, :, k], np.exp(-d2 * inv), out=out[:, :, k])
    out[:, :, :] = np.where(out < 1e-12, 0.0, out)
    return out


def segment_cell_mask(
    a: np.ndarray, b: np.ndarray, radius: float, spec: GridSpec
) -> np.ndarray:
    """(H, W) bool mask of cells whose center lies within radius of segment a->b."""
    xs, ys = spec.cell_centers()
    px = np.broadcast_to(xs[None, :], (spec.height, spec.width))
    py = np.broadcast_to(ys[:, None], (spec.height, spec.width))
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        d2 = (px - a[0]) ** 2 + (py - a[1]) ** 2
        return d2 <= radius * radius
    t = ((px - a[0]) * ab[0] + (py - a[1]) * ab[1]) / denom
    t = np.clip(t, 0.0, 1.0)
    cx = a[0] + t * ab[0]
    cy = a[1] + t * ab[1]
    d2 = (px - cx) ** 2 + (py - cy) ** 2
    return d2 <= radius * radius


def rasterize_field(
    a,
    b,
    radius: float,
    spec: GridSpec,
    out: np.ndarray,
    counts: np.ndarray | None = None,
) -> None:
    """Rasterize the unit vector of segment a->b into a 2-channel grid.

    Every cell whose center lies within `radius` of the segment receives
    (b - a) / |b - a|. A zero-length segment has no direction and writes
    nothing. With `counts` given, vectors are accumulated for later
    averaging via normalize_field (the multi-person path); without it the
    unit vector is written directly.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    a = np.asarray(a, np.float64)
    b = np.asarray(b, np.float64)
    d = b - a
    norm = float(np.hypot(d[0], d[1]))
    if norm == 0.0:
        return
    u = d / norm
    mask = segment_cell_mask(a, b, radius, spec)
    if counts is None:
        out[mask, 0] = u[0]
        out[mask, 1] = u[1]
    else:
        out[mask, 0] += u[0]
        out[mask, 1] += u[1]
        counts[mask] += 1


def normalize_field(out: np.ndarray, counts: np.ndarray) -> None:
    """Average accumulated vectors and rescale to unit length in place.

    Cells whose average cancels to (near) zero are zeroed: opposing people
    carry no usable direction there.
    """
    written = counts > 0
    if not written.any():
        return
    avg = out[written] / counts[written, None]
    norm = np.hypot(avg[:, 0], avg[:, 1])
    keep = norm > 1e-12
    unit = np.zeros_like(avg)
    unit[keep] = avg[keep] / norm[keep, None]
    out[written] = unit


def synthesize_frame(
    cur: list[AnnotatedPose],
    prev: list[AnnotatedPose] | None,
    topology: BodyTopology,
    spec: GridSpec,
    sigma: float = DEFAULT_SIGMA,
    radius: float = DEFAULT_RADIUS,
    frame_index: int = 0,
) -> FieldStack:
    """Build the full channel stack for one frame from annotated poses.

    Temporal channels pair prev-frame sources with current-frame targets by
    person id; people whose id is missing from `prev` contribute no temporal
    vectors. With prev=None every person is warm-started against itself.
    """
    stack = FieldStack.zeros(spec, topology, frame_index)
    k = topology.n_keypoints
    rasterize_confidence(cur, sigma, spec, out=stack.data[:, :, :k], n_keypoints=k)

    counts = np.zeros((spec.height, spec.width), np.int32)
    for i, edge in enumerate(topology.spatial_edges):
        out = stack.spatial_field(i)
        counts[:] = 0
        for pose in cur:
            if pose.visible[edge.src] and pose.visible[edge.dst]:
                rasterize_field(
                    pose.keypoints[edge.src],
                    pose.keypoints[edge.dst],
                    radius,
                    spec,
                    out,
                    counts,
                )
        normalize_field(out, counts)

    prev_by_id = None if prev is None else {p.person_id: p for p in prev}
    for j, edge in enumerate(topology.temporal_edges):
        out = stack.temporal_field(j)
        counts[:] = 0
        for pose in cur:
            if prev_by_id is None:
                prev_pose = pose  # warm start: previous frame assumed identical
            else:
                prev_pose = prev_by_id.get(pose.person_id)
                if prev_pose is None:
                    continue
            if prev_pose.visible[edge.src_prev] and pose.visible[edge.dst_cur]:
                rasterize_field(
                    prev_pose.keypoints[edge.src_prev],
                    pose.keypoints[edge.dst_cur],
                    radius,
                    spec,
                    out,
                    counts,
                )
        normalize_field(out, counts)
    return stack


@dataclass(frozen=True)
class CorruptionModel:
    """Deterministic degradation emulating imperfect network heatmaps."""

    gaussian_noise_sd: float = 0.0
    dropout_prob: float = 0.0
    jitter_cells: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.gaussian_noise_sd < 0 or self.jitter_cells < 0:
            raise ValueError("corruption parameters must be >= 0")
        if not 0.0 <= self.dropout_prob <= 1.0:
            raise ValueError("dropout_prob must lie in [0, 1]")


def _peak_cells(channel: np.ndarray, floor: float = 0.3) -> list[tuple[int, int]]:
    h, w = channel.shape
    padded = np.full((h + 2, w + 2), -np.inf)
    padded[1:-1, 1:-1] = channel
    center = padded[1:-1, 1:-1]
    is_max = center >= floor
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dx == 0 and dy == 0:
                continue
            is_max &= center > padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
    ys, xs = np.nonzero(is_max)
    return list(zip(ys.tolist(), xs.tolist()))


def corrupt(stack: FieldStack, model: CorruptionModel) -> FieldStack:
    """Apply the corruption model and re-clamp the channel invariants.

    Noise hits all channels; dropout zeroes whole keypoint peaks; jitter
    moves peak neighborhoods by up to jitter_cells. Identical seeds give
    identical outputs.
    """
    out = stack.copy()
    if model.gaussian_noise_sd == 0 and model.dropout_prob == 0 and model.jitter_cells == 0:
        return out
    rng = np.random.Generator(np.random.PCG64(model.seed))
    k = stack.layout.n_keypoints
    patch = 3  # cells kept around a peak when dropping or moving it

    for c in range(k):
        chan = out.data[:, :, c]
        for (py, px) in _peak_cells(chan):
            y0, y1 = max(0, py - patch), min(chan.shape[0], py + patch + 1)
            x0, x1 = max(0, px - patch), min(chan.shape[1], px + patch + 1)
            if model.dropout_prob > 0 and rng.random() < model.dropout_prob:
                chan[y0:y1, x0:x1] = 0.0
                continue
            if model.jitter_cells > 0:
                dy = int(rng.integers(-model.jitter_cells, model.jitter_cells + 1))
                dx = int(rng.integers(-model.jitter_cells, model.jitter_cells + 1))
                if dy or dx:
                    blob = chan[y0:y1, x0:x1].copy()
                    chan[y0:y1, x0:x1] = 0.0
                    ty0, tx0 = y0 + dy, x0 + dx
                    sy0, sx0 = max(0, -ty0), max(0, -tx0)
                    ty0, tx0 = max(0, ty0), max(0, tx0)
                    ty1 = min(chan.shape[0], ty0 + blob.shape[0] - sy0)
                    tx1 = min(chan.shape[1], tx0 + blob.shape[1] - sx0)
                    if ty1 > ty0 and tx1 > tx0:
                        np.maximum(
                            chan[ty0:ty1, tx0:tx1],
                            blob[sy0 : sy0 + ty1 - ty0, sx0 : sx0 + tx1 - tx0],
                            out=chan[ty0:ty1, tx0:tx1],
                        )

    if model.gaussian_noise_sd > 0:
        out.data += rng.normal(0.0, model.gaussian_noise_sd, out.data.shape).astype(
            np.float32
        )

    np.clip(out.data[:, :, :k], 0.0, 1.0, out=out.data[:, :, :k])
    vec = out.data[:, :, k:]
    if vec.shape[2]:
        pairs = vec.reshape(vec.shape[0], vec.shape[1], -1, 2)
        mag = np.hypot(pairs[..., 0], pairs[..., 1])
        over = mag > 1.0
        if over.any():
            scale = np.ones_like(mag)
            scale[over] = 1.0 / mag[over]
            pairs *= scale[..., None]
    return out


# ---------------------------------------------------------------------------
# binary stack format: magic "STAF", u32 version, then u32 width, height,
# channels, stride, frame_index, then little-endian float32 in [h][w][c] order
# ---------------------------------------------------------------------------

_HEADER = struct.Struct("<4sIIIIII")


def save_field_stack(stack: FieldStack, path) -> None:
    h, w, c = stack.data.shape
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(MAGIC, FORMAT_VERSION, w, h, c, stack.spec.stride, stack.frame_index)
        )
        fh.write(np.ascontiguousarray(stack.data, "<f4").tobytes())


def load_field_stack(path, layout: BodyTopology) -> FieldStack:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, version, w, h, c, stride, frame_index = _HEADER.unpack(head)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported format version {version}")
        if c != layout.n_channels:
            raise ValueError(
                f"{path}: {c} channels but topology {layout.variant} expects {layout.n_channels}"
            )
        raw = fh.read(4 * h * w * c)
        if len(raw) != 4 * h * w * c:
            raise ValueError(f"{path}: truncated payload")
    data = np.frombuffer(raw, "<f4").reshape(h, w, c).copy()
    return FieldStack(GridSpec(w, h, stride), layout, data, frame_index)
