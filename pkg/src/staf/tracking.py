"""Online frame-to-frame identity tracking on top of per-frame decoding.

Each decoded pose collects votes from the temporal channels: every keypoint
looks for the best-supported connection back to some tracked person's
matching keypoint in the previous frame and votes for that person's id. The
majority id wins; poses without enough votes open a new tracklet. A
scale-gated nearest-neighbor tracker is included as the comparison baseline.

Frames must be fed strictly in order. State never looks ahead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .body import BodyTopology
from .fields import FieldStack, GridSpec
from .inference import (
    AssembledPose,
    InferenceParams,
    TemporalContext,
    _batch_scores,
    field_block,
    infer_frame,
    probe_occupancy,
)


class FrameOrderError(RuntimeError):
    """Raised when frames arrive out of order or repeat."""


@dataclass(frozen=True)
class TrackerParams:
    min_id_votes: int = 2
    max_misses: int = 0
    nn_gate_factor: float = 0.3

    def __post_init__(self):
        if self.min_id_votes < 1:
            raise ValueError("min_id_votes must be >= 1")
        if self.max_misses < 0:
            raise ValueError("max_misses must be >= 0")
        if self.nn_gate_factor <= 0:
            raise ValueError("nn_gate_factor must be positive")


@dataclass
class TrackedPose:
    """Pose with an identity: the unit every consumer downstream works on."""

    ident: int
    keypoints: np.ndarray  # (K, 2)
    visible: np.ndarray  # (K,) bool
    score: float = 0.0
    head_size: float = 0.0

    def present(self) -> int:
        return int(self.visible.sum())

    def bbox_diagonal(self) -> float:
        if not self.visible.any():
            return 0.0
        pts = self.keypoints[self.visible]
        span = pts.max(axis=0) - pts.min(axis=0)
        return float(np.hypot(span[0], span[1]))


@dataclass
class PoseFrame:
    frame_index: int
    poses: list[TrackedPose] = field(default_factory=list)


@dataclass
class Tracklet:
    ident: int
    pose: TrackedPose
    last_frame: int
    hits: int = 1
    misses: int = 0


def distance_caps(
    prev: list[TrackedPose], topology: BodyTopology, spec: GridSpec
) -> tuple[dict[int, float], dict[int, float]]:
    """Per-edge pair-distance limits derived from last frame's limb lengths.

    A spatial edge accepts pairs up to twice its median observed length; a
    temporal edge allows its underlying limb's budget plus a quarter frame
    diagonal of motion. With nothing observed yet everything falls back to
    the quarter-diagonal default.
    """
    default = float(np.hypot(spec.input_width, spec.input_height)) / 4.0
    floor = 2.0 * spec.stride
    n_spatial = len(topology.spatial_edges)
    caps = np.full(n_spatial, default)
    if prev and n_spatial:
        kp = np.stack([p.keypoints for p in prev])
        vis = np.stack([p.visible for p in prev])
        src = np.array([e.src for e in topology.spatial_edges])
        dst = np.array([e.dst for e in topology.spatial_edges])
        d = kp[:, dst] - kp[:, src]
        lengths = np.hypot(d[..., 0], d[..., 1])
        observed = vis[:, src] & vis[:, dst]
        lengths = np.where(observed, lengths, np.nan)
        have = observed.any(axis=0)
        if have.any():
            med = np.nanmedian(lengths[:, have], axis=0)
            caps[have] = np.maximum(2.0 * med, floor)
    spatial = {i: float(c) for i, c in enumerate(caps)}
    temporal: dict[int, float] = {}
    for j, edge in enumerate(topology.temporal_edges):
        if edge.limb_index >= 0:
            temporal[j] = spatial.get(edge.limb_index, default) + default
        else:
            temporal[j] = default
    return spatial, temporal


def vote_ids(
    stack: FieldStack,
    prev: list[TrackedPose],
    poses: list[AssembledPose],
    topology: BodyTopology,
    params: InferenceParams,
    temporal_caps: dict[int, float] | None = None,
) -> list[tuple[int, int, float]]:
    """Majority vote of temporal support per pose.

    Every visible keypoint of a decoded pose finds its best field-backed
    connection from any previous person's matching keypoint and votes for
    that person. Returns per pose (winning prev index or -1, vote count,
    summed vote score); ties go to the lowest previous id.
    """
    n_poses = len(poses)
    out: list[tuple[int, int, float]] = [(-1, 0, 0.0)] * n_poses
    if not prev or not poses:
        return out
    k = topology.n_keypoints
    n_edges = len(topology.temporal_edges)
    prev_kp = np.stack([p.keypoints for p in prev])
    prev_vis = np.stack([p.visible for p in prev])
    cur_kp = np.stack([p.keypoints for p in poses])
    cur_vis = np.stack([p.visible for p in poses])
    idents = np.array([p.ident for p in prev])
    src_of = np.array([e.src_prev for e in topology.temporal_edges])
    dst_of = np.array([e.dst_cur for e in topology.temporal_edges])

    caps = np.full(n_edges, np.inf)
    if temporal_caps is not None:
        for j, cap in temporal_caps.items():
            if cap is not None:
                caps[j] = cap

    # every (prev person, pose, edge) combination at once, visibility- and
    # cap-masked; a pose-level reach gate trims hopeless pairs early
    src_all = prev_kp[:, src_of]  # (P, E, 2)
    dst_all = cur_kp[:, dst_of]  # (C, E, 2)
    d = dst_all[None, :, :, :] - src_all[:, None, :, :]
    dist = np.hypot(d[..., 0], d[..., 1])  # (P, C, E)
    ok = prev_vis[:, src_of][:, None, :] & cur_vis[:, dst_of][None, :, :]
    ok &= dist <= caps[None, None, :]
    if np.isfinite(caps).any():
        reach = caps[np.isfinite(caps)].max()
        prev_c = prev_kp.mean(axis=1)
        cur_c = cur_kp.mean(axis=1)
        prev_r = np.hypot(*(prev_kp - prev_c[:, None]).transpose(2, 0, 1)).max(axis=1)
        cur_r = np.hypot(*(cur_kp - cur_c[:, None]).transpose(2, 0, 1)).max(axis=1)
        cd = np.hypot(*(cur_c[None] - prev_c[:, None]).transpose(2, 0, 1))
        ok &= (cd <= reach + prev_r[:, None] + cur_r[None, :])[:, :, None]
    pi, ci, eix = np.nonzero(ok)
    if not len(pi):
        return out
    src = src_all[pi, eix]
    dst = dst_all[ci, eix]
    dkp = dst_of[eix]

    block = field_block(stack, "temporal")
    hits = probe_occupancy(block, src, dst, eix, stack.spec)
    if not hits.any():
        return out
    src, dst, eix = src[hits], dst[hits], eix[hits]
    pi, ci, dkp = pi[hits], ci[hits], dkp[hits]

    scores, valid, _ = _batch_scores(block, src, dst, eix, stack.spec, params)
    keep = (valid >= params.min_valid_fraction) & (scores >= params.min_connection_score)
    if not keep.any():
        return out
    scores, pi, ci, dkp = scores[keep], pi[keep], ci[keep], dkp[keep]

    # best backing connection per (pose, keypoint); score ties go to the
    # lowest previous id so the outcome never depends on iteration order
    keys = ci * k + dkp
    order = np.lexsort((-idents[pi], scores, keys))
    sorted_keys = keys[order]
    last_of_group = np.nonzero(np.r_[sorted_keys[1:] != sorted_keys[:-1], True])[0]
    chosen = order[last_of_group]

    counts: dict[tuple[int, int], int] = {}
    sums: dict[tuple[int, int], float] = {}
    for idx in chosen.tolist():
        key = (int(ci[idx]), int(pi[idx]))
        counts[key] = counts.get(key, 0) + 1
        sums[key] = sums.get(key, 0.0) + float(scores[idx])
    for pose_index in range(n_poses):
        options = [p for c, p in counts if c == pose_index]
        if not options:
            continue
        winner = min(
            options, key=lambda p: (-counts[(pose_index, p)], idents[p])
        )
        out[pose_index] = (
            winner,
            counts[(pose_index, winner)],
            sums[(pose_index, winner)],
        )
    return out


def resolve_claims(
    votes: list[tuple[int, int, float]],
    prev_idents: list[int],
    min_id_votes: int,
    next_id: int,
) -> tuple[list[int], int]:
    """Turn raw votes into final ids, one pose per previous identity.

    When several poses claim the same previous id the one with more votes
    keeps it (then higher vote score, then first in order); everyone else,
    and any pose under the vote minimum, gets a fresh id.
    """
    n = len(votes)
    idents = [-1] * n
    claims: dict[int, list[int]] = {}
    for ci, (pi, count, _) in enumerate(votes):
        if pi >= 0 and count >= min_id_votes:
            claims.setdefault(pi, []).append(ci)
    for pi, claimants in claims.items():
        claimants.sort(key=lambda ci: (-votes[ci][1], -votes[ci][2], ci))
        idents[claimants[0]] = prev_idents[pi]
    for ci in range(n):
        if idents[ci] < 0:
            idents[ci] = next_id
            next_id += 1
    return idents, next_id


class Tracker:
    """Streaming tracker: decode each stack, vote ids, carry tracklets."""

    def __init__(
        self,
        topology: BodyTopology,
        params: InferenceParams | None = None,
        tracker_params: TrackerParams | None = None,
    ):
        self.topology = topology
        self.params = params or InferenceParams()
        self.tracker_params = tracker_params or TrackerParams()
        self.tracklets: list[Tracklet] = []
        self.next_id = 0
        self.frame_index: int | None = None

    def _check_order(self, frame_index: int) -> None:
        if self.frame_index is not None and frame_index != self.frame_index + 1:
            raise FrameOrderError(
                f"frame {frame_index} after frame {self.frame_index}; "
                "frames must advance by exactly one"
            )

    def _decode(self, stack: FieldStack, use_temporal: bool) -> list[AssembledPose]:
        prev_poses = [t.pose for t in self.tracklets]
        spatial_caps, temporal_caps = distance_caps(prev_poses, self.topology, stack.spec)
        caps = spatial_caps if self.topology.spatial_edges else temporal_caps
        ctx = None
        if use_temporal and prev_poses:
            ctx = TemporalContext(
                stack,
                np.stack([p.keypoints for p in prev_poses]),
                np.stack([p.visible for p in prev_poses]),
                self.params,
            )
        self._temporal_caps = temporal_caps
        return infer_frame(stack, self.topology, self.params, ctx, caps)

    def _commit(self, frame_index: int, tracked: list[TrackedPose]) -> PoseFrame:
        by_id = {t.ident: t for t in self.tracklets}
        survivors = []
        seen = set()
        for pose in tracked:
            seen.add(pose.ident)
            old = by_id.get(pose.ident)
            if old is None:
                survivors.append(Tracklet(pose.ident, pose, frame_index))
            else:
                old.pose = pose
                old.last_frame = frame_index
                old.hits += 1
                survivors.append(old)
        for t in self.tracklets:
            if t.ident in seen:
                continue
            t.misses += 1
            if t.misses <= self.tracker_params.max_misses:
                survivors.append(t)
        self.tracklets = survivors
        self.frame_index = frame_index
        return PoseFrame(frame_index, tracked)

    def step(self, stack: FieldStack) -> PoseFrame:
        self._check_order(stack.frame_index)
        poses = self._decode(stack, use_temporal=True)
        prev_poses = [t.pose for t in self.tracklets]
        votes = vote_ids(
            stack, prev_poses, poses, self.topology, self.params, self._temporal_caps
        )
        idents, self.next_id = resolve_claims(
            votes,
            [t.ident for t in self.tracklets],
            self.tracker_params.min_id_votes,
            self.next_id,
        )
        tracked = [
            TrackedPose(ident, p.keypoints, p.visible, p.score)
            for ident, p in zip(idents, poses)
        ]
        return self._commit(stack.frame_index, tracked)


class BaselineNNTracker(Tracker):
    """Identity by scale-gated nearest neighbor instead of temporal fields.

    A decoded pose inherits the id of the closest previous pose, greedily by
    mean keypoint distance, as long as that distance stays under
    nn_gate_factor times the previous pose's bounding-box diagonal. Decoding
    itself runs without temporal re-weighing so the fields play no part.
    """

    def step(self, stack: FieldStack) -> PoseFrame:
        self._check_order(stack.frame_index)
        poses = self._decode(stack, use_temporal=False)
        pairs = []
        for ti, t in enumerate(self.tracklets):
            gate = self.tracker_params.nn_gate_factor * t.pose.bbox_diagonal()
            for ci, pose in enumerate(poses):
                both = t.pose.visible & pose.visible
                if not both.any():
                    continue
                d = t.pose.keypoints[both] - pose.keypoints[both]
                mean_dist = float(np.hypot(d[:, 0], d[:, 1]).mean())
                if mean_dist <= gate:
                    pairs.append((mean_dist, ti, ci))
        pairs.sort(key=lambda p: (p[0], p[1], p[2]))
        idents = [-1] * len(poses)
        used_prev: set[int] = set()
        for dist, ti, ci in pairs:
            if ti in used_prev or idents[ci] >= 0:
                continue
            used_prev.add(ti)
            idents[ci] = self.tracklets[ti].ident
        for ci in range(len(poses)):
            if idents[ci] < 0:
                idents[ci] = self.next_id
                self.next_id += 1
        tracked = [
            TrackedPose(ident, p.keypoints, p.visible, p.score)
            for ident, p in zip(idents, poses)
        ]
        return self._commit(stack.frame_index, tracked)


def make_tracker(
    kind: str,
    topology: BodyTopology,
    params: InferenceParams | None = None,
    tracker_params: TrackerParams | None = None,
) -> Tracker:
    if kind == "taf":
        return Tracker(topology, params, tracker_params)
    if kind in ("nn", "baseline_nn"):
        return BaselineNNTracker(topology, params, tracker_params)
    raise ValueError(f"unknown tracker kind {kind!r} (expected 'taf' or 'baseline_nn')")


# ---------------------------------------------------------------------------
# pose stream serialization: one JSON object per line, header line first
# ---------------------------------------------------------------------------


def pose_to_json(pose: TrackedPose) -> dict:
    rec = {
        "id": int(pose.ident),
        "keypoints": [[float(x), float(y)] for x, y in pose.keypoints],
        "visible": [int(v) for v in pose.visible],
        "score": float(pose.score),
    }
    if pose.head_size:
        rec["head_size"] = float(pose.head_size)
    return rec


def pose_from_json(rec: dict) -> TrackedPose:
    return TrackedPose(
        ident=int(rec["id"]),
        keypoints=np.asarray(rec["keypoints"], float),
        visible=np.asarray(rec["visible"], bool),
        score=float(rec.get("score", 0.0)),
        head_size=float(rec.get("head_size", 0.0)),
    )


def save_pose_frames(frames: list[PoseFrame], path, meta: dict | None = None) -> None:
    header = {"type": "poses", "version": 1}
    if meta:
        header.update(meta)
    with open(path, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for frame in frames:
            rec = {
                "frame": frame.frame_index,
                "poses": [pose_to_json(p) for p in frame.poses],
            }
            fh.write(json.dumps(rec) + "\n")


def load_pose_frames(path) -> tuple[dict, list[PoseFrame]]:
    frames = []
    with open(path) as fh:
        first = fh.readline()
        if not first.strip():
            raise ValueError(f"{path}: empty pose file")
        header = json.loads(first)
        if not isinstance(header, dict) or header.get("type") != "poses":
            raise ValueError(f"{path}: missing pose-stream header line")
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            rec = json.loads(line)
            try:
                frames.append(
                    PoseFrame(int(rec["frame"]), [pose_from_json(p) for p in rec["poses"]])
                )
            except (KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{line_no}: bad frame record: {exc}") from exc
    return header, frames
