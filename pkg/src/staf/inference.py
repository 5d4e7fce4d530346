"""Bottom-up pose decoding from dense field stacks.

Pipeline: find per-keypoint peaks in the confidence channels, score every
feasible peak pair against the matching vector field by sampling along the
candidate segment, then greedily assemble peaks into poses from the globally
best-scoring connections down.

Scoring is batched: all candidate pairs of all edges go through one gather
over the stacked fields, which keeps per-frame cost nearly flat in crowd
size. When a previous frame is available, ambiguous spatial decisions
(several near-tied candidates for one endpoint) are re-weighed with the
temporal field before choosing, which is what lets crossing people keep
their limbs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .body import BodyTopology
from .fields import FieldStack, GridSpec


@dataclass(frozen=True)
class InferenceParams:
    peak_threshold: float = 0.1
    n_samples: int = 10
    sample_threshold: float = 0.05
    min_valid_fraction: float = 0.4
    min_connection_score: float = 0.05
    min_keypoints: int = 3
    alpha: float = 0.5
    ambiguity_margin: float = 0.2

    def __post_init__(self):
        if not 0.0 < self.peak_threshold < 1.0:
            raise ValueError("peak_threshold must lie in (0, 1)")
        if self.n_samples < 2:
            raise ValueError("need at least 2 samples along a segment")
        if not 0.0 <= self.min_valid_fraction <= 1.0:
            raise ValueError("min_valid_fraction must lie in [0, 1]")
        if self.min_keypoints < 1:
            raise ValueError("min_keypoints must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.ambiguity_margin < 0:
            raise ValueError("ambiguity_margin must be >= 0")


@dataclass
class PeakSet:
    """All detected candidates of one keypoint type, as flat arrays."""

    keypoint: int
    xy: np.ndarray  # (n, 2) input pixels
    score: np.ndarray  # (n,)

    def __len__(self) -> int:
        return len(self.score)

    @classmethod
    def empty(cls, keypoint: int) -> "PeakSet":
        return cls(keypoint, np.zeros((0, 2)), np.zeros(0))


@dataclass(frozen=True)
class Connection:
    """A scored candidate link between two peaks of an assembly edge."""

    edge_index: int
    src_kp: int
    dst_kp: int
    src_idx: int
    dst_idx: int
    score: float
    valid_fraction: float


@dataclass
class AssembledPose:
    """Decoded pose: positions and scores where a peak was claimed."""

    keypoints: np.ndarray  # (K, 2)
    visible: np.ndarray  # (K,) bool
    peak_scores: np.ndarray  # (K,)
    score: float
    person_id: int = -1

    def present(self) -> int:
        return int(self.visible.sum())


_PAD_SCRATCH: dict[tuple[int, int, int], tuple[np.ndarray, ...]] = {}


def extract_peaks(stack: FieldStack, params: InferenceParams) -> list[PeakSet]:
    """Strict 3x3 local maxima per confidence channel, refined to sub-cell.

    Ties across a plateau keep only the first cell in scan order. Returned
    positions are in input pixels; candidates are ordered by scan order per
    keypoint type. The maxima test is whole-grid and the refinement runs on
    the few cells that survive it, so the cost is grid-bound with a small
    per-peak tail.
    """
    k = stack.layout.n_keypoints
    h, w = stack.spec.height, stack.spec.width
    # one padded copy; the channel slice of the stack is strided, so this is
    # the single pass that reads it, and everything after works on the copy.
    # The buffers (pad, mask, compare scratch) are reused across calls and
    # nothing below keeps a view into them, so the pad ring is written once
    # and the grid-sized work runs with no allocator traffic at all; the only
    # allocations left are sized by the peak count, not the grid.
    cached = _PAD_SCRATCH.get((h, w, k))
    if cached is None:
        cached = (
            np.full((h + 2, w + 2, k), -np.inf, np.float32),
            np.empty((h, w, k), bool),
            np.empty((h, w, k), bool),
        )
        _PAD_SCRATCH[(h, w, k)] = cached
    padded, mask, tmp = cached
    padded[1:-1, 1:-1] = stack.data[:, :, :k]
    conf = padded[1:-1, 1:-1]

    def shifted(dy: int, dx: int) -> np.ndarray:
        return padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]

    np.greater_equal(conf, np.float32(params.peak_threshold), out=mask)
    for dy, dx in [(-1, -1), (-1, 0), (-1, 1), (0, -1)]:
        np.greater(conf, shifted(dy, dx), out=tmp)
        mask &= tmp
    for dy, dx in [(0, 1), (1, -1), (1, 0), (1, 1)]:
        np.greater_equal(conf, shifted(dy, dx), out=tmp)
        mask &= tmp

    # transpose so peaks come out grouped by channel, scan-ordered within
    ks, ys, xs = np.nonzero(np.moveaxis(mask, 2, 0))
    if not len(ks):
        return [PeakSet.empty(c) for c in range(k)]

    # log-parabola refinement, both axes in one concatenated pass; a peak
    # cell is at or above the threshold, so only the neighbors need the
    # positivity check, and the -inf pad ring fails it, which pins border
    # offsets to zero without special cases
    flat = padded.ravel()
    row = (w + 2) * k
    idx = (ys + 1) * row + (xs + 1) * k + ks
    n = len(idx)
    center = flat[idx]
    lo = flat[np.concatenate([idx - k, idx - row])]
    hi = flat[np.concatenate([idx + k, idx + row])]
    tiny = np.float32(1e-12)
    cg = np.tile(np.log(center), 2)
    lg = np.log(np.maximum(lo, tiny))
    rg = np.log(np.maximum(hi, tiny))
    curve = lg + rg - np.float32(2.0) * cg
    ok = ((lo > tiny) & (hi > tiny) & (curve < np.float32(-1e-6))).astype(np.float32)
    divisor = np.float32(2.0) * curve * ok - (np.float32(1.0) - ok)
    off = np.clip((lg - rg) * ok / divisor, np.float32(-0.5), np.float32(0.5))

    stride = stack.spec.stride
    xy = np.stack(
        [(xs + 0.5 + off[:n]) * stride, (ys + 0.5 + off[n:]) * stride], axis=1
    )
    score = center.astype(np.float64)
    bounds = np.searchsorted(ks, np.arange(k + 1))
    return [
        PeakSet(c, xy[bounds[c] : bounds[c + 1]], score[bounds[c] : bounds[c + 1]])
        for c in range(k)
    ]


def field_block(stack: FieldStack, kind: str) -> np.ndarray:
    """All same-kind vector fields as one contiguous (h, w, n_edges, 2) array.

    Contiguity matters: batch scoring gathers through flat indices, which
    only works (and is only fast) on an unstrided copy.
    """
    k = stack.layout.n_keypoints
    n_spatial = len(stack.layout.spatial_edges)
    h, w = stack.data.shape[:2]
    if kind == "spatial":
        sub = stack.data[:, :, k : k + 2 * n_spatial]
        return np.ascontiguousarray(sub).reshape(h, w, n_spatial, 2)
    sub = stack.data[:, :, k + 2 * n_spatial :]
    return np.ascontiguousarray(sub).reshape(h, w, len(stack.layout.temporal_edges), 2)


def _batch_scores(
    block: np.ndarray,
    src: np.ndarray,
    dst: np.ndarray,
    edge_of_pair: np.ndarray,
    spec: GridSpec,
    params: InferenceParams,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Score N (segment, field) pairs in one pass.

    For each pair: sample the chosen field along the segment at n_samples
    points with bilinear interpolation, dot each sample with the segment's
    unit direction, and average. Also returns the fraction of samples whose
    dot clears sample_threshold, and the segment lengths. Zero-length
    segments score 0 with no valid samples.
    """
    n = len(src)
    if n == 0:
        return np.zeros(0), np.zeros(0), np.zeros(0)
    diff = dst - src
    dist = np.hypot(diff[:, 0], diff[:, 1])
    safe = np.where(dist > 0.0, dist, 1.0)
    unit = (diff / safe[:, None]).astype(np.float32)
    t = np.linspace(0.0, 1.0, params.n_samples, dtype=np.float32)
    pts_x = src[:, 0:1].astype(np.float32) + diff[:, 0:1].astype(np.float32) * t[None, :]
    pts_y = src[:, 1:2].astype(np.float32) + diff[:, 1:2].astype(np.float32) * t[None, :]
    gx = np.clip(pts_x / spec.stride - 0.5, 0.0, spec.width - 1.0)
    gy = np.clip(pts_y / spec.stride - 0.5, 0.0, spec.height - 1.0)
    x0 = np.minimum(gx.astype(np.intp), spec.width - 2)
    y0 = np.minimum(gy.astype(np.intp), spec.height - 2)
    fx = gx - x0
    fy = gy - y0
    n_edges = block.shape[2]
    flat = block.reshape(-1, 2)
    base = (y0 * spec.width + x0) * n_edges + edge_of_pair[:, None]
    row = spec.width * n_edges
    ux = unit[:, 0:1]
    uy = unit[:, 1:2]
    # dot each bilinear corner with the direction before blending; this
    # avoids materializing the interpolated vectors themselves
    v = flat[base]
    d00 = v[..., 0] * ux + v[..., 1] * uy
    v = flat[base + n_edges]
    d01 = v[..., 0] * ux + v[..., 1] * uy
    v = flat[base + row]
    d10 = v[..., 0] * ux + v[..., 1] * uy
    v = flat[base + row + n_edges]
    d11 = v[..., 0] * ux + v[..., 1] * uy
    dots = (1 - fy) * ((1 - fx) * d00 + fx * d01) + fy * ((1 - fx) * d10 + fx * d11)
    scores = dots.mean(axis=1, dtype=np.float64)
    valid = (dots > params.sample_threshold).mean(axis=1, dtype=np.float64)
    degenerate = dist == 0.0
    scores[degenerate] = 0.0
    valid[degenerate] = 0.0
    return scores, valid, dist


def probe_occupancy(
    block: np.ndarray,
    src: np.ndarray,
    dst: np.ndarray,
    edge_of_pair: np.ndarray,
    spec: GridSpec,
) -> np.ndarray:
    """Cheap reject test: does the field touch the segment at all?

    Looks up the nearest cell at a quarter, half, and three quarters of the
    way along each segment; a pair whose three probes all read (near) zero
    cannot reach the 40% sample coverage the scorer demands, since a
    written band covering a supported segment always spans its middle.
    """
    n_edges = block.shape[2]
    flat = block.reshape(-1, 2)
    hit = np.zeros(len(src), bool)
    for frac in (0.25, 0.5, 0.75):
        px = src[:, 0] + frac * (dst[:, 0] - src[:, 0])
        py = src[:, 1] + frac * (dst[:, 1] - src[:, 1])
        gx = np.clip(np.rint(px / spec.stride - 0.5).astype(np.intp), 0, spec.width - 1)
        gy = np.clip(np.rint(py / spec.stride - 0.5).astype(np.intp), 0, spec.height - 1)
        v = flat[(gy * spec.width + gx) * n_edges + edge_of_pair]
        hit |= (v[:, 0] * v[:, 0] + v[:, 1] * v[:, 1]) > 1e-4
    return hit


def score_pairs(
    field: np.ndarray,
    src: np.ndarray,
    dst: np.ndarray,
    spec: GridSpec,
    params: InferenceParams,
) -> tuple[np.ndarray, np.ndarray]:
    """Score every src x dst segment against one 2-channel field.

    Returns (scores, valid_fraction), each (n_src, n_dst). See
    _batch_scores for the scoring rule.
    """
    src = np.asarray(src, np.float64).reshape(-1, 2)
    dst = np.asarray(dst, np.float64).reshape(-1, 2)
    s, d = len(src), len(dst)
    if s == 0 or d == 0:
        return np.zeros((s, d)), np.zeros((s, d))
    block = np.asarray(field)[:, :, None, :]
    pair_src = np.repeat(src, d, axis=0)
    pair_dst = np.tile(dst, (s, 1))
    scores, valid, _ = _batch_scores(
        block, pair_src, pair_dst, np.zeros(s * d, np.intp), spec, params
    )
    return scores.reshape(s, d), valid.reshape(s, d)


def score_connection(
    field: np.ndarray, a, b, spec: GridSpec, params: InferenceParams
) -> float:
    """Convenience scalar form of score_pairs for a single segment."""
    scores, _ = score_pairs(field, np.asarray(a)[None], np.asarray(b)[None], spec, params)
    return float(scores[0, 0])


def assembly_edges(topology: BodyTopology) -> list[tuple[int, int, int, str]]:
    """Edges the assembler connects peaks over: (index, src_kp, dst_kp, kind).

    Spatial edges when the topology has any; otherwise the temporal edges
    double as the connection graph, with both endpoints read from the
    current frame.
    """
    if topology.spatial_edges:
        return [(i, e.src, e.dst, "spatial") for i, e in enumerate(topology.spatial_edges)]
    return [
        (j, e.src_prev, e.dst_cur, "temporal")
        for j, e in enumerate(topology.temporal_edges)
    ]


def build_connections(
    stack: FieldStack,
    peaks: list[PeakSet],
    topology: BodyTopology,
    params: InferenceParams,
    max_pair_distance: dict[int, float] | None = None,
) -> list[Connection]:
    """Score all candidate pairs of every assembly edge, filter, and sort.

    Pairs are dropped when the sample hit fraction is too low, the score is
    below min_connection_score, or (with a distance table) the pair spans
    more than the edge's cap. The result is sorted best first with a fixed
    tie order, so downstream assembly is deterministic.
    """
    edges = assembly_edges(topology)
    if not edges:
        return []
    kind = edges[0][3]
    block = field_block(stack, kind)

    # enumerate every (src candidate, dst candidate) pair of every edge in
    # one pass over stacked peak arrays instead of a per-edge meshgrid loop
    counts = np.array([len(p) for p in peaks], np.intp)
    starts = np.zeros(len(peaks) + 1, np.intp)
    np.cumsum(counts, out=starts[1:])
    stacked = np.concatenate([p.xy for p in peaks])
    edge_idx = np.array([index for index, *_ in edges], np.intp)
    skp = np.array([src_kp for _, src_kp, _, _ in edges], np.intp)
    dkp = np.array([dst_kp for _, _, dst_kp, _ in edges], np.intp)
    n_pairs = counts[skp] * counts[dkp]
    total = int(n_pairs.sum())
    if total == 0:
        return []
    epos = np.repeat(np.arange(len(edges)), n_pairs)
    pair_starts = np.concatenate(([0], np.cumsum(n_pairs)[:-1]))
    rank = np.arange(total) - np.repeat(pair_starts, n_pairs)
    nd = counts[dkp][epos]
    si = rank // nd
    di = rank - si * nd
    eix = edge_idx[epos]
    src = stacked[starts[skp[epos]] + si]
    dst = stacked[starts[dkp[epos]] + di]
    self_edges = skp == dkp
    if self_edges.any():
        keep = ~(self_edges[epos] & (si == di))
        src, dst, eix, si, di = src[keep], dst[keep], eix[keep], si[keep], di[keep]
        if not len(src):
            return []

    # distance caps are cheap, so cut capped-out pairs before sampling fields
    if max_pair_distance is not None:
        n_edges = max(index for index, *_ in edges) + 1
        caps = np.full(n_edges, np.inf)
        for index, cap in max_pair_distance.items():
            if index < n_edges and cap is not None:
                caps[index] = cap
        d = dst - src
        within = np.hypot(d[:, 0], d[:, 1]) <= caps[eix]
        src, dst, eix, si, di = src[within], dst[within], eix[within], si[within], di[within]
        if not len(src):
            return []

    hits = probe_occupancy(block, src, dst, eix, stack.spec)
    src, dst, eix, si, di = src[hits], dst[hits], eix[hits], si[hits], di[hits]
    if not len(src):
        return []

    scores, valid, _ = _batch_scores(block, src, dst, eix, stack.spec, params)
    keep = (valid >= params.min_valid_fraction) & (scores >= params.min_connection_score)
    scores, valid = scores[keep], valid[keep]
    eix, si, di = eix[keep], si[keep], di[keep]
    order = np.lexsort((di, si, eix, -scores))
    kp_of_edge = {index: (src_kp, dst_kp) for index, src_kp, dst_kp, _ in edges}
    out = []
    for i in order.tolist():
        e = int(eix[i])
        src_kp, dst_kp = kp_of_edge[e]
        out.append(
            Connection(
                e, src_kp, dst_kp, int(si[i]), int(di[i]),
                float(scores[i]), float(valid[i]),
            )
        )
    return out


@dataclass
class TemporalContext:
    """Previous-frame poses plus the current stack's temporal channels.

    Supplies the re-weighing term for ambiguous assembly decisions: how well
    the temporal field supports moving some previous person's keypoint onto
    a candidate peak position.
    """

    stack: FieldStack
    prev_keypoints: np.ndarray  # (P, K, 2)
    prev_visible: np.ndarray  # (P, K) bool
    params: InferenceParams

    def anchor_person(self, temporal_index: int, dst_pos: np.ndarray) -> int:
        """Previous person whose motion best explains dst_pos, or -1.

        Scores every previous person's source keypoint into dst_pos along
        the given temporal channel and returns the row index of the best
        adequately-sampled one.
        """
        edge = self.stack.layout.temporal_edges[temporal_index]
        have = self.prev_visible[:, edge.src_prev]
        if not have.any():
            return -1
        srcs = self.prev_keypoints[have, edge.src_prev]
        grid = self.stack.temporal_field(temporal_index)
        scores, valid = score_pairs(
            grid, srcs, np.asarray(dst_pos)[None], self.stack.spec, self.params
        )
        ok = valid[:, 0] >= self.params.min_valid_fraction
        if not ok.any():
            return -1
        ranked = np.where(ok, scores[:, 0], -np.inf)
        return int(np.nonzero(have)[0][np.argmax(ranked)])

    def support_from(self, person: int, temporal_index: int, dst_pos: np.ndarray) -> float:
        """Score of one previous person's keypoint moving into dst_pos."""
        edge = self.stack.layout.temporal_edges[temporal_index]
        if not self.prev_visible[person, edge.src_prev]:
            return 0.0
        src = self.prev_keypoints[person, edge.src_prev]
        grid = self.stack.temporal_field(temporal_index)
        scores, valid = score_pairs(
            grid, src[None], np.asarray(dst_pos)[None], self.stack.spec, self.params
        )
        if valid[0, 0] < self.params.min_valid_fraction:
            return 0.0
        return float(scores[0, 0])


def _temporal_edges_for_spatial(topology: BodyTopology, edge_index: int):
    """Temporal indices covering a spatial edge's (src, dst) endpoints.

    Returns (into_src, into_dst); either may be None when the variant has no
    matching channel. Cross-linked variants store the same-orientation edge
    at twice the limb index and the reversed one right after it.
    """
    edge = topology.spatial_edges[edge_index]
    if topology.variant == "A":
        return edge.src, edge.dst
    if topology.variant == "B":
        return 2 * edge_index + 1, 2 * edge_index
    return None, None


def _pair_support(
    topology: BodyTopology,
    temporal: TemporalContext,
    edge_index: int,
    src_pos: np.ndarray,
    dst_pos: np.ndarray,
) -> float:
    """Temporal backing for a candidate connection, anchored on one person.

    First identify which previous person the src endpoint continues (via
    the channel flowing into src), then score that same person's motion
    into the dst candidate. Taking a max over everyone instead would let a
    bystander's motion vouch for the wrong pairing whenever two people
    cross, which is the one situation this term exists to resolve.
    """
    into_src, into_dst = _temporal_edges_for_spatial(topology, edge_index)
    if into_src is None or into_dst is None:
        return 0.0
    person = temporal.anchor_person(into_src, src_pos)
    if person < 0:
        return 0.0
    return temporal.support_from(person, into_dst, dst_pos)


class _Builder:
    __slots__ = ("slots", "conn_score", "n_conns", "alive")

    def __init__(self, n_keypoints: int):
        self.slots: list[int | None] = [None] * n_keypoints
        self.conn_score = 0.0
        self.n_conns = 0
        self.alive = True


def assemble_poses(
    connections: list[Connection],
    peaks: list[PeakSet],
    topology: BodyTopology,
    params: InferenceParams,
    temporal: TemporalContext | None = None,
) -> list[AssembledPose]:
    """Greedy global assembly of peaks into poses, best connection first.

    For each connection, in score order: start a new pose when neither peak
    is claimed, extend a pose when exactly one is (unless the other slot is
    already filled), merge two poses when their keypoint sets are disjoint,
    and otherwise skip. Before committing, near-tied alternatives for the
    same endpoint are re-weighed with temporal support and the winner is
    taken first, so a barely-better spatial score can lose to a candidate
    the previous frame backs.
    """
    k = topology.n_keypoints
    owner: list[list[_Builder | None]] = [[None] * len(p) for p in peaks]
    builders: list[_Builder] = []
    consumed = [False] * len(connections)
    spatial_mode = bool(topology.spatial_edges)

    # connections of one edge sharing an endpoint, for ambiguity lookups
    by_edge: dict[int, list[int]] = {}
    for pos, c in enumerate(connections):
        by_edge.setdefault(c.edge_index, []).append(pos)

    def apply(c: Connection) -> None:
        a = owner[c.src_kp][c.src_idx]
        b = owner[c.dst_kp][c.dst_idx]
        if a is None and b is None:
            pose = _Builder(k)
            pose.slots[c.src_kp] = c.src_idx
            pose.slots[c.dst_kp] = c.dst_idx
            pose.conn_score = c.score
            pose.n_conns = 1
            builders.append(pose)
            owner[c.src_kp][c.src_idx] = pose
            owner[c.dst_kp][c.dst_idx] = pose
        elif a is not None and b is None:
            if a.slots[c.dst_kp] is None:
                a.slots[c.dst_kp] = c.dst_idx
                a.conn_score += c.score
                a.n_conns += 1
                owner[c.dst_kp][c.dst_idx] = a
        elif a is None and b is not None:
            if b.slots[c.src_kp] is None:
                b.slots[c.src_kp] = c.src_idx
                b.conn_score += c.score
                b.n_conns += 1
                owner[c.src_kp][c.src_idx] = b
        elif a is b:
            a.conn_score += c.score
            a.n_conns += 1
        else:
            for kp in range(k):
                if a.slots[kp] is not None and b.slots[kp] is not None:
                    return  # overlapping keypoint sets: keep both poses apart
            for kp in range(k):
                idx = b.slots[kp]
                if idx is not None:
                    a.slots[kp] = idx
                    owner[kp][idx] = a
            a.conn_score += b.conn_score + c.score
            a.n_conns += b.n_conns + 1
            b.alive = False

    for pos, c in enumerate(connections):
        if consumed[pos]:
            continue
        pick = pos
        if temporal is not None and spatial_mode:
            floor = (1.0 - params.ambiguity_margin) * c.score
            group = [
                q
                for q in by_edge[c.edge_index]
                if q >= pos
                and not consumed[q]
                and connections[q].score >= floor
                and (
                    connections[q].src_idx == c.src_idx
                    or connections[q].dst_idx == c.dst_idx
                )
            ]
            if len(group) >= 2:
                best = -np.inf
                for q in group:
                    g = connections[q]
                    taf = _pair_support(
                        topology, temporal, g.edge_index,
                        peaks[g.src_kp].xy[g.src_idx],
                        peaks[g.dst_kp].xy[g.dst_idx],
                    )
                    r = (1.0 - params.alpha) * taf + params.alpha * g.score
                    if r > best:
                        best = r
                        pick = q
        consumed[pick] = True
        apply(connections[pick])

    out = []
    for pose in builders:
        if not pose.alive:
            continue
        n_present = sum(1 for s in pose.slots if s is not None)
        if n_present < params.min_keypoints:
            continue
        kps = np.zeros((k, 2))
        vis = np.zeros(k, bool)
        scores = np.zeros(k)
        peak_sum = 0.0
        for kp, idx in enumerate(pose.slots):
            if idx is None:
                continue
            kps[kp] = peaks[kp].xy[idx]
            vis[kp] = True
            scores[kp] = peaks[kp].score[idx]
            peak_sum += peaks[kp].score[idx]
        total = (peak_sum + pose.conn_score) / (n_present + pose.n_conns)
        out.append(AssembledPose(kps, vis, scores, float(total)))
    return out


def infer_frame(
    stack: FieldStack,
    topology: BodyTopology,
    params: InferenceParams,
    temporal: TemporalContext | None = None,
    max_pair_distance: dict[int, float] | None = None,
) -> list[AssembledPose]:
    """Full decode of one stack: peaks, scored connections, assembled poses."""
    peaks = extract_peaks(stack, params)
    conns = build_connections(stack, peaks, topology, params, max_pair_distance)
    return assemble_poses(conns, peaks, topology, params, temporal)
