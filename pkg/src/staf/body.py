"""Body model: keypoints, limb edges and temporal edges for topology variants A/B/C.

The default 21-keypoint scheme is the union of the COCO and MPII joint sets.
Limb edges live in a JSON data file so the edge list can be swapped without
touching code; temporal edges are always derived from it:

  variant A - one temporal edge per keypoint (same keypoint across frames)
  variant B - both orientations of every limb edge across frames (cross-linked)
  variant C - the same cross-linked temporal edges, but no active limb edges
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

NUM_KEYPOINTS = 21

_VARIANTS = ("A", "B", "C")


@dataclass(frozen=True)
class KeypointId:
    index: int
    name: str


@dataclass(frozen=True)
class SpatialEdge:
    src: int
    dst: int
    channel_offset: int


@dataclass(frozen=True)
class TemporalEdge:
    src_prev: int
    dst_cur: int
    channel_offset: int
    # index of the limb edge this temporal edge was derived from, -1 for
    # same-keypoint edges (variant A)
    limb_index: int = -1


@dataclass(frozen=True)
class BodyTopology:
    keypoints: tuple[KeypointId, ...]
    spatial_edges: tuple[SpatialEdge, ...]
    temporal_edges: tuple[TemporalEdge, ...]
    variant: str

    @property
    def n_keypoints(self) -> int:
        return len(self.keypoints)

    @property
    def n_channels(self) -> int:
        return (
            len(self.keypoints)
            + 2 * len(self.spatial_edges)
            + 2 * len(self.temporal_edges)
        )

    def keypoint_index(self, name: str) -> int:
        for kp in self.keypoints:
            if kp.name == name:
                return kp.index
        raise KeyError(name)

    def spatial_channel(self, edge_index: int) -> int:
        return self.spatial_edges[edge_index].channel_offset

    def temporal_channel(self, edge_index: int) -> int:
        return self.temporal_edges[edge_index].channel_offset


def _derive_temporal(
    variant: str, n_keypoints: int, limb_pairs: list[tuple[int, int]], base: int
) -> tuple[TemporalEdge, ...]:
    edges = []
    if variant == "A":
        for k in range(n_keypoints):
            edges.append(TemporalEdge(k, k, base + 2 * len(edges), limb_index=-1))
    else:  # B and C share the cross-linked wiring
        for i, (a, b) in enumerate(limb_pairs):
            edges.append(TemporalEdge(a, b, base + 2 * len(edges), limb_index=i))
            edges.append(TemporalEdge(b, a, base + 2 * len(edges), limb_index=i))
    return tuple(edges)


def build_topology(
    keypoint_names: list[str], limb_pairs: list[tuple[int, int]], variant: str
) -> BodyTopology:
    """Assemble a topology from raw name / edge-pair lists.

    Channel layout is contiguous: K confidence channels, then 2 per limb
    edge, then 2 per temporal edge. Variant C keeps the limb list empty
    (only temporal channels follow the confidence block).
    """
    if variant not in _VARIANTS:
        raise ValueError(f"unknown topology variant {variant!r}")
    k = len(keypoint_names)
    keypoints = tuple(KeypointId(i, n) for i, n in enumerate(keypoint_names))
    if variant == "C":
        spatial = ()
        base = k
    else:
        spatial = tuple(
            SpatialEdge(a, b, k + 2 * i) for i, (a, b) in enumerate(limb_pairs)
        )
        base = k + 2 * len(spatial)
    temporal = _derive_temporal(variant, k, limb_pairs, base)
    return BodyTopology(keypoints, spatial, temporal, variant)


def _load_default_model() -> tuple[list[str], list[tuple[int, int]]]:
    raw = resources.files("staf.data").joinpath("body21.json").read_text()
    doc = json.loads(raw)
    names = list(doc["keypoints"])
    pairs = [(int(a), int(b)) for a, b in doc["spatial_edges"]]
    return names, pairs


# variant C uses the same limb pair list for deriving temporal edges even
# though its active spatial edge set is empty
_DEFAULT_CACHE: dict[str, BodyTopology] = {}


def default_topology(variant: str = "B") -> BodyTopology:
    """Return the packaged 21-keypoint topology for the given variant.

    Deterministic: repeated calls yield identical edge orderings.
    A -> 48 limb edges, 21 temporal; B -> 48 and 96; C -> 0 and 96.
    """
    if variant not in _DEFAULT_CACHE:
        names, pairs = _load_default_model()
        _DEFAULT_CACHE[variant] = build_topology(names, pairs, variant)
    return _DEFAULT_CACHE[variant]


def load_topology(path) -> BodyTopology:
    """Load a topology from a JSON file.

    Expected keys: "keypoints" (names), "spatial_edges" ([src, dst] index
    pairs) and "variant" ("A"|"B"|"C"). Temporal edges are derived, never
    listed.
    """
    with open(path) as fh:
        doc = json.load(fh)
    names = list(doc["keypoints"])
    pairs = [(int(a), int(b)) for a, b in doc["spatial_edges"]]
    return build_topology(names, pairs, doc.get("variant", "B"))


def validate(topology: BodyTopology) -> list[str]:
    """Collect invariant violations; an empty list means the topology is valid.

    Violations are data, not failures: callers decide whether to raise.
    """
    out: list[str] = []
    k = topology.n_keypoints
    for i, kp in enumerate(topology.keypoints):
        if kp.index != i:
            out.append(f"keypoint index {kp.index} at position {i} is not dense")

    seen: set[tuple[int, int]] = set()
    for e in topology.spatial_edges:
        if e.src == e.dst:
            out.append(f"self-loop spatial edge ({e.src},{e.dst})")
        if not (0 <= e.src < k and 0 <= e.dst < k):
            out.append(f"spatial edge ({e.src},{e.dst}) out of keypoint range")
        if (e.src, e.dst) in seen:
            out.append(f"duplicate spatial edge ({e.src},{e.dst})")
        seen.add((e.src, e.dst))

    if topology.variant in ("A", "B"):
        touched = {e.src for e in topology.spatial_edges}
        touched |= {e.dst for e in topology.spatial_edges}
        for kp in topology.keypoints:
            if kp.index not in touched:
                out.append(f"keypoint {kp.name} unreachable (no spatial edge)")

    if topology.variant == "A":
        for e in topology.temporal_edges:
            if e.src_prev != e.dst_cur:
                out.append(
                    f"variant A temporal edge ({e.src_prev},{e.dst_cur}) not same-keypoint"
                )
    if topology.variant == "C" and topology.spatial_edges:
        out.append("variant C must not carry active spatial edges")
    if topology.variant == "B":
        if len(topology.temporal_edges) != 2 * len(topology.spatial_edges):
            out.append("variant B temporal edge count != 2 x spatial edge count")

    # channel layout must be a bijection over a contiguous range
    used: dict[int, str] = {}
    for i in range(k):
        used[i] = f"confidence {i}"
    for e in topology.spatial_edges:
        for c in (e.channel_offset, e.channel_offset + 1):
            if c in used:
                out.append(f"channel {c} claimed by both {used[c]} and spatial edge")
            used[c] = f"spatial ({e.src},{e.dst})"
    for e in topology.temporal_edges:
        for c in (e.channel_offset, e.channel_offset + 1):
            if c in used:
                out.append(f"channel {c} claimed by both {used[c]} and temporal edge")
            used[c] = f"temporal ({e.src_prev},{e.dst_cur})"
    if used and (len(used) != topology.n_channels or max(used) != topology.n_channels - 1):
        out.append("channel offsets do not cover a contiguous range")

    return out
