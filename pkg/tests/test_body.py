import json

import pytest

from staf.body import (
    NUM_KEYPOINTS,
    BodyTopology,
    KeypointId,
    SpatialEdge,
    TemporalEdge,
    build_topology,
    default_topology,
    load_topology,
    validate,
)


def test_default_variant_b_counts():
    topo = default_topology("B")
    assert topo.n_keypoints == NUM_KEYPOINTS == 21
    assert len(topo.spatial_edges) == 48
    assert len(topo.temporal_edges) == 96
    assert topo.n_channels == 21 + 2 * 48 + 2 * 96 == 309


def test_default_variant_a_counts():
    topo = default_topology("A")
    assert len(topo.spatial_edges) == 48
    assert len(topo.temporal_edges) == 21
    assert topo.n_channels == 21 + 2 * 48 + 2 * 21 == 159


def test_default_variant_c_counts():
    topo = default_topology("C")
    assert len(topo.spatial_edges) == 0
    assert len(topo.temporal_edges) == 96
    assert topo.n_channels == 21 + 2 * 96 == 213


def test_all_default_variants_validate_clean():
    for variant in "ABC":
        assert validate(default_topology(variant)) == []


def test_variant_a_temporal_edges_are_same_keypoint():
    topo = default_topology("A")
    for k, edge in enumerate(topo.temporal_edges):
        assert edge.src_prev == edge.dst_cur == k
        assert edge.limb_index == -1


def test_variant_b_temporal_edges_pair_up_with_limbs():
    # even index: same orientation as the limb; odd index: reversed
    topo = default_topology("B")
    for i, limb in enumerate(topo.spatial_edges):
        fwd = topo.temporal_edges[2 * i]
        rev = topo.temporal_edges[2 * i + 1]
        assert (fwd.src_prev, fwd.dst_cur) == (limb.src, limb.dst)
        assert (rev.src_prev, rev.dst_cur) == (limb.dst, limb.src)
        assert fwd.limb_index == rev.limb_index == i


def test_variant_c_shares_variant_b_temporal_wiring():
    b = default_topology("B")
    c = default_topology("C")
    assert [(e.src_prev, e.dst_cur) for e in c.temporal_edges] == [
        (e.src_prev, e.dst_cur) for e in b.temporal_edges
    ]


def test_channel_layout_is_contiguous_and_disjoint():
    for variant in "ABC":
        topo = default_topology(variant)
        claimed = set(range(topo.n_keypoints))
        for e in topo.spatial_edges:
            claimed |= {e.channel_offset, e.channel_offset + 1}
        for e in topo.temporal_edges:
            claimed |= {e.channel_offset, e.channel_offset + 1}
        assert claimed == set(range(topo.n_channels))


def test_spatial_edges_cover_every_keypoint():
    topo = default_topology("B")
    touched = set()
    for e in topo.spatial_edges:
        touched.add(e.src)
        touched.add(e.dst)
    assert touched == set(range(21))


def test_keypoint_index_lookup():
    topo = default_topology()
    assert topo.keypoint_index(topo.keypoints[0].name) == 0
    with pytest.raises(KeyError):
        topo.keypoint_index("no_such_joint")


def test_build_topology_rejects_unknown_variant():
    with pytest.raises(ValueError):
        build_topology(["a", "b"], [(0, 1)], "D")


def test_load_topology_roundtrip(tmp_path):
    doc = {
        "keypoints": ["head", "neck", "hip"],
        "spatial_edges": [[0, 1], [1, 2]],
        "variant": "A",
    }
    p = tmp_path / "small.json"
    p.write_text(json.dumps(doc))
    topo = load_topology(p)
    assert topo.variant == "A"
    assert topo.n_keypoints == 3
    assert [(e.src, e.dst) for e in topo.spatial_edges] == [(0, 1), (1, 2)]
    assert len(topo.temporal_edges) == 3
    assert validate(topo) == []


def test_validate_flags_self_loop_and_duplicates():
    topo = build_topology(["a", "b"], [(0, 1), (0, 1)], "B")
    problems = validate(topo)
    assert any("duplicate" in p for p in problems)

    bad = BodyTopology(
        keypoints=(KeypointId(0, "a"), KeypointId(1, "b")),
        spatial_edges=(SpatialEdge(0, 0, 2),),
        temporal_edges=(TemporalEdge(0, 0, 4, 0), TemporalEdge(0, 0, 6, 0)),
        variant="B",
    )
    assert any("self-loop" in p for p in validate(bad))


def test_validate_flags_out_of_range_edge():
    topo = build_topology(["a", "b"], [(0, 5)], "B")
    assert any("out of keypoint range" in p for p in validate(topo))


def test_validate_flags_channel_collision():
    # two edges claiming the same channel pair
    bad = BodyTopology(
        keypoints=(KeypointId(0, "a"), KeypointId(1, "b")),
        spatial_edges=(SpatialEdge(0, 1, 2), SpatialEdge(1, 0, 2)),
        temporal_edges=(),
        variant="B",
    )
    assert any("claimed by both" in p for p in validate(bad))


def test_default_topology_is_cached_and_stable():
    assert default_topology("B") is default_topology("B")
    first = [(e.src, e.dst) for e in default_topology("B").spatial_edges]
    second = [(e.src, e.dst) for e in default_topology("B").spatial_edges]
    assert first == second
