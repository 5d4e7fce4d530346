import struct

import numpy as np
import pytest

from staf.body import default_topology
from staf.fields import (
    FORMAT_VERSION,
    MAGIC,
    AnnotatedPose,
    CorruptionModel,
    FieldStack,
    GridSpec,
    corrupt,
    load_field_stack,
    normalize_field,
    rasterize_confidence,
    rasterize_field,
    save_field_stack,
    segment_cell_mask,
    synthesize_frame,
)


def brute_force_cells(a, b, radius, spec):
    """Reference written-cell set, cell by cell, geometry from first principles.

    Distance from point p to segment ab computed without the projection-clamp
    shortcut the library uses: check both endpoints and, when the foot of the
    perpendicular falls inside the segment, the perpendicular distance.
    """
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    cells = set()
    fuzzy = set()
    for iy in range(spec.height):
        for ix in range(spec.width):
            px = (ix + 0.5) * spec.stride
            py = (iy + 0.5) * spec.stride
            candidates = [
                np.hypot(px - ax, py - ay),
                np.hypot(px - bx, py - by),
            ]
            seg2 = (bx - ax) ** 2 + (by - ay) ** 2
            if seg2 > 0:
                t = ((px - ax) * (bx - ax) + (py - ay) * (by - ay)) / seg2
                if 0.0 <= t <= 1.0:
                    fx = ax + t * (bx - ax)
                    fy = ay + t * (by - ay)
                    candidates.append(np.hypot(px - fx, py - fy))
            d = min(candidates)
            if d <= radius:
                cells.add((iy, ix))
            if abs(d - radius) < 1e-6:
                fuzzy.add((iy, ix))
    return cells, fuzzy


def test_segment_mask_matches_brute_force_on_random_segments():
    spec = GridSpec()
    rng = np.random.default_rng(42)
    for trial in range(100):
        a = rng.uniform(-30.0, 400.0, 2)
        b = rng.uniform(-30.0, 400.0, 2)
        if trial % 10 == 0:
            b = a.copy()  # degenerate: disc around a point
        radius = float(rng.uniform(2.0, 20.0))
        mask = segment_cell_mask(a, b, radius, spec)
        got = set(zip(*np.nonzero(mask)))
        want, fuzzy = brute_force_cells(a, b, radius, spec)
        # cells within float noise of the boundary may go either way
        assert (got - want) <= fuzzy, f"trial {trial}: extra cells"
        assert (want - got) <= fuzzy, f"trial {trial}: missing cells"


def test_rasterize_field_writes_unit_vector_inside_band_only():
    spec = GridSpec()
    out = np.zeros((spec.height, spec.width, 2), np.float32)
    a = np.array([60.0, 100.0])
    b = np.array([240.0, 180.0])
    rasterize_field(a, b, 8.0, spec, out)
    mask = segment_cell_mask(a, b, 8.0, spec)
    u = (b - a) / np.linalg.norm(b - a)
    assert mask.any()
    assert np.allclose(out[mask], u.astype(np.float32))
    assert not out[~mask].any()


def test_rasterize_field_zero_length_writes_nothing():
    spec = GridSpec()
    out = np.zeros((spec.height, spec.width, 2), np.float32)
    p = np.array([100.0, 100.0])
    rasterize_field(p, p, 8.0, spec, out)
    assert not out.any()


def test_rasterize_field_antisymmetry():
    spec = GridSpec()
    fwd = np.zeros((spec.height, spec.width, 2), np.float32)
    rev = np.zeros((spec.height, spec.width, 2), np.float32)
    a = np.array([50.0, 300.0])
    b = np.array([310.0, 40.0])
    rasterize_field(a, b, 10.0, spec, fwd)
    rasterize_field(b, a, 10.0, spec, rev)
    assert np.array_equal(fwd, -rev)


def test_rasterize_field_rejects_bad_radius():
    spec = GridSpec()
    out = np.zeros((spec.height, spec.width, 2), np.float32)
    with pytest.raises(ValueError):
        rasterize_field([0, 0], [10, 10], 0.0, spec, out)


def test_overlap_average_and_renormalize():
    spec = GridSpec()
    out = np.zeros((spec.height, spec.width, 2), np.float32)
    counts = np.zeros((spec.height, spec.width), np.int32)
    # two perpendicular segments cross near the middle of the grid
    rasterize_field([100.0, 180.0], [260.0, 180.0], 12.0, spec, out, counts)
    rasterize_field([180.0, 100.0], [180.0, 260.0], 12.0, spec, out, counts)
    normalize_field(out, counts)
    both = counts == 2
    assert both.any()
    expect = np.float32(np.sqrt(0.5))
    assert np.allclose(out[both, 0], expect, atol=1e-6)
    assert np.allclose(out[both, 1], expect, atol=1e-6)
    single = counts == 1
    norms = np.hypot(out[single, 0], out[single, 1])
    assert np.allclose(norms, 1.0, atol=1e-6)


def test_opposing_overlap_cancels_to_zero():
    spec = GridSpec()
    out = np.zeros((spec.height, spec.width, 2), np.float32)
    counts = np.zeros((spec.height, spec.width), np.int32)
    rasterize_field([100.0, 180.0], [260.0, 180.0], 12.0, spec, out, counts)
    rasterize_field([260.0, 180.0], [100.0, 180.0], 12.0, spec, out, counts)
    normalize_field(out, counts)
    assert not out.any()


def _pose(person_id, rng, around=(184.0, 184.0), spread=60.0, k=21):
    kp = np.asarray(around) + rng.uniform(-spread, spread, (k, 2))
    return AnnotatedPose(person_id, kp, np.ones(k, bool), head_size=30.0)


def test_confidence_is_max_of_gaussians():
    spec = GridSpec()
    sigma = 7.0
    p0 = np.array([120.0, 140.0])
    p1 = np.array([150.0, 140.0])
    poses = [
        AnnotatedPose(0, np.tile(p0, (21, 1)), np.ones(21, bool)),
        AnnotatedPose(1, np.tile(p1, (21, 1)), np.ones(21, bool)),
    ]
    out = rasterize_confidence(poses, sigma, spec)
    xs, ys = spec.cell_centers()
    for iy in range(0, spec.height, 7):
        for ix in range(0, spec.width, 7):
            d0 = (xs[ix] - p0[0]) ** 2 + (ys[iy] - p0[1]) ** 2
            d1 = (xs[ix] - p1[0]) ** 2 + (ys[iy] - p1[1]) ** 2
            want = max(np.exp(-d0 / sigma**2), np.exp(-d1 / sigma**2))
            if want < 1e-12:
                want = 0.0
            assert out[iy, ix, 0] == pytest.approx(want, abs=1e-6)


def test_confidence_has_no_subnormal_tail():
    spec = GridSpec()
    pose = AnnotatedPose(0, np.tile([30.0, 30.0], (21, 1)), np.ones(21, bool))
    out = rasterize_confidence([pose], 7.0, spec)
    nz = out[out != 0]
    assert nz.min() >= 1e-12


def test_confidence_rejects_bad_sigma():
    with pytest.raises(ValueError):
        rasterize_confidence([], 0.0, GridSpec())


def test_zero_motion_temporal_equals_spatial_variant_b():
    spec = GridSpec()
    topo = default_topology("B")
    rng = np.random.default_rng(5)
    cur = [_pose(0, rng), _pose(1, rng, around=(120.0, 250.0))]
    prev = [AnnotatedPose(p.person_id, p.keypoints.copy(), p.visible.copy()) for p in cur]
    stack = synthesize_frame(cur, prev, topo, spec)
    for i in range(len(topo.spatial_edges)):
        paf = stack.spatial_field(i)
        assert np.array_equal(stack.temporal_field(2 * i), paf)
        assert np.array_equal(stack.temporal_field(2 * i + 1), -paf)


def test_zero_motion_temporal_all_zero_variant_a():
    # same-keypoint segments collapse to zero length, which write nothing
    spec = GridSpec()
    topo = default_topology("A")
    rng = np.random.default_rng(6)
    cur = [_pose(0, rng)]
    prev = [AnnotatedPose(0, cur[0].keypoints.copy(), cur[0].visible.copy())]
    stack = synthesize_frame(cur, prev, topo, spec)
    k = topo.n_keypoints
    temporal_base = k + 2 * len(topo.spatial_edges)
    assert not stack.data[:, :, temporal_base:].any()


def test_warm_start_is_bitwise_zero_motion():
    spec = GridSpec()
    rng = np.random.default_rng(7)
    for variant in "ABC":
        topo = default_topology(variant)
        cur = [_pose(0, rng), _pose(1, rng, around=(250.0, 120.0))]
        prev = [
            AnnotatedPose(p.person_id, p.keypoints.copy(), p.visible.copy())
            for p in cur
        ]
        warm = synthesize_frame(cur, None, topo, spec)
        explicit = synthesize_frame(cur, prev, topo, spec)
        assert warm.data.tobytes() == explicit.data.tobytes()


def test_motion_changes_temporal_but_not_spatial():
    spec = GridSpec()
    topo = default_topology("B")
    rng = np.random.default_rng(8)
    cur = [_pose(0, rng)]
    moved = [AnnotatedPose(0, cur[0].keypoints - 40.0, cur[0].visible.copy())]
    still = synthesize_frame(cur, None, topo, spec)
    shifted = synthesize_frame(cur, moved, topo, spec)
    k = topo.n_keypoints
    s_end = k + 2 * len(topo.spatial_edges)
    assert np.array_equal(still.data[:, :, :s_end], shifted.data[:, :, :s_end])
    assert not np.array_equal(still.data[:, :, s_end:], shifted.data[:, :, s_end:])


def test_temporal_pairing_is_by_person_id():
    # previous frame misses person 1, so person 1 contributes no temporal
    # vectors even though person 0 is right there
    spec = GridSpec()
    topo = default_topology("B")
    rng = np.random.default_rng(9)
    p0, p1 = _pose(0, rng, around=(100.0, 100.0)), _pose(1, rng, around=(260.0, 260.0))
    both = synthesize_frame([p0, p1], [p0, p1], topo, spec)
    only0 = synthesize_frame([p0, p1], [p0], topo, spec)
    k = topo.n_keypoints
    s_end = k + 2 * len(topo.spatial_edges)
    assert np.array_equal(both.data[:, :, :s_end], only0.data[:, :, :s_end])
    assert not np.array_equal(both.data[:, :, s_end:], only0.data[:, :, s_end:])


def test_invisible_keypoints_write_no_fields():
    spec = GridSpec()
    topo = default_topology("B")
    kp = np.tile([184.0, 184.0], (21, 1))
    pose = AnnotatedPose(0, kp, np.zeros(21, bool))
    stack = synthesize_frame([pose], None, topo, spec)
    assert not stack.data.any()


def test_corruption_identical_seed_identical_output():
    spec = GridSpec()
    topo = default_topology("B")
    rng = np.random.default_rng(10)
    stack = synthesize_frame([_pose(0, rng)], None, topo, spec)
    model = CorruptionModel(gaussian_noise_sd=0.05, dropout_prob=0.2, jitter_cells=1, seed=99)
    a = corrupt(stack, model)
    b = corrupt(stack, model)
    assert a.data.tobytes() == b.data.tobytes()
    assert not np.array_equal(a.data, stack.data)


def test_small_noise_keeps_peak_argmax():
    spec = GridSpec()
    topo = default_topology("B")
    # keypoints sit exactly on cell centers so each channel has a clear
    # single argmax with a wide margin over its neighbours
    idx = np.arange(21)
    kp = np.stack([4.0 + 8.0 * (10 + idx % 5), 4.0 + 8.0 * (10 + idx // 5)], axis=1)
    pose = AnnotatedPose(0, kp, np.ones(21, bool))
    stack = synthesize_frame([pose], None, topo, spec)
    noisy = corrupt(stack, CorruptionModel(gaussian_noise_sd=0.05, seed=3))
    for c in range(topo.n_keypoints):
        before = np.unravel_index(np.argmax(stack.data[:, :, c]), stack.data.shape[:2])
        after = np.unravel_index(np.argmax(noisy.data[:, :, c]), noisy.data.shape[:2])
        assert before == after


def test_full_dropout_removes_peaks():
    spec = GridSpec()
    topo = default_topology("B")
    rng = np.random.default_rng(11)
    stack = synthesize_frame([_pose(0, rng)], None, topo, spec)
    dropped = corrupt(stack, CorruptionModel(dropout_prob=1.0, seed=0))
    assert dropped.data[:, :, : topo.n_keypoints].max() < 0.01


def test_corruption_respects_channel_invariants():
    spec = GridSpec()
    topo = default_topology("B")
    rng = np.random.default_rng(12)
    stack = synthesize_frame([_pose(0, rng), _pose(1, rng)], None, topo, spec)
    out = corrupt(stack, CorruptionModel(gaussian_noise_sd=0.3, seed=1))
    k = topo.n_keypoints
    conf = out.data[:, :, :k]
    assert conf.min() >= 0.0 and conf.max() <= 1.0
    vec = out.data[:, :, k:].reshape(spec.height, spec.width, -1, 2)
    mags = np.hypot(vec[..., 0], vec[..., 1])
    assert mags.max() <= 1.0 + 1e-5


def test_corruption_parameter_validation():
    with pytest.raises(ValueError):
        CorruptionModel(gaussian_noise_sd=-0.1)
    with pytest.raises(ValueError):
        CorruptionModel(dropout_prob=1.5)


def test_stack_save_load_roundtrip(tmp_path):
    spec = GridSpec()
    topo = default_topology("B")
    rng = np.random.default_rng(13)
    stack = synthesize_frame([_pose(0, rng)], None, topo, spec, frame_index=17)
    path = tmp_path / "frame.staf"
    save_field_stack(stack, path)
    loaded = load_field_stack(path, topo)
    assert loaded.data.tobytes() == stack.data.tobytes()
    assert loaded.frame_index == 17
    assert loaded.spec == spec


def test_stack_header_layout(tmp_path):
    spec = GridSpec()
    topo = default_topology("A")
    stack = FieldStack.zeros(spec, topo, frame_index=3)
    path = tmp_path / "frame.staf"
    save_field_stack(stack, path)
    raw = path.read_bytes()
    magic, version, w, h, c, stride, fidx = struct.unpack_from("<4sIIIIII", raw)
    assert magic == MAGIC
    assert version == FORMAT_VERSION
    assert (w, h, c, stride, fidx) == (46, 46, topo.n_channels, 8, 3)
    assert len(raw) == 28 + 4 * 46 * 46 * topo.n_channels


def test_stack_load_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.staf"
    path.write_bytes(b"NOPE" + b"\x00" * 100)
    with pytest.raises(ValueError, match="magic"):
        load_field_stack(path, default_topology("B"))


def test_stack_load_rejects_wrong_version(tmp_path):
    spec = GridSpec()
    topo = default_topology("B")
    path = tmp_path / "v9.staf"
    save_field_stack(FieldStack.zeros(spec, topo), path)
    raw = bytearray(path.read_bytes())
    struct.pack_into("<I", raw, 4, 9)
    path.write_bytes(bytes(raw))
    with pytest.raises(ValueError, match="version"):
        load_field_stack(path, topo)


def test_stack_load_rejects_channel_mismatch(tmp_path):
    spec = GridSpec()
    path = tmp_path / "b.staf"
    save_field_stack(FieldStack.zeros(spec, default_topology("B")), path)
    with pytest.raises(ValueError, match="channels"):
        load_field_stack(path, default_topology("A"))


def test_stack_load_rejects_truncation(tmp_path):
    spec = GridSpec()
    topo = default_topology("B")
    path = tmp_path / "t.staf"
    save_field_stack(FieldStack.zeros(spec, topo), path)
    raw = path.read_bytes()
    path.write_bytes(raw[: len(raw) // 2])
    with pytest.raises(ValueError, match="truncated"):
        load_field_stack(path, topo)
    path.write_bytes(raw[:10])
    with pytest.raises(ValueError, match="truncated"):
        load_field_stack(path, topo)


def test_grid_spec_validation_and_centers():
    with pytest.raises(ValueError):
        GridSpec(width=7)
    with pytest.raises(ValueError):
        GridSpec(stride=0)
    spec = GridSpec()
    xs, ys = spec.cell_centers()
    assert xs[0] == 4.0 and ys[0] == 4.0
    assert xs[-1] == 46 * 8 - 4.0
    assert spec.input_width == spec.input_height == 368
