import numpy as np
import pytest

from staf.body import build_topology, default_topology
from staf.render import id_color, read_ppm, render_frame, write_ppm
from staf.tracking import PoseFrame, TrackedPose


def test_id_colors_are_stable_and_distinct():
    assert id_color(3) == id_color(3)
    colors = {id_color(i) for i in range(12)}
    assert len(colors) == 12


def test_render_draws_limbs_between_visible_keypoints():
    topo = build_topology(["a", "b"], [(0, 1)], "B")
    kps = np.array([[10.0, 20.0], [60.0, 20.0]])
    pose = TrackedPose(0, kps, np.ones(2, bool))
    img = render_frame(PoseFrame(0, [pose]), 80, 40, topo)
    color = np.array(id_color(0), np.uint8)
    assert (img[20, 10:61] == color).all(axis=1).all()
    assert not img[35].any()


def test_render_skips_invisible_endpoints():
    topo = build_topology(["a", "b"], [(0, 1)], "B")
    kps = np.array([[10.0, 20.0], [60.0, 20.0]])
    pose = TrackedPose(0, kps, np.array([True, False]))
    img = render_frame(PoseFrame(0, [pose]), 80, 40, topo)
    assert not img[20, 30:50].any()  # no line through the middle
    assert img[20, 10].any()  # the visible dot is still there


def test_render_clips_out_of_frame_geometry():
    topo = default_topology("B")
    kps = np.tile([-50.0, -50.0], (21, 1))
    kps[:, 0] += np.arange(21) * 30.0
    pose = TrackedPose(1, kps, np.ones(21, bool))
    img = render_frame(PoseFrame(0, [pose]), 64, 64, topo)
    assert img.shape == (64, 64, 3)


def test_temporal_only_topologies_still_draw_limbs():
    topo = default_topology("C")
    kps = np.tile([32.0, 32.0], (21, 1)) + np.arange(21)[:, None] * [1.0, 1.5]
    pose = TrackedPose(0, kps, np.ones(21, bool))
    img = render_frame(PoseFrame(0, [pose]), 64, 80, topo)
    assert img.any()


def test_ppm_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, (12, 9, 3), dtype=np.uint8)
    path = tmp_path / "img.ppm"
    write_ppm(img, path)
    assert np.array_equal(read_ppm(path), img)


def test_ppm_rejects_bad_input(tmp_path):
    with pytest.raises(ValueError):
        write_ppm(np.zeros((4, 4), np.uint8), tmp_path / "x.ppm")
    bad = tmp_path / "bad.ppm"
    bad.write_bytes(b"P3\n2 2\n255\n")
    with pytest.raises(ValueError, match="not a binary pixmap"):
        read_ppm(bad)
