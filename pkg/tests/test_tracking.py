import numpy as np
import pytest

from staf.body import default_topology
from staf.fields import AnnotatedPose, GridSpec, synthesize_frame
from staf.inference import InferenceParams, infer_frame
from staf.sequence import TEMPLATE, generate, lane_walkers
from staf.tracking import (
    BaselineNNTracker,
    FrameOrderError,
    PoseFrame,
    TrackedPose,
    Tracker,
    TrackerParams,
    distance_caps,
    load_pose_frames,
    make_tracker,
    pose_from_json,
    pose_to_json,
    resolve_claims,
    save_pose_frames,
    vote_ids,
)

SPEC = GridSpec()
TOPO = default_topology("B")


def _figure(ident, x, y, scale=0.8):
    kps = TEMPLATE * scale + (x, y)
    return TrackedPose(ident, kps, np.ones(21, bool), 1.0, 30.0 * scale)


def _stack_for(cur, prev, frame_index):
    cur_a = [AnnotatedPose(p.ident, p.keypoints, p.visible) for p in cur]
    prev_a = None
    if prev is not None:
        prev_a = [AnnotatedPose(p.ident, p.keypoints, p.visible) for p in prev]
    return synthesize_frame(cur_a, prev_a, TOPO, SPEC, frame_index=frame_index)


def test_lane_sequence_keeps_one_id_per_person():
    frames = generate(lane_walkers(n_people=4, n_frames=30, seed=2))
    tracker = Tracker(TOPO)
    mapping: dict[int, int] = {}
    for frame in frames:
        out = tracker.step(_stack_from_frame(frame, frames))
        assert len(out.poses) == len(frame.poses)
        got = sorted(p.keypoints[20, 1] for p in out.poses)
        want = sorted(p.keypoints[20, 1] for p in frame.poses)
        assert np.allclose(got, want, atol=8.0)
        for pose in out.poses:
            gt = min(
                frame.poses,
                key=lambda g: float(np.abs(g.keypoints[20] - pose.keypoints[20]).sum()),
            )
            if gt.ident in mapping:
                assert mapping[gt.ident] == pose.ident, "id switch"
            else:
                mapping[gt.ident] = pose.ident
    assert len(set(mapping.values())) == 4


def _stack_from_frame(frame, frames):
    prev = frames[frame.frame_index - 1].poses if frame.frame_index > 0 else None
    return _stack_for(frame.poses, prev, frame.frame_index)


def test_tracker_rejects_out_of_order_frames():
    tracker = Tracker(TOPO)
    p = _figure(0, 180.0, 190.0)
    tracker.step(_stack_for([p], None, 0))
    with pytest.raises(FrameOrderError, match="frame 2 after frame 0"):
        tracker.step(_stack_for([p], [p], 2))
    with pytest.raises(FrameOrderError):
        tracker.step(_stack_for([p], [p], 0))


def test_resolve_claims_prefers_more_votes():
    votes = [(0, 5, 4.0), (0, 8, 6.0)]
    idents, next_id = resolve_claims(votes, [7], min_id_votes=2, next_id=50)
    assert idents == [50, 7]
    assert next_id == 51


def test_resolve_claims_breaks_vote_tie_by_score_then_order():
    votes = [(0, 5, 3.0), (0, 5, 4.0)]
    idents, _ = resolve_claims(votes, [9], 2, 100)
    assert idents == [100, 9]
    votes = [(0, 5, 4.0), (0, 5, 4.0)]
    idents, _ = resolve_claims(votes, [9], 2, 100)
    assert idents == [9, 100]


def test_resolve_claims_vote_minimum():
    votes = [(0, 1, 9.0), (-1, 0, 0.0)]
    idents, next_id = resolve_claims(votes, [3], min_id_votes=2, next_id=0)
    assert idents == [0, 1]
    assert next_id == 2
    idents, _ = resolve_claims(votes, [3], min_id_votes=1, next_id=0)
    assert idents == [3, 0]


def test_distance_caps_defaults_without_history():
    spatial, temporal = distance_caps([], TOPO, SPEC)
    default = np.hypot(368.0, 368.0) / 4.0
    assert len(spatial) == len(TOPO.spatial_edges)
    assert all(c == pytest.approx(default) for c in spatial.values())
    assert len(temporal) == len(TOPO.temporal_edges)
    assert all(c == pytest.approx(2 * default) for c in temporal.values())


def test_distance_caps_follow_observed_limb_lengths():
    pose = _figure(0, 180.0, 190.0)
    spatial, temporal = distance_caps([pose], TOPO, SPEC)
    default = np.hypot(368.0, 368.0) / 4.0
    for i, edge in enumerate(TOPO.spatial_edges):
        length = float(np.linalg.norm(pose.keypoints[edge.dst] - pose.keypoints[edge.src]))
        assert spatial[i] == pytest.approx(max(2.0 * length, 16.0))
    for j, edge in enumerate(TOPO.temporal_edges):
        assert temporal[j] == pytest.approx(spatial[edge.limb_index] + default)


def test_distance_caps_ignore_invisible_endpoints():
    pose = _figure(0, 180.0, 190.0)
    pose.visible[:] = False
    spatial, _ = distance_caps([pose], TOPO, SPEC)
    default = np.hypot(368.0, 368.0) / 4.0
    assert all(c == pytest.approx(default) for c in spatial.values())


def test_vote_ids_points_each_pose_at_its_own_history():
    prev = [_figure(0, 120.0, 190.0), _figure(1, 260.0, 190.0)]
    cur = [_figure(0, 128.0, 190.0), _figure(1, 252.0, 190.0)]
    stack = _stack_for(cur, prev, 1)
    params = InferenceParams()
    poses = infer_frame(stack, TOPO, params)
    assert len(poses) == 2
    _, caps_t = distance_caps(prev, TOPO, SPEC)
    votes = vote_ids(stack, prev, poses, TOPO, params, caps_t)
    for (pi, count, total), pose in zip(votes, poses):
        nearest = 0 if pose.keypoints[20, 0] < 190.0 else 1
        assert pi == nearest
        assert count >= 10
        assert total > 0.0


def test_vote_ids_empty_inputs():
    stack = _stack_for([_figure(0, 180.0, 190.0)], None, 0)
    assert vote_ids(stack, [], [], TOPO, InferenceParams()) == []


def test_tracklet_expiry_honors_max_misses():
    tracker = Tracker(TOPO, tracker_params=TrackerParams(max_misses=1))
    p = _figure(0, 180.0, 190.0)
    tracker.step(_stack_for([p], None, 0))
    assert len(tracker.tracklets) == 1
    tracker.step(_stack_for([], [p], 1))
    assert len(tracker.tracklets) == 1, "one miss is allowed"
    tracker.step(_stack_for([], [], 2))
    assert tracker.tracklets == []


def test_expired_identity_is_not_reused():
    tracker = Tracker(TOPO)
    p = _figure(0, 180.0, 190.0)
    out0 = tracker.step(_stack_for([p], None, 0))
    first = out0.poses[0].ident
    tracker.step(_stack_for([], [p], 1))
    out2 = tracker.step(_stack_for([p], [], 2))
    assert out2.poses[0].ident != first


def test_nn_tracker_loses_fast_motion_that_taf_survives():
    # a 60 px jump: far beyond the nearest-neighbor gate for this figure,
    # easily inside the temporal field's reach
    frames = []
    for f in range(6):
        frames.append([_figure(0, 60.0 + 60.0 * f, 190.0)])
    taf = Tracker(TOPO)
    nn = BaselineNNTracker(TOPO)
    taf_ids, nn_ids = [], []
    for f, cur in enumerate(frames):
        prev = frames[f - 1] if f else None
        taf_ids.append(taf.step(_stack_for(cur, prev, f)).poses[0].ident)
        nn_ids.append(nn.step(_stack_for(cur, prev, f)).poses[0].ident)
    assert len(set(taf_ids)) == 1
    assert len(set(nn_ids)) > 1


def test_nn_tracker_keeps_slow_motion():
    nn = BaselineNNTracker(TOPO)
    ids = []
    for f in range(5):
        cur = [_figure(0, 100.0 + 6.0 * f, 190.0)]
        prev = [_figure(0, 100.0 + 6.0 * (f - 1), 190.0)] if f else None
        ids.append(nn.step(_stack_for(cur, prev, f)).poses[0].ident)
    assert len(set(ids)) == 1


def test_make_tracker_dispatch():
    assert isinstance(make_tracker("taf", TOPO), Tracker)
    assert isinstance(make_tracker("nn", TOPO), BaselineNNTracker)
    assert isinstance(make_tracker("baseline_nn", TOPO), BaselineNNTracker)
    with pytest.raises(ValueError, match="unknown tracker"):
        make_tracker("kalman", TOPO)


def test_tracker_params_validation():
    with pytest.raises(ValueError):
        TrackerParams(min_id_votes=0)
    with pytest.raises(ValueError):
        TrackerParams(max_misses=-1)
    with pytest.raises(ValueError):
        TrackerParams(nn_gate_factor=0.0)


def test_bbox_diagonal():
    kps = np.zeros((21, 2))
    kps[1] = (30.0, 40.0)
    vis = np.zeros(21, bool)
    vis[[0, 1]] = True
    assert TrackedPose(0, kps, vis).bbox_diagonal() == pytest.approx(50.0)
    assert TrackedPose(0, kps, np.zeros(21, bool)).bbox_diagonal() == 0.0


def test_pose_json_roundtrip():
    pose = _figure(4, 100.0, 200.0)
    clone = pose_from_json(pose_to_json(pose))
    assert clone.ident == 4
    assert np.allclose(clone.keypoints, pose.keypoints)
    assert clone.head_size == pose.head_size


def test_pose_stream_error_reporting(tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    with pytest.raises(ValueError, match="empty"):
        load_pose_frames(empty)

    headerless = tmp_path / "nohead.jsonl"
    headerless.write_text('{"frame": 0, "poses": []}\n')
    with pytest.raises(ValueError, match="header"):
        load_pose_frames(headerless)

    bad_line = tmp_path / "bad.jsonl"
    frames = [PoseFrame(0, [_figure(0, 180.0, 190.0)])]
    save_pose_frames(frames, bad_line)
    with open(bad_line, "a") as fh:
        fh.write('{"frame": 1}\n')
    with pytest.raises(ValueError, match="bad.jsonl:3"):
        load_pose_frames(bad_line)
