"""Scripted synthetic people for exercising the full pipeline.

A motion script places articulated 21-keypoint stick figures in the frame
and moves them rigidly (translation, rotation, limb sway) over time. From
the generated ground truth the field synthesizer can stand in for a
network, which makes every downstream stage testable against exact answers.

All randomness flows through one seeded generator per script, so a script
plus a seed is a complete, reproducible description of a sequence.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .fields import AnnotatedPose, FieldStack, GridSpec, synthesize_frame
from .body import BodyTopology
from .tracking import PoseFrame, TrackedPose, save_pose_frames

# upright template, pelvis at origin, x right, y down, input pixels at scale 1
TEMPLATE = np.array(
    [
        [0.0, -84.0],  # nose
        [-6.0, -88.0],  # left_eye
        [6.0, -88.0],  # right_eye
        [-12.0, -84.0],  # left_ear
        [12.0, -84.0],  # right_ear
        [-22.0, -64.0],  # left_shoulder
        [22.0, -64.0],  # right_shoulder
        [-30.0, -36.0],  # left_elbow
        [30.0, -36.0],  # right_elbow
        [-34.0, -8.0],  # left_wrist
        [34.0, -8.0],  # right_wrist
        [-13.0, -2.0],  # left_hip
        [13.0, -2.0],  # right_hip
        [-15.0, 44.0],  # left_knee
        [15.0, 44.0],  # right_knee
        [-16.0, 88.0],  # left_ankle
        [16.0, 88.0],  # right_ankle
        [0.0, -98.0],  # head_top
        [0.0, -70.0],  # neck
        [0.0, -52.0],  # thorax
        [0.0, 0.0],  # pelvis
    ]
)

HEAD_TOP, NECK = 17, 18
# swaying joints with gain and gait phase: wrists and ankles swing wide,
# elbows and knees half as far, left and right half a cycle apart
_SWAY = [(7, 0.5, 0.0), (9, 1.0, 0.0), (13, 0.5, 0.5), (15, 1.0, 0.5),
         (8, 0.5, 0.5), (10, 1.0, 0.5), (14, 0.5, 0.0), (16, 1.0, 0.0)]

MIN_VISIBLE = 3  # a person with fewer in-frame keypoints is absent from truth


@dataclass(frozen=True)
class PersonScript:
    """One person's motion over a window of frames.

    The anchor is the pelvis position at the enter frame; velocity is in
    input pixels per frame. With bounce on, the figure reflects off the
    frame edges instead of leaving. The same ident may appear in several
    non-overlapping windows to model leaving and returning.
    """

    ident: int
    anchor: tuple[float, float]
    scale: float = 1.0
    velocity: tuple[float, float] = (0.0, 0.0)
    enter: int = 0
    exit: int | None = None
    rotation: float = 0.0
    rotation_rate: float = 0.0
    sway_amp: float = 0.0
    sway_freq: float = 0.0
    sway_phase: float = 0.0
    jitter_sd: float = 0.0
    bounce: bool = True

    def __post_init__(self):
        if self.ident < 0:
            raise ValueError("ident must be >= 0")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.enter < 0:
            raise ValueError("enter must be >= 0")
        if self.exit is not None and self.exit <= self.enter:
            raise ValueError("exit must be after enter")
        if self.jitter_sd < 0 or self.sway_amp < 0:
            raise ValueError("noise amplitudes must be >= 0")

    def active(self, frame: int, n_frames: int) -> bool:
        end = n_frames if self.exit is None else min(self.exit, n_frames)
        return self.enter <= frame < end


@dataclass(frozen=True)
class MotionScript:
    n_frames: int
    people: tuple[PersonScript, ...]
    width: int = 368
    height: int = 368
    fps: float = 24.0
    seed: int = 0

    def __post_init__(self):
        if self.n_frames < 1:
            raise ValueError("n_frames must be >= 1")
        if self.width < 64 or self.height < 64:
            raise ValueError("frame must be at least 64x64 pixels")
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        windows: dict[int, list[tuple[int, int]]] = {}
        for p in self.people:
            end = self.n_frames if p.exit is None else p.exit
            for lo, hi in windows.get(p.ident, []):
                if p.enter < hi and lo < end:
                    raise ValueError(
                        f"ident {p.ident} appears in overlapping windows"
                    )
            windows.setdefault(p.ident, []).append((p.enter, end))


def _margins(scale: float) -> tuple[float, float, float]:
    """Pelvis distance to each frame edge keeping the whole figure inside."""
    pad = 4.0
    half_w = 1.1 * float(np.abs(TEMPLATE[:, 0]).max()) * scale + pad
    top = 1.1 * float(-TEMPLATE[:, 1].min()) * scale + pad
    bottom = 1.1 * float(TEMPLATE[:, 1].max()) * scale + pad
    return half_w, top, bottom


def _reflect(pos: float, vel: float, lo: float, hi: float) -> tuple[float, float]:
    if pos < lo:
        return min(2.0 * lo - pos, hi), -vel
    if pos > hi:
        return max(2.0 * hi - pos, lo), -vel
    return pos, vel


def generate(script: MotionScript) -> list[PoseFrame]:
    """Roll the script forward and return ground-truth poses per frame.

    Keypoints outside the frame are marked invisible; a person with fewer
    than three visible keypoints is left out of that frame entirely.
    """
    rng = np.random.Generator(np.random.PCG64(script.seed))
    state: dict[int, tuple[float, float, float, float]] = {}
    frames = []
    for f in range(script.n_frames):
        poses = []
        for seg_index, p in enumerate(script.people):
            if not p.active(f, script.n_frames):
                state.pop(seg_index, None)
                continue
            if seg_index not in state:
                state[seg_index] = (p.anchor[0], p.anchor[1], p.velocity[0], p.velocity[1])
            else:
                x, y, vx, vy = state[seg_index]
                x += vx
                y += vy
                if p.bounce:
                    half_w, top, bottom = _margins(p.scale)
                    x, vx = _reflect(x, vx, half_w, script.width - half_w)
                    y, vy = _reflect(y, vy, top, script.height - bottom)
                state[seg_index] = (x, y, vx, vy)
            x, y, _, _ = state[seg_index]

            tpl = TEMPLATE.copy()
            if p.sway_amp > 0:
                t = f - p.enter
                for kp, gain, phase in _SWAY:
                    tpl[kp, 0] += (
                        p.sway_amp
                        * gain
                        * math.sin(2.0 * math.pi * (p.sway_freq * t + p.sway_phase + phase))
                    )
            theta = p.rotation + p.rotation_rate * (f - p.enter)
            if theta:
                c, s = math.cos(theta), math.sin(theta)
                tpl = tpl @ np.array([[c, s], [-s, c]])
            kps = tpl * p.scale + (x, y)
            if p.jitter_sd > 0:
                kps = kps + rng.normal(0.0, p.jitter_sd, kps.shape)

            visible = (
                (kps[:, 0] >= 0)
                & (kps[:, 0] < script.width)
                & (kps[:, 1] >= 0)
                & (kps[:, 1] < script.height)
            )
            if int(visible.sum()) < MIN_VISIBLE:
                continue
            head = 1.5 * float(np.hypot(*(kps[HEAD_TOP] - kps[NECK])))
            poses.append(TrackedPose(p.ident, kps, visible, 1.0, head))
        frames.append(PoseFrame(f, poses))
    return frames


def to_annotated(frame: PoseFrame) -> list[AnnotatedPose]:
    return [
        AnnotatedPose(p.ident, p.keypoints, p.visible, p.head_size)
        for p in frame.poses
    ]


def synthesize_sequence(
    frames: list[PoseFrame],
    topology: BodyTopology,
    spec: GridSpec | None = None,
    sigma: float | None = None,
    radius: float | None = None,
):
    """Yield one field stack per ground-truth frame, in order.

    The first frame has no predecessor, so its temporal channels are built
    against the frame itself.
    """
    from .fields import DEFAULT_RADIUS, DEFAULT_SIGMA

    spec = spec or GridSpec()
    sigma = DEFAULT_SIGMA if sigma is None else sigma
    radius = DEFAULT_RADIUS if radius is None else radius
    prev: list[AnnotatedPose] | None = None
    for frame in frames:
        cur = to_annotated(frame)
        yield synthesize_frame(
            cur, prev, topology, spec, sigma, radius, frame.frame_index
        )
        prev = cur


def subsample(frames: list[PoseFrame], factor: int) -> list[PoseFrame]:
    """Keep every factor-th frame and renumber from zero.

    Renumbering keeps the result a valid contiguous sequence for streaming
    consumers; it models a camera that simply ran at a lower rate.
    """
    if factor < 1:
        raise ValueError("factor must be >= 1")
    return [
        PoseFrame(i, frame.poses) for i, frame in enumerate(frames[::factor])
    ]


# ---------------------------------------------------------------------------
# canned scenes
# ---------------------------------------------------------------------------


def lane_walkers(
    n_people: int = 5,
    n_frames: int = 100,
    seed: int = 0,
    scale: float = 0.5,
    speed: float = 10.0,
    fps: float = 24.0,
    width: int = 368,
    height: int = 368,
) -> MotionScript:
    """One walker per horizontal lane, alternating direction, bouncing.

    Lanes are disjoint in y, so keypoints of the same type on different
    people always stay at least a lane pitch apart no matter how the
    walkers bounce around in x.
    """
    if n_people < 1:
        raise ValueError("need at least one walker")
    rng = np.random.Generator(np.random.PCG64(seed))
    half_w, top, bottom = _margins(scale)
    if n_people == 1:
        ys = [0.5 * (top + height - bottom)]
    else:
        ys = np.linspace(top, height - bottom, n_people).tolist()
    people = []
    for i, y in enumerate(ys):
        x = float(rng.uniform(half_w, width - half_w))
        direction = 1.0 if i % 2 == 0 else -1.0
        people.append(
            PersonScript(
                ident=i,
                anchor=(x, float(y)),
                scale=scale,
                velocity=(direction * speed, 0.0),
                sway_amp=4.0,
                sway_freq=0.08,
            )
        )
    return MotionScript(n_frames, tuple(people), width, height, fps, seed)


def stationary_plus_newcomer(
    n_frames: int = 16, seed: int = 0, fps: float = 24.0
) -> MotionScript:
    """A perfectly still person, joined mid-sequence by a second walker.

    The still person never moves a pixel, which makes same-keypoint
    temporal segments degenerate; the newcomer approaches but keeps a wide
    berth so the two never interact spatially.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    static = PersonScript(
        ident=0,
        anchor=(110.0 + float(rng.uniform(-15, 15)), 195.0 + float(rng.uniform(-15, 15))),
        scale=0.85,
    )
    newcomer = PersonScript(
        ident=1,
        anchor=(285.0 + float(rng.uniform(-8, 8)), 160.0 + float(rng.uniform(-20, 20))),
        scale=0.85,
        velocity=(-5.0 - float(rng.uniform(0, 2)), float(rng.uniform(-1, 1))),
        enter=n_frames // 2,
    )
    return MotionScript(n_frames, (static, newcomer), fps=fps, seed=seed)


def crossing_pair(
    n_frames: int = 28,
    seed: int = 0,
    speed: float = 8.0,
    lane_gap: float = 40.0,
    scale: float = 0.8,
    fps: float = 24.0,
) -> MotionScript:
    """Two walkers in nearby lanes passing each other in opposite directions."""
    a = PersonScript(0, (70.0, 160.0), scale, (speed, 0.0), sway_amp=3.0, sway_freq=0.07)
    b = PersonScript(
        1, (298.0, 160.0 + lane_gap), scale, (-speed, 0.0), sway_amp=3.0,
        sway_freq=0.07, sway_phase=0.3,
    )
    return MotionScript(n_frames, (a, b), fps=fps, seed=seed)


def exit_reenter(n_frames: int = 44, seed: int = 0, fps: float = 24.0) -> MotionScript:
    """One person holds position while another leaves the frame and returns."""
    stayer = PersonScript(0, (100.0, 190.0), 0.8, (0.0, 0.0))
    leaver = PersonScript(
        1, (260.0, 190.0), 0.8, (9.0, 0.0), enter=0, exit=22, bounce=False
    )
    returner = PersonScript(
        1, (330.0, 190.0), 0.8, (-9.0, 0.0), enter=30, bounce=False
    )
    return MotionScript(n_frames, (stayer, leaver, returner), fps=fps, seed=seed)


def crowd(
    n_people: int = 8,
    n_frames: int = 50,
    seed: int = 0,
    fps: float = 24.0,
    width: int = 368,
    height: int = 368,
    drift: float = 2.0,
) -> MotionScript:
    """A grid of slowly drifting people, sized so the grid fits the frame."""
    if n_people < 1:
        raise ValueError("need at least one person")
    rng = np.random.Generator(np.random.PCG64(seed))
    cols = int(math.ceil(math.sqrt(n_people)))
    rows = int(math.ceil(n_people / cols))
    scale = min(0.5, (height / rows) / 230.0, (width / cols) / 95.0)
    people = []
    for i in range(n_people):
        r, c = divmod(i, cols)
        x = (c + 0.5) * width / cols + float(rng.uniform(-5, 5))
        y = (r + 0.5) * height / rows + float(rng.uniform(-5, 5))
        # jitter may push an outer row's head past the border; clamp so the
        # whole figure starts inside
        half_w, top, bottom = _margins(scale)
        x = min(max(x, half_w), width - half_w)
        y = min(max(y, top), height - bottom)
        people.append(
            PersonScript(
                ident=i,
                anchor=(x, y),
                scale=scale,
                velocity=(float(rng.uniform(-drift, drift)), float(rng.uniform(-drift, drift))),
            )
        )
    return MotionScript(n_frames, tuple(people), width, height, fps, seed)


_SCENARIOS = {
    "lane_walkers": lane_walkers,
    "stationary_plus_newcomer": stationary_plus_newcomer,
    "crossing_pair": crossing_pair,
    "exit_reenter": exit_reenter,
    "crowd": crowd,
}


def scenario(name: str, **kwargs) -> MotionScript:
    try:
        builder = _SCENARIOS[name]
    except KeyError:
        known = ", ".join(sorted(_SCENARIOS))
        raise ValueError(f"unknown scenario {name!r} (choose from: {known})") from None
    return builder(**kwargs)


def scenario_names() -> list[str]:
    return sorted(_SCENARIOS)


# ---------------------------------------------------------------------------
# script serialization
# ---------------------------------------------------------------------------

_PERSON_FIELDS = {
    "id": int,
    "anchor": list,
    "scale": (int, float),
    "velocity": list,
    "enter": int,
    "exit": (int, type(None)),
    "rotation": (int, float),
    "rotation_rate": (int, float),
    "sway_amp": (int, float),
    "sway_freq": (int, float),
    "sway_phase": (int, float),
    "jitter_sd": (int, float),
    "bounce": bool,
}


def _pair(value, path: str) -> tuple[float, float]:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, (int, float)) for v in value)
    ):
        raise ValueError(f"{path}: expected a pair of numbers")
    return float(value[0]), float(value[1])


def script_to_json(script: MotionScript) -> dict:
    people = []
    for p in script.people:
        rec = {
            "id": p.ident,
            "anchor": list(p.anchor),
            "scale": p.scale,
            "velocity": list(p.velocity),
            "enter": p.enter,
            "exit": p.exit,
            "rotation": p.rotation,
            "rotation_rate": p.rotation_rate,
            "sway_amp": p.sway_amp,
            "sway_freq": p.sway_freq,
            "sway_phase": p.sway_phase,
            "jitter_sd": p.jitter_sd,
            "bounce": p.bounce,
        }
        people.append(rec)
    return {
        "type": "script",
        "version": 1,
        "n_frames": script.n_frames,
        "width": script.width,
        "height": script.height,
        "fps": script.fps,
        "seed": script.seed,
        "people": people,
    }


def script_from_json(obj: dict) -> MotionScript:
    if not isinstance(obj, dict):
        raise ValueError("script: expected a JSON object")
    if obj.get("type") != "script":
        raise ValueError('script.type: expected "script"')
    for key, kind in (("n_frames", int), ("people", list)):
        if key not in obj:
            raise ValueError(f"script.{key}: missing")
        if not isinstance(obj[key], kind):
            raise ValueError(f"script.{key}: expected {kind.__name__}")
    people = []
    for i, rec in enumerate(obj["people"]):
        path = f"script.people[{i}]"
        if not isinstance(rec, dict):
            raise ValueError(f"{path}: expected an object")
        for key in rec:
            if key not in _PERSON_FIELDS:
                raise ValueError(f"{path}.{key}: unknown field")
        for key in ("id", "anchor"):
            if key not in rec:
                raise ValueError(f"{path}.{key}: missing")
        for key, kinds in _PERSON_FIELDS.items():
            if key in rec and not isinstance(rec[key], kinds):
                raise ValueError(f"{path}.{key}: wrong type")
        try:
            people.append(
                PersonScript(
                    ident=rec["id"],
                    anchor=_pair(rec["anchor"], f"{path}.anchor"),
                    scale=float(rec.get("scale", 1.0)),
                    velocity=_pair(rec.get("velocity", [0.0, 0.0]), f"{path}.velocity"),
                    enter=rec.get("enter", 0),
                    exit=rec.get("exit"),
                    rotation=float(rec.get("rotation", 0.0)),
                    rotation_rate=float(rec.get("rotation_rate", 0.0)),
                    sway_amp=float(rec.get("sway_amp", 0.0)),
                    sway_freq=float(rec.get("sway_freq", 0.0)),
                    sway_phase=float(rec.get("sway_phase", 0.0)),
                    jitter_sd=float(rec.get("jitter_sd", 0.0)),
                    bounce=rec.get("bounce", True),
                )
            )
        except ValueError as exc:
            raise ValueError(f"{path}: {exc}") from None
    try:
        return MotionScript(
            n_frames=obj["n_frames"],
            people=tuple(people),
            width=obj.get("width", 368),
            height=obj.get("height", 368),
            fps=float(obj.get("fps", 24.0)),
            seed=obj.get("seed", 0),
        )
    except ValueError as exc:
        raise ValueError(f"script: {exc}") from None


def save_script(script: MotionScript, path) -> None:
    with open(path, "w") as fh:
        json.dump(script_to_json(script), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_script(path) -> MotionScript:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON: {exc}") from None
    return script_from_json(obj)


def script_hash(script: MotionScript) -> str:
    canon = json.dumps(script_to_json(script), sort_keys=True)
    return hashlib.sha1(canon.encode()).hexdigest()[:12]


def sequence_meta(script: MotionScript, scenario_name: str | None = None) -> dict:
    meta = {
        "fps": script.fps,
        "seed": script.seed,
        "width": script.width,
        "height": script.height,
        "script": script_hash(script),
    }
    if scenario_name:
        meta["scenario"] = scenario_name
    return meta


def save_sequence(
    frames: list[PoseFrame], path, script: MotionScript, scenario_name: str | None = None
) -> None:
    save_pose_frames(frames, path, sequence_meta(script, scenario_name))
