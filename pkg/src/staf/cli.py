"""Command-line entry points: synth, track, eval, bench, render.

All coupling between commands flows through files: synth writes one binary
stack per frame next to the ground-truth pose stream, track streams the
stacks in frame order into a tracked pose stream, eval compares two pose
streams, bench times the decode stages, render draws overlays.

Exit codes: 0 success, 1 runtime failure, 2 bad input.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
from dataclasses import fields as dataclass_fields

from . import evaluate, render, sequence
from .body import default_topology
from .config import ConfigError, RunConfig, load_config
from .fields import GridSpec, load_field_stack, save_field_stack
from .tracking import load_pose_frames, make_tracker, save_pose_frames

STACK_NAME = "frame_{:06d}.staf"
_STACK_RE = re.compile(r"frame_(\d{6})\.staf$")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("configuration")
    group.add_argument("--config", help="JSON config file; flags override it")
    for f in dataclass_fields(RunConfig):
        group.add_argument(
            f"--{f.name.replace('_', '-')}",
            dest=f"cfg_{f.name}",
            default=None,
            help=f"override {f.name} (default {getattr(RunConfig, f.name)})",
        )


def _resolve_config(args) -> RunConfig:
    overrides = {}
    for f in dataclass_fields(RunConfig):
        value = getattr(args, f"cfg_{f.name}", None)
        if value is not None:
            overrides[f.name] = value
    return load_config(args.config, None, overrides)


def _grid_for(width: int, height: int, stride: int = 8) -> GridSpec:
    return GridSpec(math.ceil(width / stride), math.ceil(height / stride), stride)


def cmd_synth(args) -> int:
    config = _resolve_config(args)
    script = sequence.load_script(args.script)
    os.makedirs(args.out, exist_ok=True)
    topology = config.topology()
    spec = _grid_for(script.width, script.height)
    frames = sequence.generate(script)
    sequence.save_sequence(frames, os.path.join(args.out, "sequence.jsonl"), script)
    for stack in sequence.synthesize_sequence(
        frames, topology, spec, config.sigma, config.radius
    ):
        path = os.path.join(args.out, STACK_NAME.format(stack.frame_index))
        save_field_stack(stack, path)
    print(f"wrote {len(frames)} stacks and sequence.jsonl to {args.out}")
    return 0


def _stack_paths(directory: str) -> list[tuple[int, str]]:
    if not os.path.isdir(directory):
        raise ValueError(f"{directory}: not a directory")
    found = []
    for name in os.listdir(directory):
        m = _STACK_RE.fullmatch(name)
        if m:
            found.append((int(m.group(1)), os.path.join(directory, name)))
    if not found:
        raise ValueError(f"{directory}: no stack files (frame_NNNNNN.staf)")
    found.sort()
    indices = [i for i, _ in found]
    expected = list(range(indices[0], indices[0] + len(indices)))
    if indices != expected:
        missing = sorted(set(expected) - set(indices))[:20]
        raise ValueError(
            f"{directory}: frame gap, missing indices {missing} "
            f"(have {indices[0]}..{indices[-1]} with {len(indices)} files)"
        )
    return found


def cmd_track(args) -> int:
    config = _resolve_config(args)
    topology = config.topology()
    paths = _stack_paths(args.stacks)
    tracker = make_tracker(
        args.tracker, topology, config.inference_params(), config.tracker_params()
    )
    results = []
    meta = {"tracker": args.tracker, "variant": config.variant}
    for _, path in paths:
        stack = load_field_stack(path, topology)
        results.append(tracker.step(stack))
        if "width" not in meta:
            meta["width"] = stack.spec.input_width
            meta["height"] = stack.spec.input_height
    save_pose_frames(results, args.out, meta)
    n_ids = tracker.next_id
    print(f"tracked {len(results)} frames, {n_ids} identities, wrote {args.out}")
    return 0


def cmd_eval(args) -> int:
    policy = evaluate.MatchPolicy()
    _, gt_frames = load_pose_frames(args.gt)
    _, pred_frames = load_pose_frames(args.pred)
    report = evaluate.evaluate_tracking(gt_frames, pred_frames, policy)
    evaluate.save_report(report, args.out)
    if args.csv:
        rows = [
            {"metric": "mAP", "value": round(report.mean_ap, 4)},
            {"metric": "MOTA", "value": round(report.mota, 4)},
            {"metric": "fp", "value": report.fp},
            {"metric": "fn", "value": report.fn},
            {"metric": "id_switches", "value": report.id_switches},
            {"metric": "gt_count", "value": report.gt_count},
            {"metric": "n_frames", "value": report.n_frames},
        ]
        for name, value in report.group_ap.items():
            rows.append({"metric": f"AP_{name}", "value": round(value, 4)})
        evaluate.write_csv(rows, ["metric", "value"], args.csv)
    print(f"mAP {report.mean_ap:.1f}  MOTA {report.mota:.3f}  "
          f"(fp {report.fp}, fn {report.fn}, idsw {report.id_switches})")
    return 0


def cmd_bench(args) -> int:
    config = _resolve_config(args)
    topology = config.topology()
    rows = evaluate.runtime_experiment(
        topology,
        people_counts=tuple(range(1, args.people + 1)),
        n_frames=args.frames,
        seed=config.seed,
    )
    evaluate.write_csv(rows, evaluate.RUNTIME_CSV_HEADER, args.out)
    print(f"benchmarked 1..{args.people} people, wrote {args.out}")
    return 0


def cmd_render(args) -> int:
    config = _resolve_config(args)
    topology = config.topology()
    meta, frames = load_pose_frames(args.poses)
    width = args.width or int(meta.get("width", 368))
    height = args.height or int(meta.get("height", 368))
    os.makedirs(args.out, exist_ok=True)
    for frame in frames:
        img = render.render_frame(frame, width, height, topology)
        render.write_ppm(
            img, os.path.join(args.out, f"frame_{frame.frame_index:06d}.ppm")
        )
    print(f"rendered {len(frames)} frames to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="staf",
        description="Synthesize, decode, track, and score multi-person pose sequences.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="rasterize field stacks from a motion script")
    p.add_argument("--script", required=True, help="motion script JSON")
    p.add_argument("--out", required=True, help="output directory")
    _add_config_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("track", help="run the tracker over a directory of stacks")
    p.add_argument("--stacks", required=True, help="directory of frame_NNNNNN.staf")
    p.add_argument("--out", required=True, help="tracked pose stream (JSON lines)")
    p.add_argument(
        "--tracker", default="taf", choices=["taf", "baseline_nn"],
        help="id assignment strategy",
    )
    _add_config_flags(p)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("eval", help="score a tracked stream against ground truth")
    p.add_argument("--gt", required=True, help="ground-truth pose stream")
    p.add_argument("--pred", required=True, help="tracked pose stream")
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--csv", help="also write a flat metric CSV here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="time decode stages across crowd sizes")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--people", type=int, default=32, help="largest crowd size")
    p.add_argument("--frames", type=int, default=12, help="frames per crowd size")
    _add_config_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("render", help="draw pose overlays as portable pixmaps")
    p.add_argument("--poses", required=True, help="pose stream to draw")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--width", type=int, help="canvas width (default: stream header)")
    p.add_argument("--height", type=int, help="canvas height (default: stream header)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
