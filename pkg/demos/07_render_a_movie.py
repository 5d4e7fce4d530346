"""
Rendering tracked skeletons
===========================

Run the whole pipeline on a crossing pair and draw every frame as a
portable pixmap, one color per identity. The PPMs are plain binary files
most image viewers open directly; ffmpeg stitches them into a clip:

    ffmpeg -i frame_%04d.ppm movie.gif
"""

from pathlib import Path

from staf.body import default_topology
from staf.evaluate import run_tracker
from staf.render import render_frame, write_ppm
from staf.sequence import generate, scenario

out_dir = Path(__file__).parent / "out" / "07_movie"
out_dir.mkdir(parents=True, exist_ok=True)

topology = default_topology("B")
frames = generate(scenario("crossing_pair", seed=6))
tracked = run_tracker(frames, topology, "taf")

for frame in tracked:
    img = render_frame(frame, 368, 368, topology)
    write_ppm(img, out_dir / f"frame_{frame.frame_index:04d}.ppm")

idents = sorted({p.ident for f in tracked for p in f.poses})
print(f"rendered {len(tracked)} frames to {out_dir}")
print(f"identities drawn: {idents} (each keeps its color while the two cross)")
