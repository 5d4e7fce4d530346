"""
Field stacks and the three temporal wirings
===========================================

A field stack is everything the decoder sees in one frame: per-keypoint
confidence maps, unit-vector limb fields within the frame, and unit-vector
temporal fields pointing from the previous frame into this one. This walk
builds one stack per wiring variant and pokes at the arrays.
"""

import numpy as np

from staf.body import default_topology
from staf.fields import GridSpec, synthesize_frame
from staf.sequence import generate, scenario, to_annotated

# the 21-keypoint body with three choices of temporal wiring:
#   A: one temporal edge per keypoint (keypoint at t-1 -> same keypoint at t)
#   B: two temporal edges per limb (cross-linked ends, both orientations)
#   C: temporal edges only, no within-frame limb fields at all
for variant in ("A", "B", "C"):
    topo = default_topology(variant)
    print(
        f"variant {variant}: {topo.n_keypoints} keypoints, "
        f"{len(topo.spatial_edges):3d} limb edges, "
        f"{len(topo.temporal_edges):3d} temporal edges, "
        f"{topo.n_channels} channels total"
    )

# two frames of a small crowd give us a previous and a current pose set
frames = generate(scenario("crowd", n_people=3, n_frames=2, seed=11))
prev, cur = to_annotated(frames[0]), to_annotated(frames[1])

spec = GridSpec()
topo = default_topology("B")
stack = synthesize_frame(cur, prev, topo, spec, frame_index=1)
print(f"\ngrid {spec.width}x{spec.height}, stride {spec.stride}, "
      f"stack array {stack.data.shape} ({stack.data.nbytes // 1024} KiB)")

# confidence channels live first; every visible keypoint leaves a gaussian bump
conf = stack.data[:, :, : topo.n_keypoints]
print(f"confidence range [{conf.min():.3f}, {conf.max():.3f}], "
      f"{int((conf.max(axis=2) > 0.5).sum())} cells above 0.5")

# limb fields hold unit vectors inside a band around each bone
field = stack.spatial_field(0)
mag = np.hypot(field[:, :, 0], field[:, :, 1])
edge = topo.spatial_edges[0]
print(f"\nlimb field 0 ({topo.keypoints[edge.src].name} -> "
      f"{topo.keypoints[edge.dst].name}): {int((mag > 0).sum())} written cells, "
      f"all unit length: {bool(np.allclose(mag[mag > 0], 1.0))}")

# temporal fields do the same across frames; wiring B gives every limb two
# of them, one per orientation, and once people move those are genuinely
# different segments (old src -> new dst vs old dst -> new src)
fwd = stack.temporal_field(0)
rev = stack.temporal_field(1)
n_fwd = int((np.hypot(fwd[..., 0], fwd[..., 1]) > 0).sum())
n_rev = int((np.hypot(rev[..., 0], rev[..., 1]) > 0).sum())
print(f"temporal pair of limb 0: forward writes {n_fwd} cells, reverse {n_rev}")

# when nothing moves the temporal field collapses onto the limb field
frozen = synthesize_frame(cur, cur, topo, spec)
print(f"\nzero motion: temporal(0) identical to limb(0): "
      f"{frozen.temporal_field(0).tobytes() == frozen.spatial_field(0).tobytes()}")
