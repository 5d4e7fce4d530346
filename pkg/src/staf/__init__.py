"""Bottom-up multi-person pose tracking on spatial and temporal vector fields."""

from .body import BodyTopology, build_topology, default_topology, load_topology
from .fields import AnnotatedPose, FieldStack, GridSpec, synthesize_frame

__version__ = "0.1.0"

__all__ = [
    "AnnotatedPose",
    "BodyTopology",
    "FieldStack",
    "GridSpec",
    "build_topology",
    "default_topology",
    "load_topology",
    "synthesize_frame",
    "__version__",
]
