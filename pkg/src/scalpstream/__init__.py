"""Real-time EEG stream processing with scalp topography, an sLORETA source
view, and a WebSocket frame protocol for browser head displays."""

__version__ = "0.1.0"

from .montage import Montage, Electrode, standard_montage, load_montage, geodesic_distance
from .dsp import BandpassSpec, StreamingBandpass, power_envelope, analytic_phase, plv, laplacian
from .pipelines import PipelineSet, PipelineConfig, Baseline, calibrate
from .topomap import ScalpGrid, ColorPolicy, interpolate, colorize, eye_state
from .inverse import LeadField, SloretaKernel, compute_kernel, source_power, spherical_lead_field
from .synth import Scenario, Event, generate, write_recording
from .session import SampleBlock, SessionConfig, SessionEngine, load_recording

__all__ = [
    "Montage", "Electrode", "standard_montage", "load_montage", "geodesic_distance",
    "BandpassSpec", "StreamingBandpass", "power_envelope", "analytic_phase", "plv",
    "laplacian", "PipelineSet", "PipelineConfig", "Baseline", "calibrate",
    "ScalpGrid", "ColorPolicy", "interpolate", "colorize", "eye_state",
    "LeadField", "SloretaKernel", "compute_kernel", "source_power",
    "spherical_lead_field", "Scenario", "Event", "generate", "write_recording",
    "SampleBlock", "SessionConfig", "SessionEngine", "load_recording",
    "__version__",
]
