"""haptiforge: personalized electro-haptic layouts, stimulator simulation,
wire protocol, perception model, and psychophysics session tooling."""

__version__ = "0.1.0"

from .hand_geometry import (  # noqa: F401
    FingerMetrics, FlatHand, HandMesh, LandmarkSet, Plane,
    compute_finger_metrics, fit_plane, flatten_to_2d, project_vertices,
)
from .layout import (  # noqa: F401
    ConnectorSpec, ElectrodeSite, HandContour, LayoutDesign, TraceRoute,
    build_connector, generate_contour, place_electrodes, route_traces,
    synthesize_layout, validate_layout,
)
from .perception import (  # noqa: F401
    IntensitySurface, RatingRecord, fit_surface, invert, predict,
    synthetic_default_surface,
)
from .stimulator import (  # noqa: F401
    PulsePattern, SafetyLimits, ScheduleEvent, WaveformTrace, build_schedule,
    charge_per_period_uc, output_current, simulate, validate_pattern,
)
