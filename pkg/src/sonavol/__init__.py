"""sonavol: acoustic echo ranging plus two-view silhouette volumetry.

The pipeline measures the height of a downward-facing device above a
surface with a maximum-length-sequence echo probe, converts that height
into a meters-per-pixel image scale, and integrates a top-view and a
side-view silhouette into a physical volume.
"""

from .channel import Channel, scenario_from_geometry, simulate_channel
from .geometry import CameraIntrinsics, ScaleResult, meters_per_pixel
from .mls import (
    CorrelationSeries,
    MlsSequence,
    circular_autocorrelation,
    cross_correlate,
    generate_mls,
)
from .pipeline import PipelineConfig, StageError, run_pipeline
from .ranging import (
    EchoTrace,
    PeakSet,
    RangeEstimate,
    RangingConfig,
    RangingError,
    detect_peaks,
    estimate_height,
    range_with_retry,
)
from .volumetry import (
    FoodMask,
    VolumeReport,
    WidthProfile,
    estimate_volume,
    miou,
    side_profile,
    synth_solid,
    top_area,
)

__version__ = "0.1.0"
