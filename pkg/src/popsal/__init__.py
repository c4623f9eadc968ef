"""popsal: singleton search benchmark toolkit.

Generates odd-one-out search arrays with ground-truth masks, scores saliency
maps with target-discrimination metrics, simulates fixation sequences with
inhibition of return, and aggregates results into curves and tables.
"""

from .dataset_io import (
    AnnotatedScene,
    SampleMeta,
    SampleRecord,
    load_saliency_map,
    load_scene_annotation,
    read_manifest,
    read_sample,
    save_saliency_map,
    write_sample,
    write_scene,
)
from .errors import (
    ConfigurationError,
    DegenerateStimulusError,
    IntegrityError,
    MissingComponentError,
    OutputError,
    PopsalError,
    ValidationError,
)
from .fixsim import DetectionCurve, FixationSimulator, FixationTrace, detection_curve
from .harness import (
    BinnedCurve,
    EvalReport,
    EvalRow,
    SceneSummary,
    aggregate_by_td,
    aggregate_scenes,
    detection_curves,
    emit_plots,
    load_report,
    run_eval,
    write_report,
)
from .metrics import MetricRecord, evaluate_sample, gsi, msr_bg, msr_targ
from .models import CenterSurroundSaliency, SignatureSaliency, make_model
from .stimgen import (
    ArraySpec,
    DatasetManifest,
    ElementLayout,
    FeatureSweep,
    RenderedSample,
    StimulusParams,
    SweepConfig,
    default_sweep,
    gen_dataset,
    plan_layout,
    render_array,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotatedScene",
    "ArraySpec",
    "BinnedCurve",
    "CenterSurroundSaliency",
    "ConfigurationError",
    "DatasetManifest",
    "DegenerateStimulusError",
    "DetectionCurve",
    "ElementLayout",
    "EvalReport",
    "EvalRow",
    "FeatureSweep",
    "FixationSimulator",
    "FixationTrace",
    "IntegrityError",
    "MetricRecord",
    "MissingComponentError",
    "OutputError",
    "PopsalError",
    "RenderedSample",
    "SampleMeta",
    "SampleRecord",
    "SceneSummary",
    "SignatureSaliency",
    "StimulusParams",
    "SweepConfig",
    "ValidationError",
    "aggregate_by_td",
    "aggregate_scenes",
    "default_sweep",
    "detection_curve",
    "detection_curves",
    "emit_plots",
    "evaluate_sample",
    "gen_dataset",
    "gsi",
    "load_report",
    "load_saliency_map",
    "load_scene_annotation",
    "make_model",
    "msr_bg",
    "msr_targ",
    "plan_layout",
    "read_manifest",
    "read_sample",
    "render_array",
    "run_eval",
    "save_saliency_map",
    "write_report",
    "write_sample",
    "write_scene",
]
