"""Decide and certify extra translation invariance of finitely generated shift-invariant spaces."""
from .config import AnalysisConfig, parse_config, serialize_config
from .errors import (
    ConfigError,
    GridError,
    HypothesisViolation,
    ReportIOError,
    SISError,
    SpectrumError,
)
from .fiber import dimension_function, fiber, fiber_matrix, gramian_field, numerical_rank
from .frames import cutoff_frame_check, frame_bounds
from .invariance import (
    cutoff,
    in_partition,
    invariance_order,
    modulation_h,
    rank_level_sets,
    rank_sum_test,
    residue_support_profile,
    ti_check,
    zero_set_bound_check,
)
from .oracle import fiber_residual, invariance_oracle, refined_membership, translate
from .pipeline import InvarianceReport, run_analysis
from .report import emit_report
from .spectrum import (
    BSpline,
    Daubechies,
    FrequencyGrid,
    Gaussian,
    PiecewiseConstant,
    Samples,
    SampledSpectrum,
    evaluate,
    indicator,
    make_piecewise_constant,
    support_measure,
)

__version__ = "0.1.0"
