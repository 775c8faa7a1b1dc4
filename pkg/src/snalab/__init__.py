"""Quasiperiodically forced circle maps: strange non-chaotic attractors,
their multiscale structure, and rectifiability diagnostics.

The usual entry points:

    from snalab import CircleMapFamily, FamilyKind, ForcingKind, Frequency
    fam = CircleMapFamily(kind=FamilyKind.ARCTAN, omega=Frequency.golden(),
                          alpha=3000.0, tau=0.525,
                          forcing=ForcingKind.ARCTAN_SINE, amplitude=1000.0)

or the `snalab` command line tool.
"""

from .arcs import ArcSet
from .attractor import (
    Direction,
    InvariantGraphSample,
    LyapunovEstimate,
    birkhoff_blocks,
    birkhoff_lyapunov,
    lyapunov_of_graph,
    pullback_graph,
    pullback_values,
    rotation_number,
)
from .circle import Frequency, circle_dist, lift_half, wrap
from .config import (
    ConfigError,
    ExperimentConfig,
    load_config,
    parse_config,
    resolved_text,
    serialize_config,
)
from .families import (
    CircleMapFamily,
    ContractionExpansionData,
    FamilyKind,
    ForcingKind,
    estimate_constants,
    saturating_primitive,
    warp,
)
from .multiscale import (
    ScaleHierarchy,
    StablePhaseSet,
    WrapAmbiguity,
    check_component_sizes,
    check_return_separation,
    check_window_separation,
    critical_step,
    entry_windows,
    measure_budget,
    retention_sequence,
    stable_phase_set,
)
from .pipeline import (
    Plateau,
    ReportResult,
    SweepResult,
    SweepRow,
    run_hierarchy,
    run_sna_report,
    run_staircase,
)
from .rectifiability import (
    DimensionEstimate,
    LipschitzReport,
    VisitStats,
    box_dimension,
    check_visit_bounds,
    empirical_lipschitz,
    fraction_outside,
    pointwise_dimension,
    slope_bound,
    visit_counts,
)

__version__ = "0.1.0"

__all__ = [
    "ArcSet",
    "CircleMapFamily",
    "ConfigError",
    "ContractionExpansionData",
    "Direction",
    "DimensionEstimate",
    "ExperimentConfig",
    "FamilyKind",
    "ForcingKind",
    "Frequency",
    "InvariantGraphSample",
    "LipschitzReport",
    "LyapunovEstimate",
    "Plateau",
    "ReportResult",
    "ScaleHierarchy",
    "StablePhaseSet",
    "SweepResult",
    "SweepRow",
    "VisitStats",
    "WrapAmbiguity",
    "birkhoff_blocks",
    "birkhoff_lyapunov",
    "box_dimension",
    "check_component_sizes",
    "check_return_separation",
    "check_visit_bounds",
    "check_window_separation",
    "circle_dist",
    "critical_step",
    "empirical_lipschitz",
    "entry_windows",
    "estimate_constants",
    "fraction_outside",
    "lift_half",
    "load_config",
    "lyapunov_of_graph",
    "measure_budget",
    "parse_config",
    "pointwise_dimension",
    "pullback_graph",
    "pullback_values",
    "resolved_text",
    "retention_sequence",
    "rotation_number",
    "run_hierarchy",
    "run_sna_report",
    "run_staircase",
    "saturating_primitive",
    "serialize_config",
    "slope_bound",
    "stable_phase_set",
    "visit_counts",
    "warp",
    "wrap",
    "__version__",
]
