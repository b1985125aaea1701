"""duffing-lab: a laboratory for the dissipative Duffing oscillator
across the quantum-classical transition.

Five models of the same driven double-well system (classical,
noise-dressed classical in two flavors, and the 4- and 5-variable
semiclassical wavepacket reductions), a fixed-step stochastic
integrator, Lyapunov/complexity metrics, attractor-distance geometry,
and a deterministic parallel sweep engine with characteristic-scale
detectors.
"""

from ._version import __version__  # noqa: F401

from .models import (  # noqa: F401
    BETA_FIXED,
    DegeneratePairError,
    DiffusionCoeffs,
    DuffingError,
    ModelKind,
    ModelSpec,
    NumericOverflowError,
    OffManifoldError,
    SpreadCollapseError,
    StateSC,
    StateSC5,
    StateXP,
    classical_rhs,
    default_initial_state,
    lift_4to5,
    noisy_classical_diffusion,
    observable_energy,
    potential_surface,
    reduce_5to4,
    sc5_diffusion,
    sc5_drift,
    sc_diffusion,
    sc_drift,
    uncertainty_defect,
)
from .noise import (  # noqa: F401
    ComplexNoiseIncrement,
    NoiseStats,
    make_rng,
    sample_complex_increment,
)
from .integrate import (  # noqa: F401
    IntegratorConfig,
    SamplingPlan,
    Scheme,
    Trajectory,
    integrate,
    step,
)
from .lyapunov import (  # noqa: F401
    AttractorClass,
    ComplexityRecord,
    LyapunovEstimate,
    beta_break,
    classify_attractor,
    dynamical_complexity,
    lyapunov_wolf,
)
from .geometry import (  # noqa: F401
    DistanceResult,
    Histogram,
    PoincareSection,
    energy_spectrum,
    mean_cross_model_distance,
    mean_intra_model_distance,
    mean_lambda_gap,
    phase_distance,
    poincare_section,
    scaled_histogram,
    skl_distance,
    spectrum_distance,
    write_distance_matrix_csv,
    write_histogram_csv,
    write_section_csv,
)
from .sweep import (  # noqa: F401
    DESK_BETAS,
    DESK_GAMMAS,
    SweepGrid,
    SweepRecord,
    build_grid,
    desk_config,
    desk_grid,
    detect_beta_chaos,
    detect_beta_conv,
    read_manifest,
    read_records,
    run_sweep,
    seed_for,
    write_records,
)
