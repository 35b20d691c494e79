"""twinwave: Monte Carlo simulator and coherence statistics for intense twin beams.

The package decomposes pump-depleted parametric down-conversion into
independent mode triplets, propagates them shot by shot through the
crystal, synthesizes far-field signal/idler intensity frames, and
measures local intensity coherence through the normalized fluctuation
variance g2bar and correlation-profile widths.
"""

from .errors import ConfigError, EstimatorError, IntegrationError, NumericError, TwinwaveError
from .modes import (
    CouplingSchedule,
    ModeIndex,
    ModeSet,
    PumpConfig,
    coupling,
    gain_parameter,
    mode_profile,
    photons_per_pulse,
)
from .geometry import IDLER, SIGNAL, DetectorGeometry, ModeProfileBasis
from .dynamics import (
    TripletState,
    Trajectory,
    derivative,
    integrate,
    linearized_gain_mean,
    manley_rowe,
)
from .ensemble import (
    FrameStack,
    RunConfig,
    pump_weights,
    run_ensemble,
    seed_triplet,
    shot_stream,
    simulate_shot,
    synthesize_frame,
    vacuum_mean_map,
)
from .stats import (
    CorrelationProfile,
    G2Map,
    GroupingSpec,
    autocorrelation_profile,
    central_radial_profile,
    cross_correlation_contrast,
    cross_correlation_peak,
    fwhm,
    g2bar,
    g2bar_map,
    profile_maxima,
    shift_idler_shots,
    wave_trajectory,
)
from .gauss1d import Gaussian1DModel, erf, g2_1d_closed, g2_1d_quadrature, sensitivity_table
from .synthetic import SyntheticSpec, apply_camera_noise, synth_stack, synth_thermal
from .config import build_config, default_config, default_toml, parse_config
from .sweep import SweepResult, calibrate_threshold, run_sweep
from .io import load_frames, save_frames, verify_manifest, write_csv, write_pgm

__version__ = "0.1.0"
