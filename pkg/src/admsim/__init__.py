"""Asynchronous delta modulation: encoding, adaptive thresholds, reconstruction and sweeps."""

from .adaptive import (
    AdaptiveDiagnostics,
    AdaptiveState,
    AdaptiveStepper,
    FilterState,
    adaptive_threshold,
    crossover_gate,
    encode_adaptive,
    envelope,
    extend_pulses,
    gated_lpf,
    lpf_first_order,
)
from .encoder import (
    EncoderState,
    GainTable,
    encode,
    encode_with_threshold_trace,
    initial_state,
    select_gain,
    step,
)
from .errors import *  # noqa: F401,F403
from .reconstruction import (
    ReconstructionConfig,
    highpass_detrend,
    reconstruct,
    reconstruction_error,
    rmse,
)
from .sweep import (
    RateFit,
    SweepGrid,
    SweepRecord,
    default_grid,
    find_min_rmse,
    rate_model_fit,
    rmse_sweep,
)
from .synthesis import (
    Burst,
    SynthSpec,
    default_hfo_spec,
    synth_band_noise,
    synth_hfo_composite,
    synth_sine,
    synthesize,
)
from .types import (
    DN,
    UP,
    AdaptiveConfig,
    AdmConfig,
    Event,
    EventStream,
    Polarity,
    Signal,
    validate_signal,
)

__version__ = "0.1.0"
