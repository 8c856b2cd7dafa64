"""Finite-memory Gaussian-noise channel laboratory.

Models a nonlinear dispersive fiber link at three levels of abstraction --
memoryless AWGN, the Gaussian-noise (GN) model, and a finite-memory GN model
whose noise variance tracks the empirical power of the surrounding symbols --
and provides exact uncoded 16-QAM error rates, Monte Carlo verification,
channel-capacity bounds with heavy-tailed inputs, and first-principles
split-step validation.
"""

from .analytic import (
    memory_energy_pmf,
    q_function,
    qam16_bit_error_rate,
    qam16_error_rates_limit,
    qam16_symbol_error_rate,
)
from .capacity import (
    BoundEstimate,
    TDistInput,
    capacity_awgn,
    capacity_gn,
    capacity_lower_bound,
    monotone_envelope,
    optimize_lower_bound,
    received_energy_log_density,
    sample_radius,
)
from .channel import (
    ChannelModel,
    NoiseParams,
    SymbolBlock,
    noise_variance_profile,
    transmit,
    window_noise_variance,
)
from .modem import Constellation, DetectorKind, detect_ml_genie, detect_nearest, modulate
from .montecarlo import ErrorCounts, SimPlan, StopRule, derive_seed, run_ber_ser
from .params import (
    PowerDbm,
    SystemParams,
    dbm_to_watts,
    memory_estimate,
    nli_coefficient_distributed,
    nli_coefficient_lumped,
    watts_to_dbm,
)
from .waveform import (
    FiberSpan,
    WaveformGrid,
    nonstationary_qpsk_experiment,
    propagate,
    pulse_broadening_experiment,
    pulse_shape,
)

__all__ = [
    "BoundEstimate",
    "ChannelModel",
    "Constellation",
    "DetectorKind",
    "ErrorCounts",
    "FiberSpan",
    "NoiseParams",
    "PowerDbm",
    "SimPlan",
    "StopRule",
    "SymbolBlock",
    "SystemParams",
    "TDistInput",
    "WaveformGrid",
    "capacity_awgn",
    "capacity_gn",
    "capacity_lower_bound",
    "dbm_to_watts",
    "derive_seed",
    "detect_ml_genie",
    "detect_nearest",
    "memory_energy_pmf",
    "memory_estimate",
    "modulate",
    "monotone_envelope",
    "nli_coefficient_distributed",
    "nli_coefficient_lumped",
    "noise_variance_profile",
    "nonstationary_qpsk_experiment",
    "optimize_lower_bound",
    "propagate",
    "pulse_broadening_experiment",
    "pulse_shape",
    "q_function",
    "qam16_bit_error_rate",
    "qam16_error_rates_limit",
    "qam16_symbol_error_rate",
    "received_energy_log_density",
    "run_ber_ser",
    "sample_radius",
    "transmit",
    "watts_to_dbm",
    "window_noise_variance",
]

__version__ = "0.1.0"
