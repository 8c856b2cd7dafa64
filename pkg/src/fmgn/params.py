"""Physical link parameters, unit conversions, and nonlinear-interference coefficients.

The reference configuration is a 10 x 70 km standard single-mode fiber link
operated single-channel at 32 GBaud with lumped (EDFA) amplification.  All
quantities are stored in their customary engineering units (dB/km, ps^2/km,
GBaud, ...) and converted on access; computations internally use a consistent
per-km / SI-frequency unit system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

LN10 = math.log(10.0)


def dbm_to_watts(p_dbm: float) -> float:
    """Convert average power from dBm to watts."""
    return 1e-3 * 10.0 ** (p_dbm / 10.0)


def watts_to_dbm(p_watts: float) -> float:
    """Convert average power from watts to dBm. Requires p_watts > 0."""
    if p_watts <= 0.0:
        raise ValueError(f"power must be positive to express in dBm, got {p_watts}")
    return 10.0 * math.log10(p_watts / 1e-3)


@dataclass(frozen=True)
class PowerDbm:
    """An average power on a dBm axis, convertible losslessly to watts."""

    value: float  # [dBm]

    @property
    def watts(self) -> float:
        return dbm_to_watts(self.value)

    @classmethod
    def from_watts(cls, p_watts: float) -> "PowerDbm":
        return cls(watts_to_dbm(p_watts))


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the fiber link.

    Fields carry the customary units; accessors provide converted values.
    ``epsilon`` is the span-decorrelation exponent of the lumped-amplification
    NLI coefficient and lies in [0, 1].
    """

    alpha_db_per_km: float = 0.2        # fiber attenuation [dB/km]
    beta2_ps2_per_km: float = -21.7     # group velocity dispersion [ps^2/km], signed
    gamma_per_w_km: float = 1.27        # nonlinear coefficient [1/(W km)]
    spans: int = 10                     # number of amplifier spans
    length_km: float = 700.0            # total system length [km]
    symbol_rate_gbaud: float = 32.0     # symbol rate [GBaud]
    p_ase_w: float = 4.1e-6             # total ASE noise power [W]
    eta_per_w2: float = 7244.0          # NLI coefficient [1/W^2]
    epsilon: float = 0.0                # span decorrelation exponent

    def __post_init__(self) -> None:
        if self.alpha_db_per_km < 0:
            raise ValueError("attenuation must be nonnegative")
        if self.gamma_per_w_km < 0:
            raise ValueError("nonlinear coefficient must be nonnegative")
        if self.spans < 1:
            raise ValueError("span count must be at least 1")
        if self.length_km < 0:
            raise ValueError("system length must be nonnegative")
        if self.symbol_rate_gbaud < 0:
            raise ValueError("symbol rate must be nonnegative")
        if self.p_ase_w < 0:
            raise ValueError("ASE power must be nonnegative")
        if self.eta_per_w2 < 0:
            raise ValueError("NLI coefficient must be nonnegative")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("span decorrelation exponent must lie in [0, 1]")

    @classmethod
    def reference(cls) -> "SystemParams":
        """The default 700 km, 10-span, 32 GBaud reference link."""
        return cls()

    @property
    def alpha_np_per_km(self) -> float:
        """Power attenuation in nepers/km (alpha_np = alpha_dB * ln(10)/10)."""
        return self.alpha_db_per_km * LN10 / 10.0

    @property
    def beta2_s2_per_km(self) -> float:
        return self.beta2_ps2_per_km * 1e-24

    @property
    def symbol_rate_hz(self) -> float:
        return self.symbol_rate_gbaud * 1e9

    @property
    def span_length_km(self) -> float:
        return self.length_km / self.spans

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)


def nli_coefficient_lumped(params: SystemParams, dual_polarization: bool = False) -> float:
    """NLI coefficient [1/W^2] for single-channel transmission over M lumped spans.

    eta = c * gamma^2 / alpha^2 * M^(1+eps) * tanh(alpha / (4 |beta2| Rs^2))

    with alpha in nepers per unit length, c = 2 for single polarization and
    c = 3 for dual polarization.  The reference link evaluates to ~7244 1/W^2
    in the single-polarization case.
    """
    alpha = params.alpha_np_per_km                  # [1/km]
    beta2 = abs(params.beta2_s2_per_km)             # [s^2/km]
    rs = params.symbol_rate_hz                      # [1/s]
    if alpha <= 0.0:
        raise ValueError("attenuation must be positive for the lumped NLI formula")
    if rs <= 0.0:
        raise ValueError("symbol rate must be positive for the lumped NLI formula")
    if beta2 <= 0.0:
        raise ValueError("dispersion must be nonzero for the lumped NLI formula")
    coef = 3.0 if dual_polarization else 2.0
    gamma = params.gamma_per_w_km                   # [1/(W km)]
    return (
        coef
        * gamma**2
        / alpha**2
        * params.spans ** (1.0 + params.epsilon)
        * math.tanh(alpha / (4.0 * beta2 * rs**2))
    )


def nli_coefficient_distributed(
    params: SystemParams, total_bandwidth_hz: float, variant: str = "splett"
) -> float:
    """NLI coefficient [1/W^2] for distributed amplification and WDM signaling.

    variant "splett":  eta = 4 gamma^2 L / (pi |beta2| B^2) * ln(2 pi e |beta2| L B^2)
    variant "bosco":   eta = 16 gamma^2 L / (27 pi |beta2| Rs^2) * ln(2/3 pi^2 |beta2| L B^2)

    Both logarithm arguments must exceed 1 (validity region of the underlying
    perturbation analysis); parameter sets violating this are rejected.
    """
    if total_bandwidth_hz <= 0.0:
        raise ValueError("total bandwidth must be positive")
    beta2 = abs(params.beta2_s2_per_km)             # [s^2/km]
    length = params.length_km                       # [km]
    gamma = params.gamma_per_w_km                   # [1/(W km)]
    rs = params.symbol_rate_hz
    b = total_bandwidth_hz
    dispersive_scale = beta2 * length * b**2        # dimensionless
    if variant == "splett":
        log_arg = 2.0 * math.pi * math.e * dispersive_scale
        if log_arg <= 1.0:
            raise ValueError(
                f"logarithm argument {log_arg:.4g} <= 1: outside formula validity region"
            )
        return 4.0 * gamma**2 * length / (math.pi * beta2 * b**2) * math.log(log_arg)
    if variant == "bosco":
        if rs <= 0.0:
            raise ValueError("symbol rate must be positive for the bosco variant")
        log_arg = 2.0 / 3.0 * math.pi**2 * dispersive_scale
        if log_arg <= 1.0:
            raise ValueError(
                f"logarithm argument {log_arg:.4g} <= 1: outside formula validity region"
            )
        return 16.0 * gamma**2 * length / (27.0 * math.pi * beta2 * rs**2) * math.log(log_arg)
    raise ValueError(f"unknown NLI variant {variant!r} (expected 'splett' or 'bosco')")


def memory_estimate(params: SystemParams) -> float:
    """Two-sided channel memory 2N ~ 2 pi |beta2| L Rs^2, in symbols.

    ~97 for the reference link.
    """
    beta2 = abs(params.beta2_s2_per_km)
    if beta2 == 0.0:
        raise ValueError("dispersion must be nonzero for the memory estimate")
    return 2.0 * math.pi * beta2 * params.length_km * params.symbol_rate_hz**2
