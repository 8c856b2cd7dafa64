"""Discrete-time stochastic channel models.

Three variants share the additive form Y_k = x_k + Z_k with circularly
symmetric complex Gaussian noise Z_k ~ CN(0, sigma2_k):

* ``awgn``           -- sigma2_k = p_ase, independent of the input;
* ``gn``             -- sigma2_k = p_ase + eta * P^3 with P the *statistical*
                        transmit power of the symbol ensemble;
* ``finite_memory``  -- sigma2_k = p_ase + eta * (empirical power of the
                        2N+1 symbols centered on k)^3.

Noise generation is keyed by a counter-based (Philox) generator so the output
is a pure function of (block, model, seed), independent of scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BOUNDARY_POLICIES = ("wrap", "zero_pad", "reflect")


@dataclass(frozen=True)
class NoiseParams:
    """Additive-noise constants: total ASE power and the NLI coefficient."""

    p_ase: float  # [W]
    eta: float    # [1/W^2]

    def __post_init__(self) -> None:
        if self.p_ase < 0:
            raise ValueError("ASE power must be nonnegative")
        if self.eta < 0:
            raise ValueError("NLI coefficient must be nonnegative")


@dataclass(frozen=True)
class ChannelModel:
    kind: str                       # "awgn" | "gn" | "finite_memory"
    noise: NoiseParams
    statistical_power: float = 0.0  # [W], gn variant only
    memory: int = 0                 # one-sided memory N, finite_memory variant only

    def __post_init__(self) -> None:
        if self.kind not in ("awgn", "gn", "finite_memory"):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.statistical_power < 0:
            raise ValueError("statistical power must be nonnegative")
        if self.memory < 0:
            raise ValueError("channel memory must be nonnegative")

    @classmethod
    def awgn(cls, p_ase: float) -> "ChannelModel":
        return cls("awgn", NoiseParams(p_ase, 0.0))

    @classmethod
    def gn(cls, noise: NoiseParams, statistical_power: float) -> "ChannelModel":
        return cls("gn", noise, statistical_power=statistical_power)

    @classmethod
    def finite_memory(cls, noise: NoiseParams, memory: int) -> "ChannelModel":
        return cls("finite_memory", noise, memory=memory)


@dataclass
class SymbolBlock:
    """A finite run of complex symbols (sqrt(W) units) plus an edge policy.

    The boundary policy defines the 2N-neighborhood of the first and last N
    symbols: ``wrap`` closes the sequence into a ring, ``zero_pad`` surrounds
    it with silence, ``reflect`` mirrors it (edge sample excluded).
    """

    symbols: np.ndarray
    boundary: str = "wrap"

    def __post_init__(self) -> None:
        self.symbols = np.asarray(self.symbols, dtype=np.complex128)
        if self.symbols.ndim != 1:
            raise ValueError("symbol block must be one-dimensional")
        if self.boundary not in BOUNDARY_POLICIES:
            raise ValueError(
                f"unknown boundary policy {self.boundary!r}; expected one of {BOUNDARY_POLICIES}"
            )

    def __len__(self) -> int:
        return self.symbols.size


def window_noise_variance(window_energy, memory: int, noise: NoiseParams):
    """Noise variance p_ase + eta * (a / (2N+1))^3 for total window energy a.

    ``window_energy`` is the summed |x_i|^2 over the 2N+1 symbols of a memory
    window [W * (2N+1)]; scalar or array.
    """
    a = np.asarray(window_energy, dtype=np.float64)
    if np.any(a < 0):
        raise ValueError("window energy must be nonnegative")
    out = noise.p_ase + noise.eta * (a / (2 * memory + 1)) ** 3
    return float(out) if np.isscalar(window_energy) or out.ndim == 0 else out


def window_energy_sums(power: np.ndarray, memory: int, boundary: str) -> np.ndarray:
    """Sliding sums of ``power`` over windows of width 2N+1 under an edge policy."""
    power = np.asarray(power, dtype=np.float64)
    n = power.size
    npad = memory
    if npad == 0:
        return power.copy()
    if n < 2 * memory + 1:
        raise ValueError(
            f"block of {n} symbols is shorter than the 2N+1 = {2 * memory + 1} window"
        )
    if boundary == "wrap":
        padded = np.concatenate([power[-npad:], power, power[:npad]])
    elif boundary == "zero_pad":
        padded = np.concatenate([np.zeros(npad), power, np.zeros(npad)])
    elif boundary == "reflect":
        padded = np.pad(power, npad, mode="reflect")
    else:
        raise ValueError(f"unknown boundary policy {boundary!r}")
    csum = np.concatenate([[0.0], np.cumsum(padded)])
    return csum[2 * memory + 1 :] - csum[:n]


def noise_variance_profile(block: SymbolBlock, model: ChannelModel) -> np.ndarray:
    """Per-symbol noise variance sigma2_k [W], computed without sampling noise."""
    n = len(block)
    if n == 0:
        raise ValueError("symbol block must be nonempty")
    noise = model.noise
    if model.kind == "awgn":
        return np.full(n, noise.p_ase)
    if model.kind == "gn":
        return np.full(n, noise.p_ase + noise.eta * model.statistical_power**3)
    window = window_energy_sums(np.abs(block.symbols) ** 2, model.memory, block.boundary)
    return window_noise_variance(window, model.memory, noise)


def gaussian_pairs(seed: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """2n standard normals from a Philox stream keyed by ``seed``."""
    rng = np.random.Generator(np.random.Philox(key=int(seed) % (1 << 64)))
    z = rng.standard_normal(2 * n)
    return z[:n], z[n:]


def transmit(block: SymbolBlock, model: ChannelModel, seed: int) -> SymbolBlock:
    """Pass a symbol block through the channel; deterministic given ``seed``."""
    variances = noise_variance_profile(block, model)
    re, im = gaussian_pairs(seed, len(block))
    scale = np.sqrt(variances / 2.0)
    received = block.symbols + scale * (re + 1j * im)
    return SymbolBlock(received, block.boundary)
