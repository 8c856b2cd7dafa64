"""Constellations, Gray bit labeling, and symbol-by-symbol detectors.

The square 16-QAM constellation lives on the grid {±d, ±3d}^2 and is indexed
row-major: index 4*r + c addresses real level r and imaginary level c, levels
ascending (-3d, -d, +d, +3d).  Labels are the Cartesian product of the binary
reflected Gray code for 4-PAM: first two bits select the in-phase level, last
two the quadrature level.  Average power is 10 d^2 and the minimum Euclidean
distance is 2d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import NoiseParams, window_noise_variance

PAM_GRAY = (0b00, 0b01, 0b11, 0b10)  # BRGC order for ascending 4-PAM levels
POPCOUNT = np.array([bin(v).count("1") for v in range(256)], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class Constellation:
    name: str
    points: np.ndarray   # complex symbols [sqrt(W)]
    labels: np.ndarray   # m-bit integer label per point, a permutation of 0..M-1
    scale: Optional[float] = None  # grid half-spacing d for square 16-QAM

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", np.asarray(self.points, dtype=np.complex128))
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int64))
        m = self.points.size
        if m < 2 or m & (m - 1):
            raise ValueError("constellation size must be a power of two")
        if sorted(self.labels.tolist()) != list(range(m)):
            raise ValueError("labels must be a permutation of 0..M-1")

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def bits_per_symbol(self) -> int:
        return self.size.bit_length() - 1

    @property
    def average_power(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))

    @property
    def index_of_label(self) -> np.ndarray:
        inv = np.empty(self.size, dtype=np.int64)
        inv[self.labels] = np.arange(self.size)
        return inv

    @classmethod
    def qam16(
        cls, scale: Optional[float] = None, average_power: Optional[float] = None
    ) -> "Constellation":
        """Gray-labeled square 16-QAM, sized by grid scale d or by power 10 d^2."""
        if (scale is None) == (average_power is None):
            raise ValueError("specify exactly one of scale or average_power")
        if scale is None:
            scale = math.sqrt(average_power / 10.0)
        levels = scale * np.array([-3.0, -1.0, 1.0, 3.0])
        points = (levels[:, None] + 1j * levels[None, :]).ravel()
        labels = np.array(
            [(PAM_GRAY[r] << 2) | PAM_GRAY[c] for r in range(4) for c in range(4)]
        )
        return cls("qam16", points, labels, scale=scale)

    @classmethod
    def qpsk(cls, average_power: float = 1.0) -> "Constellation":
        """Gray-labeled QPSK; constant modulus sqrt(average_power)."""
        amp = math.sqrt(average_power / 2.0)
        points = amp * np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j])
        labels = np.array([0b00, 0b01, 0b11, 0b10])
        return cls("qpsk", points, labels)


def modulate(bits: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Map a bit sequence to symbols, m bits per symbol, MSB first."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    m = constellation.bits_per_symbol
    if bits.size % m:
        raise ValueError(f"bit count {bits.size} is not divisible by {m}")
    weights = 1 << np.arange(m - 1, -1, -1)
    label_values = bits.reshape(-1, m) @ weights
    return constellation.points[constellation.index_of_label[label_values]]


def bits_for_indices(indices: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Bit sequence labeling the given symbol indices, MSB first."""
    m = constellation.bits_per_symbol
    shifts = np.arange(m - 1, -1, -1)
    labels = constellation.labels[np.asarray(indices)]
    return ((labels[:, None] >> shifts) & 1).ravel()


def detect_nearest_bruteforce(y: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Minimum-Euclidean-distance detection by exhaustive search.

    Ties resolve to the lowest index (first occurrence).
    """
    y = np.atleast_1d(np.asarray(y, dtype=np.complex128))
    d2 = np.abs(y[:, None] - constellation.points[None, :]) ** 2
    return np.argmin(d2, axis=1)


def detect_nearest(y: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Minimum-Euclidean-distance detection (Voronoi slicing).

    For square 16-QAM this slices each axis at 0 and +-2d; other
    constellations fall back to exhaustive search.  Ties break toward the
    lowest index.
    """
    y = np.atleast_1d(np.asarray(y, dtype=np.complex128))
    if constellation.name == "qam16" and constellation.scale is not None:
        thresholds = constellation.scale * np.array([-2.0, 0.0, 2.0])
        rows = np.searchsorted(thresholds, y.real, side="left")
        cols = np.searchsorted(thresholds, y.imag, side="left")
        return 4 * rows + cols
    return detect_nearest_bruteforce(y, constellation)


def detect_ml_genie(
    y: np.ndarray,
    neighbor_energy: np.ndarray,
    constellation: Constellation,
    memory: int,
    noise: NoiseParams,
    chunk: int = 1 << 18,
) -> np.ndarray:
    """Symbol-by-symbol ML detection given the true neighbor energy.

    Minimizes log sigma2_i + |y - s_i|^2 / sigma2_i over candidate symbols,
    where sigma2_i = p_ase + eta * ((|s_i|^2 + neighbor_energy) / (2N+1))^3.
    The neighbor energy ||x_mem||^2 is genie side information.
    """
    y = np.atleast_1d(np.asarray(y, dtype=np.complex128))
    ne = np.broadcast_to(np.asarray(neighbor_energy, dtype=np.float64), y.shape)
    if np.any(ne < 0):
        raise ValueError("neighbor energy must be nonnegative")
    points = constellation.points
    point_energy = np.abs(points) ** 2
    out = np.empty(y.size, dtype=np.int64)
    for start in range(0, y.size, chunk):
        sl = slice(start, min(start + chunk, y.size))
        sig2 = window_noise_variance(ne[sl, None] + point_energy[None, :], memory, noise)
        metric = np.log(sig2) + np.abs(y[sl, None] - points[None, :]) ** 2 / sig2
        out[sl] = np.argmin(metric, axis=1)
    return out


@dataclass(frozen=True)
class DetectorKind:
    """Detector selection for simulation plans.

    ``genie_ml`` uses the channel's memory and noise parameters unless
    overridden here.
    """

    kind: str  # "med" | "genie_ml"
    memory: Optional[int] = None
    noise: Optional[NoiseParams] = None

    def __post_init__(self) -> None:
        if self.kind not in ("med", "genie_ml"):
            raise ValueError(f"unknown detector kind {self.kind!r}")

    @classmethod
    def med(cls) -> "DetectorKind":
        return cls("med")

    @classmethod
    def genie_ml(
        cls, memory: Optional[int] = None, noise: Optional[NoiseParams] = None
    ) -> "DetectorKind":
        return cls("genie_ml", memory=memory, noise=noise)
