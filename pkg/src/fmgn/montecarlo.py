"""Monte Carlo engine: empirical error rates and deterministic-parallel RNG.

Every random stream is keyed by ``derive_seed(master, label, index)``, a pure
hash, so trials are independent work units and results are bit-identical for
a given plan regardless of scheduling.  Aggregation of per-trial counts is
associative and commutative.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .channel import ChannelModel, SymbolBlock, transmit, window_energy_sums
from .modem import (
    Constellation,
    DetectorKind,
    POPCOUNT,
    detect_ml_genie,
    detect_nearest,
)


def derive_seed(master_seed: int, stream_label: str, index: int) -> int:
    """64-bit stream seed derived by hashing (master, label, index)."""
    payload = struct.pack("<Q", master_seed % (1 << 64)) + stream_label.encode() + struct.pack(
        "<q", index
    )
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "little")


def stream_rng(master_seed: int, stream_label: str, index: int) -> np.random.Generator:
    """Counter-based generator for the derived stream."""
    return np.random.Generator(np.random.Philox(key=derive_seed(master_seed, stream_label, index)))


@dataclass(frozen=True)
class StopRule:
    kind: str = "fixed_count"   # "fixed_count" | "min_errors"
    min_errors: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("fixed_count", "min_errors"):
            raise ValueError(f"unknown stop rule {self.kind!r}")
        if self.kind == "min_errors" and self.min_errors < 1:
            raise ValueError("min_errors stop rule needs a positive error target")


@dataclass
class ErrorCounts:
    bit_errors: int = 0
    symbol_errors: int = 0
    bits: int = 0
    symbols: int = 0
    budget_exhausted: bool = False  # min_errors target missed within the trial budget

    def __add__(self, other: "ErrorCounts") -> "ErrorCounts":
        return ErrorCounts(
            self.bit_errors + other.bit_errors,
            self.symbol_errors + other.symbol_errors,
            self.bits + other.bits,
            self.symbols + other.symbols,
            self.budget_exhausted or other.budget_exhausted,
        )

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else 0.0

    @property
    def ser(self) -> float:
        return self.symbol_errors / self.symbols if self.symbols else 0.0

    @property
    def ber_sigma(self) -> float:
        """Binomial standard error of the BER estimate."""
        return float(np.sqrt(self.ber * (1.0 - self.ber) / self.bits)) if self.bits else 0.0

    @property
    def ser_sigma(self) -> float:
        return float(np.sqrt(self.ser * (1.0 - self.ser) / self.symbols)) if self.symbols else 0.0


@dataclass(frozen=True)
class SimPlan:
    """One reproducible error-rate measurement."""

    constellation: Constellation
    channel: ChannelModel
    detector: DetectorKind
    symbols_per_trial: int
    trials: int
    master_seed: int
    stop_rule: StopRule = StopRule()
    boundary: str = "wrap"
    discard_edges: bool = False

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("need at least one trial")
        window = 2 * self.channel.memory + 1
        if self.symbols_per_trial < window:
            raise ValueError(
                f"symbols_per_trial must be at least 2N+1 = {window}"
            )


def _detect(
    plan: SimPlan, detector: DetectorKind, x: np.ndarray, y: np.ndarray
) -> np.ndarray:
    if detector.kind == "med":
        return detect_nearest(y, plan.constellation)
    memory = detector.memory if detector.memory is not None else plan.channel.memory
    noise = detector.noise if detector.noise is not None else plan.channel.noise
    power = np.abs(x) ** 2
    neighbor = window_energy_sums(power, memory, plan.boundary) - power
    return detect_ml_genie(y, neighbor, plan.constellation, memory, noise)


def _run_trial(plan: SimPlan, trial: int, detectors: Sequence[DetectorKind]) -> list[ErrorCounts]:
    const = plan.constellation
    rng = stream_rng(plan.master_seed, "symbols", trial)
    sent = rng.integers(0, const.size, size=plan.symbols_per_trial)
    x = const.points[sent]
    block = SymbolBlock(x, plan.boundary)
    y = transmit(block, plan.channel, derive_seed(plan.master_seed, "noise", trial)).symbols

    keep = slice(None)
    if plan.discard_edges and plan.channel.memory:
        keep = slice(plan.channel.memory, plan.symbols_per_trial - plan.channel.memory)

    out = []
    for det in detectors:
        decided = _detect(plan, det, x, y)
        sent_k = sent[keep]
        decided_k = decided[keep]
        symbol_errors = int(np.count_nonzero(decided_k != sent_k))
        label_diff = const.labels[sent_k] ^ const.labels[decided_k]
        bit_errors = int(POPCOUNT[label_diff].sum())
        n = sent_k.size
        out.append(ErrorCounts(bit_errors, symbol_errors, n * const.bits_per_symbol, n))
    return out


def run_ber_ser(plan: SimPlan) -> ErrorCounts:
    """Empirical BER/SER under the plan's channel and detector.

    Symbols are i.i.d. uniform.  Under the ``min_errors`` stop rule, trials
    run in index order until the symbol-error target is met; if the budget
    runs out first the result is flagged ``budget_exhausted``.
    """
    total = ErrorCounts()
    for trial in range(plan.trials):
        total = total + _run_trial(plan, trial, [plan.detector])[0]
        if plan.stop_rule.kind == "min_errors" and total.symbol_errors >= plan.stop_rule.min_errors:
            return total
    if plan.stop_rule.kind == "min_errors" and total.symbol_errors < plan.stop_rule.min_errors:
        total.budget_exhausted = True
    return total


def run_detector_comparison(
    plan: SimPlan, detectors: Sequence[DetectorKind]
) -> list[ErrorCounts]:
    """Paired comparison of several detectors on common noise realizations."""
    totals = [ErrorCounts() for _ in detectors]
    for trial in range(plan.trials):
        for i, counts in enumerate(_run_trial(plan, trial, detectors)):
            totals[i] = totals[i] + counts
    return totals


def estimate_entropy_term(
    sampler: Callable[[np.random.Generator, int], np.ndarray],
    log2_density: Callable[[np.ndarray], np.ndarray],
    samples: int,
    seed: int,
    batch_size: int = 20_000,
) -> tuple[float, float]:
    """Monte Carlo estimate of E[-log2 f(U)] with its standard error.

    ``sampler(rng, n)`` draws n realizations of U (rows); ``log2_density``
    evaluates log2 f on them.  The density must be finite on the sampled
    support.
    """
    if samples < 2:
        raise ValueError("need at least two samples for a standard error")
    rng = np.random.Generator(np.random.Philox(key=int(seed) % (1 << 64)))
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        n = min(batch_size, samples - done)
        values = -np.asarray(log2_density(sampler(rng, n)), dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise ValueError("density evaluated to zero or non-finite on a sampled point")
        total += float(values.sum())
        total_sq += float((values**2).sum())
        done += n
    mean = total / samples
    variance = max(total_sq / samples - mean**2, 0.0) * samples / (samples - 1)
    return mean, float(np.sqrt(variance / samples))
