"""Channel-capacity quantities for the modeled channels.

Closed forms cover the AWGN and GN channels.  For the finite-memory channel a
computable lower bound comes from a block-structured input: in every block of
2N+1 symbols, 2N carry a constant amplitude r1 and the middle one a random
amplitude R with a heavy-tailed radial law; all phases are uniform.  With the
variable-amplitude draws aligned to the block raster, every memory window
contains exactly one of them, so each received block is independent, its
conditional law is Gaussian with a variance set by R alone, and the vector of
received energies U_k = |Y_k|^2 has a density expressible as a 1-D mixture
integral over R.  The achievable rate is then

    h(U) / (2N+1)  -  E_R[ log2( e * rho(2N r1^2 + R^2) ) ]

with h(U) estimated by plain Monte Carlo over exact samples of U and both the
mixture integral and the penalty expectation evaluated by Gauss-Legendre
quadrature after the substitution v = F(r) onto [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from functools import lru_cache
from scipy.special import i0e, roots_legendre

from .channel import NoiseParams, window_noise_variance
from .montecarlo import estimate_entropy_term

LN2 = math.log(2.0)

# Optimization grid defaults for the heavy-tailed input family: tail-shape
# values approaching 2 from above, and the constant-to-scale energy ratio.
DEFAULT_NU_GRID = tuple(np.geomspace(2.05, 100.0, 12))
DEFAULT_RATIO_GRID = tuple(np.geomspace(1e-3, 1e3, 13))


class QuadratureError(RuntimeError):
    """Raised when node doubling moves the quadrature beyond tolerance."""


class InfeasibleInputError(ValueError):
    """Raised when an input process cannot meet the power constraint."""


def capacity_awgn(power: float, p_ase: float) -> float:
    """AWGN capacity log2(1 + P / p_ase) in bit/symbol."""
    if p_ase <= 0:
        raise ValueError("ASE power must be positive")
    if power < 0:
        raise ValueError("power must be nonnegative")
    return math.log2(1.0 + power / p_ase)


def capacity_gn(power: float, noise: NoiseParams) -> float:
    """GN-channel capacity log2(1 + P / (p_ase + eta P^3)) in bit/symbol.

    As a function of P this rises to an interior peak and then decays to zero.
    """
    if noise.p_ase <= 0:
        raise ValueError("ASE power must be positive")
    if power < 0:
        raise ValueError("power must be nonnegative")
    return math.log2(1.0 + power / (noise.p_ase + noise.eta * power**3))


def gn_capacity_peak(noise: NoiseParams) -> tuple[float, float]:
    """(P*, C(P*)) of the GN capacity curve; P* = (p_ase / (2 eta))^(1/3)."""
    if noise.eta <= 0:
        raise ValueError("the GN capacity has no interior peak when eta = 0")
    p_star = (noise.p_ase / (2.0 * noise.eta)) ** (1.0 / 3.0)
    return p_star, capacity_gn(p_star, noise)


@dataclass(frozen=True)
class TDistInput:
    """Block input with a bivariate-t radial law on the variable symbol.

    The variable amplitude R has density f_R(r) = 2 pi r f_X(r) with
    f_X(x) = (2 pi s)^-1 (1 + |x|^2/(nu s))^-(1+nu/2); its mean square is
    2 nu s / (nu - 2), defined only for nu > 2.  The squared amplitude has
    the closed-form quantile  u(p) = nu s ((1-p)^(-2/nu) - 1).
    """

    nu: float      # tail shape, > 2
    scale: float   # radial scale s [W]
    r1: float      # constant amplitude [sqrt(W)]
    memory: int    # one-sided memory N

    def __post_init__(self) -> None:
        if self.nu <= 2.0:
            raise ValueError("tail shape must exceed 2 for a finite mean square")
        if self.scale <= 0.0:
            raise ValueError("radial scale must be positive")
        if self.r1 < 0.0:
            raise ValueError("constant amplitude must be nonnegative")
        if self.memory < 0:
            raise ValueError("memory must be nonnegative")

    @property
    def mean_square_radius(self) -> float:
        """E[R^2] = 2 nu s / (nu - 2)."""
        return 2.0 * self.nu * self.scale / (self.nu - 2.0)

    @property
    def block_power(self) -> float:
        """(2N r1^2 + E[R^2]) / (2N+1), the average power of the block."""
        return (2.0 * self.memory * self.r1**2 + self.mean_square_radius) / (
            2.0 * self.memory + 1.0
        )

    def inv_cdf_r2(self, p: np.ndarray) -> np.ndarray:
        """Quantile of R^2 at probability p."""
        p = np.asarray(p, dtype=np.float64)
        return self.nu * self.scale * ((1.0 - p) ** (-2.0 / self.nu) - 1.0)

    @classmethod
    def for_power(
        cls, power: float, memory: int, nu: float, r1sq_over_s: float
    ) -> "TDistInput":
        """Solve the scale meeting the block power constraint.

        ``r1sq_over_s`` fixes r1^2 / s; it is ignored for memory 0, where the
        constraint reduces to E[R^2] = P and no constant symbols exist.
        """
        if power <= 0.0:
            raise InfeasibleInputError("block power must be positive")
        if nu <= 2.0:
            raise InfeasibleInputError("tail shape must exceed 2")
        if memory == 0:
            return cls(nu, power * (nu - 2.0) / (2.0 * nu), 0.0, 0)
        if r1sq_over_s < 0.0:
            raise InfeasibleInputError("r1^2/s must be nonnegative")
        denom = 2.0 * memory * r1sq_over_s + 2.0 * nu / (nu - 2.0)
        scale = (2.0 * memory + 1.0) * power / denom
        return cls(nu, scale, math.sqrt(r1sq_over_s * scale), memory)


@dataclass(frozen=True)
class DegenerateInput:
    """Point-mass radial law at r0; test surrogate for a known closed form."""

    r0: float
    r1: float
    memory: int

    def inv_cdf_r2(self, p: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(p, dtype=np.float64), self.r0**2)


def sample_radius(input: TDistInput, size: int, seed: int) -> np.ndarray:
    """Draw variable amplitudes R by inverse-CDF sampling; deterministic in seed."""
    rng = np.random.Generator(np.random.Philox(key=int(seed) % (1 << 64)))
    return np.sqrt(input.inv_cdf_r2(rng.random(size)))


@lru_cache(maxsize=32)
def _unit_gauss_legendre(n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n_nodes)
    return 0.5 * (x + 1.0), 0.5 * w


def _node_variances(input, noise: NoiseParams, nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    r2 = input.inv_cdf_r2(nodes)
    sig2 = window_noise_variance(
        2.0 * input.memory * input.r1**2 + r2, input.memory, noise
    )
    if np.any(sig2 <= 0.0):
        raise ValueError("a noiseless channel admits no received-energy density")
    return r2, sig2


def _log2_density(
    u: np.ndarray, input, noise: NoiseParams, n_nodes: int, node_block: int = 32
) -> np.ndarray:
    block = 2 * input.memory + 1
    nodes, weights = _unit_gauss_legendre(n_nodes)
    r2_nodes, sig2_nodes = _node_variances(input, noise, nodes)
    r_nodes = np.sqrt(r2_nodes)
    log_w = np.log(weights)

    n_samples = u.shape[0]
    total_u = u.sum(axis=1)
    sqrt_u0 = np.sqrt(u[:, 0])
    if input.memory:
        rest_sqrt = np.sqrt(u[:, 1:])
        rest_sqrt_sum = rest_sqrt.sum(axis=1)
        work = np.empty_like(rest_sqrt)
    else:
        rest_sqrt = rest_sqrt_sum = work = None

    offset = 2.0 * input.memory * input.r1**2
    running_max = np.full(n_samples, -np.inf)
    running_sum = np.zeros(n_samples)
    rows = np.empty((min(node_block, n_nodes), n_samples))
    for start in range(0, n_nodes, node_block):
        stop = min(start + node_block, n_nodes)
        chunk = rows[: stop - start]
        for jj, j in enumerate(range(start, stop)):
            s2 = sig2_nodes[j]
            a = chunk[jj]
            np.multiply(total_u, -1.0 / s2, out=a)
            a += log_w[j] - (offset + r2_nodes[j]) / s2 - block * np.log(s2)
            x0 = (2.0 * r_nodes[j] / s2) * sqrt_u0
            a += x0 + np.log(i0e(x0))
            if input.memory:
                c1 = 2.0 * input.r1 / s2
                np.multiply(rest_sqrt, c1, out=work)
                i0e(work, out=work)
                np.log(work, out=work)
                a += c1 * rest_sqrt_sum + work.sum(axis=1)
        # merge the chunk into the running log-sum-exp
        chunk_max = chunk.max(axis=0)
        new_max = np.maximum(running_max, chunk_max)
        safe = np.where(np.isfinite(new_max), new_max, 0.0)
        chunk_sum = np.exp(chunk - safe).sum(axis=0)
        with np.errstate(invalid="ignore"):
            shift_old = np.where(running_max == -np.inf, 0.0, np.exp(running_max - safe))
        running_sum = running_sum * shift_old + chunk_sum
        running_max = new_max
    with np.errstate(divide="ignore"):
        log_f = running_max + np.log(running_sum)
    return log_f / LN2


def received_energy_log_density(
    u: np.ndarray,
    input,
    noise: NoiseParams,
    n_nodes: int = 512,
    check_convergence: bool = False,
    rel_tol: float = 1e-6,
) -> np.ndarray | float:
    """log2 density of the received-energy vector U of one block.

    ``u`` holds 2N+1 nonnegative entries per row; column 0 is the
    variable-amplitude slot and the remaining columns the constant-amplitude
    ones (their order is immaterial).  The radial mixture integral is
    evaluated with ``n_nodes`` Gauss-Legendre nodes after the inverse-CDF
    substitution; Bessel and exponential factors combine in the log domain
    via the exponentially scaled I0.

    With ``check_convergence`` the node count is doubled and a relative
    change beyond ``rel_tol`` raises ``QuadratureError``; the doubled-node
    values are returned.
    """
    if n_nodes < 16:
        raise ValueError("at least 16 quadrature nodes are required")
    arr = np.asarray(u, dtype=np.float64)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] != 2 * input.memory + 1:
        raise ValueError(
            f"expected blocks of 2N+1 = {2 * input.memory + 1} energies, got {arr.shape[1]}"
        )
    if np.any(arr < 0):
        raise ValueError("received energies must be nonnegative")
    values = _log2_density(arr, input, noise, n_nodes)
    if check_convergence:
        refined = _log2_density(arr, input, noise, 2 * n_nodes)
        rel = np.max(np.abs(values - refined) / np.maximum(np.abs(refined), 1.0))
        if not np.isfinite(rel) or rel > rel_tol:
            raise QuadratureError(
                f"doubling quadrature nodes moved log-density by {rel:.3g} relative "
                f"(tolerance {rel_tol:g}); increase n_nodes"
            )
        values = refined
    return float(values[0]) if single else values


def noise_entropy_penalty(input, noise: NoiseParams, n_nodes: int = 4096) -> float:
    """E_R[log2(e * rho(2N r1^2 + R^2))], the per-symbol noise-entropy term.

    Reduces to log2(e * p_ase) exactly when eta = 0.
    """
    nodes, weights = _unit_gauss_legendre(n_nodes)
    _, sig2 = _node_variances(input, noise, nodes)
    return float(weights @ (math.log2(math.e) + np.log2(sig2)))


@dataclass(frozen=True)
class BoundEstimate:
    """A Monte Carlo capacity-bound value with its sampling uncertainty.

    ``value`` may legitimately come out negative (a vacuous but valid lower
    bound); it is reported unclipped.
    """

    value: float             # [bit/symbol]
    std_error: float         # [bit/symbol]
    samples: int
    quadrature_nodes: int
    entropy_term: float = 0.0   # h(U) estimate [bit/block]
    penalty_term: float = 0.0   # E_R[log2(e rho)] [bit/symbol]

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ValueError("bound value must be finite")
        if self.std_error < 0:
            raise ValueError("standard error must be nonnegative")


def _block_sampler(input, noise: NoiseParams):
    block = 2 * input.memory + 1

    def sampler(rng: np.random.Generator, n: int) -> np.ndarray:
        r2 = input.inv_cdf_r2(rng.random(n))
        sig2 = window_noise_variance(
            2.0 * input.memory * input.r1**2 + r2, input.memory, noise
        )
        amps = np.empty((n, block))
        amps[:, 0] = np.sqrt(r2)
        amps[:, 1:] = input.r1
        z = rng.standard_normal((n, block, 2)) * np.sqrt(sig2 / 2.0)[:, None, None]
        return (amps + z[..., 0]) ** 2 + z[..., 1] ** 2

    return sampler


def capacity_lower_bound(
    power: float,
    memory: int,
    noise: NoiseParams,
    input: TDistInput,
    mc_samples: int,
    seed: int,
    n_nodes: int = 512,
    check_convergence: bool = False,
) -> BoundEstimate:
    """Achievable rate of the block input on the finite-memory channel.

    The input must satisfy the block power constraint for ``power``.  The
    entropy term is a plain Monte Carlo average of -log2 f_U over exactly
    sampled blocks; the standard error reflects that average only (the
    penalty term is deterministic quadrature).
    """
    if input.memory != memory:
        raise InfeasibleInputError(
            f"input is built for memory {input.memory}, channel has {memory}"
        )
    if abs(input.block_power - power) > 1e-6 * max(power, 1e-300):
        raise InfeasibleInputError(
            f"input block power {input.block_power:.6g} W does not meet the "
            f"constraint {power:.6g} W"
        )
    block = 2 * memory + 1

    def log2_density(u: np.ndarray) -> np.ndarray:
        return received_energy_log_density(
            u, input, noise, n_nodes=n_nodes, check_convergence=check_convergence
        )

    entropy_mean, entropy_se = estimate_entropy_term(
        _block_sampler(input, noise), log2_density, mc_samples, seed
    )
    penalty = noise_entropy_penalty(input, noise)
    return BoundEstimate(
        value=entropy_mean / block - penalty,
        std_error=entropy_se / block,
        samples=mc_samples,
        quadrature_nodes=n_nodes,
        entropy_term=entropy_mean,
        penalty_term=penalty,
    )


@dataclass(frozen=True)
class OptimizeResult:
    best_input: TDistInput
    best_estimate: BoundEstimate
    evaluated: int
    skipped: int


def optimize_lower_bound(
    power: float,
    memory: int,
    noise: NoiseParams,
    nu_grid: Sequence[float] = DEFAULT_NU_GRID,
    ratio_grid: Sequence[float] = DEFAULT_RATIO_GRID,
    mc_samples: int = 100_000,
    seed: int = 0,
    n_nodes: int = 512,
    screen_samples: Optional[int] = None,
    screen_nodes: Optional[int] = None,
    refine_top: int = 6,
) -> OptimizeResult:
    """Grid search of the bound over tail shape and r1^2/s.

    All candidates share the master seed (common random numbers), so ranking
    differences are paired.  Large grids are screened with a reduced sample
    and node budget first; the ``refine_top`` best candidates are re-evaluated
    at the full budget and the winner of that refinement is returned.
    Infeasible grid points are skipped and counted.
    """
    if not len(nu_grid):
        raise ValueError("tail-shape grid must be nonempty")
    if memory > 0 and not len(ratio_grid):
        raise ValueError("ratio grid must be nonempty for positive memory")
    ratios = [0.0] if memory == 0 else list(ratio_grid)
    candidates: list[TDistInput] = []
    skipped = 0
    for nu in nu_grid:
        for ratio in ratios:
            try:
                candidates.append(TDistInput.for_power(power, memory, nu, ratio))
            except (InfeasibleInputError, ValueError):
                skipped += 1
    if not candidates:
        raise InfeasibleInputError("every grid point violates the power constraint")

    if screen_samples is None:
        screen_samples = max(min(mc_samples, 2000), mc_samples // 20)
    if screen_nodes is None:
        screen_nodes = max(64, n_nodes // 4)

    if len(candidates) > refine_top:
        screened = [
            capacity_lower_bound(
                power, memory, noise, cand, screen_samples, seed, n_nodes=screen_nodes
            ).value
            for cand in candidates
        ]
        order = np.argsort(screened)[::-1][:refine_top]
        finalists = [candidates[i] for i in order]
        evaluated = len(candidates) + len(finalists)
    else:
        finalists = candidates
        evaluated = len(candidates)

    estimates = [
        capacity_lower_bound(power, memory, noise, cand, mc_samples, seed, n_nodes=n_nodes)
        for cand in finalists
    ]
    best = int(np.argmax([est.value for est in estimates]))
    return OptimizeResult(finalists[best], estimates[best], evaluated, skipped)


def monotone_envelope(powers: Sequence[float], values: Sequence[float]) -> np.ndarray:
    """Running maximum of a bound curve over increasing power.

    Capacity never decreases with power on a finite-memory channel, so any
    bound value propagates rightward; this lifts post-peak dips up to the
    preceding peak level.
    """
    p = np.asarray(powers, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if p.shape != v.shape or p.ndim != 1:
        raise ValueError("powers and values must be matching 1-D sequences")
    if p.size and np.any(np.diff(p) <= 0):
        raise ValueError("powers must be strictly increasing")
    return np.maximum.accumulate(v)
