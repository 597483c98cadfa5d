"""Monte Carlo pairs of correlated Rice envelopes and their estimators.

Each branch is ``z = nu + w`` with ``nu`` the real LOS amplitude and ``w``
circular complex Gaussian scatter. The second branch's scatter is
``rho_c * w1 + sqrt(1 - rho_c**2) * u`` with ``u`` independent of ``w1``,
so real and imaginary parts carry the same correlation ``rho_c``.

Streams come from a Philox generator keyed by ``(seed, stream)``; the four
normal arrays are always drawn in the same order, so a sweep over ``rho_c``
at a fixed seed uses common random numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .degenerate import LinearCoefficient, solve_k
from .distributions import CorrelationState, RiceParams
from .errors import DegeneracyError, DomainError
from .moments import ComplexMoments, MomentSummary, summarize, summarize_complex

__all__ = [
    "ComplexMoments",
    "MomentSummary",
    "SampleBatch",
    "complex_pairs",
    "sample_pairs",
    "pearson_corr",
    "complex_corr",
    "endpoint_implication_check",
    "selection_outage",
    "outage_sweep",
]


def _sampler_corr(corr) -> CorrelationState:
    if isinstance(corr, CorrelationState):
        return CorrelationState(corr.rho_c, allow_unity=True)
    return CorrelationState(float(corr), allow_unity=True)


def generator(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


def complex_pairs(params: RiceParams, corr, n: int, seed: int, stream: int = 0):
    """Complex baseband pair ``(z1, z2)`` of length ``n``."""
    corr = _sampler_corr(corr)
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    rho = corr.rho_c
    draws = generator(seed, stream).standard_normal((4, int(n)))
    sigma = math.sqrt(params.beta / (1.0 + params.k_factor))
    w1 = sigma * (draws[0] + 1j * draws[1])
    if rho == 1.0:
        w2 = w1.copy()
    else:
        u = sigma * (draws[2] + 1j * draws[3])
        w2 = rho * w1 + math.sqrt((1.0 - rho) * (1.0 + rho)) * u
    nu = params.los_amplitude
    return nu + w1, nu + w2


@dataclass(frozen=True)
class SampleBatch:
    x: np.ndarray
    y: np.ndarray
    params: RiceParams
    corr: CorrelationState
    seed: int
    stream: int = 0

    @property
    def n(self) -> int:
        return int(self.x.size)

    @property
    def pairs(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def moments(self) -> MomentSummary:
        return summarize(self.x, self.y)


def sample_pairs(params: RiceParams, corr, n: int, seed: int, stream: int = 0) -> SampleBatch:
    """Envelope pairs ``(|z1|, |z2|)``; bit-reproducible from ``(params, corr, n, seed, stream)``.

    ``rho_c = 1`` is allowed and yields ``x == y`` exactly.
    """
    corr = _sampler_corr(corr)
    z1, z2 = complex_pairs(params, corr, n, seed, stream)
    return SampleBatch(np.abs(z1), np.abs(z2), params, corr, int(seed), int(stream))


def pearson_corr(data) -> float:
    """Pearson correlation of a batch, an ``(x, y)`` pair of arrays, or a moment summary.

    Sample input is centred before multiplying and normalised by
    ``sqrt(var_x * var_y)``, so identical samples give exactly 1. The
    result is clamped to ``[-1, 1]``.
    """
    if isinstance(data, MomentSummary):
        return data.pearson()
    if isinstance(data, SampleBatch):
        x, y = data.x, data.y
    else:
        x, y = data
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise DomainError("pearson_corr needs two equal-length samples with n >= 2")
    dx, dy = x - np.mean(x), y - np.mean(y)
    var_x, var_y = float(np.mean(dx * dx)), float(np.mean(dy * dy))
    if var_x <= 0 or var_y <= 0:
        raise DomainError("correlation undefined: a sample has zero variance")
    rho = float(np.mean(dx * dy)) / math.sqrt(var_x * var_y)
    return float(np.clip(rho, -1.0, 1.0))


@dataclass(frozen=True)
class ComplexCorrelation:
    rho: float
    imag_residual: float
    moments: ComplexMoments


def complex_corr(zx, zy) -> ComplexCorrelation:
    """Empirical complex correlation; real part clamped, imaginary part reported."""
    m = summarize_complex(zx, zy)
    dx = np.asarray(zx) - m.mu_c_x
    dy = np.asarray(zy) - m.mu_c_y
    var_x = float(np.mean(dx.real * dx.real + dx.imag * dx.imag))
    var_y = float(np.mean(dy.real * dy.real + dy.imag * dy.imag))
    scale = math.sqrt(var_x * var_y)
    rho = float(np.clip(m.cross.real / scale, -1.0, 1.0))
    return ComplexCorrelation(rho, abs(m.cross.imag) / scale, m)


@dataclass(frozen=True)
class EndpointReport:
    n: int
    seed: int
    rho_at_unity: float
    k_at_unity: LinearCoefficient
    rho_near_unity: float
    rho_c_near_unity: float
    rho_at_zero: float

    @property
    def unity_exact(self) -> bool:
        return self.rho_at_unity == 1.0 and self.k_at_unity.value == 1

    @property
    def one_directional(self) -> bool:
        return self.rho_near_unity < 1.0 - 1e-4

    @property
    def passed(self) -> bool:
        return self.unity_exact and self.one_directional and abs(self.rho_at_zero) < 4.0 / math.sqrt(self.n)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "seed": self.seed,
            "rho_at_unity": self.rho_at_unity,
            "k_at_unity": str(self.k_at_unity),
            "rho_c_near_unity": self.rho_c_near_unity,
            "rho_near_unity": self.rho_near_unity,
            "rho_at_zero": self.rho_at_zero,
            "passed": self.passed,
        }


def endpoint_implication_check(
    params: RiceParams, n: int, seed: int, rho_c_near_unity: float = 0.99
) -> EndpointReport:
    """Envelope correlation at ``rho_c`` = 1, near 1, and 0.

    At ``rho_c = 1`` the envelopes coincide, so ``rho = 1`` and ``k = +1``.
    Just below unity the envelope correlation stays measurably below 1.
    """
    unity = sample_pairs(params, 1.0, n, seed)
    rho_unity = pearson_corr(unity)
    try:
        k = solve_k(unity.moments())
    except DegeneracyError:
        k = LinearCoefficient(None)
    near = pearson_corr(sample_pairs(params, rho_c_near_unity, n, seed))
    zero = pearson_corr(sample_pairs(params, 0.0, n, seed))
    return EndpointReport(int(n), int(seed), rho_unity, k, near, rho_c_near_unity, zero)


def selection_outage(params: RiceParams, corr, threshold: float, n: int, seed: int) -> float:
    """Monte Carlo ``P(max(X, Y) < threshold)`` for two-branch selection combining."""
    if not threshold > 0:
        raise DomainError(f"threshold must be positive, got {threshold!r}")
    batch = sample_pairs(params, corr, n, seed)
    return float(np.mean(np.maximum(batch.x, batch.y) < threshold))


def outage_sweep(params: RiceParams, rhos, threshold: float, n: int, seed: int) -> list[float]:
    """Selection outage over ``rhos`` with common random numbers."""
    return [selection_outage(params, r, threshold, n, seed) for r in rhos]
