"""Delta-function machinery for perfectly correlated pairs.

Covers the joint density of an identically distributed pair at
``rho = +/-1`` (a marginal times ``delta(x -/+ y)``, or nothing at all),
the linear coefficient linking the two variables, the Gaussian nascent
delta, the composition rule ``delta(g(x)) = sum delta(x - x_n)/|g'(x_n)|``
and the finite-rho_c diagnostics that show the bivariate Rice density
collapsing onto the diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .distributions import (
    DEFAULT_TOL,
    TAIL,
    RiceParams,
    _PANEL_ORDER,
    _as_corr,
    bivariate_rice_log_pdf,
    bivariate_rice_log_pdf_array,
    conditional_scale,
    integrate_over_y,
    rice_log_pdf,
    rice_log_pdf_array,
    rice_pdf,
)
from .errors import DegeneracyError, DomainError
from .moments import MomentSummary
from .numerics import composite_rule, log_bessel_i0

# |rho| at or above 1 - RHO_TOL counts as perfect correlation.
RHO_TOL = 1e-9
# Relative tolerance for "identically distributed" (sigma and |mu|).
IDENTITY_TOL = 1e-6

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class NascentDelta:
    epsilon: float

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise DomainError(f"epsilon must be positive and finite, got {self.epsilon!r}")

    def __call__(self, z):
        return nascent_delta(z, self.epsilon)


def nascent_delta(z, eps: float):
    """Gaussian nascent delta ``exp(-z**2/eps**2) / (sqrt(pi)*eps)``."""
    if not eps > 0:
        raise DomainError(f"eps must be > 0, got {eps!r}")
    z = np.asarray(z, dtype=float)
    out = np.exp(-((z / eps) ** 2)) / (math.sqrt(math.pi) * eps)
    return float(out) if out.ndim == 0 else out


def nascent_delta_integral(eps: float) -> float:
    """Integral of the nascent delta over ``[-8 eps, 8 eps]`` (tail below 1e-28)."""
    nodes, weights = composite_rule(-8.0 * eps, 8.0 * eps, 16, 16)
    return float(np.sum(weights * nascent_delta(nodes, eps)))


@dataclass(frozen=True)
class LinearCoefficient:
    """Coefficient ``k`` in ``x = k*y``; ``None`` when no real solution exists."""

    value: int | None

    @property
    def exists(self) -> bool:
        return self.value is not None

    def __str__(self):
        return "none" if self.value is None else f"{self.value:+d}"


def _is_zero_mean(mu: float, sigma: float) -> bool:
    return abs(mu) <= IDENTITY_TOL * sigma


def solve_k(moments: MomentSummary) -> LinearCoefficient:
    """Linear coefficient of a perfectly correlated, identically distributed pair.

    Returns ``+1`` for ``rho = +1`` with equal means, ``-1`` for ``rho = -1``
    with opposite means, either sign when both means vanish, and ``None``
    when the sign of ``rho`` contradicts the signs of nonzero means.

    Raises
    ------
    DegeneracyError
        If ``|rho| < 1 - RHO_TOL``, the variables are not identically
        distributed, or the moments violate Cauchy-Schwarz.
    """
    m = moments
    ex2, ey2 = m.second_moment_x, m.second_moment_y
    if abs(m.e_xy) > math.sqrt(ex2 * ey2) * (1.0 + 1e-9):
        raise DegeneracyError("inconsistent moments: |E[xy]| exceeds sqrt(E[x^2] E[y^2])")
    sigma = max(m.sigma_x, m.sigma_y)
    if abs(m.sigma_x - m.sigma_y) > IDENTITY_TOL * sigma:
        raise DegeneracyError("variables are not identically distributed (sigma differs)")
    zero_x, zero_y = _is_zero_mean(m.mu_x, sigma), _is_zero_mean(m.mu_y, sigma)
    if zero_x != zero_y or (
        not zero_x and abs(abs(m.mu_x) - abs(m.mu_y)) > IDENTITY_TOL * max(abs(m.mu_x), abs(m.mu_y))
    ):
        raise DegeneracyError("variables are not identically distributed (|mu| differs)")

    rho = m.pearson()
    if abs(rho) < 1.0 - RHO_TOL:
        raise DegeneracyError(f"not a degenerate pair: rho = {rho!r}")
    sign = 1 if rho > 0 else -1
    if zero_x:
        return LinearCoefficient(sign)
    same_signs = (m.mu_x > 0) == (m.mu_y > 0)
    if (sign == 1) == same_signs:
        return LinearCoefficient(sign)
    return LinearCoefficient(None)


@dataclass(frozen=True)
class DegenerateJoint:
    """Joint density ``f_X(x) delta(y - sign*x)``, or the vanishing joint.

    ``marginal`` is a :class:`RiceParams` or any object exposing ``pdf``
    and ``support`` (scipy frozen distributions qualify).
    """

    marginal: object
    sign: int
    vanishes: bool = False

    def pair(self, h: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> float:
        """Pairing ``int int f(x, y) h(x, y) dx dy``."""
        if self.vanishes:
            return 0.0
        if isinstance(self.marginal, RiceParams):
            p = self.marginal
            nu, root = p.los_amplitude, math.sqrt(p.scatter_power)
            lo, hi = max(nu - TAIL * root, 0.0), nu + TAIL * root
            nodes, weights = composite_rule(lo, hi, 48, _PANEL_ORDER)
            return float(np.sum(weights * rice_pdf(p, nodes) * h(nodes, self.sign * nodes)))
        support = self.marginal.support
        lo, hi = support() if callable(support) else support
        value, _ = integrate.quad(
            lambda t: self.marginal.pdf(t) * h(t, self.sign * t), lo, hi, epsabs=1e-13, epsrel=1e-12
        )
        return float(value)


def degenerate_joint(marginal, rho_sign: int, mean_signs: tuple[int, int]) -> DegenerateJoint:
    """Build the ``rho = +/-1`` joint density.

    ``mean_signs`` holds ``+1``, ``-1`` or ``0`` (zero mean) for each
    variable; zero means support either line.
    """
    if rho_sign not in (1, -1):
        raise DomainError(f"rho_sign must be +1 or -1, got {rho_sign!r}")
    sx, sy = mean_signs
    if sx not in (1, -1, 0) or sy not in (1, -1, 0) or (sx == 0) != (sy == 0):
        raise DomainError(f"mean_signs must both be 0 or both be +/-1, got {mean_signs!r}")
    if sx == 0 or (sx == sy) == (rho_sign == 1):
        return DegenerateJoint(marginal, rho_sign)
    return DegenerateJoint(marginal, rho_sign, vanishes=True)


@dataclass(frozen=True)
class DeltaTerm:
    location: float
    weight: float

    def __post_init__(self):
        if not (self.weight > 0 and math.isfinite(self.weight)):
            raise DomainError(f"delta weight must be positive and finite, got {self.weight!r}")


def delta_compose(zeros: Sequence[float], derivative_magnitudes: Sequence[float]) -> list[DeltaTerm]:
    """Terms of ``delta(g(x))`` for simple zeros ``x_n`` with ``|g'(x_n)|`` given."""
    if len(zeros) != len(derivative_magnitudes):
        raise DomainError("zeros and derivative magnitudes must have equal length")
    terms = []
    for x_n, slope in zip(zeros, derivative_magnitudes):
        if not slope > 0:
            raise DomainError(f"zero at {x_n!r} is not simple (|g'| = {slope!r})")
        terms.append(DeltaTerm(float(x_n), 1.0 / float(slope)))
    return terms


def sift(terms: Sequence[DeltaTerm], func: Callable[[float], float]) -> float:
    return math.fsum(t.weight * func(t.location) for t in terms)


def g1_weight(params: RiceParams) -> float:
    """Weight of ``delta(x - y)`` from the nascent form in ``x - y``: ``sqrt(2 beta/(1+K))``."""
    return math.sqrt(2.0 * params.beta / (1.0 + params.k_factor))


def g2_weight(params: RiceParams, x: float, y: float) -> float:
    """Per-zero weight ``sqrt(2 beta / ((1+K) x y))`` of the angular delta."""
    if not (x > 0 and y > 0):
        raise DomainError("g2 weight diverges unless x > 0 and y > 0")
    return math.sqrt(2.0 * params.beta / ((1.0 + params.k_factor) * x * y))


def g2_slope(params: RiceParams, x: float, y: float, theta: float) -> float:
    """``|dg/dtheta|`` for ``g(theta) = sqrt((1+K) x y (1 - cos theta) / beta)``."""
    return math.sqrt((1.0 + params.k_factor) * x * y / (2.0 * params.beta)) * abs(math.cos(0.5 * theta))


def g2_terms(params: RiceParams, x: float, y: float, convention: str = "periodic") -> list[DeltaTerm]:
    """Angular delta terms at the zeros ``0`` and ``2 pi`` bounding one period.

    ``"periodic"`` splits one full weight across the two endpoints;
    ``"both-endpoints"`` gives each endpoint the full weight.
    """
    if convention not in ("periodic", "both-endpoints"):
        raise DomainError(f"unknown endpoint convention {convention!r}")
    slopes = [g2_slope(params, x, y, 0.0), g2_slope(params, x, y, TWO_PI)]
    terms = delta_compose([0.0, TWO_PI], slopes)
    if convention == "periodic":
        terms = [DeltaTerm(t.location, 0.5 * t.weight) for t in terms]
    return terms


def assembled_limit_factor(params: RiceParams, x: float, convention: str = "periodic") -> float:
    """Multiplier of ``delta(x - y)`` rebuilt from the rho_c -> 1 regrouping.

    Combines the limiting prefactor, the ``x - y`` delta weight and the
    sifted angular integral at ``y = x``. Equals the Rice pdf under the
    periodic convention and twice it under ``"both-endpoints"``.
    """
    if not x > 0:
        raise DomainError("assembled limit factor needs x > 0")
    k, b = params.k_factor, params.beta
    prefactor = (1.0 + k) ** 2 * x * x * math.exp(-k - (1.0 + k) * x * x / (2.0 * b)) / (2.0 * b * b)

    def bessel(theta):
        radial = k * (1.0 + k) * (2.0 * x * x + 2.0 * x * x * math.cos(theta)) / (2.0 * b)
        return math.exp(log_bessel_i0(math.sqrt(max(radial, 0.0))))

    return prefactor * g1_weight(params) * sift(g2_terms(params, x, x, convention), bessel)


# --- finite-rho_c diagnostics -----------------------------------------------


def effective_width(params: RiceParams, rho: float) -> float:
    """Nascent-delta width in ``x - y``: ``sqrt(2 beta (1 - rho**2) / (1+K))``."""
    return math.sqrt(2.0 * params.beta * (1.0 - rho) * (1.0 + rho) / (1.0 + params.k_factor))


def limit_ratio(params: RiceParams, corr, x: float, y: float, tol: float = DEFAULT_TOL) -> float:
    """``f(x, y; rho_c) / f_X(y)``, the family that tends to ``delta(x - y)``."""
    corr = _as_corr(corr)
    log_marginal = rice_log_pdf(params, y)
    if not math.isfinite(log_marginal) or log_marginal < math.log(np.finfo(float).tiny):
        raise DomainError(f"f_X({y!r}) underflows; ratio undefined")
    return math.exp(bivariate_rice_log_pdf(params, corr, x, y, tol) - log_marginal)


def peak_ratio(params: RiceParams, corr, x0: float, tol: float = DEFAULT_TOL) -> float:
    """``f(x0, x0; rho_c) * sqrt(pi) * eps_eff``; tends to ``f_X(x0)`` as rho_c -> 1."""
    corr = _as_corr(corr)
    log_f = bivariate_rice_log_pdf(params, corr, x0, x0, tol)
    return math.exp(log_f) * math.sqrt(math.pi) * effective_width(params, corr.rho_c)


@dataclass(frozen=True)
class ConcentrationMetrics:
    mass_in_window: float
    effective_width: float


def concentration_metrics(
    params: RiceParams, corr, x0: float, half_width: float, tol: float = DEFAULT_TOL
) -> ConcentrationMetrics:
    """Window mass and spread of ``y`` under ``f(x0, y; rho_c) / f_X(x0)``."""
    if not (x0 > 0 and half_width > 0):
        raise DomainError("x0 and half_width must be positive")
    corr = _as_corr(corr)
    marginal = rice_pdf(params, x0)
    (inside,) = integrate_over_y(params, corr, x0, x0 - half_width, x0 + half_width, tol=tol)
    m0, m1, m2 = integrate_over_y(params, corr, x0, moments=(0, 1, 2), center=x0, tol=tol)
    mean_shift = m1 / m0
    spread = math.sqrt(max(m2 / m0 - mean_shift * mean_shift, 0.0))
    return ConcentrationMetrics(float(inside / marginal), float(spread))


def ratio_pairing(
    params: RiceParams, corr, x0: float, h: Callable[[np.ndarray], np.ndarray], tol: float = DEFAULT_TOL
) -> float:
    """``int f(x0, y; rho_c) / f_X(y) * h(y) dy``; tends to ``h(x0)`` as rho_c -> 1.

    The y-range is the set of ``y`` whose conditional window contains
    ``x0``; it grows like ``1/rho_c`` and is unbounded at ``rho_c = 0``.
    """
    corr = _as_corr(corr)
    rho = corr.rho_c
    if rho <= 0:
        raise DomainError("ratio pairing diverges at rho_c = 0")
    if not x0 > 0:
        raise DomainError("x0 must be positive")
    nu = params.los_amplitude
    spread = TAIL * math.sqrt(params.scatter_power * (1.0 - rho) * (1.0 + rho))
    lo = max((x0 - (1.0 - rho) * nu - spread) / rho, 0.0)
    hi = (x0 + (1.0 - rho) * nu + spread) / rho
    panels = min(max(8, math.ceil((hi - lo) / (0.75 * conditional_scale(params, rho)))), 512)
    nodes, weights = composite_rule(lo, hi, panels, _PANEL_ORDER)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratio = bivariate_rice_log_pdf_array(params, corr, x0, nodes, tol) - rice_log_pdf_array(
            params, nodes
        )
    ratio = np.where(np.isfinite(log_ratio), np.exp(log_ratio), 0.0)
    return float(np.sum(weights * ratio * h(nodes)))
