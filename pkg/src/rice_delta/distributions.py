"""Rice marginal and bivariate Rice densities.

The bivariate density is evaluated as a log-domain theta integral. Its
integrand is even and 2pi-periodic, with a peak at theta = 0 whose width
shrinks like ``sqrt(1 - rho_c**2)``; see
:func:`rice_delta.numerics.integrate_even_periodic_log`.

Parametrisation: ``K`` is the LOS-to-scatter power ratio and ``beta`` is
half the mean power, ``E[X**2] = 2*beta``. The underlying complex model has
LOS amplitude ``nu = sqrt(2*beta*K/(1+K))`` and scatter power
``Omega = 2*beta/(1+K)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, QuadratureError
from .numerics import (
    DEFAULT_ORDERS,
    _legendre,
    composite_rule,
    integrate_even_periodic_log,
    log_bessel_i0_array,
)

DEFAULT_TOL = 1e-10

# Gaussian-tail multiplier: P(|w| > TAIL * sqrt(power)) = exp(-TAIL**2) ~ 2e-16.
TAIL = 6.0
_PANEL_ORDER = 8


@dataclass(frozen=True)
class RiceParams:
    k_factor: float
    beta: float

    def __post_init__(self):
        k, b = float(self.k_factor), float(self.beta)
        if not math.isfinite(k) or k < 0:
            raise DomainError(f"k_factor must be finite and >= 0, got {self.k_factor!r}")
        if not math.isfinite(b) or b <= 0:
            raise DomainError(f"beta must be finite and > 0, got {self.beta!r}")
        object.__setattr__(self, "k_factor", k)
        object.__setattr__(self, "beta", b)

    @property
    def los_amplitude(self) -> float:
        return math.sqrt(2.0 * self.beta * self.k_factor / (1.0 + self.k_factor))

    @property
    def scatter_power(self) -> float:
        return 2.0 * self.beta / (1.0 + self.k_factor)

    @property
    def bessel_scale(self) -> float:
        """Coefficient ``sqrt(2K(1+K)/beta)`` of ``x`` inside the marginal's I0."""
        k = self.k_factor
        return math.sqrt(2.0 * k * (1.0 + k) / self.beta)

    @property
    def truncation(self) -> float:
        """Upper integration limit whose neglected tail is below 1e-12."""
        return math.sqrt(2.0 * self.beta) * (1.0 + math.sqrt(self.k_factor)) * TAIL

    def second_moment(self) -> float:
        return 2.0 * self.beta


@dataclass(frozen=True)
class CorrelationState:
    """Real correlation coefficient of the complex envelopes.

    ``allow_unity`` admits ``rho_c = 1`` for sampler-based paths only.
    """

    rho_c: float
    allow_unity: bool = field(default=False, compare=False)

    def __post_init__(self):
        r = float(self.rho_c)
        upper_ok = r <= 1.0 if self.allow_unity else r < 1.0
        if not math.isfinite(r) or r < 0 or not upper_ok:
            bound = "[0, 1]" if self.allow_unity else "[0, 1)"
            raise DomainError(f"rho_c must lie in {bound}, got {self.rho_c!r}")
        object.__setattr__(self, "rho_c", r)

    @property
    def is_unity(self) -> bool:
        return self.rho_c == 1.0


@dataclass(frozen=True)
class PdfGrid:
    x_values: np.ndarray
    y_values: np.ndarray
    log_density: np.ndarray

    def __post_init__(self):
        for name in ("x_values", "y_values"):
            axis = np.asarray(getattr(self, name), dtype=float)
            if axis.ndim != 1 or axis.size == 0:
                raise DomainError(f"{name} must be a non-empty 1-D axis")
            if np.any(axis < 0) or np.any(np.diff(axis) <= 0):
                raise DomainError(f"{name} must be nonnegative and strictly increasing")
        if np.shape(self.log_density) != (len(self.x_values), len(self.y_values)):
            raise DomainError("log_density shape does not match the axes")

    @property
    def density(self) -> np.ndarray:
        return np.exp(self.log_density)

    def trapezoid_mass(self) -> float:
        inner = np.trapezoid(self.density, self.y_values, axis=1)
        return float(np.trapezoid(inner, self.x_values))


def _check_nonnegative(x, name="x") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} must be finite and >= 0")
    return arr


def _as_corr(corr) -> CorrelationState:
    if isinstance(corr, CorrelationState):
        if corr.is_unity:
            raise DomainError(
                "the bivariate density is undefined at rho_c = 1; use the degenerate limit"
            )
        return corr
    return CorrelationState(float(corr))


# --- marginal ---------------------------------------------------------------


def rice_log_pdf_array(params: RiceParams, x) -> np.ndarray:
    x = _check_nonnegative(x)
    k, b = params.k_factor, params.beta
    with np.errstate(divide="ignore"):
        return (
            np.log((1.0 + k) * x / b)
            - k
            - (1.0 + k) * x * x / (2.0 * b)
            + log_bessel_i0_array(x * params.bessel_scale)
        )


def rice_log_pdf(params: RiceParams, x: float) -> float:
    """Log of the Rice density; ``-inf`` at the origin."""
    return float(rice_log_pdf_array(params, np.array([x]))[0])


def rice_pdf(params: RiceParams, x):
    out = np.exp(rice_log_pdf_array(params, x))
    return float(out) if np.ndim(x) == 0 else out


def degenerate_rice_factor(params: RiceParams, x: float) -> float:
    """Multiplier of ``delta(x - y)`` in the rho_c -> 1 limit of the bivariate density.

    Numerically identical to :func:`rice_pdf`; kept separate so the degenerate
    joint has its own entry point.
    """
    return math.exp(rice_log_pdf(params, x))


def _cdf_cumulative(params: RiceParams, points: np.ndarray, step: float, order: int) -> np.ndarray:
    edges = np.union1d(points, np.arange(0.0, points[-1], step))
    edges = np.union1d(edges, [0.0])
    t, w = _legendre(order)
    left = edges[:-1, None]
    half = 0.5 * np.diff(edges)[:, None]
    nodes = left + half * (t + 1.0)
    pieces = np.sum(half * w * rice_pdf(params, nodes), axis=1)
    cumulative = np.concatenate([[0.0], np.cumsum(pieces)])
    return cumulative[np.searchsorted(edges, points)]


def rice_cdf(params: RiceParams, x, tol: float = 1e-12):
    """Rice distribution function by refined Gauss-Legendre integration of the pdf.

    Accepts a scalar or an array. The panel width is halved until the 8-
    and 16-point panel rules agree within ``tol``.
    """
    arr = _check_nonnegative(x)
    flat = arr.ravel()
    if flat.size == 0:
        return arr.copy()
    points = np.unique(flat)
    step = 0.25 * math.sqrt(params.scatter_power)
    for _ in range(8):
        coarse = _cdf_cumulative(params, points, step, 8)
        fine = _cdf_cumulative(params, points, step, 16)
        if np.max(np.abs(fine - coarse)) <= tol:
            break
        step *= 0.5
    else:
        raise QuadratureError("rice_cdf refinement did not converge")
    out = np.minimum(fine[np.searchsorted(points, flat)], 1.0).reshape(arr.shape)
    return float(out) if np.ndim(x) == 0 else out


def rice_quantile(params: RiceParams, prob: float) -> float:
    if not 0.0 < prob < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {prob!r}")
    return brentq(lambda t: rice_cdf(params, t) - prob, 0.0, params.truncation, xtol=1e-14)


# --- bivariate --------------------------------------------------------------


def bivariate_rice_log_pdf_array(
    params: RiceParams, corr, x, y, tol: float = DEFAULT_TOL, orders=DEFAULT_ORDERS
) -> np.ndarray:
    """Vectorised log bivariate Rice density; ``x`` and ``y`` broadcast."""
    corr = _as_corr(corr)
    x, y = np.broadcast_arrays(_check_nonnegative(x), _check_nonnegative(y, "y"))
    k, b, rho = params.k_factor, params.beta, corr.rho_c
    one_minus = (1.0 - rho) * (1.0 + rho)
    xy = x * y
    s = x + y

    with np.errstate(divide="ignore"):
        prefactor = (
            2.0 * math.log1p(k)
            + np.log(xy)
            - math.log(2.0 * math.pi)
            - 2.0 * math.log(b)
            - math.log(one_minus)
            - 2.0 * k / (1.0 + rho)
            - (1.0 + k) * ((x - y) ** 2 + 2.0 * (1.0 - rho) * xy) / (2.0 * b * one_minus)
        )

    decay = rho * (1.0 + k) * xy / (b * one_minus)
    bessel = params.bessel_scale / (1.0 + rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        curvature = decay + np.where(s > 0, bessel * xy / s, 0.0)
        width = np.where(curvature > 0, 1.0 / np.sqrt(curvature), np.inf)

    xy_n, s_n, decay_n = xy[..., None], s[..., None], decay[..., None]

    def log_integrand(theta):
        half_sin2 = np.sin(0.5 * theta) ** 2
        out = -2.0 * decay_n * half_sin2
        if bessel > 0:
            radius = np.sqrt(np.maximum(s_n * s_n - 4.0 * xy_n * half_sin2, 0.0))
            out = out + log_bessel_i0_array(bessel * radius)
        return out

    log_integral = integrate_even_periodic_log(log_integrand, width, tol=tol, orders=orders)
    return prefactor + log_integral


def bivariate_rice_log_pdf(
    params: RiceParams, corr, x: float, y: float, tol: float = DEFAULT_TOL
) -> float:
    """Log of the bivariate Rice density of two identically distributed envelopes.

    Parameters
    ----------
    params : RiceParams
        Common marginal shape.
    corr : CorrelationState or float
        Complex-envelope correlation, ``0 <= rho_c < 1``.
    x, y : float
        Envelope values, both nonnegative.
    tol : float
        Convergence tolerance of the theta integral, absolute in log units.

    Raises
    ------
    DomainError
        Negative envelopes or ``rho_c`` outside ``[0, 1)``.
    QuadratureError
        The theta integral did not settle at the maximum order.
    """
    return float(bivariate_rice_log_pdf_array(params, corr, np.array([x]), np.array([y]), tol)[0])


def bivariate_rice_pdf(params: RiceParams, corr, x, y, tol: float = DEFAULT_TOL):
    out = np.exp(bivariate_rice_log_pdf_array(params, corr, x, y, tol))
    return float(out) if np.ndim(x) == 0 and np.ndim(y) == 0 else out


def bivariate_rice_grid(params: RiceParams, corr, x_axis, y_axis, tol: float = DEFAULT_TOL) -> PdfGrid:
    x_axis = np.asarray(x_axis, dtype=float)
    y_axis = np.asarray(y_axis, dtype=float)
    # validate axes before spending time on the integral
    PdfGrid(x_axis, y_axis, np.zeros((x_axis.size, y_axis.size)))
    try:
        log_density = bivariate_rice_log_pdf_array(
            params, corr, x_axis[:, None], y_axis[None, :], tol
        )
    except QuadratureError as exc:
        i, j = exc.index if len(exc.index) == 2 else (0, 0)
        raise QuadratureError(
            f"{exc} (cell x={float(x_axis[i])!r}, y={float(y_axis[j])!r})", index=exc.index
        ) from exc
    return PdfGrid(x_axis, y_axis, log_density)


# --- integrals of the bivariate density over y -------------------------------


def conditional_window(params: RiceParams, rho: float, x):
    """Interval in ``y`` outside which ``f(x, y) / f_X(x)`` is below ~1e-16.

    Given the first complex envelope ``z1`` with ``|z1| = x``, the second is
    ``rho*z1 + (1-rho)*nu`` plus complex Gaussian scatter of power
    ``Omega*(1 - rho**2)``; the window covers the centre's modulus range
    widened by ``TAIL`` scatter amplitudes.
    """
    x = np.asarray(x, dtype=float)
    nu = params.los_amplitude
    spread = TAIL * math.sqrt(params.scatter_power * (1.0 - rho) * (1.0 + rho))
    lo = np.maximum(np.abs(rho * x - (1.0 - rho) * nu) - spread, 0.0)
    hi = rho * x + (1.0 - rho) * nu + spread
    return lo, hi


def conditional_scale(params: RiceParams, rho: float) -> float:
    """Per-component standard deviation of the second envelope given the first."""
    return math.sqrt(0.5 * params.scatter_power * (1.0 - rho) * (1.0 + rho))


def y_rule(params: RiceParams, rho: float, lo, hi, max_panels: int = 256):
    """Composite nodes on ``[lo, hi]`` with panels no wider than 0.75 conditional scales."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    length = float(np.max(hi - lo)) if np.size(lo) else 0.0
    panels = int(min(max(4, math.ceil(length / (0.75 * conditional_scale(params, rho)))), max_panels))
    return composite_rule(lo, np.maximum(hi, lo), panels, _PANEL_ORDER)


def integrate_over_y(params: RiceParams, corr, x, lo=None, hi=None, moments=(0,), center=None,
                     tol: float = DEFAULT_TOL):
    """Integrals ``int f(x, y) * (y - center)**m dy`` over ``[lo, hi]``.

    Limits default to the conditional window and are clipped to it: outside
    it the integrand is negligible. Returns one array per entry of
    ``moments``, shaped like ``x``.
    """
    corr = _as_corr(corr)
    x = np.asarray(x, dtype=float)
    w_lo, w_hi = conditional_window(params, corr.rho_c, x)
    lo = w_lo if lo is None else np.maximum(np.asarray(lo, dtype=float), w_lo)
    hi = w_hi if hi is None else np.minimum(np.asarray(hi, dtype=float), w_hi)
    empty = hi <= lo
    nodes, weights = y_rule(params, corr.rho_c, lo, np.where(empty, lo, hi))
    dens = np.exp(bivariate_rice_log_pdf_array(params, corr, x[..., None], nodes, tol))
    shift = 0.0 if center is None else np.asarray(center, dtype=float)[..., None]
    out = []
    for m in moments:
        val = np.sum(weights * dens * (nodes - shift) ** m, axis=-1)
        out.append(np.where(empty, 0.0, val))
    return out


def marginal_from_joint(params: RiceParams, corr, x, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``int_0^inf f(x, y) dy`` evaluated numerically."""
    return integrate_over_y(params, corr, x, tol=tol)[0]


def total_mass(params: RiceParams, corr, tol: float = DEFAULT_TOL) -> float:
    """Two-dimensional quadrature of the bivariate density.

    The outer range is the marginal's Gaussian-tail window
    ``nu +/- 6*sqrt(Omega)``, the inner range the conditional window.
    """
    corr = _as_corr(corr)
    nu, omega = params.los_amplitude, params.scatter_power
    lo = max(nu - TAIL * math.sqrt(omega), 0.0)
    hi = nu + TAIL * math.sqrt(omega)
    panels = math.ceil((hi - lo) / (0.75 * math.sqrt(0.5 * omega)))
    x_nodes, x_weights = composite_rule(lo, hi, panels, _PANEL_ORDER)
    inner = marginal_from_joint(params, corr, x_nodes, tol)
    return float(np.sum(x_weights * inner))


def rectangle_probabilities(params: RiceParams, corr, x_edges, y_edges, order: int = 6,
                            tol: float = DEFAULT_TOL) -> np.ndarray:
    """Probability of each ``[x_i, x_{i+1}) x [y_j, y_{j+1})`` cell by tensor Gauss-Legendre."""
    x_edges = np.asarray(x_edges, dtype=float)
    y_edges = np.asarray(y_edges, dtype=float)
    t, w = _legendre(order)

    def nodes(edges):
        half = 0.5 * np.diff(edges)[:, None]
        return edges[:-1, None] + half * (t + 1.0), half * w

    xn, xw = nodes(x_edges)
    yn, yw = nodes(y_edges)
    log_f = bivariate_rice_log_pdf_array(
        params, corr, xn[:, None, :, None], yn[None, :, None, :], tol
    )
    weights = xw[:, None, :, None] * yw[None, :, None, :]
    return np.sum(weights * np.exp(log_f), axis=(2, 3))
