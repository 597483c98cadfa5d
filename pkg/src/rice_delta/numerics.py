"""Special functions and quadrature primitives.

Everything here works in the natural-log domain where it matters: the
bivariate Rice integrand has exponents that grow like ``1/(1 - rho**2)``
and overflows long before the density itself does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, QuadratureError

TWO_PI = 2.0 * math.pi

# Split between the power series and the large-argument expansion of I0.
_BESSEL_SPLIT = 15.0
_SERIES_TERMS = 50
_ASYMPTOTIC_TERMS = 30

# Escalation ladder for the theta integral (total node count).
DEFAULT_ORDERS = (64, 128, 256, 512, 1024)


def _asymptotic_coefficients(count: int) -> np.ndarray:
    # a_k = ((2k-1)!!)^2 / (k! 8^k); built by the ratio a_k/a_{k-1} = (2k-1)^2/(8k)
    coeffs = np.empty(count)
    coeffs[0] = 1.0
    for k in range(1, count):
        coeffs[k] = coeffs[k - 1] * (2 * k - 1) ** 2 / (8.0 * k)
    return coeffs


_ASYMPTOTIC_COEFFS = _asymptotic_coefficients(_ASYMPTOTIC_TERMS)


def log_bessel_i0_array(z) -> np.ndarray:
    """Vectorised ``ln I0(z)`` for ``z >= 0``.

    Power series below ``z = 15``, large-argument expansion above it.
    No overflow for any finite ``z``.
    """
    z = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(z)) or np.any(z < 0):
        raise DomainError("log_bessel_i0 requires finite z >= 0")
    out = np.empty_like(z)
    small = z < _BESSEL_SPLIT

    if np.any(small):
        zs = z[small]
        q = 0.25 * zs * zs
        # Horner form of sum_k q^k / (k!)^2, minus its leading 1 for log1p
        acc = np.ones_like(zs)
        for k in range(_SERIES_TERMS, 1, -1):
            acc = 1.0 + acc * q / (k * k)
        out[small] = np.log1p(q * acc)

    large = ~small
    if np.any(large):
        zl = z[large]
        inv = 1.0 / zl
        acc = np.zeros_like(zl)
        for c in _ASYMPTOTIC_COEFFS[::-1]:
            acc = c + acc * inv
        out[large] = zl - 0.5 * np.log(TWO_PI * zl) + np.log(acc)
    return out


def log_bessel_i0(z: float) -> float:
    """Natural log of the modified Bessel function of order zero.

    Parameters
    ----------
    z : float
        Nonnegative, finite argument.

    Returns
    -------
    float
        ``ln I0(z)``, accurate to about 1e-13 relative over ``[0, 700]``.

    Raises
    ------
    DomainError
        If ``z`` is negative or not finite.
    """
    z = float(z)
    if not math.isfinite(z) or z < 0:
        raise DomainError(f"log_bessel_i0 requires finite z >= 0, got {z!r}")
    return float(log_bessel_i0_array(np.array([z]))[0])


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes and weights on an interval (``[0, 2pi]`` by default)."""

    nodes: tuple[float, ...]
    weights: tuple[float, ...]
    order: int

    def integrate(self, func: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(np.asarray(self.weights), func(np.asarray(self.nodes))))


@lru_cache(maxsize=64)
def _legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre_rule(order: int, lower: float = 0.0, upper: float = TWO_PI) -> QuadratureRule:
    """Gauss-Legendre rule of the given order mapped affinely onto ``[lower, upper]``."""
    if int(order) != order or order < 2:
        raise DomainError(f"quadrature order must be an integer >= 2, got {order!r}")
    if not upper > lower:
        raise DomainError("quadrature interval must have upper > lower")
    t, w = _legendre(int(order))
    half = 0.5 * (upper - lower)
    nodes = lower + half * (t + 1.0)
    return QuadratureRule(tuple(nodes.tolist()), tuple((half * w).tolist()), int(order))


def composite_rule(lower, upper, panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights on ``[lower, upper]``.

    ``lower`` and ``upper`` broadcast; the returned arrays carry an extra
    trailing axis of length ``panels * order``.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    t, w = _legendre(order)
    edges = lower[..., None] + (upper - lower)[..., None] * np.linspace(0.0, 1.0, panels + 1)
    return _panel_nodes(edges, t, w)


def _panel_nodes(edges: np.ndarray, t: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    left = edges[..., :-1, None]
    half = 0.5 * (edges[..., 1:, None] - left)
    nodes = left + half * (t + 1.0)
    weights = half * w
    shape = edges.shape[:-1] + (-1,)
    return nodes.reshape(shape), weights.reshape(shape)


def log_sum_exp(terms: Sequence[tuple[float, float]]) -> float:
    """Return ``ln sum_i w_i * exp(l_i)`` for ``(l_i, w_i)`` pairs.

    The largest log-magnitude is factored out before exponentiating.
    """
    if len(terms) == 0:
        raise DomainError("log_sum_exp needs at least one term")
    logs = np.array([t[0] for t in terms], dtype=float)
    weights = np.array([t[1] for t in terms], dtype=float)
    if np.any(~np.isfinite(weights)) or np.any(weights <= 0):
        raise DomainError("log_sum_exp weights must be positive and finite")
    if len(terms) == 1:
        return float(logs[0] + math.log(weights[0]))
    return float(log_sum_exp_array(logs, np.log(weights)))


def log_sum_exp_array(log_values, log_weights=0.0, axis: int = -1) -> np.ndarray:
    """``ln sum exp(log_values + log_weights)`` along ``axis``; ``-inf`` rows stay ``-inf``."""
    a = np.asarray(log_values, dtype=float) + log_weights
    peak = np.max(a, axis=axis, keepdims=True)
    safe = np.where(np.isfinite(peak), peak, 0.0)
    with np.errstate(divide="ignore"):
        total = np.log(np.sum(np.exp(a - safe), axis=axis))
    return total + np.squeeze(safe, axis=axis)


def peaked_half_period_rule(width, order: int, panels: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes on ``[0, pi]`` refined toward a peak at zero.

    ``width`` (broadcastable) is the peak's scale. When it is small the
    panel edges grow geometrically from ``2*width`` to ``pi``; otherwise
    the panels are uniform. ``order`` is the total node count.
    """
    if order % panels:
        raise DomainError(f"order {order} must be a multiple of panels={panels}")
    width = np.asarray(width, dtype=float)
    t, w = _legendre(order // panels)
    first = np.minimum(2.0 * width, math.pi)
    geometric = first[..., None] * (math.pi / np.maximum(first, 1e-300))[..., None] ** (
        np.arange(panels) / (panels - 1)
    )
    uniform = math.pi * np.arange(1, panels + 1) / panels
    use_geometric = (2.0 * width < math.pi / panels)[..., None]
    inner = np.where(use_geometric, geometric, uniform)
    inner[..., -1] = math.pi
    edges = np.concatenate([np.zeros(inner.shape[:-1] + (1,)), inner], axis=-1)
    return _panel_nodes(edges, t, w)


def integrate_even_periodic_log(
    log_integrand: Callable[[np.ndarray], np.ndarray],
    width,
    tol: float = 1e-10,
    orders: Sequence[int] = DEFAULT_ORDERS,
) -> np.ndarray:
    """Log of ``int_0^{2pi} exp(L(theta)) dtheta`` for an even, 2pi-periodic ``L``.

    ``log_integrand`` maps an array of angles with trailing node axis to
    log-integrand values of the same shape. The order is doubled along
    ``orders`` until two successive results agree within ``tol`` (absolute,
    in log units) everywhere.

    Raises
    ------
    QuadratureError
        If the last two orders still disagree.
    """
    width = np.asarray(width, dtype=float)
    previous = None
    worst = math.inf
    for order in orders:
        nodes, weights = peaked_half_period_rule(width, order)
        with np.errstate(divide="ignore"):
            current = log_sum_exp_array(log_integrand(nodes), np.log(weights)) + math.log(2.0)
        if previous is not None:
            both_inf = np.isneginf(current) & np.isneginf(previous)
            diff = np.where(both_inf, 0.0, np.abs(current - previous))
            worst = float(np.max(diff)) if diff.size else 0.0
            if worst <= tol:
                return current
        previous = current
    index = np.unravel_index(int(np.argmax(diff)), diff.shape) if diff.ndim else ()
    raise QuadratureError(
        f"theta integral did not converge: max change {worst:.3e} > tol {tol:.1e} "
        f"at order {orders[-1]}",
        index=index,
    )
