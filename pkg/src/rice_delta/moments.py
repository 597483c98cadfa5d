"""Moment summaries for real and complex sample pairs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class MomentSummary:
    """First and second moments of a pair ``(X, Y)``.

    ``e_xy`` is the raw cross-moment. ``covariance`` is optional and, when
    given, is used by :meth:`pearson` in place of ``e_xy - mu_x*mu_y`` to
    avoid cancellation.
    """

    mu_x: float
    mu_y: float
    sigma_x: float
    sigma_y: float
    e_xy: float
    n: int = 0
    covariance: float | None = None

    def __post_init__(self):
        if not (self.sigma_x > 0 and self.sigma_y > 0):
            raise DomainError("standard deviations must be positive")

    @property
    def second_moment_x(self) -> float:
        return self.sigma_x**2 + self.mu_x**2

    @property
    def second_moment_y(self) -> float:
        return self.sigma_y**2 + self.mu_y**2

    def pearson(self) -> float:
        cov = self.covariance if self.covariance is not None else self.e_xy - self.mu_x * self.mu_y
        return float(np.clip(cov / (self.sigma_x * self.sigma_y), -1.0, 1.0))

    def to_dict(self) -> dict:
        return {
            "mu_x": self.mu_x,
            "mu_y": self.mu_y,
            "sigma_x": self.sigma_x,
            "sigma_y": self.sigma_y,
            "e_xy": self.e_xy,
            "n": self.n,
        }


def summarize(x, y) -> MomentSummary:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise DomainError("need two equal-length 1-D samples with n >= 2")
    mx, my = float(np.mean(x)), float(np.mean(y))
    dx, dy = x - mx, y - my
    var_x, var_y = float(np.mean(dx * dx)), float(np.mean(dy * dy))
    if var_x <= 0 or var_y <= 0:
        raise DomainError("correlation undefined: a sample has zero variance")
    cov = float(np.mean(dx * dy))
    return MomentSummary(
        mu_x=mx,
        mu_y=my,
        sigma_x=math.sqrt(var_x),
        sigma_y=math.sqrt(var_y),
        e_xy=cov + mx * my,
        n=int(x.size),
        covariance=cov,
    )


@dataclass(frozen=True)
class ComplexMoments:
    mu_c_x: complex
    mu_c_y: complex
    sigma_c_x: float
    sigma_c_y: float
    cross: complex
    n: int = 0

    def rho_c(self) -> complex:
        return self.cross / (self.sigma_c_x * self.sigma_c_y)


def summarize_complex(zx, zy) -> ComplexMoments:
    zx = np.asarray(zx, dtype=complex)
    zy = np.asarray(zy, dtype=complex)
    if zx.shape != zy.shape or zx.ndim != 1 or zx.size < 2:
        raise DomainError("need two equal-length 1-D complex samples with n >= 2")
    mx, my = complex(np.mean(zx)), complex(np.mean(zy))
    dx, dy = zx - mx, zy - my
    var_x = float(np.mean(dx.real * dx.real + dx.imag * dx.imag))
    var_y = float(np.mean(dy.real * dy.real + dy.imag * dy.imag))
    if var_x <= 0 or var_y <= 0:
        raise DomainError("correlation undefined: a complex sample has zero variance")
    # real and imaginary parts of conj-product written out so duplicates give cross == var
    cross = complex(
        float(np.mean(dx.real * dy.real + dx.imag * dy.imag)),
        float(np.mean(dx.imag * dy.real - dx.real * dy.imag)),
    )
    return ComplexMoments(
        mu_c_x=mx,
        mu_c_y=my,
        sigma_c_x=math.sqrt(var_x),
        sigma_c_y=math.sqrt(var_y),
        cross=cross,
        n=int(zx.size),
    )
