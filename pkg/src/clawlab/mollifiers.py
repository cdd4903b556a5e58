"""Standard mollifier kernels, cone cutoffs, and contraction test functions.

The d-dimensional kernel is

    rho_eps(x) = eps^{-d} rho(x / eps),
    rho(x) = C_d exp(1 / (|x|^2 - 1))   for |x| < 1,  0 otherwise,

with C_d fixed by unit mass.  From the 1-d kernel omega_h we build its
cumulative integral alpha_h, the cone cutoff

    chi_eps(x, t) = 1 - alpha_eps(|x| - (R - t N) + eps),

and the contraction test function

    psi(x, t) = (alpha_h(t - rho) - alpha_h(t - tau)) chi_eps(x, t),

whose time derivative and spatial gradient are closed-form in omega.

alpha_h is served from a precomputed 10^4-point table with monotone cubic
(PCHIP) interpolation because it sits inside triple integrals; direct
quadrature remains available as the oracle it is checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import BadWindow
from .flux import as_points
from .quadrature import adaptive_gauss_legendre

Array = np.ndarray


def _unit_profile(r2: Array) -> Array:
    """exp(1/(r^2 - 1)) on r^2 < 1, zero outside, without overflow noise."""
    r2 = np.asarray(r2, dtype=float)
    out = np.zeros_like(r2)
    inside = r2 < 1.0
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        out[inside] = np.exp(1.0 / (r2[inside] - 1.0))
    return out


@lru_cache(maxsize=None)
def mollifier_constant(dim: int) -> float:
    """Normalization C_d with unit total mass; computed once per dimension."""
    if dim == 1:
        mass = adaptive_gauss_legendre(
            lambda s: _unit_profile(s * s), -1.0, 1.0, tol=1e-14)
    elif dim == 2:
        mass = 2.0 * math.pi * adaptive_gauss_legendre(
            lambda r: r * _unit_profile(r * r), 0.0, 1.0, tol=1e-14)
    else:
        raise ValueError("dimensions 1 and 2 supported")
    return 1.0 / float(mass)


@dataclass(frozen=True)
class Mollifier:
    """Scaled standard kernel rho_eps in ``dim`` dimensions."""

    dim: int
    epsilon: float

    @property
    def normalization(self) -> float:
        return mollifier_constant(self.dim)

    def value(self, x) -> Array:
        pts = as_points(x, self.dim)
        r2 = (pts / self.epsilon) ** 2
        r2 = r2.sum(axis=-1)
        return self.normalization * _unit_profile(r2) / self.epsilon ** self.dim

    def grad(self, x) -> Array:
        """grad rho_eps(x) = -2 C z exp(1/(|z|^2-1)) / (|z|^2-1)^2 / eps^{d+1},
        z = x / eps; zero outside the support ball."""
        pts = as_points(x, self.dim)
        z = pts / self.epsilon
        r2 = (z ** 2).sum(axis=-1)
        prof = _unit_profile(r2)
        denom = np.where(r2 < 1.0, (r2 - 1.0) ** 2, 1.0)
        scale = -2.0 * self.normalization * prof / denom / self.epsilon ** (self.dim + 1)
        return scale[..., None] * z

    @property
    def peak(self) -> float:
        """sup |rho_eps| = rho_eps(0)."""
        return self.normalization * math.exp(-1.0) / self.epsilon ** self.dim


def omega_value(h: float, sigma) -> Array:
    """1-d kernel omega_h evaluated on plain scalars/arrays."""
    s = np.asarray(sigma, dtype=float)
    z = s / h
    return mollifier_constant(1) * _unit_profile(z * z) / h


def omega_peak(h: float) -> float:
    return mollifier_constant(1) * math.exp(-1.0) / h


_CDF_TABLE_SIZE = 10_001


@lru_cache(maxsize=1)
def _unit_cdf_interpolator() -> PchipInterpolator:
    """Monotone interpolant of A(u) = int_{-1}^{u} omega_1, built so that
    A(-1) = 0, A(0) = 1/2 and A(1) = 1 hold exactly."""
    m = (_CDF_TABLE_SIZE - 1) // 2
    us = np.linspace(0.0, 1.0, m + 1)
    c1 = mollifier_constant(1)
    halves = np.zeros(m + 1)
    for j in range(1, m + 1):
        seg = adaptive_gauss_legendre(
            lambda s: c1 * _unit_profile(s * s), us[j - 1], us[j], tol=1e-15)
        halves[j] = halves[j - 1] + seg
    halves *= 0.5 / halves[-1]          # right half carries exactly half the mass
    grid = np.concatenate([-us[::-1], us[1:]])
    vals = np.concatenate([0.5 - halves[::-1], 0.5 + halves[1:]])
    return PchipInterpolator(grid, vals, extrapolate=False)


def kernel_cdf(h: float, sigma) -> Array:
    """alpha_h(sigma) = int_{-infty}^{sigma} omega_h: 0 below -h, 1 above h,
    monotone in between."""
    s = np.asarray(sigma, dtype=float) / float(h)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    out = np.empty_like(s)
    lo = s <= -1.0
    hi = s >= 1.0
    mid = ~(lo | hi)
    out[lo] = 0.0
    out[hi] = 1.0
    if np.any(mid):
        out[mid] = _unit_cdf_interpolator()(s[mid])
    return float(out[0]) if scalar else out


def kernel_cdf_quadrature(h: float, sigma: float) -> float:
    """Direct-quadrature fallback for alpha_h; the oracle for kernel_cdf."""
    s = float(sigma) / float(h)
    if s <= -1.0:
        return 0.0
    if s >= 1.0:
        return 1.0
    c1 = mollifier_constant(1)
    return float(adaptive_gauss_legendre(
        lambda t: c1 * _unit_profile(t * t), -1.0, s, tol=1e-13))


@dataclass(frozen=True)
class ConeSpec:
    """Truncated space-time cone in R^dim with base ball B_R and slope N.

    ``ball_radius(t) = R - t N``; the vertex time is R/N, infinite for
    speed-zero fluxes, in which case ``horizon`` caps it (cylinders replace
    cones).
    """

    R: float
    N: float
    dim: int = 1
    horizon: float | None = None

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError("cone base radius must be positive")
        if self.N < 0:
            raise ValueError("cone slope must be non-negative")

    def ball_radius(self, t) -> Array:
        return self.R - np.asarray(t, dtype=float) * self.N

    @property
    def t_max(self) -> float:
        vertex = self.R / self.N if self.N > 0 else math.inf
        if self.horizon is not None:
            vertex = min(vertex, self.horizon)
        return vertex


def chi_epsilon(cone: ConeSpec, eps: float, x, t) -> Array:
    """Smoothed indicator of the cone: values in [0, 1], identically zero
    outside, converging pointwise to the indicator as eps -> 0."""
    pts = as_points(x, cone.dim)
    r = np.sqrt((pts ** 2).sum(axis=-1))
    arg = r - cone.ball_radius(t) + eps
    return 1.0 - kernel_cdf(eps, arg)


@dataclass(frozen=True)
class TestFunction:
    """Compactly supported Lipschitz phi(x, t) with evaluable derivatives.

    ``support_box`` is ((lo_1..lo_d), (hi_1..hi_d), t_lo, t_hi); the value
    vanishes on and outside its boundary.  ``lip`` is an a-priori Lipschitz
    bound used by tolerance models.
    """

    dim: int
    value: Callable
    dt: Callable
    grad_x: Callable
    support_box: tuple
    lip: float


def contraction_test_function(cone: ConeSpec, rho: float, tau: float,
                              h: float, eps: float) -> TestFunction:
    """The test function of the shrinking-ball contraction argument.

    psi(x,t) = (alpha_h(t-rho) - alpha_h(t-tau)) chi_eps(x,t), supported in
    closure(B_R) x [rho - h, t_max].  dt and grad_x are the closed forms; the
    gradient at x = 0 is defined as 0 (a null point of a Lipschitz function).
    """
    t_max = cone.t_max
    if not (0.0 < rho < tau < t_max):
        raise BadWindow(f"need 0 < rho < tau < t_max, got {rho}, {tau}, {t_max}")
    if h >= min(rho, t_max - tau):
        raise BadWindow(f"h = {h} too wide for window ({rho}, {tau}) in (0, {t_max})")
    if eps <= 0:
        raise BadWindow("eps must be positive")
    R, N, dim = cone.R, cone.N, cone.dim

    def window(t):
        return kernel_cdf(h, np.asarray(t, dtype=float) - rho) \
            - kernel_cdf(h, np.asarray(t, dtype=float) - tau)

    def value(x, t):
        return window(t) * chi_epsilon(cone, eps, x, t)

    def dt(x, t):
        tt = np.asarray(t, dtype=float)
        pts = as_points(x, dim)
        r = np.sqrt((pts ** 2).sum(axis=-1))
        arg = r - (R - tt * N) + eps
        ring = omega_value(eps, arg)
        return ((omega_value(h, tt - rho) - omega_value(h, tt - tau))
                * chi_epsilon(cone, eps, x, t)
                - window(t) * ring * N)

    def grad_x(x, t):
        tt = np.asarray(t, dtype=float)
        pts = as_points(x, dim)
        r = np.sqrt((pts ** 2).sum(axis=-1))
        arg = r - (R - tt * N) + eps
        ring = omega_value(eps, arg)
        unit = np.where(r[..., None] > 0.0,
                        pts / np.where(r == 0.0, 1.0, r)[..., None], 0.0)
        return (-window(t) * ring)[..., None] * unit

    # closed-form bounds: |dt psi| <= 2 sup omega_h + 2 N sup omega_eps,
    # |grad psi| <= 2 sup omega_eps
    lip = max(2.0 * omega_peak(h) + 2.0 * N * omega_peak(eps),
              2.0 * omega_peak(eps))
    # the window factor vanishes identically beyond tau + h
    box = (np.full(dim, -R), np.full(dim, R), rho - h, min(tau + h, t_max))
    return TestFunction(dim, value, dt, grad_x, box, lip)


def bump_test_function(center, radius: float, t_lo: float, t_hi: float,
                       dim: int = 1) -> TestFunction:
    """Separable cos^2 bump: X(|x-c|/radius) * sin^2(pi (t-t_lo)/(t_hi-t_lo)).

    Smooth, non-negative, compactly supported in the ball times the window;
    derivatives are closed-form.  Generic admissible test function for weak
    entropy residuals.
    """
    c = np.asarray(center, dtype=float).reshape(dim)
    T = float(t_hi - t_lo)
    if T <= 0 or radius <= 0:
        raise BadWindow("bump needs t_hi > t_lo and radius > 0")

    def tprof(t):
        tt = (np.asarray(t, dtype=float) - t_lo) / T
        inside = (tt > 0.0) & (tt < 1.0)
        return np.where(inside, np.sin(np.pi * tt) ** 2, 0.0)

    def tprof_dt(t):
        tt = (np.asarray(t, dtype=float) - t_lo) / T
        inside = (tt > 0.0) & (tt < 1.0)
        return np.where(inside, np.pi * np.sin(2.0 * np.pi * tt) / T, 0.0)

    def xprof(x):
        pts = as_points(x, dim)
        s = np.sqrt(((pts - c) ** 2).sum(axis=-1)) / radius
        return np.where(s < 1.0, np.cos(0.5 * np.pi * s) ** 2, 0.0)

    def value(x, t):
        return tprof(t) * xprof(x)

    def dt(x, t):
        return tprof_dt(t) * xprof(x)

    def grad_x(x, t):
        pts = as_points(x, dim)
        diff = pts - c
        r = np.sqrt((diff ** 2).sum(axis=-1))
        s = r / radius
        mag = np.where(s < 1.0, -0.5 * np.pi * np.sin(np.pi * s) / radius, 0.0)
        unit = np.where(r[..., None] > 0.0, diff / np.where(r == 0.0, 1.0, r)[..., None], 0.0)
        return (tprof(t) * mag)[..., None] * unit

    lip = max(np.pi / T, 0.5 * np.pi / radius)
    box = (c - radius, c + radius, t_lo, t_hi)
    return TestFunction(dim, value, dt, grad_x, box, lip)


def doubling_kernel(eps: float, x, t, y, s):
    """The doubled-variable kernel omega_eps(t-s) rho_eps(x-y) and its
    gradient in y.  Shapes broadcast; the gradient has a trailing dim axis."""
    xp = np.asarray(x, dtype=float)
    dim = xp.shape[-1] if xp.ndim > 0 else 1
    rho = Mollifier(dim, eps)
    xx = as_points(x, dim)
    yy = as_points(y, dim)
    w = omega_value(eps, np.asarray(t, dtype=float) - np.asarray(s, dtype=float))
    val = w * rho.value(xx - yy)
    grad_y = -w[..., None] * rho.grad(xx - yy) if np.ndim(w) else -w * rho.grad(xx - yy)
    return val, grad_y
