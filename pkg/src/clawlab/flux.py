"""Analytic flux catalog: f(x, k) with derivatives and Lipschitz metadata.

A flux is a map f : R^d x R -> R^d given in closed form together with its
state derivative d_k f, its spatial divergence at frozen state, and the
spatial gradient of each component.  Catalog entries are closed-form by
construction, so local Lipschitz continuity and the uniform-differentiability
property are documented catalog facts rather than runtime checks; the
operations below only *sample* them.

Point convention: spatial points are arrays whose last axis has length
``dim``.  For 1-d fluxes a bare scalar or an array of coordinates is
accepted and promoted.  State values broadcast against the point batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NonFiniteFlux, SingularPoint, UnknownFlux

Array = np.ndarray

# derivative evaluations exactly on a declared singular point are nudged by
# this relative amount (the singular set has measure zero; any side works)
_SINGULAR_JITTER = 1e-12


def as_points(x, dim: int) -> Array:
    """Normalize ``x`` to an array of shape (..., dim)."""
    a = np.asarray(x, dtype=float)
    if dim == 1:
        if a.ndim == 0:
            return a.reshape(1, 1)
        if a.shape[-1] != 1:
            return a[..., None]
        return a
    if a.ndim == 1 and a.shape[0] == dim:
        return a.reshape(1, dim)
    if a.ndim == 0 or a.shape[-1] != dim:
        raise ValueError(f"expected points with last axis {dim}, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class FluxSpec:
    """A cataloged flux with closed-form derivatives.

    ``eval``/``dk`` map (points (..., d), k) -> (..., d); ``div_x`` maps to
    (...); ``grad_x_components(x, k, i)`` returns the spatial gradient of
    component i with shape (..., d).  ``singular_points`` lists the finitely
    many x where the spatial differential may fail to exist.
    """

    name: str
    dim: int
    eval: Callable[[Array, Array], Array]
    dk: Callable[[Array, Array], Array]
    div_x: Callable[[Array, Array], Array]
    grad_x_components: Callable[[Array, Array, int], Array]
    singular_points: tuple = ()
    params: dict = field(default_factory=dict)

    def nudge_off_singular(self, pts: Array) -> Array:
        """Shift points lying exactly on a singular point by a tiny offset.

        Derivative formulas are only defined off the singular set; callers
        that sample derivatives route their points through here.
        """
        if not self.singular_points:
            return pts
        pts = np.array(pts, dtype=float, copy=True)
        flat = pts.reshape(-1, self.dim)
        for sp in self.singular_points:
            spv = np.asarray(sp, dtype=float).reshape(self.dim)
            hit = np.all(flat == spv, axis=-1)
            if np.any(hit):
                flat[hit, 0] += _SINGULAR_JITTER * max(1.0, float(np.max(np.abs(spv))))
        return flat.reshape(pts.shape)

    def is_singular(self, x) -> bool:
        pts = as_points(x, self.dim).reshape(-1, self.dim)
        for sp in self.singular_points:
            spv = np.asarray(sp, dtype=float).reshape(self.dim)
            if np.any(np.all(pts == spv, axis=-1)):
                return True
        return False


def _burgers(dim: int, params) -> FluxSpec:
    def ev(x, k):
        pts = as_points(x, dim)
        kk = np.asarray(k, dtype=float)
        shape = np.broadcast_shapes(pts.shape[:-1], kk.shape)
        comp = np.broadcast_to(0.5 * kk * kk, shape)
        return np.stack([comp] * dim, axis=-1)

    def dk(x, k):
        pts = as_points(x, dim)
        kk = np.asarray(k, dtype=float)
        shape = np.broadcast_shapes(pts.shape[:-1], kk.shape)
        kk = np.broadcast_to(kk, shape)
        return np.stack([kk] * dim, axis=-1)

    def div(x, k):
        pts = as_points(x, dim)
        return np.zeros(np.broadcast_shapes(pts.shape[:-1], np.shape(k)))

    def grad(x, k, i):
        pts = as_points(x, dim)
        shape = np.broadcast_shapes(pts.shape[:-1], np.shape(k))
        return np.zeros(shape + (dim,))

    return FluxSpec(f"burgers{dim}d", dim, ev, dk, div, grad)


def _advection1d(params) -> FluxSpec:
    c = float(params.get("c", 1.0))

    def ev(x, k):
        pts = as_points(x, 1)
        kk = np.asarray(k, dtype=float)
        shape = np.broadcast_shapes(pts.shape[:-1], kk.shape)
        return np.broadcast_to(c * kk, shape)[..., None]

    def dk(x, k):
        pts = as_points(x, 1)
        shape = np.broadcast_shapes(pts.shape[:-1], np.shape(k))
        return np.full(shape + (1,), c)

    def div(x, k):
        pts = as_points(x, 1)
        return np.zeros(np.broadcast_shapes(pts.shape[:-1], np.shape(k)))

    def grad(x, k, i):
        pts = as_points(x, 1)
        shape = np.broadcast_shapes(pts.shape[:-1], np.shape(k))
        return np.zeros(shape + (1,))

    return FluxSpec("advection1d", 1, ev, dk, div, grad, params={"c": c})


def _xsquared1d(params) -> FluxSpec:
    def ev(x, k):
        pts = as_points(x, 1)
        xx = pts[..., 0]
        out = np.broadcast_to(xx * xx, np.broadcast_shapes(xx.shape, np.shape(k)))
        return out[..., None]

    def dk(x, k):
        pts = as_points(x, 1)
        shape = np.broadcast_shapes(pts.shape[:-1], np.shape(k))
        return np.zeros(shape + (1,))

    def div(x, k):
        pts = as_points(x, 1)
        xx = pts[..., 0]
        return np.broadcast_to(2.0 * xx, np.broadcast_shapes(xx.shape, np.shape(k))).copy()

    def grad(x, k, i):
        return div(x, k)[..., None]

    return FluxSpec("xsquared1d", 1, ev, dk, div, grad)


def _g_arctan(x):
    return np.arctan(x * x) + 1.0


def _g_arctan_prime(x):
    return 2.0 * x / (1.0 + x ** 4)


def _product1d(params) -> FluxSpec:
    # f(x, k) = g(x) h(k) with g = arctan(x^2) + 1, h = sin(k)
    def ev(x, k):
        pts = as_points(x, 1)
        kk = np.asarray(k, dtype=float)
        return (_g_arctan(pts[..., 0]) * np.sin(kk))[..., None]

    def dk(x, k):
        pts = as_points(x, 1)
        kk = np.asarray(k, dtype=float)
        return (_g_arctan(pts[..., 0]) * np.cos(kk))[..., None]

    def div(x, k):
        pts = as_points(x, 1)
        kk = np.asarray(k, dtype=float)
        return _g_arctan_prime(pts[..., 0]) * np.sin(kk)

    def grad(x, k, i):
        return div(x, k)[..., None]

    return FluxSpec("product1d", 1, ev, dk, div, grad)


def _kink1d(params) -> FluxSpec:
    # f(x, k) = |x| k: locally Lipschitz, spatial derivative fails at x = 0
    def ev(x, k):
        pts = as_points(x, 1)
        kk = np.asarray(k, dtype=float)
        return (np.abs(pts[..., 0]) * kk)[..., None]

    def dk(x, k):
        pts = as_points(x, 1)
        out = np.broadcast_to(np.abs(pts[..., 0]),
                              np.broadcast_shapes(pts.shape[:-1], np.shape(k)))
        return out[..., None].copy()

    def div(x, k):
        pts = as_points(x, 1)
        kk = np.asarray(k, dtype=float)
        return np.sign(pts[..., 0]) * kk + np.zeros(pts.shape[:-1])

    def grad(x, k, i):
        return div(x, k)[..., None]

    return FluxSpec("kink1d", 1, ev, dk, div, grad, singular_points=((0.0,),))


def _product2d(params) -> FluxSpec:
    # f_i(x, k) = (arctan(x_i^2) + 1) sin(k)
    def ev(x, k):
        pts = as_points(x, 2)
        kk = np.asarray(k, dtype=float)
        s = np.sin(kk)
        return np.stack([_g_arctan(pts[..., 0]) * s,
                         _g_arctan(pts[..., 1]) * s], axis=-1)

    def dk(x, k):
        pts = as_points(x, 2)
        kk = np.asarray(k, dtype=float)
        c = np.cos(kk)
        return np.stack([_g_arctan(pts[..., 0]) * c,
                         _g_arctan(pts[..., 1]) * c], axis=-1)

    def div(x, k):
        pts = as_points(x, 2)
        kk = np.asarray(k, dtype=float)
        return (_g_arctan_prime(pts[..., 0]) + _g_arctan_prime(pts[..., 1])) * np.sin(kk)

    def grad(x, k, i):
        pts = as_points(x, 2)
        kk = np.asarray(k, dtype=float)
        gi = _g_arctan_prime(pts[..., i]) * np.sin(kk) + np.zeros(pts.shape[:-1])
        out = np.zeros(gi.shape + (2,))
        out[..., i] = gi
        return out

    return FluxSpec("product2d", 2, ev, dk, div, grad)


_CATALOG = {
    "burgers1d": (lambda p: _burgers(1, p), set()),
    "burgers2d": (lambda p: _burgers(2, p), set()),
    "advection1d": (_advection1d, {"c"}),
    "xsquared1d": (_xsquared1d, set()),
    "product1d": (_product1d, set()),
    "product2d": (_product2d, set()),
    "kink1d": (_kink1d, set()),
}


def catalog_names() -> list[str]:
    return sorted(_CATALOG)


def catalog_params(name: str) -> set[str]:
    if name not in _CATALOG:
        raise UnknownFlux(name)
    return set(_CATALOG[name][1])


def catalog_lookup(name: str, params: dict | None = None) -> FluxSpec:
    """Return the registered flux, or raise UnknownFlux."""
    if name not in _CATALOG:
        raise UnknownFlux(name)
    builder, allowed = _CATALOG[name]
    params = dict(params or {})
    unknown = set(params) - allowed
    if unknown:
        raise UnknownFlux(f"{name}: unknown parameter(s) {sorted(unknown)}")
    return builder(params)


def _ball_lattice(R: float, dim: int, n_per_axis: int) -> Array:
    """Deterministic lattice covering the closed ball B_R; always includes 0
    and the axis endpoints so sampled sups anchor at the same points as the
    lattice refines."""
    axis = np.linspace(-R, R, n_per_axis)
    if dim == 1:
        return axis[:, None]
    xs, ys = np.meshgrid(axis, axis, indexing="ij")
    pts = np.stack([xs.ravel(), ys.ravel()], axis=-1)
    keep = np.sqrt((pts ** 2).sum(axis=-1)) <= R + 1e-15
    return pts[keep]


def _lipschitz_estimate(flux: FluxSpec, R: float, M: float, n: int) -> float:
    # odd counts keep 0 and the endpoints on every refinement level
    n_x = n if flux.dim == 1 else max(33, int(np.sqrt(n)) | 1)
    pts = _ball_lattice(R, flux.dim, n_x)
    ks = np.linspace(-M, M, n)
    fv = flux.eval(pts[:, None, :], ks[None, :])          # (npts, nk, d)
    if not np.all(np.isfinite(fv)):
        raise NonFiniteFlux(f"{flux.name}: non-finite values on sample set")
    best = 0.0
    stride = 1
    while stride < n:
        df = fv[:, stride:, :] - fv[:, :-stride, :]
        dk = ks[stride:] - ks[:-stride]
        if dk.size:
            quot = np.sqrt((df ** 2).sum(axis=-1)) / dk[None, :]
            best = max(best, float(quot.max()))
        stride *= 2
    dkv = flux.dk(pts[:, None, :], ks[None, :])
    if not np.all(np.isfinite(dkv)):
        raise NonFiniteFlux(f"{flux.name}: non-finite state derivative on sample set")
    best = max(best, float(np.sqrt((dkv ** 2).sum(axis=-1)).max()))
    return best


def lipschitz_constant(flux: FluxSpec, R: float, M: float,
                       base_grid: int = 201) -> float:
    """Sampled sup of |f(x,k)-f(x,k')|/|k-k'| over B_R x [-M, M]^2.

    The grid is doubled until two successive estimates agree within 1%;
    the returned value is the larger of the two, which dominates every
    sampled quotient and the sampled sup of |d_k f|.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    if M < 0:
        raise ValueError("M must be non-negative")
    if M == 0.0:
        fv = flux.eval(_ball_lattice(R, flux.dim, 33), 0.0)
        if not np.all(np.isfinite(fv)):
            raise NonFiniteFlux(f"{flux.name}: non-finite values on sample set")
        return 0.0
    n = base_grid
    prev = _lipschitz_estimate(flux, R, M, n)
    for _ in range(6):
        n = 2 * n - 1
        cur = _lipschitz_estimate(flux, R, M, n)
        if abs(cur - prev) <= 0.01 * max(cur, 1e-300):
            return max(cur, prev)
        prev = cur
    return max(cur, prev)


def uniform_diffquot_deficit(flux: FluxSpec, x, K, radii,
                             n_k: int = 65, n_dir: int = 64) -> list[float]:
    """Sampled sup_k |f(y,k)-f(x,k)-D_xf(x,k)(y-x)|/|y-x| at |y-x| = r.

    One deficit per radius.  For continuously differentiable catalog entries
    the sequence decays to zero as the radii do; the caller asserts trends.
    """
    if flux.is_singular(x):
        raise SingularPoint(f"{flux.name}: x = {x} is a declared singular point")
    radii = [float(r) for r in radii]
    if any(r <= 0 for r in radii):
        raise ValueError("radii must be positive")
    x0 = as_points(x, flux.dim).reshape(flux.dim)
    ks = np.linspace(float(K[0]), float(K[1]), n_k)
    if flux.dim == 1:
        dirs = np.array([[-1.0], [1.0]])
    else:
        th = np.linspace(0.0, 2.0 * np.pi, n_dir, endpoint=False)
        dirs = np.stack([np.cos(th), np.sin(th)], axis=-1)
    # Jacobian rows at x: J[i, :] = grad of component i
    jac = np.stack([flux.grad_x_components(x0, ks, i) for i in range(flux.dim)],
                   axis=-2)                                  # (nk, d, d)
    fx = flux.eval(x0, ks)                                   # (nk, d)
    out = []
    for r in radii:
        ys = x0[None, :] + r * dirs                          # (nd, d)
        fy = flux.eval(ys[:, None, :], ks[None, :])          # (nd, nk, d)
        lin = np.einsum("kij,nj->nki", jac, ys - x0[None, :])
        rem = fy - fx[None, :, :] - lin
        out.append(float(np.sqrt((rem ** 2).sum(axis=-1)).max() / r))
    return out
