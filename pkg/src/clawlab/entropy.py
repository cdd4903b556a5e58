"""Entropy pairs (eta, q) and their regularity identities.

Two families are provided.  The smooth family

    eta_n(k) = sqrt((k - k0)^2 + 1/n)

is convex, C^infty, has eta_n'(k0) = 0, and converges uniformly to
|k - k0| at rate n^{-1/2}.  The absolute-value pair

    eta(k) = |k - k0|,   q(x, k) = sign(k - k0) (f(x, k) - f(x, k0))

is the limit family; its flux is closed-form, no quadrature needed.

The entropy flux of a smooth pair is the state integral

    q(x, k) = int_{k0}^{k} eta'(w) d_k f(x, w) dw

and admits the equivalent integration-by-parts representation

    q(x, k) = -int_{k0}^{k} eta''(w) f(x, w) dw
              + eta'(k) f(x, k) - eta'(k0) f(x, k0).

Agreement of the two routes (each computed by independent quadrature) is a
checked identity, not an assumption.

Sign convention throughout: sign(0) = 0 (numpy's convention).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .flux import FluxSpec, as_points
from .quadrature import GAUSS_NODES, GAUSS_WEIGHTS, adaptive_gauss_legendre

Array = np.ndarray


@dataclass(frozen=True)
class SmoothEntropy:
    """A C^2 convex entropy with evaluable first and second derivatives."""

    eta: Callable[[Array], Array]
    eta_prime: Callable[[Array], Array]
    eta_pp: Callable[[Array], Array]


def sqrt_entropy(k0: float, n: int) -> SmoothEntropy:
    """The canonical smoothing sqrt((k-k0)^2 + 1/n) of |k - k0|."""
    a = 1.0 / float(n)

    def eta(k):
        s = np.asarray(k, dtype=float) - k0
        return np.sqrt(s * s + a)

    def eta_prime(k):
        s = np.asarray(k, dtype=float) - k0
        return s / np.sqrt(s * s + a)

    def eta_pp(k):
        s = np.asarray(k, dtype=float) - k0
        return a / (s * s + a) ** 1.5

    return SmoothEntropy(eta, eta_prime, eta_pp)


@dataclass(frozen=True)
class EntropyPair:
    """Entropy eta with its flux q and divergence of q at frozen state.

    ``q(x, k)`` accepts a point batch (..., d) with broadcastable k and
    returns (..., d); ``div_x_q`` returns (...).  ``kind`` is "kruzkov" or
    "smooth"; smooth pairs carry the smoothing index ``n``.
    """

    eta: Callable[[Array], Array]
    eta_prime: Callable[[Array], Array]
    k0: float
    q: Callable[[Array, Array], Array]
    div_x_q: Callable[[Array, Array], Array]
    kind: str
    n: int | None = None

    @property
    def label(self) -> str:
        return f"smooth(n={self.n}, k0={self.k0:g})" if self.kind == "smooth" \
            else f"kruzkov(k0={self.k0:g})"


def q_build_quadrature(flux: FluxSpec, eta_prime, k0: float, x, k: float,
                       tol: float = 1e-10) -> Array:
    """Entropy flux by adaptive quadrature of eta'(w) d_k f(x, w) over [k0, k].

    ``x`` may be a single point or a batch; the refinement is shared across
    the batch (tolerance enforced on the max component).
    """
    pts = as_points(x, flux.dim)
    k = float(k)

    def integrand(w):
        wcol = w.reshape((-1,) + (1,) * (pts.ndim - 1))
        vals = flux.dk(pts[None, ...], wcol)         # (m, ..., d)
        ep = np.asarray(eta_prime(w), dtype=float).reshape(wcol.shape)
        return ep[..., None] * vals

    return adaptive_gauss_legendre(integrand, k0, k, tol=tol)


def q_build_ibp(flux: FluxSpec, entropy: SmoothEntropy, k0: float, x, k: float,
                tol: float = 1e-10) -> Array:
    """Entropy flux via the integration-by-parts route; needs eta''."""
    pts = as_points(x, flux.dim)
    k = float(k)

    def integrand(w):
        wcol = w.reshape((-1,) + (1,) * (pts.ndim - 1))
        fv = flux.eval(pts[None, ...], wcol)
        epp = np.asarray(entropy.eta_pp(w), dtype=float).reshape(wcol.shape)
        return epp[..., None] * fv

    integral = adaptive_gauss_legendre(integrand, k0, k, tol=tol)
    boundary = (np.asarray(entropy.eta_prime(k), dtype=float) * flux.eval(pts, k)
                - np.asarray(entropy.eta_prime(k0), dtype=float) * flux.eval(pts, k0))
    return -integral + boundary


def _geometric_panels(k0: float, k: float, scale: float) -> np.ndarray:
    """Panel edges of [k0, k] geometrically refined toward k0, where the
    smoothed sign function varies on the length scale ``scale``."""
    span = abs(k - k0)
    if span == 0.0:
        return np.array([k0, k])
    s = min(max(scale, 1e-8), span)
    # offsets 0 < s/8 < s/2 < s < 4s < ... < span
    offs = [0.0]
    step = s / 8.0
    while step < span:
        offs.append(step)
        step *= 4.0
    offs.append(span)
    offs = np.unique(np.asarray(offs))
    return k0 + np.sign(k - k0) * offs


def _q_smooth_field(flux: FluxSpec, ent: SmoothEntropy, k0: float, n: int,
                    pts: Array, k: Array) -> Array:
    """Vectorized q(x_i, k_i) for a batch of (point, state) pairs.

    Composite Gauss-Legendre on panels refined toward k0 (where eta_n''
    concentrates); the state integral is remapped per pair onto [0, 1] so a
    single node set serves the whole batch.
    """
    kk = np.broadcast_to(np.asarray(k, dtype=float), pts.shape[:-1]).ravel()
    flat = np.broadcast_to(pts, kk.shape + (flux.dim,)).reshape(-1, flux.dim)
    kmax = float(np.max(np.abs(kk - k0))) if kk.size else 0.0
    edges = _geometric_panels(0.0, 1.0, (1.0 / np.sqrt(n)) / max(kmax, 1e-12))
    total = np.zeros((kk.size, flux.dim))
    span = kk - k0                                   # (np,)
    for a, b in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        t = mid + half * GAUSS_NODES                      # (m,) in [0, 1]
        w = k0 + span[None, :] * t[:, None]          # (m, np)
        vals = flux.dk(flat[None, :, :], w)          # (m, np, d)
        ep = ent.eta_prime(w)
        total += half * np.einsum("m,mp,mpi->pi", GAUSS_WEIGHTS, ep, vals)
    total *= span[:, None]
    return total.reshape(pts.shape[:-1] + (flux.dim,))


def make_smooth_pair(flux: FluxSpec, k0: float, n: int) -> EntropyPair:
    """Entropy pair for eta_n = sqrt((k-k0)^2 + 1/n).

    The flux q is evaluated by quadrature of eta_n' d_k f; the divergence
    uses the integration-by-parts form
        div_x q(x,k) = -int eta_n'' div_x f dw + eta_n'(k) div_x f(x,k),
    which is exact because eta_n'(k0) = 0.
    """
    ent = sqrt_entropy(k0, n)

    def q(x, k):
        pts = as_points(x, flux.dim)
        if np.ndim(k) == 0 and pts.size == flux.dim:
            return q_build_quadrature(flux, ent.eta_prime, k0, pts, float(k))
        return _q_smooth_field(flux, ent, k0, n, pts, k)

    def div_x_q(x, k):
        pts = flux.nudge_off_singular(as_points(x, flux.dim))
        kk = np.broadcast_to(np.asarray(k, dtype=float), pts.shape[:-1]).ravel()
        flat = np.broadcast_to(pts, kk.shape + (flux.dim,)).reshape(-1, flux.dim)
        kmax = float(np.max(np.abs(kk - k0))) if kk.size else 0.0
        edges = _geometric_panels(0.0, 1.0, (1.0 / np.sqrt(n)) / max(kmax, 1e-12))
        span = kk - k0
        integ = np.zeros(kk.size)
        for a, b in zip(edges[:-1], edges[1:]):
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            t = mid + half * GAUSS_NODES
            w = k0 + span[None, :] * t[:, None]
            dv = flux.div_x(flat[None, :, :], w)     # (m, np)
            epp = ent.eta_pp(w)
            integ += half * np.einsum("m,mp,mp->p", GAUSS_WEIGHTS, epp, dv)
        integ *= span
        out = -integ + ent.eta_prime(kk) * flux.div_x(flat, kk)
        return out.reshape(pts.shape[:-1])

    return EntropyPair(ent.eta, ent.eta_prime, float(k0), q, div_x_q,
                       kind="smooth", n=int(n))


def make_kruzkov_pair(flux: FluxSpec, k0: float) -> EntropyPair:
    """Closed-form absolute-value pair at reference state k0."""
    k0 = float(k0)

    def eta(k):
        return np.abs(np.asarray(k, dtype=float) - k0)

    def eta_prime(k):
        return np.sign(np.asarray(k, dtype=float) - k0)

    def q(x, k):
        pts = as_points(x, flux.dim)
        kk = np.asarray(k, dtype=float)
        s = np.sign(kk - k0)
        return s[..., None] * (flux.eval(pts, kk) - flux.eval(pts, k0))

    def div_x_q(x, k):
        pts = flux.nudge_off_singular(as_points(x, flux.dim))
        kk = np.asarray(k, dtype=float)
        s = np.sign(kk - k0)
        return s * (flux.div_x(pts, kk) - flux.div_x(pts, k0))

    return EntropyPair(eta, eta_prime, k0, q, div_x_q, kind="kruzkov")


def kruzkov_limit_deficit(flux: FluxSpec, k0: float, x, k: float,
                          n_list) -> list[float]:
    """|q_n(x,k) - q(x,k)| for each smoothing index n; trends to zero."""
    kz = make_kruzkov_pair(flux, k0)
    target = kz.q(x, k)
    out = []
    for n in n_list:
        ent = sqrt_entropy(k0, int(n))
        qn = q_build_quadrature(flux, ent.eta_prime, k0, x, k)
        out.append(float(np.max(np.abs(qn - target))))
    return out


def kruzkov_div_deficit(flux: FluxSpec, k0: float, x, k: float,
                        n_list) -> list[float]:
    """|div_x q_n(x,k) - div_x q(x,k)| over the smoothing sweep."""
    kz = make_kruzkov_pair(flux, k0)
    target = kz.div_x_q(x, k)
    out = []
    for n in n_list:
        pair = make_smooth_pair(flux, k0, int(n))
        out.append(float(np.max(np.abs(pair.div_x_q(x, k) - target))))
    return out


def leibniz_check(flux: FluxSpec, xi, B, x, h_list) -> list[float]:
    """Differentiation under the integral sign, sampled.

    Compares the central finite difference in x of int_B xi(w) f(x,w) dw
    against int_B xi(w) D_x f(x,w) dw (componentwise, all axes); returns one
    max-norm discrepancy per step h.  Both sides by quadrature.
    """
    if flux.is_singular(x):
        from .errors import SingularPoint
        raise SingularPoint(f"{flux.name}: x = {x} is singular")
    lo, hi = float(B[0]), float(B[1])
    x0 = as_points(x, flux.dim).reshape(flux.dim)

    def moment(pt):
        def integrand(w):
            fv = flux.eval(pt[None, :], w[:, None])          # (m, 1, d) -> squeeze
            xiw = np.asarray(xi(w), dtype=float) + np.zeros_like(w)
            return xiw[:, None] * fv.reshape(len(w), flux.dim)
        return adaptive_gauss_legendre(integrand, lo, hi, tol=1e-12)

    def rhs_jacobian():
        def integrand(w):
            rows = [flux.grad_x_components(x0, w[:, None].ravel(), i)
                    for i in range(flux.dim)]                 # each (m, d)
            jac = np.stack(rows, axis=-2)                     # (m, d, d)
            xiw = np.asarray(xi(w), dtype=float) + np.zeros_like(w)
            return xiw[:, None, None] * jac
        return adaptive_gauss_legendre(integrand, lo, hi, tol=1e-12)

    rhs = rhs_jacobian()
    out = []
    for h in h_list:
        cols = []
        for j in range(flux.dim):
            e = np.zeros(flux.dim)
            e[j] = float(h)
            cols.append((moment(x0 + e) - moment(x0 - e)) / (2.0 * float(h)))
        lhs = np.stack(cols, axis=-1)                         # (d_out, d_axis)
        out.append(float(np.max(np.abs(lhs - rhs))))
    return out


def default_k0_sweep(M: float, count: int = 9) -> np.ndarray:
    """Reference states for 'every entropy pair' proxies: uniform in [-M, M]."""
    return np.linspace(-float(M), float(M), count)
