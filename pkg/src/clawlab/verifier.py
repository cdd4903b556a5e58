"""Numerical verification of entropy and contraction inequalities.

All space-time integrals are midpoint quadratures matched to the solver
grid: the solution is treated as piecewise constant per (cell x level
interval), the test function enters through its lattice values, its time
derivative through forward differences across level intervals and its
gradient through central differences on the cell lattice.  With lattice
differences the quadrature of an exact divergence telescopes to zero, so
constant fields produce residuals at roundoff rather than at O(h^2), and
the discrete sums mirror the summation-by-parts structure of the scheme's
own entropy inequality.  The analytic ``dt``/``grad_x`` callables on
TestFunction are cross-checked against these lattice differences in tests.

Inequalities that hold exactly only in the vanishing-mesh limit are
asserted up to a negative slack C (dx + dt) |support|; C is calibrated per
flux by dx-halving studies and recorded in every report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .entropy import EntropyPair
from .errors import (EmptyCone, GridMismatch, MissingTimeLevels,
                     SampleNearShock, SupportExceedsDomain)
from .flux import FluxSpec, lipschitz_constant
from .grids import GridField
from .mollifiers import Mollifier, TestFunction, omega_value
from .solver import l1_distance_full, l1_distance_on_ball, solve

Array = np.ndarray

_EPS = np.finfo(float).eps


@dataclass
class ResidualReport:
    """Outcome of one verifier task.

    ``value`` is the evaluated integral (inequality kinds) or the worst
    violation (contraction kinds); ``passed`` records exactly the comparison
    ``value >= -tolerance`` or the monotonicity flag.
    """

    kind: str
    value: float
    tolerance: float
    passed: bool
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> str:
        def default(o):
            if isinstance(o, np.ndarray):
                return o.tolist()
            if isinstance(o, (np.floating, np.integer)):
                return o.item()
            return str(o)
        payload = {"kind": self.kind, "value": self.value,
                   "tolerance": self.tolerance, "passed": bool(self.passed),
                   "metadata": self.metadata}
        return json.dumps(payload, indent=2, default=default)

    def write(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")


def _support_levels(field_: GridField, phi: TestFunction):
    """Level intervals overlapping the test-function window, after checking
    the support sits inside the domain with a two-cell margin (needed for
    exact lattice telescoping) and inside the stored time range."""
    lo, hi, t0, t1 = phi.support_box
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    margin = 2.0 * field_.dx
    if np.any(lo < field_.lo + margin) or np.any(hi > field_.hi - margin):
        raise SupportExceedsDomain(
            f"support [{lo}, {hi}] not inside domain "
            f"[{field_.lo}, {field_.hi}] with 2-cell margin")
    times = field_.times
    if t0 < times[0] - 1e-12 or t1 > times[-1] + 1e-12:
        raise SupportExceedsDomain(
            f"support window [{t0}, {t1}] not inside stored range "
            f"[{times[0]}, {times[-1]}]")
    idx = [n for n in range(len(times) - 1)
           if times[n + 1] > t0 + 1e-14 and times[n] < t1 - 1e-14]
    if len(idx) < 2:
        raise MissingTimeLevels(
            f"only {len(idx)} stored intervals overlap window [{t0}, {t1}]")
    return idx


def _lattice_gradient(phi_vals: Array, dx: float, dim: int):
    if dim == 1:
        return [np.gradient(phi_vals, dx)]
    return [np.gradient(phi_vals, dx, axis=0), np.gradient(phi_vals, dx, axis=1)]


def _weak_sum(field_: GridField, phi: TestFunction, eta_at, q_at, source_at=None):
    """Shared space-time quadrature core.

    eta_at(n) -> (cells...); q_at(n) -> (cells..., d); source_at(n) -> (cells...)
    evaluated from slab n; returns the scalar quadrature value.
    """
    levels = _support_levels(field_, phi)
    P = field_.centers_points()
    times = field_.times
    cell = field_.dx ** field_.dim
    value = 0.0
    for n in levels:
        dtn = times[n + 1] - times[n]
        tmid = 0.5 * (times[n] + times[n + 1])
        phi_lo = phi.value(P, times[n])
        phi_hi = phi.value(P, times[n + 1])
        phi_mid = phi.value(P, tmid)
        # time-derivative term: exact telescoping across the level range
        value += cell * float(((phi_hi - phi_lo) * eta_at(n)).sum())
        rest = np.zeros(P.shape[:-1])
        grads = _lattice_gradient(phi_mid, field_.dx, field_.dim)
        qn = q_at(n)
        for a in range(field_.dim):
            rest = rest + grads[a] * qn[..., a]
        if source_at is not None:
            rest = rest + phi_mid * source_at(n)
        value += cell * dtn * float(rest.sum())
    dts = np.diff(times)
    return value, float(np.max(dts[levels]))


def _support_measure(phi: TestFunction) -> float:
    lo, hi, t0, t1 = phi.support_box
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    return float(np.prod(hi - lo) * (t1 - t0))


def entropy_residual(u: GridField, flux: FluxSpec, pair: EntropyPair,
                     phi: TestFunction, c_tol: float | None = None) -> ResidualReport:
    """Weak-form entropy residual of one field against one entropy pair.

    Quadrature of  dt(phi) eta(u) + phi (div_x q - eta'(u) div_x f)
                   + grad(phi) . q(x, u)
    over the support of phi; non-negative up to discretization slack for
    entropy solutions.
    """
    P = flux.nudge_off_singular(u.centers_points())

    def eta_at(n):
        return pair.eta(u.data[n])

    def q_at(n):
        return pair.q(P, u.data[n])

    def source_at(n):
        un = u.data[n]
        return pair.div_x_q(P, un) - pair.eta_prime(un) * flux.div_x(P, un)

    value, dt_used = _weak_sum(u, phi, eta_at, q_at, source_at)
    if c_tol is None:
        c_tol = 10.0 * phi.lip * max(u.bound_M, 1e-12)
    tol = c_tol * (u.dx + dt_used) * _support_measure(phi)
    return ResidualReport(
        kind="entropy_inequality", value=value, tolerance=tol,
        passed=bool(value >= -tol),
        metadata={"flux": flux.name, "pair": pair.label, "nx": u.nx,
                  "dx": u.dx, "dt": dt_used, "c_tol": c_tol})


def kato_lhs(u: GridField, v: GridField, flux: FluxSpec, psi: TestFunction,
             c_tol: float | None = None) -> ResidualReport:
    """Two-solution localized inequality: quadrature of
    dt(psi) |u - v| + grad(psi) . sign(u - v)(f(x,u) - f(x,v))."""
    u.require_compatible(v)
    P = u.centers_points()

    def eta_at(n):
        return np.abs(u.data[n] - v.data[n])

    def q_at(n):
        s = np.sign(u.data[n] - v.data[n])
        return s[..., None] * (flux.eval(P, u.data[n]) - flux.eval(P, v.data[n]))

    value, dt_used = _weak_sum(u, psi, eta_at, q_at)
    if c_tol is None:
        c_tol = 10.0 * psi.lip * max(u.bound_M, v.bound_M, 1e-12)
    tol = c_tol * (u.dx + dt_used) * _support_measure(psi)
    return ResidualReport(
        kind="kato", value=value, tolerance=tol, passed=bool(value >= -tol),
        metadata={"flux": flux.name, "nx": u.nx, "dx": u.dx, "dt": dt_used,
                  "c_tol": c_tol})


def _roundoff_floor(u: GridField, v: GridField) -> float:
    scale = max(u.bound_M, v.bound_M, 1.0) * (u.hi - u.lo) ** u.dim
    return 64.0 * _EPS * scale


def _two_solution_q_radial_excess(u, v, flux, level, radius, N):
    """max over cells in the ball of |unit(x) . q(x,u,v)| - N |u - v|;
    non-positive when the sampled Lipschitz bound dominates."""
    pts = u.centers_points()
    r = np.sqrt((pts ** 2).sum(axis=-1))
    mask = (r <= radius) & (r > 0.5 * u.dx)
    if not np.any(mask):
        return -np.inf
    un, vn = u.data[level][mask], v.data[level][mask]
    pm = pts[mask]
    s = np.sign(un - vn)
    q = s[..., None] * (flux.eval(pm, un) - flux.eval(pm, vn))
    radial = (q * (pm / r[mask][..., None])).sum(axis=-1)
    return float((np.abs(radial) - N * np.abs(un - vn)).max())


def cone_contraction_profile(u: GridField, v: GridField, flux: FluxSpec,
                             R: float, c_cal: float | None = None):
    """L1 mass of |u - v| over the shrinking ball B_{R - tN} per stored level.

    N comes from the sampled Lipschitz constant at the joint bound M.
    Passed iff no consecutive increase exceeds C (dx + dt); C is the
    calibration constant (default 10 M, refinement studies tighten it).
    Returns (profile, report) with profile rows (t, radius, mass).
    """
    u.require_compatible(v)
    M = max(u.bound_M, v.bound_M)
    N = lipschitz_constant(flux, R, M)
    radii = R - u.times * N
    usable = np.where(radii > 0.0)[0]
    if len(usable) < 2:
        raise EmptyCone(f"ball empty from the first level on (R={R}, N={N})")
    profile = []
    excess = -np.inf
    for n in usable:
        mass = l1_distance_on_ball(u, v, float(u.times[n]), 0.0, float(radii[n]))
        excess = max(excess, _two_solution_q_radial_excess(
            u, v, flux, n, float(radii[n]), N))
        profile.append((float(u.times[n]), float(radii[n]), mass))
    masses = np.array([p[2] for p in profile])
    increments = np.diff(masses)
    max_inc = float(increments.max(initial=0.0))
    dt_used = float(np.diff(u.times).max())
    if c_cal is None:
        c_cal = 10.0 * max(M, 1e-12)
    tol = c_cal * (u.dx + dt_used)
    floor = _roundoff_floor(u, v)
    passed = max_inc <= max(tol, floor)
    report = ResidualReport(
        kind="cone_contraction", value=max_inc, tolerance=max(tol, floor),
        passed=bool(passed),
        metadata={"flux": flux.name, "R": R, "N": N, "M": M, "nx": u.nx,
                  "dx": u.dx, "dt": dt_used, "c_cal": c_cal,
                  "flux_bound_excess": excess,
                  "profile_t": [p[0] for p in profile],
                  "profile_radius": [p[1] for p in profile],
                  "profile_mass": [p[2] for p in profile]})
    return profile, report


def global_contraction_check(u: GridField, v: GridField, flux: FluxSpec,
                             R_list, c_cal: float | None = None) -> ResidualReport:
    """Full-domain L1 distance must be non-increasing (within slack) for
    every stored pair rho <= tau; also reports the sampled N(R)/R sequence
    whose decay to zero is the hypothesis of the global statement."""
    u.require_compatible(v)
    M = max(u.bound_M, v.bound_M)
    n_over_r = [lipschitz_constant(flux, float(R), M) / float(R) for R in R_list]
    masses = np.array([l1_distance_full(u, v, float(t)) for t in u.times])
    running_min = np.minimum.accumulate(masses)
    worst = float((masses - running_min).max())
    dt_used = float(np.diff(u.times).max())
    if c_cal is None:
        c_cal = 10.0 * max(M, 1e-12)
    tol = c_cal * (u.dx + dt_used)
    floor = _roundoff_floor(u, v)
    passed = worst <= max(tol, floor)
    return ResidualReport(
        kind="global_contraction", value=worst, tolerance=max(tol, floor),
        passed=bool(passed),
        metadata={"flux": flux.name, "M": M, "R_list": list(map(float, R_list)),
                  "N_over_R": n_over_r, "nx": u.nx, "dx": u.dx,
                  "dt": dt_used, "c_cal": c_cal,
                  "masses": masses.tolist(), "times": u.times.tolist()})


def uniqueness_experiment(flux: FluxSpec, u0, seeds, center: float | None = None,
                          radius: float | None = None, exact_at_t_end=None,
                          min_ratio: float = 1.5,
                          oracle_min_ratio: float = 1.4) -> ResidualReport:
    """Run every scheme variant from the same data at two grid levels and
    require pairwise L1 distances at t_end to shrink by >= min_ratio under
    dx halving (all variants chase the same limit).  With an oracle the
    per-variant errors must shrink by >= oracle_min_ratio as well.
    """
    seeds = list(seeds)
    if len(seeds) < 2:
        raise ValueError("need at least two scheme variants")
    t_end = seeds[0].t_end
    if any(abs(s.t_end - t_end) > 1e-12 for s in seeds):
        raise ValueError("variants must share t_end")
    if any(s.nx != seeds[0].nx or s.lo != seeds[0].lo or s.hi != seeds[0].hi
           for s in seeds):
        raise ValueError("variants must share the grid")
    if center is None:
        center = 0.5 * (seeds[0].lo + seeds[0].hi)
    if radius is None:
        radius = 0.25 * (seeds[0].hi - seeds[0].lo)

    def run_level(configs):
        # variants may take different time steps, so only the final slabs
        # (all landing exactly on t_end) are compared
        fields = [solve(flux, u0, c) for c in configs]
        for f in fields[1:]:
            if not fields[0].same_grid(f):
                raise GridMismatch("variants produced different grids")
        pts = fields[0].centers_points()
        r = np.sqrt(((pts - center) ** 2).sum(axis=-1))
        mask = r <= radius
        cell = fields[0].dx ** fields[0].dim
        npairs = len(fields)
        dist = np.zeros((npairs, npairs))
        for i in range(npairs):
            for j in range(i + 1, npairs):
                d = float(np.abs(fields[i].data[-1]
                                 - fields[j].data[-1])[mask].sum() * cell)
                dist[i, j] = dist[j, i] = d
        oracle = None
        if exact_at_t_end is not None:
            exact = np.asarray(exact_at_t_end(pts), dtype=float)
            oracle = [float((np.abs(f.data[-1] - exact)[mask]).sum() * cell)
                      for f in fields]
        return dist, oracle

    coarse, oracle_c = run_level(seeds)
    fine, oracle_f = run_level([s.refined(2) for s in seeds])
    floor = 64.0 * _EPS * max(1.0, radius)
    iu = np.triu_indices(len(seeds), k=1)
    ratios = []
    passed = True
    for dc, df in zip(coarse[iu], fine[iu]):
        if df <= floor and dc <= floor:
            ratios.append(float("inf"))
            continue
        ratios.append(dc / max(df, floor))
        if df > max(dc / min_ratio, floor):
            passed = False
    oracle_ratios = None
    if oracle_c is not None:
        oracle_ratios = [c / max(f, floor) for c, f in zip(oracle_c, oracle_f)]
        if any(r < oracle_min_ratio for r in oracle_ratios):
            passed = False
    return ResidualReport(
        kind="uniqueness", value=float(fine[iu].max(initial=0.0)),
        tolerance=min_ratio, passed=bool(passed),
        metadata={"flux": flux.name, "pairwise_coarse": coarse[iu].tolist(),
                  "pairwise_fine": fine[iu].tolist(), "ratios": ratios,
                  "oracle_coarse": oracle_c, "oracle_fine": oracle_f,
                  "oracle_ratios": oracle_ratios,
                  "schemes": [f"{s.scheme}(cfl={s.cfl}, eps={s.viscosity})"
                              for s in seeds],
                  "nx_levels": [seeds[0].nx, 2 * seeds[0].nx]})


def find_smooth_samples(u: GridField, v: GridField, level: int, count: int,
                        jump_threshold: float, margin_cells: int = 4,
                        seed: int = 20260809):
    """Deterministically pick cell-center sample points away from detected
    jumps at the given level (1-d)."""
    flags = np.zeros(u.nx, dtype=bool)
    for f in (u, v):
        jumps = np.abs(np.diff(f.data[level]))
        bad = np.where(jumps > jump_threshold)[0]
        for b in bad:
            lo = max(0, b - margin_cells)
            hi = min(u.nx, b + margin_cells + 2)
            flags[lo:hi] = True
    flags[:margin_cells] = True
    flags[-margin_cells:] = True
    ok = np.where(~flags)[0]
    if len(ok) < count:
        raise SampleNearShock("not enough smooth cells at the requested level")
    rng = np.random.default_rng(seed)
    picked = np.sort(rng.choice(ok, size=count, replace=False))
    return u.centers[picked]


def _jump_scale(u: GridField, v: GridField) -> float:
    s = 0.0
    for f in (u, v):
        if f.nx > 1:
            s = max(s, float(np.abs(np.diff(f.data[0],
                                            axis=0)).max()))
    return s


def doubling_diagnostics(u: GridField, v: GridField, flux: FluxSpec,
                         eps_list, sample_points, jump_factor: float = 10.0):
    """Smoothed two-solution quantities at sample points versus their
    concentration limits.

    For each eps the four integrals against omega_eps(t-s) rho_eps(x-y)
    (value, flux, divergence difference, and the gradient-weighted flux
    increment) are quadratured over (y, s) and compared with their limits
    |u-v|, q(x,u,v), div_x q(x,u,v) and -div_x q(x,u,v) at the sample point.
    Deviations must trend down in eps at smooth points; sampling at a
    detected jump raises SampleNearShock.
    """
    u.require_compatible(v)
    if u.dim != 1:
        raise ValueError("doubling diagnostics implemented for 1-d fields")
    eps_list = [float(e) for e in eps_list]
    samples = [(float(x), float(t)) for (x, t) in sample_points]
    threshold = jump_factor * _jump_scale(u, v)
    centers = u.centers
    times = u.times
    dts = np.gradient(times)
    cell = u.dx
    P = u.centers_points()
    Pn = flux.nudge_off_singular(P)

    n_e, n_s = len(eps_list), len(samples)
    dev = {key: np.zeros((n_e, n_s)) for key in ("I1", "I2", "I3", "I4")}
    raw = {key: np.zeros((n_e, n_s)) for key in ("I1", "I2", "I3", "I4")}
    limits = {key: np.zeros(n_s) for key in ("I1", "I2", "I3", "I4")}

    for j, (xs, ts) in enumerate(samples):
        lev = u.level_index(ts)
        ci = int(np.clip(round((xs - u.lo) / u.dx - 0.5), 0, u.nx - 1))
        window = slice(max(0, ci - 3), min(u.nx, ci + 4))
        for f in (u, v):
            if np.abs(np.diff(f.data[lev][window])).max(initial=0.0) > threshold:
                raise SampleNearShock(f"sample at x={xs}, t={ts} sits near a jump")
        ustar = float(u.data[lev][ci])
        vstar = float(v.data[lev][ci])
        x0 = np.array([[xs]])
        s0 = np.sign(ustar - vstar)
        limits["I1"][j] = abs(ustar - vstar)
        limits["I2"][j] = s0 * (flux.eval(x0, ustar)
                                - flux.eval(x0, vstar))[..., 0].item()
        div_u = flux.div_x(flux.nudge_off_singular(x0), ustar).item()
        div_v = flux.div_x(flux.nudge_off_singular(x0), vstar).item()
        limits["I3"][j] = s0 * (div_u - div_v)
        limits["I4"][j] = -limits["I3"][j]

        for e, eps in enumerate(eps_list):
            rho = Mollifier(1, eps)
            lmask = np.where(np.abs(times - ts) < eps)[0]
            if len(lmask) < 3:
                raise MissingTimeLevels(
                    f"need stored levels within {eps} of t={ts}")
            cmask = np.abs(centers - xs) < eps
            ym = centers[cmask][:, None]
            ymn = Pn[cmask]
            wx = rho.value((xs - ym))
            fy_u = flux.eval(ym, ustar)[..., 0]
            fx_u = flux.eval(x0, ustar)[..., 0].item()
            div_y_u = flux.div_x(ymn, ustar)
            grad_rho = rho.grad((xs - ym))[..., 0] * (-1.0)   # d/dy of rho(x-y)
            acc = {key: 0.0 for key in ("I1", "I2", "I3", "I4")}
            for n in lmask:
                wt = float(omega_value(eps, ts - times[n])) * dts[n]
                if wt == 0.0:
                    continue
                vy = v.data[n][cmask]
                sgn = np.sign(ustar - vy)
                fx_v = flux.eval(x0, vy)[..., 0]
                fy_v = flux.eval(ym, vy)[..., 0]
                div_x_v = flux.div_x(
                    flux.nudge_off_singular(np.full((len(vy), 1), xs)), vy)
                q_at_x = sgn * (fx_u - fx_v)
                q_at_y = sgn * (fy_u - fy_v)
                acc["I1"] += wt * float((wx * np.abs(ustar - vy)).sum()) * cell
                acc["I2"] += wt * float((wx * q_at_x).sum()) * cell
                acc["I3"] += wt * float(
                    (wx * sgn * (div_y_u - div_x_v)).sum()) * cell
                acc["I4"] += wt * float((grad_rho * (q_at_y - q_at_x)).sum()) * cell
            for key in acc:
                raw[key][e, j] = acc[key]
                dev[key][e, j] = abs(acc[key] - limits[key][j])
    return {"eps": eps_list, "samples": samples, "limits": limits,
            "raw": raw, "deviation": dev,
            "max_deviation": {key: dev[key].max(axis=1) for key in dev}}


def write_profile_csv(path, profile) -> None:
    with open(Path(path), "w") as fh:
        fh.write("t,radius,l1_mass\n")
        for t, r, m in profile:
            fh.write(f"{t:.17g},{r:.17g},{m:.17g}\n")
