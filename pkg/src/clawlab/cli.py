"""Command-line experiment runner.

Subcommands::

    clawlab catalog list
    clawlab run <config> [--force]
    clawlab study <config> --levels N [--force]
    clawlab verify <field> [<field2>] --check <kind> --flux <name> [--set k=v]

Run directories are append-only (``--force`` to overwrite), contain a copy
of the config, all GridField files (CSV + slabs), one JSON report per
check, contraction-profile CSVs, SVG plots, and a summary table.  A FAILED
marker file flags partial output after an error.  The environment variable
``CLAWLAB_OUT`` sets the root for relative output directories.  Exit code 0
iff every check passed.
"""

from __future__ import annotations

import argparse
import os
import shutil
import sys
import traceback
from pathlib import Path

import numpy as np

from . import svgplot
from .config import CheckSpec, ExperimentConfig, load_config
from .entropy import default_k0_sweep, make_kruzkov_pair, make_smooth_pair
from .errors import ClawError, ConfigError
from .flux import catalog_lookup, catalog_names, lipschitz_constant
from .grids import GridField, load_field, write_csv, write_slabs
from .mollifiers import ConeSpec, bump_test_function, contraction_test_function
from .solver import (SchemeConfig, exact_riemann_burgers, solve, solve_pair)
from .verifier import (ResidualReport, cone_contraction_profile,
                       doubling_diagnostics, entropy_residual,
                       find_smooth_samples, global_contraction_check, kato_lhs,
                       uniqueness_experiment, write_profile_csv)


def _scheme_config(cfg: ExperimentConfig) -> SchemeConfig:
    g, s = cfg.grid, cfg.scheme
    return SchemeConfig(lo=g.lo, hi=g.hi, nx=g.nx, t_end=g.t_end,
                        scheme=s.kind, cfl=s.cfl, boundary=s.boundary,
                        store_every=g.store_every, dim=g.dim,
                        viscosity=s.viscosity)


def _resolve_outdir(cfg_dir: str, override: str | None) -> Path:
    p = Path(override) if override else Path(cfg_dir)
    if not p.is_absolute():
        root = os.environ.get("CLAWLAB_OUT", "")
        if root:
            p = Path(root) / p
    return p


def _prepare_dir(outdir: Path, force: bool) -> None:
    if outdir.exists() and any(outdir.iterdir()):
        if not force:
            raise ConfigError(
                f"output directory {outdir} exists and is not empty "
                "(run directories are append-only; pass --force to overwrite)")
        shutil.rmtree(outdir)
    outdir.mkdir(parents=True, exist_ok=True)


def _snapshot_plot(field: GridField, path: Path, title: str) -> None:
    if field.dim != 1:
        return
    picks = sorted({0, len(field.times) // 2, len(field.times) - 1})
    series = [(field.centers, field.data[n], f"t={field.times[n]:.3g}")
              for n in picks]
    svgplot.line_plot(path, series, title=title, xlabel="x", ylabel="u")


def _run_check(check: CheckSpec, cfg: ExperimentConfig, flux, u, v, outdir: Path):
    p = check.params
    extras = []

    if check.kind == "entropy_inequality":
        g = cfg.grid
        center = p.get("phi_center", 0.5 * (g.lo + g.hi))
        radius = p.get("phi_radius", 0.2 * (g.hi - g.lo))
        t0 = p.get("phi_t0", 0.2 * g.t_end)
        t1 = p.get("phi_t1", 0.8 * g.t_end)
        phi = bump_test_function(np.full(g.dim, center), radius, t0, t1, dim=g.dim)
        m = max(u.bound_M, 1e-12)
        k0s = default_k0_sweep(m, p.get("k0_count", 9))
        pairs = [make_kruzkov_pair(flux, k0) for k0 in k0s]
        pairs += [make_smooth_pair(flux, 0.0, n)
                  for n in p.get("smooth_n", [4, 16, 64])]
        reports = [entropy_residual(u, flux, pair, phi, c_tol=p.get("c_tol"))
                   for pair in pairs]
        worst = min(reports, key=lambda r: r.value - (-r.tolerance))
        worst.metadata["sweep"] = [
            {"pair": r.metadata["pair"], "value": r.value,
             "tolerance": r.tolerance, "passed": r.passed} for r in reports]
        worst.metadata["sweep_note"] = (
            "finite sweep of reference states; a proxy for the inequality "
            "over every admissible entropy pair")
        worst.passed = all(r.passed for r in reports)
        return worst, extras

    if check.kind == "kato":
        R = p["r"]
        M = max(u.bound_M, v.bound_M)
        N = lipschitz_constant(flux, R, M)
        cone = ConeSpec(R=R, N=N, dim=cfg.grid.dim, horizon=cfg.grid.t_end)
        tmax = cone.t_max
        rho = p.get("rho", 0.25 * tmax)
        tau = p.get("tau", 0.75 * tmax)
        h = p.get("h", 0.5 * min(rho, tmax - tau))
        eps = p.get("eps", 0.1 * R)
        psi = contraction_test_function(cone, rho, tau, h, eps)
        return kato_lhs(u, v, flux, psi, c_tol=p.get("c_tol")), extras

    if check.kind == "cone_contraction":
        profile, report = cone_contraction_profile(u, v, flux, p["r"],
                                                   c_cal=p.get("c_cal"))
        csv_path = outdir / f"profile_{check.name}.csv"
        write_profile_csv(csv_path, profile)
        svg_path = outdir / f"profile_{check.name}.svg"
        svgplot.line_plot(svg_path,
                          [([r[0] for r in profile], [r[2] for r in profile],
                            "L1 mass")],
                          title="shrinking-ball L1 distance", xlabel="t",
                          ylabel="L1 mass")
        extras += [csv_path, svg_path]
        return report, extras

    if check.kind == "global_contraction":
        report = global_contraction_check(u, v, flux, p["r_list"],
                                          c_cal=p.get("c_cal"))
        csv_path = outdir / f"profile_{check.name}.csv"
        rows = list(zip(report.metadata["times"],
                        [np.inf] * len(report.metadata["times"]),
                        report.metadata["masses"]))
        with open(csv_path, "w") as fh:
            fh.write("t,radius,l1_mass\n")
            for t, _, mass in rows:
                fh.write(f"{t:.17g},inf,{mass:.17g}\n")
        extras.append(csv_path)
        return report, extras

    if check.kind == "uniqueness":
        base = _scheme_config(cfg)
        variants = [SchemeConfig(lo=base.lo, hi=base.hi, nx=base.nx,
                                 t_end=base.t_end, cfl=c, boundary=base.boundary,
                                 store_every=10 ** 9, dim=base.dim)
                    for c in p.get("cfl_list", [0.9, 0.45])]
        coeff = p.get("viscous_coeff", 2.0)
        if coeff > 0:
            dx = (base.hi - base.lo) / base.nx
            variants.append(SchemeConfig(
                lo=base.lo, hi=base.hi, nx=base.nx, t_end=base.t_end,
                cfl=base.cfl, boundary=base.boundary, store_every=10 ** 9,
                dim=base.dim, scheme="viscous", viscosity=coeff * dx))
        oracle = None
        ini = cfg.initial_data
        if cfg.flux_name == "burgers1d" and ini.kind == "riemann":
            def oracle(pts, _ini=ini, _t=base.t_end):
                return exact_riemann_burgers(
                    _ini.params["ul"], _ini.params["ur"],
                    pts[..., 0] - _ini.params.get("x0", 0.0), _t)
        return uniqueness_experiment(
            flux, ini, variants, center=p.get("center"),
            radius=p.get("radius"), exact_at_t_end=oracle,
            min_ratio=p.get("min_ratio", 1.5)), extras

    if check.kind == "doubling":
        eps_list = p.get("eps_list", [0.1, 0.05, 0.025])
        count = p.get("points", 10)
        t_sample = p.get("t_sample", 0.5 * cfg.grid.t_end)
        lev = int(np.argmin(np.abs(u.times - t_sample)))
        tstar = float(u.times[lev])
        scale = max(np.abs(np.diff(u.data[0])).max(),
                    np.abs(np.diff(v.data[0])).max())
        margin = int(np.ceil(max(eps_list) / u.dx)) + 2
        xs = find_smooth_samples(u, v, lev, count, 10.0 * scale,
                                 margin_cells=margin, seed=cfg.seed)
        table = doubling_diagnostics(u, v, flux, eps_list,
                                     [(float(x), tstar) for x in xs])
        dev = table["max_deviation"]
        trending = all(
            all(a >= b - 1e-14 for a, b in zip(dev[key], dev[key][1:]))
            for key in dev)
        worst = float(max(dev[key][-1] for key in dev))
        report = ResidualReport(
            kind="doubling", value=worst, tolerance=float("nan"),
            passed=trending,
            metadata={"eps": eps_list, "seed": cfg.seed,
                      "samples": table["samples"],
                      "max_deviation": {k: list(map(float, d))
                                        for k, d in dev.items()}})
        return report, extras

    raise ConfigError(f"unhandled check kind {check.kind!r}")


def run_experiment(cfg: ExperimentConfig, outdir: Path) -> list[ResidualReport]:
    (outdir / "config.cfg").write_text(cfg.to_text())
    try:
        flux = catalog_lookup(cfg.flux_name, cfg.flux_params)
        scheme_cfg = _scheme_config(cfg)
        if cfg.initial_data2 is not None:
            u, v = solve_pair(flux, cfg.initial_data, cfg.initial_data2,
                              scheme_cfg)
        else:
            u = solve(flux, cfg.initial_data, scheme_cfg)
            v = None
        write_csv(u, outdir / "u.csv")
        write_slabs(outdir / "u_slabs", u)
        _snapshot_plot(u, outdir / "u_snapshots.svg", "solution snapshots")
        if v is not None:
            write_csv(v, outdir / "v.csv")
            write_slabs(outdir / "v_slabs", v)
            _snapshot_plot(v, outdir / "v_snapshots.svg", "second solution")

        reports = []
        for check in cfg.checks:
            report, _ = _run_check(check, cfg, flux, u, v, outdir)
            report.metadata["check_name"] = check.name
            report.metadata["seed"] = cfg.seed
            report.write(outdir / f"report_{check.name}.json")
            reports.append((check, report))

        lines = [f"{'name':<18} {'kind':<22} {'value':>14} {'tolerance':>14} passed"]
        csv_lines = ["name,kind,value,tolerance,passed"]
        for check, rep in reports:
            lines.append(f"{check.name:<18} {rep.kind:<22} {rep.value:>14.6e} "
                         f"{rep.tolerance:>14.6e} {rep.passed}")
            csv_lines.append(f"{check.name},{rep.kind},{rep.value:.17g},"
                             f"{rep.tolerance:.17g},{rep.passed}")
        (outdir / "summary.txt").write_text("\n".join(lines) + "\n")
        (outdir / "summary.csv").write_text("\n".join(csv_lines) + "\n")
        return [rep for _, rep in reports]
    except Exception:
        (outdir / "FAILED").write_text(traceback.format_exc())
        raise


def _restrict(fine: np.ndarray, factor: int) -> np.ndarray:
    """Average fine cells onto the coarse grid (cell-average restriction)."""
    n = fine.shape[0] // factor
    if fine.ndim == 1:
        return fine[:n * factor].reshape(n, factor).mean(axis=1)
    return fine[:n * factor, :n * factor].reshape(
        n, factor, n, factor).mean(axis=(1, 3))


def run_study(cfg: ExperimentConfig, levels: int, outdir: Path) -> int:
    """Halve dx per level; report L1 errors against the exact oracle (or the
    finest grid) and contraction-violation shrink ratios."""
    (outdir / "config.cfg").write_text(cfg.to_text())
    try:
        flux = catalog_lookup(cfg.flux_name, cfg.flux_params)
        base = _scheme_config(cfg)
        runs = []
        for lev in range(levels):
            factor = 2 ** lev
            sc = SchemeConfig(lo=base.lo, hi=base.hi, nx=base.nx * factor,
                              t_end=base.t_end, scheme=base.scheme,
                              cfl=base.cfl, boundary=base.boundary,
                              store_every=10 ** 9, dim=base.dim,
                              viscosity=base.viscosity / factor
                              if base.scheme == "viscous" else base.viscosity)
            if cfg.initial_data2 is not None:
                u, v = solve_pair(flux, cfg.initial_data, cfg.initial_data2, sc)
            else:
                u, v = solve(flux, cfg.initial_data, sc), None
            runs.append((sc, u, v))

        ini = cfg.initial_data
        exact = None
        if cfg.flux_name == "burgers1d" and ini.kind == "riemann" and base.dim == 1:
            def exact(xs):
                return exact_riemann_burgers(ini.params["ul"], ini.params["ur"],
                                             xs - ini.params.get("x0", 0.0),
                                             base.t_end)
        dxs, errs = [], []
        for lev, (sc, u, _) in enumerate(runs):
            if exact is not None:
                ref = u.data[-1] - exact(u.centers)
            elif lev + 1 < levels:
                # self-convergence: consecutive levels, fine restricted
                ref = u.data[-1] - _restrict(runs[lev + 1][1].data[-1], 2)
            else:
                break
            errs.append(float(np.abs(ref).sum() * u.dx))
            dxs.append(u.dx)
        orders = [float(np.log2(errs[i] / errs[i + 1]))
                  for i in range(len(errs) - 1)
                  if errs[i + 1] > 0]

        viol_rows = []
        for check in cfg.checks:
            if check.kind not in ("cone_contraction", "global_contraction"):
                continue
            per_level = []
            for sc, u, v in runs:
                if v is None:
                    continue
                if check.kind == "cone_contraction":
                    _, rep = cone_contraction_profile(u, v, flux,
                                                      check.params["r"])
                else:
                    rep = global_contraction_check(u, v, flux,
                                                   check.params["r_list"])
                per_level.append(rep.value)
            ratios = [per_level[i] / per_level[i + 1]
                      if per_level[i + 1] > 0 else float("inf")
                      for i in range(len(per_level) - 1)]
            viol_rows.append((check.name, per_level, ratios))

        lines = ["dx,l1_error,order"]
        for i, (dx, e) in enumerate(zip(dxs, errs)):
            o = f"{orders[i - 1]:.3f}" if 0 < i <= len(orders) else ""
            lines.append(f"{dx:.17g},{e:.17g},{o}")
        (outdir / "study.csv").write_text("\n".join(lines) + "\n")
        svgplot.line_plot(outdir / "study.svg",
                          [(dxs, errs, "L1 error"),
                           (dxs, [errs[0] * d / dxs[0] for d in dxs],
                            "first order")],
                          title="refinement study", xlabel="dx",
                          ylabel="L1 error", logx=True, logy=True)
        print(f"{'dx':>12} {'L1 error':>14} {'order':>7}")
        for i, (dx, e) in enumerate(zip(dxs, errs)):
            o = f"{orders[i - 1]:.3f}" if 0 < i <= len(orders) else "-"
            print(f"{dx:>12.5g} {e:>14.6e} {o:>7}")
        for name, per_level, ratios in viol_rows:
            print(f"violations[{name}]: " +
                  ", ".join(f"{v:.3e}" for v in per_level) +
                  "  shrink ratios: " +
                  ", ".join("inf" if not np.isfinite(r) else f"{r:.2f}"
                            for r in ratios))
        return 0
    except Exception:
        (outdir / "FAILED").write_text(traceback.format_exc())
        raise


def cmd_verify(args) -> int:
    flux = catalog_lookup(args.flux, {})
    params = {}
    for kv in args.set or []:
        if "=" not in kv:
            raise ConfigError(f"--set expects key=value, got {kv!r}")
        k, _, v = kv.partition("=")
        try:
            params[k.strip()] = float(v)
        except ValueError:
            params[k.strip()] = v.strip()
    fields = [load_field(p) for p in args.fields]
    u = fields[0]
    v = fields[1] if len(fields) > 1 else None

    if args.check == "entropy_inequality":
        m = max(u.bound_M, 1e-12)
        center = params.get("phi_center", 0.5 * (u.lo + u.hi))
        radius = params.get("phi_radius", 0.2 * (u.hi - u.lo))
        t0 = params.get("phi_t0", float(u.times[0])
                        + 0.2 * float(u.times[-1] - u.times[0]))
        t1 = params.get("phi_t1", float(u.times[0])
                        + 0.8 * float(u.times[-1] - u.times[0]))
        phi = bump_test_function(np.full(u.dim, center), radius, t0, t1,
                                 dim=u.dim)
        k0 = params.get("k0", 0.0)
        rep = entropy_residual(u, flux, make_kruzkov_pair(flux, k0), phi,
                               c_tol=params.get("c_tol"))
    elif args.check == "kato":
        if v is None:
            raise ConfigError("kato check needs two fields")
        R = params.get("r", 0.4 * (u.hi - u.lo))
        N = lipschitz_constant(flux, R, max(u.bound_M, v.bound_M))
        cone = ConeSpec(R=R, N=N, dim=u.dim, horizon=float(u.times[-1]))
        tmax = cone.t_max
        rho = params.get("rho", 0.25 * tmax)
        tau = params.get("tau", 0.75 * tmax)
        h = params.get("h", 0.5 * min(rho, tmax - tau))
        eps = params.get("eps", 0.1 * R)
        rep = kato_lhs(u, v, flux, contraction_test_function(cone, rho, tau,
                                                             h, eps))
    elif args.check == "cone_contraction":
        if v is None:
            raise ConfigError("cone_contraction needs two fields")
        _, rep = cone_contraction_profile(u, v, flux,
                                          params.get("r", 0.4 * (u.hi - u.lo)),
                                          c_cal=params.get("c_cal"))
    elif args.check == "global_contraction":
        if v is None:
            raise ConfigError("global_contraction needs two fields")
        r_list = params.get("r_list", "1,2,4,8")
        if isinstance(r_list, str):
            r_list = [float(s) for s in r_list.split(",")]
        rep = global_contraction_check(u, v, flux, r_list,
                                       c_cal=params.get("c_cal"))
    else:
        raise ConfigError(f"verify does not support check {args.check!r}")
    print(rep.to_json())
    return 0 if rep.passed else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="clawlab",
        description="entropy-solution laboratory for scalar conservation laws")
    sub = parser.add_subparsers(dest="command", required=True)

    p_cat = sub.add_parser("catalog", help="flux catalog operations")
    p_cat.add_argument("action", choices=["list"])

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--force", action="store_true",
                       help="overwrite an existing run directory")
    p_run.add_argument("--out", default=None, help="override output directory")

    p_study = sub.add_parser("study", help="dx-halving refinement study")
    p_study.add_argument("config")
    p_study.add_argument("--levels", type=int, default=3)
    p_study.add_argument("--force", action="store_true")
    p_study.add_argument("--out", default=None)

    p_ver = sub.add_parser("verify", help="run one check on stored fields")
    p_ver.add_argument("fields", nargs="+",
                       help="field files (.csv, .slab, or slab directory)")
    p_ver.add_argument("--check", required=True,
                       choices=["entropy_inequality", "kato",
                                "cone_contraction", "global_contraction"])
    p_ver.add_argument("--flux", required=True)
    p_ver.add_argument("--set", action="append", metavar="KEY=VALUE")

    args = parser.parse_args(argv)
    try:
        if args.command == "catalog":
            for name in catalog_names():
                print(name)
            return 0
        if args.command == "run":
            cfg = load_config(args.config)
            outdir = _resolve_outdir(cfg.output_dir, args.out)
            _prepare_dir(outdir, args.force)
            reports = run_experiment(cfg, outdir)
            print((Path(outdir) / "summary.txt").read_text(), end="")
            print(f"run directory: {outdir}")
            return 0 if all(r.passed for r in reports) else 1
        if args.command == "study":
            if args.levels < 2:
                raise ConfigError("study needs --levels >= 2")
            cfg = load_config(args.config)
            outdir = _resolve_outdir(cfg.output_dir, args.out)
            _prepare_dir(outdir, args.force)
            return run_study(cfg, args.levels, outdir)
        if args.command == "verify":
            return cmd_verify(args)
    except ClawError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
