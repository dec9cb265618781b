"""Command-line front end: experiment orchestration and file emission.

Subcommands: simulate, integrals, gmatrix, bifurcate, monodromy, reproduce.
Exit codes: 0 success, 1 configuration error, 2 numerical failure; errors
are also written as a JSON object to standard error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import acceptance, bifurcation, flow, monodromy, rough, smooth, svgplot
from .config import RunConfig, load_config, parse_vector
from .core import BodyState, Model
from .errors import RollmonoError
from .monodromy import FixedAxis

TWO_PI = 2.0 * math.pi

_PLANES = {
    "p_psi": (Model.SMOOTH, FixedAxis.J1),
    "p_phi": (Model.SMOOTH, FixedAxis.J2),
    "c1": (Model.ROUGH, FixedAxis.J1),
    "c2": (Model.ROUGH, FixedAxis.J2),
}
_DEFAULT_PLANE = {Model.SMOOTH: "p_psi", Model.ROUGH: "c1"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rollmono",
        description="Rolling ellipsoid of revolution: integrals, bifurcation "
                    "diagrams and Poincare-map monodromy.",
    )
    parser.add_argument("--config", help="key-value configuration file")
    parser.add_argument("--model", choices=["smooth", "rough"],
                        help="which rolling problem to use")
    parser.add_argument("--out", help="output directory (default: out)")
    parser.add_argument("--seed", type=int, help="seed for sampled-state runs")
    parser.add_argument("--workers", type=int,
                        help="parallel workers for sweeps (default: "
                             "ROLLMONO_WORKERS or 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one trajectory to CSV")
    p.add_argument("--M", help="initial angular momentum, e.g. 0.1,0,0.157")
    p.add_argument("--gamma", help="initial unit normal, e.g. 0,0.6,0.8")
    p.add_argument("--t-end", type=float, dest="t_end", help="integration time")

    p = sub.add_parser("integrals", help="conservation-drift report over random states")
    p.add_argument("--states", type=int, help="number of random states")
    p.add_argument("--t-end", type=float, dest="t_end", help="integration time")

    p = sub.add_parser("gmatrix", help="fundamental matrix table and det defect")
    p.add_argument("--gamma3", type=float, help="single evaluation abscissa")
    p.add_argument("--grid", type=int, help="table size over (-0.999, 0.999)")

    p = sub.add_parser("bifurcate", help="bifurcation diagram CSV and slice SVGs")
    p.add_argument("--slice", type=float, dest="slice_value",
                   help="plane value for the 2-D slices")

    p = sub.add_parser("monodromy", help="loop winding of the Poincare map")
    p.add_argument("--plane", help="loop plane, e.g. p_psi=0.157 or c2")
    p.add_argument("--enclose", choices=["1", "2", "both"],
                   help="which singular threads the loop encloses")
    p.add_argument("--r0", type=float, help="loop radius")
    p.add_argument("--samples", type=int, help="initial samples along the loop")

    p = sub.add_parser("reproduce", help="run the acceptance battery")
    p.add_argument("--criteria", help="comma-separated criterion ids (default all)")
    return parser


def _emit_error(exc: BaseException, kind: str) -> None:
    payload = {"error": type(exc).__name__, "kind": kind, "message": str(exc)}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def _merge(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    overrides = {
        "model": args.model,
        "out": args.out,
        "seed": args.seed,
        "workers": args.workers,
        "t_end": getattr(args, "t_end", None),
        "n_states": getattr(args, "states", None),
        "M": getattr(args, "M", None),
        "gamma": getattr(args, "gamma", None),
        "slice_value": getattr(args, "slice_value", None),
        "enclose": getattr(args, "enclose", None),
        "radius": getattr(args, "r0", None),
        "samples": getattr(args, "samples", None),
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    plane = getattr(args, "plane", None)
    if plane:
        name, sep, value = plane.partition("=")
        cfg.plane = name.strip()
        if sep:
            cfg.plane_value = float(value)
    return cfg


def _workers(cfg: RunConfig) -> int:
    if cfg.workers > 0:
        return cfg.workers
    return monodromy.default_workers()


def write_csv(path, header: str, rows) -> None:
    """CSV with a one-line header naming columns and units, %.17g payload."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(f"{float(v):.17g}" for v in row) + "\n")


def write_json(path, payload) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _model_field(model: Model, params):
    mod = smooth if model is Model.SMOOTH else rough
    return lambda s: mod.field(s, params)


def _cmd_simulate(cfg: RunConfig, out: str) -> int:
    params = cfg.body_params()
    model = cfg.model_tag()
    gamma = np.array(parse_vector(cfg.gamma))
    norm = np.linalg.norm(gamma)
    if norm == 0.0:
        raise ValueError("initial gamma must be nonzero")
    state = BodyState(np.array(parse_vector(cfg.M)), gamma / norm)
    traj = flow.integrate(_model_field(model, params), state, (0.0, cfg.t_end),
                          cfg.integrator())
    rows = np.column_stack([traj.t, traj.M, traj.gamma, traj.phi])
    write_csv(
        os.path.join(out, "trajectory.csv"),
        "t (time),M1 (ang. momentum),M2 (ang. momentum),M3 (ang. momentum),"
        "gamma1 (1),gamma2 (1),gamma3 (1),phi_unwrapped (rad)",
        rows,
    )
    print(f"trajectory.csv: {len(traj)} samples over t in [0, {cfg.t_end}]")
    return 0


def _cmd_integrals(cfg: RunConfig, out: str) -> int:
    params = cfg.body_params()
    model = cfg.model_tag()
    rng = np.random.default_rng(cfg.seed)
    icfg = cfg.integrator()
    names = ("H", "F1", "F3") if model is Model.SMOOTH else ("H", "C1", "C2")
    worst = dict.fromkeys(names, 0.0)
    for _ in range(cfg.n_states):
        M = rng.uniform(-1.0, 1.0, 3)
        gamma = rng.normal(size=3)
        gamma /= np.linalg.norm(gamma)
        st = BodyState(M, gamma)
        traj = flow.integrate(_model_field(model, params), st, (0.0, cfg.t_end),
                              icfg, track_phi=False)
        if model is Model.SMOOTH:
            ref = (smooth.energy(st, params), float(M @ gamma), float(M[2]))
            series = zip(
                [smooth.energy(traj.state(i), params) for i in range(len(traj))],
                np.einsum("ij,ij->i", traj.M, traj.gamma),
                traj.M[:, 2],
            )
            for h, f1, f3 in series:
                for name, now, start in zip(names, (h, f1, f3), ref):
                    worst[name] = max(worst[name],
                                      abs(now - start) / (1.0 + abs(start)))
        else:
            h0 = rough.energy(st, params)
            c0 = rough.integrals(st, params, 1e-12)
            idx = np.unique(np.linspace(0, len(traj) - 1, 21).astype(int))
            for i in idx:
                s_i = traj.state(i)
                worst["H"] = max(worst["H"],
                                 abs(rough.energy(s_i, params) - h0) / (1.0 + abs(h0)))
                c_i = rough.integrals(s_i, params, 1e-12)
                worst["C1"] = max(worst["C1"],
                                  abs(c_i[0] - c0[0]) / (1.0 + abs(c0[0])))
                worst["C2"] = max(worst["C2"],
                                  abs(c_i[1] - c0[1]) / (1.0 + abs(c0[1])))
    bounds = {"H": 1e-8, "F1": 1e-8, "F3": 1e-8, "C1": 1e-6, "C2": 1e-6}
    report = {
        "model": model.value,
        "n_states": cfg.n_states,
        "t_end": cfg.t_end,
        "seed": cfg.seed,
        "rel_tol": icfg.rel_tol,
        "max_drift": worst,
        "bounds": {k: bounds[k] for k in names},
        "pass": all(worst[k] <= bounds[k] for k in names),
    }
    write_json(os.path.join(out, "integral_drift.json"), report)
    print(json.dumps(report["max_drift"], sort_keys=True))
    return 0 if report["pass"] else 2


def _cmd_gmatrix(cfg: RunConfig, args, out: str) -> int:
    params = cfg.body_params()
    if args.gamma3 is not None:
        grid = np.array([args.gamma3])
    else:
        n = args.grid or 200
        grid = np.linspace(-0.999, 0.999, n)
    rows = []
    worst = 0.0
    for g3 in grid:
        fm = rough.fundamental_matrix(float(g3), params, 1e-12)
        g = fm.entries
        worst = max(worst, fm.det_defect)
        rows.append((g3, g[0, 0], g[0, 1], g[1, 0], g[1, 1], fm.det_defect))
    write_csv(
        os.path.join(out, "gmatrix.csv"),
        "gamma3 (1),G11 (1),G12 (1),G21 (1),G22 (1),det_defect (1)",
        rows,
    )
    write_json(
        os.path.join(out, "gmatrix_report.json"),
        {"points": len(rows), "max_det_defect": worst, "pass": worst <= 1e-8},
    )
    print(f"gmatrix.csv: {len(rows)} rows, max |det G - 1| = {worst:.3e}")
    return 0


def _cmd_bifurcate(cfg: RunConfig, out: str) -> int:
    params = cfg.body_params()
    model = cfg.model_tag()
    j_grid = np.linspace(cfg.j_min, cfg.j_max, cfg.j_points)
    diagram = bifurcation.build_diagram(model, j_grid, j_grid,
                                        (cfg.spin_min, cfg.spin_max),
                                        cfg.spin_points, params)
    write_csv(os.path.join(out, "surface.csv"),
              "j1 (integral),j2 (integral),gamma3 (1),h (energy)",
              diagram.surface)
    curve_rows = []
    for family, curve in zip((1, 2), diagram.curves):
        curve_rows.extend((family, *row) for row in curve.data)
    write_csv(os.path.join(out, "curves.csv"),
              "family (1),spin (ang. momentum),j1 (integral),j2 (integral),h (energy)",
              curve_rows)
    for fixed_is_j1, tag in ((True, "j1"), (False, "j2")):
        sweep = np.linspace(cfg.j_min, cfg.j_max, cfg.slice_points)
        sl = bifurcation.slice_plane(model, fixed_is_j1, cfg.slice_value, sweep,
                                     params)
        order = np.lexsort((sl.surface[:, 2], sl.surface[:, 0]))
        pts = sl.surface[order][:, (0, 2)]
        span = float(pts[:, 1].max() - pts[:, 1].min()) if len(pts) else 1.0
        datasets = [svgplot.Polyline(pts, split_gap=0.25 * span + 1e-9),
                    svgplot.Markers(sl.threads)]
        other = "j2" if fixed_is_j1 else "j1"
        style = svgplot.PlotStyle(
            title=f"{model.value}: slice {tag} = {cfg.slice_value:g}",
            xlabel=other, ylabel="h")
        svgplot.emit_svg(datasets, style, os.path.join(out, f"slice_{tag}.svg"))
    print(f"surface.csv: {len(diagram.surface)} samples; slices at "
          f"{cfg.slice_value:g} emitted")
    return 0


def _monodromy_loop(cfg: RunConfig, params):
    plane = cfg.plane or _DEFAULT_PLANE[cfg.model_tag()]
    if plane not in _PLANES:
        raise ValueError(f"unknown plane {plane!r}; use one of {sorted(_PLANES)}")
    model, axis = _PLANES[plane]
    if cfg.model and Model(cfg.model) is not model:
        raise ValueError(f"plane {plane!r} belongs to the {model.value} model")
    if cfg.enclose == "both":
        center, auto_radius = monodromy.enclosing_center(model, axis,
                                                         cfg.plane_value, params,
                                                         cfg.margin)
        radius = cfg.radius if cfg.radius > 0.0 else auto_radius
    else:
        pole = +1 if cfg.enclose == "1" else -1
        center = monodromy.thread_center(model, axis, cfg.plane_value, pole, params)
        radius = cfg.radius if cfg.radius > 0.0 else 0.05
    loop = monodromy.make_loop(model, axis, center, radius, cfg.samples)
    return model, plane, loop


def _cmd_monodromy(cfg: RunConfig, out: str) -> int:
    params = cfg.body_params()
    model, plane, loop = _monodromy_loop(cfg, params)
    result = monodromy.monodromy_index(model, loop, params, cfg.integrator(),
                                       workers=_workers(cfg), horizon=cfg.horizon)
    payload = {
        "model": model.value,
        "plane": plane,
        "plane_value": cfg.plane_value,
        "enclose": cfg.enclose,
        "center": {"j_varying0": loop.j_varying0, "j_fixed0": loop.j_fixed0,
                   "h0": loop.h0},
        "radius": loop.radius,
        "n_samples": loop.n_samples,
        "k": result.k,
        "closure_defect": result.closure_defect,
        "samples": [[a, d] for a, d in zip(result.alphas, result.dphi)],
    }
    write_json(os.path.join(out, "monodromy.json"), payload)

    wrapped = np.mod(result.dphi, TWO_PI)
    torus_curve = np.column_stack([result.alphas, wrapped])
    style = svgplot.PlotStyle(
        title=f"{model.value}: image of the base cycle, k = {result.k}",
        xlabel="alpha (rad)", ylabel="dphi mod 2pi (rad)",
        xlim=(0.0, TWO_PI), ylim=(0.0, TWO_PI))
    svgplot.emit_svg([svgplot.Polyline(torus_curve, split_gap=math.pi)], style,
                     os.path.join(out, "torus_image.svg"))

    varying = loop.j_varying0 + loop.radius * np.sin(result.alphas)
    rows = np.column_stack([
        result.alphas, wrapped, result.image[:, 0], result.image[:, 1],
        result.image[:, 2], result.image[:, 3], varying,
    ])
    write_csv(
        os.path.join(out, "image3d.csv"),
        "alpha (rad),dphi_mod (rad),gamma1 (1),gamma2 (1),M3 (ang. momentum),"
        "M_dot_gamma (ang. momentum),j_varying (integral)",
        rows,
    )
    for cols, name, labels in (((2, 3), "proj_normal.svg", ("gamma1", "gamma2")),
                               ((2, 6), "proj_axis.svg", ("gamma1", "j_varying"))):
        pts = rows[:, cols]
        style = svgplot.PlotStyle(title=f"{model.value}: return-image projection",
                                  xlabel=labels[0], ylabel=labels[1])
        svgplot.emit_svg([svgplot.Polyline(pts)], style, os.path.join(out, name))
    print(f"k = {result.k}, closure defect = {result.closure_defect:.3e} "
          f"({len(result.alphas)} samples)")
    return 0


def _cmd_reproduce(cfg: RunConfig, args, out: str) -> int:
    subset = None
    if args.criteria:
        subset = {c.strip() for c in args.criteria.split(",") if c.strip()}
    results = acceptance.run_all(cfg.body_params(), workers=_workers(cfg),
                                 subset=subset, log=print)
    write_json(
        os.path.join(out, "acceptance.json"),
        [
            {"criterion": r.ident, "description": r.description,
             "pass": r.passed, "detail": r.detail, "seconds": round(r.seconds, 2)}
            for r in results
        ],
    )
    return 0 if results and all(r.passed for r in results) else 2


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        cfg = _merge(load_config(args.config), args)
        cfg.model_tag()
        out = cfg.out
        os.makedirs(out, exist_ok=True)
    except (ValueError, OSError, KeyError) as exc:
        _emit_error(exc, "config")
        return 1
    try:
        if args.command == "simulate":
            return _cmd_simulate(cfg, out)
        if args.command == "integrals":
            return _cmd_integrals(cfg, out)
        if args.command == "gmatrix":
            return _cmd_gmatrix(cfg, args, out)
        if args.command == "bifurcate":
            return _cmd_bifurcate(cfg, out)
        if args.command == "monodromy":
            return _cmd_monodromy(cfg, out)
        if args.command == "reproduce":
            return _cmd_reproduce(cfg, args, out)
        raise ValueError(f"unknown command {args.command!r}")
    except RollmonoError as exc:
        _emit_error(exc, "numerical")
        return 2
    except (ValueError, OSError) as exc:
        _emit_error(exc, "config")
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
