"""User-runnable acceptance battery.

Each criterion is a self-contained check built on the public module APIs
(no private hooks), returning a pass/fail record with a one-line detail.
The CLI `reproduce` subcommand and the test suite both run this battery.
"""
from __future__ import annotations

import os
import time
from dataclasses import dataclass

import numpy as np

from . import bifurcation, flow, monodromy, rough, smooth
from .core import BodyParams, BodyState, DEFAULT_PARAMS, Model, rotate_about_axis
from .monodromy import FixedAxis

PLANE_VALUE = 0.157
SINGLE_RADIUS = 0.05
LOOP_SAMPLES = 128


@dataclass
class CriterionResult:
    ident: str
    description: str
    passed: bool
    detail: str
    seconds: float


def _default_workers(workers):
    if workers is not None:
        return workers
    env = os.environ.get("ROLLMONO_WORKERS")
    if env:
        return max(1, int(env))
    return max(1, min(4, os.cpu_count() or 1))


def _k(model, axis, center, radius, params, workers, n=LOOP_SAMPLES, base_phi=0.0):
    loop = monodromy.make_loop(model, axis, center, radius, n_samples=n)
    res = monodromy.monodromy_index(model, loop, params, workers=workers,
                                    base_phi=base_phi)
    return res.k, res.closure_defect


def _loop_table(model, params, workers, plane_value=PLANE_VALUE):
    """(k1, k2, k12) for both plane families, with the worst closure defect."""
    out = {}
    worst = 0.0
    for axis in (FixedAxis.J1, FixedAxis.J2):
        ks = []
        for pole in (+1, -1):
            center = monodromy.thread_center(model, axis, plane_value, pole, params)
            k, defect = _k(model, axis, center, SINGLE_RADIUS, params, workers)
            worst = max(worst, defect)
            ks.append(k)
        center, radius = monodromy.enclosing_center(model, axis, plane_value, params)
        k, defect = _k(model, axis, center, radius, params, workers)
        worst = max(worst, defect)
        ks.append(k)
        out[axis] = tuple(ks)
    return out, worst


def _check_table(table):
    """The paper's monodromy pattern: (1,1,2) in the j1 plane, (1,1,0) in j2."""
    k1, k2, k12 = table[FixedAxis.J1]
    ok = abs(k1) == 1 and k2 == k1 and k12 == k1 + k2 and abs(k12) == 2
    p1, p2, p12 = table[FixedAxis.J2]
    ok = ok and abs(p1) == 1 and p2 == -p1 and p12 == 0 and p12 == p1 + p2
    return ok


def criterion_1(params, cfg, workers, rng):
    table, worst = _loop_table(Model.SMOOTH, params, workers)
    ok = _check_table(table) and worst <= 0.05
    detail = (
        f"j1-plane k={table[FixedAxis.J1]}, j2-plane k={table[FixedAxis.J2]} "
        f"(expected |k| (1,1,2)/(1,1,0)), max closure defect {worst:.2e}"
    )
    return ok, detail


def criterion_2(params, cfg, workers, rng):
    table, worst = _loop_table(Model.ROUGH, params, workers)
    ok = _check_table(table) and worst <= 0.05
    detail = (
        f"c1-plane k={table[FixedAxis.J1]}, c2-plane k={table[FixedAxis.J2]} "
        f"(expected |k| (1,1,2)/(1,1,0)), max closure defect {worst:.2e}"
    )
    return ok, detail


def criterion_3(params, cfg, workers, rng):
    h0 = params.m * params.g * params.b3
    k_psi, d1 = _k(Model.SMOOTH, FixedAxis.J1, (0.0, 0.0, h0), SINGLE_RADIUS,
                   params, workers)
    k_phi, d2 = _k(Model.SMOOTH, FixedAxis.J2, (0.0, 0.0, h0), SINGLE_RADIUS,
                   params, workers)
    ok = abs(k_psi) == 2 and k_phi == 0 and max(d1, d2) <= 0.05
    detail = f"double-pinch loops: j1-plane k={k_psi}, j2-plane k={k_phi}"
    return ok, detail


def _random_state(rng):
    M = rng.uniform(-1.0, 1.0, 3)
    gamma = rng.normal(size=3)
    gamma /= np.linalg.norm(gamma)
    return BodyState(M, gamma)


def criterion_4(params, cfg, workers, rng):
    n_states, t_end = 20, 100.0
    worst = {"H": 0.0, "F1": 0.0, "F3": 0.0, "rough H": 0.0, "C": 0.0}
    for _ in range(n_states):
        st = _random_state(rng)
        h0 = smooth.energy(st, params)
        f1 = float(st.M @ st.gamma)
        f3 = float(st.M[2])
        traj = flow.integrate(lambda s: smooth.field(s, params), st, (0.0, t_end),
                              cfg, track_phi=False)
        hs = np.array([smooth.energy(traj.state(i), params) for i in range(len(traj))])
        worst["H"] = max(worst["H"], np.abs(hs - h0).max() / (1.0 + abs(h0)))
        f1s = np.einsum("ij,ij->i", traj.M, traj.gamma)
        worst["F1"] = max(worst["F1"], np.abs(f1s - f1).max() / (1.0 + abs(f1)))
        worst["F3"] = max(worst["F3"], np.abs(traj.M[:, 2] - f3).max() / (1.0 + abs(f3)))
    for _ in range(n_states):
        st = _random_state(rng)
        h0 = rough.energy(st, params)
        c0 = rough.integrals(st, params, 1e-12)
        traj = flow.integrate(lambda s: rough.field(s, params), st, (0.0, t_end),
                              cfg, track_phi=False)
        idx = np.unique(np.linspace(0, len(traj) - 1, 21).astype(int))
        for i in idx:
            s_i = traj.state(i)
            worst["rough H"] = max(
                worst["rough H"], abs(rough.energy(s_i, params) - h0) / (1.0 + abs(h0))
            )
            c_i = rough.integrals(s_i, params, 1e-12)
            worst["C"] = max(
                worst["C"],
                abs(c_i[0] - c0[0]) / (1.0 + abs(c0[0])),
                abs(c_i[1] - c0[1]) / (1.0 + abs(c0[1])),
            )
    ok = (
        max(worst["H"], worst["F1"], worst["F3"], worst["rough H"]) <= 1e-8
        and worst["C"] <= 1e-6
    )
    detail = ", ".join(f"{k} drift {v:.2e}" for k, v in worst.items())
    return ok, detail


def criterion_5(params, cfg, workers, rng):
    ident = rough.fundamental_matrix(0.0, params)
    exact = np.array_equal(ident.entries, np.eye(2))
    worst = 0.0
    for g3 in np.linspace(-0.999, 0.999, 200):
        worst = max(worst, rough.fundamental_matrix(g3, params, 1e-12).det_defect)
    ok = exact and worst <= 1e-8
    return ok, f"G(0) identity: {exact}, max |det G - 1| = {worst:.2e}"


def criterion_6(params, cfg, workers, rng):
    worst = 0.0
    mgb3 = params.m * params.g * params.b3
    for spin in np.linspace(-3.0, 3.0, 25):
        for pole in (+1, -1):
            st = bifurcation.vertical_state(spin, pole)
            h_closed = mgb3 + spin**2 / (2.0 * params.I3)
            worst = max(worst, abs(smooth.energy(st, params) - h_closed))
            p_phi, p_psi = smooth.integrals(st)
            worst = max(worst, abs(p_phi - spin), abs(p_psi - pole * spin))
    zero = max(
        abs(smooth.energy(bifurcation.vertical_state(0.0, +1), params) - mgb3),
        abs(rough.energy(bifurcation.vertical_state(0.0, +1), params) - mgb3),
    )
    ok = worst <= 1e-12 and zero == 0.0
    return ok, f"closed-form mismatch {worst:.2e}, zero-spin h offset {zero:.2e}"


def criterion_7(params, cfg, workers, rng):
    worst = 0.0
    counts = {}
    for model in (Model.SMOOTH, Model.ROUGH):
        grid = np.linspace(-1.2, 1.2, 13)
        diagram = bifurcation.build_diagram(model, grid, grid, (-3.0, 3.0), 13, params)
        g_eval = rough.cached_table(params) if model is Model.ROUGH else None
        for j1, j2, g3, _h in diagram.surface:
            res = abs(float(bifurcation.stationarity_residual(model, j1, j2, g3,
                                                              params, g_eval)))
            worst = max(worst, res)
        sl = bifurcation.slice_plane(model, True, PLANE_VALUE,
                                     np.linspace(-1.0, 1.0, 41), params)
        above = 0
        for varying, h_thread in sl.threads:
            pts = bifurcation.precession_points(model, PLANE_VALUE, varying, params,
                                                g_eval)
            if pts and h_thread > min(h for _, h in pts):
                above += 1
        counts[model.value] = (len(sl.threads), above)
    ok = worst <= bifurcation.RESIDUAL_BOUND and all(
        c == (2, 2) for c in counts.values()
    )
    return ok, f"max residual {worst:.2e}, slice threads above surface: {counts}"


def criterion_8(params, cfg, workers, rng):
    def weighted(y):
        st = BodyState(y[:3], y[3:6])
        rho = float(rough.measure_density(st.gamma, params))
        M_dot, g_dot = rough.field(st, params)
        return rho * np.concatenate([M_dot, g_dot])

    worst = 0.0
    h = 1e-5
    for _ in range(50):
        y = _random_state(rng).flat()
        jac = np.empty((6, 6))
        for j in range(6):
            e = np.zeros(6)
            e[j] = h
            jac[:, j] = (weighted(y + e) - weighted(y - e)) / (2.0 * h)
        n = np.zeros(6)
        n[3:] = y[3:6] / np.linalg.norm(y[3:6])
        worst = max(worst, abs(np.trace(jac) - n @ jac @ n))
    return worst <= 1e-4, f"max |surface div(rho f)| = {worst:.2e}"


def criterion_9(params, cfg, workers, rng):
    details = []
    center = monodromy.thread_center(Model.SMOOTH, FixedAxis.J1, PLANE_VALUE, +1,
                                     params)
    ks = [
        _k(Model.SMOOTH, FixedAxis.J1, center, r0, params, workers, n=64)[0]
        for r0 in (0.02, 0.05, 0.1)
    ]
    radius_ok = len(set(ks)) == 1
    details.append(f"k over radii {ks}")
    k_base = _k(Model.SMOOTH, FixedAxis.J1, center, 0.05, params, workers, n=64,
                base_phi=1.0)[0]
    base_ok = k_base == ks[1]
    details.append(f"k at base phi=1.0 {k_base}")

    equi = 0.0
    for _ in range(12):
        st = _random_state(rng)
        angle = rng.uniform(-np.pi, np.pi)
        rotated = rotate_about_axis(st, angle)
        for model in (Model.SMOOTH, Model.ROUGH):
            mod = smooth if model is Model.SMOOTH else rough
            Md, gd = mod.field(st, params)
            Mdr, gdr = mod.field(rotated, params)
            image = rotate_about_axis(BodyState(Md, gd), angle)
            equi = max(equi, np.abs(Mdr - image.M).max(), np.abs(gdr - image.gamma).max())
            equi = max(equi, abs(mod.energy(rotated, params) - mod.energy(st, params)))
    details.append(f"SO(2) equivariance {equi:.2e}")

    st = BodyState(np.array([0.3, -0.2, 0.4]),
                   np.array([0.1, 0.7, np.sqrt(1.0 - 0.01 - 0.49)]))
    fld = lambda s: smooth.field(s, params)
    ref = flow.integrate(fld, st, (0.0, 10.0), flow.IntegratorConfig(1e-13, 1e-13),
                         track_phi=False)
    ref_end = np.concatenate([ref.M[-1], ref.gamma[-1]])
    errs = []
    for h_max in (0.3, 0.15):
        loose = flow.IntegratorConfig(1e-2, 1e-2, max_step=h_max, renorm=False)
        traj = flow.integrate(fld, st, (0.0, 10.0), loose, track_phi=False)
        errs.append(np.linalg.norm(np.concatenate([traj.M[-1], traj.gamma[-1]]) - ref_end))
    ratio = errs[0] / errs[1]
    details.append(f"order-check error ratio {ratio:.1f}")

    ok = radius_ok and base_ok and equi <= 1e-12 and ratio >= 8.0
    return ok, "; ".join(details)


CRITERIA = [
    ("1", "smooth-plane monodromy table", criterion_1),
    ("2", "rough-plane monodromy table", criterion_2),
    ("3", "double-pinched-torus loops", criterion_3),
    ("4", "conservation suites", criterion_4),
    ("5", "fundamental-matrix Liouville property", criterion_5),
    ("6", "vertical-rotation curves", criterion_6),
    ("7", "bifurcation surface and slices", criterion_7),
    ("8", "measure invariance", criterion_8),
    ("9", "property invariants", criterion_9),
]


def run_all(params: BodyParams = DEFAULT_PARAMS, workers: int | None = None,
            subset=None, log=None) -> list[CriterionResult]:
    """Run the battery (optionally a subset of criterion identifiers)."""
    workers = _default_workers(workers)
    cfg = flow.IntegratorConfig()
    results = []
    for ident, description, fn in CRITERIA:
        if subset and ident not in subset:
            continue
        rng = np.random.default_rng(20250157 + int(ident))
        start = time.time()
        try:
            passed, detail = fn(params, cfg, workers, rng)
        except Exception as exc:  # a crashed criterion is a failed criterion
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        result = CriterionResult(ident, description, bool(passed), detail,
                                 time.time() - start)
        results.append(result)
        if log:
            log(format_result(result))
    return results


def format_result(result: CriterionResult) -> str:
    status = "PASS" if result.passed else "FAIL"
    return (
        f"criterion {result.ident} [{status}] {result.description}: "
        f"{result.detail} ({result.seconds:.1f}s)"
    )
