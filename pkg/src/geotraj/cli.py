"""Command-line front end: ``geotraj {synth,scan,optimize,transmon,twoqubit,report}``.

Exit codes: 0 success, 2 usage or parameter error, 3 numerical non-convergence.
CSV files are the authoritative outputs; SVGs are quick-look renderings.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import optimize as opt
from . import twoqubit as tq
from .config import RunConfig, load_config, parse_angle, parse_time_us
from .exceptions import ConvergenceError, GeoTrajError
from .fidelity import compare_curves, default_grid, sensitivity_curve
from .geometry import (
    GateParams,
    export_trajectory_csv,
    four_segment_trajectory,
    gate_unitary,
    named_gate_params,
    synth_five_segment,
    synth_n_segment,
    three_segment_trajectory,
)
from .noise import ERROR_KINDS
from .pulse import SINGLE_QUBIT_GATES, export_schedule_csv, synth_conventional_gate, target_unitary
from .report import heatmap_svg, line_plot_svg
from .transmon import MHZ, US, DragSettings, TransmonParams, omega_sweep

ALL_GATES = SINGLE_QUBIT_GATES + tq.TWO_QUBIT_GATES
EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3


def progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _pick(flag, cfg: RunConfig, section: str, key: str, default):
    if flag is not None:
        return flag
    value = cfg.get(section, key)
    return default if value is None else value


def _threads(args, cfg: RunConfig) -> int:
    if args.threads is not None:
        n = args.threads
    elif cfg.threads is not None:
        n = cfg.threads
    else:
        env = os.environ.get("GEOTRAJ_THREADS")
        try:
            n = int(env) if env else 1
        except ValueError:
            raise GeoTrajError(f"GEOTRAJ_THREADS must be an integer, got {env!r}") from None
    if n < 1:
        raise GeoTrajError("thread count must be at least 1")
    return n


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _waypoints(args, name: str) -> tuple:
    """(chi1, chi3, branch): explicit flags win, else the reference table."""
    if args.chi1 is None and args.chi3 is None:
        chi1, chi3, br = opt.reference_point(name)
    else:
        ref = opt.REFERENCE_WAYPOINTS.get(name)
        if ref is None and (args.chi1 is None or args.chi3 is None):
            raise GeoTrajError("--chi1 and --chi3 are both required here")
        chi1 = parse_angle(args.chi1) if args.chi1 is not None else ref[0] * np.pi
        chi3 = parse_angle(args.chi3) if args.chi3 is not None else ref[1] * np.pi
        br = None
    if args.branch is not None:
        br = args.branch
    elif br is None:
        br = opt.branch_at(name, chi1, chi3)
    return chi1, chi3, br


def _pi(x: float) -> str:
    return f"{x / np.pi:.6g}pi"


# ---------------------------------------------------------------------------
# synth


def _warn_degenerate(args, chi0: float) -> None:
    """Warn about waypoints that collapse an arc to zero length."""
    arcs = []
    if args.chi1 is not None:
        chi1 = parse_angle(args.chi1)
        if np.isclose(chi1, chi0, atol=1e-12):
            arcs.append("first longitude arc (chi1 = chi0)")
        if np.isclose(chi1, 0.0, atol=1e-12):
            arcs.append("first latitude arc (chi1 at the pole)")
    if args.chi3 is not None:
        chi3 = parse_angle(args.chi3)
        if np.isclose(chi3, chi0, atol=1e-12):
            arcs.append("last longitude arc (chi3 = chi0)")
        if np.isclose(chi3, np.pi, atol=1e-12):
            arcs.append("second latitude arc (chi3 at the pole)")
    for arc in arcs:
        progress(f"warning: degenerate {arc} has zero length")


def cmd_synth(args, cfg: RunConfig) -> int:
    explicit = [args.chi0, args.xi0, args.gamma]
    if args.gate is None and any(v is None for v in explicit):
        raise GeoTrajError("give --gate or all of --chi0, --xi0, --gamma")
    if args.gate is not None and any(v is not None for v in explicit):
        raise GeoTrajError("--gate cannot be combined with --chi0/--xi0/--gamma")
    if args.gate is not None:
        name = args.gate
        _warn_degenerate(args, named_gate_params(name).chi0)
        chi1, chi3, br = _waypoints(args, name)
        params = named_gate_params(name, br)
    else:
        name = "custom"
        params = GateParams(parse_angle(args.chi0), parse_angle(args.xi0), parse_angle(args.gamma))
        if args.chi1 is None or args.chi3 is None:
            raise GeoTrajError("--chi1 and --chi3 are required for explicit gate parameters")
        _warn_degenerate(args, params.chi0)
        chi1, chi3, br = parse_angle(args.chi1), parse_angle(args.chi3), 0
    envelope = "square" if name in tq.TWO_QUBIT_GATES else args.envelope
    omega = 1.0 if args.omega_mhz is None else args.omega_mhz * MHZ
    sched, traj = synth_five_segment(params, chi1, chi3, omega_max=omega, envelope=envelope)
    out = _outdir(args)
    stem = args.stem or name
    export_schedule_csv(sched, out / f"{stem}_schedule.csv", args.samples)
    export_trajectory_csv(traj, sched, out / f"{stem}_trajectory.csv")
    unit = "ns" if args.omega_mhz is not None else "1/Omega_max"
    print(f"gate {name} (branch {br}): chi0 = {_pi(params.chi0)}, xi0 = {_pi(params.xi0)}, "
          f"gamma_g = {_pi(params.gamma_g)}")
    print(f"waypoints chi1 = {_pi(chi1)}, chi3 = {_pi(chi3)}")
    print(f"total pulse area = {sched.total_area:.6f} rad, gate time = {sched.total_time:.6f} {unit}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# scan


def _sensitivity_pair(name: str, chi1: float, chi3: float, br: int, kind: str, grid, mode: str,
                      threads: int):
    if name in tq.TWO_QUBIT_GATES:
        return tq.sensitivity_two_qubit(name, chi1, chi3, grid, br, kind, threads, mode)
    params = named_gate_params(name, br)
    geo, _ = synth_five_segment(params, chi1, chi3)
    conv = synth_conventional_gate(name)
    # both constructions are scored against the textbook matrix of the gate; the
    # modulus form ignores their global phases, the real-part form does not
    target = target_unitary(name)
    curves = []
    for sched, label in ((geo, "geometric"), (conv, "conventional")):
        curves.append(sensitivity_curve(sched, target, kind, grid, f"{name}_{label}", mode=mode,
                                        threads=threads))
    return curves[0], curves[1]


def cmd_scan(args, cfg: RunConfig) -> int:
    kind = _pick(args.error, cfg, "scan", "error", None)
    if kind is None:
        kind = "detuning_2q" if args.gate in tq.TWO_QUBIT_GATES else "detuning"
    if kind not in ERROR_KINDS:
        raise GeoTrajError(f"unknown error kind {kind!r}; expected one of {ERROR_KINDS}")
    dmax = _pick(args.delta_max, cfg, "scan", "delta_max", 0.1)
    points = _pick(args.points, cfg, "scan", "points", 41)
    mode = _pick(args.mode, cfg, "scan", "fidelity_mode", "abs")
    chi1, chi3, br = _waypoints(args, args.gate)
    geo, conv = _sensitivity_pair(args.gate, chi1, chi3, br, kind, default_grid(dmax, points), mode,
                                  _threads(args, cfg))
    out = _outdir(args)
    stem = f"{args.gate}_{kind}"
    geo.to_csv(out / f"{stem}_geometric.csv")
    conv.to_csv(out / f"{stem}_conventional.csv")
    line_plot_svg(out / f"{stem}.svg",
                  {"geometric": (geo.grid, geo.infidelity), "conventional": (conv.grid, conv.infidelity)},
                  title=f"{args.gate}: infidelity vs {kind} error", xlabel=kind, ylabel="1 - F")
    rep = compare_curves(geo, conv)
    print(f"{args.gate} at chi1 = {_pi(chi1)}, chi3 = {_pi(chi3)} (branch {br}); error {kind}")
    print(f"geometric <= conventional everywhere: {rep.dominates}; largest ratio {rep.max_ratio:.4g}")
    print(f"at +{dmax:g}: geometric {geo.at(dmax):.4e}, conventional {conv.at(dmax):.4e}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# optimize


def _angle_setting(flag, cfg: RunConfig, key: str, default_pi: float) -> float:
    if flag is not None:
        return parse_angle(flag)
    return cfg.get("optimize", key, default_pi) * np.pi


def cmd_optimize(args, cfg: RunConfig) -> int:
    res = _angle_setting(args.resolution, cfg, "resolution_pi", 0.02)
    fine = _angle_setting(args.fine_resolution, cfg, "fine_resolution_pi", 0.005)
    metric = _pick(args.metric, cfg, "optimize", "metric", "probe")
    probe = _pick(args.delta_probe, cfg, "optimize", "delta_probe", 0.1)
    cells = cfg.get("optimize", "refine_cells", 5)
    two = args.gate in tq.TWO_QUBIT_GATES
    kind = args.error or ("detuning_2q" if two else "detuning")
    branches = (args.branch,) if args.branch is not None else (0, 1)
    factory = tq.two_qubit_evaluator(args.gate, probe, metric, kind) if two else (
        lambda p: opt.single_qubit_evaluator(p, kind, probe, metric))
    best = opt.optimize_gate(args.gate, branches, factory, resolution=res, fine_resolution=fine,
                             refine_cells=cells, threads=_threads(args, cfg))
    out = _outdir(args)
    land = best.landscape
    land.to_csv(out / f"{args.gate}_landscape.csv")
    heatmap_svg(out / f"{args.gate}_landscape.svg", land.chi1_grid / np.pi, land.chi3_grid / np.pi,
                land.metric, title=f"{args.gate}: {metric} infidelity at delta = {probe:g}",
                xlabel="chi1 / pi", ylabel="chi3 / pi", zlabel="log10(1-F)", log=True)
    summary = best.summary()
    summary.update(metric=metric, delta_probe=probe, error=kind)
    with open(out / f"{args.gate}_optimum.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# transmon


def _transmon_params(args, cfg: RunConfig) -> TransmonParams:
    levels = _pick(args.levels, cfg, "transmon", "levels", 4)
    alpha = _pick(args.alpha_mhz, cfg, "transmon", "alpha_mhz", 320.0)
    t1 = parse_time_us(_pick(args.t1, cfg, "transmon", "t1_us", 50.0))
    tphi = parse_time_us(_pick(args.tphi, cfg, "transmon", "tphi_us", 50.0))
    return TransmonParams(levels, alpha * MHZ, t1 * US, tphi * US)


def _drag_settings(args, cfg: RunConfig) -> DragSettings:
    scale = _pick(args.drag_scale, cfg, "transmon", "drag_scale", "auto")
    enabled = args.drag == "on"
    if str(scale).lower() == "auto":
        return DragSettings(enabled, 1.0, calibrate=True)
    try:
        return DragSettings(enabled, float(scale))
    except ValueError:
        raise GeoTrajError(f"--drag-scale must be a number or 'auto', got {scale!r}") from None


def cmd_transmon(args, cfg: RunConfig) -> int:
    if args.gate not in SINGLE_QUBIT_GATES:
        raise GeoTrajError(f"transmon sweeps take a single-qubit gate, got {args.gate!r}")
    p = _transmon_params(args, cfg)
    drag = _drag_settings(args, cfg)
    lo = _pick(args.omega_min, cfg, "transmon", "omega_min_mhz", 12.0)
    hi = _pick(args.omega_max, cfg, "transmon", "omega_max_mhz", 44.0)
    step = _pick(args.omega_step, cfg, "transmon", "omega_step_mhz", 2.0)
    if step <= 0 or hi < lo or lo <= 0:
        raise GeoTrajError("need 0 < omega-min <= omega-max and a positive step")
    grid = np.round(np.arange(lo, hi + 0.5 * step, step), 9) * MHZ
    chi1, chi3, br = _waypoints(args, args.gate)
    params = named_gate_params(args.gate, br)
    make = lambda om: synth_five_segment(params, chi1, chi3, omega_max=om)[0]
    sweep = omega_sweep(make, gate_unitary(params), p, grid, drag, _threads(args, cfg), progress)
    out = _outdir(args)
    stem = f"{args.gate}_transmon"
    sweep.to_csv(out / f"{stem}.csv")
    line_plot_svg(out / f"{stem}.svg",
                  {"no DRAG": (grid / MHZ, 1 - sweep.infidelity_nodrag),
                   "DRAG": (grid / MHZ, 1 - sweep.infidelity_drag)},
                  title=f"{args.gate}: open-system fidelity", xlabel="Omega_m / 2pi (MHz)", ylabel="F")
    for label, on in (("no DRAG", False), ("DRAG", True)):
        om, f = sweep.best(on)
        print(f"{label}: peak fidelity {f:.5f} at Omega_m = 2pi x {om / MHZ:.2f} MHz")
    return EXIT_OK


# ---------------------------------------------------------------------------
# twoqubit


def _twoqubit_params(args, cfg: RunConfig) -> tq.TwoQubitParams:
    return tq.TwoQubitParams(
        g=_pick(args.g_mhz, cfg, "twoqubit", "g_mhz", 8.0) * MHZ,
        delta1=_pick(args.delta1_mhz, cfg, "twoqubit", "delta1_mhz", 500.0) * MHZ,
        alpha1=_pick(args.alpha1_mhz, cfg, "twoqubit", "alpha1_mhz", 320.0) * MHZ,
        alpha2=_pick(args.alpha2_mhz, cfg, "twoqubit", "alpha2_mhz", 280.0) * MHZ,
        m_cutoff=_pick(args.m_cutoff, cfg, "twoqubit", "m_cutoff", 7),
    )


def cmd_twoqubit(args, cfg: RunConfig) -> int:
    if args.gate not in tq.TWO_QUBIT_GATES:
        raise GeoTrajError(f"twoqubit takes iSWAP or CZ, got {args.gate!r}")
    p = _twoqubit_params(args, cfg)
    t1 = parse_time_us(_pick(args.t1, cfg, "twoqubit", "t1_us", 50.0)) * US
    tphi = parse_time_us(_pick(args.tphi, cfg, "twoqubit", "tphi_us", 50.0)) * US
    deco = None if np.isinf(t1) and np.isinf(tphi) else tq.default_decoherence(t1, tphi, p)
    window = _pick(args.nu_window_mhz, cfg, "twoqubit", "nu_window_mhz", 20.0)
    n_nu = _pick(args.nu_points, cfg, "twoqubit", "nu_points", 41)
    b_lo = _pick(args.beta_min, cfg, "twoqubit", "beta_min", 0.2)
    b_hi = _pick(args.beta_max, cfg, "twoqubit", "beta_max", 1.8)
    n_b = _pick(args.beta_points, cfg, "twoqubit", "beta_points", 33)
    chi1, chi3, br = _waypoints(args, args.gate)
    nus = np.linspace(-window, window, n_nu) * MHZ
    betas = np.linspace(b_lo, b_hi, n_b)
    fmap = tq.scan_nu_beta(args.gate, chi1, chi3, p, nus, betas, deco, br, _threads(args, cfg),
                           args.sidebands, progress)
    out = _outdir(args)
    stem = f"{args.gate}_nu_beta"
    fmap.to_csv(out / f"{stem}.csv")
    heatmap_svg(out / f"{stem}.svg", fmap.nu / MHZ, fmap.beta, fmap.fidelity,
                title=f"{args.gate}: full-model fidelity", xlabel="nu / 2pi (MHz)", ylabel="beta",
                zlabel="F")
    nu, beta, f = fmap.best()
    print(f"{args.gate}: best fidelity {f:.5f} at nu = 2pi x {nu / MHZ:.3f} MHz, beta = {beta:.3f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# report


def _report_sensitivity(out: Path, threads: int, quick: bool) -> None:
    grid = default_grid(0.1, 21 if quick else 41)
    for name in SINGLE_QUBIT_GATES + tq.TWO_QUBIT_GATES:
        c1, c3, br = opt.reference_point(name)
        kind = "detuning_2q" if name in tq.TWO_QUBIT_GATES else "detuning"
        geo, conv = _sensitivity_pair(name, c1, c3, br, kind, grid, "abs", threads)
        geo.to_csv(out / f"{name}_{kind}_geometric.csv")
        conv.to_csv(out / f"{name}_{kind}_conventional.csv")
        line_plot_svg(out / f"{name}_{kind}.svg",
                      {"geometric": (geo.grid, geo.infidelity), "conventional": (conv.grid, conv.infidelity)},
                      title=f"{name}: infidelity vs {kind} error", xlabel=kind, ylabel="1 - F")
        progress(f"sensitivity {name}: geometric dominates = {compare_curves(geo, conv).dominates}")


def _report_landscape(out: Path, threads: int, quick: bool) -> None:
    res = 0.05 * np.pi if quick else 0.02 * np.pi
    for name in ("H", "Xpi2", "iSWAP", "CZ"):
        factory = tq.two_qubit_evaluator(name) if name in tq.TWO_QUBIT_GATES else None
        best = opt.optimize_gate(name, evaluator_factory=factory, resolution=res, threads=threads)
        best.landscape.to_csv(out / f"{name}_landscape.csv")
        heatmap_svg(out / f"{name}_landscape.svg", best.landscape.chi1_grid / np.pi,
                    best.landscape.chi3_grid / np.pi, best.landscape.metric,
                    title=f"{name}: infidelity at delta = 0.1", xlabel="chi1 / pi", ylabel="chi3 / pi",
                    zlabel="log10(1-F)", log=True)
        progress(f"landscape {name}: optimum ({best.chi1 / np.pi:.3f}pi, {best.chi3 / np.pi:.3f}pi)")


def _report_four_segment(out: Path, threads: int, quick: bool) -> None:
    p = named_gate_params("Xpi", 0)
    chi2 = np.linspace(np.pi / 2, np.pi, 26 if quick else 51)[1:]
    grid, vals, best = opt.scan_four_segment(p, chi2, threads=threads)
    from .fidelity import write_columns
    write_columns(out / "Xpi_four_segment.csv", {"chi2": grid, "infidelity": vals})
    line_plot_svg(out / "Xpi_four_segment.svg", {"four-arc loop": (grid / np.pi, vals)},
                  title="Xpi: infidelity at delta = 0.1 vs chi2", xlabel="chi2 / pi", ylabel="1 - F")
    four = synth_n_segment(four_segment_trajectory(p, best))
    three = synth_n_segment(three_segment_trajectory(p))
    target = gate_unitary(p)
    g = default_grid()
    a = sensitivity_curve(four, target, grid=g, threads=threads)
    b = sensitivity_curve(three, target, grid=g, threads=threads)
    write_columns(out / "Xpi_four_vs_three.csv",
                  {"delta": g, "infidelity_four": a.infidelity, "infidelity_three": b.infidelity})
    progress(f"four-segment: best chi2 = {best / np.pi:.4f}pi, "
             f"max |four - three| = {np.max(np.abs(a.infidelity - b.infidelity)):.2e}")


def _report_transmon(out: Path, threads: int, quick: bool) -> None:
    step = 4.0 if quick else 2.0
    grid = np.arange(12.0, 44.0 + 0.5 * step, step) * MHZ
    for name in ("H", "Xpi2"):
        c1, c3, br = opt.reference_point(name)
        params = named_gate_params(name, br)
        make = lambda om, params=params, c1=c1, c3=c3: synth_five_segment(params, c1, c3, omega_max=om)[0]
        sweep = omega_sweep(make, gate_unitary(params), TransmonParams(), grid,
                            DragSettings(True, 1.0, calibrate=True), threads)
        sweep.to_csv(out / f"{name}_transmon.csv")
        line_plot_svg(out / f"{name}_transmon.svg",
                      {"no DRAG": (grid / MHZ, 1 - sweep.infidelity_nodrag),
                       "DRAG": (grid / MHZ, 1 - sweep.infidelity_drag)},
                      title=f"{name}: open-system fidelity", xlabel="Omega_m / 2pi (MHz)", ylabel="F")
        om, f = sweep.best(True)
        progress(f"transmon {name}: DRAG peak {f:.5f} at {om / MHZ:.1f} MHz")


def _report_twoqubit(out: Path, threads: int, quick: bool) -> None:
    p = tq.TwoQubitParams()
    nus = np.linspace(-20, 20, 9 if quick else 41) * MHZ
    betas = np.linspace(0.2, 1.8, 9 if quick else 33)
    for name in tq.TWO_QUBIT_GATES:
        c1, c3, br = opt.reference_point(name)
        fmap = tq.scan_nu_beta(name, c1, c3, p, nus, betas, tq.default_decoherence(p=p), br, threads)
        fmap.to_csv(out / f"{name}_nu_beta.csv")
        heatmap_svg(out / f"{name}_nu_beta.svg", fmap.nu / MHZ, fmap.beta, fmap.fidelity,
                    title=f"{name}: full-model fidelity", xlabel="nu / 2pi (MHz)", ylabel="beta", zlabel="F")
        progress(f"two-qubit {name}: best fidelity {fmap.best()[2]:.5f}")


RECIPES = {
    "sensitivity": _report_sensitivity,
    "landscape": _report_landscape,
    "four-segment": _report_four_segment,
    "transmon": _report_transmon,
    "twoqubit": _report_twoqubit,
}


def cmd_report(args, cfg: RunConfig) -> int:
    out = _outdir(args)
    threads = _threads(args, cfg)
    names = list(RECIPES) if args.recipe == "all" else [args.recipe]
    for name in names:
        progress(f"== {name}")
        RECIPES[name](out, threads, args.quick)
    print(f"wrote {', '.join(names)} outputs to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def _waypoint_flags(sp, gate_required: bool = True) -> None:
    if gate_required:
        sp.add_argument("--gate", required=True, choices=ALL_GATES)
    sp.add_argument("--chi1", help="first waypoint latitude, e.g. 0.05pi (default: reference optimum)")
    sp.add_argument("--chi3", help="second waypoint latitude, e.g. 0.73pi")
    sp.add_argument("--branch", type=int, choices=(0, 1),
                    help="gamma_g branch (default: the one less sensitive at the waypoints)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config with unit-suffixed keys")
    common.add_argument("--threads", type=int, help="worker threads (fallback: GEOTRAJ_THREADS)")
    common.add_argument("--out", default=".", help="output directory")

    ap = argparse.ArgumentParser(prog="geotraj", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", parents=[common], help="pulse schedule of a geometric gate")
    sp.add_argument("--gate", choices=ALL_GATES)
    _waypoint_flags(sp, gate_required=False)
    sp.add_argument("--chi0")
    sp.add_argument("--xi0")
    sp.add_argument("--gamma", help="geometric phase gamma_g")
    sp.add_argument("--envelope", choices=("sine", "square"), default="sine")
    sp.add_argument("--omega-mhz", type=float, help="peak drive Omega_max / 2pi in MHz (default: unit drive)")
    sp.add_argument("--samples", type=int, default=200, help="CSV samples per segment")
    sp.add_argument("--stem", help="output file stem (default: gate name)")
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("scan", parents=[common], help="geometric vs conventional error sensitivity")
    _waypoint_flags(sp)
    sp.add_argument("--error", help=f"one of {', '.join(ERROR_KINDS)}")
    sp.add_argument("--delta-max", type=float)
    sp.add_argument("--points", type=int)
    sp.add_argument("--mode", choices=("abs", "re"), help="trace fidelity: modulus or real part")
    sp.add_argument("--fidelity-re", dest="mode", action="store_const", const="re",
                    help="literal phase-sensitive Re Tr form (same as --mode re)")
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("optimize", parents=[common], help="(chi1, chi3) landscape and optimum")
    sp.add_argument("--gate", required=True, choices=ALL_GATES)
    sp.add_argument("--branch", type=int, choices=(0, 1), help="scan only this gamma_g branch")
    sp.add_argument("--resolution", help="coarse grid step, e.g. 0.02pi")
    sp.add_argument("--fine-resolution", help="refinement step, e.g. 0.005pi")
    sp.add_argument("--metric", choices=opt.METRICS)
    sp.add_argument("--delta-probe", type=float)
    sp.add_argument("--error", choices=ERROR_KINDS)
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("transmon", parents=[common], help="open-system fidelity vs drive strength")
    _waypoint_flags(sp)
    sp.add_argument("--drag", choices=("on", "off"), default="on")
    sp.add_argument("--drag-scale", help="DRAG scale in [0, 2] or 'auto' to calibrate (default)")
    sp.add_argument("--levels", type=int)
    sp.add_argument("--alpha-mhz", type=float)
    sp.add_argument("--t1", help="T1 in us, or inf")
    sp.add_argument("--tphi", help="T_phi in us, or inf")
    sp.add_argument("--omega-min", type=float, help="MHz")
    sp.add_argument("--omega-max", type=float, help="MHz")
    sp.add_argument("--omega-step", type=float, help="MHz")
    sp.set_defaults(func=cmd_transmon)

    sp = sub.add_parser("twoqubit", parents=[common], help="full-model fidelity over (nu, beta)")
    _waypoint_flags(sp)
    for flag in ("--g-mhz", "--delta1-mhz", "--alpha1-mhz", "--alpha2-mhz", "--nu-window-mhz",
                 "--beta-min", "--beta-max"):
        sp.add_argument(flag, type=float)
    for flag in ("--m-cutoff", "--nu-points", "--beta-points"):
        sp.add_argument(flag, type=int)
    sp.add_argument("--t1", help="T1 in us, or inf")
    sp.add_argument("--tphi", help="T_phi in us, or inf")
    sp.add_argument("--sidebands", choices=("all", "resonant"), default="all")
    sp.set_defaults(func=cmd_twoqubit)

    sp = sub.add_parser("report", parents=[common], help="regenerate the standard result set")
    sp.add_argument("--recipe", choices=["all"] + list(RECIPES), default="all")
    sp.add_argument("--quick", action="store_true", help="coarser grids")
    sp.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (GeoTrajError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
