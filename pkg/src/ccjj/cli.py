"""Command-line front end: spectra, entanglement, gate design and scoring.

Outputs are plot-ready CSV files with a '#'-prefixed JSON header line, plus
JSON reports. All quantities are dimensionless (energies in hw0, times in
1/omega0); physical-unit conversions (ns, GHz) appear only in report
fields computed here at the boundary.

Exit codes: 0 success, 2 usage error, 3 numerical-convergence failure,
4 template mismatch.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, evolution, gates, model, spectrum
from .grids import build_grid, entanglement, save_snapshot

EXIT_USAGE = 2
EXIT_CONVERGENCE = 3
EXIT_TEMPLATE = 4


class UsageError(ValueError):
    pass


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _header(params: dict) -> str:
    payload = {"generator": f"ccjj {__version__}", **params}
    return "# " + json.dumps(payload, sort_keys=True)


def _write_csv(path: Path, header: dict, columns: list[str], rows) -> None:
    lines = [_header(header), ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _resolve_scales(args) -> tuple[model.DerivedScales, dict]:
    """Build DerivedScales from --config and/or flags.

    Entry modes: physical {c_j_farads, c_c_farads, i_c_amperes} with j0 or
    ns, or dimensionless {ns, zeta}. Exactly one mode.
    """
    cfg = {}
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
    ns = args.ns if args.ns is not None else cfg.get("ns")
    zeta = args.zeta if args.zeta is not None else cfg.get("zeta")
    j0 = args.j0 if args.j0 is not None else cfg.get("j0")
    physical_keys = {"c_j_farads", "c_c_farads", "i_c_amperes"}
    has_physical = physical_keys <= set(cfg)
    if has_physical and (zeta is not None):
        raise UsageError("give either physical capacitances or zeta, not both")
    if has_physical:
        params = model.CircuitParams(
            junction_capacitance=cfg["c_j_farads"],
            coupling_capacitance=cfg["c_c_farads"],
            critical_current=cfg["i_c_amperes"],
        )
        if j0 is None:
            if ns is None:
                raise UsageError("physical entry needs j0 or ns to fix the bias")
            j0 = model.bias_for_ns(params, ns)
        scales = model.derive_scales(params, j0)
    else:
        if ns is None or zeta is None:
            raise UsageError("dimensionless entry needs both ns and zeta")
        params = model.reference_params(zeta)
        if j0 is None:
            j0 = model.bias_for_ns(params, ns)
        scales = model.derive_scales(params, j0)
    echo = {
        "ns": scales.level_number,
        "zeta": scales.zeta,
        "j0": scales.reference_bias,
        "omega0_ghz": scales.frequency_ghz,
    }
    return scales, echo


def _schedule_overrides(args, cfg: dict) -> dict:
    sched = dict(cfg.get("schedule", {}))
    for key, flag in (
        ("eps_a", args.eps_a),
        ("eps_b", args.eps_b),
        ("tau_r", args.tau_r),
        ("tau_i", args.tau_i),
    ):
        if flag is not None:
            sched[key] = flag
    if args.ramp_shape is not None:
        sched["ramp_shape"] = args.ramp_shape
    return sched


def _sweep_values(args) -> np.ndarray:
    lo = args.eps_a if args.eps_a is not None else -0.12
    hi = args.eps_b if args.eps_b is not None else 0.02
    step = args.eps_step
    if hi < lo:
        lo, hi = hi, lo
    n = int(round((hi - lo) / step)) + 1
    if n < 2:
        raise UsageError(f"empty sweep list for [{lo}, {hi}] at step {step}")
    return np.linspace(lo, hi, n)


def _time_ns(t: float, scales: model.DerivedScales) -> float:
    return t / scales.omega0 * 1e9


def cmd_spectrum(args) -> int:
    scales, echo = _resolve_scales(args)
    eps_values = _sweep_values(args)
    grid = build_grid(scales, (eps_values[0], eps_values[-1]), args.grid)
    track = spectrum.sweep(eps_values, scales, grid, count=6)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    header = {**echo, "grid": args.grid, "columns_energy_unit": "hbar_omega0"}
    rows = [
        [track.eps_values[i], *track.energies[i]] for i in range(len(track.eps_values))
    ]
    _write_csv(out / "spectrum.csv", header, ["eps", "E0", "E1", "E2", "E3", "E4", "E5"], rows)

    crossings = []
    for (la, lb), bracket in (((1, 2), (-0.02, 0.02)), ((4, 5), (-0.08, -0.01))):
        try:
            eps_star, gap = spectrum.find_avoided_crossing(
                scales, grid, la, lb, bracket
            )
            crossings.append({"levels": [la, lb], "eps_star": eps_star, "gap": gap})
        except spectrum.SpectrumError:
            continue
    _write_json(out / "crossings.json", {**header, "crossings": crossings})

    if args.check_convergence:
        fine = grid.with_resolution(grid.n1 * 2)
        e_ref = spectrum.solve_2d(eps_values[0], scales, grid, count=6).energies
        e_fine = spectrum.solve_2d(eps_values[0], scales, fine, count=6).energies
        drift = float(np.max(np.abs(e_ref - e_fine)))
        _write_json(out / "convergence.json", {**header, "grid_doubling_max_shift": drift})
        if drift > 2.5e-3:
            return EXIT_CONVERGENCE
    return 0


def cmd_entangle(args) -> int:
    scales, echo = _resolve_scales(args)
    eps_values = _sweep_values(args)
    grid = build_grid(scales, (eps_values[0], eps_values[-1]), args.grid)
    track = spectrum.sweep(eps_values, scales, grid, count=6)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    header = {**echo, "grid": args.grid, "entropy_unit": "ebit"}
    rows = [
        [
            track.eps_values[i],
            track.entropies[i][1],
            track.entropies[i][3],
            track.entropies[i][4],
            track.entropies[i][5],
        ]
        for i in range(len(track.eps_values))
    ]
    _write_csv(out / "entanglement.csv", header, ["eps", "S1", "S3", "S4", "S5"], rows)
    return 0


def _design(args, scales):
    kind = args.kind
    grid = build_grid(scales, (args.eps_a if args.eps_a is not None else -0.1, 0.0), args.grid)
    if kind == "u1":
        sched, info = gates.design_u1(
            scales,
            grid,
            eps_a=args.eps_a if args.eps_a is not None else gates.DEFAULT_EPS_A,
            tau_r=args.tau_r if args.tau_r is not None else gates.DEFAULT_TAU_R,
            ramp_shape=args.ramp_shape or "raised_cosine",
        )
    else:
        sched, info = gates.design_u2(
            scales,
            grid,
            k=args.k,
            eps_a=args.eps_a if args.eps_a is not None else gates.DEFAULT_EPS_A,
            tau_r=args.tau_r if args.tau_r is not None else gates.DEFAULT_TAU_R,
            ramp_shape=args.ramp_shape or "raised_cosine",
        )
    return sched, info, grid


def _schedule_json(sched: model.PulseSchedule, scales: model.DerivedScales) -> dict:
    return {
        "eps_a": sched.eps_a,
        "eps_b": sched.eps_b,
        "tau_r": sched.ramp_time,
        "tau_i": sched.interaction_time,
        "ramp_shape": sched.ramp_shape,
        "total_duration": sched.total_duration,
        "tau_r_ns": None,
        "tau_i_ns": None,
        "total_ns": None,
    } | {
        "tau_r_ns": _time_ns(sched.ramp_time, scales),
        "tau_i_ns": _time_ns(sched.interaction_time, scales),
        "total_ns": _time_ns(sched.total_duration, scales),
    }


def cmd_design(args) -> int:
    scales, echo = _resolve_scales(args)
    sched, info, _ = _design(args, scales)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        **echo,
        "gate": args.kind,
        "schedule": _schedule_json(sched, scales),
        "design": {"eps_star": info.eps_star, "gap": info.gap, "levels": list(info.levels)},
    }
    if args.kind == "u2":
        payload["k"] = args.k
    _write_json(out / f"design_{args.kind}.json", payload)
    print(json.dumps(payload, sort_keys=True))
    return 0


def cmd_gate(args) -> int:
    scales, echo = _resolve_scales(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    kind = "controlled_phase" if args.kind == "u1" else "swaplike"

    overrides = _schedule_overrides(args, {})
    if {"eps_b", "tau_i"} <= set(overrides):
        sched = model.PulseSchedule(
            eps_a=overrides.get("eps_a", gates.DEFAULT_EPS_A),
            eps_b=overrides["eps_b"],
            ramp_time=overrides.get("tau_r", gates.DEFAULT_TAU_R),
            interaction_time=overrides["tau_i"],
            ramp_shape=overrides.get("ramp_shape", "raised_cosine"),
        )
        info = None
        grid = build_grid(
            scales, (min(sched.eps_a, sched.eps_b), max(0.0, sched.eps_b)), args.grid
        )
    else:
        sched, info, grid = _design(args, scales)
        if overrides:
            sched = model.PulseSchedule(
                eps_a=overrides.get("eps_a", sched.eps_a),
                eps_b=overrides.get("eps_b", sched.eps_b),
                ramp_time=overrides.get("tau_r", sched.ramp_time),
                interaction_time=overrides.get("tau_i", sched.interaction_time),
                ramp_shape=overrides.get("ramp_shape", sched.ramp_shape),
            )

    cfg = evolution.PropagationConfig(
        dt=args.dt,
        wavefunction_stride=args.snapshot_every if args.snapshot_every else None,
    )
    matrix, trajectories = gates.extract_gate(sched, scales, grid, cfg)
    report = gates.score_gate(matrix, kind, sched, info)

    header = {**echo, "gate": args.kind, "dt": args.dt, "grid": args.grid}
    for name, traj in trajectories.items():
        rows = [
            [
                traj.times[i],
                traj.probabilities["P00"][i],
                traj.probabilities["P10"][i],
                traj.probabilities["P01"][i],
                traj.probabilities["P11"][i],
                traj.norms[i],
            ]
            for i in range(len(traj.times))
        ]
        _write_csv(
            out / f"trajectory_{name}.csv",
            {**header, "initial_state": name},
            ["t", "P0", "P1", "P2", "P4", "norm"],
            rows,
        )
        for t, snap in traj.snapshots:
            save_snapshot(snap, out / f"psi_{name}_t{t:08.1f}.bin", t)

    payload = {
        **echo,
        **report.summary(),
        "schedule_physical": _schedule_json(sched, scales),
        "matrix_re": np.round(matrix.matrix.real, 12).tolist(),
        "matrix_im": np.round(matrix.matrix.imag, 12).tolist(),
    }

    if args.check_convergence:
        cfg_half = evolution.PropagationConfig(dt=args.dt / 2.0)
        matrix_half, _ = gates.extract_gate(sched, scales, grid, cfg_half)
        report_half = gates.score_gate(matrix_half, kind, sched, info)
        payload["dt_halving_fidelity_shift"] = abs(
            report_half.fidelity - report.fidelity
        )
    _write_json(out / "report.json", payload)
    print(json.dumps({k: payload[k] for k in ("kind", "fidelity", "leakage")}, sort_keys=True))
    if args.check_convergence and payload["dt_halving_fidelity_shift"] > 1e-3:
        return EXIT_CONVERGENCE
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ccjj",
        description="Coupled Josephson junction simulator: spectra, entanglement, gates.",
    )
    p.add_argument("--version", action="version", version=f"ccjj {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON parameter file")
        sp.add_argument("--ns", type=float, help="well depth N_s (dimensionless entry)")
        sp.add_argument("--zeta", type=float, help="capacitive coupling ratio")
        sp.add_argument("--j0", type=float, help="reference bias (overrides ns)")
        sp.add_argument("--grid", type=int, default=128, help="points per axis")
        sp.add_argument("--eps-a", dest="eps_a", type=float)
        sp.add_argument("--eps-b", dest="eps_b", type=float)
        sp.add_argument("--tau-r", dest="tau_r", type=float)
        sp.add_argument("--tau-i", dest="tau_i", type=float)
        sp.add_argument("--ramp-shape", dest="ramp_shape", choices=model.RAMP_SHAPES)
        sp.add_argument("--dt", type=float, default=0.01)
        sp.add_argument("--check-convergence", action="store_true", dest="check_convergence")
        sp.add_argument("--out", default="out", help="output directory")

    sp = sub.add_parser("spectrum", help="level sweep CSV + crossing reports")
    common(sp)
    sp.add_argument("--eps-step", dest="eps_step", type=float, default=0.002)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("entangle", help="eigenstate entanglement sweep CSV")
    common(sp)
    sp.add_argument("--eps-step", dest="eps_step", type=float, default=0.002)
    sp.set_defaults(func=cmd_entangle)

    sp = sub.add_parser("design", help="emit a gate schedule (no dynamics)")
    sp.add_argument("kind", choices=("u1", "u2"))
    common(sp)
    sp.add_argument("--k", type=int, default=2, help="beat cycles for u2")
    sp.set_defaults(func=cmd_design)

    sp = sub.add_parser("gate", help="design, run and score a gate")
    sp.add_argument("kind", choices=("u1", "u2"))
    common(sp)
    sp.add_argument("--k", type=int, default=2, help="beat cycles for u2")
    sp.add_argument(
        "--snapshot-every",
        dest="snapshot_every",
        type=int,
        default=0,
        help="dump wavefunction snapshots every N steps",
    )
    sp.set_defaults(func=cmd_gate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (UsageError, model.ParameterError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except gates.TemplateMismatchError as exc:
        _write_json(Path(args.out) / "error.json", {"error": "template_mismatch", "detail": str(exc)})
        print(f"template mismatch: {exc}", file=sys.stderr)
        return EXIT_TEMPLATE
    except (spectrum.SpectrumError, evolution.EvolutionError, gates.GateError) as exc:
        _write_json(Path(args.out) / "error.json", {"error": "convergence", "detail": str(exc)})
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
