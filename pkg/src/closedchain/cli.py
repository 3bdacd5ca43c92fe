"""Command-line front end.

One verb per library capability: ``map`` rasterizes feasibility and
transmission ratios, ``check`` runs the finite-difference verification
battery, ``estimate`` inverts the geometric map once, ``gains`` transfers
a serial impedance once, ``simulate`` runs a closed-loop scenario.

All output written to stdout or files is a deterministic function of the
config file, flags, and seed; wall-clock timing goes to stderr only. Exit
codes: 0 success, 1 usage or config error, 2 verification failure,
3 simulation fault.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time

import numpy as np

from .backend import backend_name
from .config import load_config
from .errors import ConfigError, TransmissionError
from .estimation import estimate
from .impedance import SerialImpedance, transfer_gains
from .jacobian import transmission_state
from .simulator import SCENARIOS, WAVE_KINDS, simulate
from .verify import grid_scan, run_checks


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated floats, got {text!r}"
        ) from exc


def _fmt(value: float) -> str:
    """Shortest round-trip decimal form, blank for missing values."""
    if np.isnan(value):
        return ""
    return repr(float(value))


def _vec_arg(raw, n, flag):
    if raw is None:
        return None
    if len(raw) == 1:
        return np.full(n, raw[0])
    if len(raw) != n:
        raise ConfigError(f"{flag} expects {n} comma-separated values")
    return np.asarray(raw, float)


def _dump_json(payload: dict, out_path) -> None:
    text = json.dumps(payload, indent=2)
    print(text)
    if out_path is not None:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")


def cmd_map(args) -> int:
    cfg = load_config(args.config)
    grid = grid_scan(cfg.params, args.grid)
    ns = cfg.params.serial_dof
    nm = cfg.params.motor_dof

    header = (
        ["q_s1", "q_s2"] if ns == 2 else ["q_s"]
    )
    header.append("feasible")
    header.extend(f"q_m_{i}" for i in range(nm))
    header.extend(f"ja_{i}{j}" for i in range(nm) for j in range(ns))
    header.extend(f"ratio_{i}{j}" for i in range(ns) for j in range(nm))
    header.append("singular_margin")

    lines = [",".join(header)]
    n2 = grid.grid2.shape[0]
    for idx in range(grid.verdict.shape[0]):
        i1, i2 = divmod(idx, n2)
        cells = [_fmt(grid.grid1[i1])]
        if ns == 2:
            cells.append(_fmt(grid.grid2[i2]))
        cells.append(str(int(grid.verdict[idx])))
        cells.extend(_fmt(v) for v in grid.q_m[idx])
        cells.extend(_fmt(v) for v in grid.jacobian[idx].ravel())
        cells.extend(_fmt(v) for v in grid.inverse[idx].ravel())
        cells.append(_fmt(grid.margin[idx]))
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return 0


def cmd_check(args) -> int:
    cfg = load_config(args.config)
    start = time.perf_counter()
    results = run_checks(
        cfg.params,
        samples=args.samples,
        seed=args.seed,
        tolerance_override=args.tolerance,
    )
    elapsed = time.perf_counter() - start
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(
            f"{status} {res.name}: max error {res.max_error:.3e} "
            f"(tolerance {res.tolerance:.3e}, {res.samples} samples)"
        )
    payload = {
        "mechanism": cfg.mechanism,
        "seed": args.seed,
        "samples": args.samples,
        "checks": [res.as_dict() for res in results],
        "all_passed": all(res.passed for res in results),
    }
    _dump_json(payload, args.out)
    print(f"check ran in {elapsed:.2f} s", file=sys.stderr)
    return 0 if payload["all_passed"] else 2


def cmd_estimate(args) -> int:
    cfg = load_config(args.config)
    nm = cfg.params.motor_dof
    q_m = _vec_arg(args.qm, nm, "--qm")
    warm = _vec_arg(args.warm, cfg.params.serial_dof, "--warm")
    result = estimate(cfg.params, q_m, warm_start=warm)
    _dump_json(
        {
            "q_s": result.q_s.tolist(),
            "residual": result.residual,
            "iterations": result.iterations,
        },
        args.out,
    )
    return 0


def cmd_gains(args) -> int:
    cfg = load_config(args.config)
    ns = cfg.params.serial_dof
    q_s = _vec_arg(args.qs, ns, "--qs")
    q_s_dot = _vec_arg(args.qs_dot, ns, "--qs-dot")
    if q_s_dot is None:
        q_s_dot = np.zeros(ns)
    k_p = _vec_arg(args.kp, ns, "--kp")
    k_d = _vec_arg(args.kd, ns, "--kd")
    q_s_ref = _vec_arg(args.qs_ref, ns, "--qs-ref")
    serial = SerialImpedance(
        k_p=cfg.k_p if k_p is None else k_p,
        k_d=cfg.k_d if k_d is None else k_d,
        q_s_ref=q_s if q_s_ref is None else q_s_ref,
    )
    state = transmission_state(cfg.params, q_s, q_s_dot)
    motor = transfer_gains(cfg.params, state, serial)
    _dump_json(
        {
            "k_pm": motor.k_pm.tolist(),
            "k_dm": motor.k_dm.tolist(),
            "q_m_ref": motor.q_m_ref.tolist(),
            "tau_m_ref": motor.tau_m_ref.tolist(),
            "degenerate": motor.degenerate,
            "decomposition": {
                "torque_curvature": motor.a_pm.tolist(),
                "congruence": motor.b_pm.tolist(),
                "velocity_curvature": motor.c_pm.tolist(),
            },
        },
        args.out,
    )
    return 0


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    reference = cfg.reference
    if args.waveform is not None and args.waveform != reference.kind:
        reference = dataclasses.replace(reference, kind=args.waveform)
    start = time.perf_counter()
    result = simulate(
        cfg.params,
        plant=cfg.plant,
        k_p=cfg.k_p,
        k_d=cfg.k_d,
        reference=reference,
        scenario=args.scenario,
        duration=args.duration,
        rates=cfg.rates,
    )
    elapsed = time.perf_counter() - start
    if args.out is not None:
        result.trace.to_csv(args.out)
    print(result.summary_json())
    print(
        f"simulated {result.trace.steps} steps in {elapsed:.2f} s "
        f"(backend: {backend_name()})",
        file=sys.stderr,
    )
    return 3 if result.fault is not None else 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="closedchain",
        description="Closed-kinematic-chain transmission toolbox.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default=None, help="output file path")

    p_map = sub.add_parser("map", help="feasibility and ratio map CSV")
    common(p_map)
    p_map.add_argument("--grid", type=int, default=101,
                       help="grid points per serial axis")
    p_map.set_defaults(func=cmd_map)

    p_check = sub.add_parser("check", help="finite-difference verification")
    common(p_check)
    p_check.add_argument("--samples", type=int, default=100)
    p_check.add_argument("--seed", type=int, default=0)
    p_check.add_argument("--tolerance", type=float, default=None,
                         help="override every check tolerance")
    p_check.set_defaults(func=cmd_check)

    p_est = sub.add_parser("estimate", help="invert the geometric map once")
    common(p_est)
    p_est.add_argument("--qm", type=_float_list, required=True,
                       help="measured motor angles, comma separated")
    p_est.add_argument("--warm", type=_float_list, default=None,
                       help="warm-start serial configuration")
    p_est.set_defaults(func=cmd_estimate)

    p_gains = sub.add_parser("gains", help="transfer a serial impedance")
    common(p_gains)
    p_gains.add_argument("--qs", type=_float_list, required=True)
    p_gains.add_argument("--qs-dot", type=_float_list, default=None)
    p_gains.add_argument("--qs-ref", type=_float_list, default=None)
    p_gains.add_argument("--kp", type=_float_list, default=None)
    p_gains.add_argument("--kd", type=_float_list, default=None)
    p_gains.set_defaults(func=cmd_gains)

    p_sim = sub.add_parser("simulate", help="run a closed-loop scenario")
    common(p_sim)
    p_sim.add_argument("--scenario", choices=sorted(SCENARIOS),
                       default="transferred_gains")
    p_sim.add_argument("--duration", type=float, default=5.0)
    p_sim.add_argument("--waveform", choices=sorted(WAVE_KINDS), default=None,
                       help="override the reference waveform kind")
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except TransmissionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
