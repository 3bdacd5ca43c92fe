"""Compare the compiled and interpreted kernel backends.

Runs the same workloads in two subprocesses, one with CLOSEDCHAIN_NUMBA=0
and one with it enabled, and prints a side-by-side table. Timings exclude
jit compilation (every workload is warmed up first).

Usage: python benchmarks/compare_backends.py [--repeats N]
"""
import argparse
import json
import os
import subprocess
import sys
import time


def _median(values):
    values = sorted(values)
    return values[len(values) // 2]


def _time(func, repeats, inner=1):
    func()  # warmup, absorbs jit compilation
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(inner):
            func()
        samples.append((time.perf_counter() - t0) / inner)
    return _median(samples)


def run_workloads(repeats):
    import numpy as np

    from closedchain import _kernels as k
    from closedchain.backend import backend_name
    from closedchain.config import load_config
    from closedchain.estimation import estimate
    from closedchain.impedance import SerialImpedance, transfer_gains
    from closedchain.jacobian import transmission_state
    from closedchain.simulator import simulate
    from closedchain.verify import grid_scan
    from closedchain.fixtures import ankle, knee

    kp, ap = knee(), ankle()
    kp_packed, ap_packed = kp.packed(), ap.packed()
    q1 = np.array([1.2])
    q2 = np.array([-0.12, 0.21])
    serial = SerialImpedance(k_p=[40.0, 40.0], k_d=[0.8, 0.8],
                             q_s_ref=[0.0, 0.1])
    q_m = k.eval_chain(ap_packed, q2, 0)[0].copy()
    warm = q2 + 0.01
    cfg = load_config(os.path.join(os.path.dirname(__file__), "..",
                                   "configs", "knee.json"))

    def transfer():
        state = transmission_state(ap, q2, [0.4, -0.3])
        transfer_gains(ap, state, serial)

    timings = {
        "knee_eval_order2": _time(
            lambda: k.eval_chain(kp_packed, q1, 2), repeats, inner=200),
        "ankle_eval_order2": _time(
            lambda: k.eval_chain(ap_packed, q2, 2), repeats, inner=200),
        "gain_transfer": _time(transfer, repeats, inner=50),
        "warm_estimate": _time(
            lambda: estimate(ap, q_m, warm_start=warm), repeats, inner=50),
        "feasibility_grid_101": _time(
            lambda: grid_scan(ap, 101), repeats),
        "closed_loop_10s": _time(
            lambda: simulate(cfg.params, cfg.plant, cfg.k_p, cfg.k_d,
                             cfg.reference, scenario="transferred_gains",
                             duration=10.0, rates=cfg.rates), repeats),
    }
    return backend_name(), timings


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--worker", action="store_true",
                        help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.worker:
        name, timings = run_workloads(args.repeats)
        print(json.dumps({"backend": name, "timings": timings}))
        return

    results = {}
    for flag in ("0", "1"):
        env = dict(os.environ, CLOSEDCHAIN_NUMBA=flag)
        proc = subprocess.run(
            [sys.executable, __file__, "--worker",
             "--repeats", str(args.repeats)],
            capture_output=True, text=True, env=env,
        )
        if proc.returncode != 0:
            sys.stderr.write(proc.stderr)
            raise SystemExit(1)
        payload = json.loads(proc.stdout.splitlines()[-1])
        results[payload["backend"]] = payload["timings"]

    if "numba" not in results:
        print("numba unavailable, interpreted timings only:")
        for name, t in results["numpy"].items():
            print(f"  {name:24s} {t * 1e6:10.1f} us")
        return

    print(f"{'workload':24s} {'numpy':>12s} {'numba':>12s} {'speedup':>9s}")
    for name in results["numpy"]:
        tp = results["numpy"][name]
        tn = results["numba"][name]
        print(f"{name:24s} {tp * 1e6:10.1f} us {tn * 1e6:10.1f} us "
              f"{tp / tn:8.1f}x")


if __name__ == "__main__":
    main()
