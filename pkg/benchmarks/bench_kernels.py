#!/usr/bin/env python3
"""Benchmark the hot kernels under both backends.

Run without arguments to spawn one subprocess per backend and print a
comparison table; pass --backend numba|numpy to time a single backend
in-process (SPINCM_BACKEND must not contradict it).
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _time_backend() -> dict:
    import numpy as np

    from spincm import elliptic as el
    from spincm import operators as op
    from spincm.backend import BACKEND
    from spincm.jets import lift_pair_function
    from spincm.verify import random_spin_state

    lat = el.lattice_new(1.0, 0.4 + 1.2j)
    rng = np.random.default_rng(0)
    pts = [complex(a, b) for a, b in zip(rng.uniform(0.05, 0.9, 2000),
                                         rng.uniform(0.05, 0.9, 2000))]

    # warm up any JIT compilation before timing
    el.weier_eval(0.3 + 0.2j, lat)
    x = (0.21 - 0.11j, 0.53 + 0.17j, -0.35 + 0.02j)
    a = lift_pair_function("sigma", (1, 2), 0.3, lat, x, 6)
    b = lift_pair_function("sigma", (2, 3), -0.2, lat, x, 6)
    _ = a * b

    t0 = time.perf_counter()
    reps = 10
    for _ in range(reps):
        for z in pts:
            el.weier_eval(z, lat)
    theta_rate = reps * len(pts) / (time.perf_counter() - t0)

    t0 = time.perf_counter()
    n_mul = 20000
    for _ in range(n_mul):
        _ = a * b
    mul_rate = n_mul / (time.perf_counter() - t0)

    ctx = op.coupling(1.3, lat)
    psi = random_spin_state(lat, x, 6, rng)
    ham = op.hamiltonian_op(ctx)
    fam = op.spectral_family_op(0.23 + 0.11j, ctx)
    op.commutator_residual(ham, fam, psi)  # warm path
    t0 = time.perf_counter()
    n_comm = 20
    for _ in range(n_comm):
        op.commutator_residual(ham, fam, psi)
    comm_rate = n_comm / (time.perf_counter() - t0)

    return dict(
        backend=BACKEND,
        theta_evals_per_s=theta_rate,
        jet_products_per_s=mul_rate,
        commutators_per_s=comm_rate,
    )


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--backend", choices=("numba", "numpy"))
    ap.add_argument("--json", action="store_true", help="print one JSON line")
    args = ap.parse_args()

    if args.backend:
        os.environ.setdefault("SPINCM_BACKEND", args.backend)
        if os.environ["SPINCM_BACKEND"] != args.backend:
            print(f"SPINCM_BACKEND={os.environ['SPINCM_BACKEND']} contradicts "
                  f"--backend {args.backend}", file=sys.stderr)
            return 2
        stats = _time_backend()
        if args.json:
            print(json.dumps(stats))
        else:
            for k, v in stats.items():
                print(f"{k}: {v if isinstance(v, str) else f'{v:,.0f}'}")
        return 0

    results = []
    for backend in ("numpy", "numba"):
        env = dict(os.environ, SPINCM_BACKEND=backend)
        proc = subprocess.run(
            [sys.executable, __file__, "--backend", backend, "--json"],
            env=env, capture_output=True, text=True,
        )
        if proc.returncode != 0:
            print(f"{backend} run failed:\n{proc.stderr}", file=sys.stderr)
            continue
        results.append(json.loads(proc.stdout.strip().splitlines()[-1]))

    if not results:
        return 1
    keys = ("theta_evals_per_s", "jet_products_per_s", "commutators_per_s")
    header = f"{'metric':26s}" + "".join(f"{r['backend']:>14s}" for r in results)
    print(header)
    print("-" * len(header))
    for k in keys:
        row = f"{k:26s}" + "".join(f"{r[k]:>14,.0f}" for r in results)
        if len(results) == 2 and results[0][k] > 0:
            row += f"   x{results[1][k] / results[0][k]:.1f}"
        print(row)
    return 0


if __name__ == "__main__":
    sys.exit(main())
