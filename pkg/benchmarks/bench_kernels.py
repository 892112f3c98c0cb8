"""Timing comparison of the numba and numpy kernel backends.

Runs the subordination solvers on a representative density workload
(2001-point grid, epsilon ladder) for several n and prints a table.

    python3 benchmarks/bench_kernels.py [--points 2001] [--repeat 3]

The backend is frozen at import time, so each backend runs in its own
subprocess with FREESTEIN_KERNELS set.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

_WORKER = """
import json, math, sys, time
import numpy as np
from freestein import _kernels
from freestein.analytic import MeasureSpec

points = int(sys.argv[1])
repeat = int(sys.argv[2])
base = MeasureSpec.atomic([(-1.0, 0.5), (1.0, 0.5)])
semi = MeasureSpec.semicircle(0.0, 1.0)
ladder = (4e-3, 2e-3, 1e-3)

results = {"backend": _kernels.BACKEND, "rows": []}
for n in (8, 64, 512):
    scaled = base.dilate(1.0 / math.sqrt(n))
    desc = scaled.descriptor()
    xs = np.linspace(-6.0, 6.0, points)
    # warmup (includes any JIT compilation)
    _kernels.nfold_omega((xs[:64] + 1j * 1e-3).astype(complex), *desc, float(n),
                         1e-13, 10000, 1000)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for eps in ladder:
            _kernels.nfold_omega((xs + 1j * eps).astype(complex), *desc, float(n),
                                 1e-13, 10000, 1000)
        best = min(best, time.perf_counter() - t0)
    results["rows"].append({"task": f"nfold n={n}", "seconds": best})

da = base.dilate(0.7)
db = semi.dilate(0.5)
xs = np.linspace(-4.0, 4.0, points)
_kernels.pair_omega((xs[:64] + 1j * 1e-3).astype(complex), *da.descriptor(),
                    *db.descriptor(), 1e-13, 10000, 1000)
best = float("inf")
for _ in range(repeat):
    t0 = time.perf_counter()
    for eps in ladder:
        _kernels.pair_omega((xs + 1j * eps).astype(complex), *da.descriptor(),
                            *db.descriptor(), 1e-13, 10000, 1000)
    best = min(best, time.perf_counter() - t0)
results["rows"].append({"task": "pair atomic+semicircle", "seconds": best})
print(json.dumps(results))
"""


def run_backend(backend: str, points: int, repeat: int) -> dict:
    env = dict(os.environ, FREESTEIN_KERNELS=backend)
    out = subprocess.run(
        [sys.executable, "-c", _WORKER, str(points), str(repeat)],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=2001)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    t0 = time.perf_counter()
    reports = {}
    for backend in ("numpy", "numba"):
        try:
            reports[backend] = run_backend(backend, args.points, args.repeat)
        except subprocess.CalledProcessError as exc:
            print(f"{backend}: failed\n{exc.stderr}", file=sys.stderr)
    if len(reports) < 2:
        print("need both backends for a comparison", file=sys.stderr)
        return 1

    tasks = [row["task"] for row in reports["numpy"]["rows"]]
    print(f"{'task':<26} {'numpy (s)':>12} {'numba (s)':>12} {'speedup':>9}")
    for i, task in enumerate(tasks):
        t_np = reports["numpy"]["rows"][i]["seconds"]
        t_nb = reports["numba"]["rows"][i]["seconds"]
        print(f"{task:<26} {t_np:>12.4f} {t_nb:>12.4f} {t_np / t_nb:>8.1f}x")
    print(f"(grid {args.points} points x 3 eps, best of {args.repeat}; "
          f"total {time.perf_counter() - t0:.1f}s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
