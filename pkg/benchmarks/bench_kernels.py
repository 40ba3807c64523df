"""Compare the numba-compiled kernels with the plain numpy fallback.

Each backend runs in its own interpreter because the switch
(``SPECIATION_DISABLE_NUMBA``) is read at import time.  JIT compilation
is excluded: every timing follows a warm-up call.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
import numpy as np
from speciation import _kernels, preset_scheme, solve
from speciation.conservation import assign_totals, canonical_moieties
from speciation.equilibrium import System, initial_guess

repeat = int(sys.argv[1])
scheme = preset_scheme("tris-borate")
system = System(scheme, assign_totals(canonical_moieties(scheme), {"B": 0.2, "T": 0.2}))
lnK = scheme.log10_K() * np.log(10.0)
u0 = initial_guess(system)
args = (system.nu, lnK, system.lam, system.totals, system.z, system.charged)

def kernel():
    for _ in range(500):
        _kernels.newton(u0, *args, 1e-10, 100, 30)

grid = np.round(np.linspace(0.1, 0.3, 11), 12)

def sweep():
    for c_b in grid:
        for c_t in grid:
            solve(scheme, {"B": float(c_b), "T": float(c_t)})

out = {"numba": _kernels.USE_NUMBA}
for name, fn in (("kernel", kernel), ("grid", sweep)):
    fn()
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    out[name] = min(times)
print(json.dumps(out))
"""


def run(disable: bool, repeat: int) -> dict:
    env = dict(os.environ, SPECIATION_DISABLE_NUMBA="1" if disable else "0")
    proc = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", action="store_true", help="machine-readable output")
    args = ap.parse_args(argv)

    fast = run(False, args.repeat)
    slow = run(True, args.repeat)
    result = {
        "numba_available": fast["numba"],
        "kernel_s": {"numba": fast["kernel"], "numpy": slow["kernel"]},
        "grid_s": {"numba": fast["grid"], "numpy": slow["grid"]},
        "kernel_speedup": slow["kernel"] / fast["kernel"],
        "grid_speedup": slow["grid"] / fast["grid"],
    }
    if args.json:
        print(json.dumps(result, indent=2))
        return
    print("500 Newton solves (Tris-borate, I = 0)")
    print(f"  numba  {fast['kernel']:.4f} s")
    print(f"  numpy  {slow['kernel']:.4f} s   x{result['kernel_speedup']:.1f}")
    print("11 x 11 grid with activity correction")
    print(f"  numba  {fast['grid']:.4f} s")
    print(f"  numpy  {slow['grid']:.4f} s   x{result['grid_speedup']:.1f}")
    if not fast["numba"]:
        print("numba not importable: both runs used numpy")


if __name__ == "__main__":
    t0 = time.perf_counter()
    main()
    print(f"(total {time.perf_counter() - t0:.1f} s)", file=sys.stderr)
