#!/usr/bin/env python3
"""Benchmark the compiled event kernels against the pure-numpy fallback.

The kernel backend is chosen at import time via HEXMIX_NO_NUMBA, so each
mode runs in a child interpreter.  Usage: python3 scripts/benchmark_kernels.py
"""

import json
import subprocess
import sys

_CHILD = r"""
import json, os, sys, time
from hexmix import _kernels
from hexmix.dynamics import ChainConfig, grand_coupling
from hexmix.hexlattice import HexDomain

n = int(sys.argv[1])
T = float(sys.argv[2])
cfg = ChainConfig(domain=HexDomain(n, n, n), seed=12345)
grand_coupling(cfg, 1.0)  # warm up (jit compilation)
t0 = time.perf_counter()
cr = grand_coupling(cfg, T)
dt = time.perf_counter() - t0
print(json.dumps({
    "backend": "numba" if _kernels.HAVE_NUMBA else "fallback",
    "events": cr.event_count,
    "seconds": dt,
    "coalesced": cr.coalesced,
}))
"""


def run(no_numba: bool, n: int, T: float) -> dict:
    import os

    env = dict(os.environ)
    if no_numba:
        env["HEXMIX_NO_NUMBA"] = "1"
    else:
        env.pop("HEXMIX_NO_NUMBA", None)
    out = subprocess.run(
        [sys.executable, "-c", _CHILD, str(n), str(T)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 16
    T = float(sys.argv[2]) if len(sys.argv) > 2 else 200.0
    rows = [run(False, n, T), run(True, n, T)]
    print(f"{'backend':<10} {'events':>12} {'seconds':>10} {'events/s':>14}")
    for r in rows:
        rate = r["events"] / r["seconds"]
        print(f"{r['backend']:<10} {r['events']:>12} {r['seconds']:>10.3f} {rate:>14.0f}")
    if rows[0]["backend"] == rows[1]["backend"]:
        print("note: numba unavailable; both runs used the fallback")
    else:
        speedup = rows[1]["seconds"] / rows[0]["seconds"]
        print(f"speedup (numba over fallback): {speedup:.1f}x")


if __name__ == "__main__":
    main()
