"""Compare the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5]

Times ``phase_rotate`` and ``invert_hermite`` directly, then one full
``evolve`` call per backend (the fallback is forced in a subprocess with
NLS_SHARP_PURE=1 so that the propagator picks it up at import).
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from nls_sharp import _fallback

try:
    from nls_sharp import _kernels as compiled
except ImportError:
    compiled = None

EVOLVE_SNIPPET = """
import time
from nls_sharp import BACKEND
from nls_sharp.grid import make_grid
from nls_sharp.initial import gaussian
from nls_sharp.potentials import Harmonic
from nls_sharp.propagator import SimulationParams, evolve
u0 = gaussian(make_grid(1, 16.0, {N}))
t0 = time.perf_counter()
evolve(u0, Harmonic(1.0), SimulationParams(1.0, 1.0, 1e-3, 1.0, 10**9), keep_snapshots=False, diagnostics=False)
print(BACKEND, time.perf_counter() - t0)
"""


def best(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def bench_phase(mod, n, repeat):
    rng = np.random.default_rng(0)
    u = rng.normal(size=n) + 1j * rng.normal(size=n)
    V = rng.normal(size=n)
    return best(lambda: mod.phase_rotate(u, V, 1.0, 1.0, 1e-3), repeat, 200)


def bench_invert(mod, n, repeat):
    y = np.linspace(-5, 5, n)
    x = y + 0.3 * np.sin(y)
    dx = 1 + 0.3 * np.cos(y)
    targets = np.linspace(-4.5, 4.5, n)
    return best(lambda: mod.invert_hermite(y, x, dx, targets, 1e-12, 50), repeat, 5)


def bench_evolve(N, pure):
    env = dict(os.environ)
    if pure:
        env["NLS_SHARP_PURE"] = "1"
    out = subprocess.run([sys.executable, "-c", EVOLVE_SNIPPET.format(N=N)], env=env, capture_output=True, text=True, check=True)
    backend, secs = out.stdout.split()
    return backend, float(secs)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if compiled is None:
        print("compiled extension not built; only the fallback is available")
    mods = [("python", _fallback)] + ([("cython", compiled)] if compiled is not None else [])
    print(f"{'kernel':<16}{'n':>8}" + "".join(f"{name:>14}" for name, _ in mods) + f"{'speedup':>10}")
    for label, fn in (("phase_rotate", bench_phase), ("invert_hermite", bench_invert)):
        for n in (1024, 16384):
            times = [fn(m, n, args.repeat) for _, m in mods]
            speed = f"{times[0] / times[-1]:>9.1f}x" if len(times) > 1 else ""
            print(f"{label:<16}{n:>8}" + "".join(f"{t * 1e6:>12.1f}us" for t in times) + speed)
    for N in (1024, 4096):
        rows = [bench_evolve(N, pure) for pure in (True, False)]
        print(f"evolve N={N}, 1000 steps: " + ", ".join(f"{b} {s:.3f}s" for b, s in rows))


if __name__ == "__main__":
    main()
