"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Prints one line per kernel with both timings, the speedup and the largest
relative difference between the two outputs, then an end-to-end timing of
one propagator evaluation under each backend (run in a subprocess so the
backend choice at import time is honoured).
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from artifact import _pykernels as py

try:
    from artifact import _ckernels as cy
except ImportError:
    cy = None


def cases(rng):
    n, nk = 20001, 2048
    ks = np.sort(rng.uniform(-60.0, 60.0, nk))
    coef = rng.normal(size=nk) + 1j * rng.normal(size=nk)
    vals = rng.normal(size=n) + 1j * rng.normal(size=n)
    x0, dx = -20.0, 2e-3

    m = 20001 - 2
    h, hbar, kin = 2e-4, 0.1, 0.1 ** 2 / (2 * 2e-3 ** 2)
    mu = 1j * h / (2 * hbar)
    v = np.zeros(m)
    v[m // 2] = 1.0 / 2e-3
    a_diag = (1 + mu * (2 * kin + v)).astype(complex)
    b_diag = (1 - mu * (2 * kin + v)).astype(complex)
    psi = np.exp(-((np.arange(m) - m / 2) * 2e-3 + 2.0) ** 2 / 0.4).astype(complex)
    return {
        "phase_sum": lambda mod: mod.phase_sum(x0, dx, n, ks, coef),
        "sample_transform": lambda mod: mod.sample_transform(x0, dx, vals, ks),
        "cn_propagate(500 steps)": lambda mod: mod.cn_propagate(psi.copy(), 500, a_diag, complex(-mu * kin),
                                                                 b_diag, complex(mu * kin)),
    }


END_TO_END = (
    "import time;"
    "from artifact.states import CoherentParams;"
    "from artifact.quantum_delta import DeltaCoupling, quantum_evolve, default_grid;"
    "from artifact.numerics import BACKEND;"
    "P = CoherentParams.standard(0.1, 1.0, -2.0, 1.0);"
    "c = DeltaCoupling.for_params(-1.0, P);"
    "g = default_grid(P, (0.0, 4.0), c);"
    "t0 = time.perf_counter(); quantum_evolve(P, 4.0, c, g);"
    "print(BACKEND, len(g.xs), time.perf_counter() - t0)"
)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if cy is None:
        print("compiled kernels not built; only the fallback is available")
        return 1
    rng = np.random.default_rng(7)
    print(f"{'kernel':<26}{'cython s':>11}{'python s':>11}{'speedup':>9}{'rel diff':>11}")
    for name, run in cases(rng).items():
        t_cy = min(timeit.repeat(lambda: run(cy), number=1, repeat=args.repeat))
        t_py = min(timeit.repeat(lambda: run(py), number=1, repeat=args.repeat))
        a, b = run(cy), run(py)
        diff = float(np.max(np.abs(a - b)) / np.max(np.abs(b)))
        print(f"{name:<26}{t_cy:>11.4f}{t_py:>11.4f}{t_py / t_cy:>9.1f}{diff:>11.1e}")

    print("\nend to end: quantum_evolve, hbar=0.1, alpha=-1, t=4")
    for forced in ("", "1"):
        env = dict(os.environ, ARTIFACT_PURE_PYTHON=forced)
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
        backend, npts, secs = out.stdout.split()
        print(f"  {backend:<8} grid {npts:>6} points  {float(secs):8.2f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
