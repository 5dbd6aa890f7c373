"""Compare the compiled and numpy backends of the pointwise kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 20] [--size 65536]

Prints the best-of-``repeat`` time per call for each kernel and backend and
the maximum difference between the two backends' outputs.
"""
import argparse
import timeit

import numpy as np

from beamlab import kernels
from beamlab.dispersion import solve_profile_ode


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--size", type=int, default=1 << 16)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    u_real = rng.standard_normal(args.size)
    u_cplx = u_real + 1j * rng.standard_normal(args.size)
    prof = solve_profile_ode(13.0, 50.0)
    q = rng.uniform(0.0, prof.tau_max, args.size)

    backends = ["python"] + (["compiled"] if kernels.BACKEND == "compiled" else [])
    cases = [
        ("power real kappa=3", lambda p, h: p(u_real, 3.0, -1.0)),
        ("power real kappa=13", lambda p, h: p(u_real, 13.0, -1.0)),
        ("power complex kappa=13", lambda p, h: p(u_cplx, 13.0, -1.0)),
        ("power real kappa=2.5", lambda p, h: p(u_real, 2.5, -1.0)),
        ("hermite5", lambda p, h: h(prof.tau, prof.C, prof.Cp, prof.Cpp, q)[0]),
    ]
    print(f"size={args.size} repeat={args.repeat} active backend={kernels.BACKEND}")
    print(f"{'kernel':<24}" + "".join(f"{b:>14}" for b in backends) + f"{'speedup':>10}{'max diff':>12}")
    for name, call in cases:
        times, outs = [], []
        for b in backends:
            p, h = kernels.get_backend(b)
            outs.append(call(p, h))
            times.append(_best(lambda: call(p, h), args.repeat))
        line = f"{name:<24}" + "".join(f"{t * 1e3:>12.3f}ms" for t in times)
        if len(times) == 2:
            diff = float(np.max(np.abs(outs[0] - outs[1])))
            line += f"{times[0] / times[1]:>9.2f}x{diff:>12.2e}"
        print(line)


if __name__ == "__main__":
    main()
