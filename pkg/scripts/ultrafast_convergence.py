"""Exact TV distance to the Gibbs law along the memoryless process.

Prints one row per time step and marks the jump times; the distance drops
to round-off exactly at the last one.

    python3 scripts/ultrafast_convergence.py --init 1,4,7 --alpha 0.5
"""

import argparse
import math

from jep.exact import enumerate_states
from jep.harness import convergence_profile
from jep.process import jump_times
from jep.sets import parse_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--init", default="1,4,7")
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--extra", type=int, default=3, help="steps to show past the last jump")
    args = ap.parse_args()

    A = parse_config(args.init)
    taus = jump_times(A)
    n = len(A)
    # truncation deep enough for a 1e-12 tail
    h = max(A[-1] + 2, n + math.ceil(math.log(1e-12 / n) / math.log(args.alpha)))
    T = taus[-1] + args.extra
    profile = convergence_profile(A, args.alpha, T, enumerate_states(n, h), tol=1e-9)

    print(f"X0={A!r} alpha={args.alpha} jump times={taus} h_max={h}")
    print(f"{'t':>4}  {'TV to Gibbs':>12}")
    for t, tv in profile:
        mark = "  <- jump" if t in taus else ""
        print(f"{t:>4}  {tv:12.3e}{mark}")


if __name__ == "__main__":
    main()
