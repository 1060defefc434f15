"""Low-intensity Monte Carlo two-point function against phi + lam (phi * phi)."""

import argparse
import math

from rcmlab.geometry import BoxDomain
from rcmlab.kernels import AdjacencyKernel
from rcmlab.model import palm_two_point


def gauss2(r2, var):
    return math.exp(-r2 / (2 * var)) / (2 * math.pi * var)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", type=float, default=0.05)
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--L", type=float, default=16.0)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    kernel = AdjacencyKernel.gaussian(2)
    dom = BoxDomain(2, args.L)
    print("   |x|   estimate   stderr     first-order  z")
    for i, x in enumerate([(0.5, 0.0), (0.6, 0.8), (1.2, 0.5), (0.0, 1.6), (1.2, 1.6)]):
        rec = palm_two_point(kernel, args.lam, x, args.samples, dom, seed=1000 + i,
                             threads=args.threads)
        r2 = x[0] ** 2 + x[1] ** 2
        ref = gauss2(r2, 1.0) + args.lam * gauss2(r2, 2.0)
        z = (rec.value - ref) / rec.stderr if rec.stderr else float("nan")
        print(f"{math.sqrt(r2):6.2f}  {rec.value:.5f}  {rec.stderr:.5f}  {ref:.5f}  {z:+.2f}")


if __name__ == "__main__":
    main()
