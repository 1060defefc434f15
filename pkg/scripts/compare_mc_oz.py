"""Monte Carlo two-point function vs the OZ solution with a vanishing lace kernel."""

import argparse
import math

from rcmlab.geometry import BoxDomain
from rcmlab.grid import discretize
from rcmlab.kernels import AdjacencyKernel
from rcmlab.model import palm_two_point
from rcmlab.oz import form_J, oz_deconvolve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", type=float, default=0.5)
    ap.add_argument("--samples", type=int, default=20_000)
    ap.add_argument("--L", type=float, default=16.0)
    ap.add_argument("--n", type=int, default=64)
    args = ap.parse_args()

    kernel = AdjacencyKernel.gaussian(2)
    phi = discretize(kernel, 2, args.L, args.n)
    lam_tau = oz_deconvolve(form_J(phi, lam=args.lam)).lam_tau
    dom = BoxDomain(2, args.L)
    h = args.L / args.n
    print("   |x|   monte-carlo  stderr    oz       ratio")
    for i, r in enumerate((0.5, 1.0, 1.5, 2.0, 2.5, 3.0)):
        x = (round(r / h) * h, 0.0)
        rec = palm_two_point(kernel, args.lam, x, args.samples, dom, seed=77 + i)
        oz = lam_tau.value_at(x) / args.lam
        print(f"{math.hypot(*x):6.2f}  {rec.value:.5f}  {rec.stderr:.5f}  {oz:.5f}  "
              f"{rec.value / oz:.3f}")


if __name__ == "__main__":
    main()
