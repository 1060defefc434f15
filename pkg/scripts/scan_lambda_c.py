"""Bracket the critical intensity of a kernel from largest-cluster crossings."""

import argparse

from rcmlab.kernels import AdjacencyKernel
from rcmlab.model import estimate_lambda_c


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kernel", choices=["disk", "gaussian"], default="disk")
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--sizes", type=float, nargs=2, default=(8.0, 16.0))
    ap.add_argument("--range", type=float, nargs=2, default=(3.0, 7.0))
    ap.add_argument("--samples", type=int, default=60)
    ap.add_argument("--tolerance", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    kernel = getattr(AdjacencyKernel, args.kernel)(args.d)
    res = estimate_lambda_c(kernel, args.sizes, tuple(args.range), args.tolerance,
                            args.samples, args.seed)
    for row in res.history:
        print("  ".join(f"{v:.4f}" for v in row))
    print(f"lambda_c in [{res.lo:.3f}, {res.hi:.3f}]")


if __name__ == "__main__":
    main()
