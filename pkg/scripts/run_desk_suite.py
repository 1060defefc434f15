"""Run the diagram certification desk suite and write a JSON-lines report."""

import argparse
import collections
import json
import time

from rcmlab.diagrams.certify import desk_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="desk_suite.jsonl")
    ap.add_argument("--n", type=int, default=16, help="grid points per axis")
    ap.add_argument("--chains", type=int, default=100_000)
    ap.add_argument("--self-test", action="store_true")
    args = ap.parse_args()

    t0 = time.perf_counter()
    recs = desk_suite(n=args.n, n_chains=args.chains, self_test=args.self_test)
    with open(args.out, "w") as fh:
        for r in recs:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
    worst = collections.defaultdict(float)
    for r in recs:
        if r["rhs"] > 0:
            worst[r["case_id"]] = max(worst[r["case_id"]], r["lhs"] / r["rhs"])
    print(f"{len(recs)} certifications, {sum(not r['holds'] for r in recs)} failures, "
          f"{time.perf_counter() - t0:.1f}s")
    for cid, ratio in sorted(worst.items(), key=lambda kv: -kv[1]):
        print(f"  {cid:28s} max lhs/rhs = {ratio:.4f}")


if __name__ == "__main__":
    main()
