"""
Command line interface.

Every subcommand reads a JSON config, writes its outputs atomically into
``--out`` and finishes with ``manifest.json`` (config digest, versions, wall
time and a hash of every output).  Exit codes: 0 success, 2 config error,
3 budget exceeded, 4 numeric-domain error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import grid as G
from .config import (BudgetExceeded, ConfigError, RunConfig, load_config, parse_p,
                     validate, versions)
from .geometry import BoxDomain
from .io import atomic_write_bytes, atomic_write_text
from .kernels import AdjacencyKernel, KernelError, eval_adjacency

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_NUMERIC = 0, 2, 3, 4


class NumericDomainError(ValueError):
    """Raised for inputs outside the mathematical domain of an operation."""


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


class Outputs:
    """Collects written files so that the manifest can hash them."""

    def __init__(self, out_dir):
        self.dir = Path(out_dir)
        self.hashes: dict[str, str] = {}

    def write(self, name: str, data) -> Path:
        if isinstance(data, str):
            data = data.encode("utf-8")
        path = self.dir / name
        atomic_write_bytes(path, data)
        self.hashes[name] = hashlib.sha256(data).hexdigest()
        return path


def _kernel(cfg: RunConfig) -> AdjacencyKernel:
    try:
        return AdjacencyKernel.from_config(cfg.dimension, cfg.kernel)
    except (KernelError, KeyError, TypeError) as exc:
        raise ConfigError(f"kernel: {exc}") from None


def _domain(cfg: RunConfig, kernel) -> BoxDomain:
    try:
        dom = BoxDomain(cfg.dimension, float(cfg.L))
        dom.check_kernel(kernel)
    except ValueError as exc:
        raise ConfigError(f"box: {exc}") from None
    return dom


def _check_samples(cfg: RunConfig, n: int):
    if n > cfg.budget.samples:
        raise BudgetExceeded(f"budget exceeded: {n} samples > {cfg.budget.samples}")


def _check_cells(cfg: RunConfig, d: int, n: int):
    if n**d > cfg.budget.cells:
        raise BudgetExceeded(f"budget exceeded: {n}^{d} grid cells > {cfg.budget.cells}")


def _edge_seed(cfg: RunConfig) -> int:
    return cfg.seeds.sample_seed


# -- subcommands ------------------------------------------------------------------


def cmd_adjacency(cfg: RunConfig, out: Outputs, threads: int):
    """phi at the configured displacements, or along the first axis."""
    kernel = _kernel(cfg)
    d = cfg.dimension
    xs = cfg.section("displacements")
    if xs is None:
        xs = [[r] + [0.0] * (d - 1) for r in np.linspace(0, 3, 31)]
    rows = []
    vals = eval_adjacency(kernel, np.asarray(xs, dtype=float))
    for x, v in zip(xs, vals):
        rows.append([repr(float(c)) for c in x] + [repr(float(v))])
    out.write("adjacency.csv", _csv_text([f"x{i + 1}" for i in range(d)] + ["phi"], rows))
    if cfg.section("grid") and cfg.L:
        n = cfg.section("grid")["n"]
        _check_cells(cfg, d, n)
        out.write("phi.rcmf", G.rcmf_bytes(G.discretize(kernel, d, cfg.L, n)))


def _tau_records(cfg, kernel, dom, threads):
    from .model import palm_two_point

    recs = []
    coupling = cfg.section("coupling_lambda")
    for x in cfg.section("displacements", []):
        recs.append(palm_two_point(kernel, cfg.lam, x, cfg.samples, dom, _edge_seed(cfg),
                                   threads=threads, coupling_lambda=coupling,
                                   config_digest=cfg.digest))
    return recs


def _chi_record(cfg, kernel, dom, threads):
    from .model import susceptibility

    return susceptibility(kernel, cfg.lam, dom, cfg.samples, _edge_seed(cfg),
                          threads=threads, config_digest=cfg.digest)


def _write_estimates(cfg, out, recs):
    from .model import csv_header

    rows = [r.csv_row(cfg.dimension) for r in recs]
    out.write("estimates.csv", _csv_text(csv_header(cfg.dimension), rows))


def cmd_simulate(cfg: RunConfig, out: Outputs, threads: int):
    kernel = _kernel(cfg)
    dom = _domain(cfg, kernel)
    n_disp = len(cfg.section("displacements", []))
    _check_samples(cfg, cfg.samples * (n_disp + 1))
    recs = _tau_records(cfg, kernel, dom, threads) + [_chi_record(cfg, kernel, dom, threads)]
    _write_estimates(cfg, out, recs)


def cmd_tau(cfg: RunConfig, out: Outputs, threads: int):
    kernel = _kernel(cfg)
    dom = _domain(cfg, kernel)
    _check_samples(cfg, cfg.samples * len(cfg.section("displacements")))
    _write_estimates(cfg, out, _tau_records(cfg, kernel, dom, threads))


def cmd_chi(cfg: RunConfig, out: Outputs, threads: int):
    kernel = _kernel(cfg)
    dom = _domain(cfg, kernel)
    _check_samples(cfg, cfg.samples)
    _write_estimates(cfg, out, [_chi_record(cfg, kernel, dom, threads)])


def cmd_lambda_c(cfg: RunConfig, out: Outputs, threads: int):
    from .model import estimate_lambda_c

    kernel = _kernel(cfg)
    sizes = cfg.section("box")["sizes"]
    for L in sizes:
        try:
            BoxDomain(cfg.dimension, float(L)).check_kernel(kernel)
        except ValueError as exc:
            raise ConfigError(f"box.sizes: {exc}") from None
    res = estimate_lambda_c(kernel, sizes, tuple(cfg.section("lambda_range", (1.0, 8.0))),
                            cfg.section("tolerance", 0.1), cfg.samples,
                            cfg.seeds.master, threads)
    doc = {"lo": res.lo, "hi": res.hi, "mid": res.mid, "sizes": list(res.sizes),
           "history": [list(map(float, h)) for h in res.history]}
    validate(doc, "lambda_c")
    out.write("lambda_c.json", _json_text(doc))


def _read_field(path) -> G.GridField:
    try:
        return G.read_rcmf(path)
    except FileNotFoundError:
        raise ConfigError(f"input not found: {path}") from None
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def cmd_oz(cfg: RunConfig, out: Outputs, threads: int):
    from .oz import (fit_field, form_J, infrared_check, oz_deconvolve, oz_report,
                     sigma_and_prediction)

    kernel = _kernel(cfg)
    d, n = cfg.dimension, cfg.section("grid")["n"]
    _check_cells(cfg, d, n)
    phi = G.discretize(kernel, d, float(cfg.L), n)
    pi = _read_field(cfg.section("pi")) if cfg.section("pi") else None
    if pi is not None and not pi.same_grid(phi):
        raise ConfigError("pi field does not match the configured grid")
    pair = form_J(phi, pi, float(cfg.lam))
    sol = oz_deconvolve(pair, critical=cfg.section("critical", "subtract"))
    ir = infrared_check(pair)
    model = None
    if d >= 3:
        model, _ = sigma_and_prediction(pair, lam_c=cfg.section("lambda_c"))
    fit = None
    if d >= 3:
        try:
            fit = fit_field(sol.lam_tau, cfg.section("window"))
        except ValueError:
            fit = None
    report = oz_report(pair, ir, model, fit)
    report["relative_residual"] = sol.relative_residual
    report["method"] = sol.method
    validate(report, "oz_report")
    out.write("oz_report.json", _json_text(report))
    out.write("lam_tau.rcmf", G.rcmf_bytes(sol.lam_tau))
    out.write("lam_tau_slice.csv", G.slice_csv(sol.lam_tau))


def cmd_certify(cfg: RunConfig, out: Outputs, threads: int, self_test: bool = False):
    from .diagrams.certify import (ALL_CASES, DESK_KERNELS, DESK_LAMBDAS, DESK_PAIRS,
                                   DESK_PS, desk_suite)

    sec = dict(cfg.section("certify", {}) or {})
    cases = sec.get("cases")
    if cases is not None:
        unknown = [c for c in cases if c not in ALL_CASES]
        if unknown:
            raise ConfigError(f"unimplemented case id: {unknown[0]!r}")
    d = cfg.dimension or 2
    n = sec.get("n", 16)
    _check_cells(cfg, d, n)
    if (n**d) ** 2 > max(cfg.budget.cells, 1) * 16:
        raise BudgetExceeded("budget exceeded: grid too large for two-point diagram")
    if cfg.kernel is not None:
        kernels = ((cfg.kernel["variant"], float(cfg.L or 8.0)),)
    else:
        kernels = DESK_KERNELS
    ps = tuple(parse_p(p) for p in sec.get("ps", DESK_PS))
    pairs = tuple(tuple(map(float, p)) for p in sec.get("pairs", DESK_PAIRS))
    lambdas = tuple(sec.get("lambdas", DESK_LAMBDAS))
    records = desk_suite(d=d, n=n, kernels=kernels, lambdas=lambdas, pairs=pairs, ps=ps,
                         cases=cases, self_test=self_test,
                         n_chains=sec.get("chains", 100_000), seed=cfg.seeds.master)
    lines = []
    for rec in records:
        validate(rec, "certification")
        lines.append(json.dumps(rec, sort_keys=True))
    out.write("certifications.jsonl", "".join(line + "\n" for line in lines))
    failed = sum(not r["holds"] for r in records)
    summary = {"lines": len(records), "failures": failed, "self_test": self_test}
    out.write("certify_summary.json", _json_text(summary))


def _read_estimates(path):
    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise ConfigError(f"input not found: {path}") from None
    rows = list(csv.DictReader(io.StringIO(text)))
    return [r for r in rows if r.get("quantity", "tau") == "tau"]


def _xs(row, d):
    return tuple(float(row[f"x{i + 1}"]) for i in range(d))


def cmd_compare(cfg: RunConfig, out: Outputs, threads: int):
    from .oz import a_d as a_d_const
    from .oz import AsymptoticModel

    inputs = cfg.section("inputs")
    if "monte_carlo" not in inputs or "oz" not in inputs:
        raise ConfigError("missing required key 'inputs.monte_carlo' or 'inputs.oz'")
    mc = _read_estimates(inputs["monte_carlo"])
    if not mc:
        raise ConfigError("no tau rows in the Monte Carlo input")
    d = sum(1 for k in mc[0] if k.startswith("x") and k[1:].isdigit())
    lam = float(cfg.lam if cfg.lam is not None else mc[0]["lambda"])
    oz_path = inputs["oz"]
    if str(oz_path).endswith(".csv"):
        other = {_xs(r, d): float(r["value"]) for r in _read_estimates(oz_path)}
        lookup = other.get
    else:
        field = _read_field(oz_path)
        if field.d != d:
            raise ConfigError("mismatched grids: dimension differs between inputs")

        def lookup(x):
            try:
                return field.value_at(x) / lam
            except ValueError as exc:
                raise ConfigError(f"mismatched grids: {exc}") from None
    model = None
    if d >= 3:
        sigma = cfg.section("sigma") or [1.0] * d
        model = AsymptoticModel(d, float(cfg.section("lambda_c", 1.0)), tuple(sigma),
                                a_d_const(d))
    rows = []
    for r in mc:
        x = _xs(r, d)
        v_mc = float(r["value"])
        v_oz = lookup(x)
        if v_oz is None:
            raise ConfigError(f"mismatched grids: no value at {x}")
        pred = float(model.predict(np.asarray(x))) if model and any(x) else math.nan
        ratio = v_mc / v_oz if v_oz else math.nan
        ratio_p = v_oz / pred if pred and not math.isnan(pred) else math.nan
        rows.append([repr(c) for c in x] + [repr(v_mc), repr(float(v_oz)), repr(pred),
                                            repr(ratio), repr(ratio_p)])
    header = [f"x{i + 1}" for i in range(d)] + ["monte_carlo", "oz", "prediction",
                                               "ratio_mc_oz", "ratio_oz_prediction"]
    out.write("compare.csv", _csv_text(header, rows))


def cmd_fit(cfg: RunConfig, out: Outputs, threads: int):
    from .oz import fit_field

    inputs = cfg.section("inputs")
    if "field" not in inputs:
        raise ConfigError("missing required key 'inputs.field'")
    f = _read_field(inputs["field"])
    fit = fit_field(f, cfg.section("window"))
    doc = dict(fit.as_dict(), n_points=fit.n_points)
    validate(doc, "fit")
    out.write("fit.json", _json_text(doc))


COMMANDS = {
    "adjacency": cmd_adjacency,
    "simulate": cmd_simulate,
    "tau": cmd_tau,
    "chi": cmd_chi,
    "lambda-c": cmd_lambda_c,
    "oz": cmd_oz,
    "certify": cmd_certify,
    "compare": cmd_compare,
    "fit": cmd_fit,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rcmlab", description=__doc__.splitlines()[1])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON config or a previous manifest")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="master seed (u64)")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--budget-cells", type=int, default=None)
    parser.add_argument("--self-test", action="store_true",
                        help="certify: double every segment-case lhs to exercise failures")
    return parser


def _run(args) -> int:
    if args.threads < 1:
        raise ConfigError("--threads must be at least 1")
    if args.seed is not None and not 0 <= args.seed < 2**64:
        raise ConfigError("--seed must be an unsigned 64-bit integer")
    cfg = load_config(args.command, args.config, seed=args.seed,
                      budget_cells=args.budget_cells)
    out = Outputs(args.out)
    start = time.perf_counter()
    fn = COMMANDS[args.command]
    if args.command == "certify":
        fn(cfg, out, args.threads, self_test=args.self_test)
    else:
        fn(cfg, out, args.threads)
    manifest = {
        "command": args.command,
        "config": cfg.raw,
        "config_digest": cfg.digest,
        "threads": args.threads,
        "versions": versions(),
        "wall_time": time.perf_counter() - start,
        "outputs": dict(sorted(out.hashes.items())),
    }
    validate(manifest, "manifest")
    atomic_write_text(Path(args.out) / "manifest.json", _json_text(manifest))
    return EXIT_OK


def main(argv=None) -> int:
    from .diagrams.edges import DeltaDivergentError
    from .diagrams.engine import BudgetError
    from .model import NoTransitionError
    from .oz import NonInvertibleKernelError, SupercriticalKernelError

    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BudgetExceeded, BudgetError, MemoryError) as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (SupercriticalKernelError, NonInvertibleKernelError, NoTransitionError,
            DeltaDivergentError, NumericDomainError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        if "box too large" in str(exc):
            print(f"budget error: {exc}", file=sys.stderr)
            return EXIT_BUDGET
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
