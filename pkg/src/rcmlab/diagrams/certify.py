"""
Numerical certification of the diagram inequalities.

Every check produces a :class:`Certification` carrying both sides; a check
holds iff ``lhs <= rhs * (1 + 1e-9)``.  :func:`desk_suite` runs the whole
catalogue on OZ-generated two-point functions at small scale.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import cache

import numpy as np

from .. import grid as G
from ..grid import GridField
from . import basic
from .segments import CASES, case_lhs
from .edges import tilde_tau, tau_plus
from .engine import DiagramContext, Edge, Network, evaluate, network_norm
from .martini import H_bar, h_network, h_inf_bound_rhs
from .psi import composition_value

REL_TOL = 1e-9


@dataclass
class Certification:
    case_id: str
    paper_anchor: str
    lhs: float
    rhs: float
    params: dict
    rhs_text: str = ""
    scan_resolution: str = "all grid offsets"

    @property
    def holds(self) -> bool:
        return bool(self.lhs <= self.rhs * (1 + REL_TOL))

    def record(self) -> dict:
        return {"case_id": self.case_id, "paper_anchor": self.paper_anchor,
                "lhs": float(self.lhs), "rhs": float(self.rhs), "holds": self.holds,
                "params": self.params, "scan_resolution": self.scan_resolution}


@dataclass
class DiagramReport:
    name: str
    params: dict
    value: float
    location: tuple | None = None
    certifications: list = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        return all(c.holds for c in self.certifications)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["certifications"] = [c.record() for c in self.certifications]
        return d


def _p_key(p):
    return "inf" if math.isinf(p) else float(p)


class Quantities:
    """Sup quantities at one intensity, computed lazily and cached."""

    def __init__(self, tau: GridField, phi: GridField, lam: float, budget=None):
        self.tau, self.phi, self.lam = tau, phi, float(lam)
        self.tt = tilde_tau(tau, phi, lam)
        kw = {} if budget is None else {"budget": budget}
        self.ctx = DiagramContext({"tau": tau, "phi": phi}, lam, **kw)
        self._W = cache(self._W_impl)
        self._T = cache(lambda b: basic.triangle_T(tau, self.lam, b))
        self._B = cache(lambda b: basic.wedge_B1(tau, self.lam, b))
        self._E = cache(lambda a: G.weighted_norm(self.tt, a, math.inf))
        self._H = {}

    def _W_impl(self, a, b, p):
        return basic.W_bar(self.tt, a, b, p)[0]

    def W(self, a, b, p):
        return self._W(float(a), float(b), p)

    def T(self, b):
        return self._T(float(b))

    def B(self, b):
        return self._B(float(b))

    def To(self, b):
        return self.T(b) + self.B(b) + self.B(0)

    def E(self, a):
        return self._E(float(a))

    def ptri_bound(self, t):
        return basic.p_triangle_bound(self.tau, self.lam, t)

    def H(self, a, b, ps):
        key = (float(a), float(b))
        missing = [p for p in ps if (key, p) not in self._H]
        if missing:
            for p, v in H_bar(self.ctx, a, b, missing).items():
                self._H[(key, p)] = v
        return {p: self._H[(key, p)] for p in ps}

    def params(self, a=None, b=None, p=None) -> dict:
        f = self.tau
        return {"a": a, "b": b, "p": None if p is None else _p_key(p), "lambda": self.lam,
                "d": f.d, "n": f.n, "L": f.L}


def unit_ball_norm(f: GridField, p: float) -> float:
    """|| 1_{|x| < 1} ||_p on the grid."""
    if math.isinf(p):
        return 1.0
    count = int(np.count_nonzero(f.radius < 1))
    return (count * f.cell) ** (1.0 / p)


# individual inequality families

def certify_h_inf(Q: Quantities, a, b) -> Certification:
    val, u, v = Q.H(a, b, [math.inf])[math.inf]
    rhs = h_inf_bound_rhs(Q.tau, Q.tt, Q.lam, a, b)
    return Certification("martini-inf", "martini-sup-bound", val, rhs, Q.params(a, b, math.inf),
                         "lam^2 |tau|_2^2 E(a) T(0) |tau^b*tau|_inf")


def certify_extra(Q: Quantities, f, t, ps) -> list:
    out = []
    for p in ps:
        rhs = Q.W(f, t, p) + unit_ball_norm(Q.tau, p) * Q.E(0) * Q.E(f)
        out.append(Certification("bubble-theta-removal", "bubble-theta-removal",
                                 Q.W(f, 0, p), rhs, Q.params(f, t, p),
                                 "W(f,t) + c_p E(0) E(f)"))
    rhs = Q.lam * G.weighted_norm(Q.tau, t, math.inf) * G.weighted_norm(Q.phi, 0, 1) + Q.T(t)
    out.append(Certification("wedge-bound", "wedge-bound", Q.B(t), rhs, Q.params(0, t),
                             "lam |tau^t|_inf |phi|_1 + T(t)"))
    for p in ps:
        out.append(Certification("p-triangle", "p-triangle",
                                 basic.p_triangle(Q.tau, Q.lam, t, p), Q.ptri_bound(t),
                                 Q.params(0, t, p), "T(t)/lam + |tau^t|_inf B00"))
    return out


def contracted_network(theta: float) -> Network:
    return Network("contracted", (Edge("o", "t", weight=theta), Edge("t", "z"),
                                  Edge("z", "u", contractible=True)),
                   internal=("t", "z"), fixed=("o",), free=("u",))


def certify_contracted(Q: Quantities, theta) -> Certification:
    vals, _, _ = evaluate(Q.ctx, contracted_network(theta), {"o": (0,) * Q.tau.d})
    return Certification("contracted-triangle", "contracted-triangle", float(vals.max()),
                         Q.To(theta), Q.params(0, theta), "T(t) + B(t,0) + B(0,0)")


def certify_pi0(Q: Quantities, f, t, ps) -> list:
    plus = tau_plus(Q.tau, Q.phi, Q.lam)
    half_sq = plus.like(0.5 * plus.values**2)
    out = []
    for p in ps:
        lhs = G.weighted_norm(half_sq, f + t, p)
        mid = 0.5 * basic.bubble_W(Q.tt, f, Q.tt, t, p, (0,) * Q.tau.d)
        out.append(Certification("pi0-chain-1", "pi0-chain", lhs, mid, Q.params(f, t, p),
                                 "W(f,t)(0)/2"))
        out.append(Certification("pi0-chain-2", "pi0-chain", mid, Q.W(f, t, p),
                                 Q.params(f, t, p), "W(f,t)"))
    return out


def certify_blocks(Q: Quantities, ms=(0, 1)) -> list:
    uv = basic.composite_UV(Q.phi, Q.tau, Q.lam)
    out = []
    for m in ms:
        left = composition_value(m, "left", Q.ctx)
        right = composition_value(m, "right", Q.ctx)
        prm = dict(Q.params(), m=m)
        out.append(Certification(f"left-block-m{m}", "left-block", left,
                                 3 * uv["U"] * uv["V"] ** m, prm, "3 U V^m"))
        out.append(Certification(f"right-block-m{m}", "right-block", right,
                                 2 * uv["U"] * uv["V"] ** m, prm, "2 U V^m"))
    return out


def certify_splitting(n_chains: int = 100_000, d: int = 3, seed: int = 0) -> list:
    """Max of |x_N - x_0|^a / (N^a sum |x_j - x_{j-1}|^a) over random chains."""
    rng = np.random.default_rng(seed)
    out = []
    for a in (1.0, 2.0, 3.0):
        worst = 0.0
        for N in range(1, 7):
            m = -(-n_chains // 6)
            steps = rng.standard_normal((m, N, d)) * rng.exponential(1.0, (m, N, 1))
            total = np.linalg.norm(steps.sum(axis=1), axis=1) ** a
            parts = np.sum(np.linalg.norm(steps, axis=2) ** a, axis=1)
            worst = max(worst, float(np.max(total / (N**a * parts))))
        out.append(Certification("power-splitting", "power-splitting", worst, 1.0,
                                 {"a": a, "b": None, "p": None, "lambda": None, "d": d,
                                  "n": None, "L": None},
                                 "1", f"{n_chains} random chains, N <= 6"))
    return out


def certify_case(Q: Quantities, case_id: str, f, t, p, mutate: float = 1.0) -> Certification:
    if case_id == "2a-psi2-H":
        return certify_h_network(Q, f, t, p, mutate)
    if case_id not in CASES:
        raise ValueError(f"unimplemented case id: {case_id!r}")
    case = CASES[case_id]
    lhs, loc, res = case_lhs(Q.ctx, case, f, t, p)
    return Certification(case_id, case.anchor, mutate * lhs, case.rhs(Q, f, t, p),
                         Q.params(f, t, p), case.rhs_text, res)


def certify_h_network(Q: Quantities, f, t, p, mutate: float = 1.0) -> Certification:
    """Explicit H network at the dense argmax and a few lattice points, vs dense sup."""
    val, u, v = Q.H(f, t, [p])[p]
    d = Q.tau.d
    pts = [(u, v), ((0,) * d, (1,) + (0,) * (d - 1)), ((1,) * d, (0,) * d)]
    lhs = max(float(network_norm(Q.ctx, h_network(f, t, vv), p,
                                 {"o": (0,) * d, "u": uu})) for uu, vv in pts)
    return Certification("2a-psi2-H", "segment-2a-psi2", mutate * lhs, val,
                         Q.params(f, t, p), "H(f,t)", f"{len(pts)} (u,v) points")


ALL_CASES = list(CASES) + ["2a-psi2-H"]


def segment_bounds(case_id: str, tau: GridField, phi: GridField, lam: float,
                            p: float, a: float, b: float) -> DiagramReport:
    Q = Quantities(tau, phi, lam)
    c = certify_case(Q, case_id, a, b, p)
    return DiagramReport(case_id, Q.params(a, b, p), c.lhs, None, [c])


def lambda_sup(quantity, lam_c: float = 1.0, n_points: int = 5) -> tuple[float, list]:
    """
    Approximate sup over [lam_c / 2, lam_c) of ``quantity(lam)`` on a grid.

    Returns the max and the grid actually used.
    """
    if n_points < 5:
        raise ValueError("need at least five intensities")
    grid = [lam_c * (0.5 + 0.5 * k / n_points) for k in range(n_points)]
    return max(quantity(lam) for lam in grid), grid


def certify_at(tau: GridField, phi: GridField, lam: float, pairs, ps, cases=None,
               self_test: bool = False, blocks=(0, 1)) -> list:
    """All inequality families at one intensity."""
    Q = Quantities(tau, phi, lam)
    cases = ALL_CASES if cases is None else list(cases)
    mutate = 2.0 if self_test else 1.0
    out = []
    thetas = sorted({t for _, t in pairs})
    for f, t in pairs:
        out.append(certify_h_inf(Q, f, t))
        out += certify_pi0(Q, f, t, ps)
    for f, t in pairs:
        out += [c for c in certify_extra(Q, f, t, ps)
                if c.case_id == "bubble-theta-removal"]
    for t in thetas:
        out += [c for c in certify_extra(Q, 0, t, ps) if c.case_id != "bubble-theta-removal"]
        out.append(certify_contracted(Q, t))
    out += certify_blocks(Q, blocks)
    for cid in cases:
        for f, t in pairs:
            for p in ps:
                out.append(certify_case(Q, cid, f, t, p, mutate))
    return out


DESK_KERNELS = (("gaussian", 8.0), ("disk", 4.0))
DESK_LAMBDAS = (0.3, 0.6, 0.9)
DESK_PAIRS = ((1.0, 1.0), (2.0, 1.0))
DESK_PS = (1.0, 2.0, math.inf)


def oz_tau(phi: GridField, lam: float) -> GridField:
    """tau from the OZ solve with vanishing lace kernel."""
    from ..oz import form_J, oz_deconvolve

    sol = oz_deconvolve(form_J(phi, None, lam))
    return sol.lam_tau.like(sol.lam_tau.values / lam, name="tau")


def desk_suite(d: int = 2, n: int = 16, kernels=DESK_KERNELS, lambdas=DESK_LAMBDAS,
               pairs=DESK_PAIRS, ps=DESK_PS, cases=None, self_test: bool = False,
               n_chains: int = 100_000, seed: int = 0) -> list:
    """
    Run every certification family on small OZ-generated kernels.

    Records come back in a fixed order (kernel, intensity, family), so
    serializing them gives a deterministic stream.
    """
    from ..kernels import AdjacencyKernel

    records = []
    if cases is not None and not list(cases):
        return records
    for kind, L in kernels:
        kernel = AdjacencyKernel.gaussian(d) if kind == "gaussian" else AdjacencyKernel.disk(d)
        phi = G.discretize(kernel, d, L, n)
        for lam in lambdas:
            tau = oz_tau(phi, lam)
            for c in certify_at(tau, phi, lam, pairs, ps, cases, self_test):
                rec = c.record()
                rec["params"]["kernel"] = kind
                records.append(rec)
    for c in certify_splitting(n_chains, seed=seed):
        records.append(c.record())
    return records
