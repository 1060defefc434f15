"""
Monte Carlo for the random connection model on a periodic box.

Each sample draws its own Poisson cloud from an independent stream derived
from ``(master seed, sample index)``. Edge coins are keyed by the sorted
pair of point identities and an edge seed, so a graph does not depend on
the order in which candidate pairs are enumerated.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .geometry import BoxDomain
from .kernels import AdjacencyKernel, eval_adjacency

#: refuse to draw clouds whose mean size exceeds this
MAX_MEAN_POINTS = 5e7

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_M1 = _U64(0xBF58476D1CE4E5B9)
_M2 = _U64(0x94D049BB133111EB)


class NoTransitionError(ValueError):
    pass


def _splitmix(z: np.ndarray) -> np.ndarray:
    z = z + _GOLDEN
    z = (z ^ (z >> _U64(30))) * _M1
    z = (z ^ (z >> _U64(27))) * _M2
    return z ^ (z >> _U64(31))


def pair_uniforms(i, j, edge_seed: int) -> np.ndarray:
    """Uniform [0, 1) variates that depend only on {i, j} and the edge seed."""
    i = np.asarray(i, dtype=np.uint64)
    j = np.asarray(j, dtype=np.uint64)
    lo = np.minimum(i, j)
    hi = np.maximum(i, j)
    with np.errstate(over="ignore"):
        z = _splitmix(_splitmix(_U64(edge_seed & 0xFFFFFFFFFFFFFFFF) ^ lo) ^ (hi * _GOLDEN))
    return (z >> _U64(11)).astype(np.float64) * 2.0**-53


def sample_poisson(domain: BoxDomain, lam: float, rng) -> np.ndarray:
    """Homogeneous Poisson cloud of intensity ``lam`` in the box, shape (N, d)."""
    if lam < 0:
        raise ValueError("intensity must be non-negative")
    mean = lam * domain.volume
    if not mean <= MAX_MEAN_POINTS:
        raise ValueError("box too large")
    rng = np.random.default_rng(rng)
    count = rng.poisson(mean)
    return rng.random((count, domain.d)) * domain.L


@dataclass(frozen=True, eq=False)
class GraphSample:
    points: np.ndarray
    pinned: tuple[int, ...]
    edges: np.ndarray
    labels: np.ndarray
    n_components: int
    seed: tuple[int, int] = (0, 0)

    def connected(self, i: int, j: int) -> bool:
        return bool(self.labels[i] == self.labels[j])

    def cluster_size(self, i: int) -> int:
        return int(np.count_nonzero(self.labels == self.labels[i]))

    def largest_cluster(self) -> int:
        if len(self.labels) == 0:
            return 0
        return int(np.bincount(self.labels).max())


def candidate_pairs(points: np.ndarray, kernel: AdjacencyKernel,
                    domain: BoxDomain) -> np.ndarray:
    if len(points) < 2:
        return np.empty((0, 2), dtype=np.int64)
    tree = cKDTree(np.mod(points, domain.L), boxsize=domain.L)
    return tree.query_pairs(kernel.r_cut, output_type="ndarray").astype(np.int64)


def build_graph(points, pinned, kernel: AdjacencyKernel, domain: BoxDomain,
                edge_seed: int, ids=None, point_seed: int = 0) -> GraphSample:
    """
    Random connection graph on ``pinned`` followed by ``points``.

    ``ids`` overrides the identities used for edge coins (defaults to the
    vertex index); coupled runs pass stable ids so that a thinned cloud
    keeps the coins of the surviving pairs.
    """
    domain.check_kernel(kernel)
    pinned = np.asarray(pinned, dtype=float).reshape(-1, domain.d)
    points = np.asarray(points, dtype=float).reshape(-1, domain.d)
    allpts = np.concatenate([pinned, points])
    n = len(allpts)
    if ids is None:
        ids = np.arange(n, dtype=np.uint64)
    pairs = candidate_pairs(allpts, kernel, domain)
    if len(pairs):
        disp = domain.minimal_image(allpts[pairs[:, 0]] - allpts[pairs[:, 1]])
        prob = eval_adjacency(kernel, disp)
        keep = pair_uniforms(ids[pairs[:, 0]], ids[pairs[:, 1]], edge_seed) < prob
        edges = pairs[keep]
    else:
        edges = pairs
    edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))] if len(edges) else edges
    adj = coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n))
    ncomp, labels = connected_components(adj, directed=False)
    return GraphSample(allpts, tuple(range(len(pinned))), edges, labels, int(ncomp),
                       (int(point_seed), int(edge_seed)))


# -- estimators -----------------------------------------------------------------


@dataclass(frozen=True)
class EstimateRecord:
    quantity: str
    lam: float
    value: float
    stderr: float
    n_samples: int
    x: tuple[float, ...] = ()
    config_digest: str = ""

    def __post_init__(self):
        if self.stderr < 0 or self.n_samples < 1:
            raise ValueError("stderr must be >= 0 and n_samples >= 1")

    def csv_row(self, d: int) -> list[str]:
        x = list(self.x) + [0.0] * (d - len(self.x))
        return ([self.quantity, repr(float(self.lam))] + [repr(float(v)) for v in x]
                + [repr(float(self.value)), repr(float(self.stderr)),
                   str(self.n_samples), self.config_digest])


def csv_header(d: int) -> list[str]:
    return ["quantity", "lambda"] + [f"x{i + 1}" for i in range(d)] + [
        "value", "stderr", "n", "config_digest"]


def _streams(seed: int, index: int):
    ss = np.random.SeedSequence([int(seed), int(index)])
    point_ss, edge_ss = ss.spawn(2)
    return np.random.default_rng(point_ss), int(edge_ss.generate_state(1, np.uint64)[0])


def _coupled_cloud(domain, lam, lam_max, rng):
    """Cloud at ``lam`` obtained by thinning one at ``lam_max``; returns ids too."""
    base = sample_poisson(domain, lam_max, rng)
    marks = rng.random(len(base))
    keep = np.flatnonzero(marks * lam_max < lam)
    return base[keep], keep


def _run_samples(fn, n_samples: int, threads: int, chunk: int = 256) -> np.ndarray:
    """Evaluate ``fn(i)`` for every sample index; output order is by index."""
    if n_samples < 1:
        raise ValueError("need at least one sample")
    blocks = [range(s, min(s + chunk, n_samples)) for s in range(0, n_samples, chunk)]

    def run(block):
        return np.array([fn(i) for i in block], dtype=float)

    if threads <= 1 or len(blocks) == 1:
        parts = [run(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, blocks))
    return np.concatenate(parts)


def _mean_and_stderr(vals: np.ndarray) -> tuple[float, float]:
    n = len(vals)
    mean = math.fsum(vals) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((vals - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)


def _check_displacement(x, domain: BoxDomain) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (domain.d,):
        raise ValueError(f"displacement must have {domain.d} components")
    if np.any(np.abs(x) >= domain.L / 2):
        raise ValueError("displacement exceeds torus radius")
    return x


def palm_two_point(kernel: AdjacencyKernel, lam: float, x, n_samples: int,
                   domain: BoxDomain, seed: int, threads: int = 1,
                   coupling_lambda: float | None = None,
                   config_digest: str = "") -> EstimateRecord:
    """
    Estimate P(0 <-> x) in the graph with 0 and x inserted.

    With ``coupling_lambda`` set, every sample thins a cloud drawn at that
    intensity, so estimates at different ``lam`` share randomness and are
    monotone in ``lam`` sample by sample.
    """
    x = _check_displacement(x, domain)
    domain.check_kernel(kernel)
    if lam < 0:
        raise ValueError("intensity must be non-negative")
    if coupling_lambda is not None and coupling_lambda < lam:
        raise ValueError("coupling intensity must be at least lam")
    if not np.any(x):
        return EstimateRecord("tau", lam, 1.0, 0.0, n_samples, tuple(float(v) for v in x), config_digest)
    pinned = np.stack([np.zeros(domain.d), domain.wrap(x)])

    def one(i):
        rng, eseed = _streams(seed, i)
        if coupling_lambda is None:
            pts = sample_poisson(domain, lam, rng)
            ids = None
        else:
            pts, keep = _coupled_cloud(domain, lam, coupling_lambda, rng)
            ids = np.concatenate([[0, 1], keep + 2]).astype(np.uint64)
        g = build_graph(pts, pinned, kernel, domain, eseed, ids=ids)
        return 1.0 if g.connected(0, 1) else 0.0

    vals = _run_samples(one, n_samples, threads)
    mean, se = _mean_and_stderr(vals)
    return EstimateRecord("tau", lam, mean, se, n_samples, tuple(float(v) for v in x), config_digest)


def susceptibility(kernel: AdjacencyKernel, lam: float, domain: BoxDomain,
                   n_samples: int, seed: int, threads: int = 1,
                   config_digest: str = "") -> EstimateRecord:
    """Mean size of the cluster of an inserted origin."""
    domain.check_kernel(kernel)
    if lam < 0:
        raise ValueError("intensity must be non-negative")
    origin = np.zeros((1, domain.d))

    def one(i):
        rng, eseed = _streams(seed, i)
        g = build_graph(sample_poisson(domain, lam, rng), origin, kernel, domain, eseed)
        return float(g.cluster_size(0))

    vals = _run_samples(one, n_samples, threads)
    mean, se = _mean_and_stderr(vals)
    return EstimateRecord("chi", lam, mean, se, n_samples, (), config_digest)


def largest_cluster_fraction(kernel, lam, domain, n_samples, seed, threads=1):
    """Mean of (largest cluster size) / (number of points)."""

    def one(i):
        rng, eseed = _streams(seed, i)
        g = build_graph(sample_poisson(domain, lam, rng), np.empty((0, domain.d)),
                        kernel, domain, eseed)
        return g.largest_cluster() / max(len(g.labels), 1)

    return _mean_and_stderr(_run_samples(one, n_samples, threads))[0]


#: order-parameter exponent ratios of ordinary percolation, by dimension
BETA_OVER_NU = {2: 5 / 48, 3: 0.4774}


@dataclass
class LambdaCResult:
    lo: float
    hi: float
    sizes: tuple[float, ...]
    history: list = field(default_factory=list)

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)


def estimate_lambda_c(kernel: AdjacencyKernel, sizes, lam_range=(1.0, 8.0),
                      tolerance: float = 0.1, n_samples: int = 40, seed: int = 0,
                      threads: int = 1, beta_over_nu="auto") -> LambdaCResult:
    """
    Bracket the crossing of largest-cluster-fraction curves for two box sizes.

    Below the threshold the smaller box carries the larger fraction, above
    it the larger box does; the sign change is located by bisection. Every
    evaluation at a given (lam, L) reuses the same seeds, so the difference
    curve is smooth in lam.

    Raw fractions decrease with L on both sides of the threshold at desk
    sizes, so by default they are rescaled by L^{beta/nu} with the
    percolation exponent ratio for the dimension. Pass ``None`` for raw
    curves.
    """
    sizes = tuple(sorted(float(s) for s in sizes))
    if len(sizes) < 2:
        raise ValueError("need at least two box sizes")
    small, big = sizes[0], sizes[-1]
    d = kernel.d
    dom_s, dom_b = BoxDomain(d, small), BoxDomain(d, big)
    if beta_over_nu == "auto":
        beta_over_nu = BETA_OVER_NU.get(d)
    scale = (lambda L: L**beta_over_nu) if beta_over_nu else (lambda L: 1.0)
    history = []

    def diff(lam):
        fs = largest_cluster_fraction(kernel, lam, dom_s, n_samples, seed, threads)
        fb = largest_cluster_fraction(kernel, lam, dom_b, n_samples, seed + 1, threads)
        val = fb * scale(big) - fs * scale(small)
        history.append((lam, fs, fb))
        return val

    lo, hi = map(float, lam_range)
    if not (diff(lo) < 0 < diff(hi)):
        raise NoTransitionError("no transition in range")
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if diff(mid) < 0:
            lo = mid
        else:
            hi = mid
    return LambdaCResult(lo, hi, sizes, history)
