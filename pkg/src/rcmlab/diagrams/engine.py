"""
A small tensor-network evaluator for diagrams on a periodic grid.

A diagram is a set of edges ``f^(a)(u - v)`` between letters.  Letters are
either fixed (given a grid point at evaluation time), free (left open and
returned as array axes), internal (summed with the vertex measure
``lam * cell``) or the norm letter ``x`` (kept as the leading axis so that
an L^p_x norm can be taken).

Contractible edges ``lam^{-1} delta + tau`` and explicit deltas are expanded
symbolically: every delta merges two letters, so the grid never carries a
spike.  Each resulting term is contracted with ``numpy.einsum`` over dense
circulant matrices ``M[x, y] = f^(a)(x - y)``.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field

import numpy as np

from ..grid import GridField
from .edges import DeltaDivergentError

DEFAULT_BUDGET = 60_000_000


class BudgetError(MemoryError):
    """A diagram needs more memory than the configured budget."""


@dataclass(frozen=True)
class Edge:
    """``field^(weight)(u - v + shift)``, optionally contractible."""

    u: str
    v: str
    field: str = "tau"
    weight: float = 0.0
    contractible: bool = False
    shift: tuple = ()

    def __post_init__(self):
        if self.contractible and self.weight == 0 and any(self.shift):
            raise ValueError("a contractible edge cannot carry a shift")


@dataclass(frozen=True)
class Delta:
    """``coef * delta(u - v)``."""

    u: str
    v: str
    coef: float


@dataclass(frozen=True)
class Network:
    name: str
    edges: tuple
    internal: tuple = ()
    deltas: tuple = ()
    fixed: tuple = ()
    free: tuple = ()
    norm: str | None = None

    def letters(self) -> set:
        out = set()
        for e in self.edges + self.deltas:
            out.update((e.u, e.v))
        return out

    def validate(self):
        declared = set(self.internal) | set(self.fixed) | set(self.free)
        if self.norm is not None:
            declared.add(self.norm)
        missing = self.letters() - declared
        if missing:
            raise ValueError(f"undeclared letters in {self.name}: {sorted(missing)}")
        roles = list(self.internal) + list(self.fixed) + list(self.free) + [self.norm]
        roles = [r for r in roles if r is not None]
        if len(roles) != len(set(roles)):
            raise ValueError(f"letter declared twice in {self.name}")

    def scaled(self, factor: float) -> "ScaledNetwork":
        return ScaledNetwork(self, factor)


@dataclass(frozen=True)
class ScaledNetwork:
    net: Network
    factor: float


@dataclass
class PsiValue:
    """Pointwise value: a regular part plus the amplitude of delta atoms."""

    regular: float
    singular: float = 0.0
    atoms: list = field(default_factory=list)

    def __add__(self, other):
        return PsiValue(self.regular + other.regular, self.singular + other.singular,
                        self.atoms + other.atoms)


class DiagramContext:
    """Fields on a common grid plus the cached circulant matrices."""

    def __init__(self, fields: dict, lam: float, budget: int = DEFAULT_BUDGET):
        fields = dict(fields)
        ref = next(iter(fields.values()))
        for f in fields.values():
            if not ref.same_grid(f):
                raise ValueError("shape mismatch between diagram fields")
        self.fields = fields
        self.lam = float(lam)
        self.ref: GridField = ref
        self.N = ref.n**ref.d
        self.cell = ref.cell
        self.budget = int(budget)
        if self.N * self.N > self.budget:
            raise BudgetError("grid too large for two-point diagram")
        idx = np.indices(ref.values.shape).reshape(ref.d, -1)
        diff = (idx[:, :, None] - idx[:, None, :]) % ref.n
        self._diff = np.ravel_multi_index(tuple(diff), ref.values.shape)
        self._cache: dict = {}

    def flat(self, point) -> int:
        return int(np.ravel_multi_index(tuple(int(i) % self.ref.n for i in point),
                                        self.ref.values.shape))

    def values(self, name: str, weight: float = 0.0, shift=()) -> np.ndarray:
        """Flat values of ``g(z) = f^(weight)(z + shift)``."""
        f = self.fields[name]
        vals = (f.weighted(weight) if weight else f).values
        if any(shift):
            vals = np.roll(vals, tuple(-int(s) for s in shift), axis=tuple(range(f.d)))
        return vals.reshape(-1)

    def matrix(self, name: str, weight: float = 0.0, shift=()) -> np.ndarray:
        key = (name, float(weight), tuple(int(s) for s in shift))
        if key not in self._cache:
            self._cache[key] = self.values(name, weight, shift)[self._diff]
        return self._cache[key]


class _UnionFind:
    def __init__(self, items):
        self.parent = {i: i for i in items}

    def find(self, a):
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def _largest_intermediate(path_info: str) -> int:
    m = re.search(r"Largest intermediate:\s*([0-9.e+]+)", path_info)
    return int(float(m.group(1))) if m else 0


def _terms(net: Network, ctx: DiagramContext):
    """Yield (coefficient, merges, smooth edges) for every delta expansion."""
    lam = ctx.lam
    split = [e for e in net.edges if e.contractible and e.weight == 0]
    rigid = [e for e in net.edges if not (e.contractible and e.weight == 0)]
    for choice in itertools.product((False, True), repeat=len(split)):
        coef = 1.0
        merges = [(d.u, d.v, d.coef) for d in net.deltas]
        smooth = list(rigid)
        for e, contract in zip(split, choice):
            if contract:
                merges.append((e.u, e.v, 1.0 / lam))
            else:
                smooth.append(e)
        yield coef, merges, smooth


def evaluate(ctx: DiagramContext, net: Network, points: dict | None = None):
    """
    Evaluate a network.

    Returns ``(regular, singular, atoms)`` where ``regular`` has one axis for
    the norm letter (if any) followed by one per free letter, each of length
    ``N``.  ``singular`` is the summed amplitude of terms where two fixed
    letters were merged by a delta at coinciding points.
    """
    net.validate()
    points = dict(points or {})
    for f in net.fixed:
        if f not in points:
            raise ValueError(f"no position given for fixed letter {f!r}")
    pos = {k: ctx.flat(v) for k, v in points.items()}
    out_letters = ([net.norm] if net.norm else []) + list(net.free)
    shape = (ctx.N,) * len(out_letters)
    regular = np.zeros(shape)
    singular = 0.0
    atoms = []
    outer = set(net.fixed) | set(net.free) | ({net.norm} if net.norm else set())
    for coef, merges, smooth in _terms(net, ctx):
        uf = _UnionFind(net.letters() | outer | set(net.internal))
        for u, v, c in merges:
            if not uf.union(u, v):
                raise DeltaDivergentError(f"delta-divergent: delta cycle in {net.name}")
            coef *= c
        classes: dict = {}
        for letter in uf.parent:
            classes.setdefault(uf.find(letter), []).append(letter)
        rep = {}
        pending_atom = []
        zero = False
        for members in classes.values():
            outs = [m for m in members if m in outer]
            inner = [m for m in members if m not in outer]
            if len(outs) >= 2:
                if net.norm in outs or any(m in net.free for m in outs):
                    raise DeltaDivergentError(
                        f"delta-divergent: delta on norm or free letter in {net.name}")
                ps = {pos[m] for m in outs}
                if len(ps) > 1:
                    zero = True
                pending_atom.append("=".join(sorted(outs)))
                coef *= ctx.lam ** len(inner)
                head = outs[0]
            elif outs:
                coef *= ctx.lam ** len(inner)
                head = outs[0]
            else:
                coef *= ctx.lam ** (len(inner) - 1)
                head = inner[0]
            for m in members:
                rep[m] = head
        if zero or coef == 0.0:
            continue
        value = _contract(ctx, net, smooth, rep, pos, out_letters)
        if pending_atom:
            if value.ndim:
                raise DeltaDivergentError(
                    f"delta-divergent: singular atom with open letters in {net.name}")
            atoms.append((coef * float(value), tuple(pending_atom)))
            singular += coef * float(value)
        else:
            regular = regular + coef * value
    return regular, singular, atoms


def _contract(ctx, net, smooth, rep, pos, out_letters):
    internal_reps = sorted({rep[i] for i in net.internal} - set(out_letters)
                           - set(net.fixed))
    variables = list(out_letters) + internal_reps
    ids = {v: k for k, v in enumerate(variables)}
    scalar = 1.0
    operands = []
    for e in smooth:
        a, b = rep[e.u], rep[e.v]
        M = ctx.matrix(e.field, e.weight, e.shift)
        a_fixed, b_fixed = a in pos and a not in ids, b in pos and b not in ids
        if a == b:
            scalar *= float(ctx.values(e.field, e.weight, e.shift)[0])
        elif a_fixed and b_fixed:
            scalar *= float(M[pos[a], pos[b]])
        elif a_fixed:
            operands += [M[pos[a], :], [ids[b]]]
        elif b_fixed:
            operands += [M[:, pos[b]], [ids[a]]]
        else:
            operands += [M, [ids[a], ids[b]]]
    measure = ctx.lam * ctx.cell
    for r in internal_reps:
        operands += [np.full(ctx.N, measure), [ids[r]]]
    for r in out_letters:
        if not any(r in sub for sub in operands[1::2]):
            operands += [np.ones(ctx.N), [ids[r]]]
    out_ids = [ids[r] for r in out_letters]
    if not operands:
        return np.asarray(scalar)
    path, info = np.einsum_path(*operands, out_ids, optimize="greedy")
    if _largest_intermediate(info) > ctx.budget:
        path, info = np.einsum_path(*operands, out_ids, optimize="optimal")
        if _largest_intermediate(info) > ctx.budget:
            raise BudgetError("grid too large for two-point diagram")
    return scalar * np.einsum(*operands, out_ids, optimize=path)


def lp_over_norm_letter(values: np.ndarray, cell: float, p: float) -> np.ndarray:
    """L^p norm over the leading axis (the norm letter)."""
    a = np.abs(values)
    if math.isinf(p):
        return a.max(axis=0)
    return (cell * np.sum(a**p, axis=0)) ** (1.0 / p)


def network_norm(ctx: DiagramContext, net: Network, p: float, points: dict | None = None):
    """``|| net ||_{L^p_x}`` for every setting of the free letters."""
    if net.norm is None:
        raise ValueError("network has no norm letter")
    regular, _, atoms = evaluate(ctx, net, points)
    return lp_over_norm_letter(regular, ctx.cell, p)


def network_value(ctx: DiagramContext, net: Network, points: dict | None = None) -> PsiValue:
    if net.norm is not None or net.free:
        raise ValueError("pointwise value needs a network without open letters")
    regular, singular, atoms = evaluate(ctx, net, points)
    return PsiValue(float(regular), float(sum(a for a, _ in atoms)), [k for _, k in atoms])


def sum_value(ctx: DiagramContext, nets, points: dict | None = None) -> PsiValue:
    total = PsiValue(0.0)
    for item in nets:
        net, factor = (item.net, item.factor) if isinstance(item, ScaledNetwork) else (item, 1.0)
        v = network_value(ctx, net, points)
        total = total + PsiValue(factor * v.regular, factor * v.singular, v.atoms)
    return total
