"""
Functions sampled on a periodic uniform grid.

Index 0 along every axis is the origin; coordinates use the minimal image,
so index ``i`` sits at ``h * ((i + n/2) mod n - n/2)``.  Transforms follow

    hat f(k) = int f(x) e^{+ik.x} dx,      f(x) = int hat f(k) e^{-ik.x} dk / (2 pi)^d

with the grid volume element ``h^d`` and the dual element ``(2 pi / L)^d``
carried explicitly, so ``hat f(0)`` is literally the integral of ``f``.
"""

from __future__ import annotations

import csv
import io as _io
import math
import struct
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .io import atomic_write_bytes, atomic_write_text
from .kernels import AdjacencyKernel, eval_adjacency

RCMF_MAGIC = b"RCMF"
RCMF_VERSION = 1
_HEADER = struct.Struct("<4sIIId")


class NonEvenFieldWarning(UserWarning):
    pass


def axis_coords(n: int, h: float) -> np.ndarray:
    i = np.arange(n)
    return h * ((i + n // 2) % n - n // 2)


@dataclass(frozen=True, eq=False)
class GridField:
    """
    Real function sampled on an ``n^d`` periodic grid of spacing ``h``.

    ``kernel`` marks a probability kernel (non-negative, unit mass).
    """

    values: np.ndarray
    h: float
    kernel: bool = False
    name: str = ""

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim < 1 or len(set(vals.shape)) != 1:
            raise ValueError("grid fields must be n x ... x n arrays")
        if vals.shape[0] % 2:
            raise ValueError("points per axis must be even")
        if not self.h > 0:
            raise ValueError("grid spacing must be positive")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.kernel:
            mass = self.h**self.d * vals.sum()
            if vals.min() < 0 or abs(mass - 1) > 1e-9:
                raise ValueError("kernel-tagged field must be non-negative with unit mass")

    # -- shape metadata ---------------------------------------------------

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def L(self) -> float:
        return self.n * self.h

    @property
    def cell(self) -> float:
        return self.h**self.d

    def same_grid(self, other: "GridField") -> bool:
        return self.values.shape == other.values.shape and math.isclose(
            self.h, other.h, rel_tol=1e-12)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        ax = axis_coords(self.n, self.h)
        return tuple(np.meshgrid(*([ax] * self.d), indexing="ij"))

    @cached_property
    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c * c for c in self.coords))

    # -- construction helpers ---------------------------------------------

    def like(self, values, name: str = "", kernel: bool = False) -> "GridField":
        return GridField(values, self.h, kernel=kernel, name=name)

    @classmethod
    def zeros(cls, d: int, n: int, h: float, name: str = "") -> "GridField":
        return cls(np.zeros((n,) * d), h, name=name)

    def mass(self) -> float:
        return float(self.cell * self.values.sum())

    def weighted(self, a: float) -> "GridField":
        """The field multiplied by |x|^a."""
        if a == 0:
            return self
        return self.like(self.radius**a * self.values, name=f"{self.name}^({a:g})")

    def reflected(self) -> "GridField":
        """x -> f(-x)."""
        v = self.values
        for ax in range(self.d):
            v = np.roll(np.flip(v, axis=ax), 1, axis=ax)
        return self.like(v, name=self.name)

    def shifted(self, offset) -> "GridField":
        """x -> f(x + offset), offset given in grid indices."""
        offset = tuple(int(o) for o in np.broadcast_to(offset, (self.d,)))
        return self.like(np.roll(self.values, tuple(-o for o in offset),
                                 axis=tuple(range(self.d))), name=self.name)

    def value_at(self, x) -> float:
        return float(self.values[self.index_of(x)])

    def index_of(self, x) -> tuple[int, ...]:
        """Grid index of a point that lies on the grid (minimal image)."""
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape != (self.d,):
            raise ValueError(f"expected a {self.d}-dimensional point")
        idx = x / self.h
        rounded = np.round(idx)
        if np.any(np.abs(idx - rounded) > 1e-9):
            raise ValueError("point does not lie on the grid")
        return tuple(int(i) % self.n for i in rounded)

    # -- arithmetic -------------------------------------------------------

    def _check(self, other):
        if not self.same_grid(other):
            raise ValueError("shape mismatch between grid fields")

    def __add__(self, other):
        if isinstance(other, GridField):
            self._check(other)
            return self.like(self.values + other.values)
        return self.like(self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, GridField):
            self._check(other)
            return self.like(self.values - other.values)
        return self.like(self.values - other)

    def __mul__(self, other):
        if isinstance(other, GridField):
            self._check(other)
            return self.like(self.values * other.values)
        return self.like(self.values * other)

    __rmul__ = __mul__

    def __neg__(self):
        return self.like(-self.values)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a GridField, on the matching k-grid."""

    values: np.ndarray
    h: float

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def L(self) -> float:
        return self.n * self.h

    @property
    def dk(self) -> float:
        return 2 * math.pi / self.L

    @cached_property
    def kvecs(self) -> tuple[np.ndarray, ...]:
        ax = 2 * math.pi * np.fft.fftfreq(self.n, d=self.h)
        return tuple(np.meshgrid(*([ax] * self.d), indexing="ij"))

    @cached_property
    def kabs(self) -> np.ndarray:
        return np.sqrt(sum(k * k for k in self.kvecs))

    @property
    def zero_mode(self) -> complex:
        return complex(self.values[(0,) * self.d])


# -- discretisation ---------------------------------------------------------


def discretize(source, d: int, L: float, n: int, normalize=None,
               name: str = "") -> GridField:
    """
    Sample ``source`` at the grid nodes of an n^d grid on a torus of side L.

    ``source`` is an AdjacencyKernel, a callable on arrays of shape (..., d),
    or a constant. Kernels are rescaled to unit grid mass by default and
    tagged as probability kernels; pass ``normalize=False`` to keep the raw
    samples.
    """
    if n % 2:
        raise ValueError("points per axis must be even")
    h = L / n
    ax = axis_coords(n, h)
    pts = np.stack(np.meshgrid(*([ax] * d), indexing="ij"), axis=-1)
    is_kernel = isinstance(source, AdjacencyKernel)
    if is_kernel:
        if source.d != d:
            raise ValueError("kernel dimension does not match the grid")
        vals = eval_adjacency(source, pts) if source.variant != "tabulated" else \
            _eval_tabulated_safe(source, pts)
        name = name or f"phi[{source.variant}]"
    elif callable(source):
        vals = np.asarray(source(pts), dtype=float)
    else:
        vals = np.full((n,) * d, float(source))
    if normalize is None:
        normalize = is_kernel
    if normalize:
        mass = h**d * vals.sum()
        if mass <= 0:
            raise ValueError("cannot normalise a field with non-positive mass")
        vals = vals / mass
    return GridField(vals, h, kernel=bool(is_kernel and normalize), name=name)


def _eval_tabulated_safe(kernel, pts):
    r = np.sqrt(np.sum(pts * pts, axis=-1))
    inside = r <= kernel.table_r[-1]
    out = np.zeros(r.shape)
    out[inside] = eval_adjacency(kernel, pts[inside])
    return out


# -- transforms -------------------------------------------------------------


def fft(f: GridField) -> SpectralField:
    vals = np.fft.ifftn(f.values) * (f.n**f.d * f.cell)
    return SpectralField(vals, f.h)


def ifft(spec: SpectralField, name: str = "") -> GridField:
    vals = np.fft.fftn(spec.values) / spec.L**spec.d
    return GridField(vals.real, spec.h, name=name)


def spectral_values(f: GridField) -> np.ndarray:
    """Real part of hat f on the full k-grid (exact for even fields)."""
    return fft(f).values.real


def convolve(f: GridField, g: GridField, name: str = "") -> GridField:
    """Circular convolution with the volume element: h^d sum_y f(y) g(x - y)."""
    if not f.same_grid(g):
        raise ValueError("shape mismatch between grid fields")
    shape = f.values.shape
    axes = tuple(range(f.d))
    out = np.fft.irfftn(np.fft.rfftn(f.values) * np.fft.rfftn(g.values), s=shape, axes=axes)
    return GridField(out * f.cell, f.h, name=name)


def convolve_many(*fields: GridField) -> GridField:
    """Convolution of several fields, evaluated in one transform pass."""
    first = fields[0]
    prod = np.ones(first.values.shape[:-1] + (first.n // 2 + 1,), dtype=complex)
    for f in fields:
        if not first.same_grid(f):
            raise ValueError("shape mismatch between grid fields")
        prod = prod * np.fft.rfftn(f.values)
    out = np.fft.irfftn(prod, s=first.values.shape,
                          axes=tuple(range(first.d))) * first.cell ** (len(fields) - 1)
    return GridField(out, first.h)


def correlate(f: GridField, g: GridField) -> GridField:
    """h^d sum_x f(x) g(u + x) as a function of u."""
    return convolve(f.reflected(), g)


def direct_convolve(f: GridField, g: GridField) -> GridField:
    """Brute-force circular convolution; O(n^{2d}), for tests only."""
    if not f.same_grid(g):
        raise ValueError("shape mismatch between grid fields")
    n, d = f.n, f.d
    out = np.zeros(f.values.shape)
    idx = np.indices((n,) * d).reshape(d, -1).T
    fv = f.values
    gv = g.values
    for x in idx:
        acc = 0.0
        shifted = (x[:, None] - idx.T) % n
        acc = np.sum(fv[tuple(idx.T)] * gv[tuple(shifted)])
        out[tuple(x)] = acc
    return GridField(out * f.cell, f.h)


# -- norms and moments --------------------------------------------------------


def weighted_norm(f: GridField, a: float = 0.0, p: float = 1.0) -> float:
    """|| |x|^a f(x) ||_{L^p} with the grid volume element."""
    if a < 0:
        raise ValueError("moment order must be non-negative")
    if p < 1:
        raise ValueError("exponent must be at least 1")
    g = np.abs(f.values) * (f.radius**a if a else 1.0)
    if math.isinf(p):
        return float(g.max())
    if p == 1:
        return float(f.cell * g.sum())
    return float((f.cell * np.sum(g**p)) ** (1.0 / p))


def tail_fraction(f: GridField, a: float = 0.0, p: float = 1.0) -> float:
    """
    Share of the weighted norm carried by |x| > L/4.

    For finite p this is the fraction of sum |x|^{ap}|f|^p; for p = inf it is
    the ratio of the largest tail value to the overall maximum.
    """
    g = np.abs(f.values) * (f.radius**a if a else 1.0)
    tail = f.radius > f.L / 4
    if math.isinf(p):
        top = g.max()
        return float(g[tail].max() / top) if top > 0 and tail.any() else 0.0
    gp = g**p
    total = gp.sum()
    return float(gp[tail].sum() / total) if total > 0 else 0.0


def evenness_defect(f: GridField) -> float:
    """max |f(x) - f(-x)| relative to max |f|."""
    top = np.abs(f.values).max()
    if top == 0:
        return 0.0
    return float(np.abs(f.values - f.reflected().values).max() / top)


def reflection_defect(f: GridField) -> float:
    """Largest relative change under flipping a single coordinate."""
    top = np.abs(f.values).max()
    if top == 0:
        return 0.0
    worst = 0.0
    for ax in range(f.d):
        flipped = np.roll(np.flip(f.values, axis=ax), 1, axis=ax)
        worst = max(worst, float(np.abs(f.values - flipped).max()))
    return worst / top


def moment_matrix(f: GridField, even_tol: float = 1e-8) -> np.ndarray:
    """Matrix of integrals of x_i x_j f(x); warns when f is not even."""
    if evenness_defect(f) > even_tol:
        warnings.warn("field is not even; moment matrix may be unreliable",
                      NonEvenFieldWarning, stacklevel=2)
    c = f.coords
    m = np.empty((f.d, f.d))
    for i in range(f.d):
        for j in range(i, f.d):
            m[i, j] = m[j, i] = f.cell * np.sum(c[i] * c[j] * f.values)
    return m


@dataclass(frozen=True)
class MomentPlan:
    """
    Integrability regime for the a-th moment.

    For a <= 2 the regime is L^1 and L^inf (``p_star`` is None).  For
    a in (2, d+2] the critical exponent is p* = d / (d - a + 2) and ``p_a``
    is a concrete exponent in [1, p*).
    """

    a: float
    d: int
    p_star: Fraction | float | None
    p_a: float
    regime: str = field(default="")

    @property
    def norms(self) -> tuple[float, ...]:
        if self.p_star is None:
            return (1.0, math.inf)
        return (self.p_a, 2.0, math.inf)


def moment_plan(a, d: int) -> MomentPlan:
    if a < 0 or a > d + 2:
        raise ValueError(f"moment order {a} outside [0, d + 2] = [0, {d + 2}]")
    if a <= 2:
        return MomentPlan(a, d, None, 1.0, regime="L1∩L∞")
    exact = float(a).is_integer()
    if a == d + 2:
        return MomentPlan(a, d, math.inf, 2.0, regime="Lp∩L2∩L∞")
    p_star = Fraction(d, d - int(a) + 2) if exact else d / (d - a + 2)
    return MomentPlan(a, d, p_star, (1 + float(p_star)) / 2, regime="Lp∩L2∩L∞")


# -- persistence --------------------------------------------------------------


def rcmf_bytes(f: GridField) -> bytes:
    header = _HEADER.pack(RCMF_MAGIC, RCMF_VERSION, f.d, f.n, float(f.h))
    return header + np.ascontiguousarray(f.values, dtype="<f8").tobytes(order="C")


def write_rcmf(path, f: GridField) -> None:
    atomic_write_bytes(path, rcmf_bytes(f))


def parse_rcmf(data: bytes, name: str = "") -> GridField:
    if len(data) < _HEADER.size:
        raise ValueError("truncated RCMF header")
    magic, version, d, n, h = _HEADER.unpack_from(data)
    if magic != RCMF_MAGIC:
        raise ValueError("not an RCMF file")
    if version != RCMF_VERSION:
        raise ValueError(f"unsupported RCMF version {version}")
    count = n**d
    body = data[_HEADER.size:]
    if len(body) != 8 * count:
        raise ValueError("RCMF payload size does not match header")
    vals = np.frombuffer(body, dtype="<f8").reshape((n,) * d)
    return GridField(vals.astype(float), h, name=name)


def read_rcmf(path, name: str = "") -> GridField:
    with open(path, "rb") as fh:
        return parse_rcmf(fh.read(), name=name)


def slice_csv(f: GridField) -> str:
    """CSV of a 1D field, or of the plane through the origin spanned by axes 0, 1."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    ax = axis_coords(f.n, f.h)
    order = np.argsort(ax, kind="stable")
    if f.d == 1:
        w.writerow(["x1", "value"])
        for i in order:
            w.writerow([repr(float(ax[i])), repr(float(f.values[i]))])
    else:
        w.writerow(["x1", "x2", "value"])
        plane = f.values[(slice(None), slice(None)) + (0,) * (f.d - 2)]
        for i in order:
            for j in order:
                w.writerow([repr(float(ax[i])), repr(float(ax[j])),
                            repr(float(plane[i, j]))])
    return buf.getvalue()


def write_slice_csv(path, f: GridField) -> None:
    atomic_write_text(path, slice_csv(f))
