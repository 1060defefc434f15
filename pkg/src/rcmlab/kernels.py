"""
Adjacency functions of the random connection model.

Three variants are supported: the unit-volume disk (Boolean) kernel, the
normalised Gaussian kernel (optionally with one scale per axis), and a
tabulated radial profile with linear interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

#: Gaussian tails below this value are treated as zero when sampling edges.
GAUSSIAN_TAIL = 1e-12

VARIANTS = ("disk", "gaussian", "tabulated")


class KernelError(ValueError):
    """Raised for malformed kernels or queries outside their domain."""


def unit_ball_radius(d: int) -> float:
    """Radius of the ball of unit volume in R^d."""
    return math.pi ** -0.5 * math.gamma(d / 2 + 1) ** (1.0 / d)


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere S^{d-1}."""
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


def ball_volume(d: int, r: float) -> float:
    return math.pi ** (d / 2) * r**d / math.gamma(d / 2 + 1)


@dataclass(frozen=True)
class AdjacencyKernel:
    """
    Symmetric edge-probability function phi: R^d -> [0, 1].

    Use the ``disk``, ``gaussian`` and ``tabulated`` constructors rather
    than building instances by hand; they validate the invariants
    (values in [0, 1], unit integral).
    """

    d: int
    variant: str
    radius: float = 0.0
    scales: tuple[float, ...] = ()
    table_r: tuple[float, ...] = ()
    table_phi: tuple[float, ...] = ()
    extrapolate_zero: bool = False
    r_cut: float = field(default=0.0)

    def __post_init__(self):
        if self.d < 1:
            raise KernelError("dimension must be a positive integer")
        if self.variant not in VARIANTS:
            raise KernelError(f"unknown kernel variant {self.variant!r}")

    # -- constructors -----------------------------------------------------

    @classmethod
    def disk(cls, d: int) -> "AdjacencyKernel":
        R = unit_ball_radius(d)
        return cls(d=d, variant="disk", radius=R, r_cut=R)

    @classmethod
    def gaussian(cls, d: int, scales=None) -> "AdjacencyKernel":
        if scales is None:
            scales = (1.0,) * d
        scales = tuple(float(s) for s in scales)
        if len(scales) != d or min(scales) <= 0:
            raise KernelError("gaussian scales must be d positive numbers")
        peak = (2 * math.pi) ** (-d / 2) / math.prod(scales)
        if peak > 1:
            raise KernelError("gaussian peak exceeds 1; widen the scales")
        r_cut = max(scales) * math.sqrt(2 * math.log(peak / GAUSSIAN_TAIL))
        return cls(d=d, variant="gaussian", scales=scales, r_cut=r_cut)

    @classmethod
    def tabulated(cls, d: int, r, phi, extrapolate_zero: bool = False,
                  tol: float = 1e-6) -> "AdjacencyKernel":
        r = np.asarray(r, dtype=float)
        phi = np.asarray(phi, dtype=float)
        if r.ndim != 1 or r.shape != phi.shape or len(r) < 2:
            raise KernelError("table needs matching 1D radius/value arrays")
        if r[0] != 0 or np.any(np.diff(r) <= 0):
            raise KernelError("table radii must start at 0 and increase")
        if np.any(phi < 0) or np.any(phi > 1):
            raise KernelError("table values must lie in [0, 1]")
        kern = cls(d=d, variant="tabulated", table_r=tuple(r),
                   table_phi=tuple(phi), extrapolate_zero=extrapolate_zero,
                   r_cut=float(r[-1]))
        mass = kernel_normalization(kern)
        if abs(mass - 1) > tol:
            raise KernelError(f"tabulated kernel integrates to {mass:.6g}, not 1")
        return kern

    @classmethod
    def from_config(cls, d: int, spec: dict) -> "AdjacencyKernel":
        """Build a kernel from a ``{"variant": ..., "params": {...}}`` record."""
        variant = spec.get("variant")
        params = spec.get("params", {}) or {}
        if variant == "disk":
            return cls.disk(d)
        if variant == "gaussian":
            return cls.gaussian(d, params.get("scales"))
        if variant == "tabulated":
            return cls.tabulated(d, params["r"], params["phi"],
                                 params.get("extrapolate_zero", False))
        raise KernelError(f"unknown kernel variant {variant!r}")

    def to_config(self) -> dict:
        params = {}
        if self.variant == "gaussian":
            params["scales"] = list(self.scales)
        elif self.variant == "tabulated":
            params = {"r": list(self.table_r), "phi": list(self.table_phi),
                      "extrapolate_zero": self.extrapolate_zero}
        return {"variant": self.variant, "params": params}

    # -- analytic metadata ------------------------------------------------

    @property
    def peak(self) -> float:
        return float(eval_adjacency(self, np.zeros(self.d)))

    def second_moments(self) -> np.ndarray:
        """Diagonal of the matrix of integrals of x_i^2 phi(x)."""
        if self.variant == "gaussian":
            return np.asarray(self.scales) ** 2
        if self.variant == "disk":
            return np.full(self.d, self.radius**2 / (self.d + 2))
        r = np.asarray(self.table_r)
        phi = np.asarray(self.table_phi)
        total = sphere_area(self.d) * integrate.trapezoid(
            r ** (self.d + 1) * phi, r)
        return np.full(self.d, total / self.d)

    def fourier(self, k) -> np.ndarray:
        """
        Analytic transform with the convention hat f(k) = int f(x) e^{ik.x} dx.

        ``k`` has shape (..., d). Not available for tabulated kernels.
        """
        k = np.asarray(k, dtype=float)
        if self.variant == "gaussian":
            s = np.asarray(self.scales)
            return np.exp(-0.5 * np.sum((k * s) ** 2, axis=-1))
        if self.variant == "disk":
            q = np.linalg.norm(k, axis=-1) * self.radius
            return disk_profile(self.d, self.radius, q)
        raise KernelError("no closed-form transform for tabulated kernels")


def disk_profile(d: int, R: float, q) -> np.ndarray:
    """Transform of the indicator of the radius-R ball at q = |k| R."""
    q = np.asarray(q, dtype=float)
    nu = d / 2
    out = np.empty_like(q)
    small = q < 1e-6
    qs = np.where(small, 1.0, q)
    scale = (2 * math.pi) ** nu * R**d
    out[...] = scale * special.jv(nu, qs) / qs**nu
    # series limit J_nu(q)/q^nu -> 1/(2^nu Gamma(nu+1))
    out[small] = ball_volume(d, R) * (1 - q[small] ** 2 / (2 * d + 4))
    return out


def eval_adjacency(kernel: AdjacencyKernel, x) -> np.ndarray:
    """
    Evaluate phi at displacement(s) ``x`` of shape (..., d).

    Returns an array of probabilities with shape ``x.shape[:-1]`` (a 0-d
    array for a single point).
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != kernel.d:
        raise KernelError(f"expected {kernel.d}-dimensional displacement")
    if not np.all(np.isfinite(x)):
        raise KernelError("displacement must be finite")
    if kernel.variant == "disk":
        r2 = np.sum(x * x, axis=-1)
        return (r2 <= kernel.radius**2).astype(float)
    if kernel.variant == "gaussian":
        s = np.asarray(kernel.scales)
        peak = (2 * math.pi) ** (-kernel.d / 2) / np.prod(s)
        return peak * np.exp(-0.5 * np.sum((x / s) ** 2, axis=-1))
    r = np.sqrt(np.sum(x * x, axis=-1))
    table_r = np.asarray(kernel.table_r)
    beyond = r > table_r[-1]
    if np.any(beyond) and not kernel.extrapolate_zero:
        raise KernelError("out of table range")
    vals = np.interp(r, table_r, np.asarray(kernel.table_phi))
    return np.where(beyond, 0.0, vals)


def kernel_normalization(kernel: AdjacencyKernel) -> float:
    """Numerical value of the integral of phi over R^d."""
    d = kernel.d
    if kernel.variant == "disk":
        return ball_volume(d, kernel.radius)
    if kernel.variant == "gaussian":
        # product of 1D integrals; each is checked separately
        total = 1.0
        for s in kernel.scales:
            val, err = integrate.quad(
                lambda t: math.exp(-0.5 * (t / s) ** 2) / (math.sqrt(2 * math.pi) * s),
                -np.inf, np.inf, epsabs=1e-13, epsrel=1e-12)
            if not math.isfinite(val) or err > 1e-8:
                raise KernelError("normalization failed")
            total *= val
        return total
    r = np.asarray(kernel.table_r)
    phi = np.asarray(kernel.table_phi)
    # the linear interpolant times r^{d-1} is a polynomial on each segment;
    # integrate it exactly by Gauss-Legendre on every interval
    nodes, weights = np.polynomial.legendre.leggauss(d + 2)
    total = 0.0
    for r0, r1, p0, p1 in zip(r[:-1], r[1:], phi[:-1], phi[1:]):
        t = 0.5 * (r1 - r0) * (nodes + 1) + r0
        vals = (p0 + (p1 - p0) * (t - r0) / (r1 - r0)) * t ** (d - 1)
        total += 0.5 * (r1 - r0) * float(np.dot(weights, vals))
    total *= sphere_area(d)
    if not math.isfinite(total):
        raise KernelError("normalization failed")
    return total
