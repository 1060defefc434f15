"""
Ornstein-Zernike deconvolution on a periodic grid.

With J = lam (phi + Pi) the two-point function solves (delta - J) * lam tau = J,
so in Fourier space lam tau = J + Jhat^2 / (1 - Jhat). Away from criticality
this is an exact grid identity. At Jhat(0) = 1 the k = 0 mode is singular;
the solver removes the leading 2 / (k.Mk) pole analytically (its inverse
transform on R^d is a regularised Newtonian potential) and transforms only
the bounded remainder.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from . import grid as G
from .grid import GridField
from .kernels import AdjacencyKernel


class SupercriticalKernelError(ValueError):
    pass


class NonInvertibleKernelError(ValueError):
    pass


class AsymmetricKernelWarning(UserWarning):
    pass


# -- kernel pairs -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KernelPair:
    phi: GridField
    pi: GridField
    lam: float
    J: GridField
    J_hat_zero: float


def form_J(phi: GridField, pi: GridField | None = None, lam: float = 1.0,
           tol: float = 1e-9, even_tol: float = 1e-8) -> KernelPair:
    """J = lam (phi + pi); rejects Jhat(0) > 1 + tol."""
    if pi is None:
        pi = phi.like(np.zeros_like(phi.values), name="Pi")
    if not phi.same_grid(pi):
        raise ValueError("shape mismatch between phi and Pi")
    if lam < 0:
        raise ValueError("intensity must be non-negative")
    J = phi.like(lam * (phi.values + pi.values), name="J")
    jz = J.mass()
    if jz > 1 + tol:
        raise SupercriticalKernelError(
            f"supercritical kernel: Jhat(0) = {jz:.12g} exceeds 1")
    if G.evenness_defect(J) > even_tol:
        warnings.warn("J is not even; spectral values are complex",
                      AsymmetricKernelWarning, stacklevel=2)
    return KernelPair(phi, pi, float(lam), J, jz)


# -- infrared bound ---------------------------------------------------------------


@dataclass(frozen=True)
class InfraredReport:
    K_IR: float
    argmin_k: tuple[float, ...]
    J_hat_zero: float
    threshold: float
    passed: bool


def infrared_check(source, threshold: float = 1e-3) -> InfraredReport:
    """
    min over nonzero grid k of (Jhat(0) - Jhat(k)) / min(|k|^2, 1).

    ``source`` is a KernelPair (uses J) or a bare GridField.
    """
    f = source.J if isinstance(source, KernelPair) else source
    spec = G.fft(f)
    jhat = spec.values.real
    jz = jhat.flat[0]
    k2 = spec.kabs**2
    denom = np.minimum(k2, 1.0)
    denom.flat[0] = np.inf
    ratio = (jz - jhat) / denom
    ratio.flat[0] = np.inf
    idx = np.unravel_index(np.argmin(ratio), ratio.shape)
    K = float(ratio[idx])
    kvec = tuple(float(k[idx]) for k in spec.kvecs)
    return InfraredReport(K, kvec, float(jz), threshold, bool(K > threshold))


def radial_infrared_constant(profile, k_max: float, k_min: float = 0.0,
                             samples: int = 20001) -> tuple[float, float]:
    """
    Dense 1D minimisation of (phat(0) - phat(q)) / min(q^2, 1) over (k_min, k_max].

    ``profile`` maps |k| to the transform of a radial kernel. Returns
    (minimum, minimiser). The dense scan is refined with a bounded scalar
    minimiser around the best sample.
    """
    p0 = float(profile(np.array([0.0]))[0])

    def ratio(q):
        q = np.atleast_1d(np.asarray(q, dtype=float))
        return (p0 - profile(q)) / np.minimum(q * q, 1.0)

    lo = max(k_min, k_max * 1e-6)
    qs = np.linspace(lo, k_max, samples)
    vals = ratio(qs)
    i = int(np.argmin(vals))
    a, b = qs[max(i - 1, 0)], qs[min(i + 1, samples - 1)]
    res = optimize.minimize_scalar(lambda q: float(ratio(q)[0]), bounds=(a, b),
                                   method="bounded", options={"xatol": 1e-12})
    if res.fun < vals[i]:
        return float(res.fun), float(res.x)
    return float(vals[i]), float(qs[i])


def analytic_profile(kernel: AdjacencyKernel):
    """|k| -> phat for isotropic analytic kernels."""
    if kernel.variant == "gaussian" and len(set(kernel.scales)) != 1:
        raise ValueError("radial profile needs an isotropic kernel")
    e1 = np.eye(kernel.d)[0]
    return lambda q: kernel.fourier(np.asarray(q)[..., None] * e1)


# -- deconvolution ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OZSolution:
    lam_tau: GridField
    J_hat_zero: float
    residual: float
    critical: bool
    method: str = "exact"
    epsilon: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def relative_residual(self) -> float:
        return self.details.get("relative_residual", float("nan"))


def oz_residual(J: GridField, lam_tau: GridField) -> float:
    """|| lam tau - J * lam tau - J ||_2."""
    res = lam_tau - G.convolve(J, lam_tau) - J
    return G.weighted_norm(res, 0, 2)


def newtonian_regularised(d: int, M: np.ndarray, eps: float, x: GridField) -> GridField:
    """
    Inverse transform over R^d of 2 exp(-eps k.Mk) / (k.Mk), sampled on the grid.

    Equals a_d y^{2-d} P(d/2 - 1, y^2 / (4 eps)) / sqrt(det M) with
    y^2 = x.M^{-1}x and P the regularised lower incomplete gamma function.
    """
    if d < 3:
        raise ValueError("the singular part is not locally integrable for d < 3")
    Minv = np.linalg.inv(M)
    c = x.coords
    y2 = sum(Minv[i, j] * c[i] * c[j] for i in range(d) for j in range(d))
    nu = d / 2 - 1
    out = np.empty_like(y2)
    zero = y2 == 0
    ys = np.where(zero, 1.0, y2)
    out[...] = a_d(d) * ys ** (-nu) * special.gammainc(nu, ys / (4 * eps))
    out[zero] = 2 * (4 * math.pi) ** (-d / 2) * eps ** (-nu) / nu
    return x.like(out / math.sqrt(np.linalg.det(M)), name="G_eps")


def oz_deconvolve(pair: KernelPair, crit_tol: float = 1e-9, critical: str = "subtract",
                  eps: float | None = None) -> OZSolution:
    """
    Solve (delta - J) * lam tau = J for lam tau.

    ``critical`` selects the treatment of Jhat(0) = 1: ``"subtract"`` removes
    the pole analytically (d >= 3), ``"nearest"`` replaces the k = 0 mode by
    the value at the smallest nonzero |k|.
    """
    J = pair.J
    spec = G.fft(J)
    jhat = spec.values
    kabs = spec.kabs
    nonzero = kabs > 0
    if np.any(jhat.real[nonzero] >= 1):
        raise NonInvertibleKernelError("non-invertible kernel: Jhat(k) >= 1 at k != 0")
    jz = float(jhat.real.flat[0])
    norm_J = G.weighted_norm(J, 0, 2)
    is_crit = abs(jz - 1) <= crit_tol
    details = {}
    if not is_crit:
        if jz >= 1:
            raise SupercriticalKernelError("supercritical kernel")
        tail = jhat**2 / (1 - jhat)
        lam_tau = J + G.ifft(G.SpectralField(tail, J.h))
        method, eps_used = "exact", 0.0
    elif critical == "nearest":
        tail = np.empty_like(jhat)
        tail[nonzero] = jhat[nonzero] ** 2 / (1 - jhat[nonzero])
        tail.flat[0] = _nearest_mode(tail, kabs)
        lam_tau = J + G.ifft(G.SpectralField(tail, J.h))
        method, eps_used = "nearest", 0.0
    elif critical == "subtract":
        M = G.moment_matrix(J)
        if np.any(np.linalg.eigvalsh(M) <= 0):
            raise ValueError("singular second-moment matrix")
        k_nyq = math.pi / J.h
        eps_used = float(eps) if eps is not None else 36.0 / (
            np.linalg.eigvalsh(M).min() * k_nyq**2)
        kMk = sum(M[i, j] * spec.kvecs[i] * spec.kvecs[j]
                  for i in range(J.d) for j in range(J.d))
        sing = np.zeros_like(kMk)
        sing[nonzero] = 2 * jz * np.exp(-eps_used * kMk[nonzero]) / kMk[nonzero]
        rem = np.empty_like(jhat)
        rem[nonzero] = jhat[nonzero] ** 2 / (1 - jhat[nonzero]) - sing[nonzero]
        rem.flat[0] = _nearest_mode(rem, kabs)
        smooth = G.ifft(G.SpectralField(rem, J.h))
        pole = newtonian_regularised(J.d, M, eps_used, J) * jz
        lam_tau = J + smooth + pole
        method = "subtract"
        details["pole_tail_at_nyquist"] = float(math.exp(
            -eps_used * np.linalg.eigvalsh(M).min() * k_nyq**2))
    else:
        raise ValueError(f"unknown critical treatment {critical!r}")
    lam_tau = J.like(lam_tau.values, name="lam_tau")
    resid = oz_residual(J, lam_tau)
    details["relative_residual"] = resid / norm_J if norm_J > 0 else 0.0
    return OZSolution(lam_tau, jz, resid, is_crit, method, eps_used, details)


def _nearest_mode(vals: np.ndarray, kabs: np.ndarray) -> complex:
    nz = kabs[kabs > 0]
    kmin = nz.min()
    ring = np.abs(kabs - kmin) <= 1e-12 * kmin
    return complex(vals[ring].mean())


# -- asymptotics ------------------------------------------------------------------


def a_d(d: int) -> float:
    """Gamma((d-2)/2) / (2 pi^{d/2}), the Newtonian constant in d >= 3."""
    if d < 3:
        raise ValueError("a_d needs d >= 3")
    return math.gamma((d - 2) / 2) / (2 * math.pi ** (d / 2))


@dataclass(frozen=True)
class AsymptoticModel:
    d: int
    lam_c: float
    sigma: tuple[float, ...]
    a_d: float
    J_hat_zero: float = 1.0

    def __post_init__(self):
        if len(self.sigma) != self.d or min(self.sigma) <= 0:
            raise ValueError("singular Σ: diagonal must be positive")

    def predict(self, xs) -> np.ndarray:
        """Leading-order tau(x) for points of shape (..., d)."""
        xs = np.asarray(xs, dtype=float)
        s = np.asarray(self.sigma)
        q = np.sum(xs * xs / s, axis=-1)
        pref = self.a_d * self.J_hat_zero / (self.lam_c * math.sqrt(float(np.prod(s))))
        return pref * q ** (-(self.d - 2) / 2)


def sigma_and_prediction(pair: KernelPair, xs=None, lam_c: float | None = None,
                         reflect_tol: float = 1e-8):
    """Build the asymptotic model from the diagonal second moments of J."""
    if G.reflection_defect(pair.J) > reflect_tol:
        warnings.warn("J is not symmetric under coordinate reflections; "
                      "off-diagonal moments are ignored", AsymmetricKernelWarning,
                      stacklevel=2)
    M = G.moment_matrix(pair.J)
    sigma = tuple(float(v) for v in np.diag(M))
    model = AsymptoticModel(pair.J.d, float(lam_c if lam_c is not None else pair.lam),
                            sigma, a_d(pair.J.d), pair.J_hat_zero)
    if xs is None:
        return model, None
    return model, model.predict(xs)


# -- decay fits -------------------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    amplitude: float
    r2: float
    window: tuple[float, float]
    n_points: int

    def as_dict(self) -> dict:
        return {"exponent": self.exponent, "amplitude": self.amplitude, "r2": self.r2,
                "window": list(self.window)}


def fit_decay_exponent(r, v, window) -> DecayFit:
    """Least-squares fit v ~ A |x|^{-exponent} over r in [window[0], window[1]]."""
    r = np.asarray(r, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    lo, hi = map(float, window)
    sel = (r >= lo) & (r <= hi)
    if np.count_nonzero(sel) < 5:
        raise ValueError("need at least 5 points in the fit window")
    if np.any(v[sel] <= 0):
        raise ValueError("nonpositive values in window")
    lx, ly = np.log(r[sel]), np.log(v[sel])
    slope, icpt = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + icpt)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot <= 1e-300 else 1 - ss_res / ss_tot
    return DecayFit(float(-slope) + 0.0, float(math.exp(icpt)), r2, (lo, hi),
                    int(np.count_nonzero(sel)))


def default_window(f: GridField) -> tuple[float, float]:
    """Radii unaffected by discretisation (3h sqrt d) or wraparound (L/4)."""
    return 3 * f.h * math.sqrt(f.d), f.L / 4


def fit_field(f: GridField, window=None) -> DecayFit:
    """Fit the decay of a grid field, intersecting ``window`` with the trusted range."""
    lo, hi = default_window(f)
    if window is not None:
        lo, hi = max(lo, window[0]), min(hi, window[1])
    return fit_decay_exponent(f.radius, f.values, (lo, hi))


def oz_report(pair: KernelPair, ir: InfraredReport, model: AsymptoticModel | None,
              fit: DecayFit | None) -> dict:
    """The JSON summary of one solve."""
    return {
        "J_hat_zero": pair.J_hat_zero,
        "K_IR": ir.K_IR,
        "sigma_diagonal": list(model.sigma) if model else [],
        "a_d": model.a_d if model else None,
        "fit": fit.as_dict() if fit else None,
    }
