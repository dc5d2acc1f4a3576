"""Semiparametric spectral models for LRD functional time series.

A model is diagonal in a fixed basis.  For component ``l`` and parameter
``theta`` its spectral density symbol is::

    f(omega, l, theta) = M(omega, l) * K(omega) ** (-alpha(l, theta))

with ``K(omega) = |1 - exp(-i omega)|`` (``exact_diff``, the stationary
multifractional FARIMA) or ``K(omega) = |omega|`` (``power_law``).  The
short-memory symbol ``M`` is either the FARIMA rational symbol or a tapered
rational symbol on a lambda grid.
"""

from __future__ import annotations

import functools
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import fft as sfft
from scipy.special import gammaln, zeta

from .errors import ConfigError, ModelValidationError, QuadratureError, SingularityError, ValidationError
from .operators import BasisSpec, FrequencyGrid, quadrature_grid

TWO_PI = 2 * np.pi
KERNELS = ("exact_diff", "power_law")
ALPHA_FAMILIES = {"constant": 1, "log_decay": 2, "exponential": 2}
TAPERS = ("cosine", "triangular")

DEFAULT_QUAD = dict(omega_min=1e-6, ratio=2.0, nodes_per_panel=32, max_width=np.pi / 8)


# --------------------------------------------------------------------------- symbols

@dataclass(frozen=True)
class LongMemorySymbol:
    """Parametric long-memory symbol ``alpha(l, theta)``.

    Families
    --------
    constant     alpha = theta_1
    log_decay    alpha = theta_1 + theta_2 / (1 + ln l)
    exponential  alpha = theta_1 + theta_2 * exp(-(l - 1))

    Values outside ``[l_lo, l_hi]`` are rejected, never clamped.
    """

    family: str = "constant"
    l_lo: float = 0.01
    l_hi: float = 0.99

    def __post_init__(self):
        if self.family not in ALPHA_FAMILIES:
            raise ValidationError(f"unknown alpha family {self.family!r}; choose from {sorted(ALPHA_FAMILIES)}")
        if not (np.isfinite(self.l_lo) and np.isfinite(self.l_hi)) or self.l_lo > self.l_hi:
            raise ValidationError("alpha clamp bounds must be finite with l_lo <= l_hi")

    @property
    def p(self) -> int:
        return ALPHA_FAMILIES[self.family]

    def raw(self, l, theta):
        """Unchecked symbol values at (array of) 1-based indices ``l``."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.shape != (self.p,):
            raise ValidationError(f"{self.family} family expects theta of length {self.p}, got {theta.shape}")
        l = np.asarray(l, dtype=float)
        if self.family == "constant":
            return np.full_like(l, theta[0])
        if self.family == "log_decay":
            return theta[0] + theta[1] / (1.0 + np.log(l))
        return theta[0] + theta[1] * np.exp(-(l - 1.0))


@dataclass(frozen=True)
class FarimaRational:
    """FARIMA short-memory symbol ``(lambda_l / 2 pi) |Psi_l / Phi_l|^2`` at ``exp(-i omega)``.

    ``ar[l]`` holds ``phi_1..phi_p`` with ``Phi_l(z) = 1 - sum_j phi_j z^j``.
    ``ma[l]`` holds ``psi_1..psi_q`` with ``Psi_l(z) = sum_{j>=1} psi_j z^j``;
    an empty list means ``Psi_l = 1``.  The leading power of ``z`` in ``Psi_l``
    is a pure delay and leaves the symbol unchanged.
    """

    sigma_eigs: np.ndarray
    ar: tuple = ()
    ma: tuple = ()

    def __post_init__(self):
        sig = np.asarray(self.sigma_eigs, dtype=float).copy()
        if sig.ndim != 1 or sig.size == 0:
            raise ValidationError("sigma_eigs must be a non-empty 1-d array")
        if np.any(sig <= 0) or not np.all(np.isfinite(sig)):
            raise ValidationError("sigma_eigs must be positive and finite")
        sig.setflags(write=False)
        object.__setattr__(self, "sigma_eigs", sig)
        L = sig.size
        object.__setattr__(self, "ar", _per_component(self.ar, L, "ar"))
        object.__setattr__(self, "ma", _per_component(self.ma, L, "ma"))

    @property
    def L(self):
        return self.sigma_eigs.size

    def phi_poly(self, l):
        """Coefficients of ``Phi_l`` in increasing powers of z."""
        return np.concatenate([[1.0], -self.ar[l - 1]])

    def psi_poly(self, l):
        """Coefficients of ``Psi_l`` in increasing powers of z."""
        ma = self.ma[l - 1]
        if ma.size == 0:
            return np.array([1.0])
        return np.concatenate([[0.0], ma])

    def impulse_response(self, l, n):
        """First ``n`` coefficients of the power series ``Psi_l(z) / Phi_l(z)``."""
        psi = self.psi_poly(l)
        phi_ar = self.ar[l - 1]
        c = np.zeros(n)
        for j in range(n):
            acc = psi[j] if j < psi.size else 0.0
            for i in range(1, min(j, phi_ar.size) + 1):
                acc += phi_ar[i - 1] * c[j - i]
            c[j] = acc
        return c

    def __call__(self, omega, l):
        z = np.exp(-1j * np.asarray(omega, dtype=float))
        num = np.polynomial.polynomial.polyval(z, self.psi_poly(l))
        den = np.polynomial.polynomial.polyval(z, self.phi_poly(l))
        if np.any(np.abs(den) < 1e-12):
            raise ModelValidationError(f"Phi_{l} vanishes on the unit circle", "IV(ii)")
        return self.sigma_eigs[l - 1] / TWO_PI * np.abs(num / den) ** 2


def _per_component(coeffs, L, name):
    """Normalise AR/MA coefficients into a tuple of L float arrays."""
    if coeffs is None or len(coeffs) == 0:
        return tuple(np.zeros(0) for _ in range(L))
    first = coeffs[0]
    if np.ndim(first) == 0:
        arr = np.asarray(coeffs, dtype=float)
        return tuple(arr.copy() for _ in range(L))
    if len(coeffs) != L:
        raise ValidationError(f"{name} needs one coefficient list per component ({L}), got {len(coeffs)}")
    return tuple(np.asarray(c, dtype=float).reshape(-1) for c in coeffs)


@dataclass(frozen=True)
class TaperedRational:
    """Tapered rational symbol ``(P / Q)(lambda_l, omega) h(omega)``.

    ``P`` and ``Q`` are coefficient matrices ``c[i, j]`` of
    ``sum c[i, j] lambda^i omega^(2 j)`` (even in omega).  ``lambdas`` is the
    lambda grid, one point per basis index.
    """

    P: np.ndarray
    Q: np.ndarray
    lambdas: np.ndarray
    taper: str = "cosine"

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.P, dtype=float))
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        lam = np.asarray(self.lambdas, dtype=float).reshape(-1)
        if self.taper not in TAPERS:
            raise ValidationError(f"unknown taper {self.taper!r}; choose from {TAPERS}")
        if lam.size == 0:
            raise ValidationError("lambdas must be non-empty")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "lambdas", lam)

    @property
    def L(self):
        return self.lambdas.size

    def h(self, omega):
        omega = np.abs(np.asarray(omega, dtype=float))
        if self.taper == "cosine":
            out = np.cos(omega / 2) ** 2
        else:
            out = 1.0 - omega / np.pi
        return np.where(omega <= np.pi, np.maximum(out, 0.0), 0.0)

    @staticmethod
    def _poly(c, lam, omega):
        lam_pow = lam ** np.arange(c.shape[0])
        om_pow = np.asarray(omega, dtype=float)[..., None] ** (2 * np.arange(c.shape[1]))
        return om_pow @ (lam_pow @ c)

    def __call__(self, omega, l):
        lam = self.lambdas[l - 1]
        q = self._poly(self.Q, lam, omega)
        if np.any(np.abs(q) < 1e-12):
            raise ModelValidationError(f"Q vanishes at lambda_{l}", "IV(ii)")
        return self._poly(self.P, lam, omega) / q * self.h(omega)


# --------------------------------------------------------------------------- model

@dataclass(frozen=True)
class SpectralModel:
    """Basis + long-memory symbol + short-memory symbol + LRD kernel + theta box."""

    basis: BasisSpec
    alpha_symbol: LongMemorySymbol
    mshort: object
    lrd_kernel: str = "exact_diff"
    theta_domain: np.ndarray = None
    quad: dict = field(default_factory=lambda: dict(DEFAULT_QUAD))

    def __post_init__(self):
        if self.lrd_kernel not in KERNELS:
            raise ValidationError(f"unknown LRD kernel {self.lrd_kernel!r}; choose from {KERNELS}")
        if self.mshort.L != self.basis.L:
            raise ValidationError(f"short-memory symbol has {self.mshort.L} components, basis has {self.basis.L}")
        dom = self.theta_domain
        if dom is None:
            dom = [[self.alpha_symbol.l_lo, self.alpha_symbol.l_hi]] + [[0.0, 0.5]] * (self.alpha_symbol.p - 1)
        dom = np.atleast_2d(np.asarray(dom, dtype=float))
        if dom.shape != (self.alpha_symbol.p, 2) or np.any(dom[:, 0] > dom[:, 1]):
            raise ValidationError(f"theta_domain must be a ({self.alpha_symbol.p}, 2) box with lo <= hi")
        dom.setflags(write=False)
        object.__setattr__(self, "theta_domain", dom)
        object.__setattr__(self, "quad", {**DEFAULT_QUAD, **(self.quad or {})})

    @property
    def L(self):
        return self.basis.L

    @property
    def p(self):
        return self.alpha_symbol.p

    def check_theta(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.shape != (self.p,):
            raise ValidationError(f"theta must have length {self.p}")
        lo, hi = self.theta_domain[:, 0], self.theta_domain[:, 1]
        if np.any(theta < lo - 1e-12) or np.any(theta > hi + 1e-12):
            raise ValidationError(f"theta {theta.tolist()} outside domain {self.theta_domain.tolist()}")
        return theta

    def alpha(self, theta, check=True):
        """``alpha(l, theta)`` for ``l = 1..L``."""
        if check:
            theta = self.check_theta(theta)
        a = self.alpha_symbol.raw(self.basis.indices(), theta)
        s = self.alpha_symbol
        if np.any(a <= 0) or np.any(a >= 1):
            raise ModelValidationError(f"alpha values {a.tolist()} leave (0, 1)", "IV(i)")
        if np.any(a < s.l_lo - 1e-12) or np.any(a > s.l_hi + 1e-12):
            raise ModelValidationError(f"alpha values {a.tolist()} leave [{s.l_lo}, {s.l_hi}]", "IV(i)")
        return a

    def m(self, omega):
        """Short-memory symbol on ``omega`` (any shape), stacked on a trailing L axis."""
        omega = np.asarray(omega, dtype=float)
        return np.stack([self.mshort(omega, l) for l in self.basis.indices()], axis=-1)

    def kernel(self, omega, kind=None):
        return lrd_kernel_value(omega, kind or self.lrd_kernel)

    def density(self, omega, theta, kernel=None):
        """``f(omega, l, theta)`` with a trailing L axis; omega must avoid 0."""
        omega = np.asarray(omega, dtype=float)
        if np.any(omega == 0):
            raise SingularityError("spectral density is singular at omega = 0")
        a = self.alpha(theta)
        return self.m(omega) * self.kernel(omega, kernel)[..., None] ** (-a)

    def grid(self, max_width=None) -> FrequencyGrid:
        q = dict(self.quad)
        if max_width is not None:
            q["max_width"] = min(q["max_width"], max_width)
        return _cached_grid(q["omega_min"], q["ratio"], int(q["nodes_per_panel"]), q["max_width"])


@functools.lru_cache(maxsize=64)
def _cached_grid(omega_min, ratio, nodes_per_panel, max_width):
    return quadrature_grid(omega_min, ratio, nodes_per_panel, max_width)


def lrd_kernel_value(omega, kind):
    omega = np.asarray(omega, dtype=float)
    if kind == "exact_diff":
        return 2.0 * np.abs(np.sin(omega / 2.0))
    if kind == "power_law":
        return np.abs(omega)
    raise ValidationError(f"unknown LRD kernel {kind!r}")


def _check_l(model, l):
    if int(l) != l or not 1 <= l <= model.L:
        raise ValidationError(f"component index {l} outside 1..{model.L}")
    return int(l)


# --------------------------------------------------------------------------- pointwise ops

def alpha_eval(model: SpectralModel, l: int, theta) -> float:
    l = _check_l(model, l)
    return float(model.alpha(theta)[l - 1])


def m_symbol_eval(model: SpectralModel, omega, l: int):
    l = _check_l(model, l)
    return model.mshort(omega, l)


def spectral_density_symbol(model: SpectralModel, omega, l: int, theta):
    l = _check_l(model, l)
    omega = np.asarray(omega, dtype=float)
    if np.any(omega == 0):
        raise SingularityError("spectral density is singular at omega = 0")
    a = alpha_eval(model, l, theta)
    return model.mshort(omega, l) * model.kernel(omega) ** (-a)


def _hole_mass(model, l, a, omega_min):
    # int_{-w}^{w} M(omega) K(omega)^(-a) ~ 2 M(w) w^(1-a) / (1-a); K(omega) ~ |omega| there.
    return 2.0 * model.mshort(omega_min, l) * omega_min ** (1.0 - a) / (1.0 - a)


def covariance_symbol(model: SpectralModel, t: int, l: int, theta, quad: Optional[FrequencyGrid] = None,
                      hole_correction: bool = True) -> float:
    """Lag-``t`` autocovariance ``int exp(i omega t) f(omega, l, theta) d omega`` of component ``l``.

    The default grid has panels no wider than ``pi / (4 |t|)``.  The mass in
    the hole ``(-omega_min, omega_min)`` is added analytically unless
    ``hole_correction`` is false.
    """
    l = _check_l(model, l)
    t = int(t)
    if quad is None:
        quad = model.grid(max_width=np.pi / (4 * abs(t)) if t else None)
    a = alpha_eval(model, l, theta)
    f = model.mshort(quad.nodes, l) * model.kernel(quad.nodes) ** (-a)
    z = np.sum(quad.weights * f * np.exp(1j * quad.nodes * t))
    if not np.isfinite(z):
        raise QuadratureError(f"non-finite covariance quadrature at lag {t}, component {l}")
    if abs(z.imag) >= 1e-8 * abs(z.real) + 1e-10:
        raise QuadratureError(f"covariance quadrature has imaginary part {z.imag:.3e} at lag {t}")
    r = z.real
    if hole_correction and quad.omega_min > 0:
        r += _hole_mass(model, l, a, quad.omega_min)
    return float(r)


def lrd_asymptote(model: SpectralModel, t: int, l: int, theta) -> float:
    """Heavy-tail covariance asymptote ``2 Gamma(1-a) sin(pi a / 2) M(1/t, l) t^(a-1)``."""
    if t < 1:
        raise ValidationError("asymptote needs t >= 1")
    l = _check_l(model, l)
    a = alpha_eval(model, l, theta)
    if a >= 1:
        raise ModelValidationError("alpha >= 1 hits the Gamma pole", "IV(i)")
    amp = 2.0 * math.gamma(1.0 - a) * math.sin(math.pi * a / 2.0) * float(model.mshort(1.0 / t, l))
    return amp * t ** (a - 1.0)


def fractional_coefficients(d: float, J: int):
    """``a_j = Gamma(j + d) / (Gamma(j + 1) Gamma(d))`` for ``j = 0..J`` by recursion."""
    a = np.empty(J + 1)
    a[0] = 1.0
    if J:
        a[1:] = np.cumprod((np.arange(1, J + 1) - 1 + d) / np.arange(1, J + 1))
    return a


def ma_coefficients(model: SpectralModel, l: int, theta, J: int):
    """MA(infinity) weights ``b_0..b_J`` of component ``l`` (FARIMA models only)."""
    if not isinstance(model.mshort, FarimaRational):
        raise ValidationError("MA coefficients require a FarimaRational short-memory symbol")
    l = _check_l(model, l)
    ms = model.mshort
    p, q = ms.ar[l - 1].size, ms.ma[l - 1].size
    if J < p + q:
        raise ValidationError(f"truncation J={J} must be >= p + q = {p + q}")
    d = alpha_eval(model, l, theta) / 2.0
    a = fractional_coefficients(d, J)
    c = ms.impulse_response(l, J + 1)
    return np.convolve(a, c)[: J + 1]


# --------------------------------------------------------------------------- many-lag covariances

def _fn_autocovariance(d, var, n):
    """Autocovariances 0..n of fractional noise with spectral density ``var/(2 pi) |1-e^{-iw}|^{-2d}``."""
    g = np.empty(n + 1)
    g[0] = var * math.exp(gammaln(1 - 2 * d) - 2 * gammaln(1 - d))
    if n:
        k = np.arange(1, n + 1)
        g[1:] = g[0] * np.cumprod((k - 1 + d) / (k - d))
    return g


def _impulse_length(ms: FarimaRational, l, cap=20000):
    roots = np.roots(ms.phi_poly(l)[::-1]) if ms.ar[l - 1].size else np.array([])
    q = ms.psi_poly(l).size
    if roots.size == 0:
        return q
    rho = 1.0 / np.min(np.abs(roots))
    n = q + int(math.ceil(math.log(1e-17) / math.log(rho))) + 10 * ms.ar[l - 1].size
    return min(max(n, q), cap)


def _farima_autocovariance(model, l, a, n):
    ms = model.mshort
    n_c = _impulse_length(ms, l)
    c = ms.impulse_response(l, n_c)
    rho_c = np.correlate(c, c, mode="full")  # lags -(n_c-1)..(n_c-1)
    g = _fn_autocovariance(a / 2.0, ms.sigma_eigs[l - 1], n + n_c)
    full = np.concatenate([g[:0:-1], g])  # lags -(n+n_c)..(n+n_c)
    conv = np.convolve(full, rho_c, mode="valid") if n_c > 1 else full
    mid = (conv.size - 1) // 2
    return conv[mid: mid + n + 1]


def _fft_autocovariance(model, l, a, n, oversample=8):
    """Covariances 0..n by a trapezoid/DCT sum with generalised Euler-Maclaurin
    corrections for the ``omega^(-a)`` endpoint singularity (terms j = 0, 2;
    the j = 1 term vanishes because the regular factor is even)."""
    m = 1 << max(12, int(math.ceil(math.log2(max(oversample * max(n, 1), 2)))))
    h = np.pi / m
    nodes = h * np.arange(1, m + 1)
    x = np.concatenate([[0.0], model.mshort(nodes, l) * model.kernel(nodes) ** (-a)])
    S = 0.5 * h * sfft.dct(x, type=1)[: n + 1]

    def G(w):
        w = np.asarray(w, dtype=float)
        return model.mshort(w, l) * (np.abs(w) / model.kernel(w)) ** a

    delta = 1e-2
    G0 = float(G(1e-9))
    d1, d2 = float(G(delta)) - G0, float(G(2 * delta)) - G0
    G2 = (16 * d1 - d2) / (6 * delta**2)
    t = np.arange(n + 1, dtype=float)
    corr = zeta(a) * G0 * h ** (1 - a) + 0.5 * zeta(a - 2) * (G2 - t**2 * G0) * h ** (3 - a)
    return 2.0 * (S - corr)


def autocovariances(model: SpectralModel, theta, n: int, method: str = "auto"):
    """Autocovariances ``r_0..r_n`` for every component, shape ``(n + 1, L)``.

    ``method``: ``"closed"`` (exact FARIMA recursion; FARIMA + exact_diff
    only), ``"fft"`` (corrected trapezoid on a fine grid, any model),
    ``"quadrature"`` (one :func:`covariance_symbol` call per lag, slow) or
    ``"auto"`` (closed when available, else fft).
    """
    a = model.alpha(theta)
    if method == "auto":
        closed_ok = isinstance(model.mshort, FarimaRational) and model.lrd_kernel == "exact_diff"
        method = "closed" if closed_ok else "fft"
    out = np.empty((n + 1, model.L))
    for i, l in enumerate(model.basis.indices()):
        if method == "closed":
            if not (isinstance(model.mshort, FarimaRational) and model.lrd_kernel == "exact_diff"):
                raise ValidationError("closed-form covariances need a FARIMA model with the exact_diff kernel")
            out[:, i] = _farima_autocovariance(model, l, a[i], n)
        elif method == "fft":
            out[:, i] = _fft_autocovariance(model, l, a[i], n)
        elif method == "quadrature":
            out[:, i] = [covariance_symbol(model, t, l, theta) for t in range(n + 1)]
        else:
            raise ValidationError(f"unknown covariance method {method!r}")
    if not np.all(np.isfinite(out)):
        raise QuadratureError("non-finite autocovariances")
    return out


# --------------------------------------------------------------------------- assumptions

@dataclass
class AssumptionReport:
    integrability: dict
    m_bounds: tuple
    roots_ok: bool
    slow_variation: float
    alpha_range: tuple
    warnings: list

    def as_dict(self):
        return dict(integrability=self.integrability, m_bounds=list(self.m_bounds), roots_ok=self.roots_ok,
                    slow_variation=self.slow_variation, alpha_range=list(self.alpha_range),
                    warnings=list(self.warnings))


def theta_grid(model: SpectralModel, points: int = 5):
    """Cartesian grid over the theta box, lexicographic order."""
    axes = [np.linspace(lo, hi, points) for lo, hi in model.theta_domain]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _check_roots(ms: FarimaRational):
    for l in range(1, ms.L + 1):
        phi_roots = np.roots(ms.phi_poly(l)[::-1]) if ms.ar[l - 1].size else np.array([])
        ma = ms.ma[l - 1]
        psi_roots = np.roots(ma[::-1]) if ma.size > 1 else np.array([])
        if ma.size and ma[0] == 0:
            raise ModelValidationError(f"Psi_{l} has a repeated root at zero", "FARIMA roots")
        for name, roots in (("Phi", phi_roots), ("Psi", psi_roots)):
            if roots.size and np.min(np.abs(roots)) <= 1.0 + 1e-10:
                raise ModelValidationError(
                    f"{name}_{l} has a root of modulus {np.min(np.abs(roots)):.6g} inside the unit circle",
                    "FARIMA roots")
        if phi_roots.size and psi_roots.size:
            gap = np.min(np.abs(phi_roots[:, None] - psi_roots[None, :]))
            if gap < 1e-8:
                raise ModelValidationError(f"Phi_{l} and Psi_{l} share a root", "FARIMA roots")


def validate_assumptions(model: SpectralModel, theta_points: int = 5, warn_level: float = 0.05) -> AssumptionReport:
    """Numerically check the modelling assumptions on grids.

    Hard failures raise :class:`ModelValidationError` naming the assumption;
    the slow-variation check only warns.
    """
    s = model.alpha_symbol
    if not (0 < s.l_lo <= s.l_hi < 1):
        raise ModelValidationError(f"alpha bounds [{s.l_lo}, {s.l_hi}] not inside (0, 1)", "IV(i)")

    roots_ok = True
    if isinstance(model.mshort, FarimaRational):
        _check_roots(model.mshort)

    grid = model.grid()
    nodes = grid.nodes
    mvals = model.m(nodes)
    if not np.all(np.isfinite(mvals)):
        raise ModelValidationError("short-memory symbol is not finite on the grid", "IV(ii)")
    m_lo, m_hi = float(np.min(mvals)), float(np.max(mvals))
    if m_lo <= 0:
        raise ModelValidationError(f"short-memory symbol reaches {m_lo:.3e} <= 0", "IV(ii)")

    thetas = theta_grid(model, theta_points)
    alphas = np.array([model.alpha(th) for th in thetas])
    integrability = {}
    for th, a in zip(thetas, alphas):
        fmax = np.max(mvals * model.kernel(nodes)[:, None] ** (-a), axis=1)
        hole = max(_hole_mass(model, l, a[l - 1], grid.omega_min) for l in model.basis.indices())
        val = float(grid.integrate(fmax) + hole)
        if not np.isfinite(val):
            raise ModelValidationError(f"int sup_l f d omega is not finite at theta={th.tolist()}", "I")
        integrability[json.dumps([round(float(x), 12) for x in th])] = val

    dev = 0.0
    for w in (1e-2, 1e-3):
        base = model.m(np.array([w]))[0]
        for xi in (2.0, 5.0):
            dev = max(dev, float(np.max(np.abs(model.m(np.array([w / xi]))[0] / base - 1.0))))
    msgs = []
    if dev > warn_level:
        msg = f"short-memory symbol may not be slowly varying at 0 (max deviation {dev:.3g})"
        warnings.warn(msg)
        msgs.append(msg)
    return AssumptionReport(integrability, (m_lo, m_hi), roots_ok, dev,
                            (float(alphas.min()), float(alphas.max())), msgs)


# --------------------------------------------------------------------------- config

def _require(cfg, key, where):
    if key not in cfg:
        raise ConfigError(f"missing required field '{where}{key}'")
    return cfg[key]


def model_from_config(cfg: dict) -> SpectralModel:
    """Build a :class:`SpectralModel` from a JSON-style dictionary (see README)."""
    if not isinstance(cfg, dict):
        raise ConfigError("model config must be a JSON object")
    try:
        basis_cfg = _require(cfg, "basis", "")
        L = _require(basis_cfg, "L", "basis.")
        basis = BasisSpec(L, basis_cfg.get("labels"))
        a_cfg = _require(cfg, "alpha", "")
        alpha_symbol = LongMemorySymbol(_require(a_cfg, "family", "alpha."),
                                        *a_cfg.get("bounds", (0.01, 0.99)))
        sm = _require(cfg, "short_memory", "")
        kind = _require(sm, "type", "short_memory.")
        if kind == "farima":
            sig = sm.get("sigma_eigs", "default")
            if sig == "default":
                sig = 1.0 / basis.indices().astype(float) ** 2
            mshort = FarimaRational(sig, sm.get("ar", ()), sm.get("ma", ()))
        elif kind == "tapered":
            mshort = TaperedRational(_require(sm, "P", "short_memory."), _require(sm, "Q", "short_memory."),
                                     sm.get("lambdas", basis.indices().astype(float).tolist()),
                                     sm.get("taper", "cosine"))
        else:
            raise ConfigError(f"short_memory.type must be 'farima' or 'tapered', got {kind!r}")
        return SpectralModel(basis, alpha_symbol, mshort, cfg.get("kernel", "exact_diff"),
                             cfg.get("theta_domain"), cfg.get("quadrature", {}))
    except ValidationError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid model config: {exc}") from exc


def load_model(path) -> SpectralModel:
    with open(path) as fh:
        return model_from_config(json.load(fh))


def fractional_noise_model(L=1, kernel="exact_diff", sigma_eigs=None, family="constant", bounds=(0.01, 0.99),
                           theta_domain=None, quad=None) -> SpectralModel:
    """Convenience constructor: pure fractional noise, ``lambda_l = l^-2`` by default."""
    basis = BasisSpec(L)
    sig = 1.0 / basis.indices().astype(float) ** 2 if sigma_eigs is None else np.broadcast_to(
        np.asarray(sigma_eigs, dtype=float), (L,))
    return SpectralModel(basis, LongMemorySymbol(family, *bounds), FarimaRational(sig), kernel,
                         theta_domain, quad or {})
