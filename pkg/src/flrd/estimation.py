"""Minimum-contrast estimation of the long-memory parameter.

All operators are diagonal in the model basis, so every contrast is an
``L``-vector of diagonal entries.  The contrast for component ``k`` is::

    U_T(k) = -(2 pi / T) sum_j p_{w_j}(k, k) w(w_j, k, theta)
    w(omega, k, theta) = ln Upsilon(omega, k, theta) * W(omega, k)
    Upsilon = M / (K^alpha Sigma^2),   W = wtilde |omega|^beta

and the estimator minimises ``sup_k U_T(k)`` over the theta box.

``K`` is the standardisation kernel.  It defaults to the kernel the model
generates data with (``model.lrd_kernel``); ``"power_law"`` gives the
``|omega|^alpha`` standardisation, which is biased for ``exact_diff`` data.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .errors import ModelValidationError, OptimizationError, QuadratureError, SingularityError, ValidationError
from .models import KERNELS, SpectralModel, lrd_kernel_value, theta_grid
from .operators import FrequencyGrid
from .spectral import PeriodogramSet

BRACKET_RTOL = 1e-8


@dataclass(frozen=True)
class WeightSymbol:
    """Weight ``W(omega, l) = wtilde[l] |omega|^beta``."""

    wtilde: np.ndarray
    beta: float = 2.0

    def __post_init__(self):
        wt = np.asarray(self.wtilde, dtype=float).reshape(-1).copy()
        if wt.size == 0 or not np.all(np.isfinite(wt)) or np.any(wt <= 0):
            raise ValidationError("wtilde must be a non-empty array of positive finite values")
        if not self.beta > 1:
            raise ValidationError(f"beta must exceed 1, got {self.beta}")
        wt.setflags(write=False)
        object.__setattr__(self, "wtilde", wt)
        object.__setattr__(self, "beta", float(self.beta))

    @classmethod
    def uniform(cls, L, beta=2.0):
        return cls(np.ones(L), beta)

    @property
    def m_w(self):
        return float(self.wtilde.min())

    @property
    def M_w(self):
        return float(self.wtilde.max())

    def __call__(self, omega):
        """``W`` on ``omega`` with a trailing L axis."""
        return np.abs(np.asarray(omega, dtype=float))[..., None] ** self.beta * self.wtilde


@dataclass(frozen=True)
class Normalizer:
    """``Sigma^2_theta(l)`` for one theta, tied to the kernel and grid used."""

    theta: np.ndarray
    sigma2: np.ndarray
    kernel: str
    quad_hash: str

    def __post_init__(self):
        s = np.asarray(self.sigma2, dtype=float)
        if not np.all(np.isfinite(s)) or np.any(s <= 0):
            raise QuadratureError(f"normalizer must be positive and finite, got {s.tolist()}")
        object.__setattr__(self, "sigma2", s)
        object.__setattr__(self, "theta", np.atleast_1d(np.asarray(self.theta, dtype=float)))


@dataclass(frozen=True)
class ContrastRow:
    theta: np.ndarray
    values: np.ndarray

    @property
    def sup(self):
        return float(np.max(self.values))


@dataclass
class ContrastSurface:
    """Objective values visited by the estimator.

    ``thetas`` (n, p) and ``values`` (n, L) hold the coarse grid; ``trace``
    lists ``(theta, sup)`` for every refinement evaluation.  Points where
    ``alpha`` leaves its bounds are counted in ``n_infeasible`` and omitted.
    """

    thetas: np.ndarray
    values: np.ndarray
    trace: list = field(default_factory=list)
    n_infeasible: int = 0

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise OptimizationError("contrast surface has non-finite values", self.trace)

    @property
    def sups(self):
        return self.values.max(axis=1)


@dataclass(frozen=True)
class OptimizerConfig:
    grid_points: int = 21
    refine: bool = True
    xatol: float = 1e-6
    fatol: float = 1e-12
    maxiter: int = 400

    def __post_init__(self):
        if self.grid_points < 2:
            raise ValidationError("grid_points must be >= 2")


def quad_hash(grid: FrequencyGrid) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(grid.nodes).tobytes())
    h.update(np.ascontiguousarray(grid.weights).tobytes())
    return h.hexdigest()[:16]


def _kernel_name(model, kernel):
    kernel = model.lrd_kernel if kernel in (None, "model") else kernel
    if kernel not in KERNELS:
        raise ValidationError(f"unknown standardisation kernel {kernel!r}")
    return kernel


def _check_weight(model, w):
    if w.wtilde.size != model.L:
        raise ValidationError(f"wtilde has {w.wtilde.size} entries, model has L={model.L}")


class ContrastEvaluator:
    """Precomputed symbols for repeated contrast evaluations on fixed grids.

    Parameters
    ----------
    model, w
        Spectral model and weight symbol.
    quad
        Grid for the normalizer (default ``model.grid()``).
    kernel
        Standardisation kernel; ``None`` uses ``model.lrd_kernel``.
    """

    def __init__(self, model: SpectralModel, w: WeightSymbol, quad: Optional[FrequencyGrid] = None,
                 kernel: Optional[str] = None):
        _check_weight(model, w)
        self.model, self.w = model, w
        self.kernel = _kernel_name(model, kernel)
        self.quad = quad if quad is not None else model.grid()
        self.quad_hash = quad_hash(self.quad)
        nodes = self.quad.nodes
        self._q_mw = self.quad.weights[:, None] * model.m(nodes) * w(nodes)
        self._q_lnK = np.log(lrd_kernel_value(nodes, self.kernel))
        mq = model.m(nodes)
        self.m_lo, self.m_hi = float(mq.min()), float(mq.max())
        self._nodes = {}

    # -- normalizer --------------------------------------------------------
    def sigma2(self, alpha):
        return np.sum(self._q_mw * np.exp(-self._q_lnK[:, None] * alpha), axis=0)

    def bracket(self, alpha):
        """Closed-form lower/upper bounds on ``Sigma^2(l)``."""
        b = self.w.beta
        lo_a, hi_a = float(np.min(alpha)), float(np.max(alpha))
        lo = self.m_lo * self.w.m_w * 2 * ((np.pi ** (1 + b - hi_a) - 1) / (1 + b - hi_a) + 1 / (1 + b - lo_a))
        hi = self.m_hi * self.w.M_w * 2 * ((np.pi ** (1 + b - lo_a) - 1) / (1 + b - lo_a) + 1 / (1 + b - hi_a))
        if self.kernel == "exact_diff":
            # (2/pi)|omega| <= 2|sin(omega/2)| <= |omega| on [-pi, pi]
            hi *= (np.pi / 2) ** hi_a
        return lo, hi

    def normalizer(self, theta) -> Normalizer:
        theta = self.model.check_theta(theta)
        alpha = self.model.alpha(theta)
        s2 = self.sigma2(alpha)
        lo, hi = self.bracket(alpha)
        if np.any(s2 < lo * (1 - BRACKET_RTOL)) or np.any(s2 > hi * (1 + BRACKET_RTOL)):
            raise QuadratureError(f"normalizer {s2.tolist()} outside analytic bracket [{lo:.6g}, {hi:.6g}]")
        return Normalizer(theta, s2, self.kernel, self.quad_hash)

    # -- contrasts ---------------------------------------------------------
    def _prepare(self, grid: FrequencyGrid):
        key = id(grid)
        if key not in self._nodes or self._nodes[key][0] is not grid:
            if len(self._nodes) >= 8:
                self._nodes.clear()
            om = grid.wrapped()
            m = self.model.m(om)
            self._nodes[key] = (grid, np.log(m), np.log(lrd_kernel_value(om, self.kernel)),
                                grid.weights[:, None] * self.w(om), m)
        return self._nodes[key][1:]

    def log_weight(self, grid: FrequencyGrid, theta, norm: Normalizer = None):
        """``w(omega_j, l, theta)`` on the nodes of ``grid``; shape ``(n, L)``.  Includes no quadrature weight."""
        lnM, lnK, _, _ = self._prepare(grid)
        alpha = self.model.alpha(theta)
        if norm is None:
            norm = self.normalizer(theta)
        return (lnM - np.log(norm.sigma2) - lnK[:, None] * alpha) * self.w(grid.wrapped())

    def contrast(self, grid: FrequencyGrid, diag, theta, norm: Normalizer = None):
        """``-sum_j weight_j diag[j, l] w(omega_j, l, theta)`` for every ``l``."""
        lnM, lnK, qW, _ = self._prepare(grid)
        alpha = self.model.alpha(theta)
        if norm is None:
            norm = self.normalizer(theta)
        lw = lnM - np.log(norm.sigma2) - lnK[:, None] * alpha
        return -np.sum(np.asarray(diag) * qW * lw, axis=0)

    def density(self, grid: FrequencyGrid, theta):
        """``M K^(-alpha)`` on ``grid`` with the standardisation kernel."""
        _, lnK, _, m = self._prepare(grid)
        return m * np.exp(-lnK[:, None] * self.model.alpha(theta))


# --------------------------------------------------------------------------- public operations

def normalizer(model: SpectralModel, theta, w: WeightSymbol, quad: Optional[FrequencyGrid] = None,
               kernel: Optional[str] = None) -> Normalizer:
    """``Sigma^2_theta(l) = int M(omega, l) W(omega, l) K(omega)^(-alpha(l, theta)) d omega``."""
    return ContrastEvaluator(model, w, quad, kernel).normalizer(theta)


def _pointwise(model, omega, l, theta, norm):
    omega = np.asarray(omega, dtype=float)
    if np.any(omega == 0):
        raise SingularityError("standardised symbol is singular at omega = 0")
    if int(l) != l or not 1 <= l <= model.L:
        raise ValidationError(f"component index {l} outside 1..{model.L}")
    a = model.alpha(theta)[int(l) - 1]
    return omega, int(l), a


def upsilon_symbol(model: SpectralModel, omega, l: int, theta, norm: Normalizer):
    """``Upsilon(omega, l, theta) = M(omega, l) / (K(omega)^alpha Sigma^2_theta(l))``."""
    omega, l, a = _pointwise(model, omega, l, theta, norm)
    return model.mshort(omega, l) / (lrd_kernel_value(omega, norm.kernel) ** a * norm.sigma2[l - 1])


def log_weight_symbol(model: SpectralModel, omega, l: int, theta, norm: Normalizer, w: WeightSymbol):
    """``[ln M - ln Sigma^2 - alpha ln K] wtilde[l] |omega|^beta``."""
    omega, l, a = _pointwise(model, omega, l, theta, norm)
    lw = np.log(model.mshort(omega, l)) - np.log(norm.sigma2[l - 1]) - a * np.log(lrd_kernel_value(omega, norm.kernel))
    return lw * w.wtilde[l - 1] * np.abs(omega) ** w.beta


def weight_bound(model: SpectralModel, theta, norm: Normalizer, w: WeightSymbol, quad=None) -> float:
    """Uniform bound ``H(theta)`` on ``|w(omega, l, theta)|`` over ``[-pi, pi]``.

    Uses ``|omega|^beta |ln K| <= max(pi^beta ln pi, 1/(e beta))`` (plus
    ``pi^beta ln(pi/2)`` for the ``exact_diff`` kernel) and the range of
    ``|ln M|`` on the quadrature grid.
    """
    quad = quad if quad is not None else model.grid()
    b = w.beta
    pb = np.pi**b
    ln_m = float(np.max(np.abs(np.log(model.m(quad.nodes)))))
    ln_k = max(pb * np.log(np.pi), 1.0 / (np.e * b))
    if norm.kernel == "exact_diff":
        ln_k += pb * np.log(np.pi / 2)
    a_hi = float(np.max(model.alpha(theta)))
    return w.M_w * (pb * (ln_m + float(np.max(np.abs(np.log(norm.sigma2))))) + a_hi * ln_k)


def empirical_contrast(pset: PeriodogramSet, model: SpectralModel, theta, norm: Normalizer,
                       w: WeightSymbol) -> ContrastRow:
    """``U_T(k) = -(2 pi / T) sum_j p_{w_j}(k, k) w(w_j, k, theta)``."""
    if pset.grid.kind != "fourier":
        raise ValidationError("empirical contrast needs a periodogram on the Fourier grid")
    _check_weight(model, w)
    ev = ContrastEvaluator(model, w, kernel=norm.kernel)
    theta = model.check_theta(theta)
    return ContrastRow(theta, ev.contrast(pset.grid, pset.diagonal(), theta, norm))


def theoretical_contrast(model: SpectralModel, theta0, theta, norm: Normalizer, w: WeightSymbol,
                         quad: Optional[FrequencyGrid] = None) -> ContrastRow:
    """``U_theta(k) = -int f(omega, k, theta0) w(omega, k, theta) d omega``.

    ``f`` uses the normalizer's kernel, so the divergence is a weighted
    Kullback-Leibler quantity and nonnegative.
    """
    ev = ContrastEvaluator(model, w, quad, norm.kernel)
    theta = model.check_theta(theta)
    f0 = ev.density(ev.quad, model.check_theta(theta0))
    return ContrastRow(theta, ev.contrast(ev.quad, f0, theta, norm))


def divergence(model: SpectralModel, theta0, theta, w: WeightSymbol, quad: Optional[FrequencyGrid] = None,
               kernel: Optional[str] = None, evaluator: ContrastEvaluator = None):
    """Diagonal of ``K(theta0, theta) = U_theta - U_theta0``; shape ``(L,)``."""
    ev = evaluator or ContrastEvaluator(model, w, quad, kernel)
    theta0, theta = model.check_theta(theta0), model.check_theta(theta)
    f0 = ev.density(ev.quad, theta0)
    return ev.contrast(ev.quad, f0, theta) - ev.contrast(ev.quad, f0, theta0)


def estimate_theta(pset: PeriodogramSet, model: SpectralModel, w: Optional[WeightSymbol] = None,
                   opt: OptimizerConfig = OptimizerConfig(), kernel: Optional[str] = None,
                   evaluator: ContrastEvaluator = None):
    """``argmin_theta sup_k U_T(k)``; returns ``(theta_hat, ContrastSurface)``."""
    if pset.grid.kind != "fourier":
        raise ValidationError("estimation needs a periodogram on the Fourier grid")
    return estimate_from_diagonal(pset.diagonal(), pset.grid, model, w, opt, kernel, evaluator)


def estimate_from_diagonal(diag, grid: FrequencyGrid, model: SpectralModel, w: Optional[WeightSymbol] = None,
                           opt: OptimizerConfig = OptimizerConfig(), kernel: Optional[str] = None,
                           evaluator: ContrastEvaluator = None):
    """Estimator driven by an arbitrary ``(n, L)`` array of diagonal entries on ``grid``.

    Coarse grid search (lexicographic order, first minimum wins) followed by
    bounded Nelder-Mead from the best grid point.
    """
    w = w or WeightSymbol.uniform(model.L)
    ev = evaluator or ContrastEvaluator(model, w, kernel=kernel)
    diag = np.asarray(diag, dtype=float)
    if diag.shape != (len(grid), model.L):
        raise ValidationError(f"diagonal must have shape ({len(grid)}, {model.L})")

    def evaluate(theta):
        try:
            return ev.contrast(grid, diag, theta)
        except ModelValidationError:
            return None

    thetas, rows, n_bad = [], [], 0
    for th in theta_grid(model, opt.grid_points):
        u = evaluate(th)
        if u is None:
            n_bad += 1
            continue
        if not np.all(np.isfinite(u)):
            raise OptimizationError(f"non-finite contrast at theta={th.tolist()}", [(th.tolist(), None)])
        thetas.append(th)
        rows.append(u)
    if not rows:
        raise OptimizationError("no feasible theta on the search grid")
    surface = ContrastSurface(np.array(thetas), np.array(rows), n_infeasible=n_bad)
    best = int(np.argmin(surface.sups))
    theta_hat, f_hat = surface.thetas[best].copy(), float(surface.sups[best])

    if opt.refine:
        dom = model.theta_domain
        step = (dom[:, 1] - dom[:, 0]) / (opt.grid_points - 1)

        def objective(x):
            u = evaluate(x)
            val = np.inf if u is None else float(np.max(u))
            surface.trace.append((np.asarray(x, dtype=float).tolist(), val))
            if np.isnan(val) or (u is not None and not np.isfinite(val)):
                raise OptimizationError(f"non-finite objective at theta={list(x)}", surface.trace)
            return val

        simplex = [theta_hat]
        for i in range(model.p):
            v = theta_hat.copy()
            v[i] = v[i] + step[i] if v[i] + step[i] <= dom[i, 1] else v[i] - step[i]
            simplex.append(v)
        res = minimize(objective, theta_hat, method="Nelder-Mead", bounds=[tuple(b) for b in dom],
                       options=dict(xatol=opt.xatol, fatol=opt.fatol, maxiter=opt.maxiter,
                                    initial_simplex=np.array(simplex)))
        if np.isfinite(res.fun) and res.fun < f_hat:
            theta_hat, f_hat = np.clip(res.x, dom[:, 0], dom[:, 1]), float(res.fun)
    return theta_hat, surface


def estimation_report(theta_hat, surface: ContrastSurface, model: SpectralModel, diag, grid: FrequencyGrid,
                      w: Optional[WeightSymbol] = None, kernel: Optional[str] = None, config_hash=None, seed=None):
    """JSON-ready summary of one estimate."""
    w = w or WeightSymbol.uniform(model.L)
    u = ContrastEvaluator(model, w, kernel=kernel).contrast(grid, diag, theta_hat)
    return dict(theta_hat=np.asarray(theta_hat).tolist(), objective=float(np.max(u)), contrast=u.tolist(),
                trace=[dict(theta=t, objective=v) for t, v in surface.trace],
                grid_points=int(len(surface.thetas)), n_infeasible=int(surface.n_infeasible),
                kernel=_kernel_name(model, kernel), config_hash=config_hash, seed=seed)


def config_hash(obj) -> str:
    """Stable SHA-256 of a JSON-serialisable configuration."""
    return hashlib.sha256(json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()).hexdigest()
