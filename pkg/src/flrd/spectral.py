"""Frequency-domain statistics of a functional sample."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import NumericalConsistencyError, ValidationError
from .models import SpectralModel, autocovariances
from .operators import BasisSpec, DiagonalOperator, FrequencyGrid, HermitianFrame, fourier_grid
from .simulation import SamplePath

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class FdftFrame:
    """Functional DFT on the Fourier grid; row ``j - 1`` holds frequency ``2 pi j / T``."""

    basis: BasisSpec
    grid: FrequencyGrid
    values: np.ndarray


@dataclass(frozen=True)
class PeriodogramSet:
    """Rank-one periodogram frames ``X~_w (x) conj(X~_w)`` on the Fourier grid.

    ``frames`` has shape ``(T - 1, L, L)``.
    """

    basis: BasisSpec
    grid: FrequencyGrid
    frames: np.ndarray

    def __len__(self):
        return self.frames.shape[0]

    def frame(self, j: int) -> HermitianFrame:
        """Frame at Fourier index ``j`` (``1 <= j <= T - 1``)."""
        if not 1 <= j <= len(self):
            raise ValidationError(f"Fourier index {j} outside 1..{len(self)}")
        return HermitianFrame(self.basis, self.frames[j - 1])

    def diagonal(self) -> np.ndarray:
        """Diagonal entries ``p_{w_j}(k, k)``, shape ``(T - 1, L)``."""
        return np.einsum("jkk->jk", self.frames).real.copy()

    def export_diagonal_csv(self, path):
        diag = self.diagonal()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["j", "omega", "l", "value"])
            for j, omega in enumerate(self.grid.nodes, start=1):
                for l in range(self.basis.L):
                    w.writerow([j, repr(float(omega)), l + 1, repr(float(diag[j - 1, l]))])


def _dft(coeffs):
    T = coeffs.shape[0]
    j = np.arange(T)
    # t runs from 1, hence the extra phase exp(-i w_j)
    return np.exp(-1j * TWO_PI * j / T)[:, None] * np.fft.fft(coeffs, axis=0) / np.sqrt(TWO_PI * T)


def fdft(path: SamplePath) -> FdftFrame:
    """``X~_{w_j}(l) = (2 pi T)^(-1/2) sum_{t=1}^T X_t(l) exp(-i w_j t)`` for ``j = 1..T-1``."""
    vals = _dft(path.coeffs)[1:]
    return FdftFrame(path.basis, fourier_grid(path.T), vals)


def fdft_with_zero(path: SamplePath) -> np.ndarray:
    """fDFT at all ``T`` Fourier frequencies including ``j = 0``; shape ``(T, L)``.

    Only used for the discrete-orthogonality identity; never fed to estimation.
    """
    return _dft(path.coeffs)


def periodogram(f: FdftFrame) -> PeriodogramSet:
    v = f.values
    return PeriodogramSet(f.basis, f.grid, v[:, :, None] * v.conj()[:, None, :])


def fejer(omega, T: int):
    """Fejer kernel ``sin^2(T w / 2) / (T sin^2(w / 2))`` with value ``T`` at multiples of 2 pi."""
    if T < 1:
        raise ValidationError("Fejer kernel needs T >= 1")
    omega = np.asarray(omega, dtype=float)
    s = np.sin(omega / 2)
    singular = np.abs(s) < 1e-8
    safe = np.where(singular, 1.0, s)
    out = np.sin(T * omega / 2) ** 2 / (T * safe**2)
    # near the removable singularity use the second-order expansion in e = w - 2 pi k
    e = omega - TWO_PI * np.round(omega / TWO_PI)
    near = T * (1 - (T**2 - 1) * e**2 / 12)
    out = np.where(singular, near, out)
    return out if out.ndim else float(out)


def expected_periodogram_values(model: SpectralModel, theta, T: int, omegas, acov=None, cov_method="auto",
                                check=True):
    """``F^(T)_w(l) = (1/2 pi) sum_{|u|<T} exp(-i w u) (1 - |u|/T) r_u(l)``; shape ``(len(omegas), L)``."""
    if T < 2:
        raise ValidationError("expected periodogram needs T >= 2")
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if acov is None:
        acov = autocovariances(model, theta, T - 1, method=cov_method)
    acov = np.asarray(acov)[:T]
    u = np.arange(1, T)
    coef = 2.0 * (1.0 - u / T)[:, None] * acov[1:]
    out = np.empty((omegas.size, acov.shape[1]))
    step = max(1, 4_000_000 // max(T, 1))
    for s in range(0, omegas.size, step):
        w = omegas[s: s + step]
        out[s: s + step] = acov[0] + np.cos(np.outer(w, u)) @ coef
    out /= TWO_PI
    if check and np.min(out) < -1e-10:
        raise NumericalConsistencyError(f"expected periodogram has negative value {np.min(out):.3e}")
    return out


def expected_periodogram(model: SpectralModel, theta, T: int, omega: float, acov=None,
                         cov_method="auto") -> DiagonalOperator:
    """Mean periodogram operator at a single frequency ``omega != 0``."""
    if omega == 0:
        raise ValidationError("expected periodogram is evaluated only at omega != 0")
    vals = expected_periodogram_values(model, theta, T, [omega], acov=acov, cov_method=cov_method)[0]
    return DiagonalOperator(model.basis, np.maximum(vals, 0.0) if np.all(vals > -1e-10) else vals)


def bias_integrals(model: SpectralModel, theta0, T: int, quad: FrequencyGrid = None, cov_method="auto"):
    """Per-component ``int (F_w - F^(T)_w) dw`` and ``int |F_w - F^(T)_w| dw``.

    Both integrals skip the hole ``(-omega_min, omega_min)`` of the grid.
    """
    if quad is None:
        quad = model.grid(max_width=np.pi / T)
    F = model.density(quad.nodes, theta0)
    FT = expected_periodogram_values(model, theta0, T, quad.nodes, cov_method=cov_method)
    diff = F - FT
    return quad.integrate(diff), quad.integrate(np.abs(diff))


def integrated_bias(model: SpectralModel, theta0, T: int, quad: FrequencyGrid = None, absolute: bool = False,
                    cov_method="auto") -> float:
    """Hilbert-Schmidt norm of the integrated periodogram bias operator.

    The operators are diagonal, so the norm is the Euclidean norm of the
    per-component integrals.  With ``absolute=True`` each component integrates
    ``|F - F^(T)|`` instead (the dominating quantity used to prove the decay).
    """
    signed, absolute_vals = bias_integrals(model, theta0, T, quad, cov_method)
    vec = absolute_vals if absolute else signed
    return float(np.linalg.norm(vec))
