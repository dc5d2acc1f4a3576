"""Fixed-basis operator algebra.

Every operator in this package lives on a truncated orthonormal basis
``phi_1 .. phi_L``.  Model operators (long-memory operator, short-memory
symbol, weights, normalizers) are simultaneously diagonal in that basis and
are represented by :class:`DiagonalOperator`; empirical operators such as the
periodogram are dense Hermitian matrices (:class:`HermitianFrame`).

Frequency integrals are Riemann/quadrature sums over a :class:`FrequencyGrid`.
The origin is never a node: the long-memory symbols are singular there.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ValidationError

HERMITIAN_ATOL = 1e-12


@dataclass(frozen=True)
class BasisSpec:
    """Truncation level (and optional labels) of the orthonormal basis."""

    L: int
    labels: Optional[tuple] = None

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 1:
            raise ValidationError(f"basis size L must be a positive integer, got {self.L!r}")
        object.__setattr__(self, "L", int(self.L))
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != self.L:
                raise ValidationError(f"expected {self.L} labels, got {len(labels)}")
            object.__setattr__(self, "labels", labels)

    def indices(self):
        """1-based component indices ``1..L``."""
        return np.arange(1, self.L + 1)


def _same_basis(a: BasisSpec, b: BasisSpec):
    if a.L != b.L:
        raise ValidationError(f"basis mismatch: L={a.L} vs L={b.L}")


@dataclass(frozen=True)
class DiagonalOperator:
    """Operator ``sum_l values[l] phi_l (x) phi_l``.

    With ``positive=True`` every value must be strictly positive.
    """

    basis: BasisSpec
    values: np.ndarray
    positive: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).copy()
        if values.shape != (self.basis.L,):
            raise ValidationError(f"diagonal values must have shape ({self.basis.L},), got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValidationError("diagonal values must be finite")
        if self.positive and np.any(values <= 0):
            raise ValidationError("positive DiagonalOperator has nonpositive values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def to_frame(self) -> "HermitianFrame":
        return HermitianFrame(self.basis, np.diag(self.values).astype(complex))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "value"])
            for l, v in enumerate(self.values, start=1):
                writer.writerow([l, repr(float(v))])

    @classmethod
    def from_csv(cls, path, positive=False):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        rows.sort(key=lambda r: int(r["index"]))
        values = [float(r["value"]) for r in rows]
        return cls(BasisSpec(len(values)), np.array(values), positive=positive)


@dataclass(frozen=True)
class HermitianFrame:
    """Dense ``L x L`` complex Hermitian matrix at a single frequency."""

    basis: BasisSpec
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        L = self.basis.L
        if entries.shape != (L, L):
            raise ValidationError(f"frame entries must have shape ({L}, {L}), got {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise ValidationError("frame entries must be finite")
        dev = np.max(np.abs(entries - entries.conj().T))
        if dev > HERMITIAN_ATOL:
            raise ValidationError(f"frame is not Hermitian (max deviation {dev:.3e})")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def identity(cls, basis: BasisSpec):
        return cls(basis, np.eye(basis.L, dtype=complex))

    @classmethod
    def zeros(cls, basis: BasisSpec):
        return cls(basis, np.zeros((basis.L, basis.L), dtype=complex))

    def diagonal(self):
        return self.entries.diagonal().real.copy()

    def eigvalsh(self):
        return np.linalg.eigvalsh(self.entries)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["row", "col", "re", "im"])
            for i in range(self.basis.L):
                for j in range(self.basis.L):
                    z = self.entries[i, j]
                    writer.writerow([i + 1, j + 1, repr(float(z.real)), repr(float(z.imag))])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        L = max(int(r["row"]) for r in rows)
        entries = np.zeros((L, L), dtype=complex)
        for r in rows:
            entries[int(r["row"]) - 1, int(r["col"]) - 1] = complex(float(r["re"]), float(r["im"]))
        return cls(BasisSpec(L), entries)


@dataclass(frozen=True)
class FrequencyGrid:
    """Frequency nodes with positive quadrature weights.

    ``kind`` is ``"fourier"`` (nodes ``2 pi j / T``, ``j = 1..T-1``, uniform
    weights ``2 pi / T``) or ``"quadrature"`` (composite Gauss-Legendre,
    symmetric about zero with a hole ``(-omega_min, omega_min)``).
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    T: Optional[int] = None
    omega_min: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValidationError("nodes and weights must be matching 1-d arrays")
        if np.any(weights <= 0):
            raise ValidationError("quadrature weights must be positive")
        if np.any(nodes == 0.0):
            raise ValidationError("omega = 0 may not be a grid node")
        if self.kind not in ("fourier", "quadrature"):
            raise ValidationError(f"unknown grid kind {self.kind!r}")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return len(self.nodes)

    def integrate(self, values, axis=0):
        """Quadrature sum of ``values`` sampled at the nodes along ``axis``."""
        values = np.asarray(values)
        return np.tensordot(self.weights, values, axes=([0], [axis]))

    def wrapped(self):
        """Nodes mapped into ``(-pi, pi]`` by 2 pi periodicity."""
        return np.where(self.nodes > np.pi, self.nodes - 2 * np.pi, self.nodes)


def fourier_grid(T: int) -> FrequencyGrid:
    """Fourier frequencies ``2 pi j / T`` for ``j = 1..T-1`` (zero excluded)."""
    if T < 2:
        raise ValidationError("fourier grid needs T >= 2")
    j = np.arange(1, T)
    return FrequencyGrid(2 * np.pi * j / T, np.full(T - 1, 2 * np.pi / T), "fourier", T=T)


def quadrature_grid(omega_min=1e-6, ratio=2.0, nodes_per_panel=32, max_width=np.pi / 8,
                    upper=np.pi) -> FrequencyGrid:
    """Symmetric composite Gauss-Legendre grid on ``[-upper, -omega_min] U [omega_min, upper]``.

    Panels grow geometrically by ``ratio`` from ``omega_min`` until their width
    would exceed ``max_width``; the remainder is cut into equal panels no wider
    than ``max_width``.  Set ``max_width <= pi / (4 t)`` to resolve
    ``exp(i omega t)``.
    """
    if not 0 < omega_min < upper:
        raise ValidationError("need 0 < omega_min < upper")
    if ratio <= 1:
        raise ValidationError("panel ratio must exceed 1")
    edges = [float(omega_min)]
    while True:
        nxt = edges[-1] * ratio
        if nxt - edges[-1] > max_width or nxt >= upper:
            break
        edges.append(nxt)
    rest = upper - edges[-1]
    n_uniform = max(1, math.ceil(rest / max_width - 1e-12))
    edges.extend(edges[-1] + rest * np.arange(1, n_uniform + 1) / n_uniform)
    edges = np.array(edges)
    edges[-1] = upper

    x, w = leggauss(int(nodes_per_panel))
    a, b = edges[:-1, None], edges[1:, None]
    pos_nodes = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    pos_weights = (0.5 * (b - a) * w).ravel()
    nodes = np.concatenate([-pos_nodes[::-1], pos_nodes])
    weights = np.concatenate([pos_weights[::-1], pos_weights])
    meta = dict(omega_min=float(omega_min), ratio=float(ratio), nodes_per_panel=int(nodes_per_panel),
                max_width=float(max_width), upper=float(upper), panels=len(edges) - 1)
    return FrequencyGrid(nodes, weights, "quadrature", omega_min=float(omega_min), meta=meta)


def trace_norm(f: HermitianFrame) -> float:
    """Nuclear norm: the sum of singular values (absolute eigenvalues)."""
    return float(np.sum(np.abs(f.eigvalsh())))


def hs_norm(f: HermitianFrame) -> float:
    """Hilbert-Schmidt (Frobenius) norm."""
    return float(np.sqrt(np.sum(np.abs(f.entries) ** 2)))


def op_norm(f: HermitianFrame) -> float:
    """Uniform operator norm, the largest absolute eigenvalue."""
    return float(np.max(np.abs(f.eigvalsh())))


def op_norm_diag(d: DiagonalOperator) -> float:
    return float(np.max(np.abs(d.values)))


def compose(f: HermitianFrame, d: DiagonalOperator) -> np.ndarray:
    """Matrix product ``f @ diag(d)``.

    The product of a Hermitian and a diagonal matrix is generally not
    Hermitian, so a plain complex array is returned; downstream code only
    consumes its diagonal.
    """
    _same_basis(f.basis, d.basis)
    return f.entries * d.values[None, :]


def integrate_frames(frames: Sequence[HermitianFrame], grid: FrequencyGrid) -> HermitianFrame:
    """Quadrature sum ``sum_j weights[j] * frames[j]``."""
    if len(frames) != len(grid):
        raise ValidationError(f"{len(frames)} frames for a grid of {len(grid)} nodes")
    if not frames:
        raise ValidationError("no frames to integrate")
    basis = frames[0].basis
    stack = np.stack([fr.entries for fr in frames])
    return HermitianFrame(basis, grid.integrate(stack))
