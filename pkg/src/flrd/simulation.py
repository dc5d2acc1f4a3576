"""Gaussian simulation of diagonal LRD functional sequences in basis coordinates.

Components are independent stationary Gaussian series.  Two generators:
circulant embedding (exact second-order law when the embedding is
nonnegative definite) and a truncated MA(infinity) filter for FARIMA models.
Random streams are Philox (counter-based) keyed by ``(seed, component)`` so
output does not depend on the order in which components are generated.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import fftconvolve

from .errors import EmbeddingError, ValidationError
from .models import FarimaRational, SpectralModel, autocovariances, ma_coefficients, validate_assumptions
from .operators import BasisSpec, HermitianFrame

NEGATIVE_MASS_TOL = 1e-6


@dataclass(frozen=True)
class SimConfig:
    method: str = "circulant"
    seed: int = 0
    J: int = 4096
    embed_factor: int = 8

    def __post_init__(self):
        if self.method not in ("circulant", "ma_truncation"):
            raise ValidationError(f"unknown simulation method {self.method!r}")
        if self.method == "ma_truncation" and self.J < 64:
            raise ValidationError("MA truncation length J must be >= 64")
        if self.method == "circulant" and (int(self.embed_factor) != self.embed_factor or self.embed_factor < 2):
            raise ValidationError("embed_factor must be an integer >= 2")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer")


@dataclass
class SamplePath:
    """``T x L`` array of basis coefficients ``<X_t, phi_l>``, ``t = 1..T``."""

    basis: BasisSpec
    coeffs: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.ndim != 2 or self.coeffs.shape[1] != self.basis.L:
            raise ValidationError(f"coeffs must have shape (T, {self.basis.L})")
        if self.coeffs.shape[0] < 2:
            raise ValidationError("a sample path needs T >= 2")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValidationError("sample path has non-finite entries")

    @property
    def T(self):
        return self.coeffs.shape[0]

    # serialisation ---------------------------------------------------------
    def save(self, stem, fmt="csv"):
        """Write ``<stem>.csv`` (or ``.jsonl``) plus a ``<stem>.json`` sidecar."""
        stem = Path(stem)
        T, L = self.coeffs.shape
        if fmt == "csv":
            data_path = stem.with_suffix(".csv")
            with open(data_path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["t", "l", "value"])
                for t in range(T):
                    for l in range(L):
                        w.writerow([t + 1, l + 1, repr(float(self.coeffs[t, l]))])
        elif fmt == "jsonl":
            data_path = stem.with_suffix(".jsonl")
            with open(data_path, "w") as fh:
                for t in range(T):
                    for l in range(L):
                        fh.write(json.dumps({"t": t + 1, "l": l + 1, "value": float(self.coeffs[t, l])}) + "\n")
        else:
            raise ValidationError(f"unknown format {fmt!r}")
        sidecar = stem.with_suffix(".json")
        with open(sidecar, "w") as fh:
            json.dump({"T": T, "L": L, "format": fmt, **_jsonable(self.meta)}, fh, indent=2, sort_keys=True)
        return data_path, sidecar

    @classmethod
    def load(cls, stem):
        stem = Path(stem)
        with open(stem.with_suffix(".json")) as fh:
            meta = json.load(fh)
        T, L, fmt = meta.pop("T"), meta.pop("L"), meta.pop("format")
        coeffs = np.empty((T, L))
        if fmt == "csv":
            with open(stem.with_suffix(".csv"), newline="") as fh:
                for row in csv.DictReader(fh):
                    coeffs[int(row["t"]) - 1, int(row["l"]) - 1] = float(row["value"])
        else:
            with open(stem.with_suffix(".jsonl")) as fh:
                for line in fh:
                    row = json.loads(line)
                    coeffs[row["t"] - 1, row["l"] - 1] = row["value"]
        return cls(BasisSpec(L), coeffs, meta)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def component_rng(seed: int, component: int) -> np.random.Generator:
    """Independent Philox stream for one basis component."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(component),))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, index: int) -> int:
    """Deterministic 64-bit child seed (e.g. per Monte Carlo replicate)."""
    state = np.random.SeedSequence(int(seed), spawn_key=(int(index),)).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


def circulant_eigenvalues(acov: np.ndarray):
    """Eigenvalues of the minimal circulant embedding of ``r_0..r_m`` (length ``2m``)."""
    row = np.concatenate([acov, acov[-2:0:-1]])
    lam = np.fft.fft(row).real
    neg = -lam[lam < 0].sum()
    total = np.abs(lam).sum()
    return lam, (neg / total if total > 0 else 0.0)


def simulate_gaussian(model: SpectralModel, theta0, T: int, cfg: SimConfig = SimConfig(),
                      validate: bool = True) -> SamplePath:
    """Simulate ``T`` observations of every component (method from ``cfg``)."""
    if cfg.method == "ma_truncation":
        return simulate_ma(model, theta0, T, cfg, validate=validate)
    if T < 2:
        raise ValidationError("T must be >= 2")
    if validate:
        validate_assumptions(model)
    theta0 = model.check_theta(theta0)
    m = int(cfg.embed_factor) * int(T)
    acov = autocovariances(model, theta0, m)
    out = np.empty((T, model.L))
    for i in range(model.L):
        lam, neg_frac = circulant_eigenvalues(acov[:, i])
        if neg_frac >= NEGATIVE_MASS_TOL:
            raise EmbeddingError(
                f"circulant embedding of component {i + 1} has negative mass fraction {neg_frac:.3e}; "
                "increase embed_factor or use method='ma_truncation'")
        lam = np.clip(lam, 0.0, None)
        n = lam.size
        rng = component_rng(cfg.seed, i + 1)
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        out[:, i] = np.fft.fft(np.sqrt(lam / n) * z).real[:T]
    meta = dict(theta_true=theta0.tolist(), seed=int(cfg.seed), method="circulant",
                embed_factor=int(cfg.embed_factor))
    return SamplePath(model.basis, out, meta)


def simulate_ma(model: SpectralModel, theta0, T: int, cfg: SimConfig = SimConfig(method="ma_truncation"),
                validate: bool = True) -> SamplePath:
    """Truncated MA(J) filter of N(0, lambda_l) innovations; the first J outputs are burn-in."""
    if not isinstance(model.mshort, FarimaRational):
        raise ValidationError("MA-truncation simulation requires a FarimaRational model")
    if T < 2:
        raise ValidationError("T must be >= 2")
    if cfg.J < 64:
        raise ValidationError("MA truncation length J must be >= 64")
    if validate:
        validate_assumptions(model)
    theta0 = model.check_theta(theta0)
    J = int(cfg.J)
    out = np.empty((T, model.L))
    for i, l in enumerate(model.basis.indices()):
        b = ma_coefficients(model, l, theta0, J)
        rng = component_rng(cfg.seed, l)
        eta = rng.standard_normal(T + J) * np.sqrt(model.mshort.sigma_eigs[l - 1])
        out[:, i] = fftconvolve(eta, b, mode="valid")
    meta = dict(theta_true=theta0.tolist(), seed=int(cfg.seed), method="ma_truncation", J=J)
    return SamplePath(model.basis, out, meta)


def empirical_covariance(path: SamplePath, lag: int) -> np.ndarray:
    """``(1/T) sum_t X_{t+lag} (x) X_t`` over valid ``t`` as a real ``L x L`` array.

    Entry ``[i, j]`` pairs component ``i`` at time ``t + lag`` with component
    ``j`` at time ``t``.  Only lag 0 is guaranteed symmetric; see
    :func:`sample_covariance_frame`.
    """
    T = path.T
    lag = int(lag)
    if abs(lag) >= T:
        raise ValidationError(f"|lag| = {abs(lag)} must be < T = {T}")
    X = path.coeffs
    if lag >= 0:
        return X[lag:].T @ X[: T - lag] / T
    return X[: T + lag].T @ X[-lag:] / T


def sample_covariance_frame(path: SamplePath) -> HermitianFrame:
    """Lag-0 empirical covariance as a :class:`HermitianFrame`."""
    c = empirical_covariance(path, 0)
    return HermitianFrame(path.basis, 0.5 * (c + c.T))
