"""Measurement model y[n] = V(z, I) x[n] + e[n] and its least squares algebra."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, ShapeError, SingularSystemError
from .geometry import ArrayGeometry

# relative threshold on |R_ii| / |R_00| below which a QR factor is treated as singular
_RANK_TOL = 1e-13


@dataclass(frozen=True)
class ModeSet:
    """p distinct complex modes z_k = rho_k * exp(j theta_k)."""

    modes: np.ndarray

    def __post_init__(self):
        z = np.atleast_1d(np.asarray(self.modes, dtype=complex))
        if z.ndim != 1 or z.size == 0:
            raise InvalidParameterError("a mode set needs at least one mode")
        if not np.all(np.isfinite(z)):
            raise InvalidParameterError("modes must be finite")
        if np.any(np.abs(z[:, None] - z[None, :])[~np.eye(z.size, dtype=bool)] == 0):
            raise InvalidParameterError("modes must be pairwise distinct")
        z.setflags(write=False)
        object.__setattr__(self, "modes", z)

    @classmethod
    def polar(cls, magnitudes, phases) -> "ModeSet":
        return cls(np.asarray(magnitudes) * np.exp(1j * np.asarray(phases)))

    @property
    def p(self) -> int:
        return self.modes.size

    def __len__(self):
        return self.p

    def __iter__(self):
        return iter(self.modes)

    def min_power_separation(self, factor: int) -> float:
        """Smallest |z_i^factor - z_j^factor| over i != j (inf for one mode)."""
        if self.p < 2:
            return float("inf")
        w = int_power(self.modes, factor)
        gaps = np.abs(w[:, None] - w[None, :])
        return float(gaps[~np.eye(self.p, dtype=bool)].min())

    def is_resolvable(self, *factors: int, tol: float = 0.0) -> bool:
        """True when the modes stay distinct after raising to every factor."""
        return all(self.min_power_separation(f) > tol for f in factors)


REFERENCE_MODES = ModeSet.polar([1.0, 0.95], [0.52, 0.69])


@dataclass(frozen=True)
class NoiseModel:
    sigma2: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.sigma2 >= 0:
            raise InvalidParameterError(f"sigma2 must be >= 0, got {self.sigma2}")


@dataclass(frozen=True)
class SnapshotMatrix:
    """Complex m x N data, rows in the geometry's (sorted) location order."""

    data: np.ndarray
    geometry: ArrayGeometry

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2 or data.shape[0] != self.geometry.m:
            raise ShapeError(
                f"data has shape {data.shape}, geometry has {self.geometry.m} sensors"
            )
        object.__setattr__(self, "data", data)

    @property
    def n_snapshots(self) -> int:
        return self.data.shape[1]

    def subarray(self, name: str) -> np.ndarray:
        return self.data[self.geometry.rows(name)]


def int_power(z, exponents):
    """z ** exponents for non-negative integer exponents, by repeated squaring.

    Broadcasts like ``z ** exponents``.
    """
    z = np.asarray(z, dtype=complex)
    e = np.asarray(exponents, dtype=np.int64)
    if np.any(e < 0):
        raise InvalidParameterError("exponents must be non-negative")
    z, e = np.broadcast_arrays(z, e)
    result = np.ones(z.shape, dtype=complex)
    base = z.copy()
    e = e.copy()
    while np.any(e):
        odd = (e & 1).astype(bool)
        result[odd] *= base[odd]
        e >>= 1
        base = base * base
    return result


def vandermonde(modes, geometry_or_locations) -> np.ndarray:
    """Generalized Vandermonde matrix, entry (l, k) = z_k ** i_l."""
    z = modes.modes if isinstance(modes, ModeSet) else np.atleast_1d(np.asarray(modes, complex))
    if isinstance(geometry_or_locations, ArrayGeometry):
        locs = geometry_or_locations.locations_array()
    else:
        locs = np.asarray(geometry_or_locations, dtype=np.int64)
    return int_power(z[None, :], locs[:, None])


def complex_normal(rng: np.random.Generator, shape, sigma2: float) -> np.ndarray:
    """Proper complex normal samples with E|e|^2 = sigma2."""
    scale = np.sqrt(sigma2 / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def synthesize(modes, weights, geometry: ArrayGeometry, noise: NoiseModel) -> SnapshotMatrix:
    V = vandermonde(modes, geometry)
    X = np.asarray(weights, dtype=complex)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != V.shape[1]:
        raise ShapeError(f"weights have {X.shape[0]} rows, expected p={V.shape[1]}")
    data = V @ X
    if noise.sigma2 > 0:
        rng = np.random.default_rng(noise.seed)
        data = data + complex_normal(rng, data.shape, noise.sigma2)
    return SnapshotMatrix(data, geometry)


def _qr_full_rank(M, what):
    Q, R = np.linalg.qr(M)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag.min() <= _RANK_TOL * max(diag.max(), np.finfo(float).tiny):
        raise SingularSystemError(f"{what} is rank deficient")
    return Q, R


def ls_weights(V, y) -> np.ndarray:
    """Least squares mode weights V^+ y, computed through a QR factorization.

    ``y`` may be a vector or an m x N matrix of snapshots.
    """
    V = np.asarray(V, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if y.shape[0] != V.shape[0]:
        raise ShapeError(f"y has {y.shape[0]} rows, V has {V.shape[0]}")
    Q, R = _qr_full_rank(V, "Vandermonde matrix")
    return np.linalg.solve(R, Q.conj().T @ y)


def residual_energy(Y, A) -> float:
    """sum_n y[n]^H P_A y[n] for the column span of ``A``."""
    data = Y.data if isinstance(Y, SnapshotMatrix) else np.asarray(Y, dtype=complex)
    A = getattr(A, "matrix", A)
    A = np.asarray(A, dtype=complex)
    if data.ndim == 1:
        data = data[:, None]
    if A.shape[0] != data.shape[0]:
        raise ShapeError(f"A has {A.shape[0]} rows, data has {data.shape[0]}")
    Q, _ = _qr_full_rank(A, "orthogonal basis")
    return float(np.sum(np.abs(Q.conj().T @ data) ** 2))


def projector(M) -> np.ndarray:
    """Orthogonal projector onto the column span of a full column rank M."""
    Q, _ = _qr_full_rank(np.asarray(M, dtype=complex), "matrix")
    return Q @ Q.conj().T


def random_modes(rng: np.random.Generator, p: int, factors=(1,), min_sep=0.05,
                 radius=(0.7, 1.05), max_tries=10_000) -> ModeSet:
    """Random modes whose powers z^f stay at least ``min_sep`` apart for every f in ``factors``."""
    for _ in range(max_tries):
        z = rng.uniform(*radius, size=p) * np.exp(1j * rng.uniform(-np.pi, np.pi, size=p))
        if p == 1:
            return ModeSet(z)
        modes = ModeSet(z)
        if all(modes.min_power_separation(f) >= min_sep for f in (1, *factors)):
            return modes
    raise InvalidParameterError(f"could not draw {p} admissible modes")
