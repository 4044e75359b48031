"""Cramer-Rao bounds, beampatterns, mode matching and the Monte Carlo RMSE sweep."""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InvalidParameterError, ModalArraysError, ShapeError
from .estimation import estimate
from .geometry import ArrayGeometry
from .model import ModeSet, NoiseModel, SnapshotMatrix, complex_normal, int_power, vandermonde

THREADS_ENV = "MODAL_ARRAYS_THREADS"


@dataclass(frozen=True)
class CrbResult:
    per_mode_crb: np.ndarray
    fisher: np.ndarray
    degenerate: bool = False

    @property
    def crb_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 10 * np.log10(self.per_mode_crb)


def sensitivity_matrix(modes, geometry: ArrayGeometry) -> np.ndarray:
    """m x p matrix with entry (l, k) = i_l z_k^(i_l - 1); exactly 0 at i_l = 0."""
    z = _mode_array(modes)
    locs = geometry.locations_array()
    S = np.zeros((locs.size, z.size), dtype=complex)
    nz = locs > 0
    S[nz] = locs[nz, None] * int_power(z[None, :], locs[nz, None] - 1)
    return S


def _mode_array(modes):
    return modes.modes if isinstance(modes, ModeSet) else np.atleast_1d(np.asarray(modes, complex))


def _weights_matrix(weights, p):
    X = np.asarray(weights, dtype=complex)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != p:
        raise ShapeError(f"weights have {X.shape[0]} rows, expected p={p}")
    return X


def fisher_matrix(modes, weights, geometry: ArrayGeometry, sigma2: float) -> CrbResult:
    """Fisher information for the complex modes with known weights.

    J = (1/sigma2) sum_n G_n^H G_n where column l of G_n is the sensitivity
    vector scaled by x_l[n]; the per-mode CRB is diag(J^-1).
    """
    if not sigma2 > 0:
        raise InvalidParameterError(f"sigma2 must be > 0, got {sigma2}")
    z = _mode_array(modes)
    X = _weights_matrix(weights, z.size)
    S = sensitivity_matrix(z, geometry)
    # sum_n conj(x_k[n]) x_l[n] (s_k^H s_l)
    J = (S.conj().T @ S) * (X.conj() @ X.T) / sigma2
    J = 0.5 * (J + J.conj().T)
    try:
        inv = np.linalg.inv(J)
        degenerate = np.linalg.cond(J) > 1e15
    except np.linalg.LinAlgError:
        inv, degenerate = None, True
    if degenerate:
        crb = np.full(z.size, np.inf)
    else:
        crb = np.real(np.diag(inv))
    return CrbResult(crb, J, degenerate)


def signal_power(modes, weights, geometry: ArrayGeometry) -> float:
    """Average signal power per sensor per snapshot, (1/(mN)) sum_n ||V x[n]||^2."""
    V = vandermonde(modes, geometry)
    X = _weights_matrix(weights, V.shape[1])
    return float(np.mean(np.abs(V @ X) ** 2))


def sigma2_for_snr(modes, weights, geometry: ArrayGeometry, snr_db: float) -> float:
    return signal_power(modes, weights, geometry) / 10 ** (snr_db / 10)


def crb_surface(geometry: ArrayGeometry, snr_db=10.0, z1=1.0 + 0j, grid=100,
                magnitude=(0.8, 1.1), phase=(-0.3, 0.3)):
    """CRB of z1 over a magnitude x phase grid of interferer positions z2.

    Unit weights on both modes; sigma2 is set per grid point from the
    per-sensor SNR. Grid points where z2 == z1 are skipped (returned as inf).
    Returns (magnitudes, phases, crb) with crb of shape (grid, grid), rows
    indexed by magnitude.
    """
    mags = np.linspace(*magnitude, grid)
    phases = np.linspace(*phase, grid)
    out = np.full((grid, grid), np.inf)
    x = np.ones(2)
    for i, r in enumerate(mags):
        for j, t in enumerate(phases):
            z2 = r * np.exp(1j * t)
            if abs(z2 - z1) < 1e-12:
                continue
            modes = np.array([z1, z2])
            s2 = sigma2_for_snr(modes, x, geometry, snr_db)
            out[i, j] = fisher_matrix(modes, x, geometry, s2).per_mode_crb[0]
    return mags, phases, out


@dataclass(frozen=True)
class BeampatternCurve:
    theta_grid: np.ndarray
    values: np.ndarray
    magnitude_db: np.ndarray

    def zero_index(self) -> int:
        return int(np.argmin(np.abs(self.theta_grid)))


def theta_grid(n: int) -> np.ndarray:
    """n equispaced angles in (-pi, pi]; contains 0 when n is even."""
    return -np.pi + 2 * np.pi * np.arange(1, n + 1) / n


def beampattern(geometry: ArrayGeometry, grid) -> BeampatternCurve:
    theta = np.asarray(grid, dtype=float)
    if theta.size == 0:
        raise InvalidParameterError("theta grid is empty")
    locs = geometry.locations_array()
    values = np.exp(1j * np.outer(theta, locs)).sum(axis=1)
    mag = np.abs(values)
    with np.errstate(divide="ignore"):
        db = 20 * np.log10(mag / mag.max())
    return BeampatternCurve(theta, values, db)


def first_null(curve: BeampatternCurve) -> int:
    """Grid steps from theta = 0 to the first local minimum of |B| on the positive side."""
    mag = np.abs(curve.values)
    i0 = curve.zero_index()
    j = i0
    while j + 1 < mag.size and mag[j + 1] < mag[j]:
        j += 1
    return j - i0


def peak_sidelobe_db(curve: BeampatternCurve) -> float:
    """Largest level outside the main lobe (bounded by the first nulls)."""
    width = first_null(curve) * (curve.theta_grid[1] - curve.theta_grid[0])
    outside = np.abs(curve.theta_grid) > width + 1e-12
    return float(curve.magnitude_db[outside].max())


def match_modes(estimated, truth):
    """Permutation minimizing sum_k |est[perm[k]] - truth[k]|^2 and matched errors."""
    est, tru = _mode_array(estimated), _mode_array(truth)
    if est.size != tru.size:
        raise ShapeError(f"cardinality mismatch: {est.size} vs {tru.size}")
    cost = np.abs(est[None, :] - tru[:, None]) ** 2
    p = tru.size
    if p <= 6:
        best = min(itertools.permutations(range(p)), key=lambda perm: cost[range(p), perm].sum())
        perm = np.array(best)
    else:
        _, perm = linear_sum_assignment(cost)
    return perm, np.abs(est[perm] - tru)


# ---------------------------------------------------------------- Monte Carlo

SWEEP_COLUMNS = (
    "geometry", "snr_db", "trial_count", "mode_index", "true_re", "true_im",
    "rmse", "bias_re", "bias_im", "fail_count",
)


@dataclass(frozen=True)
class SweepRow:
    geometry: str
    snr_db: float
    trial_count: int
    mode_index: int
    true_re: float
    true_im: float
    rmse: float
    bias_re: float
    bias_im: float
    fail_count: int
    median_intersection: float = float("nan")

    def as_tuple(self):
        return tuple(getattr(self, c) for c in SWEEP_COLUMNS)


@dataclass
class TrialOutcome:
    estimate: np.ndarray | None
    intersection: float = float("nan")


def worker_count(default: int | None = None) -> int:
    """Worker threads from MODAL_ARRAYS_THREADS (0 or unset = auto)."""
    raw = os.environ.get(THREADS_ENV, "")
    n = int(raw) if raw.strip() else 0
    if n < 0:
        raise InvalidParameterError(f"{THREADS_ENV} must be >= 0, got {n}")
    if n == 0:
        n = default or min(8, os.cpu_count() or 1)
    return n


def trial_rng(master_seed: int, cell: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, cell, trial]))


def draw_weights(cfg, rng) -> np.ndarray:
    p, N = cfg.p, cfg.snapshots
    if cfg.weights_kind == "constant":
        return np.full((p, N), cfg.weights_scale, dtype=complex)
    return complex_normal(rng, (p, N), cfg.weights_scale)


def run_trial(cfg, geometry, modes, snr_db, cell, trial) -> TrialOutcome:
    rng = trial_rng(cfg.seed, cell, trial)
    X = draw_weights(cfg, rng)
    V = vandermonde(modes, geometry)
    clean = V @ X
    data = clean
    if np.isfinite(snr_db):
        sigma2 = float(np.mean(np.abs(clean) ** 2)) / 10 ** (snr_db / 10)
        data = clean + complex_normal(rng, clean.shape, sigma2)
    try:
        est = estimate(SnapshotMatrix(data, geometry), modes.size, cfg.iqml)
    except (ModalArraysError, np.linalg.LinAlgError):
        return TrialOutcome(None)
    perm, _ = match_modes(est.modes, modes)
    dist = est.diagnostics.intersection_distance if est.diagnostics.candidate_sizes[1:] else float("nan")
    return TrialOutcome(est.modes.modes[perm], dist)


def summarize_cell(label, snr_db, modes, outcomes) -> list[SweepRow]:
    good = [o.estimate for o in outcomes if o.estimate is not None]
    fails = len(outcomes) - len(good)
    inter = [o.intersection for o in outcomes if o.estimate is not None and np.isfinite(o.intersection)]
    median_inter = float(np.median(inter)) if inter else float("nan")
    rows = []
    for k, z in enumerate(modes):
        if good:
            err = np.array([g[k] for g in good]) - z
            rmse = float(np.sqrt(np.mean(np.abs(err) ** 2)))
            bias = complex(np.mean(err))
        else:
            rmse, bias = float("nan"), complex(float("nan"), float("nan"))
        rows.append(SweepRow(label, float(snr_db), len(outcomes), k, float(z.real), float(z.imag),
                             rmse, bias.real, bias.imag, fails, median_inter))
    return rows


def rmse_sweep(cfg, workers: int | None = None) -> list[SweepRow]:
    """Run every (SNR, trial) of ``cfg`` and summarize per SNR cell and mode.

    Each trial's random stream comes from (seed, cell index, trial index), so
    the result does not depend on the number of workers. An SNR of +inf gives
    noiseless data.
    """
    geometry = cfg.geometry()
    modes = cfg.mode_values
    workers = worker_count() if workers is None else workers
    jobs = [(cell, snr, t) for cell, snr in enumerate(cfg.snr_db) for t in range(cfg.trials)]

    def job(item):
        cell, snr, t = item
        return run_trial(cfg, geometry, modes, snr, cell, t)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(job, jobs))
    else:
        outcomes = [job(j) for j in jobs]
    rows = []
    for cell, snr in enumerate(cfg.snr_db):
        cell_out = outcomes[cell * cfg.trials:(cell + 1) * cfg.trials]
        rows.extend(summarize_cell(geometry.label, snr, modes, cell_out))
    return rows
