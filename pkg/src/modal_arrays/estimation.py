"""Mode estimators for uniform, sparse and co-prime arrays.

All three share the same core: IQML on a uniformly sampled (sub)array gives a
prediction polynomial whose roots are decimated modes z^factor. Sparse arrays
unwrap the factor-d aliases with the resolver polynomial fitted to the extra
sensor; co-prime arrays intersect the alias orbits of their two subarrays.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DegenerateModesError, InvalidParameterError, PreconditionError, SingularSystemError
from .geometry import GeometryKind
from .model import ModeSet, SnapshotMatrix, int_power, residual_energy
from .polynomial import MonicPolynomial, resolver_coefficients, roots
from .subspace import ortho_ula

COND_LIMIT = 1e12


@dataclass(frozen=True)
class IqmlOptions:
    max_iters: int = 20
    tol: float = 1e-8
    ridge: float = 0.0

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidParameterError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.tol > 0:
            raise InvalidParameterError(f"tol must be > 0, got {self.tol}")
        if not self.ridge >= 0:
            raise InvalidParameterError(f"ridge must be >= 0, got {self.ridge}")


@dataclass(frozen=True)
class IqmlResult:
    poly: MonicPolynomial
    iterations: int
    converged: bool
    regularized: bool = False


@dataclass(frozen=True)
class CandidateSet:
    """All factor^p alias tuples of the principal roots of ``base_roots``.

    ``orbits[k]`` lists the factor rotations of mode k; ``tuples`` is their
    Cartesian product, shape (factor**p, p).
    """

    base_roots: np.ndarray
    factor: int
    principal: np.ndarray
    orbits: np.ndarray
    tuples: np.ndarray

    @property
    def p(self) -> int:
        return self.base_roots.size

    def __len__(self):
        return self.tuples.shape[0]


@dataclass
class Diagnostics:
    iterations: list[int] = field(default_factory=list)
    residual_energy: float = 0.0
    candidate_sizes: list[int] = field(default_factory=list)
    intersection_distance: float = 0.0
    regularized: bool = False
    objective: float = 0.0


@dataclass(frozen=True)
class ModeEstimate:
    modes: ModeSet
    diagnostics: Diagnostics


def hankel_stack(y, p: int) -> np.ndarray:
    """(q - p) x (p + 1) Hankel matrix, row r = [y_r, ..., y_{r+p}]."""
    y = np.asarray(y, dtype=complex).ravel()
    if y.size <= p:
        raise PreconditionError(f"need more than p={p} samples, got {y.size}")
    return np.lib.stride_tricks.sliding_window_view(y, p + 1).copy()


def _as_matrix(Ys) -> np.ndarray:
    """Snapshots as columns of a q x N array."""
    if isinstance(Ys, SnapshotMatrix):
        return Ys.data
    if isinstance(Ys, np.ndarray):
        return Ys.astype(complex)[:, None] if Ys.ndim == 1 else Ys.astype(complex)
    cols = [np.asarray(y, dtype=complex).ravel() for y in Ys]
    if len({c.size for c in cols}) != 1:
        raise PreconditionError("all snapshots must have the same length")
    return np.column_stack(cols)


def _check_length(data, p):
    if p < 1:
        raise PreconditionError(f"p must be >= 1, got {p}")
    if data.shape[0] <= 2 * p:
        raise PreconditionError(
            f"need more than 2p={2 * p} samples per snapshot, got {data.shape[0]}"
        )


def _hankel_tensor(data, p):
    """(q - p) x N x (p + 1) array; [:, n, :] is the Hankel matrix of snapshot n."""
    return np.lib.stride_tricks.sliding_window_view(data, p + 1, axis=0)


def _fixed_tail_lstsq(H: np.ndarray, ridge: float = 0.0):
    """min ||H [alpha; 1]|| over alpha; returns ([a_1 .. a_p], regularized flag)."""
    G, g = H[:, :-1], H[:, -1]
    p = G.shape[1]
    regularized = False
    if not np.any(G):
        raise SingularSystemError("data matrix is identically zero")
    if ridge > 0:
        s = np.linalg.svd(G, compute_uv=False)
        if (s[0] / max(s[-1], np.finfo(float).tiny)) ** 2 > COND_LIMIT:
            G = np.vstack([G, np.sqrt(ridge) * np.eye(p)])
            g = np.concatenate([g, np.zeros(p)])
            regularized = True
    alpha, _, rank, _ = scipy.linalg.lstsq(G, -g)
    if rank < p and not regularized:
        raise SingularSystemError("prediction system is rank deficient")
    return alpha[::-1], regularized


def linear_prediction(Ys, p: int) -> MonicPolynomial:
    """Modified least squares: minimize sum_n ||Y~[n] a~||^2 with the last entry of a~ fixed to 1."""
    data = _as_matrix(Ys)
    _check_length(data, p)
    H = _hankel_tensor(data, p).transpose(1, 0, 2).reshape(-1, p + 1)
    tail, _ = _fixed_tail_lstsq(H)
    return MonicPolynomial(tail)


def _whitened_stack(data, poly, p, ridge):
    """Stack L^-1 Y~[n] over snapshots, L the Cholesky factor of A^H A for the current A."""
    q, N = data.shape
    A = ortho_ula(poly, q).matrix
    gram = A.conj().T @ A
    regularized = False
    try:
        L = scipy.linalg.cholesky(gram, lower=True)
    except np.linalg.LinAlgError:
        if ridge <= 0:
            raise SingularSystemError("A^H A is numerically singular") from None
        L = scipy.linalg.cholesky(gram + ridge * np.eye(gram.shape[0]), lower=True)
        regularized = True
    H = _hankel_tensor(data, p).reshape(q - p, N * (p + 1))
    W = scipy.linalg.solve_triangular(L, H, lower=True).reshape(q - p, N, p + 1)
    return W.transpose(1, 0, 2).reshape(-1, p + 1), regularized


def iqml(Ys, p: int, opts: IqmlOptions | None = None) -> IqmlResult:
    """Iterative quadratic ML, started from the linear prediction solution.

    Iteration l minimizes a~^H [sum_n Y~^H (A^H A)^-1 Y~] a~ with A built from
    the previous iterate.
    """
    opts = opts or IqmlOptions()
    data = _as_matrix(Ys)
    _check_length(data, p)
    poly = linear_prediction(data, p)
    regularized = False
    for it in range(2, opts.max_iters + 1):
        H, reg = _whitened_stack(data, poly, p, opts.ridge)
        tail, reg2 = _fixed_tail_lstsq(H, opts.ridge)
        regularized |= reg or reg2
        step = np.linalg.norm(tail - poly.tail)
        poly = MonicPolynomial(tail)
        if step <= opts.tol:
            return IqmlResult(poly, it, True, regularized)
    return IqmlResult(poly, opts.max_iters, opts.max_iters == 1, regularized)


def principal_root(w, factor: int) -> np.ndarray:
    """|w|^(1/factor) * exp(j arg(w) / factor), arg in (-pi, pi]."""
    w = np.asarray(w, dtype=complex)
    return np.abs(w) ** (1.0 / factor) * np.exp(1j * np.angle(w) / factor)


def candidate_set(base_roots, factor: int) -> CandidateSet:
    w = np.atleast_1d(np.asarray(base_roots, dtype=complex))
    if factor < 1:
        raise InvalidParameterError(f"factor must be >= 1, got {factor}")
    if np.any(w == 0):
        raise InvalidParameterError("cannot unwrap a zero root")
    z0 = principal_root(w, factor)
    rot = np.exp(2j * np.pi * np.arange(factor) / factor)
    orbits = z0[:, None] * rot[None, :]
    tuples = np.array(list(itertools.product(*orbits)), dtype=complex).reshape(-1, w.size)
    return CandidateSet(w, factor, z0, orbits, tuples)


def resolve_sparse(lattice, extra, R: CandidateSet, M: int, d: int):
    """Pick the alias tuple whose resolver polynomial best predicts the extra sensor.

    ``lattice`` holds the uniform-sublattice samples (rows at 0, d, 2d, ...; only
    the first p are used) and ``extra`` the samples at location M. For each
    candidate eta, zeta solves V_p^T zeta = -eta^M and the score is
    J = sum_n |y_M[n] + zeta^T u[n]|^2. Returns (b, modes, J_min, J_all) with
    b = [b_1, ..., b_p].
    """
    p = R.p
    if R.factor != d:
        raise InvalidParameterError(f"candidate set unwraps factor {R.factor}, array has d={d}")
    lattice = np.asarray(lattice, dtype=complex)
    if lattice.ndim == 1:
        lattice = lattice[:, None]
    extra = np.asarray(extra, dtype=complex).reshape(-1)
    if lattice.shape[0] < p:
        raise PreconditionError(f"need at least p={p} lattice samples")
    u = lattice[:p]
    # the system matrix only sees eta^d, shared across the whole candidate set
    zetas = resolver_coefficients(R.base_roots, int_power(R.tuples, M))
    scores = np.sum(np.abs(extra[None, :] + zetas @ u) ** 2, axis=1)
    best = int(np.argmin(scores))
    return zetas[best][::-1], R.tuples[best], float(scores[best]), scores


def _subarray_residual(data, poly):
    return residual_energy(data, ortho_ula(poly, data.shape[0]))


def _require(Y: SnapshotMatrix, kind: GeometryKind):
    if Y.geometry.kind is not kind:
        raise PreconditionError(f"expected a {kind.value} geometry, got {Y.geometry.kind.value}")


def estimate_ula(Y: SnapshotMatrix, p: int, opts: IqmlOptions | None = None) -> ModeEstimate:
    _require(Y, GeometryKind.UNIFORM)
    if Y.geometry.m <= 2 * p:
        raise PreconditionError(f"ULA needs m > 2p, got m={Y.geometry.m}, p={p}")
    res = iqml(Y.data, p, opts)
    diag = Diagnostics(
        iterations=[res.iterations],
        residual_energy=_subarray_residual(Y.data, res.poly),
        regularized=res.regularized,
    )
    return ModeEstimate(ModeSet(roots(res.poly)), diag)


def estimate_sparse(Y: SnapshotMatrix, p: int, opts: IqmlOptions | None = None) -> ModeEstimate:
    _require(Y, GeometryKind.SPARSE)
    g = Y.geometry
    d, M = g.params["d"], g.params["M"]
    lattice = Y.subarray("lattice")
    if lattice.shape[0] <= 2 * p:
        raise PreconditionError(
            f"sparse array needs more than 2p={2 * p} lattice sensors, has {lattice.shape[0]}"
        )
    res = iqml(lattice, p, opts)
    w = roots(res.poly)
    if np.min(_pairwise(w)) == 0:
        raise DegenerateModesError("estimated decimated modes coincide")
    R = candidate_set(w, d)
    b, modes, score, _ = resolve_sparse(lattice, Y.subarray("extra")[0], R, M, d)
    diag = Diagnostics(
        iterations=[res.iterations],
        residual_energy=_subarray_residual(lattice, res.poly),
        candidate_sizes=[len(R)],
        regularized=res.regularized,
        objective=score,
    )
    return ModeEstimate(ModeSet(modes), diag)


def _pairwise(x):
    x = np.asarray(x)
    if x.size < 2:
        return np.array([np.inf])
    gaps = np.abs(x[:, None] - x[None, :])
    return gaps[~np.eye(x.size, dtype=bool)]


def fusion_weight(m1: int, m2: int) -> float:
    """Weight of the second-subarray candidate when fusing a co-prime pair.

    Inverse-variance weighting with the single-tone phase CRB of each
    subarray: a K-element ULA with spacing s estimates the mode phase with
    variance proportional to 1 / (s^2 K (K^2 - 1)).
    """
    k1, k2 = m1, 2 * m2 - 1
    info1 = m2**2 * k1 * (k1**2 - 1)
    info2 = m1**2 * k2 * (k2**2 - 1)
    if info1 + info2 == 0:
        return 0.5
    return info2 / (info1 + info2)


def intersect_candidates(R1: CandidateSet, R2: CandidateSet, p: int | None = None,
                         weight2: float = 0.5):
    """Greedy one-to-one matching of alias orbits by closest member pair.

    For every (orbit of R1, orbit of R2) pair the closest pair of members is
    found; pairs are accepted by ascending distance, each orbit used once. The
    fused mode is (1 - weight2) * c1 + weight2 * c2, the midpoint by default;
    the returned distance is the largest accepted pair distance.
    """
    p = R1.p if p is None else p
    if R1.p != p or R2.p != p:
        raise InvalidParameterError(f"orbit-count mismatch: {R1.p} vs {R2.p} for p={p}")
    # dist[k, j, a, b] = |orbit1[k, a] - orbit2[j, b]|
    dist = np.abs(R1.orbits[:, None, :, None] - R2.orbits[None, :, None, :])
    flat = dist.reshape(p, p, -1)
    best = flat.argmin(axis=2)
    pair_dist = np.take_along_axis(flat, best[..., None], axis=2)[..., 0]
    used1, used2 = set(), set()
    modes = np.empty(p, dtype=complex)
    worst = 0.0
    order = np.argsort(pair_dist, axis=None, kind="stable")
    for idx in order:
        k, j = np.unravel_index(idx, (p, p))
        if k in used1 or j in used2:
            continue
        a, b_ = np.unravel_index(best[k, j], (R1.factor, R2.factor))
        c1, c2 = R1.orbits[k, a], R2.orbits[j, b_]
        modes[k] = (1.0 - weight2) * c1 + weight2 * c2
        worst = max(worst, float(pair_dist[k, j]))
        used1.add(k)
        used2.add(j)
        if len(used1) == p:
            break
    return ModeSet(modes), worst


def estimate_coprime(Y: SnapshotMatrix, p: int, opts: IqmlOptions | None = None,
                     fusion: str = "aperture") -> ModeEstimate:
    """Co-prime estimator. ``fusion`` is "aperture" (see :func:`fusion_weight`) or "midpoint"."""
    _require(Y, GeometryKind.COPRIME)
    m1, m2 = Y.geometry.params["m1"], Y.geometry.params["m2"]
    if m1 <= 2 * p or 2 * m2 - 1 <= 2 * p:
        raise PreconditionError(
            f"co-prime subarrays of {m1} and {2 * m2 - 1} sensors need more than 2p={2 * p}"
        )
    u, v = Y.subarray("first"), Y.subarray("second")
    res_a = iqml(u, p, opts)
    res_b = iqml(v, p, opts)
    R1 = candidate_set(roots(res_a.poly), m2)
    R2 = candidate_set(roots(res_b.poly), m1)
    if fusion == "aperture":
        weight2 = fusion_weight(m1, m2)
    elif fusion == "midpoint":
        weight2 = 0.5
    else:
        raise InvalidParameterError(f"unknown fusion rule {fusion!r}")
    modes, dist = intersect_candidates(R1, R2, p, weight2)
    diag = Diagnostics(
        iterations=[res_a.iterations, res_b.iterations],
        residual_energy=_subarray_residual(u, res_a.poly) + _subarray_residual(v, res_b.poly),
        candidate_sizes=[len(R1), len(R2)],
        intersection_distance=dist,
        regularized=res_a.regularized or res_b.regularized,
    )
    return ModeEstimate(modes, diag)


ESTIMATORS = {
    GeometryKind.UNIFORM: estimate_ula,
    GeometryKind.SPARSE: estimate_sparse,
    GeometryKind.COPRIME: estimate_coprime,
}


def estimate(Y: SnapshotMatrix, p: int, opts: IqmlOptions | None = None) -> ModeEstimate:
    """Dispatch on the geometry kind."""
    return ESTIMATORS[Y.geometry.kind](Y, p, opts)
