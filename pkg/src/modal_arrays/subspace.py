"""Explicit bases for the orthogonal subspace <A> = <V>^perp.

Every constructor returns an m x (m - p) matrix ``A`` with A^H V = 0. The
banded constructors write the rows of A^H directly from polynomial
coefficients and hand back the Hermitian transpose.

Sparse and co-prime bases are laid out in subarray order (lattice then extra
sensor; first subarray then second). ``OrthoBasis.row_locations`` records that
order, and :func:`align_rows` permutes a basis into a geometry's sorted order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidParameterError, PivotSelectionError, PreconditionError
from .geometry import ArrayGeometry
from .model import ModeSet, int_power
from .polynomial import MonicPolynomial, SparseResolverPolynomial, from_roots

PIVOT_COND_LIMIT = 1e12


@dataclass(frozen=True)
class OrthoBasis:
    matrix: np.ndarray
    structure: str
    row_locations: tuple[int, ...] | None = None

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def H(self) -> np.ndarray:
        return self.matrix.conj().T


def align_rows(basis: OrthoBasis, geometry: ArrayGeometry) -> OrthoBasis:
    """Reorder the rows of ``basis`` to match the geometry's sorted storage."""
    if basis.row_locations is None:
        raise InvalidParameterError("basis carries no row locations to align")
    if sorted(basis.row_locations) != list(geometry.locations):
        raise InvalidParameterError("basis rows do not cover the geometry's locations")
    where = {loc: i for i, loc in enumerate(basis.row_locations)}
    perm = [where[loc] for loc in geometry.locations]
    return OrthoBasis(basis.matrix[perm], basis.structure, tuple(geometry.locations))


def _banded_rows(band: np.ndarray, n_cols: int) -> np.ndarray:
    """(n_cols - p) x n_cols matrix whose row r holds ``band`` from column r."""
    p = band.size - 1
    rows = np.zeros((n_cols - p, n_cols), dtype=complex)
    for r in range(n_cols - p):
        rows[r, r : r + p + 1] = band
    return rows


def _pick_pivots(V: np.ndarray) -> np.ndarray:
    m, p = V.shape
    first = np.arange(p)
    if np.linalg.cond(V[first]) <= PIVOT_COND_LIMIT:
        return first
    # greedy row selection: column-pivoted QR of V^T orders rows by independence
    _, _, piv = scipy.linalg.qr(V.T, pivoting=True, mode="economic")
    return np.sort(piv[:p])


def ortho_general(V, pivot_rows=None, locations=None) -> OrthoBasis:
    """A^H = [-V2 V1^-1 | I] with V1 the pivot rows, columns in original row order."""
    V = np.asarray(V, dtype=complex)
    m, p = V.shape
    if m <= p:
        raise PreconditionError(f"need more sensors than modes, got m={m}, p={p}")
    pivots = _pick_pivots(V) if pivot_rows is None else np.asarray(pivot_rows, dtype=np.intp)
    if pivots.size != p or len(set(pivots.tolist())) != p:
        raise PivotSelectionError(f"need {p} distinct pivot rows, got {pivots.tolist()}")
    V1 = V[pivots]
    if np.linalg.cond(V1) > PIVOT_COND_LIMIT:
        raise PivotSelectionError("pivot block V1 is singular")
    rest = np.setdiff1d(np.arange(m), pivots)
    AH = np.zeros((m - p, m), dtype=complex)
    AH[:, pivots] = -np.linalg.solve(V1.T, V[rest].T).T
    AH[:, rest] = np.eye(m - p)
    locs = None if locations is None else tuple(int(i) for i in locations)
    return OrthoBasis(AH.conj().T, "general", locs)


def ortho_ula(a: MonicPolynomial, m: int) -> OrthoBasis:
    """Banded Toeplitz basis for an m-element ULA; row r of A^H is [a_p .. a_1 1] at column r."""
    if m <= a.degree:
        raise PreconditionError(f"ULA basis needs m > p, got m={m}, p={a.degree}")
    AH = _banded_rows(a.band(), m)
    return OrthoBasis(AH.conj().T, "ula-banded", tuple(range(m)))


def ortho_sparse(a: MonicPolynomial, b: SparseResolverPolynomial, m: int) -> OrthoBasis:
    """Banded lattice block plus the resolver row [b_p .. b_1 0 .. 0 1].

    Rows are ordered {0, d, ..., (m-2)d, M}.
    """
    p = a.degree
    if b.p != p:
        raise InvalidParameterError(f"degree mismatch: a has {p}, b has {b.p}")
    if m <= p + 1:
        raise PreconditionError(f"sparse basis needs m > p + 1, got m={m}, p={p}")
    AH = np.zeros((m - p, m), dtype=complex)
    AH[: m - p - 1, : m - 1] = _banded_rows(a.band(), m - 1)
    AH[-1, :p] = b.lattice_coeffs()
    AH[-1, -1] = 1.0
    locs = tuple(i * b.d for i in range(m - 1)) + (b.M,)
    return OrthoBasis(AH.conj().T, "sparse", locs)


def _coprime_locations(m1, m2):
    return tuple(i * m2 for i in range(m1)) + tuple(i * m1 for i in range(1, 2 * m2))


def ortho_coprime_partial(a: MonicPolynomial, b: MonicPolynomial, m1: int, m2: int):
    """Banded blocks (A1, B1) annihilating the two co-prime subarrays separately."""
    p = a.degree
    if b.degree != p:
        raise InvalidParameterError(f"degree mismatch: a has {p}, b has {b.degree}")
    if m1 <= p or 2 * m2 - 1 <= p:
        raise PreconditionError(
            f"subarrays of {m1} and {2 * m2 - 1} sensors are too short for p={p}"
        )
    return ortho_ula(a, m1).matrix, ortho_ula(b, 2 * m2 - 1).matrix


def coprime_c0(w, s) -> np.ndarray:
    """C0^H = -V(I_p2) V(I_p1)^-1 from paired decimated roots w_k = z_k^m2, s_k = z_k^m1.

    Rows of V(I_p1) are w^0..w^(p-1); rows of V(I_p2) are s^1..s^p.
    """
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    p = w.size
    Vp1 = int_power(w[None, :], np.arange(p)[:, None])
    Vp2 = int_power(s[None, :], np.arange(1, p + 1)[:, None])
    if np.linalg.cond(Vp1) > PIVOT_COND_LIMIT:
        raise PivotSelectionError("V(z, I_p1) is singular: z_i^m2 coincide")
    return -np.linalg.solve(Vp1.T, Vp2.T).T


def ortho_coprime_full(modes, m1: int, m2: int) -> OrthoBasis:
    """[[A1, 0, C1_top], [0, B1, C1_bottom]] with C1^H = [C0^H | 0 | I_p | 0]."""
    z = modes.modes if isinstance(modes, ModeSet) else np.atleast_1d(np.asarray(modes, complex))
    p = z.size
    w, s = int_power(z, m2), int_power(z, m1)
    n2 = 2 * m2 - 1
    if m1 < p or n2 < p:
        raise PreconditionError(f"subarrays of {m1} and {n2} sensors are too short for p={p}")
    C0H = coprime_c0(w, s)
    m = m1 + n2
    blocks = []
    if m1 > p:
        blocks.append(np.vstack([ortho_ula(from_roots(w), m1).matrix, np.zeros((n2, m1 - p))]))
    if n2 > p:
        blocks.append(np.vstack([np.zeros((m1, n2 - p)), ortho_ula(from_roots(s), n2).matrix]))
    C1H = np.zeros((p, m), dtype=complex)
    C1H[:, :p] = C0H
    C1H[:, m1 : m1 + p] = np.eye(p)
    blocks.append(C1H.conj().T)
    A = np.hstack(blocks).astype(complex)
    return OrthoBasis(A, "coprime-full", _coprime_locations(m1, m2))
