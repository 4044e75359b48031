"""Monic prediction polynomials A(z) = sum_i a_i z^-i (a_0 = 1) and the
sparse-array resolver B(z) = z^M + sum_i b_i z^((p-i)d)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModesError, InvalidParameterError
from .model import int_power

# condition number above which the resolver system is declared degenerate
RESOLVER_COND_LIMIT = 1e12


@dataclass(frozen=True)
class MonicPolynomial:
    """Stores [a_1, ..., a_p]; the unit leading coefficient is implicit."""

    tail: np.ndarray

    def __post_init__(self):
        tail = np.atleast_1d(np.asarray(self.tail, dtype=complex)).copy()
        if tail.ndim != 1 or tail.size == 0:
            raise InvalidParameterError("a monic polynomial needs degree >= 1")
        tail.setflags(write=False)
        object.__setattr__(self, "tail", tail)

    @classmethod
    def from_coeffs(cls, coeffs) -> "MonicPolynomial":
        """Build from [1, a_1, ..., a_p]; the first entry must be exactly 1."""
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.size < 2 or coeffs[0] != 1:
            raise InvalidParameterError("coefficient list must start with 1 and have degree >= 1")
        return cls(coeffs[1:])

    @property
    def degree(self) -> int:
        return self.tail.size

    @property
    def coeffs(self) -> np.ndarray:
        return np.concatenate([[1.0 + 0j], self.tail])

    def band(self) -> np.ndarray:
        """[a_p, ..., a_1, 1], the row pattern of the banded orthogonal basis."""
        return self.coeffs[::-1]


def from_roots(roots) -> MonicPolynomial:
    """prod_k (1 - r_k z^-1)."""
    roots = np.atleast_1d(np.asarray(roots, dtype=complex))
    if roots.size == 0:
        raise InvalidParameterError("from_roots needs at least one root")
    return MonicPolynomial(np.poly(roots)[1:])


def evaluate(poly: MonicPolynomial, z):
    """Horner evaluation of sum_i a_i z^-i in the variable 1/z."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise InvalidParameterError("A(z) is undefined at z = 0")
    u = 1.0 / z
    acc = np.zeros_like(u)
    for c in poly.coeffs[::-1]:
        acc = acc * u + c
    return acc


def roots(poly: MonicPolynomial) -> np.ndarray:
    """Eigenvalues of the companion matrix of z^p + a_1 z^(p-1) + ... + a_p."""
    if not np.all(np.isfinite(poly.tail)):
        raise InvalidParameterError("polynomial has non-finite coefficients")
    return np.roots(poly.coeffs).astype(complex)


@dataclass(frozen=True)
class SparseResolverPolynomial:
    b: np.ndarray
    M: int
    d: int

    def __post_init__(self):
        b = np.atleast_1d(np.asarray(self.b, dtype=complex)).copy()
        if b.size == 0:
            raise InvalidParameterError("resolver needs at least one coefficient")
        if self.d > 1 and self.M % self.d == 0:
            raise InvalidParameterError(f"M={self.M} lies on the d={self.d} lattice")
        b.setflags(write=False)
        object.__setattr__(self, "b", b)

    @property
    def p(self) -> int:
        return self.b.size

    def lattice_coeffs(self) -> np.ndarray:
        """[b_p, ..., b_1], the weights of lattice samples 0, d, ..., (p-1)d."""
        return self.b[::-1]


def eval_sparse_resolver(B: SparseResolverPolynomial, z):
    z = np.asarray(z, dtype=complex)
    exps = np.arange(B.p) * B.d
    lattice = int_power(z[..., None], exps) @ B.lattice_coeffs()
    return int_power(z, B.M) + lattice


def decimated_vandermonde(w, p: int | None = None) -> np.ndarray:
    """p x p matrix with entry (j, k) = w_k ** j."""
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    p = w.size if p is None else p
    return int_power(w[None, :], np.arange(p)[:, None])


def resolver_coefficients(w, targets) -> np.ndarray:
    """Solve V_p^T(w) beta = -targets for beta = [b_p, ..., b_1].

    ``targets`` may be a vector (one candidate) or a (K, p) array of stacked
    right-hand sides; the system matrix depends only on the decimated roots ``w``.
    """
    Vp = decimated_vandermonde(w)
    if np.linalg.cond(Vp) > RESOLVER_COND_LIMIT:
        raise DegenerateModesError("decimated modes coincide; resolver system is singular")
    rhs = -np.asarray(targets, dtype=complex)
    if rhs.ndim == 1:
        return np.linalg.solve(Vp.T, rhs)
    return np.linalg.solve(Vp.T, rhs.T).T


def resolver_for_modes(modes, M: int, d: int) -> SparseResolverPolynomial:
    """The B(z) whose roots include every mode in ``modes``."""
    z = np.atleast_1d(np.asarray(modes, dtype=complex))
    beta = resolver_coefficients(int_power(z, d), int_power(z, M))
    return SparseResolverPolynomial(beta[::-1], M, d)
