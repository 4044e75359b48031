"""Uniform, sparse and co-prime line array geometries.

Locations are integers in units of half a wavelength. They are stored sorted
ascending; the rows belonging to each subarray are kept in ``subarrays`` as
index arrays into the sorted location vector, listed in the subarray's own
natural order (ascending location).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from math import gcd
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import CoprimalityError, DuplicateLocationError, InvalidParameterError, OrderingError


class GeometryKind(str, enum.Enum):
    UNIFORM = "ula"
    SPARSE = "sparse"
    COPRIME = "coprime"


@dataclass(frozen=True)
class ArrayGeometry:
    locations: tuple[int, ...]
    kind: GeometryKind
    params: Mapping[str, int]
    subarrays: Mapping[str, tuple[int, ...]] = field(repr=False)

    @property
    def m(self) -> int:
        return len(self.locations)

    @property
    def aperture(self) -> int:
        return self.locations[-1] - self.locations[0]

    def locations_array(self) -> np.ndarray:
        return np.asarray(self.locations, dtype=np.int64)

    def rows(self, name: str) -> np.ndarray:
        """Row indices (into sorted storage) of the named subarray."""
        return np.asarray(self.subarrays[name], dtype=np.intp)

    def subarray_order(self) -> np.ndarray:
        """Row permutation listing subarray rows back to back.

        Sparse: uniform lattice then the extra sensor. Co-prime: first
        subarray then second. Uniform: identity.
        """
        if self.kind is GeometryKind.SPARSE:
            return np.concatenate([self.rows("lattice"), self.rows("extra")])
        if self.kind is GeometryKind.COPRIME:
            return np.concatenate([self.rows("first"), self.rows("second")])
        return np.arange(self.m)

    @property
    def label(self) -> str:
        p = self.params
        if self.kind is GeometryKind.UNIFORM:
            return f"ula(m={p['m']})"
        if self.kind is GeometryKind.SPARSE:
            return f"sparse(m={p['m']};d={p['d']};M={p['M']})"
        return f"coprime(m1={p['m1']};m2={p['m2']})"


def _build(kind, params, groups):
    """Sort the union of ``groups`` and record each group's row indices."""
    flat = [loc for g in groups.values() for loc in g]
    if len(set(flat)) != len(flat):
        raise DuplicateLocationError(f"duplicate sensor location in {sorted(flat)}")
    locations = tuple(sorted(flat))
    index = {loc: i for i, loc in enumerate(locations)}
    subarrays = {name: tuple(index[loc] for loc in g) for name, g in groups.items()}
    return ArrayGeometry(
        locations=locations,
        kind=kind,
        params=MappingProxyType(dict(params)),
        subarrays=MappingProxyType(subarrays),
    )


def make_ula(m: int) -> ArrayGeometry:
    if int(m) != m or m < 1:
        raise InvalidParameterError(f"ULA needs m >= 1, got {m}")
    m = int(m)
    return _build(GeometryKind.UNIFORM, {"m": m}, {"lattice": list(range(m))})


def make_sparse(m: int, d: int, M: int) -> ArrayGeometry:
    """Sparse array {0, d, ..., (m-2)d} plus one extra sensor at ``M``."""
    if m < 2:
        raise InvalidParameterError(f"sparse array needs m >= 2, got {m}")
    if d <= 1:
        raise InvalidParameterError(f"sparse array needs d > 1, got {d}")
    if M < 1:
        raise InvalidParameterError(f"extra sensor location must be positive, got {M}")
    if gcd(M, d) != 1:
        raise CoprimalityError(f"gcd(M={M}, d={d}) = {gcd(M, d)}, must be 1")
    lattice = [i * d for i in range(m - 1)]
    if M in lattice:
        raise DuplicateLocationError(f"M={M} collides with the uniform sublattice")
    return _build(
        GeometryKind.SPARSE,
        {"m": m, "d": d, "M": M},
        {"lattice": lattice, "extra": [M]},
    )


def make_coprime(m1: int, m2: int) -> ArrayGeometry:
    """Co-prime array with m1 + 2*m2 - 1 sensors."""
    if m2 < 1:
        raise InvalidParameterError(f"m2 must be >= 1, got {m2}")
    if m1 <= m2:
        raise OrderingError(f"co-prime array needs m1 > m2, got m1={m1}, m2={m2}")
    if gcd(m1, m2) != 1:
        raise CoprimalityError(f"gcd(m1={m1}, m2={m2}) = {gcd(m1, m2)}, must be 1")
    first = [i * m2 for i in range(m1)]
    second = [i * m1 for i in range(1, 2 * m2)]
    return _build(
        GeometryKind.COPRIME,
        {"m1": m1, "m2": m2},
        {"first": first, "second": second},
    )


def make_geometry(kind: str | GeometryKind, **params: int) -> ArrayGeometry:
    kind = GeometryKind(kind)
    if kind is GeometryKind.UNIFORM:
        return make_ula(params["m"])
    if kind is GeometryKind.SPARSE:
        return make_sparse(params["m"], params["d"], params["M"])
    return make_coprime(params["m1"], params["m2"])
