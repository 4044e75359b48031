"""Damped complex exponential mode estimation for uniform, sparse and co-prime arrays."""
from .errors import ModalArraysError
from .geometry import ArrayGeometry, GeometryKind, make_coprime, make_geometry, make_sparse, make_ula
from .model import REFERENCE_MODES, ModeSet, NoiseModel, SnapshotMatrix, ls_weights, residual_energy, synthesize, vandermonde
from .estimation import IqmlOptions, ModeEstimate, estimate, estimate_coprime, estimate_sparse, estimate_ula

__all__ = [
    "ArrayGeometry", "GeometryKind", "IqmlOptions", "ModalArraysError", "ModeEstimate", "ModeSet",
    "NoiseModel", "REFERENCE_MODES", "SnapshotMatrix", "estimate", "estimate_coprime", "estimate_sparse",
    "estimate_ula", "ls_weights", "make_coprime", "make_geometry", "make_sparse", "make_ula",
    "residual_energy", "synthesize", "vandermonde",
]
