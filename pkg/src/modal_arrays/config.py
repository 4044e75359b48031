"""Experiment configuration: a line-oriented ``key = value`` format.

Example::

    # two modes on a 50-element ULA
    geometry.kind = ula
    geometry.m = 50
    modes = 1.0@0.52, 0.95@0.69      # magnitude@phase pairs
    snr_db = -5, 0, 5, 10             # per-sensor SNR grid
    trials = 256
    seed = 2013

Blank lines and ``#`` comments are ignored. Unknown keys are errors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, ModalArraysError
from .estimation import IqmlOptions
from .geometry import ArrayGeometry, GeometryKind, make_geometry

GEOMETRY_PARAMS = {
    GeometryKind.UNIFORM: ("m",),
    GeometryKind.SPARSE: ("m", "d", "M"),
    GeometryKind.COPRIME: ("m1", "m2"),
}
WEIGHT_KINDS = ("constant", "random")


@dataclass(frozen=True)
class ExperimentConfig:
    geometry_kind: GeometryKind
    geometry_params: dict
    modes: tuple[tuple[float, float], ...]
    snr_db: tuple[float, ...]
    snapshots: int = 1
    trials: int = 256
    seed: int = 0
    weights_kind: str = "constant"
    weights_scale: float = 1.0
    iqml: IqmlOptions = field(default_factory=IqmlOptions)
    output_csv: str | None = None
    output_svg: str | None = None

    def __post_init__(self):
        if not self.modes:
            raise ConfigError("at least one mode is required", field="modes")
        if not self.snr_db:
            raise ConfigError("SNR grid is empty", field="snr_db")
        if self.trials < 1:
            raise ConfigError(f"must be >= 1, got {self.trials}", field="trials")
        if self.snapshots < 1:
            raise ConfigError(f"must be >= 1, got {self.snapshots}", field="snapshots")
        if self.weights_kind not in WEIGHT_KINDS:
            raise ConfigError(f"unknown weight kind {self.weights_kind!r}", field="weights.kind")
        if not self.weights_scale > 0:
            raise ConfigError("must be > 0", field="weights.scale")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("must be a 64-bit unsigned integer", field="seed")

    @property
    def mode_values(self) -> np.ndarray:
        return np.array([r * np.exp(1j * t) for r, t in self.modes])

    @property
    def p(self) -> int:
        return len(self.modes)

    def geometry(self) -> ArrayGeometry:
        return make_geometry(self.geometry_kind, **self.geometry_params)


def _parse_int(key, text, line):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}", field=key, line=line) from None


def _parse_float(key, text, line):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}", field=key, line=line) from None


def _parse_list(key, text, line):
    return tuple(_parse_float(key, item.strip(), line) for item in text.split(",") if item.strip())


def _parse_modes(key, text, line):
    modes = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        mag, sep, phase = item.partition("@")
        if not sep:
            raise ConfigError(f"mode {item!r} is not magnitude@phase", field=key, line=line)
        modes.append((_parse_float(key, mag, line), _parse_float(key, phase, line)))
    return tuple(modes)


_SCALARS = {
    "snapshots": _parse_int,
    "trials": _parse_int,
    "seed": _parse_int,
    "weights.scale": _parse_float,
    "iqml.max_iters": _parse_int,
    "iqml.tol": _parse_float,
    "iqml.ridge": _parse_float,
}
_STRINGS = ("weights.kind", "output.csv", "output.svg", "geometry.kind")
_GEOMETRY_KEYS = {f"geometry.{k}" for keys in GEOMETRY_PARAMS.values() for k in keys}


def parse_config(text: str) -> ExperimentConfig:
    values, lines = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        key, sep, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        if key in values:
            raise ConfigError("duplicate key", field=key, line=lineno)
        if key == "modes":
            values[key] = _parse_modes(key, value, lineno)
        elif key == "snr_db":
            values[key] = _parse_list(key, value, lineno)
        elif key in _SCALARS:
            values[key] = _SCALARS[key](key, value, lineno)
        elif key in _GEOMETRY_KEYS:
            values[key] = _parse_int(key, value, lineno)
        elif key in _STRINGS:
            values[key] = value
        else:
            raise ConfigError("unknown key", field=key, line=lineno)
        lines[key] = lineno
    if not values:
        raise ConfigError("configuration is empty", line=1)
    return _assemble(values, lines)


def _assemble(values, lines):
    def need(key):
        if key not in values:
            raise ConfigError("missing required key", field=key)
        return values[key]

    kind_text = need("geometry.kind")
    try:
        kind = GeometryKind(kind_text)
    except ValueError:
        raise ConfigError(
            f"unknown value {kind_text!r} (expected ula, sparse or coprime)",
            field="geometry.kind",
            line=lines["geometry.kind"],
        ) from None
    params = {}
    for name in GEOMETRY_PARAMS[kind]:
        params[name] = need(f"geometry.{name}")
    for key in _GEOMETRY_KEYS - {f"geometry.{n}" for n in GEOMETRY_PARAMS[kind]}:
        if key in values:
            raise ConfigError(f"not a parameter of a {kind.value} geometry", field=key, line=lines[key])
    try:
        make_geometry(kind, **params)
    except ModalArraysError as exc:
        raise ConfigError(str(exc), field="geometry") from None
    try:
        iqml = IqmlOptions(
            max_iters=values.get("iqml.max_iters", 20),
            tol=values.get("iqml.tol", 1e-8),
            ridge=values.get("iqml.ridge", 0.0),
        )
    except ModalArraysError as exc:
        raise ConfigError(str(exc), field="iqml") from None
    return ExperimentConfig(
        geometry_kind=kind,
        geometry_params=params,
        modes=need("modes"),
        snr_db=need("snr_db"),
        snapshots=values.get("snapshots", 1),
        trials=values.get("trials", 256),
        seed=values.get("seed", 0),
        weights_kind=values.get("weights.kind", "constant"),
        weights_scale=values.get("weights.scale", 1.0),
        iqml=iqml,
        output_csv=values.get("output.csv"),
        output_svg=values.get("output.svg"),
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)


def dump_config(cfg: ExperimentConfig) -> str:
    """Serialize so that ``parse_config(dump_config(cfg)) == cfg``."""
    out = [f"geometry.kind = {cfg.geometry_kind.value}"]
    out += [f"geometry.{k} = {v}" for k, v in cfg.geometry_params.items()]
    out.append("modes = " + ", ".join(f"{r!r}@{t!r}" for r, t in cfg.modes))
    out.append("snr_db = " + ", ".join(repr(float(s)) for s in cfg.snr_db))
    out += [
        f"snapshots = {cfg.snapshots}",
        f"trials = {cfg.trials}",
        f"seed = {cfg.seed}",
        f"weights.kind = {cfg.weights_kind}",
        f"weights.scale = {cfg.weights_scale!r}",
        f"iqml.max_iters = {cfg.iqml.max_iters}",
        f"iqml.tol = {cfg.iqml.tol!r}",
        f"iqml.ridge = {cfg.iqml.ridge!r}",
    ]
    if cfg.output_csv is not None:
        out.append(f"output.csv = {cfg.output_csv}")
    if cfg.output_svg is not None:
        out.append(f"output.svg = {cfg.output_svg}")
    return "\n".join(out) + "\n"
