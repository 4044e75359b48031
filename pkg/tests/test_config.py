import dataclasses

import pytest
from hypothesis import given, settings, strategies as st

from modal_arrays.config import ExperimentConfig, dump_config, load_config, parse_config
from modal_arrays.errors import ConfigError
from modal_arrays.estimation import IqmlOptions
from modal_arrays.geometry import GeometryKind

REFERENCE = """\
# 50-element ULA, two modes
geometry.kind = ula
geometry.m = 50
modes = 1.0@0.52, 0.95@0.69   # magnitude@phase
snr_db = -5, 0, 5, 10
trials = 256
seed = 2013
"""


def test_reference_config_parses():
    cfg = parse_config(REFERENCE)
    assert cfg.geometry_kind is GeometryKind.UNIFORM
    assert cfg.geometry().m == 50
    assert cfg.modes == ((1.0, 0.52), (0.95, 0.69))
    assert cfg.snr_db == (-5.0, 0.0, 5.0, 10.0)
    assert cfg.trials == 256 and cfg.seed == 2013 and cfg.p == 2


def test_round_trip():
    cfg = parse_config(REFERENCE)
    assert parse_config(dump_config(cfg)) == cfg


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from([
        (GeometryKind.UNIFORM, {"m": 50}),
        (GeometryKind.SPARSE, {"m": 14, "d": 4, "M": 3}),
        (GeometryKind.COPRIME, {"m1": 7, "m2": 4}),
    ]),
    st.lists(st.tuples(st.floats(0.1, 2.0), st.floats(-3.1, 3.1)), min_size=1, max_size=4),
    st.lists(st.floats(-30, 40), min_size=1, max_size=5),
    st.integers(1, 500),
    st.integers(0, 2**64 - 1),
    st.sampled_from(["constant", "random"]),
    st.booleans(),
)
def test_round_trip_property(geom, modes, snrs, trials, seed, wkind, with_out):
    cfg = ExperimentConfig(
        geometry_kind=geom[0], geometry_params=geom[1], modes=tuple(modes), snr_db=tuple(snrs),
        snapshots=3, trials=trials, seed=seed, weights_kind=wkind, weights_scale=0.5,
        iqml=IqmlOptions(max_iters=7, tol=1e-6, ridge=1e-9),
        output_csv="out.csv" if with_out else None, output_svg="out.svg" if with_out else None,
    )
    assert parse_config(dump_config(cfg)) == cfg


def test_empty_file_errors_at_line_one(tmp_path):
    path = tmp_path / "empty.cfg"
    path.write_text("")
    with pytest.raises(ConfigError, match="line 1"):
        load_config(path)
    with pytest.raises(ConfigError, match="line 1"):
        parse_config("# only a comment\n\n")


def test_unknown_geometry_kind():
    with pytest.raises(ConfigError, match="unknown value") as info:
        parse_config(REFERENCE.replace("kind = ula", "kind = nested"))
    assert info.value.field == "geometry.kind"


def test_unknown_key_named_with_line():
    with pytest.raises(ConfigError, match="line 3.*'colour'"):
        parse_config("geometry.kind = ula\ngeometry.m = 5\ncolour = red\n")


@pytest.mark.parametrize("text, field", [
    (REFERENCE.replace("trials = 256", "trials = 0"), "trials"),
    (REFERENCE.replace("trials = 256", "trials = many"), "trials"),
    (REFERENCE.replace("snr_db = -5, 0, 5, 10", "snr_db = "), "snr_db"),
    (REFERENCE.replace("1.0@0.52, 0.95@0.69", "1.0"), "modes"),
    (REFERENCE.replace("geometry.m = 50\n", ""), "geometry.m"),
    (REFERENCE + "geometry.d = 4\n", "geometry.d"),
    (REFERENCE + "weights.kind = gaussian\n", "weights.kind"),
    (REFERENCE + "iqml.max_iters = 0\n", "iqml"),
    (REFERENCE + "seed = 3\n", "seed"),
    (REFERENCE.replace("geometry.m = 50", "geometry.m = 0"), "geometry"),
])
def test_invalid_values_name_the_field(text, field):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.field == field
    assert field in str(info.value)


def test_malformed_line():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("geometry.kind = ula\njust words\n")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.cfg")


def test_config_is_frozen():
    cfg = parse_config(REFERENCE)
    with pytest.raises(dataclasses.FrozenInstanceError):
        cfg.trials = 3
