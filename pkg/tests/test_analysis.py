import dataclasses

import numpy as np
import pytest

from modal_arrays import errors
from modal_arrays.analysis import (
    beampattern, crb_surface, draw_weights, fisher_matrix, first_null, match_modes,
    peak_sidelobe_db, rmse_sweep, sensitivity_matrix, sigma2_for_snr, signal_power, theta_grid,
    trial_rng, worker_count,
)
from modal_arrays.config import parse_config
from modal_arrays.geometry import make_coprime, make_sparse, make_ula
from modal_arrays.model import REFERENCE_MODES, vandermonde

from oracles import brute_force_match, dirichlet, single_mode_ula_crb


def test_sensitivity_zero_location_is_exact_zero():
    S = sensitivity_matrix([0.0 + 0j, 0.5], make_ula(3))
    np.testing.assert_array_equal(S[0], [0, 0])
    np.testing.assert_allclose(S[:, 1], [0, 1, 2 * 0.5])


def test_fisher_single_mode_by_hand():
    res = fisher_matrix([1.0], [1.0], make_ula(3), 1.0)
    assert res.fisher[0, 0].real == 5.0
    assert res.per_mode_crb[0] == pytest.approx(0.2, rel=1e-15)


@pytest.mark.parametrize("m", [3, 10, 50])
def test_fisher_single_mode_closed_form(m):
    crb = fisher_matrix([1.0], [1.0], make_ula(m), 1.0).per_mode_crb[0]
    assert crb == pytest.approx(single_mode_ula_crb(m), rel=1e-14)


def test_fisher_linear_in_noise():
    g = make_sparse(14, 4, 3)
    a = fisher_matrix(REFERENCE_MODES, [1.0, 0.7j], g, 0.3).per_mode_crb
    b = fisher_matrix(REFERENCE_MODES, [1.0, 0.7j], g, 0.6).per_mode_crb
    np.testing.assert_allclose(b, 2 * a, rtol=1e-12)


def test_fisher_matches_sum_over_snapshots():
    rng = np.random.default_rng(3)
    g = make_coprime(7, 4)
    X = rng.standard_normal((2, 5)) + 1j * rng.standard_normal((2, 5))
    S = sensitivity_matrix(REFERENCE_MODES, g)
    J = sum((S * X[:, n]).conj().T @ (S * X[:, n]) for n in range(5)) / 0.5
    np.testing.assert_allclose(fisher_matrix(REFERENCE_MODES, X, g, 0.5).fisher, J, rtol=1e-12)


def test_fisher_degenerate_flags_infinity():
    res = fisher_matrix([1.0, 2.0], [1.0, 0.0], make_ula(5), 1.0)
    assert res.degenerate
    assert np.all(np.isinf(res.per_mode_crb))
    with pytest.raises(errors.InvalidParameterError):
        fisher_matrix([1.0], [1.0], make_ula(3), 0.0)


def test_crb_grows_as_interferer_approaches():
    g = make_ula(50)
    x = np.ones(2)
    values = []
    for gap in (0.2, 0.1, 0.05, 0.02, 0.01):
        modes = np.array([1.0, np.exp(1j * gap)])
        values.append(fisher_matrix(modes, x, g, sigma2_for_snr(modes, x, g, 10.0)).per_mode_crb[0])
    assert np.all(np.diff(values) > 0)


def test_crb_surface_shape_and_skip():
    mags, phases, crb = crb_surface(make_ula(10), grid=5, magnitude=(0.9, 1.1), phase=(-0.1, 0.1))
    assert crb.shape == (5, 5)
    assert np.isinf(crb[2, 2])  # z2 == z1
    assert np.all(np.isfinite(np.delete(crb.ravel(), 12)))


def test_signal_power_definition():
    g = make_ula(4)
    V = vandermonde(REFERENCE_MODES, g)
    X = np.array([[1.0, 2.0], [1j, 0.0]])
    assert signal_power(REFERENCE_MODES, X, g) == pytest.approx(np.sum(np.abs(V @ X) ** 2) / 8)


def test_beampattern_at_zero_is_sensor_count():
    for g in (make_ula(50), make_sparse(14, 4, 3), make_coprime(7, 4)):
        curve = beampattern(g, theta_grid(4096))
        assert curve.values[curve.zero_index()] == pytest.approx(g.m)


def test_beampattern_matches_dirichlet():
    theta = np.linspace(0.01, 3.1, 200)
    np.testing.assert_allclose(beampattern(make_ula(17), theta).values, dirichlet(theta, 17), atol=1e-11)


def test_theta_grid_contains_zero_and_pi():
    t = theta_grid(8)
    assert 0.0 in t and t[-1] == pytest.approx(np.pi)
    assert np.all(np.diff(t) > 0)


def test_first_null_of_ula():
    # nulls of the Dirichlet kernel sit at 2 pi k / m
    n, m = 4096, 50
    curve = beampattern(make_ula(m), theta_grid(n))
    assert abs(first_null(curve) - n / m) <= 1


def test_compressed_arrays_have_higher_sidelobes():
    grid = theta_grid(4096)
    ula = peak_sidelobe_db(beampattern(make_ula(50), grid))
    for g in (make_sparse(14, 4, 3), make_coprime(7, 4)):
        assert peak_sidelobe_db(beampattern(g, grid)) > ula + 3


def test_beampattern_empty_grid():
    with pytest.raises(errors.InvalidParameterError):
        beampattern(make_ula(3), [])


def test_match_modes_identity_and_reversal():
    z = REFERENCE_MODES.modes
    perm, err = match_modes(z, z)
    np.testing.assert_array_equal(perm, [0, 1])
    np.testing.assert_array_equal(err, 0)
    perm, err = match_modes(z[::-1], z)
    np.testing.assert_array_equal(perm, [1, 0])
    np.testing.assert_array_equal(err, 0)


def test_match_modes_against_brute_force():
    rng = np.random.default_rng(8)
    for p in (3, 5, 8):
        truth = rng.standard_normal(p) + 1j * rng.standard_normal(p)
        est = rng.permutation(truth + 1e-4 * (rng.standard_normal(p) + 1j * rng.standard_normal(p)))
        perm, err = match_modes(est, truth)
        if p <= 6:
            np.testing.assert_array_equal(perm, brute_force_match(est, truth))
        assert err.max() <= 3e-4


def test_match_modes_size_mismatch():
    with pytest.raises(errors.ShapeError):
        match_modes([1.0], [1.0, 2.0])


def test_trial_rng_independent_of_order():
    a = trial_rng(5, 1, 2).standard_normal(3)
    trial_rng(5, 0, 0).standard_normal(100)
    b = trial_rng(5, 1, 2).standard_normal(3)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, trial_rng(5, 2, 1).standard_normal(3))


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("MODAL_ARRAYS_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("MODAL_ARRAYS_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.setenv("MODAL_ARRAYS_THREADS", "-2")
    with pytest.raises(errors.InvalidParameterError):
        worker_count()


SMALL = """
geometry.kind = {kind}
{params}
modes = 1.0@0.52, 0.95@0.69
snr_db = inf, 20, 5
snapshots = 4
weights.kind = random
trials = 6
seed = 21
"""


@pytest.mark.parametrize("kind, params", [
    ("ula", "geometry.m = 50"),
    ("sparse", "geometry.m = 14\ngeometry.d = 4\ngeometry.M = 3"),
    ("coprime", "geometry.m1 = 7\ngeometry.m2 = 4"),
])
def test_sweep_noiseless_cell_is_exact(kind, params):
    cfg = parse_config(SMALL.format(kind=kind, params=params))
    rows = rmse_sweep(cfg, workers=2)
    assert len(rows) == 3 * 2
    for r in rows:
        assert (r.geometry, r.snr_db) in {(cfg.geometry().label, s) for s in cfg.snr_db}
        assert r.trial_count == 6
    noiseless = [r for r in rows if np.isinf(r.snr_db)]
    assert all(r.rmse <= 1e-6 and r.fail_count == 0 for r in noiseless)
    by_snr = {(r.snr_db, r.mode_index): r.rmse for r in rows}
    assert by_snr[(5.0, 0)] > by_snr[(20.0, 0)]


def test_sweep_records_failures_without_raising(monkeypatch):
    import modal_arrays.analysis as analysis

    real = analysis.estimate
    calls = iter(range(10_000))

    def flaky(Y, p, opts):
        if next(calls) % 3 == 0:
            raise errors.SingularSystemError("injected")
        return real(Y, p, opts)

    monkeypatch.setattr(analysis, "estimate", flaky)
    cfg = parse_config(SMALL.format(kind="ula", params="geometry.m = 50"))
    cfg = dataclasses.replace(cfg, snr_db=(float("inf"),))
    rows = rmse_sweep(cfg, workers=1)
    assert [r.fail_count for r in rows] == [2, 2]
    assert all(r.rmse <= 1e-6 for r in rows)


def test_draw_weights_kinds():
    cfg = parse_config(SMALL.format(kind="ula", params="geometry.m = 50"))
    X = draw_weights(cfg, np.random.default_rng(0))
    assert X.shape == (2, 4)
    const = dataclasses.replace(cfg, weights_kind="constant", weights_scale=2.0)
    np.testing.assert_array_equal(draw_weights(const, None), np.full((2, 4), 2.0))
