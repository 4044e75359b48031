import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modal_arrays import errors
from modal_arrays.model import REFERENCE_MODES
from modal_arrays.polynomial import (
    MonicPolynomial, SparseResolverPolynomial, eval_sparse_resolver, evaluate, from_roots,
    resolver_coefficients, resolver_for_modes, roots,
)

from oracles import naive_polyval_inverse


def _same_set(a, b, tol):
    a, b = np.sort_complex(np.asarray(a)), np.asarray(b)
    return all(np.min(np.abs(b - x)) <= tol for x in a) and len(a) == len(b)


def test_from_roots_single_factor():
    w = 0.3 - 0.7j
    np.testing.assert_allclose(from_roots([w]).coeffs, [1, -w])


def test_from_roots_plus_minus_one():
    np.testing.assert_allclose(from_roots([1, -1]).coeffs, [1, 0, -1], atol=1e-15)


def test_from_roots_empty():
    with pytest.raises(errors.InvalidParameterError):
        from_roots([])


def test_from_coeffs_requires_unit_lead():
    with pytest.raises(errors.InvalidParameterError):
        MonicPolynomial.from_coeffs([2, 1])
    assert MonicPolynomial.from_coeffs([1, 0.5]).degree == 1


def test_band_is_reversed_coefficients():
    a = MonicPolynomial([2.0, 3.0])
    np.testing.assert_array_equal(a.band(), [3, 2, 1])


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**31))
def test_roots_round_trip(seed):
    rng = np.random.default_rng(seed)
    r = rng.uniform(0.5, 1.1, 5) * np.exp(1j * rng.uniform(-np.pi, np.pi, 5))
    gaps = np.abs(r[:, None] - r[None, :])[~np.eye(5, dtype=bool)]
    if gaps.min() < 0.05:
        return
    assert _same_set(roots(from_roots(r)), r, 1e-8)


def test_roots_small_cases():
    w = 0.9j
    np.testing.assert_allclose(roots(MonicPolynomial([-w])), [w])
    assert _same_set(roots(MonicPolynomial.from_coeffs([1, 0, -1])), [1, -1], 1e-12)


def test_roots_of_decimated_reference_modes():
    w = REFERENCE_MODES.modes**4
    np.testing.assert_allclose(np.abs(w), [1.0, 0.95**4])
    assert _same_set(roots(from_roots(w)), w, 1e-8)


def test_roots_non_finite():
    with pytest.raises(errors.InvalidParameterError):
        roots(MonicPolynomial([np.inf]))


def test_evaluate_vanishes_at_roots():
    w = 0.4 + 0.6j
    assert abs(evaluate(MonicPolynomial([-w]), w)) < 1e-15
    assert abs(evaluate(MonicPolynomial.from_coeffs([1, 0, -1]), 1.0)) < 1e-15


def test_evaluate_matches_naive_sum():
    rng = np.random.default_rng(2)
    for _ in range(20):
        c = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        z = complex(rng.uniform(0.5, 2) * np.exp(1j * rng.uniform(-np.pi, np.pi)))
        poly = MonicPolynomial(c)
        ref = naive_polyval_inverse(poly.coeffs, z)
        assert abs(evaluate(poly, z) - ref) <= 1e-12 * max(1, abs(ref))


def test_evaluate_rejects_zero():
    with pytest.raises(errors.InvalidParameterError):
        evaluate(MonicPolynomial([1.0]), 0.0)


def test_resolver_annihilates_modes_and_flags_aliases():
    M, d = 3, 4
    B = resolver_for_modes(REFERENCE_MODES.modes, M, d)
    assert np.max(np.abs(eval_sparse_resolver(B, REFERENCE_MODES.modes))) <= 1e-10
    for z in REFERENCE_MODES:
        for q in range(1, d):
            alias = z * np.exp(2j * np.pi * q / d)
            expected = z**M * (np.exp(2j * np.pi * M * q / d) - 1)
            assert abs(eval_sparse_resolver(B, alias) - expected) <= 1e-10


def test_resolver_single_mode_closed_form():
    z1, M, d = 0.8 * np.exp(0.3j), 5, 3
    B = SparseResolverPolynomial([-(z1**M)], M, d)
    assert abs(eval_sparse_resolver(B, z1)) < 1e-15
    np.testing.assert_allclose(resolver_for_modes([z1], M, d).b, B.b)


def test_resolver_degenerate_modes():
    z = np.array([1.0, 1j])  # equal fourth powers
    with pytest.raises(errors.DegenerateModesError):
        resolver_coefficients(z**4, z**3)


def test_resolver_rejects_lattice_location():
    with pytest.raises(errors.InvalidParameterError):
        SparseResolverPolynomial([1.0], M=8, d=4)
