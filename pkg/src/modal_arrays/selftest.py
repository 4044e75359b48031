"""Noiseless exact-recovery checks, runnable from the command line."""
from __future__ import annotations

import numpy as np

from .analysis import match_modes
from .estimation import estimate
from .geometry import make_coprime, make_sparse, make_ula
from .model import REFERENCE_MODES, NoiseModel, random_modes, synthesize
TOLERANCE = 1e-6


def _cases():
    yield make_ula(50), (1,)
    yield make_sparse(14, 4, 3), (4,)
    yield make_coprime(7, 4), (4, 7)


def run_selftest(n_random: int = 20, seed: int = 0, report=print) -> bool:
    rng = np.random.default_rng(seed)
    ok = True
    for geometry, factors in _cases():
        worst = 0.0
        sets = [REFERENCE_MODES] + [
            random_modes(rng, int(rng.integers(1, 4)), factors) for _ in range(n_random)
        ]
        for modes in sets:
            weights = rng.standard_normal(modes.p) + 1j * rng.standard_normal(modes.p)
            Y = synthesize(modes, weights, geometry, NoiseModel())
            est = estimate(Y, modes.p)
            _, err = match_modes(est.modes, modes)
            worst = max(worst, float(err.max()))
        passed = worst <= TOLERANCE
        ok &= passed
        report(f"{'PASS' if passed else 'FAIL'} noiseless recovery {geometry.label}: "
               f"{len(sets)} mode sets, worst error {worst:.2e}")
    return ok
