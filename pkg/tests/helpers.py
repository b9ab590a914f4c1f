"""Shared fixtures for randomized instances.

All draws go through an explicit numpy Generator so every test that uses
them is reproducible from its seed.
"""

import numpy as np

import kirchlab as kl


def random_spectrum(rng, n_max=8, lam_lo=0.2, lam_hi=6.0):
    n = int(rng.integers(1, n_max + 1))
    return kl.Spectrum(np.sort(rng.uniform(lam_lo, lam_hi, n)))


def random_data(rng, n, sigma_min=0.05):
    """Initial positions scaled so the half-order norm is bounded away
    from zero (the mildly degenerate guard)."""
    u0 = rng.uniform(-1.0, 1.0, n)
    if not np.any(u0):
        u0[0] = 0.5
    return u0


def random_parabolic_instance(rng):
    spec = random_spectrum(rng)
    gamma = float(rng.choice([0.5, 1.0, 2.0]))
    p = float(rng.choice([0.0, 0.5, 1.0]))
    u0 = random_data(rng, spec.size)
    return spec, kl.PowerNonlinearity(gamma), kl.PowerLawDissipation(p), u0
