"""Shared metric helpers for the test suite."""

import math

import numpy as np


def l2_distance(a, b):
    """L2 distance between two wavefunctions on the same grid."""
    assert a.grid == b.grid
    return math.sqrt(float(a.grid.weights @ np.abs(a.amplitudes - b.amplitudes) ** 2))


def l1_distance(grid, dens_a, dens_b):
    """L1 distance between two densities sampled on one grid."""
    return float(grid.weights @ np.abs(np.asarray(dens_a) - np.asarray(dens_b)))


def gaussian_density(x, mean, variance):
    return np.exp(-((np.asarray(x) - mean) ** 2) / (2 * variance)) / math.sqrt(
        2 * math.pi * variance
    )


def gaussian_amplitude(x, mean, variance):
    return (2 * math.pi * variance) ** -0.25 * np.exp(
        -((np.asarray(x) - mean) ** 2) / (4 * variance)
    )
