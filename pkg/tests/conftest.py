"""Shared fixtures: builtin groups and numerical helpers."""

import numpy as np
import pytest

from hyplab.fuchsian import builtin_group


@pytest.fixture(scope="session")
def cyclic_group():
    return builtin_group("cyclic_L2")


@pytest.fixture(scope="session")
def bolza_group():
    return builtin_group("bolza")


def dist_c(p, q):
    """Vectorized hyperbolic distance between complex upper-half-plane
    points."""
    p = np.asarray(p)
    q = np.asarray(q)
    return np.arccosh(1.0 + (np.abs(p - q) ** 2) / (2.0 * p.imag * q.imag))
