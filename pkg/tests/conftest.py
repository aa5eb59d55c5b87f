"""Shared fixtures: the worked-example models used throughout the suite."""

from fractions import Fraction as Fr

import pytest

from kginv.models import FModel, StandardModel


@pytest.fixture
def fig1_model():
    """Three worlds, w sees w1 and w2 at 2/3; p is 1/5 at w1 and 1/4 at w2."""
    return StandardModel(
        worlds=("w", "w1", "w2"),
        access={("w", "w1"): Fr(2, 3), ("w", "w2"): Fr(2, 3)},
        val={("p", "w1"): Fr(1, 5), ("p", "w2"): Fr(1, 4)},
    )


@pytest.fixture
def fig2_model():
    """The two-world countermodel: w sees w1 at 1/2, p is 1/2 at w1."""
    return FModel(
        worlds=("w", "w1"),
        access={("w", "w1"): Fr(1, 2)},
        val={("p", "w1"): Fr(1, 2)},
        tvals={
            "w": frozenset((Fr(0), Fr(1, 2), Fr(1))),
            "w1": frozenset((Fr(0), Fr(1, 2), Fr(1))),
        },
    )


@pytest.fixture
def n_model():
    """Deliberately illegal: T(w0) misses 1/2."""
    return FModel(
        worlds=("w0", "w1"),
        access={("w0", "w1"): Fr(1, 2)},
        val={("p", "w1"): Fr(1, 2)},
        tvals={
            "w0": frozenset((Fr(0), Fr(1))),
            "w1": frozenset((Fr(0), Fr(1, 2), Fr(1))),
        },
    )


@pytest.fixture
def n_prime_model():
    """Deliberately illegal: T(w0) is not closed under complement."""
    return FModel(
        worlds=("w0", "w1"),
        access={("w0", "w1"): Fr(1)},
        val={("p", "w1"): Fr(1, 3)},
        tvals={
            "w0": frozenset((Fr(0), Fr(1, 3), Fr(1, 2), Fr(1))),
            "w1": frozenset((Fr(0), Fr(1, 2), Fr(1))),
        },
    )
