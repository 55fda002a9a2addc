"""Session-scoped fixtures: designed filter pairs are expensive, build once."""

import pytest

from waverg import DesignParams, Harmonic, build_stack, design_pair, haar_pair

MASSLESS_GRID = [(K, L) for K in (1, 2, 3) for L in (1, 2, 3, 4)]


@pytest.fixture(scope="session")
def massless():
    return Harmonic(0.0)


@pytest.fixture(scope="session")
def designs(massless):
    """(K, L) -> (pair, report) for the massless design grid."""
    out = {}
    for K, L in MASSLESS_GRID:
        out[(K, L)] = design_pair(massless, DesignParams(K, L))
    return out


@pytest.fixture(scope="session")
def pair_k2l4(designs):
    return designs[(2, 4)][0]


@pytest.fixture(scope="session")
def pair_k2l1(designs):
    return designs[(2, 1)][0]


@pytest.fixture(scope="session")
def haar():
    return haar_pair()


@pytest.fixture(scope="session")
def massive_stack():
    """m = 0.5 chain, K=2 L=2 filters redesigned at every level, 5 layers."""
    return build_stack(Harmonic(0.5), DesignParams(2, 2), 5)
