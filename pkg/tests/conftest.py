import itertools

import numpy as np
import pytest

from proxgm.core import AffinityDecomposition, GraphInstance, PermutationMatching
from proxgm.data import random_affinity

@pytest.fixture
def koopman_beckmann():
    """Affinity P = A1⊗A2 (unit weight on every edge pair), optional u."""
    def build(g1, g2, u = None):
        return AffinityDecomposition.from_edge_pairs(
            g1.n, u, g1.edges, g2.edges, np.ones((g1.num_edges, g2.num_edges)))
    return build

@pytest.fixture
def triangle():
    return GraphInstance(np.eye(3), [(0, 1), (1, 2), (0, 2)])

@pytest.fixture
def small_affinity():
    return random_affinity(4, seed = 3)

@pytest.fixture
def doubly_stochastic():
    """Random convex combination of permutation matrices."""
    def build(n, seed = 0, count = 5):
        rng = np.random.default_rng(seed)
        coeffs = rng.dirichlet(np.ones(count))
        z = np.zeros((n, n))
        for c in coeffs:
            z += c * PermutationMatching(rng.permutation(n)).as_matrix()
        return z
    return build

def dense_score(aff, x):
    """xᵀMx by explicit loops over every index quadruple."""
    n = aff.n
    m = aff.dense()
    v = x.as_vector()
    total = 0.0
    for i, j, k, l in itertools.product(range(n), repeat = 4):
        total += v[i * n + j] * m[i * n + j, k * n + l] * v[k * n + l]
    return total

@pytest.fixture
def explicit_score():
    return dense_score
