import itertools

import numpy as np
import numpy.testing as npt
import pytest

from proxgm.config import configuration
from proxgm.core import (AffinityDecomposition, GraphInstance, KeypointPairSample, MatchingState, Mask,
                         PermutationMatching, brute_force_qap, discretize, matching_accuracy,
                         pad_to_equal_size, qap_objective, relaxed_objective)
from proxgm.data import random_affinity
from proxgm.exception import InvalidInput, SizeLimitExceeded

def test_graph_edges_are_normalized():
    g = GraphInstance(np.zeros((4, 2)), [(3, 1), (0, 2), (1, 0)])
    assert g.edges.tolist() == [[0, 1], [0, 2], [1, 3]]
    assert g.n == 4 and g.dim == 2 and g.num_edges == 3

@pytest.mark.parametrize("edges", [[(0, 0)], [(0, 3)], [(0, 1), (1, 0)], [(-1, 1)]])
def test_graph_rejects_bad_edges(edges):
    with pytest.raises(InvalidInput):
        GraphInstance(np.zeros((3, 2)), edges)

def test_graph_rejects_ragged_or_nan_features():
    with pytest.raises(InvalidInput):
        GraphInstance([1.0, 2.0])
    with pytest.raises(InvalidInput):
        GraphInstance([[np.nan, 1.0]])

def test_graph_is_immutable():
    g = GraphInstance(np.zeros((2, 2)), [(0, 1)])
    with pytest.raises(ValueError):
        g.features[0, 0] = 1.0

def test_graph_relabel_and_networkx():
    g = GraphInstance(np.arange(6.0).reshape(3, 2), [(0, 1)])
    h = g.relabel([2, 0, 1])
    assert h.edges.tolist() == [[0, 2]]
    npt.assert_array_equal(h.features[2], g.features[0])
    nxg = g.to_networkx()
    assert sorted(nxg.edges()) == [(0, 1)]
    assert nxg.number_of_nodes() == 3

def test_graph_dict_roundtrip():
    g = GraphInstance([[0.5, 1.0], [2.0, 0.0]], [(0, 1)])
    assert GraphInstance.from_dict(g.to_dict()) == g
    with pytest.raises(InvalidInput):
        GraphInstance.from_dict({"edges": []})

def test_permutation_validation():
    with pytest.raises(InvalidInput):
        PermutationMatching([0, 0, 1])
    with pytest.raises(InvalidInput):
        PermutationMatching([0.5, 1.0])
    p = PermutationMatching([2, 0, 1])
    npt.assert_array_equal(p.as_matrix(), [[0, 0, 1], [1, 0, 0], [0, 1, 0]])
    assert p.tolist() == [2, 0, 1]
    assert p[0] == 2

def test_matching_state_accepts_vectors():
    s = MatchingState(np.full(9, 1.0 / 3))
    assert s.n == 3
    with pytest.raises(InvalidInput):
        MatchingState(np.ones(5))

def test_qap_objective_unary_only():
    aff = AffinityDecomposition(3, u = np.ones(9))
    for perm in itertools.permutations(range(3)):
        assert qap_objective(aff, PermutationMatching(perm)) == 3.0

def test_qap_objective_identical_triangles(triangle, koopman_beckmann):
    aff = koopman_beckmann(triangle, triangle)
    assert qap_objective(aff, PermutationMatching.identity(3)) == 6.0

def test_qap_objective_matches_explicit_loops(explicit_score):
    aff = random_affinity(5, seed = 7)
    rng = np.random.default_rng(0)
    for _ in range(3):
        x = PermutationMatching(rng.permutation(5))
        npt.assert_allclose(qap_objective(aff, x), explicit_score(aff, x), rtol = 1e-12)

def test_qap_objective_size_mismatch():
    aff = AffinityDecomposition(3)
    with pytest.raises(InvalidInput):
        qap_objective(aff, PermutationMatching.identity(4))

def test_qap_objective_invariant_under_relabeling():
    aff = random_affinity(5, seed = 2)
    rng = np.random.default_rng(1)
    x = PermutationMatching(rng.permutation(5))
    p1, p2 = rng.permutation(5), rng.permutation(5)
    npt.assert_allclose(qap_objective(aff.relabel(p1, p2), x.relabel(p1, p2)),
                        qap_objective(aff, x), rtol = 1e-12)

def test_affinity_is_symmetric_with_zero_diagonal():
    aff = random_affinity(4, seed = 5)
    p = aff.dense_pairwise()
    npt.assert_array_equal(p, p.T)
    npt.assert_array_equal(np.diag(p), 0.0)
    assert np.all(p >= 0)

def test_affinity_support_follows_edges():
    aff = random_affinity(5, seed = 4)
    n = aff.n
    a1 = np.zeros((n, n), dtype = bool)
    a1[aff.edges1[:, 0], aff.edges1[:, 1]] = a1[aff.edges1[:, 1], aff.edges1[:, 0]] = True
    a2 = np.zeros((n, n), dtype = bool)
    a2[aff.edges2[:, 0], aff.edges2[:, 1]] = a2[aff.edges2[:, 1], aff.edges2[:, 0]] = True
    p = aff.dense_pairwise()
    for i, j, k, l in zip(*np.nonzero(p.reshape(n, n, n, n))):
        assert a1[i, k] and a2[j, l]

def test_affinity_matvec_matches_dense():
    aff = random_affinity(4, seed = 9)
    x = np.random.default_rng(3).uniform(size = 16)
    npt.assert_allclose(aff.matvec(x), aff.dense().dot(x), rtol = 1e-12)
    npt.assert_allclose(aff.pairwise_quadratic(x), x.dot(aff.dense_pairwise()).dot(x), rtol = 1e-12)

def test_affinity_rejects_bad_entries():
    with pytest.raises(InvalidInput):
        AffinityDecomposition(2, u = - np.ones(4))
    with pytest.raises(InvalidInput):
        AffinityDecomposition(2, pairs = [(0, 0, 1, 1)], weights = [-1.0])
    with pytest.raises(InvalidInput):
        AffinityDecomposition(2, pairs = [(0, 0, 0, 1)], weights = [1.0])
    with pytest.raises(InvalidInput):
        AffinityDecomposition(2, pairs = [(0, 0, 1, 1), (1, 1, 0, 0)], weights = [1.0, 1.0])
    with pytest.raises(InvalidInput):
        AffinityDecomposition(3, pairs = [(0, 0, 1, 1)], weights = [1.0], edges1 = [(1, 2)])

def test_dense_composition_is_guarded(monkeypatch):
    monkeypatch.setitem(configuration, 'dense_max_n', 3)
    with pytest.raises(SizeLimitExceeded):
        AffinityDecomposition(4).dense()

def test_with_unary_and_with_weights_share_support():
    aff = random_affinity(4, seed = 1)
    other = aff.with_weights(aff.weights * 2).with_unary(np.zeros(16))
    npt.assert_array_equal(other.pairs, aff.pairs)
    npt.assert_allclose(other.dense_pairwise(), 2 * aff.dense_pairwise())
    npt.assert_array_equal(aff.u, random_affinity(4, seed = 1).u)
    with pytest.raises(InvalidInput):
        aff.with_weights(np.ones(aff.num_entries + 1))

def test_relaxed_objective_uniform_entropy():
    aff = AffinityDecomposition(2)
    z = np.full((2, 2), 0.5)
    for lam in (0.5, 1.0, 3.0):
        npt.assert_allclose(relaxed_objective(aff, z, lam), - 2 * lam * np.log(2), rtol = 1e-14)

def test_relaxed_objective_on_permutations_is_negated_score():
    aff = random_affinity(4, seed = 6)
    for perm in itertools.permutations(range(4)):
        x = PermutationMatching(perm)
        assert relaxed_objective(aff, x.as_matrix(), 1.7) == - qap_objective(aff, x)

def test_relaxed_objective_termwise(doubly_stochastic):
    aff = random_affinity(4, seed = 8)
    z = doubly_stochastic(4, seed = 2)
    zv = z.ravel()
    m = aff.dense_pairwise()
    expected = 0.0
    for a in range(16):
        expected -= aff.u[a] * zv[a]
        if zv[a] > 0:
            expected += 0.3 * zv[a] * np.log(zv[a])
        for b in range(16):
            expected -= zv[a] * m[a, b] * zv[b]
    npt.assert_allclose(relaxed_objective(aff, z, 0.3), expected, rtol = 1e-12)

def test_relaxed_objective_rejects_negative_entries():
    with pytest.raises(InvalidInput):
        relaxed_objective(AffinityDecomposition(2), [[0.5, 0.5], [-0.1, 1.1]], 1.0)

def test_pad_equal_sizes_is_noop(triangle):
    g1, g2, mask = pad_to_equal_size(triangle, triangle)
    assert g1 is triangle and g2 is triangle
    assert mask.empty

def test_pad_smaller_graph():
    g1 = GraphInstance(np.ones((3, 2)), [(0, 1)])
    g2 = GraphInstance(np.ones((5, 2)), [(3, 4)])
    p1, p2, mask = pad_to_equal_size(g1, g2)
    assert p1.n == p2.n == 5
    npt.assert_array_equal(p1.features[3:], 0.0)
    assert p1.edges.tolist() == [[0, 1]]
    assert p2 is g2
    assert mask.rows.tolist() == [False, False, False, True, True]
    assert not mask.cols.any()

def test_sample_from_graphs_completes_truth():
    g1 = GraphInstance(np.ones((2, 1)))
    g2 = GraphInstance(np.ones((4, 1)))
    s = KeypointPairSample.from_graphs(g1, g2, [3, 1])
    assert s.truth.tolist() == [3, 1, 0, 2]
    assert s.mask.rows.tolist() == [False, False, True, True]
    with pytest.raises(InvalidInput):
        KeypointPairSample.from_graphs(g1, g2, [1, 1])

def test_relabel_second_moves_truth_and_mask():
    g = GraphInstance(np.arange(3.0)[:, None], [(0, 1)])
    s = KeypointPairSample(g, g, PermutationMatching.identity(3), Mask([False, False, True], [False, False, True]))
    r = s.relabel_second([1, 2, 0])
    assert r.truth.tolist() == [1, 2, 0]
    assert r.mask.cols.tolist() == [True, False, False]
    npt.assert_array_equal(r.g2.features[r.truth.assignment], g.features)

def test_discretize_identity_and_ties():
    assert discretize(np.eye(4)) == PermutationMatching.identity(4)
    assert discretize(np.full((5, 5), 0.2)) == PermutationMatching.identity(5)

def test_discretize_prefers_lexicographically_smallest_optimum():
    z = np.array([[1.0, 1.0, 0.0],
                  [1.0, 1.0, 0.0],
                  [0.0, 0.0, 1.0]])
    assert discretize(z).tolist() == [0, 1, 2]
    z = np.array([[0.0, 1.0, 1.0],
                  [1.0, 0.0, 1.0],
                  [1.0, 1.0, 0.0]])
    assert discretize(z).tolist() == [1, 2, 0]
    # tie across rows without a repeated entry in any row
    assert discretize([[0.0, 1.0], [1.0, 2.0]]).tolist() == [0, 1]

def test_discretize_tie_break_on_integer_matrices():
    rng = np.random.default_rng(5)
    for _ in range(300):
        n = int(rng.integers(2, 6))
        z = rng.integers(0, 4, size = (n, n)).astype(float)
        scores = [(sum(z[i, p[i]] for i in range(n)), p) for p in itertools.permutations(range(n))]
        best = max(s for s, _ in scores)
        first = next(p for s, p in scores if s == best)
        assert discretize(z).tolist() == list(first), z

def test_discretize_matches_exhaustive_search():
    rng = np.random.default_rng(11)
    z = rng.uniform(size = (6, 6))
    best = max(sum(z[i, p[i]] for i in range(6)) for p in itertools.permutations(range(6)))
    got = discretize(z)
    npt.assert_allclose(sum(z[i, got[i]] for i in range(6)), best, rtol = 1e-12)

def test_discretize_rejects_nan():
    with pytest.raises(InvalidInput):
        discretize(np.array([[np.nan, 0.0], [0.0, 1.0]]))

def test_brute_force_single_node():
    x, value = brute_force_qap(AffinityDecomposition(1, u = [2.5]))
    assert x.tolist() == [0]
    assert value == 2.5

def test_brute_force_isomorphic_graphs(koopman_beckmann):
    rng = np.random.default_rng(4)
    edges = [(a, b) for a, b in itertools.combinations(range(6), 2) if rng.uniform() < 0.5]
    g1 = GraphInstance(np.zeros((6, 1)), edges)
    perm = rng.permutation(6)
    g2 = g1.relabel(perm)
    aff = koopman_beckmann(g1, g2)
    x, value = brute_force_qap(aff)
    assert value == 2.0 * g1.num_edges
    assert g1.relabel(x.assignment).edge_set() == g2.edge_set()

def test_brute_force_dominates_random_permutations():
    aff = random_affinity(5, seed = 12)
    _, value = brute_force_qap(aff)
    rng = np.random.default_rng(0)
    for _ in range(50):
        assert value >= qap_objective(aff, PermutationMatching(rng.permutation(5))) - 1e-12

def test_brute_force_size_guard():
    with pytest.raises(SizeLimitExceeded):
        brute_force_qap(AffinityDecomposition(configuration['brute_force_max_n'] + 1))

def test_matching_accuracy():
    truth = PermutationMatching([1, 0, 3, 2])
    assert matching_accuracy(truth, truth) == 1.0
    assert matching_accuracy(PermutationMatching([1, 0, 2, 3]), truth) == 0.5

def test_matching_accuracy_ignores_masked_rows():
    n = 45
    truth = PermutationMatching(np.random.default_rng(0).permutation(n))
    pred = truth.assignment.copy()
    pred[35:] = pred[35:][::-1]
    rows = np.arange(n) >= 35
    assert matching_accuracy(PermutationMatching(pred), truth, Mask(rows, rows)) == 1.0
    assert matching_accuracy(PermutationMatching(pred), truth, Mask(np.ones(n, dtype = bool))) == 1.0

def test_matching_accuracy_size_mismatch():
    with pytest.raises(InvalidInput):
        matching_accuracy(PermutationMatching.identity(3), PermutationMatching.identity(4))
