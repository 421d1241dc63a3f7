import itertools
import logging

import numpy as np
import numpy.testing as npt
import pytest

from proxgm.baselines import METHODS, BaselineConfig, IpfpTrace, gagm, ipfp, rrwm, solve, spectral_match
from proxgm.core import AffinityDecomposition, PermutationMatching, brute_force_qap, discretize, qap_objective
from proxgm.data import random_affinity
from proxgm.dpgm import SolverTrace
from proxgm.exception import ConfigurationError, InvalidInput
from proxgm.grad import Tape

def rank_one_affinity(perm):
    """M = v vᵀ with v the vectorized permutation matrix."""
    n = len(perm)
    pairs = [(i, perm[i], k, perm[k]) for i, k in itertools.combinations(range(n), 2)]
    return AffinityDecomposition(n, u = PermutationMatching(perm).as_vector(), pairs = pairs,
                                 weights = np.ones(len(pairs)))

def unary_dominated(n):
    return AffinityDecomposition(n, u = np.eye(n) + 0.1)

def test_config_validation():
    assert BaselineConfig(method = 'RRWM').method == 'rrwm'
    for bad in ({'method': 'hungarian'}, {'max_iters': 0}, {'tol': 0.0}, {'rrwm_alpha': 0.0},
                {'rrwm_alpha': 1.5}, {'rrwm_beta': 0.0}, {'gagm_growth': 1.0},
                {'gagm_beta0': 10.0, 'gagm_beta_max': 5.0}, {'alpha': 0.1}):
        with pytest.raises(ConfigurationError):
            BaselineConfig(**bad)
    assert BaselineConfig().replace(method = 'gagm').as_dict()['method'] == 'gagm'

def test_sm_identity_matrix_gives_uniform_vector():
    state, matching = spectral_match(AffinityDecomposition(3, u = np.ones(9)))
    npt.assert_allclose(state.vector, np.full(9, 1.0 / 3))
    assert state.converged and state.iters == 1
    assert matching == PermutationMatching.identity(3)

def test_sm_rank_one_recovers_permutation():
    perm = [2, 0, 3, 1]
    state, matching = spectral_match(rank_one_affinity(perm))
    assert matching.tolist() == perm
    npt.assert_allclose(state.vector, PermutationMatching(perm).as_vector() / 2.0, atol = 1e-12)

def test_sm_rayleigh_quotient_matches_dense_eigensolver():
    aff = random_affinity(4, seed = 2)
    state, _ = spectral_match(aff, BaselineConfig(max_iters = 5000, tol = 1e-12))
    m = aff.dense()
    v = state.vector
    npt.assert_allclose(np.linalg.norm(v), 1.0)
    assert np.all(v >= 0)
    npt.assert_allclose(v.dot(m).dot(v), np.linalg.eigvalsh(m)[-1], rtol = 1e-6)

def test_sm_dense_and_sparse_agree():
    aff = random_affinity(4, seed = 6)
    sparse_state, sparse_matching = spectral_match(aff)
    dense_state, dense_matching = spectral_match(aff, BaselineConfig(dense = True))
    npt.assert_allclose(dense_state.vector, sparse_state.vector, atol = 1e-7)
    assert dense_matching == sparse_matching

def test_non_convergence_is_a_warning(caplog):
    aff = random_affinity(4, seed = 1)
    with caplog.at_level(logging.WARNING, logger = "proxgm"):
        state, _ = spectral_match(aff, BaselineConfig(max_iters = 1))
    assert not state.converged
    assert "without reaching its tolerance" in caplog.text
    caplog.clear()
    with caplog.at_level(logging.WARNING, logger = "proxgm"):
        spectral_match(aff, BaselineConfig(max_iters = 1, fixed_unroll = True))
    assert "without reaching its tolerance" not in caplog.text

@pytest.mark.parametrize("method", ['sm', 'rrwm', 'gagm', 'ipfp'])
def test_unary_dominated_gives_identity(method):
    _, matching = solve(method, unary_dominated(4))
    assert matching == PermutationMatching.identity(4)

@pytest.mark.parametrize("method", ('dpgm',) + METHODS)
def test_bounded_by_oracle(method):
    for seed in range(5):
        aff = random_affinity(5, seed = seed)
        _, best = brute_force_qap(aff)
        _, matching = solve(method, aff)
        assert qap_objective(aff, matching) <= best + 1e-9

@pytest.mark.parametrize("method", ('dpgm',) + METHODS)
def test_consistent_relabeling(method):
    rng = np.random.default_rng(21)
    for seed in (4, 7):
        aff = random_affinity(6, seed = seed)
        p1, p2 = rng.permutation(6), rng.permutation(6)
        moved = aff.relabel(p1, p2)
        _, matching = solve(method, aff)
        _, moved_matching = solve(method, moved)
        npt.assert_allclose(qap_objective(moved, moved_matching), qap_objective(aff, matching), rtol = 1e-9)
        assert moved_matching == matching.relabel(p1, p2)

def test_rrwm_walk_is_a_distribution():
    state, _ = rrwm(random_affinity(5, seed = 3))
    npt.assert_allclose(state.vector.sum(), 1.0)
    assert np.all(state.vector >= 0)

def test_gagm_schedule_length():
    state, _ = gagm(random_affinity(4, seed = 0))
    assert state.iters == 83
    assert state.converged
    state, _ = gagm(random_affinity(4, seed = 0), BaselineConfig(max_iters = 10))
    assert state.iters == 10
    assert not state.converged

def test_ipfp_optimum_is_a_fixed_point():
    aff = random_affinity(6, seed = 4)
    best, _ = brute_force_qap(aff)
    state, matching = ipfp(aff, z0 = best.as_matrix())
    assert matching == best
    npt.assert_array_equal(state.z, best.as_matrix())

def test_ipfp_improves_on_its_start():
    for seed in range(5):
        aff = random_affinity(6, seed = seed)
        state, matching = ipfp(aff)
        start = qap_objective(aff, discretize(np.full((6, 6), 1.0 / 6)))
        assert qap_objective(aff, matching) >= start
        trace = state.trace
        assert isinstance(trace, IpfpTrace)
        assert trace.initial_objective == start
        assert all(b >= a for a, b in zip(trace.objective, trace.objective[1:]))
        assert trace.objective[-1] == qap_objective(aff, matching)
        assert all(0 <= r <= 1 for r in trace.step)

def test_ipfp_rejects_bad_start():
    with pytest.raises(InvalidInput):
        ipfp(random_affinity(3), z0 = np.full((4, 4), 0.25))

def test_solve_dispatch():
    aff = random_affinity(4, seed = 7)
    state, _ = solve('dpgm', aff)
    assert isinstance(state.trace, SolverTrace)
    state, _ = solve('SM', aff, BaselineConfig(method = 'gagm'))
    assert state.trace is None
    with pytest.raises(ConfigurationError):
        solve('hungarian', aff)
    with pytest.raises(ConfigurationError):
        solve('ipfp', aff, tape = Tape(aff))
