import numpy as np
import numpy.testing as npt
import pytest

from proxgm.baselines import BaselineConfig, solve
from proxgm.data import random_affinity
from proxgm.dpgm import SolverParams, dpgm_solve
from proxgm.exception import ConfigurationError, InvalidInput, InvalidTape
from proxgm.grad import (LinearLoss, QuadraticMap, Tape, dpgm_backward, expand_pairwise_gradient,
                         finite_diff_check, record)

def polynomial_tape(aff, loss):
    tape = Tape(aff)
    tape.declare_unroll("polynomial", True)
    tape.set_output(loss.forward(tape))
    return tape

def test_quadratic_map_gradient_is_analytic():
    aff = random_affinity(4, seed = 1)
    loss = QuadraticMap(LinearLoss.random(4, seed = 2).r)
    r = loss.r.ravel()
    u = aff.u
    du, dw = dpgm_backward(polynomial_tape(aff, loss), loss.grad(None))
    npt.assert_allclose(du, 2 * r * u + aff.pairwise_matvec(r), rtol = 1e-12)
    npt.assert_allclose(dw, aff.pairwise_grad(r, u), rtol = 1e-12)

def test_pairwise_product_gradient():
    aff = random_affinity(3, seed = 4)
    rng = np.random.default_rng(0)
    x = rng.uniform(size = 9)
    g = rng.normal(size = 9)
    tape = Tape(aff)
    tape.declare_unroll("polynomial", True)
    tape.set_output(tape.pmatvec(tape.const(x)))
    du, dw = dpgm_backward(tape, g)
    npt.assert_array_equal(du, 0.0)
    npt.assert_allclose(dw, aff.pairwise_grad(g, x))

def test_quadratic_map_finite_differences():
    aff = random_affinity(4, seed = 3)
    loss = QuadraticMap(LinearLoss.random(4, seed = 3).r)
    assert finite_diff_check(aff, None, loss, 1e-5) <= 1e-5

@pytest.mark.parametrize("method", ['dpgm', 'sm', 'rrwm', 'gagm'])
def test_solver_gradients_match_finite_differences(method):
    aff = random_affinity(4, seed = 5)
    if method == 'dpgm':
        cfg = SolverParams(max_iters = 5)
    else:
        cfg = BaselineConfig(method = method, max_iters = 5)
    loss = LinearLoss.random(4, seed = 6)
    assert finite_diff_check(aff, cfg, loss, 1e-5, method = method, samples = 20) <= 1e-4

def test_tape_forward_matches_plain_solve():
    aff = random_affinity(5, seed = 2)
    cfg = SolverParams(max_iters = 6, fixed_unroll = True)
    tape, state, matching = record('dpgm', aff, cfg)
    plain = dpgm_solve(aff, cfg)
    npt.assert_array_equal(state.z, plain.z_final.z)
    assert matching == plain.matching
    assert tape.method == 'dpgm' and tape.fixed
    npt.assert_array_equal(tape.output.value, plain.z_final.vector)

def test_backward_is_linear():
    aff = random_affinity(4, seed = 8)
    tape, _, _ = record('rrwm', aff, BaselineConfig(max_iters = 4))
    rng = np.random.default_rng(1)
    g1, g2 = rng.normal(size = 16), rng.normal(size = 16)
    du1, dw1 = dpgm_backward(tape, g1)
    du2, dw2 = dpgm_backward(tape, g2)
    du, dw = dpgm_backward(tape, 2.0 * g1 - 0.5 * g2)
    npt.assert_allclose(du, 2.0 * du1 - 0.5 * du2, rtol = 1e-9, atol = 1e-12)
    npt.assert_allclose(dw, 2.0 * dw1 - 0.5 * dw2, rtol = 1e-9, atol = 1e-12)

def test_expanded_pairwise_gradient_is_symmetric():
    aff = random_affinity(4, seed = 9)
    tape, _, _ = record('dpgm', aff, SolverParams(max_iters = 3))
    _, dw = dpgm_backward(tape, LinearLoss.random(4).grad(None))
    g = expand_pairwise_gradient(aff, dw)
    assert g.shape == (16, 16)
    npt.assert_array_equal(g, g.T)
    p = aff.pairs
    npt.assert_array_equal(g[p[:, 0] * 4 + p[:, 1], p[:, 2] * 4 + p[:, 3]], dw)
    assert np.triu(g, 1).sum() == pytest.approx(dw.sum(), rel = 1e-12)
    with pytest.raises(InvalidInput):
        expand_pairwise_gradient(aff, dw[:-1])

def test_backward_needs_a_fixed_finished_tape():
    aff = random_affinity(3, seed = 0)
    tape = Tape(aff)
    with pytest.raises(InvalidTape):
        dpgm_backward(tape, np.zeros(9))
    dpgm_solve(aff, SolverParams(max_iters = 3), tape = tape)
    with pytest.raises(InvalidTape):
        dpgm_backward(tape, np.zeros(9))
    with pytest.raises(InvalidTape):
        tape.declare_unroll("dpgm", True)
    tape, _, _ = record('sm', aff)
    with pytest.raises(InvalidInput):
        dpgm_backward(tape, np.zeros(4))

def test_record_refuses_ipfp():
    with pytest.raises(ConfigurationError):
        record('ipfp', random_affinity(3))

def test_step_size_range():
    aff = random_affinity(3)
    for h in (1e-8, 1e-2):
        with pytest.raises(ConfigurationError):
            finite_diff_check(aff, None, LinearLoss.random(3), h)

def test_recorded_baseline_runs_fixed_iterations():
    aff = random_affinity(4, seed = 3)
    tape = Tape(aff)
    state, _ = solve('sm', aff, BaselineConfig(max_iters = 4, fixed_unroll = True), tape = tape)
    assert state.iters == 4
    assert tape.fixed

def test_long_unroll_gradients():
    aff = random_affinity(4, seed = 11)
    err = finite_diff_check(aff, SolverParams(max_iters = 50), LinearLoss.random(4, seed = 1), 1e-5, samples = 12)
    assert err <= 1e-3
