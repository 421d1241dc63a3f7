import logging

import numpy as np
import numpy.testing as npt
import pytest

from proxgm.exception import ConfigurationError, InvalidInput
from proxgm.ops import ArrayOps, stochastic_deviation
from proxgm.sinkhorn import SinkhornConfig, project, sinkhorn_normalize

def test_positive_diagonal_gives_identity():
    s = sinkhorn_normalize(np.diag([2.0, 5.0]))
    npt.assert_allclose(s.z, np.eye(2), atol = 1e-12)
    assert s.converged

def test_constant_matrix_gives_uniform():
    s = sinkhorn_normalize(np.ones((3, 3)))
    npt.assert_allclose(s.z, np.full((3, 3), 1.0 / 3), rtol = 1e-14)
    assert s.iters == 1

def test_two_by_two_balance():
    # the cross ratio z00 z11 / (z01 z10) is preserved by diagonal scalings
    s = sinkhorn_normalize([[1.0, 2.0], [3.0, 4.0]])
    r = np.sqrt(4.0 / 6.0)
    a = r / (1.0 + r)
    npt.assert_allclose(s.z, [[a, 1 - a], [1 - a, a]], atol = 1e-8)
    assert s.deviation <= 1e-9

def test_output_is_doubly_stochastic_when_converged():
    m = np.random.default_rng(0).uniform(0.01, 5.0, (6, 6))
    s = sinkhorn_normalize(m)
    assert s.converged
    npt.assert_allclose(s.z.sum(axis = 0), 1.0, atol = 1e-9)
    npt.assert_allclose(s.z.sum(axis = 1), 1.0, atol = 1e-9)
    assert np.all(s.z >= 0)

def test_idempotence_and_scale_invariance():
    m = np.random.default_rng(1).uniform(0.1, 2.0, (5, 5))
    s = sinkhorn_normalize(m)
    npt.assert_allclose(sinkhorn_normalize(s.z).z, s.z, atol = 1e-8)
    npt.assert_allclose(sinkhorn_normalize(37.5 * m).z, s.z, atol = 1e-8)

def test_missed_tolerance_is_a_warning(caplog):
    with caplog.at_level(logging.WARNING, logger = "proxgm"):
        s = sinkhorn_normalize([[1.0, 2.0], [3.0, 4.0]], SinkhornConfig(max_iters = 1))
    assert not s.converged
    assert s.iters == 1
    assert "did not reach" in caplog.text

@pytest.mark.parametrize("m", [[[np.nan, 1.0], [1.0, 1.0]],
                               [[np.inf, 1.0], [1.0, 1.0]],
                               [[-1.0, 1.0], [1.0, 1.0]],
                               [1.0, 2.0, 3.0]])
def test_invalid_input(m):
    with pytest.raises(InvalidInput):
        sinkhorn_normalize(m)

def test_zero_row_without_floor():
    with pytest.raises(InvalidInput):
        sinkhorn_normalize([[0.0, 0.0], [1.0, 1.0]], SinkhornConfig(epsilon = 0.0))
    s = sinkhorn_normalize([[0.0, 0.0], [1.0, 1.0]], SinkhornConfig(max_iters = 5))
    assert np.all(np.isfinite(s.z))

def test_config_validation():
    with pytest.raises(ConfigurationError):
        SinkhornConfig(max_iters = 0)
    with pytest.raises(ConfigurationError):
        SinkhornConfig(tol = 0.0)
    with pytest.raises(ConfigurationError):
        SinkhornConfig(depth = 3)
    assert SinkhornConfig().replace(max_iters = 30).max_iters == 30

def test_fixed_projection_runs_every_sweep():
    m = np.random.default_rng(2).uniform(0.5, 1.5, 9)
    h, deviation, sweeps, converged = project(ArrayOps(n = 3), m, 7, 1e-9, 0.0, fixed = True)
    assert sweeps == 7
    assert deviation == stochastic_deviation(h, 3)
    h2, _, early, _ = project(ArrayOps(n = 3), m, 1000, 1e-9, 0.0)
    assert early < 1000
