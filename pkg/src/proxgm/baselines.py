# Copyright 2026 The proxgm developers
#
# This file is part of proxgm.
#
# proxgm is free software: you can redistribute it and/or modify it
# under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# proxgm is distributed in the hope that it will be useful, but WITHOUT
# ANY WARRANTY; without even the implied warranty of MERCHANTABILITY
# or FITNESS FOR A PARTICULAR PURPOSE.  See the GNU General Public
# License for more details.
#
# You should have received a copy of the GNU General Public License
# along with proxgm.  If not, see <http://www.gnu.org/licenses/>

"""Classical graph matching baselines.

All of them consume an `proxgm.core.AffinityDecomposition` and return
a ``(MatchingState, PermutationMatching)`` couple. Products with the
affinity matrix go through the sparse pairwise support unless
``dense`` is requested (n ≤ ``configuration['dense_max_n']``).

Spectral matching, RRWM and GAGM are written against
`proxgm.ops.ArrayOps` so that a `proxgm.grad.Tape` can record them;
IPFP moves between discrete points and is not differentiable.
"""

import numpy as np

from .config import default_baseline_params, default_sinkhorn_params, make_params
from .core import MatchingState, discretize, qap_objective, _as_matrix
from .dpgm import SolverParams, dpgm_solve
from .exception import ConfigurationError, InvalidInput
from .log import logger, style
from .ops import ArrayOps
from .sinkhorn import log_project, project

METHODS = ('sm', 'rrwm', 'gagm', 'ipfp')
"""Baseline names accepted by `proxgm.baselines.BaselineConfig`."""

class BaselineConfig(object):

    """Hyperparameters of the baselines.

    Built over `proxgm.config.default_baseline_params`. ``method`` is
    one of `proxgm.baselines.METHODS` (case insensitive).
    ``rrwm_alpha`` is the weight of the reweighted jump in the RRWM
    convex combination.
    """

    def __init__(self, **params):
        p = make_params(params, default_baseline_params)
        self.method = str(p['method']).lower()
        self.max_iters = int(p['max_iters'])
        self.tol = float(p['tol'])
        self.rrwm_alpha = float(p['rrwm_alpha'])
        self.rrwm_beta = float(p['rrwm_beta'])
        self.gagm_beta0 = float(p['gagm_beta0'])
        self.gagm_growth = float(p['gagm_growth'])
        self.gagm_beta_max = float(p['gagm_beta_max'])
        self.sinkhorn_iters = int(p['sinkhorn_iters'])
        self.dense = bool(p['dense'])
        self.fixed_unroll = bool(p['fixed_unroll'])
        if self.method not in METHODS:
            raise ConfigurationError("unknown baseline method %r, expected one of %s" % (p['method'], ", ".join(METHODS)))
        if self.max_iters < 1 or self.sinkhorn_iters < 1:
            raise ConfigurationError("max_iters and sinkhorn_iters must be >= 1")
        if not self.tol > 0:
            raise ConfigurationError("tol must be > 0, got %r" % (self.tol,))
        if not 0 < self.rrwm_alpha <= 1:
            raise ConfigurationError("rrwm_alpha must be in (0, 1], got %r" % (self.rrwm_alpha,))
        if not self.rrwm_beta > 0:
            raise ConfigurationError("rrwm_beta must be > 0, got %r" % (self.rrwm_beta,))
        if not (self.gagm_beta0 > 0 and self.gagm_growth > 1 and self.gagm_beta_max >= self.gagm_beta0):
            raise ConfigurationError("gagm schedule needs beta0 > 0, growth > 1 and beta_max >= beta0, got %r, %r, %r"
                                     % (self.gagm_beta0, self.gagm_growth, self.gagm_beta_max))

    def as_dict(self):
        return {k: getattr(self, k) for k in default_baseline_params}

    def replace(self, **params):
        d = self.as_dict()
        d.update(params)
        return BaselineConfig(**d)

    def __repr__(self):
        return "BaselineConfig(%s)" % (", ".join("%s=%r" % kv for kv in sorted(self.as_dict().items())),)

class IpfpTrace(object):

    """Per iteration record of `proxgm.baselines.ipfp`.

    ``objective[k]`` is the best discrete score found up to iteration
    k, ``relaxed[k]`` the score of the continuous iterate.
    """

    def __init__(self, initial_objective):
        self.initial_objective = initial_objective
        self.objective = []
        self.relaxed = []
        self.step = []

    @property
    def iters_run(self):
        return len(self.objective)

    def __repr__(self):
        return "IpfpTrace(iters_run=%i)" % (self.iters_run,)

def _operator(ops, cfg):
    if cfg.dense and not ops.recording:
        m = ops.aff.dense()
        return lambda x: m.dot(x)
    return lambda x: ops.add(ops.mul(ops.unary(), x), ops.pmatvec(x))

def _ops(aff, tape, name, cfg):
    if tape is None:
        return ArrayOps(aff)
    tape.declare_unroll(name, cfg.fixed_unroll)
    return tape

def _finish(name, aff, ops, tape, h, iters, converged, cfg):
    if tape is not None:
        tape.set_output(h)
    n = aff.n
    if not (converged or cfg.fixed_unroll):
        logger.warning("%s stopped after %i iterations without reaching its tolerance", style.method(name), cfg.max_iters)
    state = MatchingState(ops.value(h).reshape(n, n), converged = converged, iters = iters)
    matching = discretize(state)
    logger.detail("%s n=%i: %i iterations, converged=%s", name, n, iters, converged)
    return state, matching

def spectral_match(aff, cfg = None, tape = None):
    """Leading eigenvector of M by power iteration, then discretization.

    Starts from the uniform unit vector and stops when the 2-norm of
    the eigenvector change is below ``cfg.tol`` (never early when
    ``cfg.fixed_unroll``). The returned state holds the unit norm,
    nonnegative eigenvector reshaped n×n.
    """
    cfg = cfg or BaselineConfig(method = 'sm')
    ops = _ops(aff, tape, "sm", cfg)
    op = _operator(ops, cfg)
    n2 = aff.n * aff.n
    v = ops.const(np.full(n2, 1.0 / np.sqrt(n2)))
    converged = False
    iters = 0
    for iters in range(1, cfg.max_iters + 1):
        mv = op(v)
        if not np.any(ops.value(mv) != 0):
            logger.warning("M v vanishes, keeping the uniform vector")
            converged = True
            break
        v_new = ops.l2_normalize(mv)
        change = float(np.linalg.norm(ops.value(v_new) - ops.value(v)))
        logger.trace("sm iteration %i: change %.3g", iters, change)
        v = v_new
        if change < cfg.tol:
            converged = True
            if not cfg.fixed_unroll:
                break
    return _finish("sm", aff, ops, tape, v, iters, converged, cfg)

def rrwm(aff, cfg = None, tape = None):
    """Reweighted random walks.

    Each iteration takes a walk step y = Mx / ‖Mx‖₁, builds the jump
    s by Sinkhorn normalizing exp(rrwm_beta · y / max y), and moves to
    the L1 normalized (1 − rrwm_alpha)·y + rrwm_alpha·s, until the L1
    change is below ``cfg.tol``.
    """
    cfg = cfg or BaselineConfig(method = 'rrwm')
    ops = _ops(aff, tape, "rrwm", cfg)
    op = _operator(ops, cfg)
    n2 = aff.n * aff.n
    eps = default_sinkhorn_params['epsilon']
    x = ops.const(np.full(n2, 1.0 / n2))
    converged = False
    iters = 0
    for iters in range(1, cfg.max_iters + 1):
        mx = op(x)
        if not np.sum(ops.value(mx)) > 0:
            logger.warning("M x vanishes, keeping the uniform walk")
            converged = True
            break
        y = ops.l1_normalize(mx)
        s = ops.exp(ops.scale(ops.max_normalize(y), cfg.rrwm_beta))
        s, _, _, _ = project(ops, s, cfg.sinkhorn_iters, cfg.tol, eps, fixed = cfg.fixed_unroll)
        s = ops.l1_normalize(s)
        x_new = ops.l1_normalize(ops.lincomb(y, 1.0 - cfg.rrwm_alpha, s, cfg.rrwm_alpha))
        change = float(np.abs(ops.value(x_new) - ops.value(x)).sum())
        logger.trace("rrwm iteration %i: change %.3g", iters, change)
        x = x_new
        if change < cfg.tol:
            converged = True
            if not cfg.fixed_unroll:
                break
    return _finish("rrwm", aff, ops, tape, x, iters, converged, cfg)

def gagm(aff, cfg = None, tape = None):
    """Graduated assignment.

    From the uniform matrix, repeat z = Sinkhorn(exp(β·(u + Pz))) with
    β growing geometrically from ``gagm_beta0`` by ``gagm_growth``
    until it exceeds ``gagm_beta_max`` (at most ``max_iters`` times).
    The projection runs in the log domain (`proxgm.sinkhorn.log_project`).
    """
    cfg = cfg or BaselineConfig(method = 'gagm')
    ops = _ops(aff, tape, "gagm", cfg)
    n = aff.n
    z = ops.const(np.full(n * n, 1.0 / n))
    beta = cfg.gagm_beta0
    iters = 0
    while beta <= cfg.gagm_beta_max and iters < cfg.max_iters:
        logits = ops.scale(ops.add(ops.unary(), ops.pmatvec(z)), beta)
        z, deviation, sweeps, _ = log_project(ops, logits, cfg.sinkhorn_iters, cfg.tol, fixed = cfg.fixed_unroll)
        iters += 1
        logger.trace("gagm iteration %i: beta=%g deviation=%.3g sweeps=%i", iters, beta, deviation, sweeps)
        beta *= cfg.gagm_growth
    return _finish("gagm", aff, ops, tape, z, iters, beta > cfg.gagm_beta_max, cfg)

def ipfp(aff, cfg = None, z0 = None):
    """Integer projected fixed point.

    From ``z0`` (uniform by default), repeat: b = discretize(u + 2Pz),
    exact line search of the quadratic score on the segment z → b,
    move, until the step vanishes or the move is below ``cfg.tol``.
    The best discrete point met, starting with the discretization of
    ``z0``, is returned, so the score never decreases along the
    iterations. The per iteration `proxgm.baselines.IpfpTrace` is
    attached to the returned state.
    """
    cfg = cfg or BaselineConfig(method = 'ipfp')
    n = aff.n
    if z0 is None:
        x = np.full(n * n, 1.0 / n)
    else:
        x = _as_matrix(z0).ravel().astype(float)
        if x.size != n * n:
            raise InvalidInput("initial state of size %i for an affinity on %i nodes" % (int(np.sqrt(x.size)), n))
    u = aff.u
    best = discretize(x.reshape(n, n))
    best_value = qap_objective(aff, best)
    trace = IpfpTrace(best_value)
    f = float(np.dot(u, x)) + aff.pairwise_quadratic(x)
    converged = False
    for k in range(cfg.max_iters):
        grad = u + 2.0 * aff.pairwise_matvec(x)
        b = discretize(grad.reshape(n, n))
        b_value = qap_objective(aff, b)
        if b_value > best_value:
            best, best_value = b, b_value
        d = b.as_vector() - x
        c = float(np.dot(grad, d))
        dd = aff.pairwise_quadratic(d)
        if dd >= 0:
            r = 1.0
        else:
            r = min(1.0, - c / (2.0 * dd))
        r = max(r, 0.0)
        x = x + r * d
        f = f + r * c + r * r * dd
        trace.objective.append(best_value)
        trace.relaxed.append(f)
        trace.step.append(r)
        move = r * float(np.linalg.norm(d))
        logger.trace("ipfp iteration %i: step %.3g, continuous %.12g, best discrete %.12g", k, r, f, best_value)
        if r == 0 or move < cfg.tol:
            converged = True
            break
    if not converged:
        logger.warning("%s stopped after %i iterations without reaching its tolerance", style.method("ipfp"), cfg.max_iters)
    logger.detail("ipfp n=%i: %i iterations, best score %s", n, trace.iters_run, style.value("%.6g" % best_value))
    state = MatchingState(best.as_matrix(), converged = converged, iters = trace.iters_run, trace = trace)
    return state, best

def solve(method, aff, cfg = None, tape = None, z0 = None):
    """Run the matching method named ``method`` on ``aff``.

    :param method: ``dpgm`` or one of `proxgm.baselines.METHODS`

    :param cfg: `proxgm.dpgm.SolverParams` for dpgm,
      `proxgm.baselines.BaselineConfig` otherwise (its ``method`` is
      overridden), defaults when None

    :param tape: optional `proxgm.grad.Tape`, refused for ipfp

    :param z0: initial state, ipfp only

    Returns ``(MatchingState, PermutationMatching)``; the state's
    ``trace`` holds the solver trace when there is one.
    """
    method = str(method).lower()
    if method == 'dpgm':
        result = dpgm_solve(aff, cfg or SolverParams(), tape = tape)
        result.z_final.trace = result.trace
        return result.z_final, result.matching
    if method not in METHODS:
        raise ConfigurationError("unknown matching method %r" % (method,))
    cfg = cfg.replace(method = method) if cfg is not None else BaselineConfig(method = method)
    if method == 'ipfp':
        if tape is not None:
            raise ConfigurationError("ipfp is not differentiable and cannot be recorded")
        return ipfp(aff, cfg, z0 = z0)
    return {'sm': spectral_match, 'rrwm': rrwm, 'gagm': gagm}[method](aff, cfg, tape = tape)
