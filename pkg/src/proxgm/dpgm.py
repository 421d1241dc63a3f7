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

"""Proximal graph matching solver.

Each iteration takes the closed-form minimizer of the linearized
entropic energy plus a KL proximity term to the current iterate:

  z̃ = exp[ β/(1+λβ) · (u + P z_t) + 1/(1+λβ) · log z_t ]

and projects it back with a fixed-order Sinkhorn projection. The
exponent is shifted by its maximum before exp, which the projection
cancels exactly.

A free running solve starts at temperature λ and lowers it
geometrically to a floor, holding λβ fixed, so that the iterates
sharpen towards a permutation. Fixed unrolls keep λ constant.
"""

import numpy as np

from .config import default_solver_params, make_params
from .core import MatchingState, discretize, relaxed_objective, _as_matrix
from .exception import ConfigurationError, InvalidInput, NumericalOverflow
from .log import logger, style
from .ops import ArrayOps
from .sinkhorn import project

class SolverParams(object):

    """Parameters of `proxgm.dpgm.dpgm_solve`.

    Built over `proxgm.config.default_solver_params`, see there for
    the meaning of each key. ``beta`` may be a list, read as a per
    iteration schedule whose last value is repeated. A free running
    solve lowers the temperature by ``lambda_decay`` each iteration,
    see `proxgm.dpgm.SolverParams.schedule_at`.
    """

    def __init__(self, **params):
        p = make_params(params, default_solver_params)
        self.lambda_ = float(p['lambda_'])
        self.lambda_decay = float(p['lambda_decay'])
        self.lambda_min = float(p['lambda_min'])
        if isinstance(p['beta'], (list, tuple)):
            self.beta = tuple(float(b) for b in p['beta'])
            betas = self.beta
        else:
            self.beta = float(p['beta'])
            betas = (self.beta,)
        self.max_iters = int(p['max_iters'])
        self.tol = float(p['tol'])
        self.sinkhorn_iters = int(p['sinkhorn_iters'])
        self.sinkhorn_tol = float(p['sinkhorn_tol'])
        self.epsilon_log = float(p['epsilon_log'])
        self.fixed_unroll = bool(p['fixed_unroll'])
        if not self.lambda_ > 0:
            raise ConfigurationError("lambda must be > 0, got %r" % (self.lambda_,))
        if not (0 < self.lambda_decay <= 1 and self.lambda_min > 0):
            raise ConfigurationError("lambda_decay must be in (0, 1] and lambda_min > 0, got %r and %r"
                                     % (self.lambda_decay, self.lambda_min))
        if len(betas) == 0 or not all(b > 0 for b in betas):
            raise ConfigurationError("beta must be > 0, got %r" % (p['beta'],))
        if self.max_iters < 1 or self.sinkhorn_iters < 1:
            raise ConfigurationError("max_iters and sinkhorn_iters must be >= 1")
        if not (self.tol > 0 and self.sinkhorn_tol > 0 and self.epsilon_log > 0):
            raise ConfigurationError("tol, sinkhorn_tol and epsilon_log must be > 0")

    def beta_at(self, t):
        """Proximal weight of iteration t."""
        if isinstance(self.beta, tuple):
            return self.beta[min(t, len(self.beta) - 1)]
        return self.beta

    def lambda_at(self, t):
        """Temperature of iteration t of a free running solve."""
        if self.fixed_unroll or self.lambda_decay == 1.0:
            return self.lambda_
        return max(min(self.lambda_min, self.lambda_), self.lambda_ * self.lambda_decay ** t)

    def schedule_at(self, t):
        """``(lambda, beta)`` of iteration t, beta rescaled so that their product follows the β schedule."""
        lam = self.lambda_at(t)
        return lam, self.beta_at(t) * (self.lambda_ / lam)

    def as_dict(self):
        return {'lambda_': self.lambda_,
                'lambda_decay': self.lambda_decay,
                'lambda_min': self.lambda_min,
                'beta': list(self.beta) if isinstance(self.beta, tuple) else self.beta,
                'max_iters': self.max_iters,
                'tol': self.tol,
                'sinkhorn_iters': self.sinkhorn_iters,
                'sinkhorn_tol': self.sinkhorn_tol,
                'epsilon_log': self.epsilon_log,
                'fixed_unroll': self.fixed_unroll}

    def replace(self, **params):
        d = self.as_dict()
        d.update(params)
        return SolverParams(**d)

    def __repr__(self):
        return "SolverParams(%s)" % (", ".join("%s=%r" % kv for kv in sorted(self.as_dict().items())),)

class SolverTrace(object):

    """Per iteration record of a solve.

    ``objective[t]`` is the entropic energy of the iterate produced by
    iteration t, ``delta_sq[t]`` and ``delta_inf[t]`` the squared 2-norm
    and the sup norm of its change. ``initial_objective`` is the energy
    of the starting point.
    """

    def __init__(self, initial_objective = None, lipschitz = None):
        self.objective = []
        self.delta_sq = []
        self.delta_inf = []
        self.deviation = []
        self.initial_objective = initial_objective
        self.lipschitz = lipschitz
        self.converged = False

    @property
    def iters_run(self):
        return len(self.objective)

    def append(self, objective, delta_sq, delta_inf, deviation):
        self.objective.append(objective)
        self.delta_sq.append(delta_sq)
        self.delta_inf.append(delta_inf)
        self.deviation.append(deviation)

    def __repr__(self):
        return "SolverTrace(iters_run=%i, converged=%r)" % (self.iters_run, self.converged)

class DpgmResult(object):

    def __init__(self, z_final, trace, matching):
        self.z_final = z_final
        self.trace = trace
        self.matching = matching

    def __repr__(self):
        return "DpgmResult(%r, %r)" % (self.trace, self.matching)

def lipschitz_bound(aff):
    """Upper bound |E1|·|E2| of the norm of the affinity matrix."""
    return float(aff.edges1.shape[0] * aff.edges2.shape[0])

def _init(ops, cfg):
    u = ops.unary()
    if np.any(ops.value(u) > 0):
        z, _, _, _ = project(ops, u, cfg.sinkhorn_iters, cfg.sinkhorn_tol, cfg.epsilon_log,
                             fixed = cfg.fixed_unroll)
        return z
    return ops.const(np.full(ops.n * ops.n, 1.0 / ops.n))

def _exponent(ops, z, cfg, beta, lam, algorithm_form):
    logz = ops.log(z, cfg.epsilon_log)
    if algorithm_form:
        x = ops.pmatvec(z)
        x = ops.add(x, ops.unary())
        return ops.lincomb(x, beta / (beta + 1.0), logz, 1.0 / (beta + 1.0))
    denominator = 1.0 + lam * beta
    return ops.lincomb(ops.add(ops.unary(), ops.pmatvec(z)), beta / denominator, logz, 1.0 / denominator)

def _step(ops, z, cfg, beta, lam = None, algorithm_form = False):
    lam = cfg.lambda_ if lam is None else lam
    x = _exponent(ops, z, cfg, beta, lam, algorithm_form)
    if not np.all(np.isfinite(ops.value(x))):
        raise NumericalOverflow("proximal step", lam, beta)
    x = ops.exp(ops.shift_max(x))
    return project(ops, x, cfg.sinkhorn_iters, cfg.sinkhorn_tol, cfg.epsilon_log,
                   fixed = cfg.fixed_unroll)

def init_state(aff, cfg = None):
    """Starting point: Sinkhorn projection of mat(u), or the uniform matrix when u = 0."""
    cfg = cfg or SolverParams()
    ops = ArrayOps(aff)
    z = _init(ops, cfg)
    return MatchingState(z.reshape(aff.n, aff.n))

def _check_state(z, aff):
    z = _as_matrix(z)
    if z.shape[0] != aff.n:
        raise InvalidInput("matching state of size %i for an affinity on %i nodes" % (z.shape[0], aff.n))
    return z.ravel()

def proximal_step(z_t, aff, cfg = None, t = 0):
    """One closed-form proximal update at temperature ``cfg.lambda_``,
    followed by the Sinkhorn projection.

    :param z_t: current `proxgm.core.MatchingState`

    :param t: iteration index, selects β in a schedule
    """
    cfg = cfg or SolverParams()
    z, deviation, sweeps, converged = _step(ArrayOps(aff), _check_state(z_t, aff), cfg, cfg.beta_at(t))
    return MatchingState(z.reshape(aff.n, aff.n), deviation = deviation, converged = converged, iters = sweeps)

def algorithm_step(z_t, aff, cfg = None, t = 0):
    """Same update as `proxgm.dpgm.proximal_step`, written as message
    passing, unary addition, local update β/(β+1)·X + 1/(β+1)·log z_t,
    then exp and projection.

    This form has no λ: it is the λ = 1 case.
    """
    cfg = cfg or SolverParams()
    if cfg.lambda_ != 1.0:
        raise ConfigurationError("algorithm_step is the lambda = 1 update, got lambda = %r" % (cfg.lambda_,))
    z, deviation, sweeps, converged = _step(ArrayOps(aff), _check_state(z_t, aff), cfg, cfg.beta_at(t),
                                            algorithm_form = True)
    return MatchingState(z.reshape(aff.n, aff.n), deviation = deviation, converged = converged, iters = sweeps)

def dpgm_solve(aff, cfg = None, tape = None):
    """Solve a matching problem with proximal steps.

    Iterates from `proxgm.dpgm.init_state` until the sup norm of the
    iterate change falls below ``cfg.tol`` or ``cfg.max_iters`` steps
    ran (always the latter when ``cfg.fixed_unroll``). Iteration t runs
    at the temperature and proximal weight of
    `proxgm.dpgm.SolverParams.schedule_at`; ``trace.objective[t]`` is
    the energy at that temperature.

    :param aff: a `proxgm.core.AffinityDecomposition`

    :param cfg: `proxgm.dpgm.SolverParams`

    :param tape: optional `proxgm.grad.Tape` recording the solve for
      `proxgm.grad.dpgm_backward`
    """
    cfg = cfg or SolverParams()
    ops = tape if tape is not None else ArrayOps(aff)
    if tape is not None:
        tape.declare_unroll("dpgm", cfg.fixed_unroll)
    n = aff.n
    z = _init(ops, cfg)
    trace = SolverTrace(initial_objective = relaxed_objective(aff, ops.value(z), cfg.lambda_),
                        lipschitz = lipschitz_bound(aff))
    deviation = None
    for t in range(cfg.max_iters):
        lam, beta = cfg.schedule_at(t)
        z_new, deviation, sweeps, _ = _step(ops, z, cfg, beta, lam)
        diff = ops.value(z_new) - ops.value(z)
        delta_inf = float(np.abs(diff).max())
        trace.append(relaxed_objective(aff, ops.value(z_new), lam),
                     float(np.dot(diff, diff)), delta_inf, deviation)
        logger.trace("iteration %i: lambda=%g beta=%g objective=%.12g delta_inf=%.3g sinkhorn sweeps=%i",
                     t, lam, beta, trace.objective[-1], delta_inf, sweeps)
        z = z_new
        if delta_inf < cfg.tol and not cfg.fixed_unroll:
            break
    trace.converged = trace.delta_inf[-1] < cfg.tol
    if tape is not None:
        tape.set_output(z)
    state = MatchingState(ops.value(z).reshape(n, n), deviation = deviation,
                          converged = trace.converged, iters = trace.iters_run)
    matching = discretize(state)
    logger.detail("dpgm n=%i: %i iterations, converged=%s, energy %s",
                  n, trace.iters_run, trace.converged, style.value("%.6g" % trace.objective[-1]))
    return DpgmResult(state, trace, matching)

class ConvergenceReport(object):

    """Running mean statistics of the squared iterate changes of a solve.

    - ``horizons``: T = 1, 2, 4, ... and the number of iterations run

    - ``running_mean``: mean of delta_sq over the first T iterations

    - ``slope``: least squares slope of log(running_mean) against log(T)

    - ``c0``: first iteration energy minus the best observed energy

    - ``monotone``: whether the running mean never increases

    - ``lipschitz`` and ``beta_limit``: |E1|·|E2| bound and the step
      size 2/L below which the descent argument applies (diagnostic)
    """

    def __init__(self, horizons, running_mean, slope, c0, monotone, lipschitz, final_delta_inf):
        self.horizons = horizons
        self.running_mean = running_mean
        self.slope = slope
        self.c0 = c0
        self.monotone = monotone
        self.lipschitz = lipschitz
        self.beta_limit = 2.0 / lipschitz if lipschitz else None
        self.final_delta_inf = final_delta_inf

    def to_string(self):
        lines = ["%-10s %s" % ("T", "mean |dz|^2")]
        for t, m in zip(self.horizons, self.running_mean):
            lines.append("%-10i %.6g" % (t, m))
        lines.append("slope %.4f, C0 %.6g, monotone %s" % (self.slope, self.c0, self.monotone))
        if self.lipschitz is not None:
            lines.append("L <= %g, beta limit %.3g" % (self.lipschitz, self.beta_limit or 0.0))
        return "\n".join(lines)

    def __repr__(self):
        return "ConvergenceReport(slope=%.4f, monotone=%r, c0=%.6g)" % (self.slope, self.monotone, self.c0)

def convergence_report(trace):
    """Summarize the decay of the iterate changes of a `proxgm.dpgm.SolverTrace`."""
    if trace.iters_run == 0:
        raise InvalidInput("empty trace")
    delta_sq = np.asarray(trace.delta_sq, dtype = float)
    means = np.cumsum(delta_sq) / np.arange(1, delta_sq.size + 1)
    horizons = []
    t = 1
    while t <= delta_sq.size:
        horizons.append(t)
        t *= 2
    if horizons[-1] != delta_sq.size:
        horizons.append(delta_sq.size)
    running = means[np.asarray(horizons) - 1]
    monotone = bool(np.all(running[1:] <= running[:-1] * (1.0 + 1e-12)))
    positive = running > 0
    if positive.sum() >= 2:
        slope = float(np.polyfit(np.log(np.asarray(horizons, dtype = float)[positive]),
                                 np.log(running[positive]), 1)[0])
    else:
        slope = 0.0
    objective = np.asarray(trace.objective, dtype = float)
    c0 = float(objective[0] - objective.min())
    if not monotone:
        logger.detail("running mean of squared iterate changes increases: %s", running.tolist())
    return ConvergenceReport(horizons, running.tolist(), slope, c0, monotone,
                             trace.lipschitz, float(trace.delta_inf[-1]))
