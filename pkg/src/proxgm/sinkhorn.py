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

"""Sinkhorn-Knopp projection onto doubly stochastic matrices."""

import numpy as np

from .config import default_sinkhorn_params, make_params
from .core import MatchingState
from .exception import ConfigurationError, InvalidInput
from .log import logger, style
from .ops import ArrayOps, stochastic_deviation

class SinkhornConfig(object):

    """Parameters of a standalone Sinkhorn projection.

    Defaults come from `proxgm.config.default_sinkhorn_params`:
    ``max_iters`` (1000), ``tol`` on the row / column sum deviation
    (1e-9) and ``epsilon`` added to every input entry (1e-30).
    """

    def __init__(self, **params):
        p = make_params(params, default_sinkhorn_params)
        self.max_iters = int(p['max_iters'])
        self.tol = float(p['tol'])
        self.epsilon = float(p['epsilon'])
        if self.max_iters < 1:
            raise ConfigurationError("sinkhorn max_iters must be >= 1, got %r" % (self.max_iters,))
        if not self.tol > 0:
            raise ConfigurationError("sinkhorn tol must be > 0, got %r" % (self.tol,))
        if self.epsilon < 0:
            raise ConfigurationError("sinkhorn epsilon must be >= 0, got %r" % (self.epsilon,))

    def replace(self, **params):
        d = {'max_iters': self.max_iters, 'tol': self.tol, 'epsilon': self.epsilon}
        d.update(params)
        return SinkhornConfig(**d)

    def __repr__(self):
        return "SinkhornConfig(max_iters=%i, tol=%r, epsilon=%r)" % (self.max_iters, self.tol, self.epsilon)

def project(ops, x, max_iters, tol, epsilon, fixed = False):
    """Alternate row then column normalizations of a handle.

    :param ops: a `proxgm.ops.ArrayOps` (or a recording tape)

    :param x: handle on a nonnegative n×n matrix, flattened

    :param fixed: if True, run exactly ``max_iters`` sweeps; otherwise
      stop as soon as the deviation is below ``tol``

    Returns ``(handle, deviation, sweeps, converged)``.
    """
    h = ops.add_floor(x, epsilon) if epsilon > 0 else x
    deviation = np.inf
    sweeps = 0
    for sweeps in range(1, max_iters + 1):
        h = ops.row_normalize(h)
        h = ops.col_normalize(h)
        if not fixed:
            deviation = stochastic_deviation(ops.value(h), ops.n)
            if deviation <= tol:
                break
    if fixed:
        deviation = stochastic_deviation(ops.value(h), ops.n)
    return h, deviation, sweeps, deviation <= tol

def log_project(ops, logits, max_iters, tol, fixed = False):
    """`proxgm.sinkhorn.project` of exp(logits), run in the log domain.

    Entries too small to be represented after exp keep their ratios,
    so strongly peaked kernels do not collapse to ties. Returns
    ``(handle on the projected matrix, deviation, sweeps, converged)``.
    """
    h = logits
    deviation = np.inf
    sweeps = 0
    for sweeps in range(1, max_iters + 1):
        h = ops.col_log_normalize(ops.row_log_normalize(h))
        if not fixed:
            deviation = stochastic_deviation(np.exp(ops.value(h)), ops.n)
            if deviation <= tol:
                break
    if fixed:
        deviation = stochastic_deviation(np.exp(ops.value(h)), ops.n)
    return ops.exp(h), deviation, sweeps, deviation <= tol

def sinkhorn_normalize(m, cfg = None):
    """Scale a nonnegative square matrix to a doubly stochastic one.

    :param m: n×n array-like, no negative entry

    :param cfg: a `proxgm.sinkhorn.SinkhornConfig`, defaults to the
      standalone settings

    The returned `proxgm.core.MatchingState` carries the final
    deviation and a ``converged`` flag; missing the tolerance is
    logged as a warning, not raised.
    """
    cfg = cfg or SinkhornConfig()
    m = np.array(m, dtype = float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInput("sinkhorn_normalize needs a square matrix, got shape %s" % (m.shape,))
    if not np.all(np.isfinite(m)):
        raise InvalidInput("sinkhorn_normalize input holds NaN or Inf")
    if np.any(m < 0):
        raise InvalidInput("sinkhorn_normalize input has negative entries")
    floored = m + cfg.epsilon
    if np.any(floored.sum(axis = 1) <= 0) or np.any(floored.sum(axis = 0) <= 0):
        raise InvalidInput("sinkhorn_normalize input has an all-zero row or column")
    n = m.shape[0]
    h, deviation, sweeps, converged = project(ArrayOps(n = n), m.ravel(), cfg.max_iters, cfg.tol, cfg.epsilon)
    if not converged:
        logger.warning("sinkhorn did not reach tol %g in %i sweeps (deviation %s)",
                       cfg.tol, sweeps, style.value("%.3g" % deviation))
    return MatchingState(h.reshape(n, n), deviation = deviation, converged = converged, iters = sweeps)
