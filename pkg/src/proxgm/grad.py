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

"""Reverse mode gradients through unrolled matching solvers.

A `proxgm.grad.Tape` is handed to a solver in place of the plain
`proxgm.ops.ArrayOps`: it evaluates the same operations and records
them. `proxgm.grad.dpgm_backward` then walks the record backwards and
returns the gradient of a scalar loss with respect to the node
affinities u and to every stored pairwise weight.

Only solves run with a fixed number of iterations (solver and
Sinkhorn) can be differentiated. Clamped values (the log floor)
propagate a zero gradient.
"""

import numpy as np

from .baselines import BaselineConfig, solve
from .config import configuration
from .dpgm import SolverParams
from .exception import ConfigurationError, InvalidInput, InvalidTape, SizeLimitExceeded
from .log import logger, style
from .ops import ArrayOps

class TapeNode(object):

    """One recorded value: the result of operation ``op`` on ``inputs``."""

    __slots__ = ('index', 'value', 'op', 'inputs', 'saved')

    def __init__(self, index, value, op, inputs = (), saved = None):
        self.index = index
        self.value = value
        self.op = op
        self.inputs = inputs
        self.saved = saved

    def __repr__(self):
        return "TapeNode(%i, %s)" % (self.index, self.op)

class Tape(ArrayOps):

    """Records the elementary operations of one forward solve.

    Handles are `proxgm.grad.TapeNode` objects. The node affinity
    vector returned by `proxgm.grad.Tape.unary` is the single leaf
    gradients flow to, together with the pairwise weights used by
    every ``pmatvec``.
    """

    recording = True

    def __init__(self, aff):
        super(Tape, self).__init__(aff)
        self.nodes = []
        self.method = None
        self.fixed = None
        self.output = None
        self.__u = None

    def declare_unroll(self, method, fixed):
        """Called by a solver before recording; ``fixed`` tells whether its iteration counts were fixed."""
        if self.method is not None:
            raise InvalidTape("tape already holds a %s solve" % (self.method,))
        self.method = method
        self.fixed = bool(fixed)

    def set_output(self, h):
        self.output = h

    def __len__(self):
        return len(self.nodes)

    def __repr__(self):
        return "Tape(method=%r, fixed=%r, nodes=%i)" % (self.method, self.fixed, len(self.nodes))

    def _push(self, value, op, inputs = (), saved = None):
        node = TapeNode(len(self.nodes), value, op, inputs, saved)
        self.nodes.append(node)
        return node

    def _node(self, h):
        if isinstance(h, TapeNode):
            return h
        return self.const(h)

    def value(self, h):
        return h.value if isinstance(h, TapeNode) else h

    def unary(self):
        if self.__u is None:
            self.__u = self._push(self.aff.u, 'unary')
        return self.__u

    def const(self, array):
        return self._push(np.asarray(array, dtype = float), 'const')

    def pmatvec(self, x):
        x = self._node(x)
        return self._push(self.aff.pairwise_matvec(x.value), 'pmatvec', (x,))

    def add(self, a, b):
        a, b = self._node(a), self._node(b)
        return self._push(a.value + b.value, 'add', (a, b))

    def mul(self, a, b):
        a, b = self._node(a), self._node(b)
        return self._push(a.value * b.value, 'mul', (a, b))

    def scale(self, a, c):
        a = self._node(a)
        return self._push(c * a.value, 'scale', (a,), c)

    def lincomb(self, a, ca, b, cb):
        a, b = self._node(a), self._node(b)
        return self._push(ca * a.value + cb * b.value, 'lincomb', (a, b), (ca, cb))

    def exp(self, a):
        a = self._node(a)
        return self._push(np.exp(a.value), 'exp', (a,))

    def log(self, a, floor):
        a = self._node(a)
        return self._push(np.log(np.maximum(a.value, floor)), 'log', (a,), floor)

    def shift_max(self, a):
        a = self._node(a)
        k = int(np.argmax(a.value))
        return self._push(a.value - a.value[k], 'shift_max', (a,), k)

    def add_floor(self, a, eps):
        a = self._node(a)
        return self._push(a.value + eps, 'add_floor', (a,))

    def row_normalize(self, a):
        a = self._node(a)
        m = a.value.reshape(self.n, self.n)
        r = m.sum(axis = 1, keepdims = True)
        return self._push((m / r).ravel(), 'row_normalize', (a,), r)

    def col_normalize(self, a):
        a = self._node(a)
        m = a.value.reshape(self.n, self.n)
        c = m.sum(axis = 0, keepdims = True)
        return self._push((m / c).ravel(), 'col_normalize', (a,), c)

    def row_log_normalize(self, a):
        a = self._node(a)
        return self._push(ArrayOps.row_log_normalize(self, a.value), 'row_log_normalize', (a,))

    def col_log_normalize(self, a):
        a = self._node(a)
        return self._push(ArrayOps.col_log_normalize(self, a.value), 'col_log_normalize', (a,))

    def l1_normalize(self, a):
        a = self._node(a)
        s = a.value.sum()
        return self._push(a.value / s, 'l1_normalize', (a,), s)

    def l2_normalize(self, a):
        a = self._node(a)
        s = np.sqrt(np.dot(a.value, a.value))
        return self._push(a.value / s, 'l2_normalize', (a,), s)

    def max_normalize(self, a):
        a = self._node(a)
        k = int(np.argmax(a.value))
        return self._push(a.value / a.value[k], 'max_normalize', (a,), k)

def _input_grads(tape, node, g, dw):
    # gradients of the node inputs given the gradient g of its value
    op = node.op
    y = node.value
    n = tape.n
    if op == 'pmatvec':
        x = node.inputs[0].value
        dw += tape.aff.pairwise_grad(g, x)
        return (tape.aff.pairwise_matvec(g),)
    if op == 'add':
        return (g, g)
    if op == 'mul':
        a, b = node.inputs
        return (g * b.value, g * a.value)
    if op == 'scale':
        return (node.saved * g,)
    if op == 'lincomb':
        ca, cb = node.saved
        return (ca * g, cb * g)
    if op == 'exp':
        return (g * y,)
    if op == 'log':
        a = node.inputs[0].value
        ga = np.zeros_like(g)
        live = a > node.saved
        ga[live] = g[live] / a[live]
        return (ga,)
    if op == 'shift_max':
        ga = g.copy()
        ga[node.saved] -= g.sum()
        return (ga,)
    if op == 'add_floor':
        return (g,)
    if op == 'row_normalize':
        gm = g.reshape(n, n)
        ym = y.reshape(n, n)
        return (((gm - (gm * ym).sum(axis = 1, keepdims = True)) / node.saved).ravel(),)
    if op == 'col_normalize':
        gm = g.reshape(n, n)
        ym = y.reshape(n, n)
        return (((gm - (gm * ym).sum(axis = 0, keepdims = True)) / node.saved).ravel(),)
    if op == 'row_log_normalize':
        gm = g.reshape(n, n)
        return ((gm - np.exp(y.reshape(n, n)) * gm.sum(axis = 1, keepdims = True)).ravel(),)
    if op == 'col_log_normalize':
        gm = g.reshape(n, n)
        return ((gm - np.exp(y.reshape(n, n)) * gm.sum(axis = 0, keepdims = True)).ravel(),)
    if op == 'l1_normalize':
        return ((g - np.dot(g, y)) / node.saved,)
    if op == 'l2_normalize':
        return ((g - y * np.dot(y, g)) / node.saved,)
    if op == 'max_normalize':
        a = node.inputs[0].value
        m = a[node.saved]
        ga = g / m
        ga[node.saved] -= np.dot(g, a) / (m * m)
        return (ga,)
    raise InvalidTape("no backward rule for operation %r" % (op,))

def dpgm_backward(tape, dLoss_dz):
    """Backpropagate a loss gradient through a recorded solve.

    :param tape: a `proxgm.grad.Tape` filled by a solve run with fixed
      iteration counts

    :param dLoss_dz: gradient of the loss with respect to the solver
      output, n×n or flattened

    Returns ``(dLoss_du, dLoss_dw)``: a length n² vector and one value
    per stored pairwise entry of the affinity (the same for both of
    its symmetric positions). Runs in time linear in the tape length.
    """
    if tape.method is None or tape.output is None:
        raise InvalidTape("tape holds no finished solve")
    if not tape.fixed:
        raise InvalidTape("%s solve was recorded with early stopping, rerun it with fixed_unroll" % (tape.method,))
    n2 = tape.n * tape.n
    g_out = np.array(dLoss_dz, dtype = float).ravel()
    if g_out.size != n2:
        raise InvalidInput("loss gradient of size %i for an output of size %i" % (g_out.size, n2))
    du = np.zeros(n2)
    dw = np.zeros(tape.aff.num_entries)
    grads = [None] * len(tape.nodes)
    grads[tape.output.index] = g_out
    for node in reversed(tape.nodes):
        g = grads[node.index]
        if g is None:
            continue
        grads[node.index] = None
        if node.op == 'unary':
            du += g
            continue
        if node.op == 'const':
            continue
        for inp, gi in zip(node.inputs, _input_grads(tape, node, g, dw)):
            if grads[inp.index] is None:
                grads[inp.index] = gi.copy()
            else:
                grads[inp.index] += gi
    logger.debug("backward through %i %s tape nodes", len(tape.nodes), tape.method)
    return du, dw

def _fixed_cfg(method, cfg):
    if method == 'dpgm':
        return (cfg or SolverParams()).replace(fixed_unroll = True)
    if method == 'ipfp':
        raise ConfigurationError("ipfp is not differentiable")
    return (cfg or BaselineConfig(method = method)).replace(method = method, fixed_unroll = True)

def record(method, aff, cfg = None):
    """Run a differentiable solver on a fresh `proxgm.grad.Tape`.

    The configuration is forced to a fixed unroll. Returns ``(tape,
    state, matching)``.
    """
    method = str(method).lower()
    cfg = _fixed_cfg(method, cfg)
    tape = Tape(aff)
    state, matching = solve(method, aff, cfg, tape = tape)
    return tape, state, matching

class LinearLoss(object):

    """Loss Σ R ⊙ z, its gradient is R."""

    def __init__(self, r):
        self.r = np.array(r, dtype = float)

    @classmethod
    def random(cls, n, seed = 0):
        return cls(np.random.default_rng(seed).standard_normal((n, n)))

    def value(self, z):
        return float(np.dot(self.r.ravel(), np.ravel(z)))

    def grad(self, z):
        return self.r.ravel()

class QuadraticMap(LinearLoss):

    """Linear loss of the map z = u ⊙ u + P u, used in place of a solver.

    The map is a polynomial of degree two in (u, P), on which central
    differences are exact up to rounding.
    """

    def forward(self, ops):
        u = ops.unary()
        return ops.add(ops.mul(u, u), ops.pmatvec(u))

def _evaluate(method, aff, cfg, loss_spec):
    if hasattr(loss_spec, 'forward'):
        z = loss_spec.forward(ArrayOps(aff))
    else:
        state, _ = solve(method, aff, cfg)
        z = state.vector
    return loss_spec.value(z)

def _tape_gradient(method, aff, cfg, loss_spec):
    if hasattr(loss_spec, 'forward'):
        tape = Tape(aff)
        tape.declare_unroll("polynomial", True)
        tape.set_output(loss_spec.forward(tape))
        z = tape.output.value
    else:
        tape = Tape(aff)
        state, _ = solve(method, aff, cfg, tape = tape)
        z = state.vector
    return dpgm_backward(tape, loss_spec.grad(z))

def finite_diff_check(aff, cfg, loss_spec, h, method = 'dpgm', samples = 20, seed = 0):
    """Compare tape gradients with central finite differences.

    :param loss_spec: a `proxgm.grad.LinearLoss`, or a
      `proxgm.grad.QuadraticMap` which bypasses the solver

    :param h: perturbation, in [1e-7, 1e-3]

    :param samples: number of coordinates of (u, weights) checked,
      drawn at random with ``seed`` among those at least h away from
      zero (u and the weights must stay nonnegative, and the dpgm
      start point depends on u being zero)

    Returns the worst relative error ``|fd − g| / max(|fd|, |g|, 1e-8)``.
    """
    if not 1e-7 <= h <= 1e-3:
        raise ConfigurationError("finite difference step must be in [1e-7, 1e-3], got %r" % (h,))
    method = str(method).lower()
    cfg = _fixed_cfg(method, cfg)
    du, dw = _tape_gradient(method, aff, cfg, loss_spec)
    u = aff.u
    w = aff.weights
    coords = np.concatenate([u, w])
    eligible = np.flatnonzero(coords >= h)
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(eligible, size = min(samples, eligible.size), replace = False))
    worst = 0.0
    for c in chosen:
        if c < u.size:
            plus = aff.with_unary(np.where(np.arange(u.size) == c, u + h, u))
            minus = aff.with_unary(np.where(np.arange(u.size) == c, u - h, u))
            g = du[c]
        else:
            k = c - u.size
            plus = aff.with_weights(np.where(np.arange(w.size) == k, w + h, w))
            minus = aff.with_weights(np.where(np.arange(w.size) == k, w - h, w))
            g = dw[k]
        fd = (_evaluate(method, plus, cfg, loss_spec) - _evaluate(method, minus, cfg, loss_spec)) / (2.0 * h)
        err = abs(fd - g) / max(abs(fd), abs(g), 1e-8)
        worst = max(worst, err)
    logger.detail("gradient check of %s on %i coordinates: max relative error %s",
                  style.method(method), chosen.size, style.value("%.3g" % worst))
    return worst

def expand_pairwise_gradient(aff, dw):
    """Dense symmetric n²×n² view of a per entry pairwise gradient.

    A stored entry is the value of both M[a, b] and M[b, a], and its
    full gradient is written at both positions: the upper triangle sums
    to ``dw``. The derivative with respect to a single position of an
    unconstrained M is half of it.
    """
    n2 = aff.n * aff.n
    limit = configuration['dense_max_n']
    if aff.n > limit:
        raise SizeLimitExceeded("expand_pairwise_gradient", aff.n, limit)
    dw = np.asarray(dw, dtype = float)
    if dw.size != aff.num_entries:
        raise InvalidInput("%i gradient values for %i pairwise entries" % (dw.size, aff.num_entries))
    g = np.zeros((n2, n2))
    pairs = aff.pairs
    a = pairs[:, 0] * aff.n + pairs[:, 1]
    b = pairs[:, 2] * aff.n + pairs[:, 3]
    np.add.at(g, (a, b), dw)
    np.add.at(g, (b, a), dw)
    return g
