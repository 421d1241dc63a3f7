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

"""Elementary operations the iterative solvers are made of.

Solvers are written once against `proxgm.ops.ArrayOps`. Handles
returned by its methods are plain numpy vectors of length n² (row-major
n×n matrices). `proxgm.grad.Tape` subclasses it, returning handles
that also remember how they were computed.
"""

import numpy as np
from scipy.special import logsumexp

class ArrayOps(object):

    """Direct numpy evaluation of the solver operations of one affinity."""

    recording = False

    def __init__(self, aff = None, n = None):
        """
        :param aff: the `proxgm.core.AffinityDecomposition` operated on

        :param n: matrix size, when there is no affinity (plain
          Sinkhorn projections)
        """
        self.aff = aff
        self.n = aff.n if aff is not None else int(n)

    def value(self, h):
        return h

    def unary(self):
        """Handle on the node affinity vector u."""
        return self.aff.u

    def const(self, array):
        return np.asarray(array, dtype = float)

    def pmatvec(self, x):
        """P x."""
        return self.aff.pairwise_matvec(x)

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def scale(self, a, c):
        return c * a

    def lincomb(self, a, ca, b, cb):
        """ca·a + cb·b."""
        return ca * a + cb * b

    def exp(self, a):
        return np.exp(a)

    def log(self, a, floor):
        """log(max(a, floor))."""
        return np.log(np.maximum(a, floor))

    def shift_max(self, a):
        """a − max(a)."""
        return a - a.max()

    def add_floor(self, a, eps):
        return a + eps

    def row_normalize(self, a):
        m = a.reshape(self.n, self.n)
        return (m / m.sum(axis = 1, keepdims = True)).ravel()

    def col_normalize(self, a):
        m = a.reshape(self.n, self.n)
        return (m / m.sum(axis = 0, keepdims = True)).ravel()

    def row_log_normalize(self, a):
        """Row normalization of exp(a), in the log domain."""
        m = a.reshape(self.n, self.n)
        return (m - logsumexp(m, axis = 1, keepdims = True)).ravel()

    def col_log_normalize(self, a):
        m = a.reshape(self.n, self.n)
        return (m - logsumexp(m, axis = 0, keepdims = True)).ravel()

    def l1_normalize(self, a):
        return a / a.sum()

    def l2_normalize(self, a):
        return a / np.sqrt(np.dot(a, a))

    def max_normalize(self, a):
        return a / a.max()

def stochastic_deviation(v, n):
    """Largest distance of a row or column sum of the n×n matrix v to 1."""
    m = np.reshape(v, (n, n))
    return float(max(np.abs(m.sum(axis = 1) - 1.0).max(),
                     np.abs(m.sum(axis = 0) - 1.0).max()))
