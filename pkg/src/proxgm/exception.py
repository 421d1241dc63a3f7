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

class ProxgmError(Exception):
    """Base class of all errors raised by proxgm."""

    def __init__(self, message):
        """:param message: human readable description"""
        super(ProxgmError, self).__init__(message)
        self.message = message
        """human readable description"""

    def __str__(self):
        return "<%s> - %s" % (self.__class__.__name__, self.message)

class InvalidInput(ProxgmError, ValueError):
    """Raised when an argument violates the invariants of its type."""

class ConfigurationError(ProxgmError, ValueError):
    """Raised when a parameter set or an experiment configuration is invalid."""

class SizeLimitExceeded(ProxgmError):
    """Raised when an operation is asked for a size it refuses to handle."""

    def __init__(self, what, n, limit):
        """
        :param what: name of the refused operation

        :param n: requested size

        :param limit: largest accepted size
        """
        super(SizeLimitExceeded, self).__init__(
            "%s refused for n = %i (limit %i)" % (what, n, limit))
        self.n = n
        """requested size"""
        self.limit = limit
        """largest accepted size"""

class NumericalOverflow(ProxgmError):
    """Raised when an exponential step produces non finite values."""

    def __init__(self, where, lambda_=None, beta=None):
        """
        :param where: name of the step that overflowed

        :param lambda_: entropy weight in use, if relevant

        :param beta: proximal weight in use, if relevant
        """
        msg = "non finite exponent in %s" % (where,)
        if lambda_ is not None:
            msg += " (lambda=%r, beta=%r): use a larger lambda or a smaller beta" % (lambda_, beta)
        super(NumericalOverflow, self).__init__(msg)
        self.lambda_ = lambda_
        self.beta = beta

class InvalidTape(ProxgmError):
    """Raised when a `proxgm.grad.Tape` cannot be differentiated.

    A tape recorded while early stopping was allowed does not
    describe a smooth map.
    """

class TrainingDiverged(ProxgmError):
    """Raised when the training loss becomes non finite."""

    def __init__(self, epoch, batch, loss):
        """
        :param epoch: epoch index

        :param batch: batch index inside the epoch

        :param loss: offending loss value
        """
        super(TrainingDiverged, self).__init__(
            "loss is %r at epoch %i, batch %i: lower the learning rate" % (loss, epoch, batch))
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
