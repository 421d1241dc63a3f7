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

"""Learnable node affinities trained through an unrolled matching layer.

Node affinities are u[i, j] = exp(v1_iᵀ W v2_j) with a learnable D×D
matrix W; edge pair affinities exp((v1_iᵀ v2_j)(v1_i'ᵀ v2_j')) have no
parameter. A sample goes through node and edge affinities, a
differentiable solver run at fixed unroll depth, and a cross entropy
loss against its true matching. `proxgm.learn.train` runs minibatch
SGD on W with gradients from `proxgm.grad.dpgm_backward`.

Exponents are clipped at ``configuration['exponent_clip']`` before
exp; clipped entries get a zero gradient.
"""

import json

import numpy as np

from .baselines import BaselineConfig, solve
from .config import configuration, default_train_params, make_params
from .core import (AffinityDecomposition, GraphInstance, KeypointPairSample,
                   PermutationMatching, matching_accuracy, _as_matrix)
from .data import delaunay
from .dpgm import SolverParams
from .exception import ConfigurationError, InvalidInput, TrainingDiverged
from .grad import dpgm_backward, record
from .log import logger, style

LOSS_EPS = 1e-7
"""z is clamped to [LOSS_EPS, 1 − LOSS_EPS] inside the loss."""

LAYERS = ('dpgm', 'sm', 'rrwm', 'gagm')
"""Differentiable solvers usable as matching layer."""

class WeightMatrix(object):

    """The learnable D×D matrix W of the node affinity."""

    def __init__(self, w):
        w = np.array(w, dtype = float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise InvalidInput("W must be a square matrix, got shape %s" % (w.shape,))
        if not np.all(np.isfinite(w)):
            raise InvalidInput("W holds NaN or Inf")
        w.setflags(write = False)
        self.__w = w

    @classmethod
    def identity(cls, dim, init_scale = 1.0):
        """The diagonal initial guess ``init_scale`` · I."""
        return cls(init_scale * np.eye(dim))

    @property
    def W(self):
        return self.__w

    @property
    def dim(self):
        return self.__w.shape[0]

    def to_dict(self):
        return {"W": self.__w.tolist()}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(d["W"])
        except (KeyError, TypeError) as e:
            raise InvalidInput("malformed weight checkpoint: %r" % (e,))

    def __eq__(self, other):
        return isinstance(other, WeightMatrix) and np.array_equal(self.__w, other.W)

    def __ne__(self, other):
        return not self.__eq__(other)

    def __repr__(self):
        return "WeightMatrix(dim=%i, norm=%.4g)" % (self.dim, float(np.linalg.norm(self.__w)))

class TrainConfig(object):

    """Parameters of `proxgm.learn.train`.

    Built over `proxgm.config.default_train_params`. ``solver`` is the
    configuration of the matching layer; by default the defaults of
    ``method`` with ``unroll`` iterations and a fixed unroll.
    """

    def __init__(self, solver = None, **params):
        p = make_params(params, default_train_params)
        self.learning_rate = float(p['learning_rate'])
        self.epochs = int(p['epochs'])
        self.batch_size = int(p['batch_size'])
        self.rng_seed = int(p['rng_seed'])
        self.method = str(p['method']).lower()
        self.unroll = int(p['unroll'])
        self.init_scale = float(p['init_scale'])
        if not (np.isfinite(self.learning_rate) and self.learning_rate >= 0):
            raise ConfigurationError("learning_rate must be >= 0, got %r" % (self.learning_rate,))
        if self.epochs < 1 or self.batch_size < 1 or self.unroll < 1:
            raise ConfigurationError("epochs, batch_size and unroll must be >= 1")
        if self.method not in LAYERS:
            raise ConfigurationError("matching layer must be one of %s, got %r" % (", ".join(LAYERS), self.method))
        if not self.init_scale > 0:
            raise ConfigurationError("init_scale must be > 0, got %r" % (self.init_scale,))
        if solver is None:
            if self.method == 'dpgm':
                solver = SolverParams(max_iters = self.unroll, fixed_unroll = True)
            else:
                solver = BaselineConfig(method = self.method, max_iters = self.unroll, fixed_unroll = True)
        self.solver = solver

    def as_dict(self):
        return {k: getattr(self, k) for k in default_train_params}

    def replace(self, **params):
        d = self.as_dict()
        d.update(params)
        return TrainConfig(**d)

    def __repr__(self):
        return "TrainConfig(%s)" % (", ".join("%s=%r" % kv for kv in sorted(self.as_dict().items())),)

def _check_dims(g1, g2, w = None):
    if g1.dim != g2.dim:
        raise InvalidInput("feature dimensions differ (%i != %i)" % (g1.dim, g2.dim))
    if w is not None and w.dim != g1.dim:
        raise InvalidInput("W is %i×%i for features of dimension %i" % (w.dim, w.dim, g1.dim))

def _node_exponents(g1, g2, w):
    _check_dims(g1, g2, w)
    s = g1.features.dot(w.W).dot(g2.features.T)
    clipped = s > configuration['exponent_clip']
    return np.where(clipped, configuration['exponent_clip'], s), clipped

def node_affinity(g1, g2, w):
    """u[i·n + j] = exp(v1_iᵀ W v2_j), exponent clipped."""
    s, _ = _node_exponents(g1, g2, w)
    return np.exp(s).ravel()

def edge_affinity(g1, g2):
    """Edge pair affinities of two graphs of equal size, with zero node affinity.

    For G1 edge (i, i') and G2 edge (j, j') with s = V1 V2ᵀ, the entry
    i -> j, i' -> j' weighs exp(s_ij · s_i'j') and i -> j', i' -> j
    weighs exp(s_ij' · s_i'j). Exponents above the clip are clipped;
    the raw exponents and the number of clipped ones are kept in the
    affinity ``info``.
    """
    _check_dims(g1, g2)
    if g1.n != g2.n:
        raise InvalidInput("graphs of %i and %i nodes, pad them first" % (g1.n, g2.n))
    s = g1.features.dot(g2.features.T)
    e1, e2 = g1.edges, g2.edges
    i, i2 = e1[:, 0][:, None], e1[:, 1][:, None]
    j, j2 = e2[:, 0][None, :], e2[:, 1][None, :]
    same = s[i, j] * s[i2, j2]
    cross = s[i, j2] * s[i2, j]
    clip = configuration['exponent_clip']
    clipped = int((same > clip).sum() + (cross > clip).sum())
    if clipped:
        logger.debug("%i edge affinity exponents clipped at %g", clipped, clip)
    return AffinityDecomposition.from_edge_pairs(
        g1.n, None, e1, e2, np.exp(np.minimum(same, clip)), np.exp(np.minimum(cross, clip)),
        info = {'raw_exponents': (same, cross), 'clipped': clipped})

def sample_affinity(sample, w, edges = None):
    """Full affinity of a sample: `proxgm.learn.edge_affinity` plus the node affinity of W."""
    if edges is None:
        edges = edge_affinity(sample.g1, sample.g2)
    return edges.with_unary(node_affinity(sample.g1, sample.g2, w))

def _clamped(z):
    z = _as_matrix(z)
    return np.clip(z, LOSS_EPS, 1.0 - LOSS_EPS), (z > LOSS_EPS) & (z < 1.0 - LOSS_EPS)

def _genuine_entries(n, mask):
    if mask is None:
        return np.ones((n, n), dtype = bool)
    return (~mask.rows)[:, None] & (~mask.cols)[None, :]

def cross_entropy_loss(z, truth, mask = None):
    """−Σ z*_ij log z_ij + (1 − z*_ij) log(1 − z_ij) over genuine entries.

    z* is the 0/1 matrix of ``truth``; z is clamped to [1e-7, 1 − 1e-7].

    >>> round(cross_entropy_loss(np.full((2, 2), 0.5), PermutationMatching.identity(2)), 12)
    2.77258872224
    """
    zc, _ = _clamped(z)
    if not isinstance(truth, PermutationMatching):
        truth = PermutationMatching(truth)
    t = truth.as_matrix()
    if t.shape != zc.shape:
        raise InvalidInput("truth on %i nodes for a state on %i nodes" % (truth.n, zc.shape[0]))
    terms = t * np.log(zc) + (1.0 - t) * np.log(1.0 - zc)
    return float(- terms[_genuine_entries(zc.shape[0], mask)].sum())

def cross_entropy_grad(z, truth, mask = None):
    """Gradient of `proxgm.learn.cross_entropy_loss` with respect to z, zero where the clamp is active."""
    zc, live = _clamped(z)
    if not isinstance(truth, PermutationMatching):
        truth = PermutationMatching(truth)
    t = truth.as_matrix()
    g = - (t / zc - (1.0 - t) / (1.0 - zc))
    return np.where(live & _genuine_entries(zc.shape[0], mask), g, 0.0)

def sample_gradient(sample, w, cfg, edges = None):
    """Loss of one sample and its gradient with respect to W.

    Returns ``(loss, dW, matching)``.
    """
    s, clipped = _node_exponents(sample.g1, sample.g2, w)
    if edges is None:
        edges = edge_affinity(sample.g1, sample.g2)
    u = np.exp(s)
    aff = edges.with_unary(u.ravel())
    tape, state, matching = record(cfg.method, aff, cfg.solver)
    loss = cross_entropy_loss(state, sample.truth, sample.mask)
    du, _ = dpgm_backward(tape, cross_entropy_grad(state, sample.truth, sample.mask))
    ds = np.where(clipped, 0.0, du.reshape(u.shape) * u)
    dw = sample.g1.features.T.dot(ds).dot(sample.g2.features)
    return loss, dw, matching

def _check_dataset(dataset):
    if not dataset:
        raise InvalidInput("empty training set")
    dims = set(s.g1.dim for s in dataset)
    if len(dims) != 1:
        raise InvalidInput("samples have different feature dimensions: %s" % (sorted(dims),))
    if any(s.truth is None for s in dataset):
        raise InvalidInput("training samples need a true matching")
    return dims.pop()

def evaluate(dataset, w, cfg = None):
    """Mean matching accuracy of the layer with weights W over a dataset."""
    cfg = cfg or TrainConfig()
    if not dataset:
        return None
    accuracies = []
    for sample in dataset:
        _, matching = solve(cfg.method, sample_affinity(sample, w), cfg.solver)
        accuracies.append(matching_accuracy(matching, sample.truth, sample.mask))
    return float(np.mean(accuracies))

def train(dataset, cfg = None, heldout = None, w0 = None):
    """Minibatch SGD on W.

    Each epoch visits the samples in an order drawn from
    ``cfg.rng_seed``; each batch moves W by −learning_rate times the
    mean gradient of its samples.

    Returns ``(WeightMatrix, curve)``, curve holding per epoch dicts
    with ``epoch``, ``mean_loss``, ``train_accuracy`` (of the matchings
    computed during the epoch) and ``heldout_accuracy`` (None without
    ``heldout``).
    """
    cfg = cfg or TrainConfig()
    dim = _check_dataset(dataset)
    w = w0 if w0 is not None else WeightMatrix.identity(dim, cfg.init_scale)
    edges = [edge_affinity(s.g1, s.g2) for s in dataset]
    rng = np.random.default_rng(cfg.rng_seed)
    curve = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(dataset))
        losses = []
        accuracies = []
        for b, start in enumerate(range(0, len(order), cfg.batch_size)):
            batch = order[start:start + cfg.batch_size]
            dw = np.zeros((dim, dim))
            for k in batch:
                loss, g, matching = sample_gradient(dataset[k], w, cfg, edges[k])
                if not np.isfinite(loss) or not np.all(np.isfinite(g)):
                    raise TrainingDiverged(epoch, b, loss)
                losses.append(loss)
                accuracies.append(matching_accuracy(matching, dataset[k].truth, dataset[k].mask))
                dw += g
            w = WeightMatrix(w.W - cfg.learning_rate * (dw / len(batch)))
        row = {'epoch': epoch,
               'mean_loss': float(np.mean(losses)),
               'train_accuracy': float(np.mean(accuracies)),
               'heldout_accuracy': evaluate(heldout, w, cfg) if heldout else None}
        curve.append(row)
        logger.info("epoch %i: mean loss %s, train accuracy %.3f%s", epoch,
                    style.value("%.6g" % row['mean_loss']), row['train_accuracy'],
                    "" if row['heldout_accuracy'] is None else ", held-out accuracy %.3f" % row['heldout_accuracy'])
    return w, curve

def gen_metric_dataset(count, n_in = 15, sigma = 0.5, dim = 20, seed = 0):
    """Synthetic keypoint pairs whose features are related by a hidden map.

    A hidden matrix H with gaussian entries of variance 1/dim is drawn
    once. For each pair, node features v1 are unit gaussian vectors,
    their correspondents v2 = normalize(H v1 + noise), noise being
    gaussian of standard deviation sigma/√dim per coordinate. Both
    graphs share the Delaunay triangulation of random 2-D positions;
    G2 is shuffled.
    """
    if count < 1 or n_in < 3 or dim < 1 or sigma < 0:
        raise ConfigurationError("need count >= 1, n_in >= 3, dim >= 1 and sigma >= 0")
    rng = np.random.default_rng(seed)
    hidden = rng.normal(0.0, 1.0 / np.sqrt(dim), (dim, dim))
    samples = []
    for _ in range(count):
        edges = delaunay(rng.uniform(0.0, 1.0, (n_in, 2))).tolist()
        v1 = rng.normal(size = (n_in, dim))
        v1 /= np.linalg.norm(v1, axis = 1, keepdims = True)
        v2 = v1.dot(hidden.T) + rng.normal(0.0, sigma / np.sqrt(dim), (n_in, dim))
        v2 /= np.linalg.norm(v2, axis = 1, keepdims = True)
        perm = rng.permutation(n_in)
        g1 = GraphInstance(v1, edges)
        g2 = GraphInstance(v2, edges).relabel(perm)
        samples.append(KeypointPairSample(g1, g2, PermutationMatching(perm)))
    logger.debug("generated %i metric pairs (n=%i, dim=%i, sigma=%g)", count, n_in, dim, sigma)
    return samples

def save_weights(w, path):
    """Write W as ``{"W": [[...]]}``."""
    with open(path, "w") as f:
        json.dump(w.to_dict(), f)

def load_weights(path):
    with open(path) as f:
        return WeightMatrix.from_dict(json.load(f))
