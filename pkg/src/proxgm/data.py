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

"""Instance generators, geometry, handcrafted affinities and JSON I/O.

Two families of synthetic instance pairs are generated:

- Erdos-Renyi pairs (`proxgm.data.gen_er_pair`): G2 copies the
  topology of G1, with noisy inlier features, redrawn outlier features
  and shuffled node order.

- rotating point clouds (`proxgm.data.gen_point_pair`): two frames of
  2-D points, the second rotated and jittered, both connected by
  Delaunay triangulation.

Generators are pure functions of their spec, whose ``rng_seed`` seeds
a `numpy.random.Generator`.
"""

import itertools
import json

import networkx as nx
import numpy as np

from .config import configuration, default_point_cloud_params, default_synthetic_params, make_params
from .core import AffinityDecomposition, GraphInstance, KeypointPairSample, Mask, PermutationMatching
from .exception import ConfigurationError, InvalidInput
from .log import logger

SYNTHETIC_SCALE = 2900.0
"""Default kernel scale of `proxgm.data.synthetic_affinity`."""

HOUSE_SCALE = 2500.0
"""Default kernel scale of `proxgm.data.house_affinity`."""

class SyntheticSpec(object):

    """Parameters of an Erdos-Renyi instance pair.

    Built over `proxgm.config.default_synthetic_params`.
    """

    def __init__(self, **params):
        p = make_params(params, default_synthetic_params)
        self.n_in = int(p['n_in'])
        self.n_out = int(p['n_out'])
        self.p_edge = float(p['p_edge'])
        self.sigma = float(p['sigma'])
        self.dim = int(p['dim'])
        self.rng_seed = int(p['rng_seed'])
        if self.n_in < 1 or self.n_out < 0:
            raise ConfigurationError("need n_in >= 1 and n_out >= 0, got %i and %i" % (self.n_in, self.n_out))
        if not 0 < self.p_edge <= 1:
            raise ConfigurationError("p_edge must be in (0, 1], got %r" % (self.p_edge,))
        if self.sigma < 0:
            raise ConfigurationError("sigma must be >= 0, got %r" % (self.sigma,))
        if self.dim < 1:
            raise ConfigurationError("feature dimension must be >= 1, got %i" % (self.dim,))

    @property
    def n(self):
        return self.n_in + self.n_out

    def as_dict(self):
        return {k: getattr(self, k) for k in default_synthetic_params}

    def replace(self, **params):
        d = self.as_dict()
        d.update(params)
        return SyntheticSpec(**d)

    def __repr__(self):
        return "SyntheticSpec(%s)" % (", ".join("%s=%r" % kv for kv in sorted(self.as_dict().items())),)

class PointCloudSpec(object):

    """Parameters of a rotating point cloud pair.

    Built over `proxgm.config.default_point_cloud_params`. Only
    ``inlier_count`` of the ``n_points`` points of each frame
    correspond.
    """

    def __init__(self, **params):
        p = make_params(params, default_point_cloud_params)
        self.n_points = int(p['n_points'])
        self.inlier_count = int(p['inlier_count'])
        self.frame_gap = float(p['frame_gap'])
        self.extent = float(p['extent'])
        self.rng_seed = int(p['rng_seed'])
        if self.n_points < 3:
            raise ConfigurationError("a point cloud needs at least 3 points, got %i" % (self.n_points,))
        if not 0 <= self.inlier_count <= self.n_points:
            raise ConfigurationError("inlier_count must be in [0, n_points], got %i" % (self.inlier_count,))
        if self.frame_gap < 0 or not self.extent > 0:
            raise ConfigurationError("frame_gap must be >= 0 and extent > 0")

    def as_dict(self):
        return {k: getattr(self, k) for k in default_point_cloud_params}

    def replace(self, **params):
        d = self.as_dict()
        d.update(params)
        return PointCloudSpec(**d)

    def __repr__(self):
        return "PointCloudSpec(%s)" % (", ".join("%s=%r" % kv for kv in sorted(self.as_dict().items())),)

def _shuffled_copy(g1, features2, perm, outliers):
    # G2 node perm[i] is the copy of G1 node i
    n = g1.n
    g2 = GraphInstance(features2, g1.edges.tolist()).relabel(perm)
    rows = np.zeros(n, dtype = bool)
    rows[outliers] = True
    cols = np.zeros(n, dtype = bool)
    cols[perm[outliers]] = True
    return g2, Mask(rows, cols)

def gen_er_pair(spec):
    """Generate an Erdos-Renyi instance pair.

    G1 has ``n_in + n_out`` nodes, edges drawn with probability
    ``p_edge`` and features uniform on [0, 1]^dim; its last ``n_out``
    nodes are the outliers. G2 copies the topology, adds N(0, sigma²)
    noise to inlier features, redraws outlier features and is
    shuffled. Returns ``(sample, truth)``, truth mapping node i of G1
    to its copy in G2.
    """
    rng = np.random.default_rng(spec.rng_seed)
    n = spec.n
    graph = nx.gnp_random_graph(n, spec.p_edge, seed = int(rng.integers(2 ** 31)))
    features1 = rng.uniform(0.0, 1.0, (n, spec.dim))
    features2 = features1.copy()
    features2[:spec.n_in] += rng.normal(0.0, spec.sigma, (spec.n_in, spec.dim))
    features2[spec.n_in:] = rng.uniform(0.0, 1.0, (spec.n_out, spec.dim))
    perm = rng.permutation(n)
    g1 = GraphInstance(features1, graph.edges())
    g2, mask = _shuffled_copy(g1, features2, perm, np.arange(spec.n_in, n))
    truth = PermutationMatching(perm)
    logger.debug("er pair %r: %i edges", spec, g1.num_edges)
    return KeypointPairSample(g1, g2, truth, mask), truth

def _edge_lengths(g):
    f = g.features
    e = g.edges
    return np.linalg.norm(f[e[:, 0]] - f[e[:, 1]], axis = 1)

def _distance_kernel_affinity(sample, scale, kernel):
    if not scale > 0:
        raise ConfigurationError("kernel scale must be > 0, got %r" % (scale,))
    d1 = _edge_lengths(sample.g1)
    d2 = _edge_lengths(sample.g2)
    weights = np.exp(- (d1[:, None] - d2[None, :]) ** 2 / scale)
    return AffinityDecomposition.from_edge_pairs(sample.n, None, sample.g1.edges, sample.g2.edges,
                                                 weights, weights,
                                                 info = {'kernel': kernel, 'scale': scale})

def synthetic_affinity(sample, scale = SYNTHETIC_SCALE):
    """Edge pair affinity exp(−(d_ii' − d_jj')² / scale), no node affinity.

    d is the euclidean distance between the features of the two
    endpoints of an edge. Every (G1 edge, G2 edge) couple gets the
    same weight in both orientations.
    """
    return _distance_kernel_affinity(sample, scale, 'synthetic')

def house_affinity(sample, scale = HOUSE_SCALE):
    """Same kernel as `proxgm.data.synthetic_affinity` on 2-D point coordinates."""
    if sample.g1.dim != 2:
        raise InvalidInput("house affinity needs 2-D point coordinates, got dimension %i" % (sample.g1.dim,))
    return _distance_kernel_affinity(sample, scale, 'house')

def random_affinity(n, seed = 0, p_edge = 0.7, scale = 1.0, unary = True):
    """Small random affinity for solver and gradient checks.

    Kernel affinity of a noisy Erdos-Renyi pair (sigma 0.3, dim 4,
    sharp kernel ``scale``), plus node affinities uniform in [0.1, 1]
    when ``unary``.
    """
    sample, _ = gen_er_pair(SyntheticSpec(n_in = n, p_edge = p_edge, sigma = 0.3, dim = 4, rng_seed = seed))
    aff = synthetic_affinity(sample, scale = scale)
    if unary:
        aff = aff.with_unary(np.random.default_rng(seed).uniform(0.1, 1.0, n * n))
    return aff

def _orientation(p, a, b, c):
    return ((p[b, 0] - p[a, 0]) * (p[c, 1] - p[a, 1])
            - (p[b, 1] - p[a, 1]) * (p[c, 0] - p[a, 0]))

def _properly_cross(p, e, f):
    if len(set(e) | set(f)) < 4:
        return False
    o1 = _orientation(p, e[0], e[1], f[0])
    o2 = _orientation(p, e[0], e[1], f[1])
    o3 = _orientation(p, f[0], f[1], e[0])
    o4 = _orientation(p, f[0], f[1], e[1])
    return o1 * o2 < 0 and o3 * o4 < 0

def delaunay(points):
    """Delaunay edges of a set of 2-D points, by the empty circumcircle test.

    Every triangle whose circumcircle holds no other point strictly
    inside contributes its three edges. When several points are
    cocircular, crossing candidate edges are resolved by keeping them
    in increasing (lowest index, highest index) order, so that the
    diagonal incident to the lowest point index wins.

    Returns an array of shape (m, 2) of sorted edges ``(a, b)``, a < b.
    All collinear points yield the path along the line, with a warning.

    >>> delaunay([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).tolist()
    [[0, 1], [0, 2], [0, 3], [1, 2], [2, 3]]
    """
    p = np.array(points, dtype = float)
    if p.ndim != 2 or p.shape[1] != 2:
        raise InvalidInput("delaunay needs 2-D points, got shape %s" % (p.shape,))
    n = p.shape[0]
    if n < 3:
        raise InvalidInput("delaunay needs at least 3 points, got %i" % (n,))
    if not np.all(np.isfinite(p)):
        raise InvalidInput("points must be finite")
    if np.unique(p, axis = 0).shape[0] != n:
        raise InvalidInput("duplicate points")
    tol = configuration['delaunay_tol']
    q = p - p.mean(axis = 0)
    q /= np.abs(q).max()
    triples = np.array(list(itertools.combinations(range(n), 3)), dtype = np.intp)
    a, b, c = q[triples[:, 0]], q[triples[:, 1]], q[triples[:, 2]]
    d = 2.0 * (a[:, 0] * (b[:, 1] - c[:, 1]) + b[:, 0] * (c[:, 1] - a[:, 1]) + c[:, 0] * (a[:, 1] - b[:, 1]))
    proper = np.abs(d) > tol
    if not np.any(proper):
        logger.warning("all %i points are collinear, connecting them as a path", n)
        direction = q[np.argmax(np.linalg.norm(q - q[0], axis = 1))] - q[0]
        order = np.argsort(q.dot(direction), kind = 'stable')
        path = np.sort(np.stack([order[:-1], order[1:]], axis = 1), axis = 1)
        return path[np.lexsort((path[:, 1], path[:, 0]))]
    triples, a, b, c, d = triples[proper], a[proper], b[proper], c[proper], d[proper]
    a2, b2, c2 = (a ** 2).sum(axis = 1), (b ** 2).sum(axis = 1), (c ** 2).sum(axis = 1)
    ux = (a2 * (b[:, 1] - c[:, 1]) + b2 * (c[:, 1] - a[:, 1]) + c2 * (a[:, 1] - b[:, 1])) / d
    uy = (a2 * (c[:, 0] - b[:, 0]) + b2 * (a[:, 0] - c[:, 0]) + c2 * (b[:, 0] - a[:, 0])) / d
    centers = np.stack([ux, uy], axis = 1)
    r2 = ((a - centers) ** 2).sum(axis = 1)
    dist2 = ((q[None, :, :] - centers[:, None, :]) ** 2).sum(axis = 2)
    empty = ~np.any(dist2 < r2[:, None] * (1.0 - tol), axis = 1)
    candidates = set()
    for i, j, k in triples[empty].tolist():
        candidates.update(((i, j), (i, k), (j, k)))
    accepted = []
    for e in sorted(candidates):
        if not any(_properly_cross(q, e, f) for f in accepted):
            accepted.append(e)
    logger.debug("delaunay of %i points: %i edges", n, len(accepted))
    return np.array(accepted, dtype = np.intp).reshape(-1, 2)

def gen_point_pair(spec):
    """Generate a rotating point cloud pair.

    Frame 1 holds ``n_points`` points uniform in the square of side
    ``extent``. Frame 2 rotates them by ``frame_gap``·π/6 around their
    centroid and adds gaussian jitter of standard deviation
    ``frame_gap``·extent/100; its last ``n_points − inlier_count``
    points are replaced by fresh ones (outliers). Both frames are
    connected by `proxgm.data.delaunay`, frame 2 is shuffled.
    """
    rng = np.random.default_rng(spec.rng_seed)
    n = spec.n_points
    points1 = rng.uniform(0.0, spec.extent, (n, 2))
    theta = spec.frame_gap * np.pi / 6.0
    rotation = np.array([[np.cos(theta), - np.sin(theta)],
                         [np.sin(theta), np.cos(theta)]])
    centered = points1 - points1.mean(axis = 0)
    jitter = rng.normal(0.0, spec.frame_gap * spec.extent / 100.0, (n, 2))
    points2 = points1 + (centered.dot(rotation.T) - centered) + jitter
    outliers = np.arange(spec.inlier_count, n)
    points2[outliers] = rng.uniform(0.0, spec.extent, (outliers.size, 2))
    perm = rng.permutation(n)
    g1 = GraphInstance(points1, delaunay(points1).tolist())
    g2 = GraphInstance(points2, delaunay(points2).tolist()).relabel(perm)
    rows = np.zeros(n, dtype = bool)
    rows[outliers] = True
    cols = np.zeros(n, dtype = bool)
    cols[perm[outliers]] = True
    return KeypointPairSample(g1, g2, PermutationMatching(perm), Mask(rows, cols))

def load_landmarks(path):
    """Read one frame of labeled landmarks: whitespace separated x y rows."""
    points = np.loadtxt(path, dtype = float, ndmin = 2)
    if points.shape[1] != 2:
        raise InvalidInput("%s: expected 2 columns of landmark coordinates, got %i" % (path, points.shape[1]))
    return points

def frames_pair(frame_a, frame_b, seed = None):
    """Build a sample from two frames of the same labeled landmarks.

    Landmark k of both frames correspond. With ``seed``, the nodes of
    the second graph are shuffled and the truth follows.
    """
    frame_a = np.asarray(frame_a, dtype = float)
    frame_b = np.asarray(frame_b, dtype = float)
    if frame_a.shape != frame_b.shape:
        raise InvalidInput("frames hold %i and %i landmarks" % (frame_a.shape[0], frame_b.shape[0]))
    n = frame_a.shape[0]
    perm = np.arange(n) if seed is None else np.random.default_rng(seed).permutation(n)
    g1 = GraphInstance(frame_a, delaunay(frame_a).tolist())
    g2 = GraphInstance(frame_b, delaunay(frame_b).tolist()).relabel(perm)
    return KeypointPairSample(g1, g2, PermutationMatching(perm))

def sample_from_dict(d):
    """Decode the JSON object of an instance.

    Keys ``g1`` and ``g2`` hold ``{"features": [[...]], "edges":
    [[a, b], ...]}``; ``truth`` (optional) maps each node of g1 to a
    node of g2; ``mask`` (optional) lists the outlier nodes of each
    graph as ``{"rows": [...], "cols": [...]}``. Graphs of different
    sizes are padded.
    """
    try:
        g1 = GraphInstance.from_dict(d["g1"])
        g2 = GraphInstance.from_dict(d["g2"])
        truth = d.get("truth")
        mask = d.get("mask")
    except (KeyError, TypeError, AttributeError) as e:
        raise InvalidInput("malformed instance object: %r" % (e,))
    sample = KeypointPairSample.from_graphs(g1, g2, truth)
    if mask:
        try:
            rows = np.zeros(sample.n, dtype = bool)
            rows[np.asarray(mask.get("rows", []), dtype = np.intp)] = True
            cols = np.zeros(sample.n, dtype = bool)
            cols[np.asarray(mask.get("cols", []), dtype = np.intp)] = True
        except (IndexError, TypeError, ValueError, AttributeError) as e:
            raise InvalidInput("malformed instance mask: %s" % (e,))
        sample = KeypointPairSample(sample.g1, sample.g2, sample.truth, sample.mask.merge(Mask(rows, cols)))
    return sample

def sample_to_dict(sample):
    d = sample.to_dict()
    if not sample.mask.empty:
        d["mask"] = {"rows": np.flatnonzero(sample.mask.rows).tolist(),
                     "cols": np.flatnonzero(sample.mask.cols).tolist()}
    return d

def load_instance(path):
    """Read a `proxgm.core.KeypointPairSample` from a JSON file (see `proxgm.data.sample_from_dict`)."""
    with open(path) as f:
        return sample_from_dict(json.load(f))

def dump_instance(sample, path):
    with open(path, "w") as f:
        json.dump(sample_to_dict(sample), f)

def load_dataset(path):
    """Read a JSON array of instance objects."""
    with open(path) as f:
        d = json.load(f)
    if not isinstance(d, list):
        raise InvalidInput("%s: a dataset is a JSON array of instances" % (path,))
    return [sample_from_dict(s) for s in d]

def dump_dataset(samples, path):
    with open(path, "w") as f:
        json.dump([sample_to_dict(s) for s in samples], f)
