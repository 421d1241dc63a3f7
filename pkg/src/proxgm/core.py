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

"""Graph matching problem representation.

A matching problem between two graphs of n nodes is scored by an
affinity matrix M of shape n²×n², indexed by candidate correspondences
(i, j) meaning "node i of G1 matches node j of G2", in row-major order
``i * n + j``. M is kept decomposed (`AffinityDecomposition`) into its
diagonal u (node affinities) and its off-diagonal part P (edge pair
affinities), P being stored sparsely on the edge pair support.
"""

import itertools

import networkx as nx
import numpy as np
import scipy.sparse
from scipy.optimize import linear_sum_assignment

from .config import configuration
from .exception import InvalidInput, SizeLimitExceeded
from .log import logger, style

def _readonly(a):
    a.setflags(write = False)
    return a

class GraphInstance(object):

    """One graph of a matching problem: node feature vectors and undirected edges.

    Instances are immutable. Edges are stored as an array of shape
    (m, 2) of node index pairs ``(a, b)`` with ``a < b``, sorted.

    >>> g = GraphInstance([[0.0, 1.0], [1.0, 1.0], [2.0, 0.0]], [(1, 0), (2, 1)])
    >>> g
    GraphInstance(n=3, dim=2, num_edges=2)
    >>> g.edges.tolist()
    [[0, 1], [1, 2]]
    """

    def __init__(self, features, edges = ()):
        """
        :param features: array-like of shape (n, D)

        :param edges: iterable of node index pairs, in any order
        """
        features = np.array(features, dtype = float)
        if features.ndim != 2:
            raise InvalidInput("node features must be a 2-D array, got shape %s" % (features.shape,))
        if not np.all(np.isfinite(features)):
            raise InvalidInput("node features must be finite")
        n = features.shape[0]
        normalized = set()
        for edge in edges:
            a, b = (int(v) for v in edge)
            if not (0 <= a < n and 0 <= b < n):
                raise InvalidInput("edge (%i, %i) out of range for %i nodes" % (a, b, n))
            if a == b:
                raise InvalidInput("self-loop on node %i" % (a,))
            key = (min(a, b), max(a, b))
            if key in normalized:
                raise InvalidInput("duplicate edge (%i, %i)" % key)
            normalized.add(key)
        self.__features = _readonly(features)
        self.__edges = _readonly(np.array(sorted(normalized), dtype = np.intp).reshape(-1, 2))

    @property
    def features(self):
        """node features, read-only array of shape (n, D)"""
        return self.__features

    @property
    def edges(self):
        """read-only array of shape (m, 2)"""
        return self.__edges

    @property
    def n(self):
        return self.__features.shape[0]

    @property
    def dim(self):
        return self.__features.shape[1]

    @property
    def num_edges(self):
        return self.__edges.shape[0]

    def edge_set(self):
        return frozenset(map(tuple, self.__edges.tolist()))

    def adjacency(self):
        """Return the boolean adjacency matrix."""
        a = np.zeros((self.n, self.n), dtype = bool)
        a[self.__edges[:, 0], self.__edges[:, 1]] = True
        a[self.__edges[:, 1], self.__edges[:, 0]] = True
        return a

    def to_networkx(self):
        g = nx.Graph()
        for i in range(self.n):
            g.add_node(i, features = self.__features[i])
        g.add_edges_from(self.__edges.tolist())
        return g

    def relabel(self, perm):
        """Return the same graph with node i renamed ``perm[i]``."""
        perm = np.asarray(perm, dtype = np.intp)
        features = np.empty_like(self.__features)
        features[perm] = self.__features
        return GraphInstance(features, perm[self.__edges].tolist())

    def padded(self, n):
        """Return the graph extended to n nodes with isolated zero-feature nodes."""
        if n < self.n:
            raise InvalidInput("cannot pad %i nodes down to %i" % (self.n, n))
        if n == self.n:
            return self
        features = np.zeros((n, self.dim))
        features[:self.n] = self.__features
        return GraphInstance(features, self.__edges.tolist())

    def to_dict(self):
        return {"features": self.__features.tolist(),
                "edges": self.__edges.tolist()}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(d["features"], d.get("edges", ()))
        except (KeyError, TypeError, AttributeError) as e:
            raise InvalidInput("malformed graph object: %s" % (e,))

    def __eq__(self, other):
        return (isinstance(other, GraphInstance)
                and np.array_equal(self.__features, other.features)
                and np.array_equal(self.__edges, other.edges))

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash((self.__features.tobytes(), self.__edges.tobytes()))

    def __repr__(self):
        return "GraphInstance(n=%i, dim=%i, num_edges=%i)" % (self.n, self.dim, self.num_edges)

class Mask(object):

    """Nodes excluded from accuracy computations.

    ``rows[i]`` is True when node i of G1 has no true correspondent
    (auxiliary padding node or outlier), ``cols[j]`` likewise for node
    j of G2.
    """

    def __init__(self, rows, cols = None):
        rows = np.array(rows, dtype = bool).ravel()
        cols = np.zeros_like(rows) if cols is None else np.array(cols, dtype = bool).ravel()
        if rows.shape != cols.shape:
            raise InvalidInput("mask rows and cols differ in length")
        self.rows = _readonly(rows)
        self.cols = _readonly(cols)

    @classmethod
    def none(cls, n):
        return cls(np.zeros(n, dtype = bool))

    @property
    def n(self):
        return self.rows.shape[0]

    @property
    def empty(self):
        return not (self.rows.any() or self.cols.any())

    def genuine_rows(self):
        return np.flatnonzero(~self.rows)

    def merge(self, other):
        return Mask(self.rows | other.rows, self.cols | other.cols)

    def __eq__(self, other):
        return (isinstance(other, Mask)
                and np.array_equal(self.rows, other.rows)
                and np.array_equal(self.cols, other.cols))

    def __ne__(self, other):
        return not self.__eq__(other)

    def __repr__(self):
        return "Mask(n=%i, masked_rows=%i, masked_cols=%i)" % (
            self.n, int(self.rows.sum()), int(self.cols.sum()))

class PermutationMatching(object):

    """A one-to-one matching, ``assignment[i]`` being the node of G2 matched to node i of G1."""

    def __init__(self, assignment):
        a = np.array(assignment)
        if a.ndim != 1 or (a.size > 0 and not np.issubdtype(a.dtype, np.integer)):
            raise InvalidInput("assignment must be a 1-D integer vector")
        a = a.astype(np.intp)
        if not np.array_equal(np.sort(a), np.arange(a.size)):
            raise InvalidInput("assignment is not a bijection on [0, %i): %s" % (a.size, a.tolist()))
        self.__assignment = _readonly(a)

    @classmethod
    def identity(cls, n):
        return cls(np.arange(n))

    @property
    def assignment(self):
        return self.__assignment

    @property
    def n(self):
        return self.__assignment.size

    def __len__(self):
        return self.n

    def __getitem__(self, i):
        return int(self.__assignment[i])

    def as_matrix(self):
        x = np.zeros((self.n, self.n))
        x[np.arange(self.n), self.__assignment] = 1.0
        return x

    def as_vector(self):
        """The 0/1 assignment vector of length n², row-major."""
        return self.as_matrix().ravel()

    def relabel(self, perm1, perm2):
        """Return the matching expressed after renaming node i of G1 ``perm1[i]`` and node j of G2 ``perm2[j]``."""
        perm1 = np.asarray(perm1, dtype = np.intp)
        perm2 = np.asarray(perm2, dtype = np.intp)
        a = np.empty_like(self.__assignment)
        a[perm1] = perm2[self.__assignment]
        return PermutationMatching(a)

    def tolist(self):
        return self.__assignment.tolist()

    def __eq__(self, other):
        return isinstance(other, PermutationMatching) and np.array_equal(self.__assignment, other.assignment)

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash(self.__assignment.tobytes())

    def __repr__(self):
        return "PermutationMatching(%s)" % (self.__assignment.tolist(),)

class MatchingState(object):

    """A relaxed assignment: a nonnegative n×n matrix z.

    After a Sinkhorn projection, z is approximately doubly stochastic;
    ``deviation`` then holds the largest distance of a row or column
    sum to 1, ``converged`` whether the requested tolerance was met,
    and ``iters`` the number of iterations run by the producer, which
    may also attach its per iteration ``trace``.
    """

    def __init__(self, z, deviation = None, converged = None, iters = None, trace = None):
        z = np.array(z, dtype = float)
        if z.ndim == 1:
            n = int(round(np.sqrt(z.size)))
            if n * n != z.size:
                raise InvalidInput("vector of length %i is not a square matrix" % (z.size,))
            z = z.reshape(n, n)
        if z.ndim != 2 or z.shape[0] != z.shape[1]:
            raise InvalidInput("matching state must be square, got shape %s" % (z.shape,))
        self.__z = _readonly(z)
        self.deviation = deviation
        self.converged = converged
        self.iters = iters
        self.trace = trace

    @property
    def z(self):
        return self.__z

    @property
    def vector(self):
        """z flattened row-major, length n²"""
        return self.__z.ravel()

    @property
    def n(self):
        return self.__z.shape[0]

    def __repr__(self):
        s = "MatchingState(n=%i" % (self.n,)
        if self.deviation is not None:
            s += ", deviation=%.3g, converged=%r" % (self.deviation, self.converged)
        return s + ")"

def _as_matrix(z):
    if isinstance(z, MatchingState):
        return z.z
    return MatchingState(z).z

class AffinityDecomposition(object):

    """Affinity matrix M = diag(u) + P of a matching problem on n nodes.

    P is stored as a list of K oriented entries: row k of ``pairs`` is
    ``(i, j, i2, j2)`` and sets ``P[(i,j),(i2,j2)] = P[(i2,j2),(i,j)] =
    weights[k]``. The symmetric counterpart is implicit, so P is
    symmetric by construction. Each (G1 edge, G2 edge) couple yields
    two oriented entries (``i -> j, i2 -> j2`` and ``i -> j2, i2 ->
    j``), hence the four index combinations of an undirected edge
    pair.

    Products with P are computed on a scipy sparse matrix holding the
    2K nonzeros, i.e. by message passing over the edge pair support in
    O(|E1|·|E2|).
    """

    def __init__(self, n, u = None, pairs = None, weights = None, edges1 = None, edges2 = None, info = None):
        """
        :param n: node count of each graph

        :param u: node affinities, length n² (or n×n); zero if None

        :param pairs: int array of shape (K, 4), oriented entries of P

        :param weights: length K nonnegative weights

        :param edges1: optional edge array of G1; when given, every
          entry must lie on an edge of G1 (and likewise for edges2)

        :param edges2: optional edge array of G2

        :param info: optional dict of diagnostics from the builder
        """
        n = int(n)
        if n < 1:
            raise InvalidInput("affinity needs at least one node, got n = %i" % (n,))
        if u is None:
            u = np.zeros(n * n)
        u = np.array(u, dtype = float).ravel()
        if u.size != n * n:
            raise InvalidInput("u has length %i, expected %i" % (u.size, n * n))
        if not np.all(np.isfinite(u)) or np.any(u < 0):
            raise InvalidInput("u must be finite and nonnegative")
        pairs = np.zeros((0, 4), dtype = np.intp) if pairs is None else np.array(pairs, dtype = np.intp).reshape(-1, 4)
        weights = np.zeros(0) if weights is None else np.array(weights, dtype = float).ravel()
        if weights.size != pairs.shape[0]:
            raise InvalidInput("%i weights for %i pair entries" % (weights.size, pairs.shape[0]))
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise InvalidInput("pairwise weights must be finite and nonnegative")
        if np.any(pairs < 0) or np.any(pairs >= n):
            raise InvalidInput("pair entry index out of range")
        if np.any(pairs[:, 0] == pairs[:, 2]) or np.any(pairs[:, 1] == pairs[:, 3]):
            raise InvalidInput("pair entries must join distinct nodes in both graphs")
        edges1 = self.__check_edges(n, pairs[:, 0], pairs[:, 2], edges1, "G1")
        edges2 = self.__check_edges(n, pairs[:, 1], pairs[:, 3], edges2, "G2")
        a = pairs[:, 0] * n + pairs[:, 1]
        b = pairs[:, 2] * n + pairs[:, 3]
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        if np.unique(lo * (n * n) + hi).size != lo.size:
            raise InvalidInput("duplicate pair entries")
        self.__n = n
        self.__u = _readonly(u)
        self.__pairs = _readonly(pairs)
        self.__weights = _readonly(weights)
        self.__a = lo
        self.__b = hi
        self.__edges1 = _readonly(edges1)
        self.__edges2 = _readonly(edges2)
        self.info = dict(info or {})
        """diagnostics recorded by the builder of this affinity"""
        self.__matrix = None

    @staticmethod
    def __check_edges(n, first, second, edges, name):
        lo = np.minimum(first, second)
        hi = np.maximum(first, second)
        if edges is None:
            if lo.size == 0:
                return np.zeros((0, 2), dtype = np.intp)
            return np.unique(np.stack([lo, hi], axis = 1), axis = 0)
        edges = np.array(edges, dtype = np.intp).reshape(-1, 2)
        adjacency = np.zeros((n, n), dtype = bool)
        adjacency[edges[:, 0], edges[:, 1]] = True
        adjacency[edges[:, 1], edges[:, 0]] = True
        if not np.all(adjacency[lo, hi]):
            raise InvalidInput("pair entry outside the edge set of %s" % (name,))
        return np.sort(edges, axis = 1)

    @classmethod
    def from_edge_pairs(cls, n, u, edges1, edges2, same, cross = None, info = None):
        """Build an affinity from per (G1 edge, G2 edge) weights.

        :param edges1: array (m1, 2) of G1 edges ``(i, i2)``

        :param edges2: array (m2, 2) of G2 edges ``(j, j2)``

        :param same: array (m1, m2), weight of ``i -> j, i2 -> j2``

        :param cross: array (m1, m2), weight of ``i -> j2, i2 -> j``;
          defaults to ``same``
        """
        e1 = np.array(edges1, dtype = np.intp).reshape(-1, 2)
        e2 = np.array(edges2, dtype = np.intp).reshape(-1, 2)
        m1, m2 = e1.shape[0], e2.shape[0]
        same = np.asarray(same, dtype = float).reshape(m1, m2)
        cross = same if cross is None else np.asarray(cross, dtype = float).reshape(m1, m2)
        i = np.repeat(e1[:, 0], m2)
        i2 = np.repeat(e1[:, 1], m2)
        j = np.tile(e2[:, 0], m1)
        j2 = np.tile(e2[:, 1], m1)
        pairs = np.concatenate([np.stack([i, j, i2, j2], axis = 1),
                                np.stack([i, j2, i2, j], axis = 1)])
        weights = np.concatenate([same.ravel(), cross.ravel()])
        return cls(n, u, pairs, weights, edges1 = e1, edges2 = e2, info = info)

    def __derive(self, u = None, weights = None):
        other = object.__new__(AffinityDecomposition)
        other.__dict__.update(self.__dict__)
        other.info = dict(self.info)
        if u is not None:
            u = np.array(u, dtype = float).ravel()
            if u.size != self.__n * self.__n or not np.all(np.isfinite(u)) or np.any(u < 0):
                raise InvalidInput("u must be finite, nonnegative and of length n²")
            other._AffinityDecomposition__u = _readonly(u)
        if weights is not None:
            weights = np.array(weights, dtype = float).ravel()
            if weights.size != self.num_entries or not np.all(np.isfinite(weights)) or np.any(weights < 0):
                raise InvalidInput("weights must be finite, nonnegative and of length K")
            other._AffinityDecomposition__weights = _readonly(weights)
            other._AffinityDecomposition__matrix = None
        return other

    def with_unary(self, u):
        """Return a copy with node affinities u, sharing the pairwise part."""
        return self.__derive(u = u)

    def with_weights(self, weights):
        """Return a copy with new pairwise weights on the same support."""
        return self.__derive(weights = weights)

    @property
    def n(self):
        return self.__n

    @property
    def u(self):
        """node affinities, length n²"""
        return self.__u

    @property
    def pairs(self):
        return self.__pairs

    @property
    def weights(self):
        return self.__weights

    @property
    def num_entries(self):
        """number K of stored (oriented) pairwise entries"""
        return self.__weights.size

    @property
    def edges1(self):
        return self.__edges1

    @property
    def edges2(self):
        return self.__edges2

    def unary_matrix(self):
        return self.__u.reshape(self.__n, self.__n)

    def sparse_pairwise(self):
        """P as a scipy CSR matrix of shape n²×n²."""
        if self.__matrix is None:
            nn = self.__n * self.__n
            data = np.concatenate([self.__weights, self.__weights])
            rows = np.concatenate([self.__a, self.__b])
            cols = np.concatenate([self.__b, self.__a])
            self.__matrix = scipy.sparse.csr_matrix((data, (rows, cols)), shape = (nn, nn))
        return self.__matrix

    def pairwise_matvec(self, x):
        """Return P x."""
        return self.sparse_pairwise().dot(x)

    def pairwise_quadratic(self, x):
        """Return xᵀ P x."""
        return 2.0 * float(np.dot(self.__weights, x[self.__a] * x[self.__b]))

    def pairwise_grad(self, g, x):
        """Gradient of gᵀ P x with respect to every stored weight."""
        return g[self.__a] * x[self.__b] + g[self.__b] * x[self.__a]

    def matvec(self, x):
        """Return M x = u ∘ x + P x."""
        return self.__u * x + self.pairwise_matvec(x)

    def dense_pairwise(self):
        limit = configuration['dense_max_n']
        if self.__n > limit:
            raise SizeLimitExceeded("dense affinity composition", self.__n, limit)
        return self.sparse_pairwise().toarray()

    def dense(self):
        """Return the dense n²×n² matrix M = diag(u) + P (n ≤ ``dense_max_n``)."""
        m = self.dense_pairwise()
        m[np.diag_indices_from(m)] += self.__u
        return m

    def relabel(self, perm1, perm2):
        """Return the affinity after renaming node i of G1 ``perm1[i]`` and node j of G2 ``perm2[j]``."""
        perm1 = np.asarray(perm1, dtype = np.intp)
        perm2 = np.asarray(perm2, dtype = np.intp)
        n = self.__n
        u = np.empty(n * n)
        u[(perm1[:, None] * n + perm2[None, :]).ravel()] = self.__u
        p = self.__pairs
        pairs = np.stack([perm1[p[:, 0]], perm2[p[:, 1]], perm1[p[:, 2]], perm2[p[:, 3]]], axis = 1)
        return AffinityDecomposition(n, u, pairs, self.__weights,
                                     edges1 = perm1[self.__edges1], edges2 = perm2[self.__edges2],
                                     info = self.info)

    def __repr__(self):
        return "AffinityDecomposition(n=%i, entries=%i, |E1|=%i, |E2|=%i)" % (
            self.__n, self.num_entries, self.__edges1.shape[0], self.__edges2.shape[0])

class KeypointPairSample(object):

    """Two graphs of equal size plus, optionally, their true matching.

    ``mask`` flags nodes without true correspondent (auxiliary padding
    nodes and outliers); the truth maps them anyway, so that it stays a
    bijection, but they are ignored by accuracy and loss computations.
    """

    def __init__(self, g1, g2, truth = None, mask = None):
        if g1.n != g2.n:
            raise InvalidInput("graphs of a sample must have the same size (%i != %i), pad them first" % (g1.n, g2.n))
        if g1.dim != g2.dim:
            raise InvalidInput("feature dimensions differ (%i != %i)" % (g1.dim, g2.dim))
        if truth is not None and not isinstance(truth, PermutationMatching):
            truth = PermutationMatching(truth)
        if truth is not None and truth.n != g1.n:
            raise InvalidInput("truth has %i entries for %i nodes" % (truth.n, g1.n))
        mask = Mask.none(g1.n) if mask is None else mask
        if mask.n != g1.n:
            raise InvalidInput("mask has %i entries for %i nodes" % (mask.n, g1.n))
        self.g1 = g1
        self.g2 = g2
        self.truth = truth
        self.mask = mask

    @classmethod
    def from_graphs(cls, g1, g2, truth = None):
        """Build a sample from graphs of possibly different sizes.

        The smaller graph is padded (see `proxgm.core.pad_to_equal_size`).
        A truth given on the original sizes must be injective from the
        nodes of g1 to the nodes of g2; it is completed into a
        bijection by matching auxiliary rows to the unused columns in
        increasing order.
        """
        pg1, pg2, mask = pad_to_equal_size(g1, g2)
        if truth is not None:
            truth = [int(t) for t in truth]
            if len(truth) != g1.n or len(set(truth)) != len(truth) or any(t < 0 or t >= pg2.n for t in truth):
                raise InvalidInput("truth is not an injection from %i into %i nodes" % (g1.n, g2.n))
            unused = [j for j in range(pg2.n) if j not in set(truth)]
            truth = PermutationMatching(truth + unused[:pg1.n - g1.n])
        return cls(pg1, pg2, truth, mask)

    @property
    def n(self):
        return self.g1.n

    def relabel_second(self, perm):
        """Return the sample with node j of G2 renamed ``perm[j]``."""
        perm = np.asarray(perm, dtype = np.intp)
        truth = None if self.truth is None else self.truth.relabel(np.arange(self.n), perm)
        cols = np.empty_like(self.mask.cols)
        cols[perm] = self.mask.cols
        return KeypointPairSample(self.g1, self.g2.relabel(perm), truth, Mask(self.mask.rows, cols))

    def to_dict(self):
        d = {"g1": self.g1.to_dict(), "g2": self.g2.to_dict()}
        if self.truth is not None:
            d["truth"] = self.truth.tolist()
        return d

    def __repr__(self):
        return "KeypointPairSample(n=%i, dim=%i, truth=%s, %r)" % (
            self.n, self.g1.dim, "yes" if self.truth is not None else "no", self.mask)

def qap_objective(aff, x):
    """Return the matching score uᵀx + xᵀPx of a permutation.

    :param aff: an `proxgm.core.AffinityDecomposition`

    :param x: a `proxgm.core.PermutationMatching` on ``aff.n`` nodes
    """
    if not isinstance(x, PermutationMatching):
        x = PermutationMatching(x)
    if x.n != aff.n:
        raise InvalidInput("matching on %i nodes for an affinity on %i nodes" % (x.n, aff.n))
    v = x.as_vector()
    return float(np.dot(aff.u, v)) + aff.pairwise_quadratic(v)

def matching_accuracy(pred, truth, mask = None):
    """Fraction of genuine nodes of G1 matched to their true correspondent.

    Nodes flagged in ``mask.rows`` are ignored; with no genuine node
    the accuracy is 1.0.
    """
    if not isinstance(pred, PermutationMatching):
        pred = PermutationMatching(pred)
    if not isinstance(truth, PermutationMatching):
        truth = PermutationMatching(truth)
    if pred.n != truth.n:
        raise InvalidInput("prediction on %i nodes, truth on %i nodes" % (pred.n, truth.n))
    genuine = np.ones(pred.n, dtype = bool) if mask is None else ~mask.rows
    if mask is not None and mask.n != pred.n:
        raise InvalidInput("mask on %i nodes, matching on %i nodes" % (mask.n, pred.n))
    if not genuine.any():
        return 1.0
    return float(np.mean(pred.assignment[genuine] == truth.assignment[genuine]))

def entropy_term(zv):
    """Return Σ z log z with 0 log 0 = 0."""
    positive = zv > 0
    return float(np.sum(zv[positive] * np.log(zv[positive])))

def relaxed_objective(aff, z, lambda_):
    """Return the entropic energy −uᵀz − zᵀPz + λ zᵀ log z of a relaxed assignment.

    :param z: a `proxgm.core.MatchingState` or an n×n array
    """
    zv = _as_matrix(z).ravel()
    if zv.size != aff.u.size:
        raise InvalidInput("matching state of size %i for an affinity on %i nodes" % (zv.size, aff.n))
    if np.any(zv < 0) or not np.all(np.isfinite(zv)):
        raise InvalidInput("relaxed assignment entries must be finite and nonnegative")
    return (- float(np.dot(aff.u, zv))
            - aff.pairwise_quadratic(zv)
            + lambda_ * entropy_term(zv))

def pad_to_equal_size(g1, g2):
    """Pad the smaller graph with isolated zero-feature nodes.

    Returns ``(g1, g2, mask)`` where both graphs have max(n1, n2)
    nodes and `proxgm.core.Mask` flags the auxiliary nodes. Equal
    sizes return the inputs unchanged with an empty mask.
    """
    n = max(g1.n, g2.n)
    rows = np.arange(n) >= g1.n
    cols = np.arange(n) >= g2.n
    if g1.n == g2.n:
        return g1, g2, Mask(rows, cols)
    logger.debug("padding %i and %i nodes to %i", g1.n, g2.n, n)
    return g1.padded(n), g2.padded(n), Mask(rows, cols)

def _is_unique_optimum(z, assignment, tol):
    # each row on its own maximum, ahead of the rest of the row by more
    # than tol: every other permutation loses more than tol
    n = z.shape[0]
    if n < 2:
        return True
    rows = np.arange(n)
    others = z.copy()
    others[rows, assignment] = -np.inf
    return bool(np.all(z[rows, assignment] - others.max(axis = 1) > tol))

def _lexicographic_optimum(z, completion, best, tol):
    # walk the rows in order, taking for each the smallest column that
    # still extends the prefix to an optimal assignment
    n = z.shape[0]
    completion = completion.copy()
    free = np.ones(n, dtype = bool)
    prefix = 0.0
    for i in range(n):
        target = completion[i]
        for j in np.flatnonzero(free):
            if j >= target:
                break
            rest = np.arange(i + 1, n)
            cols = np.flatnonzero(free)
            cols = cols[cols != j]
            if rest.size == 0:
                r = c = np.zeros(0, dtype = np.intp)
                value = prefix + z[i, j]
            else:
                sub = z[np.ix_(rest, cols)]
                bound = min(sub.max(axis = 1).sum(), sub.max(axis = 0).sum())
                if prefix + z[i, j] + bound < best - tol:
                    continue
                r, c = linear_sum_assignment(sub, maximize = True)
                value = prefix + z[i, j] + sub[r, c].sum()
            if value >= best - tol:
                completion[i] = j
                completion[rest[r]] = cols[c]
                break
        free[completion[i]] = False
        prefix += z[i, completion[i]]
    return completion

def discretize(z):
    """Round a relaxed assignment to the permutation maximizing Σ_i z[i, assignment[i]].

    Ties between optimal permutations are broken towards the
    lexicographically smallest assignment.
    """
    z = _as_matrix(z)
    if not np.all(np.isfinite(z)):
        raise InvalidInput("cannot discretize a matrix holding NaN or Inf")
    n = z.shape[0]
    rows, cols = linear_sum_assignment(z, maximize = True)
    assignment = np.empty(n, dtype = np.intp)
    assignment[rows] = cols
    best = float(z[rows, cols].sum())
    tol = configuration['tie_break_tol'] * max(1.0, float(np.abs(z).max()) if n else 1.0, abs(best))
    if not _is_unique_optimum(z, assignment, tol):
        assignment = _lexicographic_optimum(z, assignment, best, tol)
    return PermutationMatching(assignment)

def brute_force_qap(aff):
    """Return the exact maximizer of the matching score and its value, by exhaustive enumeration.

    Permutations are scanned in lexicographic order; the first best
    one is kept. Refuses n above ``configuration['brute_force_max_n']``.
    """
    n = aff.n
    limit = configuration['brute_force_max_n']
    if n > limit:
        raise SizeLimitExceeded("brute_force_qap", n, limit)
    m = aff.dense()
    offsets = np.arange(n) * n
    best_value = -np.inf
    best_perm = None
    perms = itertools.permutations(range(n))
    while True:
        block = np.array(list(itertools.islice(perms, configuration['brute_force_chunk'])), dtype = np.intp)
        if block.size == 0:
            break
        idx = offsets + block
        values = m[idx[:, :, None], idx[:, None, :]].sum(axis = (1, 2))
        k = int(np.argmax(values))
        if values[k] > best_value:
            best_value = float(values[k])
            best_perm = block[k]
    logger.debug("brute force optimum on %i nodes: %s", n, style.value(best_value))
    return PermutationMatching(best_perm), best_value
