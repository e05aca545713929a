import logging

import networkx as nx
import numpy as np

from .codes import gf2_rank_and_nullspace
from .exceptions import DecodingError, InvalidCode, SizeCapExceeded
from .messages import MarginalPair


logger = logging.getLogger(__name__)

VARIABLE = 'variable'
CHECK = 'check'

#: Largest vertex count accepted by the brute force marginal oracle
BRUTEFORCE_VERTEX_CAP = 24

#: Largest code dimension accepted by codeword enumeration
ENUMERATION_DIMENSION_CAP = 24

#: Assignments evaluated per numpy batch
BRUTEFORCE_CHUNK = 1 << 15

#: Edge weight of the duality map, rows indexed by the check variable
PARITY_TABLE = ((1.0, 1.0), (1.0, -1.0))


class GeneralizedMRF(object):
    """
    Pairwise model over {0,1} variables with signed vertex weights psi_v(x)
    and signed edge tables psi_uv(x_u, x_v). ``neighbors[u]`` lists the
    neighbors of u in edge order.
    """

    def __init__(self, vertex_weights, edges, edge_weights, tags=None, neighbors=None):
        vertex_weights = np.array(vertex_weights, dtype=float).reshape(-1, 2)
        count = vertex_weights.shape[0]
        if not np.isfinite(vertex_weights).all():
            raise InvalidCode('vertex weights must be finite')

        tables = {}
        edge_list = []
        for (u, v), table in zip(edges, edge_weights):
            u, v = int(u), int(v)
            table = np.array(table, dtype=float).reshape(2, 2)
            if u == v:
                raise InvalidCode('self-loop at vertex %d' % u)
            if not (0 <= u < count and 0 <= v < count):
                raise InvalidCode('edge (%d, %d) leaves the vertex range' % (u, v))
            if (u, v) in tables:
                raise InvalidCode('duplicate edge (%d, %d)' % (u, v))
            if not np.isfinite(table).all():
                raise InvalidCode('edge weights must be finite')
            tables[(u, v)] = table
            tables[(v, u)] = table.T
            edge_list.append((u, v))

        adjacency = [[] for _ in range(count)]
        for u, v in edge_list:
            adjacency[u].append(v)
            adjacency[v].append(u)
        if neighbors is None:
            neighbors = [sorted(items) for items in adjacency]

        self.vertex_weights = vertex_weights
        self.edges = tuple(edge_list)
        self.tags = tuple(tags) if tags is not None else tuple((VARIABLE, v) for v in range(count))
        self.neighbors = tuple(tuple(items) for items in neighbors)
        self._tables = tables
        self._rank = [dict((w, position) for position, w in enumerate(items)) for items in self.neighbors]
        self._graph = None

        if len(self.tags) != count or len(self.neighbors) != count:
            raise InvalidCode('tags and neighbor lists must cover every vertex')
        for u, items in enumerate(self.neighbors):
            if sorted(items) != sorted(adjacency[u]):
                raise InvalidCode('neighbor order of vertex %d is not a permutation of its edges' % u)

    @property
    def vertex_count(self):
        return self.vertex_weights.shape[0]

    @property
    def graph(self):
        if self._graph is None:
            graph = nx.Graph()
            graph.add_nodes_from(range(self.vertex_count))
            graph.add_edges_from(self.edges)
            self._graph = graph
        return self._graph

    def is_variable(self, v):
        return self.tags[v][0] == VARIABLE

    def edge_table(self, u, v):
        """
        Edge weight as a 2x2 array indexed [x_u][x_v].
        """
        return self._tables[(u, v)]

    def rank(self, u, v):
        """
        Position of the edge (u, v) in the edge order at u.
        """
        return self._rank[u][v]

    def _copy(self, vertex_weights=None, edges=None, neighbors=None):
        if edges is None:
            edges = self.edges
        return GeneralizedMRF(self.vertex_weights if vertex_weights is None else vertex_weights,
                              edges, [self._tables[edge] for edge in edges],
                              tags=self.tags,
                              neighbors=self.neighbors if neighbors is None else neighbors)

    def with_vertex_weight(self, v, pair):
        weights = self.vertex_weights.copy()
        weights[v] = pair
        return self._copy(vertex_weights=weights)

    def reordered(self):
        """
        Same model with every vertex's edge order reversed.
        """
        return self._copy(neighbors=[items[::-1] for items in self.neighbors])

    def induced(self, vertices):
        """
        Sub-model on a vertex subset, renumbered in ascending order.

        :returns: (GeneralizedMRF, list mapping new index to old vertex)
        """
        vertices = sorted(set(vertices))
        position = dict((v, index) for index, v in enumerate(vertices))
        edges = [(u, v) for u, v in self.edges if u in position and v in position]
        return GeneralizedMRF(self.vertex_weights[vertices],
                              [(position[u], position[v]) for u, v in edges],
                              [self._tables[edge] for edge in edges],
                              tags=[self.tags[v] for v in vertices],
                              neighbors=[[position[w] for w in self.neighbors[v] if w in position]
                                         for v in vertices]), vertices

    def eliminate_known(self, known):
        """
        Condition on known values. Each known vertex is cut from the graph
        and keeps psi_v(x) * 1(x = b); its former neighbors absorb the edge
        weight evaluated at b. Vertex ids are preserved, and every marginal
        of the remaining vertices is unchanged.

        :param known: Mapping vertex -> bit
        :returns: A GeneralizedMRF
        """
        weights = self.vertex_weights.copy()
        for v, bit in known.items():
            weights[v, 1 - bit] = 0.0
            for w in self.neighbors[v]:
                if w not in known:
                    weights[w] *= self._tables[(w, v)][:, bit]
        edges = [(u, v) for u, v in self.edges if u not in known and v not in known]
        neighbors = [[] if u in known else [w for w in items if w not in known]
                     for u, items in enumerate(self.neighbors)]
        return self._copy(vertex_weights=weights, edges=edges, neighbors=neighbors)

    def __repr__(self):
        return '<GeneralizedMRF vertices=%d edges=%d>' % (self.vertex_count, len(self.edges))


def dualize(g, lik):
    """
    Dual model of a decoding problem: variable i becomes vertex i with weight
    Q(y_i|x_i), check a becomes vertex n + a with weight (1, 1), and every
    Tanner edge carries (-1)**(n_a x_i).

    :param g: A TannerGraph
    :param lik: Likelihood pairs, shape (n, 2)
    :returns: A GeneralizedMRF
    """
    lik = np.asarray(lik, dtype=float)
    if lik.shape != (g.var_count, 2):
        raise InvalidCode('expected %d likelihood pairs, got shape %s' % (g.var_count, lik.shape))

    n = g.var_count
    weights = np.vstack([lik, np.ones((g.check_count, 2))])
    edges = [(variable, n + check)
             for check, variables in enumerate(g.check_neighbors)
             for variable in variables]
    tags = [(VARIABLE, i) for i in range(n)] + [(CHECK, a) for a in range(g.check_count)]
    neighbors = ([[n + check for check in items] for items in g.var_neighbors] +
                 [list(items) for items in g.check_neighbors])
    return GeneralizedMRF(weights, edges, [PARITY_TABLE] * len(edges), tags=tags, neighbors=neighbors)


def _assignments(count, start, stop):
    index = np.arange(start, stop, dtype=np.int64)
    return (index[:, None] >> np.arange(count, dtype=np.int64)) & 1


def _assignment_weights(m, bits):
    rows = np.arange(m.vertex_count)
    weights = np.prod(m.vertex_weights[rows, bits], axis=1)
    if m.edges:
        us = np.array([u for u, _ in m.edges])
        vs = np.array([v for _, v in m.edges])
        tables = np.stack([m.edge_table(u, v) for u, v in m.edges])
        slots = np.arange(len(m.edges))
        weights = weights * np.prod(tables[slots, bits[:, us], bits[:, vs]], axis=1)
    return weights


def _check_cap(m, cap):
    if m.vertex_count > cap:
        raise SizeCapExceeded('brute force over %d vertices exceeds the cap of %d'
                              % (m.vertex_count, cap))


def exact_marginals_bruteforce(m, vertices=None, cap=BRUTEFORCE_VERTEX_CAP):
    """
    Literal evaluation of the marginal sum at several vertices in one pass
    over all 2**vertex_count assignments.

    :returns: float array of shape (len(vertices), 2), unnormalized and signed
    """
    _check_cap(m, cap)
    if vertices is None:
        vertices = range(m.vertex_count)
    vertices = list(vertices)
    totals = np.zeros((len(vertices), 2))
    count = m.vertex_count
    for start in range(0, 1 << count, BRUTEFORCE_CHUNK):
        bits = _assignments(count, start, min(1 << count, start + BRUTEFORCE_CHUNK))
        weights = _assignment_weights(m, bits)
        for row, v in enumerate(vertices):
            ones = bits[:, v] == 1
            totals[row, 1] += weights[ones].sum()
            totals[row, 0] += weights[~ones].sum()
    return totals


def exact_marginal_bruteforce(m, v, cap=BRUTEFORCE_VERTEX_CAP):
    """
    Exact unnormalized signed marginal of one vertex.

    :returns: A MarginalPair
    """
    w0, w1 = exact_marginals_bruteforce(m, [v], cap=cap)[0]
    return MarginalPair(w0, w1)


def total_weight_bruteforce(m, cap=BRUTEFORCE_VERTEX_CAP):
    _check_cap(m, cap)
    count = m.vertex_count
    total = 0.0
    for start in range(0, 1 << count, BRUTEFORCE_CHUNK):
        bits = _assignments(count, start, min(1 << count, start + BRUTEFORCE_CHUNK))
        total += _assignment_weights(m, bits).sum()
    return total


def codeword_weight_sum(H, lik, cap=ENUMERATION_DIMENSION_CAP):
    """
    Sum over codewords of the product of likelihoods.
    """
    basis = _basis_within_cap(H, cap)
    lik = np.asarray(lik, dtype=float)
    columns = np.arange(H.n)
    return sum(np.prod(lik[columns, words], axis=1).sum() for words in basis.codewords())


def _basis_within_cap(H, cap):
    _, basis = gf2_rank_and_nullspace(H)
    if basis.k > cap:
        raise SizeCapExceeded('code dimension %d exceeds the enumeration cap of %d' % (basis.k, cap))
    return basis


def posterior_marginal_enumeration(H, lik, cap=ENUMERATION_DIMENSION_CAP):
    """
    Exact per-bit posterior marginals by summing over all codewords, in the
    log domain with a running maximum shift.

    :param H: A ParityCheckMatrix
    :param lik: Likelihood pairs, shape (n, 2)
    :returns: float array of shape (n, 2), rows summing to 1
    """
    basis = _basis_within_cap(H, cap)
    lik = np.asarray(lik, dtype=float)
    with np.errstate(divide='ignore'):
        log_lik = np.log(lik)
    columns = np.arange(H.n)

    shift = -np.inf
    ones = np.zeros(H.n)
    total = 0.0
    for words in basis.codewords():
        logs = log_lik[columns, words].sum(axis=1)
        peak = logs.max()
        if not np.isfinite(peak):
            continue
        if peak > shift:
            scale = np.exp(shift - peak) if np.isfinite(shift) else 0.0
            ones *= scale
            total *= scale
            shift = peak
        weights = np.exp(logs - shift)
        total += weights.sum()
        ones += weights @ words

    if total <= 0.0:
        raise DecodingError('received word has zero probability under every codeword')
    p1 = ones / total
    return np.stack([1.0 - p1, p1], axis=1)


def random_pairwise(vertex_count, edge_probability, rng, low=0.1, high=1.0):
    """
    Random model with strictly positive weights on an Erdos-Renyi graph.
    """
    seed = int(rng.integers(0, 2 ** 31 - 1))
    graph = nx.gnp_random_graph(vertex_count, edge_probability, seed=seed)
    edges = sorted((min(u, v), max(u, v)) for u, v in graph.edges())
    weights = rng.uniform(low, high, size=(vertex_count, 2))
    tables = [rng.uniform(low, high, size=(2, 2)) for _ in edges]
    return GeneralizedMRF(weights, edges, tables)
