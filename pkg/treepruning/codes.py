import logging
import os

import networkx as nx
import numpy as np

from .exceptions import AlistFormatError, InvalidCode


logger = logging.getLogger(__name__)

#: Directory holding the shipped matrix files
DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data')

#: Alist file of the (23, 12) Golay code
GOLAY_ALIST = os.path.join(DATA_DIR, 'golay23.alist')

#: Circulant row pattern of the rate 1/2 tailbiting code
TAILBITING_PATTERN = (1, 1, 0, 1, 1, 1)

#: Number of swap attempts per socket when removing parallel LDPC edges
LDPC_RETRIES_PER_SOCKET = 200

#: Words enumerated per numpy batch
ENUMERATION_CHUNK = 1 << 14


class ParityCheckMatrix(object):
    """
    Sparse GF(2) parity-check matrix stored as the sorted support of each row.
    Instances are immutable; duplicate rows are allowed.
    """

    def __init__(self, n, rows, name=None):
        n = int(n)
        if n < 1:
            raise InvalidCode('blocklength must be positive, got %d' % n)

        checked = []
        for index, row in enumerate(rows):
            support = tuple(sorted(int(column) for column in row))
            if not support:
                raise InvalidCode('row %d is all-zero' % index)
            if len(set(support)) != len(support):
                raise InvalidCode('row %d repeats a column index' % index)
            if support[0] < 0 or support[-1] >= n:
                raise InvalidCode('row %d has a column index outside [0, %d)' % (index, n))
            checked.append(support)

        self._n = n
        self._rows = tuple(checked)
        self.name = name or 'code%d' % n

    @property
    def n(self):
        return self._n

    @property
    def m(self):
        return len(self._rows)

    @property
    def rows(self):
        return self._rows

    @classmethod
    def from_dense(cls, matrix, name=None):
        """
        Build from a dense 0/1 array; all-zero rows are dropped.

        :param matrix: Array-like of shape (m, n)
        :param name: Optional display name
        :returns: A ParityCheckMatrix
        """
        matrix = np.atleast_2d(np.asarray(matrix, dtype=np.uint8) % 2)
        rows = [np.flatnonzero(row) for row in matrix if row.any()]
        return cls(matrix.shape[1], rows, name=name)

    def dense(self):
        matrix = np.zeros((self.m, self.n), dtype=np.uint8)
        for index, row in enumerate(self._rows):
            matrix[index, list(row)] = 1
        return matrix

    def syndrome(self, word):
        return self.dense().astype(np.int64) @ np.asarray(word, dtype=np.int64) % 2

    def restrict(self, variables, checks):
        """
        Sub-code on a set of variables and a set of rows whose supports lie
        inside those variables. Columns are renumbered in ascending order.

        :param variables: Iterable of column indices
        :param checks: Iterable of row indices
        :returns: A ParityCheckMatrix over len(variables) columns
        """
        variables = sorted(variables)
        position = dict((column, index) for index, column in enumerate(variables))
        rows = []
        for check in sorted(checks):
            try:
                rows.append([position[column] for column in self._rows[check]])
            except KeyError:
                raise InvalidCode('row %d leaves the variable subset' % check)
        return ParityCheckMatrix(len(variables), rows, name='%s-restricted' % self.name)

    def __eq__(self, other):
        return isinstance(other, ParityCheckMatrix) and (self.n, self.rows) == (other.n, other.rows)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.n, self.rows))

    def __repr__(self):
        return '<ParityCheckMatrix %s n=%d m=%d>' % (self.name, self.n, self.m)


class TannerGraph(object):
    """
    Bipartite factor graph of a parity-check matrix. Neighbor lists are
    stored in edge order, so the rank of an edge at a vertex is the position
    of the other endpoint in that vertex's list.
    """

    def __init__(self, var_neighbors, check_neighbors):
        self.var_neighbors = tuple(tuple(items) for items in var_neighbors)
        self.check_neighbors = tuple(tuple(items) for items in check_neighbors)
        self._graph = None

    @property
    def var_count(self):
        return len(self.var_neighbors)

    @property
    def check_count(self):
        return len(self.check_neighbors)

    @property
    def edge_count(self):
        return sum(len(items) for items in self.check_neighbors)

    @property
    def graph(self):
        """
        networkx view of the graph; variable i is node i, check a is node
        var_count + a.
        """
        if self._graph is None:
            graph = nx.Graph()
            graph.add_nodes_from(range(self.var_count + self.check_count))
            for check, variables in enumerate(self.check_neighbors):
                graph.add_edges_from((variable, self.var_count + check) for variable in variables)
            self._graph = graph
        return self._graph

    def reversed_order(self):
        return TannerGraph([items[::-1] for items in self.var_neighbors],
                           [items[::-1] for items in self.check_neighbors])

    def to_matrix(self):
        return ParityCheckMatrix(self.var_count, self.check_neighbors)


class GeneratorBasis(object):
    """
    Basis of the code as a (k, n) 0/1 array.
    """

    def __init__(self, n, vectors):
        self.n = int(n)
        self.vectors = np.asarray(vectors, dtype=np.uint8).reshape(-1, self.n)

    @property
    def k(self):
        return self.vectors.shape[0]

    def codewords(self, chunk=ENUMERATION_CHUNK):
        """
        Yield every codeword, in batches of at most ``chunk`` rows.
        """
        total = 1 << self.k
        shifts = np.arange(self.k, dtype=np.int64)
        generator = self.vectors.astype(np.int64)
        for start in range(0, total, chunk):
            index = np.arange(start, min(total, start + chunk), dtype=np.int64)
            coefficients = (index[:, None] >> shifts) & 1
            yield (coefficients @ generator % 2).astype(np.uint8)


def build_tanner(H, order='ascending'):
    """
    Tanner graph of a parity-check matrix.

    :param H: A ParityCheckMatrix
    :param order: 'ascending' or 'descending' neighbor index per vertex
    :returns: A TannerGraph
    """
    var_neighbors = [[] for _ in range(H.n)]
    for check, row in enumerate(H.rows):
        for variable in row:
            var_neighbors[variable].append(check)

    graph = TannerGraph(var_neighbors, H.rows)
    if order == 'descending':
        return graph.reversed_order()
    if order != 'ascending':
        raise InvalidCode('unknown edge order %r' % order)
    return graph


def gf2_row_reduce(matrix):
    """
    Reduced row echelon form over GF(2).

    :param matrix: Array-like of shape (rows, cols)
    :returns: (reduced uint8 array, list of pivot columns)
    """
    reduced = np.array(matrix, dtype=np.uint8, ndmin=2) % 2
    rows, cols = reduced.shape
    pivots = []
    row = 0
    for col in range(cols):
        if row == rows:
            break
        candidates = np.flatnonzero(reduced[row:, col])
        if candidates.size == 0:
            continue
        pivot = row + candidates[0]
        if pivot != row:
            reduced[[row, pivot]] = reduced[[pivot, row]]
        others = np.flatnonzero(reduced[:, col])
        others = others[others != row]
        reduced[others] ^= reduced[row]
        pivots.append(col)
        row += 1
    return reduced, pivots


def gf2_rank_and_nullspace(H):
    """
    GF(2) rank of H and a basis of its nullspace, the code itself.

    :param H: A ParityCheckMatrix
    :returns: (rank, GeneratorBasis)
    """
    reduced, pivots = gf2_row_reduce(H.dense()) if H.m else (np.zeros((0, H.n), np.uint8), [])
    pivot_set = set(pivots)
    free = [col for col in range(H.n) if col not in pivot_set]

    vectors = np.zeros((len(free), H.n), dtype=np.uint8)
    for index, col in enumerate(free):
        vectors[index, col] = 1
        for row, pivot in enumerate(pivots):
            vectors[index, pivot] = reduced[row, col]

    return len(pivots), GeneratorBasis(H.n, vectors)


def sample_codeword(basis, rng):
    """
    Uniformly distributed codeword.

    :param basis: A GeneratorBasis
    :param rng: A numpy Generator
    :returns: uint8 array of length n
    """
    if basis.k == 0:
        return np.zeros(basis.n, dtype=np.uint8)
    coefficients = rng.integers(0, 2, size=basis.k)
    return (coefficients @ basis.vectors.astype(np.int64) % 2).astype(np.uint8)


def make_repetition(n):
    if n < 2:
        raise InvalidCode('repetition code needs n >= 2, got %d' % n)
    return ParityCheckMatrix(n, [(i, i + 1) for i in range(n - 1)], name='repetition%d' % n)


def make_tailbiting_conv(n):
    """
    Rate 1/2 tailbiting convolutional code with generators (1+D^2, 1+D+D^2).
    Row r is the pattern 110111 placed at column 2r, wrapping around.

    :param n: Even blocklength, at least 6
    :returns: A ParityCheckMatrix with n/2 rows
    """
    if n % 2 or n < 6:
        raise InvalidCode('tailbiting code needs an even n >= 6, got %d' % n)
    offsets = [j for j, bit in enumerate(TAILBITING_PATTERN) if bit]
    rows = [[(2 * r + j) % n for j in offsets] for r in range(n // 2)]
    return ParityCheckMatrix(n, rows, name='tailbiting%d' % n)


def make_golay():
    return load_alist(GOLAY_ALIST, name='golay23')


def make_regular_ldpc(n, dv, dc, seed):
    """
    Regular LDPC code from the configuration model. Sockets are paired by a
    seeded permutation; parallel edges are removed by swapping one of the
    offending sockets with a random socket.

    :param n: Blocklength
    :param dv: Variable degree
    :param dc: Check degree
    :param seed: Seed of the pairing
    :returns: A ParityCheckMatrix with n*dv/dc rows
    """
    if n < 1 or dv < 1 or dc < 1 or (n * dv) % dc:
        raise InvalidCode('n*dv must be a positive multiple of dc (n=%s, dv=%s, dc=%s)' % (n, dv, dc))
    if dc > n:
        raise InvalidCode('check degree %d exceeds blocklength %d' % (dc, n))

    rng = np.random.default_rng(seed)
    m = n * dv // dc
    sockets = np.repeat(np.arange(n), dv)[rng.permutation(n * dv)]

    budget = LDPC_RETRIES_PER_SOCKET * sockets.size
    swaps = 0
    while True:
        slots = sockets.reshape(m, dc)
        bad = [check for check in range(m) if len(set(slots[check])) < dc]
        if not bad:
            break
        if swaps >= budget:
            raise InvalidCode('could not remove parallel edges after %d swaps' % swaps)
        check = bad[0]
        seen = set()
        for port in range(dc):
            if slots[check, port] in seen:
                break
            seen.add(slots[check, port])
        other = rng.integers(0, sockets.size)
        here = check * dc + port
        sockets[here], sockets[other] = sockets[other], sockets[here]
        swaps += 1

    if swaps:
        logger.warning('LDPC(%d,%d,%d) seed %s: %d swaps to remove parallel edges', n, dv, dc, seed, swaps)

    rows = [sockets[check * dc:(check + 1) * dc] for check in range(m)]
    return ParityCheckMatrix(n, rows, name='ldpc%d-%d-%d' % (n, dv, dc))


def make_random(n, m, rng, max_row_weight=3):
    """
    Random sparse matrix with row weights drawn from [1, max_row_weight].
    Duplicate rows may occur.
    """
    rows = []
    for _ in range(m):
        weight = int(rng.integers(1, min(max_row_weight, n) + 1))
        rows.append(rng.choice(n, size=weight, replace=False))
    return ParityCheckMatrix(n, rows, name='random%d-%d' % (n, m))


def _read_ints(line, number, expected=None):
    try:
        values = [int(token) for token in line.split()]
    except ValueError:
        raise AlistFormatError(number, 'expected integers, got %r' % line.strip())
    if expected is not None and len(values) != expected:
        raise AlistFormatError(number, 'expected %d integers, got %d' % (expected, len(values)))
    return values


def load_alist(path, name=None):
    """
    Read a parity-check matrix in alist format. Zero padding at the end of
    neighbor lines is tolerated.

    :param path: File path
    :param name: Optional display name, the file stem by default
    :returns: A ParityCheckMatrix
    """
    with open(path) as handle:
        lines = handle.read().splitlines()

    if len(lines) < 4:
        raise AlistFormatError(len(lines) + 1, 'truncated header')

    n, m = _read_ints(lines[0], 1, 2)
    max_dv, max_dc = _read_ints(lines[1], 2, 2)
    var_degrees = _read_ints(lines[2], 3, n)
    check_degrees = _read_ints(lines[3], 4, m)

    if len(lines) < 4 + n + m:
        raise AlistFormatError(len(lines) + 1, 'expected %d neighbor lines' % (n + m))

    if max(var_degrees or [0]) != max_dv or max(check_degrees or [0]) != max_dc:
        raise AlistFormatError(2, 'maximum degrees disagree with the degree lines')

    var_neighbors = []
    for variable in range(n):
        number = 5 + variable
        items = [item for item in _read_ints(lines[number - 1], number) if item]
        if len(items) != var_degrees[variable]:
            raise AlistFormatError(number, 'variable %d lists %d checks, degree says %d'
                                   % (variable + 1, len(items), var_degrees[variable]))
        if len(set(items)) != len(items):
            raise AlistFormatError(number, 'variable %d repeats a check index' % (variable + 1))
        if any(item < 1 or item > m for item in items):
            raise AlistFormatError(number, 'check index out of range')
        var_neighbors.append(set(item - 1 for item in items))

    rows = []
    for check in range(m):
        number = 5 + n + check
        items = [item for item in _read_ints(lines[number - 1], number) if item]
        if len(items) != check_degrees[check]:
            raise AlistFormatError(number, 'check %d lists %d variables, degree says %d'
                                   % (check + 1, len(items), check_degrees[check]))
        if len(set(items)) != len(items):
            raise AlistFormatError(number, 'check %d repeats a variable index' % (check + 1))
        if any(item < 1 or item > n for item in items):
            raise AlistFormatError(number, 'variable index out of range')
        for item in items:
            if check not in var_neighbors[item - 1]:
                raise AlistFormatError(number, 'check %d and variable %d disagree on adjacency'
                                       % (check + 1, item))
        rows.append([item - 1 for item in items])

    if sum(var_degrees) != sum(check_degrees):
        raise AlistFormatError(3, 'variable and check degrees do not sum to the same edge count')

    if name is None:
        name = os.path.splitext(os.path.basename(path))[0]
    return ParityCheckMatrix(n, rows, name=name)


def dump_alist(H, path):
    """
    Write H in the alist format read by load_alist.
    """
    graph = build_tanner(H)
    var_degrees = [len(items) for items in graph.var_neighbors]
    check_degrees = [len(items) for items in graph.check_neighbors]

    lines = ['%d %d' % (H.n, H.m),
             '%d %d' % (max(var_degrees or [0]), max(check_degrees or [0])),
             ' '.join(str(degree) for degree in var_degrees),
             ' '.join(str(degree) for degree in check_degrees)]
    lines.extend(' '.join(str(check + 1) for check in items) for items in graph.var_neighbors)
    lines.extend(' '.join(str(variable + 1) for variable in items) for items in graph.check_neighbors)

    with open(path, 'w') as handle:
        handle.write('\n'.join(lines) + '\n')
