import logging
import math

import numpy as np

from . import trellis
from .channels import ERASED, likelihoods
from .codes import build_tanner, gf2_row_reduce, make_tailbiting_conv
from .exceptions import DecodingError, InvalidChannel, InvalidCode, InvalidScheme, TreeArithmeticError
from .gmrf import dualize, posterior_marginal_enumeration
from .messages import CONSISTENCY_TOLERANCE, WeightPair, concatenate, consistency_gap
from .sawtree import (BALL, BALL_PLUS_BP, BEC_ADAPTIVE, DEFAULT_NODE_BUDGET, FULL, TERMINATED,
                      TRUNCATED_FORCED, ball, build_saw_tree, parse_scheme)


logger = logging.getLogger(__name__)

OK = 'ok'
AMBIGUOUS = 'ambiguous'

#: Relative gap under which the two entries of a marginal count as tied
TIE_TOLERANCE = 1e-12

#: Belief propagation convergence threshold on message changes
BP_CONVERGENCE = 1e-9

#: Round cap of belief propagation run to convergence
BP_MAX_ROUNDS = 400


class DecodeOutput(object):
    """
    Per-bit normalized marginals, hard decisions and ambiguity flags.
    """

    def __init__(self, marginals, decisions, ambiguous):
        self.marginals = marginals
        self.decisions = decisions
        self.ambiguous = ambiguous

    @classmethod
    def from_pairs(cls, pairs):
        """
        Decide from per-bit weight pairs. Negative entries are clipped to
        zero; a pair that clips to zero, or whose entries tie, is ambiguous
        and decides 0.

        :param pairs: float array of shape (n, 2), any positive scale per row
        :returns: A DecodeOutput
        """
        pairs = np.clip(np.asarray(pairs, dtype=float).reshape(-1, 2), 0.0, None)
        totals = pairs.sum(axis=1)
        empty = ~(totals > 0.0)
        marginals = np.where(empty[:, None], 0.5, pairs / np.where(empty, 1.0, totals)[:, None])
        tied = np.abs(marginals[:, 0] - marginals[:, 1]) <= TIE_TOLERANCE
        ambiguous = empty | tied
        decisions = np.where(ambiguous, 0, marginals[:, 1] > marginals[:, 0]).astype(np.uint8)
        return cls(marginals, decisions, ambiguous)

    @property
    def n(self):
        return self.decisions.size

    @property
    def flags(self):
        return [AMBIGUOUS if flag else OK for flag in self.ambiguous]

    def bit_errors(self, word, erasure_channel):
        """
        Errors against the transmitted word. On an erasure channel every
        ambiguous bit counts one half.
        """
        wrong = self.decisions != np.asarray(word, dtype=np.uint8)
        if erasure_channel:
            return float(np.where(self.ambiguous, 0.5, wrong).sum())
        return float(wrong.sum())

    def __repr__(self):
        return '<DecodeOutput n=%d ambiguous=%d>' % (self.n, int(self.ambiguous.sum()))


def _check_length(H, outputs):
    outputs = np.asarray(outputs)
    if outputs.shape != (H.n,):
        raise InvalidChannel('expected %d channel outputs, got shape %s' % (H.n, outputs.shape))
    return outputs


def tp_root_marginal(tree, verify=False):
    """
    Generalized root marginal of a self-avoiding-walk tree, computed in one
    pass from the leaves up. Children of a block are combined by
    concatenation, blocks and the vertex weight by products.

    :param tree: A SawTree
    :param verify: Check, on untruncated trees, that neighboring children of
                   a block agree on the shared entry
    :returns: A WeightPair proportional to the root marginal
    """
    m = tree.source
    nodes = tree.nodes
    exact = tree.is_exact
    verify = verify and exact
    messages = [None] * len(nodes)

    for node_id in range(len(nodes) - 1, -1, -1):
        node = nodes[node_id]
        if node.kind == TERMINATED:
            messages[node_id] = WeightPair.indicator(node.forced)
            continue

        u = node.projection
        psi = m.vertex_weights[u]
        out = WeightPair(psi[0], psi[1])
        if node.kind == TRUNCATED_FORCED:
            out = out * WeightPair.indicator(node.forced)

        for block in node.children_blocks:
            edge = [messages[child].transform(m.edge_table(u, nodes[child].projection))
                    for child in block]
            if verify:
                for left, right in zip(edge, edge[1:]):
                    gap = consistency_gap(left, right)
                    if gap > CONSISTENCY_TOLERANCE:
                        raise TreeArithmeticError('block of node %d breaks concatenation by %g'
                                                  % (node_id, gap))
            out = out * (edge[0] if len(edge) == 1 else concatenate(edge[0], edge[-1]))
            for child in block:
                messages[child] = None
        messages[node_id] = out

    root = messages[0]
    if root.is_zero and exact:
        raise TreeArithmeticError('zero root marginal on an untruncated tree')
    return root


def sum_product_root_marginal(tree):
    """
    Ordinary sum-product marginal at the root of the tree seen as a plain
    tree model: every child is its own factor, terminated leaves are
    clamped to their value.
    """
    m = tree.source
    nodes = tree.nodes
    messages = [None] * len(nodes)
    for node_id in range(len(nodes) - 1, -1, -1):
        node = nodes[node_id]
        if node.kind == TERMINATED:
            messages[node_id] = WeightPair.indicator(node.forced)
            continue
        u = node.projection
        psi = m.vertex_weights[u]
        out = WeightPair(psi[0], psi[1])
        if node.kind == TRUNCATED_FORCED:
            out = out * WeightPair.indicator(node.forced)
        for child in node.children:
            out = out * messages[child].transform(m.edge_table(u, nodes[child].projection))
        messages[node_id] = out
    return messages[0]


def ratio_root_marginal(tree):
    """
    Root marginal from the likelihood-ratio form of the recursion,
    R_u = psi_u(1)/psi_u(0) times the product of edge ratios. Only sound
    when no denominator vanishes, as on strictly positive models.

    :returns: (p0, p1)
    """
    m = tree.source
    nodes = tree.nodes
    ratios = [None] * len(nodes)
    for node_id in range(len(nodes) - 1, -1, -1):
        node = nodes[node_id]
        if node.kind in (TERMINATED, TRUNCATED_FORCED):
            ratios[node_id] = math.inf if node.forced else 0.0
            continue
        u = node.projection
        psi0, psi1 = m.vertex_weights[u]
        ratio = psi1 / psi0
        for child in node.children:
            table = m.edge_table(u, nodes[child].projection)
            r = ratios[child]
            if math.isinf(r):
                ratio *= table[1][1] / table[0][1]
            else:
                ratio *= (table[1][0] + table[1][1] * r) / (table[0][0] + table[0][1] * r)
        ratios[node_id] = ratio
    root = ratios[0]
    if math.isinf(root):
        return 0.0, 1.0
    return 1.0 / (1.0 + root), root / (1.0 + root)


def peel_erasures(g, received, checks=None):
    """
    Erasure peeling: a check with a single unknown neighbor determines it.

    :param g: A TannerGraph
    :param received: Mapping variable -> bit of unerased positions
    :param checks: Checks that may be used, all by default
    :returns: Mapping variable -> bit of every position known after peeling
    """
    known = dict(received)
    checks = list(range(g.check_count)) if checks is None else list(checks)
    changed = True
    while changed:
        changed = False
        for check in checks:
            variables = g.check_neighbors[check]
            unknown = [v for v in variables if v not in known]
            if len(unknown) == 1:
                known[unknown[0]] = sum(known[v] for v in variables if v != unknown[0]) % 2
                changed = True
    return known


def _received(outputs):
    return dict((i, int(bit)) for i, bit in enumerate(outputs) if bit != ERASED)


def _point_mass(bit):
    return (1.0, 0.0) if bit == 0 else (0.0, 1.0)


def _tp_erasure_exact(g, dual, outputs, scheme, node_budget):
    """
    Exact schemes on an erasure channel. Known positions, including those
    recovered by peeling inside the allowed region, are conditioned out of
    the dual model before the tree is built; the marginals are unchanged.
    """
    n = g.var_count
    pairs = np.empty((n, 2))
    received = _received(outputs)

    if scheme.variant == FULL:
        known = peel_erasures(g, received)
        reduced = dual.eliminate_known(known)
        for i in range(n):
            if i in known:
                pairs[i] = _point_mass(known[i])
            else:
                tree = build_saw_tree(reduced, i, scheme, node_budget=node_budget)
                pairs[i] = tp_root_marginal(tree).mantissas()
        return pairs

    for i in range(n):
        if i in received:
            pairs[i] = _point_mass(received[i])
            continue
        variables, checks = ball(i, scheme.t, g)
        known = peel_erasures(g, received, checks)
        if i in known:
            pairs[i] = _point_mass(known[i])
            continue
        inside = set(variables)
        allowed = inside | set(n + a for a in checks)
        reduced = dual.eliminate_known(dict((v, b) for v, b in known.items() if v in inside))
        tree = build_saw_tree(reduced, i, scheme, allowed=allowed, node_budget=node_budget)
        pairs[i] = tp_root_marginal(tree).mantissas()
    return pairs


def erasure_known(g, outputs):
    """
    Bits known on an erasure channel after peeling, as variable -> bit.
    """
    return peel_erasures(g, _received(outputs))


def _tp_erasure_adaptive(g, dual, outputs, scheme, node_budget):
    """
    Adaptive scheme. Peeled bits are exact, so they become forced leaves
    along with the received ones and need no tree of their own.
    """
    known = erasure_known(g, outputs)
    pairs = np.empty((g.var_count, 2))
    for i in range(g.var_count):
        if i in known:
            pairs[i] = _point_mass(known[i])
            continue
        tree = build_saw_tree(dual, i, scheme, known=known, node_budget=node_budget)
        pairs[i] = tp_root_marginal(tree).mantissas()
    return pairs


def tp_decode(H, outputs, ch, scheme, node_budget=DEFAULT_NODE_BUDGET, order='ascending'):
    """
    Tree-pruning decoding: one self-avoiding-walk tree per bit on the dual
    model, cut by ``scheme``.

    :param H: A ParityCheckMatrix
    :param outputs: Channel outputs
    :param ch: A ChannelSpec
    :param scheme: A TruncationScheme
    :param node_budget: Cap on the nodes of each tree
    :param order: Edge order of the Tanner graph
    :returns: A DecodeOutput
    """
    outputs = _check_length(H, outputs)
    if scheme.variant == BEC_ADAPTIVE and not ch.is_erasure:
        raise InvalidScheme('scheme %s needs an erasure channel' % scheme.label)

    g = build_tanner(H, order)
    dual = dualize(g, likelihoods(outputs, ch))

    if ch.is_erasure and scheme.variant in (FULL, BALL):
        pairs = _tp_erasure_exact(g, dual, outputs, scheme, node_budget)
    elif scheme.variant == BEC_ADAPTIVE:
        pairs = _tp_erasure_adaptive(g, dual, outputs, scheme, node_budget)
    else:
        pairs = np.empty((H.n, 2))
        for i in range(H.n):
            tree = build_saw_tree(dual, i, scheme, node_budget=node_budget)
            pairs[i] = tp_root_marginal(tree).mantissas()

    return DecodeOutput.from_pairs(pairs)


class _MessageLayout(object):
    """
    Edge indexing of a Tanner graph in the check view (m, dc_max) and the
    variable view (n, dv_max), padded with -1.
    """

    def __init__(self, g):
        edges = [(v, a) for a, variables in enumerate(g.check_neighbors) for v in variables]
        self.edge_vars = np.array([v for v, _ in edges], dtype=np.int64)
        dc_max = max([len(items) for items in g.check_neighbors] or [0])
        dv_max = max([len(items) for items in g.var_neighbors] or [0])

        self.check_edges = np.full((g.check_count, dc_max), -1, dtype=np.int64)
        self.var_edges = np.full((g.var_count, dv_max), -1, dtype=np.int64)
        var_fill = np.zeros(g.var_count, dtype=np.int64)
        index = 0
        for a, variables in enumerate(g.check_neighbors):
            for port, v in enumerate(variables):
                self.check_edges[a, port] = index
                self.var_edges[v, var_fill[v]] = index
                var_fill[v] += 1
                index += 1
        self.edge_count = index


def _leave_one_out(values, ports):
    """
    Product over all ports but one, for each port, without division.
    """
    out = np.empty_like(values)
    for port in range(ports):
        out[:, port] = np.prod(np.delete(values, port, axis=1), axis=1)
    return out


def bp_decode(H, outputs, ch, iterations=None):
    """
    Sum-product decoding on the Tanner graph with a flooding schedule.

    :param iterations: Number of rounds, or None (or inf) to run until the
                       largest message change drops below BP_CONVERGENCE,
                       at most BP_MAX_ROUNDS rounds
    :returns: A DecodeOutput
    """
    outputs = _check_length(H, outputs)
    lik = likelihoods(outputs, ch)
    converge = iterations is None or (isinstance(iterations, float) and math.isinf(iterations))
    rounds = BP_MAX_ROUNDS if converge else int(iterations)
    if rounds < 0:
        raise InvalidCode('iteration count must be nonnegative, got %d' % rounds)
    if rounds == 0 or H.m == 0:
        return DecodeOutput.from_pairs(lik)

    layout = _MessageLayout(build_tanner(H))
    check_mask = layout.check_edges >= 0
    var_mask = layout.var_edges >= 0
    channel = lik / lik.sum(axis=1, keepdims=True)

    # variable-to-check messages as differences p0 - p1
    to_check = channel[layout.edge_vars, 0] - channel[layout.edge_vars, 1]
    to_var = np.zeros((layout.edge_count, 2))
    previous = None

    for round_index in range(rounds):
        deltas = np.ones(layout.check_edges.shape)
        deltas[check_mask] = to_check[layout.check_edges[check_mask]]
        out = _leave_one_out(deltas, deltas.shape[1])
        delta = np.empty(layout.edge_count)
        delta[layout.check_edges[check_mask]] = out[check_mask]
        to_var[:, 0] = (1.0 + delta) / 2.0
        to_var[:, 1] = (1.0 - delta) / 2.0

        incoming = np.ones(layout.var_edges.shape + (2,))
        incoming[var_mask] = to_var[layout.var_edges[var_mask]]
        for port in range(incoming.shape[1]):
            extrinsic = channel * np.prod(np.delete(incoming, port, axis=1), axis=1)
            totals = extrinsic.sum(axis=1)
            totals[totals <= 0.0] = 1.0
            valid = var_mask[:, port]
            to_check[layout.var_edges[valid, port]] = ((extrinsic[valid, 0] - extrinsic[valid, 1]) /
                                                       totals[valid])

        if converge and previous is not None and np.max(np.abs(delta - previous)) < BP_CONVERGENCE:
            logger.debug('BP converged after %d rounds', round_index + 1)
            break
        previous = delta

    beliefs = channel * np.prod(incoming, axis=1)
    return DecodeOutput.from_pairs(beliefs)


def map_decode_enumeration(H, outputs, ch):
    outputs = _check_length(H, outputs)
    return DecodeOutput.from_pairs(posterior_marginal_enumeration(H, likelihoods(outputs, ch)))


def _gauss_status(H, outputs):
    """
    :returns: (known bits as int array with -1 for undetermined positions)
    """
    outputs = np.asarray(outputs)
    erased = np.flatnonzero(outputs == ERASED)
    status = outputs.astype(np.int64)
    if H.m == 0:
        return status

    matrix = H.dense().astype(np.int64)
    known = outputs != ERASED
    syndrome = matrix[:, known] @ outputs[known].astype(np.int64) % 2
    augmented = np.hstack([matrix[:, erased], syndrome[:, None]])
    reduced, pivots = gf2_row_reduce(augmented)

    if erased.size in pivots:
        raise DecodingError('received word is inconsistent with the code')

    pivot_set = set(pivots)
    free = [col for col in range(erased.size) if col not in pivot_set]
    for row, col in enumerate(pivots):
        if free and reduced[row, free].any():
            continue
        status[erased[col]] = reduced[row, -1]
    return status


def map_decode_bec_gauss(H, outputs):
    """
    Erasure MAP decoding by Gaussian elimination over the erased columns.
    Undetermined bits get the uniform marginal and the ambiguous flag.
    """
    outputs = _check_length(H, outputs)
    status = _gauss_status(H, outputs)
    pairs = np.full((H.n, 2), 0.5)
    pairs[status == 0] = (1.0, 0.0)
    pairs[status == 1] = (0.0, 1.0)
    return DecodeOutput.from_pairs(pairs)


def local_map_ball_decode(H, outputs, t):
    """
    Per bit, erasure MAP decoding of the ball of radius t around it, using
    only the outputs received inside the ball.
    """
    outputs = _check_length(H, outputs)
    if t < 0:
        raise InvalidScheme('ball radius must be nonnegative, got %d' % t)
    g = build_tanner(H)
    pairs = np.full((H.n, 2), 0.5)
    for i in range(H.n):
        if outputs[i] != ERASED:
            pairs[i] = _point_mass(outputs[i])
            continue
        variables, checks = ball(i, t, g)
        if not checks:
            continue
        status = _gauss_status(H.restrict(variables, checks), outputs[variables])
        bit = status[variables.index(i)]
        if bit >= 0:
            pairs[i] = _point_mass(bit)
    return DecodeOutput.from_pairs(pairs)


def map_decode_tailbiting_bcjr(H, outputs, ch):
    """
    Exact symbol-MAP decoding of a tailbiting code built by
    make_tailbiting_conv, via BCJR on the ring.
    """
    outputs = _check_length(H, outputs)
    if H.n % 2 or H.n < 6 or H != make_tailbiting_conv(H.n):
        raise InvalidCode('%r is not a tailbiting code of the trellis' % H)
    return DecodeOutput.from_pairs(trellis.bcjr_marginals(likelihoods(outputs, ch)))


def raw_channel_decode(H, outputs, ch):
    """
    Hard decisions from the channel alone; erasures are ambiguous.
    """
    outputs = _check_length(H, outputs)
    return DecodeOutput.from_pairs(likelihoods(outputs, ch))


TP = 'tp'
BP = 'bp'
MAP_ENUM = 'map-enum'
MAP_GAUSS = 'map-gauss'
BCJR = 'bcjr'
LOCAL_MAP = 'local-map'
RAW = 'none'

DECODER_FAMILIES = (TP, BP, MAP_ENUM, MAP_GAUSS, BCJR, LOCAL_MAP, RAW)


class DecoderSpec(object):
    """
    A decoder with its parameters, as named on the command line and in
    sweep configurations.
    """

    __slots__ = ('family', 'scheme', 'iterations', 't')

    def __init__(self, family, scheme=None, iterations=None, t=None):
        if family not in DECODER_FAMILIES:
            raise InvalidScheme('unknown decoder %r' % (family,))
        if family == TP and scheme is None:
            raise InvalidScheme('tree-pruning decoder needs a truncation scheme')
        if family == LOCAL_MAP and (t is None or t < 0):
            raise InvalidScheme('local-map decoder needs a nonnegative radius')
        if family == BP and iterations is not None and iterations < 0:
            raise InvalidScheme('iteration count must be nonnegative')
        self.family = family
        self.scheme = scheme
        self.iterations = iterations
        self.t = t

    @property
    def label(self):
        if self.family == TP:
            return '%s:%s' % (TP, self.scheme.label)
        if self.family == BP:
            return '%s:%s' % (BP, 'inf' if self.iterations is None else self.iterations)
        if self.family == LOCAL_MAP:
            return '%s:%d' % (LOCAL_MAP, self.t)
        return self.family

    def csv_fields(self):
        """
        (decoder, scheme, t, ell) columns of the result file.
        """
        if self.family == TP:
            scheme = self.scheme
            ell = scheme.ell if scheme.variant == BALL_PLUS_BP else None
            return TP, scheme.variant, scheme.t, ell
        if self.family == BP:
            return BP, '', float('inf') if self.iterations is None else self.iterations, None
        if self.family == LOCAL_MAP:
            return LOCAL_MAP, '', self.t, None
        return self.family, '', None, None

    def decode(self, H, outputs, ch, node_budget=DEFAULT_NODE_BUDGET):
        if self.family == TP:
            return tp_decode(H, outputs, ch, self.scheme, node_budget=node_budget)
        if self.family == BP:
            return bp_decode(H, outputs, ch, self.iterations)
        if self.family == MAP_ENUM:
            return map_decode_enumeration(H, outputs, ch)
        if self.family in (MAP_GAUSS, LOCAL_MAP) and not ch.is_erasure:
            raise InvalidScheme('decoder %s needs an erasure channel' % self.label)
        if self.family == MAP_GAUSS:
            return map_decode_bec_gauss(H, outputs)
        if self.family == LOCAL_MAP:
            return local_map_ball_decode(H, outputs, self.t)
        if self.family == BCJR:
            return map_decode_tailbiting_bcjr(H, outputs, ch)
        return raw_channel_decode(H, outputs, ch)

    def __eq__(self, other):
        return isinstance(other, DecoderSpec) and self.label == other.label

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.label)

    def __reduce__(self):
        return self.__class__, (self.family, self.scheme, self.iterations, self.t)

    def __repr__(self):
        return '<DecoderSpec %s>' % self.label


def parse_decoder(text):
    """
    Parse a decoder label: ``tp:<scheme>``, ``bp:N``, ``bp:inf``,
    ``map-enum``, ``map-gauss``, ``bcjr``, ``local-map:T`` or ``none``.
    """
    family, _, args = text.strip().lower().partition(':')
    if family == TP:
        return DecoderSpec(TP, scheme=parse_scheme(args))
    if family == BP:
        if args in ('', 'inf'):
            return DecoderSpec(BP)
        try:
            return DecoderSpec(BP, iterations=int(args))
        except ValueError:
            raise InvalidScheme('bad BP iteration count %r' % args)
    if family == LOCAL_MAP:
        try:
            return DecoderSpec(LOCAL_MAP, t=int(args))
        except ValueError:
            raise InvalidScheme('bad local-map radius %r' % args)
    if args:
        raise InvalidScheme('decoder %s takes no parameters' % family)
    return DecoderSpec(family)
