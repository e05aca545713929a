"""
Self-avoiding-walk trees of generalized MRFs.
"""
import collections
import logging

import networkx as nx

from .exceptions import InvalidScheme, InvalidWalk, NodeBudgetExceeded
from .gmrf import CHECK


logger = logging.getLogger(__name__)

FULL = 'full'
FIXED_DEPTH_FREE = 'fixed'
BEC_ADAPTIVE = 'bec'
BALL = 'ball'
BALL_PLUS_BP = 'ballbp'

SCHEMES = (FULL, FIXED_DEPTH_FREE, BEC_ADAPTIVE, BALL, BALL_PLUS_BP)

INTERNAL = 'internal'
LEAF_NATURAL = 'leaf'
TERMINATED = 'terminated'
TRUNCATED_FREE = 'truncated-free'
TRUNCATED_FORCED = 'truncated-forced'

#: Partition of children by components of the graph minus the walk
RESIDUAL = 'residual'

#: Partition of children by the transitive closure over the built subtrees
CLOSURE = 'closure'

#: Default cap on the number of tree nodes
DEFAULT_NODE_BUDGET = 10 ** 7


class TruncationScheme(object):
    """
    How the tree is cut. ``t`` and ``ell`` count variable levels; the depth
    limit in graph edges is 2t.
    """

    __slots__ = ('variant', 't', 'ell')

    def __init__(self, variant, t=None, ell=0):
        if variant not in SCHEMES:
            raise InvalidScheme('unknown truncation scheme %r' % (variant,))
        if variant == FULL:
            t, ell = None, 0
        else:
            if t is None:
                raise InvalidScheme('scheme %s needs a depth' % variant)
            t = int(t)
            if t < 0:
                raise InvalidScheme('depth must be nonnegative, got %d' % t)
        ell = int(ell or 0)
        if ell < 0:
            raise InvalidScheme('graft depth must be nonnegative, got %d' % ell)
        if ell and variant != BALL_PLUS_BP:
            raise InvalidScheme('only %s takes a graft depth' % BALL_PLUS_BP)

        self.variant = variant
        self.t = t
        self.ell = ell

    @property
    def depth_limit(self):
        if self.variant in (FIXED_DEPTH_FREE, BEC_ADAPTIVE):
            return 2 * self.t
        return None

    @property
    def label(self):
        if self.variant == FULL:
            return FULL
        if self.variant == BALL_PLUS_BP:
            return '%s:%d,%d' % (self.variant, self.t, self.ell)
        return '%s:%d' % (self.variant, self.t)

    def __eq__(self, other):
        return isinstance(other, TruncationScheme) and self.label == other.label

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.label)

    def __reduce__(self):
        return self.__class__, (self.variant, self.t, self.ell)

    def __repr__(self):
        return '<TruncationScheme %s>' % self.label


def parse_scheme(text):
    """
    Parse ``full``, ``fixed:T``, ``bec:T``, ``ball:T`` or ``ballbp:T,L``.
    """
    variant, _, args = text.strip().lower().partition(':')
    args = args.strip('()')
    try:
        values = [int(item) for item in args.split(',') if item.strip()]
    except ValueError:
        raise InvalidScheme('bad scheme parameters in %r' % text)

    if variant == FULL and not values:
        return TruncationScheme(FULL)
    if variant == BALL_PLUS_BP and len(values) == 2:
        return TruncationScheme(variant, values[0], values[1])
    if variant in (FIXED_DEPTH_FREE, BEC_ADAPTIVE, BALL) and len(values) == 1:
        return TruncationScheme(variant, values[0])
    raise InvalidScheme('cannot parse truncation scheme %r' % text)


class SawNode(object):
    __slots__ = ('walk', 'kind', 'forced', 'children_blocks', 'grafted')

    def __init__(self, walk, kind=INTERNAL):
        self.walk = walk
        self.kind = kind
        self.forced = None
        self.children_blocks = []
        self.grafted = False

    @property
    def projection(self):
        return self.walk[-1]

    @property
    def depth(self):
        return len(self.walk) - 1

    @property
    def children(self):
        return [child for block in self.children_blocks for child in block]

    def __repr__(self):
        return '<SawNode %s %s>' % (self.kind, '-'.join(str(v) for v in self.walk))


TreeStats = collections.namedtuple('TreeStats', ['nodes', 'max_depth', 'terminated', 'truncated',
                                                 'depth_histogram'])


class SawTree(object):
    """
    Arena of nodes; node 0 is the root and every child has a larger id than
    its parent.
    """

    root = 0

    def __init__(self, nodes, source, scheme):
        self.nodes = nodes
        self.source = source
        self.scheme = scheme

    def __len__(self):
        return len(self.nodes)

    @property
    def root_vertex(self):
        return self.nodes[self.root].projection

    @property
    def is_exact(self):
        """
        True when no branch was cut or grafted, so the root recursion is the
        exact marginal.
        """
        for node in self.nodes:
            if node.grafted or node.kind in (TRUNCATED_FREE, TRUNCATED_FORCED):
                return False
        return True

    def stats(self):
        histogram = collections.Counter(node.depth for node in self.nodes)
        kinds = collections.Counter(node.kind for node in self.nodes)
        return TreeStats(nodes=len(self.nodes),
                         max_depth=max(histogram),
                         terminated=kinds[TERMINATED],
                         truncated=kinds[TRUNCATED_FREE] + kinds[TRUNCATED_FORCED],
                         depth_histogram=dict(sorted(histogram.items())))


def _force_value(walk, m):
    j = walk[-1]
    first = walk.index(j)
    exit_rank = m.rank(j, walk[first + 1])
    entry_rank = m.rank(j, walk[-2])
    return 0 if exit_rank < entry_rank else 1


def terminated_force_value(node, m):
    """
    Value fixed at a leaf whose walk closes a loop at vertex j: 0 when the
    loop leaves j along a lower ordered edge than the one it comes back on,
    1 otherwise.

    :param node: A SawNode (or a walk tuple) whose endpoint repeats
    :param m: The GeneralizedMRF the walk lives on
    :returns: 0 or 1
    """
    walk = getattr(node, 'walk', node)
    if len(walk) < 3 or walk[-1] not in walk[:-1]:
        raise InvalidWalk('walk %s does not close a loop' % (walk,))
    return _force_value(walk, m)


def residual_partition(m, walk, children, excluded=()):
    """
    Group children (projections) of a node by the connected components of
    the graph minus the walk's vertices and minus ``excluded``.

    :returns: list of component labels, one per child
    """
    removed = set(walk)
    removed.update(excluded)
    view = nx.restricted_view(m.graph, removed, [])
    labels = [None] * len(children)
    for index, j in enumerate(children):
        if labels[index] is not None:
            continue
        component = nx.node_connected_component(view, j)
        for other in range(index, len(children)):
            if children[other] in component:
                labels[other] = index
    return labels


def closure_partition(children, masks):
    """
    Transitive closure of: two children are related when the subtree of one
    reaches the projection of the other.

    :param children: Projections of the children
    :param masks: Bitmask of the projections in each child's subtree
    :returns: list of component labels, one per child
    """
    # union-find; the root of a set is its smallest index
    parent = list(range(len(children)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a in range(len(children)):
        for b in range(a + 1, len(children)):
            if masks[a] >> children[b] & 1 or masks[b] >> children[a] & 1:
                first, second = find(a), find(b)
                if first != second:
                    parent[max(first, second)] = min(first, second)
    return [find(a) for a in range(len(children))]


def ball(i, t, g):
    """
    Variables within check distance t of i, with the checks whose whole
    neighborhood lies among them.

    :param i: Variable index
    :param t: Radius in variable levels
    :param g: A TannerGraph
    :returns: (sorted variables, sorted checks)
    """
    distances = nx.single_source_shortest_path_length(g.graph, i, cutoff=2 * t)
    variables = sorted(v for v in distances if v < g.var_count)
    inside = set(variables)
    checks = sorted(set(a for v in variables for a in g.var_neighbors[v]
                        if all(w in inside for w in g.check_neighbors[a])))
    return variables, checks


def ball_vertices(m, root, t):
    """
    Vertex set of the ball around ``root`` on a dual model: variable vertices
    within 2t graph edges plus check vertices whose neighbors all lie there.
    """
    distances = nx.single_source_shortest_path_length(m.graph, root, cutoff=2 * t)
    variables = set(v for v in distances if m.is_variable(v))
    checks = set(w for v in variables for w in m.neighbors[v]
                 if m.tags[w][0] == CHECK and all(x in variables for x in m.neighbors[w]))
    return variables | checks


class _TreeBuilder(object):

    def __init__(self, m, scheme, allowed, known, budget, partition):
        self.m = m
        self.scheme = scheme
        self.allowed = allowed
        self.excluded = () if allowed is None else set(range(m.vertex_count)) - allowed
        self.is_variable = [m.is_variable(v) for v in range(m.vertex_count)]
        # known bit per vertex, None where unknown
        self.known = [None] * m.vertex_count
        for v, bit in (known or {}).items():
            self.known[v] = bit
        self.budget = budget
        self.partition = partition
        self.limit = scheme.depth_limit
        self.graft_limit = 2 * scheme.ell if scheme.variant == BALL_PLUS_BP and scheme.ell else None
        self.nodes = []

    def new(self, walk, kind=INTERNAL):
        if len(self.nodes) >= self.budget:
            raise NodeBudgetExceeded('tree exceeded %d nodes' % self.budget)
        self.nodes.append(SawNode(walk, kind))
        return len(self.nodes) - 1

    def candidates(self, walk):
        previous = walk[-2] if len(walk) > 1 else None
        return [v for v in self.m.neighbors[walk[-1]]
                if v != previous and (self.allowed is None or v in self.allowed)]

    def cut_here(self, walk):
        return self.limit is not None and len(walk) + 1 > self.limit

    def blocks(self, walk, children):
        """
        :param children: (node id, projection, subtree mask or None when terminated)
        """
        open_children = [(index, child) for index, child in enumerate(children) if child[2] is not None]
        labels = list(range(len(children)))
        if len(open_children) > 1:
            projections = [child[1] for _, child in open_children]
            if self.partition == RESIDUAL:
                found = residual_partition(self.m, walk, projections, self.excluded)
            else:
                found = closure_partition(projections, [child[2] for _, child in open_children])
            for (index, _), label in zip(open_children, found):
                labels[index] = open_children[label][0]

        grouped = collections.OrderedDict()
        for (node_id, _, _), label in zip(children, labels):
            grouped.setdefault(label, []).append(node_id)
        return list(grouped.values())

    def terminal(self, walk):
        if self.graft_limit:
            node_id = self.new(walk)
            self.nodes[node_id].grafted = True
            self.graft(node_id, 0)
            return node_id
        node_id = self.new(walk, TERMINATED)
        self.nodes[node_id].forced = _force_value(walk, self.m)
        return node_id

    def grow(self, node_id, visited):
        node = self.nodes[node_id]
        walk = node.walk
        u = walk[-1]
        candidates = self.candidates(walk)
        if not candidates:
            node.kind = LEAF_NATURAL
            return 1 << u
        if self.is_variable[u] and self.cut_here(walk):
            node.kind = TRUNCATED_FREE
            return 1 << u

        mask = 1 << u
        children = []
        for v in candidates:
            child_walk = walk + (v,)
            if v in visited:
                children.append((self.terminal(child_walk), v, None))
                continue
            child = self.new(child_walk)
            visited.add(v)
            child_mask = self.grow(child, visited)
            visited.discard(v)
            mask |= child_mask
            children.append((child, v, child_mask))

        node.children_blocks = self.blocks(walk, children)
        return mask

    def grow_adaptive(self, node_id, visited):
        """
        Depth-first growth with erasure propagation. Returns the subtree mask
        and the bit the node's upward message determines (None if undecided).
        A variable decided by a child check is frozen to that value and its
        subtree dropped.
        """
        m = self.m
        node = self.nodes[node_id]
        walk = node.walk
        u = walk[-1]
        is_variable = self.is_variable[u]

        if self.known[u] is not None:
            node.kind = TRUNCATED_FORCED
            node.forced = self.known[u]
            return 1 << u, node.forced

        candidates = self.candidates(walk)
        if not candidates:
            node.kind = LEAF_NATURAL
            # a check with no other variable forces its parent to 0
            return 1 << u, (None if is_variable else 0)
        if is_variable and self.cut_here(walk):
            node.kind = TRUNCATED_FREE
            return 1 << u, None

        mark = len(self.nodes)
        mask = 1 << u
        children = []
        values = []
        for v in candidates:
            child_walk = walk + (v,)
            if v in visited:
                child = self.new(child_walk, TERMINATED)
                self.nodes[child].forced = _force_value(child_walk, m)
                value = self.known[v]
                children.append((child, v, None))
            else:
                child = self.new(child_walk)
                visited.add(v)
                child_mask, value = self.grow_adaptive(child, visited)
                visited.discard(v)
                mask |= child_mask
                children.append((child, v, child_mask))

            if is_variable and value is not None:
                del self.nodes[mark:]
                node.kind = TRUNCATED_FORCED
                node.forced = value
                node.children_blocks = []
                return 1 << u, value
            values.append(value)

        node.children_blocks = self.blocks(walk, children)
        if is_variable or any(value is None for value in values):
            return mask, None
        return mask, sum(values) % 2

    def graft(self, node_id, depth):
        """
        Plain computation tree below a terminated position: non-reversing,
        unrestricted, one child per block, cut free at variables.
        """
        node = self.nodes[node_id]
        walk = node.walk
        u = walk[-1]
        candidates = [v for v in self.m.neighbors[u] if v != walk[-2]]
        if not candidates:
            node.kind = LEAF_NATURAL
            return
        if self.is_variable[u] and depth + 2 > self.graft_limit:
            node.kind = TRUNCATED_FREE
            return
        blocks = []
        for v in candidates:
            child = self.new(walk + (v,))
            self.nodes[child].grafted = True
            self.graft(child, depth + 1)
            blocks.append([child])
        node.children_blocks = blocks


def build_saw_tree(m, root, scheme, known=None, allowed=None,
                   node_budget=DEFAULT_NODE_BUDGET, partition=None):
    """
    Build the (possibly truncated) self-avoiding-walk tree rooted at a
    variable vertex.

    :param m: A GeneralizedMRF
    :param root: Root vertex, tagged as a variable
    :param scheme: A TruncationScheme
    :param known: Mapping vertex -> bit of erasure channel values, required
                  by the adaptive scheme
    :param allowed: Vertex set walks may visit; the ball of the root for the
                    ball schemes when not given
    :param node_budget: Cap on the number of nodes
    :param partition: RESIDUAL or CLOSURE; by default residual components
                      for the untruncated schemes and the closure otherwise
    :returns: A SawTree
    """
    if not 0 <= root < m.vertex_count or not m.is_variable(root):
        raise InvalidScheme('tree root %r is not a variable vertex' % (root,))
    if scheme.variant == BEC_ADAPTIVE and known is None:
        raise InvalidScheme('scheme %s needs erasure channel outputs' % scheme.label)

    if scheme.variant in (BALL, BALL_PLUS_BP) and allowed is None:
        allowed = ball_vertices(m, root, scheme.t)
    if allowed is not None:
        allowed = set(allowed)
        allowed.add(root)

    if partition is None:
        partition = RESIDUAL if scheme.variant in (FULL, BALL, BALL_PLUS_BP) else CLOSURE
    if partition not in (RESIDUAL, CLOSURE):
        raise InvalidScheme('unknown partition rule %r' % (partition,))

    builder = _TreeBuilder(m, scheme, allowed, known, node_budget, partition)
    builder.new((root,))
    if scheme.variant == BEC_ADAPTIVE:
        builder.grow_adaptive(0, set([root]))
    else:
        builder.grow(0, set([root]))

    tree = SawTree(builder.nodes, m, scheme)
    logger.debug('SAW tree at vertex %d (%s): %d nodes', root, scheme.label, len(tree))
    return tree


def partition_children(tree, node_id):
    """
    Ordered blocks of child ids of a node; empty for leaves.
    """
    return [list(block) for block in tree.nodes[node_id].children_blocks]
