import enum
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType

import networkx as nx

from .records import MissingLeafOutcome

COST = 'cost'
TIME = 'time'
BASE_ATTRS = (COST, TIME)

class Polarity(enum.Enum):
    ATTACK = 'attack'
    DEFENCE = 'defence'

    @property
    def opposite(self):
        return Polarity.DEFENCE if self is Polarity.ATTACK else Polarity.ATTACK

class NodeKind(enum.Enum):
    LEAF = 'leaf'
    AND = 'and'
    OR = 'or'
    SAND = 'sand'
    COUNTER = 'counter'
    NOCOUNTER = 'nocounter'
    SCOUNTER = 'scounter'

    @property
    def is_gate(self):
        return self is not NodeKind.LEAF

    @property
    def is_countering(self):
        return self in (NodeKind.COUNTER, NodeKind.NOCOUNTER, NodeKind.SCOUNTER)

@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int = 1

    def __str__(self):
        return '{}:{}:{}'.format(self.file, self.line, self.column)

@dataclass(frozen=True)
class Diagnostic:
    rule: str
    subject: str
    message: str
    span: SourceSpan = field(default=None, compare=False)

    def format(self, fname='<model>'):
        """``file:line:col: message``, the form the CLI prints."""
        if self.span is not None:
            return '{}: {}'.format(self.span, self.message)
        return '{}:1:1: {}'.format(fname, self.message)

# Condition expressions. Literals are exact rationals; terms read either the
# intrinsic value of a node attribute or the value computed for it.

@dataclass(frozen=True)
class Const:
    value: Fraction

    def terms(self):
        return iter(())

    def __str__(self):
        return fmt_number(self.value)

@dataclass(frozen=True)
class Term:
    fn: str
    node: str
    attr: str
    span: SourceSpan = field(default=None, compare=False)

    def terms(self):
        yield self

    def __str__(self):
        return '{}({}.{})'.format(self.fn, self.node, self.attr)

@dataclass(frozen=True)
class Neg:
    operand: object

    def terms(self):
        return self.operand.terms()

    def __str__(self):
        inner = str(self.operand)
        if _precedence(self.operand) < 3:
            inner = '({})'.format(inner)
        return '-' + inner

@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object

    def terms(self):
        yield from self.left.terms()
        yield from self.right.terms()

    def __str__(self):
        p = _precedence(self)
        lhs, rhs = str(self.left), str(self.right)
        if _precedence(self.left) < p:
            lhs = '({})'.format(lhs)
        if _precedence(self.right) <= p:
            rhs = '({})'.format(rhs)
        return '{} {} {}'.format(lhs, self.op, rhs)

def _precedence(expr):
    if isinstance(expr, BinOp):
        return 2 if expr.op == '*' else 1
    if isinstance(expr, Neg):
        return 3
    return 4

COMPARISONS = ('<', '<=', '=', '>=', '>')
NEGATED = {
    '<': ('>=',),
    '<=': ('>',),
    '>': ('<=',),
    '>=': ('<',),
    '=': ('<', '>'),
}

@dataclass(frozen=True)
class Condition:
    lhs: object
    op: str
    rhs: object
    span: SourceSpan = field(default=None, compare=False)

    def terms(self):
        yield from self.lhs.terms()
        yield from self.rhs.terms()

    def negations(self):
        """Conditions whose disjunction is the negation of this one."""
        return tuple(Condition(self.lhs, op, self.rhs, self.span) for op in NEGATED[self.op])

    def __str__(self):
        return '{} {} {}'.format(self.lhs, self.op, self.rhs)

@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind
    polarity: Polarity
    children: tuple = ()
    attrs: tuple = ()
    condition: Condition = None
    span: SourceSpan = field(default=None, compare=False)

    def __post_init__(self):
        # canonical attribute form: sorted, exact, zeros dropped
        items = dict(self.attrs)
        attrs = tuple(sorted((k, Fraction(v)) for k, v in items.items() if Fraction(v) != 0))
        object.__setattr__(self, 'attrs', attrs)
        object.__setattr__(self, 'children', tuple(self.children))

    def attr(self, name):
        for k, v in self.attrs:
            if k == name:
                return v
        return Fraction(0)

    @property
    def own_child(self):
        return self.children[0] if self.kind.is_countering and self.children else None

    @property
    def opposite_child(self):
        return self.children[1] if self.kind.is_countering and len(self.children) > 1 else None

def fmt_number(q):
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return '{}/{}'.format(q.numerator, q.denominator)

class AdtModel(object):
    """An attack-defence tree (possibly a DAG) with attributes, agents and parameters.

    Instances are immutable; the ``with_*`` methods return modified copies.

    :param str name: tree name
    :param nodes: iterable of :py:class:`Node` in declaration order
    :param dict agents: node id -> agent name
    :param params: iterable of ``(node, attr)`` pairs treated symbolically by synthesis
    :param str root: root node, the unique node without parents when omitted
    :param str time_unit: coarsest time unit used in the source, for display
    """
    def __init__(self, name, nodes, agents=None, params=(), root=None, time_unit='min'):
        self.name = name
        self._nodes = OrderedDict((n.id, n) for n in nodes)
        self._agents = dict(agents or {})
        self.params = tuple(sorted(set(tuple(p) for p in params)))
        self.time_unit = time_unit
        g = nx.DiGraph()
        g.add_nodes_from(self._nodes)
        for n in self._nodes.values():
            for c in n.children:
                if c in self._nodes:
                    g.add_edge(n.id, c)
        self._graph = g
        self.root = root if root is not None else self._find_root()
        self._order = None

    def _find_root(self):
        roots = self.roots()
        return roots[0] if len(roots) == 1 else None

    def roots(self):
        return [n for n in self._nodes if self._graph.in_degree(n) == 0]

    @property
    def nodes(self):
        return MappingProxyType(self._nodes)

    @property
    def agents(self):
        return MappingProxyType(self._agents)

    @property
    def graph(self):
        return self._graph

    def node(self, nid):
        return self._nodes[nid]

    def __contains__(self, nid):
        return nid in self._nodes

    def __len__(self):
        return len(self._nodes)

    @property
    def leaves(self):
        return [n for n, node in self._nodes.items() if node.kind is NodeKind.LEAF]

    @property
    def order(self):
        """Node ids children-first (post-order from the root, children in declared order)."""
        if self._order is None:
            seen = []
            if self.root is not None and nx.is_directed_acyclic_graph(self._graph):
                seen = list(nx.dfs_postorder_nodes(self._graph, self.root))
            done = set(seen)
            rest = [n for n in self._nodes if n not in done]
            self._order = tuple(seen + rest)
        return self._order

    def parents(self, nid):
        return list(self._graph.predecessors(nid))

    def descendants(self, nid):
        return nx.descendants(self._graph, nid)

    @property
    def attr_names(self):
        names = set(BASE_ATTRS)
        for n in self._nodes.values():
            names.update(k for k, _ in n.attrs)
        for _, a in self.params:
            names.add(a)
        return tuple(sorted(names))

    def intrinsic(self, nid, attr):
        return self._nodes[nid].attr(attr)

    def agent_of(self, nid):
        return self.agents.get(nid)

    def is_param(self, nid, attr):
        return (nid, attr) in self.params

    def _copy(self, nodes=None, agents=None, params=None):
        return AdtModel(
            self.name,
            nodes if nodes is not None else self._nodes.values(),
            agents=agents if agents is not None else self.agents,
            params=params if params is not None else self.params,
            root=self.root,
            time_unit=self.time_unit,
        )

    def with_agents(self, agents):
        return self._copy(agents=agents)

    def with_params(self, params):
        return self._copy(params=params)

    def with_values(self, values):
        """Copy with intrinsic values replaced, ``values`` maps ``(node, attr)`` to a number."""
        nodes = []
        for n in self._nodes.values():
            attrs = dict(n.attrs)
            for (nid, a), v in values.items():
                if nid == n.id:
                    attrs[a] = Fraction(v)
            nodes.append(Node(n.id, n.kind, n.polarity, n.children, tuple(attrs.items()), n.condition, n.span))
        return self._copy(nodes=nodes)

    def __eq__(self, other):
        if not isinstance(other, AdtModel):
            return NotImplemented
        return (
            self.name == other.name
            and self.root == other.root
            and dict(self._nodes) == dict(other._nodes)
            and dict(self.agents) == dict(other.agents)
            and self.params == other.params
        )

    __hash__ = None

    def __repr__(self):
        return '<AdtModel {} nodes={} root={}>'.format(self.name, len(self._nodes), self.root)

def condition_scope(model, nid):
    """Nodes whose computed value is final whenever the condition on ``nid`` is read.

    The own-polarity child always is; below it the closure follows nodes whose
    success implies the success of their children (And, Sand) or of their own
    child (Counter, SCounter). Below a NoCounter only its own child qualifies.
    """
    node = model.node(nid)
    own = node.own_child
    if own is None or own not in model:
        return set()
    scope = {own}
    if node.kind is NodeKind.NOCOUNTER:
        return scope
    stack = [own]
    while stack:
        x = model.node(stack.pop())
        if x.kind in (NodeKind.AND, NodeKind.SAND):
            nxt = x.children
        elif x.kind in (NodeKind.COUNTER, NodeKind.SCOUNTER):
            nxt = x.children[:1]
        else:
            nxt = ()
        for c in nxt:
            if c in model and c not in scope:
                scope.add(c)
                stack.append(c)
    return scope

def validate(model):
    """Check the typing rules of a model.

    :param model: :py:class:`AdtModel`
    :return: diagnostics, empty when the model is valid
    :rtype: list(:py:class:`Diagnostic`)
    """
    diags = []
    add = lambda rule, subject, message, span=None: diags.append(Diagnostic(rule, subject, message, span))
    nodes = model.nodes

    for n in nodes.values():
        for c in n.children:
            if c not in nodes:
                add('UnknownNode', c, "unknown node '{}'".format(c), n.span)
        if len(set(n.children)) != len(n.children):
            add('DuplicateChild', n.id, "node '{}' lists a child twice".format(n.id), n.span)
        if n.kind is NodeKind.LEAF:
            if n.children:
                add('ArityViolation', n.id, "leaf '{}' has children".format(n.id), n.span)
        elif n.kind.is_countering:
            if len(n.children) != 2:
                add('ArityViolation', n.id, "{} '{}' needs exactly two children".format(n.kind.value, n.id), n.span)
            else:
                a, d = n.children
                if a in nodes and nodes[a].polarity is not n.polarity:
                    add('PolarityMismatch', n.id, "first child '{}' of '{}' must be {}".format(a, n.id, n.polarity.value), n.span)
                if d in nodes and nodes[d].polarity is not n.polarity.opposite:
                    add('PolarityMismatch', n.id, "second child '{}' of '{}' must be {}".format(d, n.id, n.polarity.opposite.value), n.span)
        else:
            if not n.children:
                add('ArityViolation', n.id, "{} '{}' needs at least one child".format(n.kind.value, n.id), n.span)
            for c in n.children:
                if c in nodes and nodes[c].polarity is not n.polarity:
                    add('PolarityMismatch', n.id, "child '{}' of '{}' must be {}".format(c, n.id, n.polarity.value), n.span)
        for k, v in n.attrs:
            if v < 0:
                add('NegativeAttribute', n.id, "attribute {} of '{}' is negative".format(k, n.id), n.span)

    for scc in nx.strongly_connected_components(model.graph):
        if len(scc) > 1 or any(model.graph.has_edge(x, x) for x in scc):
            first = sorted(scc)[0]
            add('Cycle', first, "cycle through '{}'".format("', '".join(sorted(scc))), nodes[first].span)

    roots = model.roots()
    if model.root is None or len(roots) != 1:
        names = ', '.join(sorted(roots)) if roots else 'none'
        add('RootNotUnique', model.name, 'tree {} needs exactly one root, found: {}'.format(model.name, names))
    elif model.root in nodes:
        reach = model.descendants(model.root) | {model.root}
        for nid in nodes:
            if nid not in reach:
                add('Unreachable', nid, "node '{}' is not reachable from root '{}'".format(nid, model.root), nodes[nid].span)

    polarity_of_agent = {}
    for nid, n in nodes.items():
        agent = model.agents.get(nid)
        if agent is None:
            add('MissingAgent', nid, "node '{}' has no agent".format(nid), n.span)
            continue
        polarity_of_agent.setdefault(agent, set()).add(n.polarity)
    for agent, pols in polarity_of_agent.items():
        if len(pols) > 1:
            add('AgentPolarityViolation', agent, "agent '{}' handles both attack and defence nodes".format(agent))
    for nid in model.agents:
        if nid not in nodes:
            add('UnknownNode', nid, "agent assignment names unknown node '{}'".format(nid))

    for nid, n in nodes.items():
        if n.condition is None:
            continue
        if not n.kind.is_countering:
            add('ConditionPlacement', nid, "condition on '{}' which is not a countering node".format(nid), n.condition.span or n.span)
            continue
        scope = condition_scope(model, nid)
        for t in n.condition.terms():
            if t.node not in nodes:
                add('UnknownNode', t.node, "unknown node '{}'".format(t.node), t.span or n.span)
            elif t.fn == 'value' and t.node not in scope:
                add('ConditionScope', nid, "value({}.{}) is not final when the condition on '{}' is read".format(t.node, t.attr, nid), t.span or n.span)

    for nid, attr in model.params:
        if nid not in nodes:
            add('UnknownParameter', nid, "parameter {}.{} names an unknown node".format(nid, attr))

    return sorted(diags, key=lambda d: (d.rule, d.subject, d.message))

def eval_boolean(model, leaf_outcome):
    """Propositional verdict of every node, conditions ignored.

    :param model: :py:class:`AdtModel`
    :param dict leaf_outcome: leaf id -> bool
    :return: node id -> bool
    :rtype: dict

    .. code-block:: Python
        :linenos:

        eval_boolean(m, {'bi': True, 'fd': True, 'p': False})['SJS']  # True
    """
    out = {}
    for nid in model.order:
        n = model.node(nid)
        if n.kind is NodeKind.LEAF:
            if nid not in leaf_outcome:
                raise MissingLeafOutcome(nid)
            out[nid] = bool(leaf_outcome[nid])
        elif n.kind in (NodeKind.AND, NodeKind.SAND):
            out[nid] = all(out[c] for c in n.children)
        elif n.kind is NodeKind.OR:
            out[nid] = any(out[c] for c in n.children)
        elif n.kind is NodeKind.NOCOUNTER:
            out[nid] = out[n.children[0]] or not out[n.children[1]]
        else:
            out[nid] = out[n.children[0]] and not out[n.children[1]]
    return out
