"""Bottom-up evaluation of a tree, independent of the EAMAS translation.

:py:func:`run` evaluates one fixed choice of leaf outcomes and attempted Or
subsets. :py:func:`outcome_tables` collects, per node, every outcome some choice
in its subtree produces without enumerating whole choice vectors: outcomes of
shared nodes and of nodes read by conditions travel along as a context that
sibling subtrees must agree on.
"""
import operator
from collections import Counter, namedtuple
from dataclasses import dataclass, field
from itertools import combinations, product

import networkx as nx

from .model import BinOp, Const, Neg, NodeKind, Term, TIME
from .records import MissingLeafOutcome, OutcomeCollection, UnknownLabel
from .transform import network_attrs

# status is True, False, or None when the node can never complete
Outcome = namedtuple('Outcome', 'status values footprint')

_HOLDS = {
    '<': operator.lt,
    '<=': operator.le,
    '=': operator.eq,
    '>=': operator.ge,
    '>': operator.gt,
}

_ARITH = {
    '+': operator.add,
    '-': operator.sub,
    '*': operator.mul,
}

@dataclass(frozen=True)
class ChoiceVector:
    """``leaves``: leaf -> bool; ``ors``: Or node -> attempted children."""
    leaves: dict = field(default_factory=dict)
    ors: dict = field(default_factory=dict)

    def as_trace(self):
        return {
            'leaves': {k: 'ok' if v else 'nok' for k, v in sorted(self.leaves.items())},
            'ors': {k: list(v) for k, v in sorted(self.ors.items())},
        }

class Evaluation(object):
    """Per-node status (True, False or None when the node can never complete),
    attribute values and footprints."""
    def __init__(self):
        self.status = {}
        self.values = {}
        self.footprints = {}

    def read(self, node, attr):
        return self.values[node][attr]

def or_options(node, rational=False):
    cs = tuple(node.children)
    if rational:
        return [(c,) for c in cs] + ([cs] if len(cs) > 1 else [])
    return [tuple(sub) for k in range(1, len(cs) + 1) for sub in combinations(cs, k)]

def choice_vectors(model, rational=False):
    """Every choice vector of ``model``: all leaf outcomes times all Or subsets."""
    leaves = model.leaves
    ors = [nid for nid in model.order if model.node(nid).kind is NodeKind.OR]
    subsets = [or_options(model.node(nid), rational) for nid in ors]
    for outcome in product((True, False), repeat=len(leaves)):
        for picked in product(*subsets):
            yield ChoiceVector(dict(zip(leaves, outcome)), dict(zip(ors, picked)))

def side_by_side(kind, attr, rational=False):
    """True when members of ``kind`` spend ``attr`` in parallel across agents."""
    if attr != TIME:
        return False
    return kind is NodeKind.AND or (kind is NodeKind.OR and not rational)

def merged_value(model, attr, members, own=0, parallel=False):
    """Value of a node from ``(value, footprint)`` pairs of its members.

    Members whose footprints involve a common agent form a group; inside a group
    a node reached through k members is counted once and the total never drops
    below a single member. Parallel members take the slowest group, others add up.
    """
    if not members:
        return own
    if parallel:
        g = nx.Graph()
        g.add_nodes_from(range(len(members)))
        by_agent = {}
        for k, (_, fp) in enumerate(members):
            for x in fp:
                by_agent.setdefault(model.agents.get(x, x), []).append(k)
        for ks in by_agent.values():
            nx.add_path(g, ks)
        groups = [sorted(c) for c in nx.connected_components(g)]
    else:
        groups = [range(len(members))]
    totals = []
    for ks in groups:
        part = [members[k] for k in ks]
        seen = Counter(x for _, fp in part for x in fp)
        total = sum(v for v, _ in part) - sum((n - 1) * model.intrinsic(x, attr) for x, n in seen.items())
        totals.append(max([total] + [v for v, _ in part]))
    return own + max(totals)

def _expr(model, expr, read):
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Term):
        if expr.fn == 'init':
            return model.intrinsic(expr.node, expr.attr)
        return read(expr.node, expr.attr)
    if isinstance(expr, Neg):
        return -_expr(model, expr.operand, read)
    if isinstance(expr, BinOp):
        return _ARITH[expr.op](_expr(model, expr.left, read), _expr(model, expr.right, read))
    raise TypeError('not an expression: {!r}'.format(expr))

def step(model, nid, attrs, rational, outcome, read, attempted=None):
    """Outcome of the gate ``nid`` from the outcomes of its children.

    :param outcome: child id -> :py:class:`Outcome`
    :param read: ``read(node, attr)``, values for conditions
    :param attempted: children an Or attempts, all by default
    :rtype: :py:class:`Outcome`
    """
    node = model.node(nid)
    cs = node.children

    def settle(status, members=(), with_own=False):
        if status is None or (status is False and not members):
            return Outcome(status, tuple(0 for _ in attrs), frozenset())
        outs = [outcome(m) for m in members]
        vals = []
        for k, a in enumerate(attrs):
            own = model.intrinsic(nid, a) if with_own else 0
            pairs = [(o.values[k], o.footprint) for o in outs]
            vals.append(merged_value(model, a, pairs, own, side_by_side(node.kind, a, rational)))
        fp = frozenset().union(*(o.footprint for o in outs))
        return Outcome(status, tuple(vals), fp | {nid} if with_own else fp)

    def guarded():
        cond = node.condition
        if cond is None:
            return True
        return _HOLDS[cond.op](_expr(model, cond.lhs, read), _expr(model, cond.rhs, read))

    st = lambda c: outcome(c).status
    if node.kind is NodeKind.AND:
        if any(st(c) is False for c in cs):
            return settle(False)
        if any(st(c) is None for c in cs):
            return settle(None)
        return settle(True, cs, True)
    if node.kind is NodeKind.SAND:
        first = next((st(c) for c in cs if st(c) is not True), True)
        if first is True:
            return settle(True, cs, True)
        return settle(first)
    if node.kind is NodeKind.OR:
        r = tuple(attempted if attempted is not None else cs)
        seen = [st(c) for c in r]
        if any(s is None for s in seen):
            return settle(None)
        if rational:
            if len(r) == 1 and seen[0] is True:
                return settle(True, r, True)
            if r == tuple(cs) and not any(seen):
                return settle(False, cs)
            return settle(None)
        if any(seen):
            return settle(True, r, True)
        if r == tuple(cs):
            return settle(False, cs)
        return settle(None)
    a, d = cs
    if node.kind is NodeKind.NOCOUNTER:
        if st(a) is None or (st(a) is False and st(d) is None):
            return settle(None)
        if st(a) is False and st(d) is True:
            return settle(False, (a,))
        ok = bool(guarded())
        return settle(ok, (a,), ok)
    if st(a) is None:
        return settle(None)
    if st(a) is False or st(d) is True:
        return settle(False, (a,))
    if st(d) is None:
        return settle(None)
    ok = bool(guarded())
    return settle(ok, (a,), ok)

def leaf_outcome(model, nid, attrs, ok):
    if ok:
        return Outcome(True, tuple(model.intrinsic(nid, a) for a in attrs), frozenset([nid]))
    return Outcome(False, tuple(0 for _ in attrs), frozenset())

def run(model, choice, rational=False, attrs=None):
    """Evaluate every node of ``model`` under ``choice``.

    :rtype: :py:class:`Evaluation`
    """
    attrs = tuple(attrs or network_attrs(model))
    ev = Evaluation()
    outs = {}
    for nid in model.order:
        node = model.node(nid)
        if node.kind is NodeKind.LEAF:
            if nid not in choice.leaves:
                raise MissingLeafOutcome(nid)
            out = leaf_outcome(model, nid, attrs, choice.leaves[nid])
        else:
            out = step(model, nid, attrs, rational, outs.__getitem__, ev.read, choice.ors.get(nid))
        outs[nid] = out
        ev.status[nid] = out.status
        ev.values[nid] = dict(zip(attrs, out.values))
        ev.footprints[nid] = out.footprint
    return ev

def oracle_eval(model, choice, rational=False):
    """Verdict and root attribute values under one choice vector.

    :param model: :py:class:`adtmas.model.AdtModel`
    :param choice: :py:class:`ChoiceVector`
    :return: ``(bool, {attr: value})``

    .. code-block:: Python
        :linenos:

        choice = ChoiceVector(leaves, {'GA': ('h',)})
        oracle_eval(model, choice)  # (True, {'cost': Fraction(1100), 'time': Fraction(125)})
    """
    ev = run(model, choice, rational)
    return ev.status[model.root] is True, ev.values[model.root]

def goal_node(label, model):
    """``(node, status)`` a goal label asks for: ``root_ok`` names the root
    succeeding, ``X_nok`` the node X failing."""
    for suffix, status in (('_ok', True), ('_nok', False)):
        if not label.endswith(suffix):
            continue
        nid = label[:-len(suffix)]
        if nid == 'root':
            return model.root, status
        if nid in model:
            return nid, status
    raise UnknownLabel(label)

def _referrers(model):
    """Node -> nodes that take its outcome: parents and conditions reading its value."""
    refs = {nid: set(model.parents(nid)) for nid in model.nodes}
    for nid, node in model.nodes.items():
        if node.condition is None:
            continue
        for t in node.condition.terms():
            if t.fn == 'value' and t.node in refs:
                refs[t.node].add(nid)
    return refs

def _join(traces, ors=None):
    leaves, picked = {}, {}
    for t in traces:
        for k, v in t.leaves.items():
            leaves.setdefault(k, v)
        for k, v in t.ors.items():
            picked.setdefault(k, v)
    if ors is not None:
        picked.update(ors)
    return ChoiceVector(leaves, picked)

def outcome_tables(model, rational=False, attrs=None, upto=None):
    """Every outcome each node reaches under some choice in its subtree.

    :param upto: stop once this node is done, the root by default
    :return: node -> ``{(Outcome, context): ChoiceVector}``, one choice per key;
        the context is a sorted tuple of ``(node, Outcome)`` for the shared or
        condition-read nodes below that are still referred to from outside
    """
    attrs = tuple(attrs or network_attrs(model))
    upto = upto if upto is not None else model.root
    refs = _referrers(model)
    tracked = {nid for nid, r in refs.items() if len(model.parents(nid)) > 1 or r - set(model.parents(nid))}
    wanted = model.descendants(upto) | {upto}
    tables = {}
    for nid in model.order:
        if nid not in wanted:
            continue
        node = model.node(nid)
        below = model.descendants(nid) | {nid}
        keep = {x for x in tracked & below if refs[x] - below}
        table = {}

        def add(out, ctx, choice):
            if nid in keep:
                ctx = dict(ctx)
                ctx[nid] = out
            key = (out, tuple(sorted(((x, o) for x, o in ctx.items() if x in keep), key=lambda kv: kv[0])))
            table.setdefault(key, choice)

        if node.kind is NodeKind.LEAF:
            for ok in (True, False):
                add(leaf_outcome(model, nid, attrs, ok), {}, ChoiceVector({nid: ok}))
            tables[nid] = table
            continue
        options = or_options(node, rational) if node.kind is NodeKind.OR else [None]
        for attempted in options:
            used = attempted if attempted is not None else node.children
            for entries in product(*(tables[c].items() for c in used)):
                ctx, clash = {}, False
                for ((_, cctx), _) in entries:
                    for x, o in cctx:
                        if ctx.setdefault(x, o) != o:
                            clash = True
                            break
                    if clash:
                        break
                if clash:
                    continue
                kids = {c: out for c, ((out, _), _) in zip(used, entries)}
                known = dict(ctx)
                known.update(kids)
                read = lambda x, a, known=known: known[x].values[attrs.index(a)]
                out = step(model, nid, attrs, rational, kids.__getitem__, read, attempted)
                ors = {nid: attempted} if attempted is not None else None
                add(out, ctx, _join((choice for _, choice in entries), ors))
        tables[nid] = table
    return tables

def _rows(found, attrs):
    seen = set()
    for values, choice in found:
        if values in seen:
            continue
        seen.add(values)
        row = {'verdict': True}
        row.update(zip(attrs, values))
        row['trace'] = choice.as_trace()
        yield row

def enumerate_outcomes(model, rational=False, goal='root_ok'):
    """Distinct outcomes of the goal node with the status the goal asks for,
    one choice trace each.

    :rtype: :py:class:`adtmas.records.OutcomeCollection`
    """
    attrs = network_attrs(model)
    target, status = goal_node(goal, model)
    table = outcome_tables(model, rational, attrs, upto=target)[target]
    found = ((out.values, choice) for (out, _), choice in table.items() if out.status is status)
    return OutcomeCollection(_rows(found, attrs))

def enumerate_by_vectors(model, rational=False, goal='root_ok'):
    """Same outcomes as :py:func:`enumerate_outcomes`, running every choice vector."""
    attrs = network_attrs(model)
    target, status = goal_node(goal, model)

    def found():
        for choice in choice_vectors(model, rational):
            ev = run(model, choice, rational, attrs)
            if ev.status[target] is status:
                yield tuple(ev.values[target][a] for a in attrs), choice

    return OutcomeCollection(_rows(found(), attrs))

def replay(model, record, rational=False):
    """Re-evaluate the choice trace of an outcome record.

    Leaves absent from the trace never decided and count as nok; Ors absent
    from the trace attempt all of their children.

    :return: ``(bool, {attr: value})``
    """
    trace = record['trace']
    leaves = {nid: trace['leaves'].get(nid) == 'ok' for nid in model.leaves}
    ors = {k: tuple(c for c in model.node(k).children if c in v) for k, v in trace['ors'].items()}
    return oracle_eval(model, ChoiceVector(leaves, ors), rational)
