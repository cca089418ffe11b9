"""Networks of local agent models that synchronise on ok/nok messages, carry
guards and modify a shared attribute valuation."""
import enum
import operator
from dataclasses import dataclass, field
from itertools import product

from .model import BinOp, Const, Neg, Term
from .records import UnknownLabel

# valuation slot holding the set of same-polarity nodes a value accounts for
FOOTPRINT = '@'

# location markers of models no live parent can still read (see explorer)
DEAD_IDLE = -1
DEAD_DONE = -2

class Dir(enum.Enum):
    SEND = '!'
    RECV = '?'

class Payload(enum.Enum):
    OK = 'ok'
    NOK = 'nok'

@dataclass(frozen=True)
class Message:
    dir: Dir
    channel: str
    payload: Payload

    @property
    def action(self):
        return '{}_{}'.format(self.channel, self.payload.value)

    def __str__(self):
        return self.dir.value + self.action

class Rule(enum.Enum):
    SUM = 'sum'
    TIMEC = 'timec'
    CHOSEN = 'chosen'
    OWN = 'own'

@dataclass(frozen=True)
class Update:
    """Sets every attribute of ``node`` from the values of ``members``.

    ``with_own`` adds the node's intrinsic values and the node itself to the footprint.
    """
    node: str
    members: tuple = ()
    with_own: bool = True

    def __str__(self):
        terms = list(self.members)
        if self.with_own:
            terms.insert(0, 'init')
        return '{} := {}'.format(self.node, ' + '.join(terms) or '0')

@dataclass(frozen=True)
class Transition:
    src: int
    dst: int
    action: str
    message: Message = None
    guard: object = None
    updates: tuple = ()
    choice: tuple = None

    @property
    def is_loop(self):
        return self.src == self.dst

class LocalModel(object):
    """The agent model of one node.

    :param str node: node id, also the channel the model sends on
    :param kind: :py:class:`adtmas.model.NodeKind`
    :param locations: location names, index 0 is initial
    :param transitions: iterable of :py:class:`Transition`
    :param int success: location reached when the node succeeds
    :param int fail: fail sink
    :param received: per location, children whose value the node has collected
    """
    def __init__(self, node, kind, locations, transitions, success, fail, received=None):
        self.node = node
        self.kind = kind
        self.locations = tuple(locations)
        self.transitions = tuple(transitions)
        self.initial = 0
        self.success = success
        self.fail = fail
        n = len(self.locations)
        self.received = tuple(received) if received is not None else tuple(frozenset() for _ in range(n))
        out = [[] for _ in range(n)]
        for t in self.transitions:
            out[t.src].append(t)
        self.out = tuple(tuple(ts) for ts in out)
        self._future()

    def _future(self):
        n = len(self.locations)
        reach = [None] * n
        # local automata are acyclic apart from self-loops
        def visit(loc):
            if reach[loc] is None:
                ts = set(self.out[loc])
                for t in self.out[loc]:
                    if not t.is_loop:
                        ts |= visit(t.dst)
                reach[loc] = frozenset(ts)
            return reach[loc]
        receives, reads, guards = [], [], []
        for loc in range(n):
            ts = visit(loc)
            receives.append(frozenset(t.message.channel for t in ts if t.message is not None and t.message.dir is Dir.RECV))
            reads.append(frozenset(m for t in ts for u in t.updates for m in u.members))
            guards.append(any(t.guard is not None for t in ts))
        self.future_receives = tuple(receives)
        self.future_reads = tuple(reads)
        self.guard_ahead = tuple(guards)

    def completed(self, loc):
        return loc == self.success or loc == self.fail or loc == DEAD_DONE

    def replace(self, transitions):
        return LocalModel(self.node, self.kind, self.locations, transitions, self.success, self.fail, self.received)

    def __repr__(self):
        return '<LocalModel {} locations={} transitions={}>'.format(self.node, len(self.locations), len(self.transitions))

class EamasNetwork(object):
    """One local model per node plus the attribute store they share.

    :param model: the :py:class:`adtmas.model.AdtModel` the network was built from
    :param models: iterable of :py:class:`LocalModel`, children before parents
    :param dict spec: ``(node, attr)`` -> :py:class:`Rule`
    :param attrs: attribute names of the store
    """
    def __init__(self, model, models, spec, attrs, rational=False):
        self.model = model
        self.models = tuple(models)
        self.spec = spec
        self.attrs = tuple(attrs)
        self.rational = rational
        self.index = {m.node: i for i, m in enumerate(self.models)}
        self.owner = self.index
        self.agents = dict(model.agents)

        slots = []
        for m in self.models:
            slots.extend((m.node, a) for a in self.attrs)
            slots.append((m.node, FOOTPRINT))
        self.slots = tuple(slots)
        self.slot = {s: i for i, s in enumerate(slots)}
        self.v0 = tuple(frozenset() if a == FOOTPRINT else 0 for _, a in slots)
        self.node_slots = tuple(
            tuple(self.slot[(m.node, a)] for a in self.attrs + (FOOTPRINT,)) for m in self.models)

        self.labels = {}
        for i, m in enumerate(self.models):
            self.labels['{}_ok'.format(m.node)] = (i, frozenset([m.success]))
            self.labels['{}_nok'.format(m.node)] = (i, frozenset([m.fail]))
        r = self.index[model.root]
        self.labels['root_ok'] = (r, frozenset([self.models[r].success]))
        self.labels['root_nok'] = (r, frozenset([self.models[r].fail]))

        self.order = tuple(self.index[n] for n in model.order)
        self.parents = tuple(tuple(self.index[p] for p in model.parents(m.node)) for m in self.models)
        self.receivers = {}
        for i, m in enumerate(self.models):
            for t in m.transitions:
                if t.message is not None and t.message.dir is Dir.RECV:
                    self.receivers.setdefault(t.action, []).append((i, t))
        readers = [[] for _ in self.models]
        for i, m in enumerate(self.models):
            cond = model.node(m.node).condition
            if cond is None:
                continue
            for term in cond.terms():
                if term.fn == 'value' and term.node in self.index:
                    readers[self.index[term.node]].append(i)
        self.guard_readers = tuple(tuple(sorted(set(r))) for r in readers)
        self.interp = ConcreteInterp(model)

    @property
    def initial(self):
        return GlobalState(tuple(m.initial for m in self.models), self.v0)

    def read(self, s, node, attr):
        return s.vals[self.slot[(node, attr)]]

    def values_of(self, s, node):
        """``{attr: value}`` of one node in state ``s``."""
        return {a: s.vals[self.slot[(node, a)]] for a in self.attrs}

    def location_name(self, s, i):
        loc = s.locs[i]
        if loc < 0:
            return 'dead'
        return self.models[i].locations[loc]

    def replace(self, node, local):
        models = list(self.models)
        models[self.index[node]] = local
        return EamasNetwork(self.model, models, self.spec, self.attrs, self.rational)

    def __len__(self):
        return len(self.models)

    def __repr__(self):
        return '<EamasNetwork {} models={}>'.format(self.model.name, len(self.models))

class GlobalState(object):
    """Location vector and valuation of a network. The hash is computed once
    and is not carried across processes."""
    __slots__ = ('locs', 'vals', '_hash')

    def __init__(self, locs, vals):
        self.locs = locs
        self.vals = vals
        self._hash = None

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.locs, self.vals))
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, GlobalState):
            return NotImplemented
        return hash(self) == hash(other) and self.locs == other.locs and self.vals == other.vals

    def __reduce__(self):
        return (GlobalState, (self.locs, self.vals))

    def __repr__(self):
        return 'GlobalState(locs={!r}, vals={!r})'.format(self.locs, self.vals)

@dataclass(frozen=True)
class GlobalTransition:
    action: str
    movers: tuple
    target: GlobalState
    assumptions: tuple = ()
    choices: tuple = field(default=(), compare=False)

_CMP = {
    '<': operator.lt,
    '<=': operator.le,
    '=': operator.eq,
    '>=': operator.ge,
    '>': operator.gt,
}

class ConcreteInterp(object):
    """Exact rational evaluation; every decision has a single branch.
    Integral intrinsic values are handed out as ints."""
    symbolic = False

    def __init__(self, model):
        self.model = model
        self._own = {}

    def intrinsic(self, node, attr):
        key = (node, attr)
        if key not in self._own:
            v = self.model.intrinsic(node, attr)
            self._own[key] = int(v) if v.denominator == 1 else v
        return self._own[key]

    def maximum(self, values):
        return [((), max(values))]

    def decide(self, diff, op):
        return [((), _CMP[op](diff, 0))]

def agent_groups(members, agents):
    """Partition member indices into groups connected by shared participating agents."""
    owner = list(range(len(members)))
    def find(i):
        while owner[i] != i:
            owner[i] = owner[owner[i]]
            i = owner[i]
        return i
    seen = {}
    for i, (_, fp) in enumerate(members):
        for x in fp:
            a = agents.get(x, x)
            if a in seen:
                ri, rj = find(i), find(seen[a])
                if ri != rj:
                    owner[max(ri, rj)] = min(ri, rj)
            else:
                seen[a] = i
    groups = {}
    for i in range(len(members)):
        groups.setdefault(find(i), []).append(members[i])
    return [groups[k] for k in sorted(groups)]

def _group_total(interp, attr, group):
    total = sum(v for v, _ in group)
    counts = {}
    for _, fp in group:
        for x in fp:
            counts[x] = counts.get(x, 0) + 1
    shared = sorted((x, k) for x, k in counts.items() if k > 1)
    if not shared:
        return [((), total)]
    for x, k in shared:
        total = total - (k - 1) * interp.intrinsic(x, attr)
    return interp.maximum([total] + [v for v, _ in group])

def combine(interp, rule, attr, members, agents, own=None):
    """Value of a node from its members' ``(value, footprint)`` pairs.

    Shared nodes are counted once inside a group; :py:attr:`Rule.TIMEC` takes the
    maximum across agent-disjoint groups, every other rule sums.

    :return: list of ``(assumptions, value)`` branches
    """
    base = own if own is not None else 0
    if not members:
        return [((), base)]
    groups = agent_groups(members, agents) if rule is Rule.TIMEC else [members]
    parts = [_group_total(interp, attr, g) for g in groups]
    out = []
    for combo in product(*parts):
        assum = tuple(a for part in combo for a in part[0])
        vals = [v for _, v in combo]
        if len(vals) == 1:
            out.append((assum, vals[0] + base))
            continue
        for a2, m in interp.maximum(vals):
            out.append((assum + a2, m + base))
    return out

def apply_update(net, interp, vals, upd):
    """Branches ``(assumptions, vals)`` after applying one update to a valuation tuple."""
    slot = net.slot
    fps = [vals[slot[(m, FOOTPRINT)]] for m in upd.members]
    per_attr = []
    for a in net.attrs:
        members = [(vals[slot[(m, a)]], fp) for m, fp in zip(upd.members, fps)]
        own = interp.intrinsic(upd.node, a) if upd.with_own else None
        per_attr.append(combine(interp, net.spec[(upd.node, a)], a, members, net.agents, own))
    fp = frozenset().union(*fps) if fps else frozenset()
    if upd.with_own:
        fp = fp | {upd.node}
    out = []
    for combo in product(*per_attr):
        new = list(vals)
        assum = ()
        for a, (a2, v) in zip(net.attrs, combo):
            new[slot[(upd.node, a)]] = v
            assum += a2
        new[slot[(upd.node, FOOTPRINT)]] = fp
        out.append((assum, tuple(new)))
    return out

def evaluate(expr, interp, read):
    """Value of a condition expression; ``read(node, attr)`` supplies computed values."""
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Term):
        if expr.fn == 'init':
            return interp.intrinsic(expr.node, expr.attr)
        return read(expr.node, expr.attr)
    if isinstance(expr, Neg):
        return -evaluate(expr.operand, interp, read)
    if isinstance(expr, BinOp):
        l = evaluate(expr.left, interp, read)
        r = evaluate(expr.right, interp, read)
        if expr.op == '+':
            return l + r
        if expr.op == '-':
            return l - r
        return l * r
    raise TypeError('not an expression: {!r}'.format(expr))

def check_guard(cond, interp, read):
    """Branches ``(assumptions, holds)`` of a condition."""
    diff = evaluate(cond.lhs, interp, read) - evaluate(cond.rhs, interp, read)
    return interp.decide(diff, cond.op)

def fire(net, interp, s, moves):
    """Apply a move (one local transition, or sender then receiver) to ``s``.

    Guards are evaluated on the source valuation, updates are applied in move order.
    :return: list of ``(assumptions, GlobalState)``
    """
    read = lambda node, attr: s.vals[net.slot[(node, attr)]]
    branches = [((), s.vals)]
    for _, t in moves:
        if t.guard is None:
            continue
        nxt = []
        for assum, vals in branches:
            for a2, ok in check_guard(t.guard, interp, read):
                if ok:
                    nxt.append((assum + a2, vals))
        branches = nxt
    for _, t in moves:
        for u in t.updates:
            nxt = []
            for assum, vals in branches:
                for a2, vals2 in apply_update(net, interp, vals, u):
                    nxt.append((assum + a2, vals2))
            branches = nxt
    locs = list(s.locs)
    for i, t in moves:
        locs[i] = t.dst
    locs = tuple(locs)
    return [(assum, GlobalState(locs, vals)) for assum, vals in branches]

def transition_of(net, interp, s, moves):
    """GlobalTransitions produced by one move."""
    action = moves[-1][1].action
    movers = tuple(i for i, _ in moves)
    choices = tuple(t.choice for _, t in moves if t.choice is not None)
    return [GlobalTransition(action, movers, target, assum, choices)
            for assum, target in fire(net, interp, s, moves)]

def sync_partners(net, s, i, t):
    """Send transitions that can pair with receive ``t`` of model ``i`` in ``s``."""
    j = net.owner[t.message.channel]
    lj = s.locs[j]
    if lj < 0:
        return []
    return [(j, ts) for ts in net.models[j].out[lj]
            if ts.message is not None and ts.message.dir is Dir.SEND and ts.action == t.action]

def successors(net, s, interp=None):
    """All transitions enabled in ``s``: paired send/receive moves and local moves.

    :param net: :py:class:`EamasNetwork`
    :param s: :py:class:`GlobalState`
    :param interp: value domain, concrete rationals by default
    :rtype: list(:py:class:`GlobalTransition`)
    """
    interp = interp or net.interp
    out = []
    for i, m in enumerate(net.models):
        li = s.locs[i]
        if li < 0:
            continue
        for t in m.out[li]:
            if t.message is None:
                out.extend(transition_of(net, interp, s, ((i, t),)))
            elif t.message.dir is Dir.RECV:
                for j, ts in sync_partners(net, s, i, t):
                    out.extend(transition_of(net, interp, s, ((j, ts), (i, t))))
    return out

def is_goal(net, s, label):
    """True when the location predicate named ``label`` holds in ``s``."""
    if label not in net.labels:
        raise UnknownLabel(label)
    i, locs = net.labels[label]
    return s.locs[i] in locs
