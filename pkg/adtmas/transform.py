"""Compositional translation of an ADT into an EAMAS network, one agent model per node."""
from .eamas import Dir, EamasNetwork, LocalModel, Message, Payload, Rule, Transition, Update
from .model import BinOp, COST, Const, Diagnostic, Neg, NodeKind, TIME, Term, fmt_number

class ComputationSpec(dict):
    """``(node, attr)`` -> :py:class:`adtmas.eamas.Rule`, with printable formulas.

    Cost sums over the members everywhere. Time uses timeC for And and for the
    attempted subset of an Or, sums for Sand, and countering nodes carry their
    own-polarity child. In rational mode an Or carries its chosen child.
    """
    def __init__(self, model, attrs, rational=False):
        super(ComputationSpec, self).__init__()
        self.model = model
        for nid, n in model.nodes.items():
            for a in attrs:
                self[(nid, a)] = rule_for(n.kind, a, rational)

    def describe(self, node, attr):
        """Formula as drawn on agent models, e.g. ``t_ST := 2 + timeC(t_b, t_f)``."""
        n = self.model.node(node)
        prefix = {COST: 'c', TIME: 't'}.get(attr, attr)
        name = lambda x: '{}_{}'.format(prefix, x)
        members = n.children[:1] if n.kind.is_countering else n.children
        rule = self[(node, attr)]
        if not members:
            body = []
        elif rule is Rule.TIMEC and len(members) > 1:
            body = ['timeC({})'.format(', '.join(name(c) for c in members))]
        elif rule is Rule.CHOSEN and len(members) > 1:
            body = ['one of({})'.format(', '.join(name(c) for c in members))]
        else:
            body = [' + '.join(name(c) for c in members)]
        init = n.attr(attr)
        if init != 0 or not body:
            body.insert(0, fmt_number(init))
        return '{} := {}'.format(name(node), ' + '.join(body))

def rule_for(kind, attr, rational=False):
    if kind.is_countering:
        return Rule.OWN
    if kind is NodeKind.OR:
        if rational:
            return Rule.CHOSEN
        return Rule.TIMEC if attr == TIME else Rule.SUM
    if kind is NodeKind.AND and attr == TIME:
        return Rule.TIMEC
    return Rule.SUM

def render_guard(cond, model):
    """Guard text with intrinsic terms replaced by their values, e.g. ``10 > 2 + t_GA``."""
    def walk(e):
        if isinstance(e, Term):
            if e.fn == 'init' and not model.is_param(e.node, e.attr):
                return Const(model.intrinsic(e.node, e.attr))
            return e
        if isinstance(e, Neg):
            return Neg(walk(e.operand))
        if isinstance(e, BinOp):
            return BinOp(e.op, walk(e.left), walk(e.right))
        return e

    def show(e):
        text = str(e)
        for t in set(e.terms()):
            prefix = {COST: 'c', TIME: 't'}.get(t.attr, t.attr)
            label = '{}_{}'.format(prefix, t.node) if t.fn == 'value' else '{}[{}.{}]'.format(prefix, t.node, t.attr)
            text = text.replace(str(t), label)
        return text

    return '{} {} {}'.format(show(walk(cond.lhs)), cond.op, show(walk(cond.rhs)))

class _Pattern(object):
    """Collects locations and transitions of one agent model."""
    def __init__(self, node):
        self.node = node
        self.locations = []
        self.index = {}
        self.received = []
        self.transitions = []

    def loc(self, name, received=()):
        if name not in self.index:
            self.index[name] = len(self.locations)
            self.locations.append(name)
            self.received.append(frozenset(received))
        return self.index[name]

    def local(self, src, dst, action=None, guard=None, updates=(), choice=None):
        self.transitions.append(Transition(src, dst, action or self.node, None, guard, tuple(updates), choice))

    def recv(self, src, dst, child, payload, updates=(), choice=None):
        msg = Message(Dir.RECV, child, payload)
        self.transitions.append(Transition(src, dst, msg.action, msg, None, tuple(updates), choice))

    def send(self, src, dst, payload, choice=None):
        msg = Message(Dir.SEND, self.node, payload)
        self.transitions.append(Transition(src, dst, msg.action, msg, None, (), choice))

    def build(self, kind, success, fail):
        self.send(success, success, Payload.OK)
        self.send(fail, fail, Payload.NOK)
        return LocalModel(self.node, kind, self.locations, self.transitions, success, fail, self.received)

def _leaf(node):
    p = _Pattern(node.id)
    l0, l1, f = p.loc('l0'), p.loc('l1'), p.loc("l'1")
    p.local(l0, l1, updates=[Update(node.id)], choice=('leaf', node.id, 'ok'))
    p.send(l0, f, Payload.NOK, choice=('leaf', node.id, 'nok'))
    return p.build(node.kind, l1, f)

def _conjunction(node):
    """And collects oks in declared order and fails on any pending child's nok;
    Sand fails only on the nok of the child it is waiting for."""
    p = _Pattern(node.id)
    cs = node.children
    n = len(cs)
    locs = [p.loc('l{}'.format(j), cs[:j]) for j in range(n + 1)]
    done = p.loc('l_{}'.format(node.id), cs)
    f = p.loc("l'1")
    for j, c in enumerate(cs):
        p.recv(locs[j], locs[j + 1], c, Payload.OK)
    for j in range(n):
        failing = cs[j:] if node.kind is NodeKind.AND else cs[j:j + 1]
        for c in failing:
            p.recv(locs[j], f, c, Payload.NOK)
    p.local(locs[n], done, updates=[Update(node.id, cs)])
    return p.build(node.kind, done, f)

def or_positions(children):
    """Reachable ``(position, received, status)`` triples of the attempted-subset Or.

    At each position the child's ok or nok is received or the child is skipped;
    status is ``ok`` once an ok arrived, ``skip`` once a child was skipped without
    any ok so far, ``none`` otherwise.
    """
    start = (0, (), 'none')
    seen, todo, edges = [start], [start], []
    while todo:
        k, rcv, st = todo.pop(0)
        if k == len(children):
            continue
        c = children[k]
        nxt = [
            ('ok', (k + 1, rcv + (c,), 'ok')),
            ('nok', (k + 1, rcv + (c,), st)),
            ('skip', (k + 1, rcv, 'skip' if st == 'none' else st)),
        ]
        for how, dst in nxt:
            edges.append(((k, rcv, st), how, c, dst))
            if dst not in seen:
                seen.append(dst)
                todo.append(dst)
    return seen, edges

def _or_subset(node):
    p = _Pattern(node.id)
    cs = node.children
    n = len(cs)
    states, edges = or_positions(cs)
    sink = (n, tuple(cs), 'none')

    def name(state):
        k, rcv, st = state
        if k == 0:
            return 'l0'
        if state == sink:
            return "l'1"
        return 'l{}{{{}}}{}'.format(k, ','.join(rcv), {'ok': '+', 'skip': '~', 'none': ''}[st])

    for s in states:
        p.loc(name(s), s[1])
    done = p.loc('l_{}'.format(node.id), cs)
    for src, how, c, dst in edges:
        a, b = p.index[name(src)], p.index[name(dst)]
        if how == 'skip':
            p.local(a, b, '{}_skip_{}'.format(node.id, c))
        elif how == 'ok':
            p.recv(a, b, c, Payload.OK, choice=('or', node.id, c))
        else:
            upd = [Update(node.id, tuple(cs), False)] if dst == sink else []
            p.recv(a, b, c, Payload.NOK, updates=upd, choice=('or', node.id, c))
    for s in states:
        k, rcv, st = s
        if k == n and st == 'ok':
            p.local(p.index[name(s)], done, updates=[Update(node.id, rcv)])
    return p.build(node.kind, done, p.index["l'1"])

def _or_rational(node):
    """Any child ok moves to the pre-action location carrying that child's value;
    noks received in declared order lead to the fail sink."""
    p = _Pattern(node.id)
    cs = node.children
    n = len(cs)
    l0, l1 = p.loc('l0'), p.loc('l1')
    done = p.loc('l_{}'.format(node.id))
    for c in cs:
        p.recv(l0, l1, c, Payload.OK, updates=[Update(node.id, (c,))], choice=('or', node.id, c))
    p.local(l1, done)
    prev = l0
    for k, c in enumerate(cs, 1):
        dst = p.loc("l'{}".format(k), cs[:k])
        upd = [Update(node.id, tuple(cs), False)] if k == n else []
        p.recv(prev, dst, c, Payload.NOK, updates=upd, choice=('or', node.id, c))
        prev = dst
    return p.build(node.kind, done, prev)

def _guarded_action(p, node, src, done, fail, own):
    cond = node.condition
    p.local(src, done, guard=cond, updates=[Update(node.id, (own,))])
    if cond is not None:
        for neg in cond.negations():
            p.local(src, fail, '{}_guard'.format(node.id), guard=neg, updates=[Update(node.id, (own,), False)])

def _counter(node):
    p = _Pattern(node.id)
    a, d = node.children
    failed = [Update(node.id, (a,), False)]
    l0 = p.loc('l0')
    l1, l2 = p.loc('l1', (a,)), p.loc('l2', (a,))
    done = p.loc('l_{}'.format(node.id), (a,))
    early = p.loc("l'0")
    f = p.loc("l'1", (a,))
    p.recv(l0, l1, a, Payload.OK)
    p.recv(l0, f, a, Payload.NOK, updates=failed)
    p.recv(l0, early, d, Payload.OK)
    p.recv(early, f, a, Payload.OK, updates=failed)
    p.recv(early, f, a, Payload.NOK, updates=failed)
    p.recv(l1, l2, d, Payload.NOK)
    p.recv(l1, f, d, Payload.OK, updates=failed)
    _guarded_action(p, node, l2, done, f, a)
    return p.build(node.kind, done, f)

def _nocounter(node):
    p = _Pattern(node.id)
    a, d = node.children
    l0 = p.loc('l0')
    l1 = p.loc('l1', (a,))
    done = p.loc('l_{}'.format(node.id), (a,))
    waiting = p.loc("l'1", (a,))
    f = p.loc("l'2", (a,))
    p.recv(l0, l1, a, Payload.OK)
    p.recv(l0, waiting, a, Payload.NOK)
    p.recv(waiting, l1, d, Payload.NOK)
    p.recv(waiting, f, d, Payload.OK, updates=[Update(node.id, (a,), False)])
    _guarded_action(p, node, l1, done, f, a)
    return p.build(node.kind, done, f)

def _scounter(node):
    p = _Pattern(node.id)
    a, d = node.children
    failed = [Update(node.id, (a,), False)]
    l0 = p.loc('l0')
    l1, l2 = p.loc('l1', (a,)), p.loc('l2', (a,))
    done = p.loc('l_{}'.format(node.id), (a,))
    f = p.loc("l'1", (a,))
    p.recv(l0, l1, a, Payload.OK)
    p.recv(l0, f, a, Payload.NOK, updates=failed)
    p.recv(l1, l2, d, Payload.NOK)
    p.recv(l1, f, d, Payload.OK, updates=failed)
    _guarded_action(p, node, l2, done, f, a)
    return p.build(node.kind, done, f)

def local_model(node, rational=False):
    """Agent model of one node."""
    if node.kind is NodeKind.LEAF:
        return _leaf(node)
    if node.kind in (NodeKind.AND, NodeKind.SAND):
        return _conjunction(node)
    if node.kind is NodeKind.OR:
        return _or_rational(node) if rational else _or_subset(node)
    if node.kind is NodeKind.COUNTER:
        return _counter(node)
    if node.kind is NodeKind.NOCOUNTER:
        return _nocounter(node)
    return _scounter(node)

def network_attrs(model):
    """Declared attributes plus those read by conditions, sorted."""
    attrs = set(model.attr_names)
    for n in model.nodes.values():
        if n.condition is not None:
            attrs.update(t.attr for t in n.condition.terms())
    return tuple(sorted(attrs))

def transform(model, rational=False):
    """Translate a valid model into its EAMAS network.

    :param model: :py:class:`adtmas.model.AdtModel`
    :param bool rational: Or nodes carry exactly one chosen child
    :rtype: :py:class:`adtmas.eamas.EamasNetwork`

    .. code-block:: Python
        :linenos:

        net = transform(dsl.load('data/treasure.adt'))
        len(net)  # 9
    """
    attrs = network_attrs(model)
    spec = ComputationSpec(model, attrs, rational)
    models = [local_model(model.node(nid), rational) for nid in model.order]
    return EamasNetwork(model, models, spec, attrs, rational)

def _expected_locations(node, rational):
    n = len(node.children)
    if node.kind is NodeKind.LEAF:
        return 3
    if node.kind in (NodeKind.AND, NodeKind.SAND):
        return n + 3
    if node.kind is NodeKind.OR:
        return n + 3 if rational else len(or_positions(node.children)[0]) + 1
    return {NodeKind.COUNTER: 6, NodeKind.NOCOUNTER: 5, NodeKind.SCOUNTER: 5}[node.kind]

def _has(local, src=None, dst=None, action=None, dir=None):
    for t in local.transitions:
        if src is not None and t.src != src:
            continue
        if dst is not None and t.dst != dst:
            continue
        if action is not None and t.action != action:
            continue
        if dir is not None and (t.message is None or t.message.dir is not dir):
            continue
        return True
    return False

def structural_check(net, model):
    """Check a network against the patterns of its model.

    Verifies location counts, success and fail self-loops, the nok exits of
    leaves, And, Sand, Or and countering nodes, and that every parent of every
    node can receive both of its messages.

    :rtype: list(:py:class:`adtmas.model.Diagnostic`)
    """
    diags = []
    add = lambda rule, subject, message: diags.append(Diagnostic(rule, subject, message))
    if len(net.models) != len(model) or set(net.index) != set(model.nodes):
        add('ModelCount', model.name, 'network has {} models for {} nodes'.format(len(net.models), len(model)))
    for nid, node in model.nodes.items():
        if nid not in net.index:
            continue
        local = net.models[net.index[nid]]
        want = _expected_locations(node, net.rational)
        if len(local.locations) != want:
            add('PatternShape', nid, "model of '{}' has {} locations, expected {}".format(nid, len(local.locations), want))
        ok, nok = '{}_ok'.format(nid), '{}_nok'.format(nid)
        if not _has(local, local.success, local.success, ok, Dir.SEND) or not _has(local, local.fail, local.fail, nok, Dir.SEND):
            add('MissingSelfLoop', nid, "model of '{}' lacks an ok or nok self-loop".format(nid))

        missing = []
        cs = node.children
        if node.kind is NodeKind.LEAF:
            if not _has(local, local.initial, local.fail, nok, Dir.SEND):
                missing.append(nid)
        elif node.kind in (NodeKind.AND, NodeKind.SAND):
            for j in range(len(cs)):
                src = local.locations.index('l{}'.format(j))
                failing = cs[j:] if node.kind is NodeKind.AND else cs[j:j + 1]
                missing.extend(c for c in failing if not _has(local, src, local.fail, '{}_nok'.format(c), Dir.RECV))
        elif node.kind is NodeKind.OR:
            if not any(t.dst == local.fail and not t.is_loop for t in local.transitions):
                missing.append(nid)
            for c in cs:
                if not _has(local, action='{}_ok'.format(c), dir=Dir.RECV):
                    add('MissingReceive', nid, "model of '{}' never receives {}_ok".format(nid, c))
        elif node.kind in (NodeKind.COUNTER, NodeKind.SCOUNTER):
            a = cs[0]
            if not _has(local, local.initial, local.fail, '{}_nok'.format(a), Dir.RECV):
                missing.append(a)
        else:
            if not _has(local, dst=local.fail, action='{}_ok'.format(cs[1]), dir=Dir.RECV):
                missing.append(cs[1])
        if missing:
            add('MissingFailExit', nid, "model of '{}' has no fail exit for {}".format(nid, ', '.join(missing)))

    for nid in model.nodes:
        for parent in model.parents(nid):
            if parent not in net.index:
                continue
            local = net.models[net.index[parent]]
            for payload in ('ok', 'nok'):
                if not _has(local, action='{}_{}'.format(nid, payload), dir=Dir.RECV):
                    add('MissingFanOut', nid, "'{}' cannot receive {}_{}".format(parent, nid, payload))
    return diags
