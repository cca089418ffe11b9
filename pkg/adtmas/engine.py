import logging
import os
import time
from collections import deque
from dataclasses import asdict, dataclass, field
from itertools import combinations
from multiprocessing import Pool

import networkx as nx

from . import oracle
from .eamas import Dir, Payload, Rule
from .explorer import Explorer, Scheduler, trace_of
from .model import NodeKind
from .records import GoalUnreachable, OutcomeCollection, StateSpaceExceeded, UnknownLabel, UsageError
from .transform import transform

KINDS = ('feasible', 'min', 'max', 'enumerate')

@dataclass(frozen=True)
class Query:
    kind: str
    attr: str = None
    goal: str = 'root_ok'

    def __str__(self):
        if self.attr:
            return '{}({}) @ {}'.format(self.kind, self.attr, self.goal)
        return '{} @ {}'.format(self.kind, self.goal)

    def as_dict(self):
        return {'kind': self.kind, 'attr': self.attr, 'goal': self.goal}

@dataclass
class ExplorationStats:
    states: int = 0
    transitions: int = 0
    wall_time: float = 0.0
    peak_frontier: int = 0

    def add(self, part):
        self.states += part['states']
        self.transitions += part['transitions']
        self.peak_frontier = max(self.peak_frontier, part['peak'])

    def as_dict(self):
        return asdict(self)

@dataclass
class QueryResult:
    """``value`` is a bool (feasible), a Fraction (min, max) or an
    :py:class:`adtmas.records.OutcomeCollection` (enumerate)."""
    query: Query
    value: object
    witness: dict = None
    stats: ExplorationStats = field(default_factory=ExplorationStats)

def _cones(net):
    """Per model, names of the same-polarity nodes its value can account for."""
    model = net.model
    out = []
    for m in net.models:
        seen, stack = {m.node}, [m.node]
        while stack:
            n = model.node(stack.pop())
            nxt = n.children[:1] if n.kind.is_countering else n.children
            for c in nxt:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        out.append(frozenset(seen))
    return tuple(out)

def _target(net, label):
    """Model whose success the label asks for, None for nok labels."""
    i, locs = net.labels[label]
    return i if net.models[i].success in locs else None

class Bounds(object):
    """Bounds on the value of one attribute a model can still end with.

    :py:meth:`estimate` gives ``(lo, hi)`` for a model in a state: ``lo`` is a
    lower bound on its value if it succeeds, None when it can no longer succeed;
    ``hi`` bounds any value it ends with. Children already received count with
    their stored value, pending ones with their own bounds. Time combined with
    timeC is bounded per group of children whose subtrees share an agent.
    """
    def __init__(self, net, attr):
        self.net = net
        self.attr = attr
        model = net.model
        cones = _cones(net)
        self.slot = tuple(net.slot[(m.node, attr)] for m in net.models)
        self.own = tuple(net.interp.intrinsic(m.node, attr) for m in net.models)
        self.rule = tuple(net.spec[(m.node, attr)] for m in net.models)
        self.members, self.disjoint, self.groups = [], [], []
        for m in net.models:
            node = model.node(m.node)
            members = node.children[:1] if node.kind.is_countering else node.children
            self.members.append(tuple(net.index[c] for c in members))
            g = nx.Graph()
            g.add_nodes_from(net.index[c] for c in members)
            agents = {c: {net.agents.get(x, x) for x in cones[net.index[c]]} for c in members}
            disjoint = True
            for a, b in combinations(members, 2):
                if cones[net.index[a]] & cones[net.index[b]]:
                    disjoint = False
                if agents[a] & agents[b]:
                    g.add_edge(net.index[a], net.index[b])
            self.disjoint.append(disjoint)
            self.groups.append(tuple(tuple(sorted(c)) for c in nx.connected_components(g)))
        self.can_succeed = tuple(_can_reach(m, m.success) for m in net.models)
        self.ok_seen = tuple(_all_incoming(m, lambda t: t.message is not None and t.message.dir is Dir.RECV
                                           and t.message.payload is Payload.OK) for m in net.models)
        self.written = tuple(_all_incoming(m, lambda t, node=m.node: any(u.node == node and u.with_own for u in t.updates),
                                           carry=False) for m in net.models)

    def estimate(self, s, i, memo=None):
        memo = {} if memo is None else memo
        if i in memo:
            return memo[i]
        m = self.net.models[i]
        loc = s.locs[i]
        if loc == m.success:
            v = s.vals[self.slot[i]]
            r = (v, v)
        elif loc == m.fail:
            r = (None, s.vals[self.slot[i]])
        elif loc < 0:
            r = (None, 0)
        elif self.written[i][loc]:
            v = s.vals[self.slot[i]]
            r = (v if self.can_succeed[i][loc] else None, v)
        elif m.kind is NodeKind.LEAF:
            r = (self.own[i], self.own[i])
        else:
            r = self._inner(s, i, m, loc, memo)
        memo[i] = r
        return r

    def _inner(self, s, i, m, loc, memo):
        models = self.net.models
        rcv, reads = m.received[loc], m.future_reads[loc]
        exact, pending = {}, {}
        for c in self.members[i]:
            name = models[c].node
            if name not in reads:
                continue
            if name in rcv:
                exact[c] = s.vals[self.slot[c]]
            else:
                pending[c] = self.estimate(s, c, memo)
        succeed = self.can_succeed[i][loc]
        hi = (self.own[i] if succeed else 0) + self._upper(i, exact, pending)
        lo = self._lower(i, m.kind, loc, exact, pending) if succeed else None
        return lo, hi

    def _fold(self, i, xs):
        if self.rule[i] is Rule.SUM and self.disjoint[i]:
            return sum(xs)
        return max(xs, default=0)

    def _lower(self, i, kind, loc, exact, pending):
        own = self.own[i]
        if kind in (NodeKind.AND, NodeKind.SAND):
            los = [lo for lo, _ in pending.values()]
            if None in los:
                return None
            return own + self._fold(i, list(exact.values()) + los)
        if kind is NodeKind.OR:
            got = list(exact.values())
            if self.rule[i] is not Rule.CHOSEN and self.ok_seen[i][loc]:
                return own + self._fold(i, got)
            cands = [lo for lo, _ in pending.values() if lo is not None]
            if not cands:
                return None
            if self.rule[i] is Rule.CHOSEN:
                return own + min(cands)
            return own + self._fold(i, got + [min(cands)])
        a = self.members[i][0]
        if a in exact:
            return own + exact[a]
        if kind is NodeKind.NOCOUNTER:
            return own
        lo_a = pending[a][0] if a in pending else None
        return None if lo_a is None else own + lo_a

    def _upper(self, i, exact, pending):
        his = dict(exact)
        his.update((c, hi) for c, (_, hi) in pending.items())
        if not his:
            return 0
        if self.rule[i] is Rule.TIMEC:
            return max(sum(his.get(c, 0) for c in g) for g in self.groups[i])
        return sum(his.values())

def _can_reach(m, goal):
    ok = [False] * len(m.locations)
    ok[goal] = True
    # local automata are acyclic apart from self-loops; iterate to a fixpoint
    changed = True
    while changed:
        changed = False
        for t in m.transitions:
            if not t.is_loop and ok[t.dst] and not ok[t.src]:
                ok[t.src] = changed = True
    return tuple(ok)

def _all_incoming(m, pred, carry=True):
    """Per location, True when every non-loop transition into it satisfies
    ``pred`` (or, with ``carry``, leaves a location where that already held)."""
    incoming = [[] for _ in m.locations]
    for t in m.transitions:
        if not t.is_loop:
            incoming[t.dst].append(t)
    out = [None] * len(m.locations)
    out[m.initial] = False

    def flag(loc):
        if out[loc] is None:
            out[loc] = bool(incoming[loc]) and all(pred(t) or (carry and flag(t.src)) for t in incoming[loc])
        return out[loc]
    return tuple(flag(loc) for loc in range(len(m.locations)))

def bounds_of(sched, attr):
    """:py:class:`Bounds` of a scheduler's network, built once per attribute."""
    key = ('bounds', attr)
    if key not in sched.tables:
        sched.tables[key] = Bounds(sched.net, attr)
    return sched.tables[key]

def _better(mode, a, b):
    if b is None:
        return True
    return a < b if mode == 'min' else a > b

def search(sched, mode, label, attr=None, roots=None, limit=10 ** 7, bound=None, split=None):
    """Explore from ``roots`` (``[(state, trace)]``, the initial state by default).

    Feasibility searches breadth first and stops at the first goal state; the
    other modes search depth first. Min and max drop states where the goal
    model can no longer succeed, and states whose :py:class:`Bounds` cannot beat
    the best goal value found so far. With ``split`` the search is breadth first and
    stops as soon as the frontier holds that many states, returning them in
    ``pending``.

    :return: dict with ``found``, ``best``, ``trace``, ``outcomes``, ``states``,
        ``transitions``, ``peak`` and ``pending``
    """
    net = sched.net
    if roots is None:
        roots = [(sched.initial(), {'leaves': {}, 'ors': {}})]
    prefixes = {s: tr for s, tr in roots}
    target = _target(net, label)
    goal_node = net.models[net.labels[label][0]].node
    bounds = bounds_of(sched, attr) if target is not None and mode in ('min', 'max') else None
    frontier = deque(s for s, _ in roots)
    visited = set(frontier)
    pred = {}
    res = {'found': False, 'best': bound, 'trace': None, 'outcomes': {}, 'states': 0,
           'transitions': 0, 'peak': len(frontier), 'pending': []}
    breadth = mode == 'feasible' or split is not None
    while frontier:
        if split is not None and len(frontier) >= split:
            res['pending'] = [(s, trace_of(pred, s, prefixes)) for s in frontier]
            return res
        s = frontier.popleft() if breadth else frontier.pop()
        res['states'] += 1
        if res['states'] > limit:
            raise StateSpaceExceeded(limit)
        if sched.is_goal(s, label):
            if mode == 'feasible':
                res['found'] = True
                res['trace'] = trace_of(pred, s, prefixes)
                return res
            if mode == 'enumerate':
                key = tuple(net.read(s, goal_node, a) for a in net.attrs)
                if key not in res['outcomes']:
                    res['found'] = True
                    res['outcomes'][key] = trace_of(pred, s, prefixes)
                continue
            v = net.read(s, goal_node, attr)
            if _better(mode, v, res['best']):
                res['found'] = True
                res['best'] = v
                res['trace'] = trace_of(pred, s, prefixes)
            continue
        if bounds is not None:
            lo, hi = bounds.estimate(s, target)
            if lo is None:
                continue
            best = res['best']
            if best is not None and (lo >= best if mode == 'min' else hi <= best):
                continue
        succ = sched.successors(s)
        res['transitions'] += len(succ)
        for t in succ:
            nxt = t.target
            if nxt not in visited:
                visited.add(nxt)
                pred[nxt] = (s, t.choices)
                frontier.append(nxt)
        res['peak'] = max(res['peak'], len(frontier))
    return res

_WORKER = {}

def _init_worker(net):
    _WORKER.clear()
    _WORKER['net'] = net

def _explore_shard(args):
    reduce, pinned, mode, label, attr, roots, limit, bound = args
    key = (reduce, pinned)
    if key not in _WORKER:
        _WORKER[key] = Scheduler(_WORKER['net'], reduce=reduce, pinned=pinned)
    try:
        return search(_WORKER[key], mode, label, attr, roots, limit, bound)
    except StateSpaceExceeded:
        return {'exceeded': limit}

def merge(mode, parts):
    """Fold shard results with exact min, max or union; first shard wins ties."""
    out = {'found': False, 'best': None, 'trace': None, 'outcomes': {}, 'states': 0, 'transitions': 0, 'peak': 0}
    for part in parts:
        out['states'] += part['states']
        out['transitions'] += part['transitions']
        out['peak'] = max(out['peak'], part['peak'])
        if not part['found']:
            continue
        if mode == 'feasible':
            if not out['found']:
                out['trace'] = part['trace']
        elif mode == 'enumerate':
            for k, tr in part['outcomes'].items():
                out['outcomes'].setdefault(k, tr)
        elif _better(mode, part['best'], out['best']):
            out['best'] = part['best']
            out['trace'] = part['trace']
        out['found'] = True
    return out

class Engine(Explorer):
    """Answers reachability and min/max queries over an EAMAS network.

    :param net: :py:class:`adtmas.eamas.EamasNetwork`
    :param kwargs: ``workers`` (env ``ADTMAS_WORKERS``, else the cpu count),
        ``max_states`` (10**7), ``reduce`` (True), ``shard_min`` (frontier size
        that triggers sharding, 512), ``debug``

    .. code-block:: Python
        :linenos:

        with Engine(transform(model), workers=1) as e:
            e.minimize('time').value  # 61920
    """
    def __init__(self, net, **kwargs):
        self.net = net
        self.cfg = {}
        self.cfg.update(kwargs)
        cfgdef = {
            'workers': int(os.environ.get('ADTMAS_WORKERS', 0)) or os.cpu_count() or 1,
            'max_states': 10 ** 7,
            'reduce': True,
            'shard_min': 512,
            'debug': False,
        }
        for k, v in cfgdef.items():
            self.cfg[k] = self.cfg.get(k, v)
        self.debug = self.cfg.get('debug', False)
        self._pool = None
        self._schedulers = {}

    @property
    def info(self):
        return {
            'model': self.net.model.name,
            'models': len(self.net),
            'attrs': list(self.net.attrs),
            'rational': self.net.rational,
            'workers': self.cfg['workers'],
            'reduce': self.cfg['reduce'],
        }

    def _pinned(self, label):
        return (self.net.models[self.net.labels[label][0]].node,)

    def scheduler(self, label='root_ok'):
        pinned = self._pinned(label)
        if pinned not in self._schedulers:
            self._schedulers[pinned] = Scheduler(self.net, reduce=self.cfg['reduce'], pinned=pinned)
        return self._schedulers[pinned]

    def _validate(self, q):
        if q.kind not in KINDS:
            raise UsageError('unknown query kind {!r}, expected one of {}'.format(q.kind, ', '.join(KINDS)))
        if q.goal not in self.net.labels:
            raise UnknownLabel(q.goal)
        if q.kind in ('min', 'max') and q.attr not in self.net.attrs:
            raise UsageError('attribute {!r} is not declared in {}'.format(q.attr, self.net.model.name))

    def _explore(self, q):
        sched = self.scheduler(q.goal)
        limit = self.cfg['max_states']
        workers = self.cfg['workers']
        if workers <= 1:
            return search(sched, q.kind, q.goal, q.attr, limit=limit)
        head = search(sched, q.kind, q.goal, q.attr, limit=limit, split=self.cfg['shard_min'])
        if not head['pending'] or (q.kind == 'feasible' and head['found']):
            return head
        shards = [head['pending'][k::workers] for k in range(workers)]
        shards = [sh for sh in shards if sh]
        if self._pool is None:
            self._pool = Pool(processes=workers, initializer=_init_worker, initargs=(self.net,))
        args = [(self.cfg['reduce'], self._pinned(q.goal), q.kind, q.goal, q.attr, sh, limit, head['best'])
                for sh in shards]
        parts = self._pool.map(_explore_shard, args)
        for k, part in enumerate(parts):
            if 'exceeded' in part:
                raise StateSpaceExceeded(part['exceeded'])
            if self.debug:
                logging.debug('shard %d: %d roots, %d states, %d transitions', k, len(shards[k]), part['states'], part['transitions'])
        return merge(q.kind, [head] + parts)

    def check(self, q):
        """Answer one query.

        :param q: :py:class:`Query`
        :rtype: :py:class:`QueryResult`
        """
        self._validate(q)
        start = time.perf_counter()
        res = self._explore(q)
        stats = ExplorationStats()
        stats.add(res)
        stats.wall_time = time.perf_counter() - start
        logging.info('%s on %s: %d states, %d transitions, %.3fs', q, self.net.model.name, stats.states, stats.transitions, stats.wall_time)
        if q.kind == 'feasible':
            return QueryResult(q, res['found'], res['trace'], stats=stats)
        if q.kind == 'enumerate':
            node = self.net.models[self.net.labels[q.goal][0]].node
            rows = []
            for key in sorted(res['outcomes']):
                row = {'verdict': True}
                row.update(zip(self.net.attrs, key))
                row['trace'] = res['outcomes'][key]
                rows.append(row)
            logging.debug('%d outcomes for %s', len(rows), node)
            return QueryResult(q, OutcomeCollection(rows), stats=stats)
        if not res['found']:
            raise GoalUnreachable(q)
        return QueryResult(q, res['best'], res['trace'], stats=stats)

    def feasible(self, goal='root_ok'):
        return self.check(Query('feasible', goal=goal))

    def minimize(self, attr, goal='root_ok'):
        return self.check(Query('min', attr, goal))

    def maximize(self, attr, goal='root_ok'):
        return self.check(Query('max', attr, goal))

    def enumerate(self, goal='root_ok'):
        return self.check(Query('enumerate', goal=goal))

    def close(self):
        if self._pool is not None:
            self._pool.close()
            self._pool.join()
            self._pool = None

def check(net, q, **kwargs):
    """Answer ``q`` on ``net`` with a throwaway :py:class:`Engine`."""
    with Engine(net, **kwargs) as e:
        return e.check(q)

@dataclass
class CrossCheck:
    model: str
    engine_only: list
    oracle_only: list

    @property
    def match(self):
        return not self.engine_only and not self.oracle_only

    def __bool__(self):
        return self.match

def cross_check(model, rational=False, goal='root_ok', **kwargs):
    """Compare the successful outcomes of the network with those of the oracle.

    Outcomes are compared on their verdict and attribute values.

    :rtype: :py:class:`CrossCheck`
    """
    net = transform(model, rational)
    with Engine(net, **kwargs) as e:
        got = e.enumerate(goal).value.projections(net.attrs)
    want = oracle.enumerate_outcomes(model, rational, goal).projections(net.attrs)
    report = CrossCheck(model.name, sorted(got - want), sorted(want - got))
    if not report.match:
        logging.warning('cross-check mismatch on %s: %d engine-only, %d oracle-only outcomes',
                        model.name, len(report.engine_only), len(report.oracle_only))
    return report
