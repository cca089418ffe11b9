import abc

from .eamas import DEAD_DONE, DEAD_IDLE, Dir, GlobalState, is_goal, successors, transition_of
from .model import NodeKind

class Explorer(abc.ABC):
    """Common shape of the state-space explorers (:py:class:`adtmas.engine.Engine`,
    :py:class:`adtmas.synth.Synthesizer`)."""
    @abc.abstractproperty
    def info(self):
        pass

    @abc.abstractmethod
    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, exc, val, traceback):
        self.close()

class Scheduler(object):
    """Successor relation used for exploration.

    With ``reduce`` on, a leaf decides only while some parent waits for its
    message and announces nok without waiting for a receiver. Only the first
    model (children first) with enabled moves is expanded. Models no live parent
    or pending guard can still read are collapsed to a dead marker with their
    values reset. Goal outcomes are those of the full relation.

    :param net: :py:class:`adtmas.eamas.EamasNetwork`
    :param interp: value domain, the network's concrete one by default
    :param bool reduce: apply the reduction
    :param pinned: node ids that never collapse (root and goal model)
    """
    def __init__(self, net, interp=None, reduce=True, pinned=()):
        self.net = net
        self.interp = interp or net.interp
        self.reduce = reduce
        self.pinned = frozenset(net.index[p] for p in pinned) | {net.index[net.model.root]}
        # channels each model can receive on from each location
        self.recv_now = tuple(
            tuple(frozenset(t.message.channel for t in ts if t.message is not None and t.message.dir is Dir.RECV)
                  for ts in m.out)
            for m in net.models)
        # per model, (parent, parent locations from which it still receives / reads the model)
        self.recv_at, self.read_at = [], []
        for i, m in enumerate(net.models):
            recv, read = [], []
            for p in net.parents[i]:
                mp = net.models[p]
                span = range(len(mp.locations))
                recv.append((p, frozenset(l for l in span if m.node in mp.future_receives[l])))
                read.append((p, frozenset(l for l in span if m.node in mp.future_reads[l])))
            self.recv_at.append(tuple(recv))
            self.read_at.append(tuple(read))
        self.guard_at = tuple(
            tuple((g, frozenset(l for l, ahead in enumerate(net.models[g].guard_ahead) if ahead))
                  for g in net.guard_readers[i])
            for i in range(len(net.models)))
        self.tables = {}

    def initial(self):
        return self.canonical(self.net.initial)

    def liveness(self, s):
        """``(loc_live, val_live)`` flags per model, decided parents first."""
        locs = s.locs
        n = len(locs)
        loc_live = [False] * n
        val_live = [False] * n
        for i in reversed(self.net.order):
            if i in self.pinned:
                loc_live[i] = val_live[i] = True
                continue
            for p, at in self.recv_at[i]:
                if loc_live[p] and locs[p] in at:
                    loc_live[i] = True
                    break
            for p, at in self.read_at[i]:
                if loc_live[p] and locs[p] in at:
                    val_live[i] = True
                    break
            else:
                for g, at in self.guard_at[i]:
                    if loc_live[g] and locs[g] in at:
                        val_live[i] = True
                        break
        return loc_live, val_live

    def canonical(self, s):
        if not self.reduce:
            return s
        net = self.net
        loc_live, val_live = self.liveness(s)
        locs = None
        vals = None
        v0 = net.v0
        for i, m in enumerate(net.models):
            li = s.locs[i]
            if not loc_live[i] and li >= 0:
                if locs is None:
                    locs = list(s.locs)
                locs[i] = DEAD_DONE if m.completed(li) else DEAD_IDLE
            if not val_live[i]:
                for k in net.node_slots[i]:
                    if s.vals[k] != v0[k]:
                        if vals is None:
                            vals = list(s.vals)
                        vals[k] = v0[k]
        if locs is None and vals is None:
            return s
        return GlobalState(tuple(locs) if locs is not None else s.locs,
                           tuple(vals) if vals is not None else s.vals)

    def demanded(self, s, i):
        if i in self.pinned:
            return True
        node = self.net.models[i].node
        for p in self.net.parents[i]:
            lp = s.locs[p]
            if lp >= 0 and node in self.recv_now[p][lp]:
                return True
        return False

    def _moves_of(self, s, i):
        net, interp = self.net, self.interp
        li = s.locs[i]
        out = []
        for t in net.models[i].out[li]:
            if t.message is None:
                out.extend(transition_of(net, interp, s, ((i, t),)))
            elif t.message.dir is Dir.RECV:
                j = net.owner[t.message.channel]
                lj = s.locs[j]
                if lj < 0:
                    continue
                for ts in net.models[j].out[lj]:
                    if ts.is_loop and ts.message is not None and ts.message.dir is Dir.SEND and ts.action == t.action:
                        out.extend(transition_of(net, interp, s, ((j, ts), (i, t))))
            elif not t.is_loop:
                # a leaf commits to nok on its own; receivers take it from the nok self-loop
                out.extend(transition_of(net, interp, s, ((i, t),)))
        return out

    def successors(self, s):
        """Enabled transitions of ``s`` with canonical targets.

        :rtype: list(:py:class:`adtmas.eamas.GlobalTransition`)
        """
        if not self.reduce:
            return successors(self.net, s, self.interp)
        net = self.net
        for i in net.order:
            li = s.locs[i]
            if li < 0:
                continue
            m = net.models[i]
            if m.kind is NodeKind.LEAF and li == m.initial and not self.demanded(s, i):
                continue
            out = self._moves_of(s, i)
            if out:
                return [_retarget(t, self.canonical(t.target)) for t in out]
        return []

    def is_goal(self, s, label):
        return is_goal(self.net, s, label)

def _retarget(t, target):
    if target is t.target:
        return t
    return t.__class__(t.action, t.movers, target, t.assumptions, t.choices)

def trace_of(pred, s, prefixes=None):
    """Choice trace leading to ``s`` in a predecessor map ``state -> (state, choices)``.

    ``prefixes`` maps start states to the trace that led to them.

    :return: ``{'leaves': {leaf: 'ok'|'nok'}, 'ors': {or: [attempted children]}}``
    """
    leaves, ors = {}, {}
    while s in pred:
        s, choices = pred[s]
        for c in choices:
            if c[0] == 'leaf':
                leaves[c[1]] = c[2]
            elif c[0] == 'or':
                ors.setdefault(c[1], set()).add(c[2])
    trace = {'leaves': dict(sorted(leaves.items())), 'ors': {k: sorted(v) for k, v in sorted(ors.items())}}
    if prefixes and s in prefixes:
        trace = join_traces(prefixes[s], trace)
    return trace

def join_traces(prefix, suffix):
    leaves = dict(prefix['leaves'])
    leaves.update(suffix['leaves'])
    ors = {k: set(v) for k, v in prefix['ors'].items()}
    for k, v in suffix['ors'].items():
        ors.setdefault(k, set()).update(v)
    return {'leaves': dict(sorted(leaves.items())), 'ors': {k: sorted(v) for k, v in sorted(ors.items())}}
