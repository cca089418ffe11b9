# -*- coding: utf-8 -*-
# pylint: disable=redefined-outer-name
import pickle
from collections import deque
from fractions import Fraction

import pytest

from adtmas import dsl
from adtmas.eamas import (
    DEAD_DONE, FOOTPRINT, ConcreteInterp, Dir, GlobalState, Payload, Rule, agent_groups, combine, fire, is_goal,
    successors, sync_partners,
)
from adtmas.oracle import ChoiceVector, oracle_eval
from adtmas.records import UnknownLabel
from adtmas.transform import transform

from tests.randmodels import random_model

SHARED = '''
tree shared {
  leaf s : attack [time=3]
  leaf b : attack [time=2]
  leaf f : attack [time=4]
  node X = and(s, b)
  node Y = and(s, f)
  node R = and(X, Y)
  assign agents { u: s, b, X, R ; v: f, Y }
}
'''

@pytest.fixture(scope='module')
def shared():
    yield dsl.parse(SHARED)

@pytest.fixture(scope='module')
def treasure_net(case):
    yield transform(case('treasure'))

def test_agent_groups():
    agents = {'b': 'x', 'f': 'y', 'h': 'x'}
    members = [(5, frozenset(['b'])), (7, frozenset(['f'])), (1, frozenset(['h']))]
    groups = agent_groups(members, agents)
    assert groups == [[members[0], members[2]], [members[1]]]

def test_combine_timec(shared):
    interp = ConcreteInterp(shared)
    agents = dict(shared.agents)
    b, f, s = (Fraction(v) for v in (2, 4, 3))
    # different agents run in parallel, the same agent adds up
    assert combine(interp, Rule.TIMEC, 'time', [(s, {'s'}), (f, {'f'})], agents) == [((), 4)]
    assert combine(interp, Rule.TIMEC, 'time', [(s, {'s'}), (b, {'b'})], agents) == [((), 5)]
    assert combine(interp, Rule.SUM, 'time', [(s, {'s'}), (f, {'f'})], agents, own=Fraction(1)) == [((), 8)]

def test_combine_shared(shared):
    interp = ConcreteInterp(shared)
    members = [(Fraction(5), frozenset('sbX')), (Fraction(4), frozenset('sfY'))]
    # s is counted once; the group is no faster than its slowest member
    assert combine(interp, Rule.TIMEC, 'time', members, dict(shared.agents)) == [((), 6)]

def test_shared_oracle(shared):
    ok, vals = oracle_eval(shared, ChoiceVector({'s': True, 'b': True, 'f': True}))
    assert ok and vals['time'] == 6

def test_network_shape(treasure_net):
    net = treasure_net
    assert len(net) == 9 and net.attrs == ('cost', 'time')
    assert [m.node for m in net.models][-1] == 'TS'
    assert net.labels['root_ok'] == net.labels['TS_ok']
    assert len(net.slots) == 9 * 3 and net.slots[2] == (net.models[0].node, FOOTPRINT)
    s = net.initial
    assert all(l == 0 for l in s.locs) and net.values_of(s, 'TS') == {'cost': 0, 'time': 0}
    assert net.location_name(s, net.index['b']) == 'l0'

def test_leaf_model(treasure_net):
    m = treasure_net.models[treasure_net.index['b']]
    assert m.locations == ('l0', 'l1', "l'1") and m.success == 1 and m.fail == 2
    assert len(m.transitions) == 4 and m.completed(1) and m.completed(DEAD_DONE) and not m.completed(0)
    nok = [t for t in m.transitions if t.message is not None and not t.is_loop][0]
    assert nok.message.dir is Dir.SEND and nok.message.payload is Payload.NOK and str(nok.message) == '!b_nok'

def test_future_reads(treasure_net):
    m = treasure_net.models[treasure_net.index['ST']]
    assert m.future_reads[0] == {'b', 'f'} and m.future_reads[m.success] == frozenset()
    assert m.future_receives[0] == {'b', 'f'}
    ts = treasure_net.models[treasure_net.index['TS']]
    assert ts.guard_ahead[0] and not ts.guard_ahead[ts.success]

def test_successors(treasure_net):
    net = treasure_net
    actions = {t.action for t in successors(net, net.initial)}
    assert {'b', 'f', 'h', 'e', 'p', 'GA_skip_h', 'b_nok', 'f_nok', 'h_nok'} == actions
    assert not is_goal(net, net.initial, 'root_ok')
    with pytest.raises(UnknownLabel):
        is_goal(net, net.initial, 'zz_ok')

def test_leaf_update(treasure_net):
    net = treasure_net
    t = [t for t in successors(net, net.initial) if t.action == 'b'][0]
    assert net.values_of(t.target, 'b') == {'cost': 500, 'time': 60}
    assert t.target.vals[net.slot[('b', FOOTPRINT)]] == {'b'}
    assert t.choices == (('leaf', 'b', 'ok'),)

def test_state_hash(treasure_net):
    s = treasure_net.initial
    t = GlobalState(tuple(s.locs), tuple(s.vals))
    assert s == t and hash(s) == hash(t) and s is not t
    back = pickle.loads(pickle.dumps(s))
    assert back._hash is None and back == s and {s: 1}[back] == 1
    assert s != GlobalState(s.locs[:-1] + (s.locs[-1] + 1,), s.vals)

def test_integral_intrinsics(case):
    interp = ConcreteInterp(case('treasure'))
    assert type(interp.intrinsic('b', 'cost')) is int and interp.intrinsic('b', 'cost') == 500
    half = dsl.parse(SHARED.replace('time=3', 'time=2.5'))
    assert ConcreteInterp(half).intrinsic('s', 'time') == Fraction(5, 2)
    assert type(ConcreteInterp(half).intrinsic('b', 'time')) is int

def explored(net, limit=3000):
    """``(state, transition)`` pairs of the full relation, breadth first."""
    start = net.initial
    seen, todo, pairs = {start}, deque([start]), []
    while todo and len(seen) < limit:
        s = todo.popleft()
        for t in successors(net, s):
            pairs.append((s, t))
            if t.target not in seen:
                seen.add(t.target)
                todo.append(t.target)
    return pairs

@pytest.mark.parametrize('seed', range(20))
def test_transitions_random(seed):
    net = transform(random_model(seed, max_leaves=4))
    for s, t in explored(net):
        moved = {i for i, (a, b) in enumerate(zip(s.locs, t.target.locs)) if a != b}
        assert moved <= set(t.movers) and len(t.movers) <= 2
        if len(t.movers) == 2:
            sender, receiver = t.movers
            assert t.action.rsplit('_', 1)[0] == net.models[sender].node
            assert receiver in net.parents[sender]
        else:
            (i,) = t.movers
            assert any(x.message is None and x.action == t.action for x in net.models[i].out[s.locs[i]])
        for k, slot in enumerate(net.slots):
            # numbers never decrease, footprints only grow
            assert s.vals[k] <= t.target.vals[k], (slot, s.vals[k], t.target.vals[k])

@pytest.mark.parametrize('seed', range(20))
def test_sync_order_random(seed):
    net = transform(random_model(seed, max_leaves=4))
    for m in net.models:
        for t in m.transitions:
            assert all(u.node == m.node for u in t.updates)
            if t.message is not None and t.message.dir is Dir.SEND:
                assert t.updates == () and t.guard is None
    for s, _ in explored(net, limit=500):
        for i, m in enumerate(net.models):
            if s.locs[i] < 0:
                continue
            for t in m.out[s.locs[i]]:
                if t.message is None or t.message.dir is not Dir.RECV:
                    continue
                for j, ts in sync_partners(net, s, i, t):
                    fwd = fire(net, net.interp, s, ((j, ts), (i, t)))
                    assert fwd == fire(net, net.interp, s, ((i, t), (j, ts)))
