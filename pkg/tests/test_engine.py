# -*- coding: utf-8 -*-
# pylint: disable=redefined-outer-name
import dataclasses

import pytest

from adtmas.engine import Bounds, Engine, ExplorationStats, Query, bounds_of, check, merge
from adtmas.explorer import Scheduler
from adtmas.model import AdtModel, NodeKind
from adtmas.oracle import replay
from adtmas.records import GoalUnreachable, StateSpaceExceeded, UnknownLabel, UsageError
from adtmas.transform import transform
from adtmas.utils import agents_parser

from tests.randmodels import random_model

FORESTALL_MIN_TIME = 61920    # 43 days
FORESTALL_MAX_TIME = 132480   # 92 days
FORESTALL_PAR_MAX_TIME = 79200  # 55 days
GAIN_ADMIN = [
    (Query('min', 'time'), 2942),
    (Query('max', 'time'), 23070),
    (Query('min', 'cost'), 100),
    (Query('max', 'cost'), 15820),
]

def engine_for(model, agents=None, rational=False, **kwargs):
    if agents:
        model = model.with_agents(agents_parser(agents, model))
    kwargs.setdefault('workers', 1)
    return Engine(transform(model, rational), **kwargs)

@pytest.fixture(scope='module')
def forestall(case):
    with engine_for(case('forestall')) as e:
        yield e

@pytest.fixture(scope='module')
def treasure(case):
    with engine_for(case('treasure')) as e:
        yield e

def test_treasure(treasure):
    res = treasure.feasible()
    assert res.value is True and res.witness['leaves']['p'] == 'nok'
    assert treasure.minimize('cost').value == 1100
    res = treasure.minimize('time')
    assert res.value == 125 and res.witness['leaves']['h'] == 'ok'

def test_treasure_single(case):
    with engine_for(case('treasure'), 'single:ALL') as e:
        assert e.minimize('time').value == 185

def test_treasure_slow_police(case):
    with engine_for(case('treasure').with_values({('p', 'time'): 5})) as e:
        assert e.feasible().value is False
        with pytest.raises(GoalUnreachable):
            e.minimize('time')

def test_forestall(forestall):
    assert forestall.minimize('time').value == FORESTALL_MIN_TIME
    assert forestall.maximize('time').value == FORESTALL_MAX_TIME
    assert forestall.minimize('cost').value == 4000 and forestall.maximize('cost').value == 10500

def test_forestall_parallel(case):
    with engine_for(case('forestall'), 'parallel:ALL') as e:
        assert e.maximize('time').value == FORESTALL_PAR_MAX_TIME
        assert e.minimize('time').value == FORESTALL_MIN_TIME

def test_iot(case):
    with engine_for(case('iot-dev')) as e:
        assert e.minimize('cost').value == 270 and e.maximize('cost').value == 380
        assert e.minimize('time').value == 694 and e.maximize('time').value == 694
    with engine_for(case('iot-dev'), 'single:ALL') as e:
        assert e.minimize('time').value == 784 and e.maximize('time').value == 1204
    with engine_for(case('iot-dev'), rational=True) as e:
        assert e.maximize('cost').value == 320

def test_gain_admin(case):
    with engine_for(case('gain-admin')) as e:
        for q, want in GAIN_ADMIN:
            res = e.check(q)
            assert res.value == want and res.stats.wall_time < 10, q
        assert e.feasible('GAPS_ok').value is True

def test_gain_admin_bounds(case):
    net = transform(case('gain-admin'))
    sched = Scheduler(net, pinned=(net.model.root,))
    s, root = sched.initial(), net.index[net.model.root]
    assert bounds_of(sched, 'time') is bounds_of(sched, 'time')
    assert bounds_of(sched, 'time').estimate(s, root) == (2942, 23070)
    assert bounds_of(sched, 'cost').estimate(s, root) == (100, 15820)

def test_node_goals(forestall):
    assert forestall.feasible('NAS_ok').value is True
    assert forestall.minimize('time', 'BRB_ok').value == (15 + 7 + 3) * 1440
    assert forestall.feasible('PRS_nok').value is True

def test_enumerate_replay(case, forestall):
    model = case('forestall')
    records = forestall.enumerate().value.all()
    assert len(records) > 1
    for r in records:
        ok, vals = replay(model, r)
        assert ok and vals['time'] == r.time and vals['cost'] == r.cost

@pytest.mark.parametrize('workers', [1, 2, 8])
def test_workers(case, forestall, workers):
    want = forestall.enumerate().value.projections(forestall.net.attrs)
    with engine_for(case('forestall'), workers=workers, shard_min=1) as e:
        assert e.minimize('time').value == FORESTALL_MIN_TIME
        assert e.maximize('cost').value == 10500
        assert e.feasible().value is True
        assert e.enumerate().value.projections(e.net.attrs) == want

def test_reduction_treasure(case, treasure):
    want = treasure.enumerate().value.projections(treasure.net.attrs)
    with engine_for(case('treasure'), reduce=False) as e:
        assert e.enumerate().value.projections(e.net.attrs) == want
        assert e.minimize('time').value == 125

def test_reduction_random():
    for seed in range(30):
        model = random_model(seed, max_leaves=4)
        with engine_for(model) as e:
            want = e.enumerate().value.projections(e.net.attrs)
        with engine_for(model, reduce=False) as e:
            assert e.enumerate().value.projections(e.net.attrs) == want, seed

def test_reduced_is_smaller(case):
    net = transform(case('treasure'))
    full = check(net, Query('enumerate'), workers=1, reduce=False).stats
    part = check(net, Query('enumerate'), workers=1).stats
    assert part.states < full.states

def test_errors(treasure):
    with pytest.raises(UnknownLabel):
        treasure.feasible('zz_ok')
    with pytest.raises(UsageError):
        treasure.minimize('weight')
    with pytest.raises(UsageError):
        treasure.check(Query('median', 'time'))

def test_state_limit(case):
    with engine_for(case('forestall'), max_states=5) as e:
        with pytest.raises(StateSpaceExceeded):
            e.minimize('time')

def test_scheduler_collapse(case):
    net = transform(case('treasure'))
    sched = Scheduler(net, pinned=('TS',))
    s = sched.initial()
    assert sched.canonical(s) == s and sched.demanded(s, net.index['b'])
    assert not sched.demanded(s, net.index['e'])

def test_merge():
    parts = [
        {'found': True, 'best': 7, 'trace': 'a', 'outcomes': {}, 'states': 3, 'transitions': 4, 'peak': 2},
        {'found': True, 'best': 5, 'trace': 'b', 'outcomes': {}, 'states': 1, 'transitions': 1, 'peak': 5},
        {'found': True, 'best': 5, 'trace': 'c', 'outcomes': {}, 'states': 1, 'transitions': 1, 'peak': 1},
    ]
    out = merge('min', parts)
    assert out['best'] == 5 and out['trace'] == 'b' and out['states'] == 5 and out['peak'] == 5
    stats = ExplorationStats()
    stats.add(out)
    assert stats.as_dict()['transitions'] == 6

def goal_values(sched, s, label, node, attr):
    seen, todo, out = {s}, [s], set()
    while todo:
        u = todo.pop()
        if sched.is_goal(u, label):
            out.add(sched.net.read(u, node, attr))
            continue
        for t in sched.successors(u):
            if t.target not in seen:
                seen.add(t.target)
                todo.append(t.target)
    return out

@pytest.mark.parametrize('seed', range(25))
def test_bounds_random(seed):
    model = random_model(seed, max_leaves=4)
    net = transform(model)
    sched = Scheduler(net, pinned=(model.root,))
    root = net.index[model.root]
    states, todo = [sched.initial()], [sched.initial()]
    seen = set(states)
    while todo and len(states) < 150:
        for t in sched.successors(todo.pop()):
            if t.target not in seen:
                seen.add(t.target)
                states.append(t.target)
                todo.append(t.target)
    for attr in net.attrs:
        bounds = Bounds(net, attr)
        for s in states:
            if sched.is_goal(s, 'root_ok'):
                continue
            got = goal_values(sched, s, 'root_ok', model.root, attr)
            lo, hi = bounds.estimate(s, root)
            if got:
                assert lo is not None and lo <= min(got) and max(got) <= hi, (seed, attr, s)

def reordered(model):
    nodes = [dataclasses.replace(n, children=n.children[::-1]) if n.kind in (NodeKind.AND, NodeKind.OR) else n
             for n in model.nodes.values()]
    return AdtModel(model.name, nodes, model.agents, model.params, model.root, model.time_unit)

@pytest.mark.parametrize('rational', [False, True])
def test_child_order_random(rational):
    for seed in range(20):
        model = random_model(seed, max_leaves=4)
        with engine_for(model, rational=rational) as e:
            want = e.enumerate().value.projections(e.net.attrs)
        with engine_for(reordered(model), rational=rational) as e:
            assert e.enumerate().value.projections(e.net.attrs) == want, seed

def test_child_order_forestall(case, forestall):
    with engine_for(reordered(case('forestall'))) as e:
        assert e.minimize('time').value == FORESTALL_MIN_TIME
        assert e.maximize('time').value == FORESTALL_MAX_TIME

def test_agent_count_random():
    for seed in range(20):
        model = random_model(seed, max_leaves=5, conditions=0)
        with engine_for(model, 'parallel:ALL') as many, engine_for(model, 'single:ALL') as one:
            if not one.feasible().value:
                assert not many.feasible().value
                with pytest.raises(GoalUnreachable):
                    many.minimize('time')
                continue
            assert many.minimize('time').value <= one.minimize('time').value, seed
            assert many.maximize('time').value <= one.maximize('time').value, seed
