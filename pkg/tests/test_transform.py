# -*- coding: utf-8 -*-
# pylint: disable=redefined-outer-name
from itertools import product

import pytest

from adtmas.eamas import Rule
from adtmas.explorer import Scheduler
from adtmas.model import NodeKind, Polarity, eval_boolean
from adtmas.transform import (
    local_model, network_attrs, or_positions, render_guard, rule_for, structural_check, transform,
)

from tests.randmodels import random_model, shape_model, shapes

CASES = ('treasure', 'forestall', 'forestall-id', 'iot-dev', 'iot-dev-inc', 'gain-admin', 'gain-admin-tla')

@pytest.fixture(scope='module')
def treasure(case):
    yield case('treasure')

def test_rules():
    assert rule_for(NodeKind.AND, 'time') is Rule.TIMEC and rule_for(NodeKind.AND, 'cost') is Rule.SUM
    assert rule_for(NodeKind.SAND, 'time') is Rule.SUM
    assert rule_for(NodeKind.OR, 'time') is Rule.TIMEC and rule_for(NodeKind.OR, 'time', True) is Rule.CHOSEN
    assert rule_for(NodeKind.NOCOUNTER, 'cost') is Rule.OWN

def test_describe(treasure):
    spec = transform(treasure).spec
    assert spec.describe('ST', 'time') == 't_ST := 2 + timeC(t_b, t_f)'
    assert spec.describe('TF', 'cost') == 'c_TF := c_ST + c_GA'
    assert spec.describe('TS', 'time') == 't_TS := t_TF'
    assert spec.describe('b', 'cost') == 'c_b := 500'
    assert transform(treasure, rational=True).spec.describe('GA', 'time') == 't_GA := one of(t_h, t_e)'

def test_render_guard(treasure):
    cond = treasure.node('TS').condition
    assert render_guard(cond, treasure) == 't[p.time] > 2 + t_GA'
    assert render_guard(cond, treasure.with_params([])) == '10 > 2 + t_GA'

def test_or_positions():
    states, edges = or_positions(('x', 'y'))
    assert len(edges) == 3 * 4
    assert (2, ('x', 'y'), 'none') in states and (2, (), 'skip') in states
    assert (2, ('y',), 'ok') in states and (2, ('x',), 'ok') in states

@pytest.mark.parametrize('name', CASES)
def test_structural_cases(case, name):
    model = case(name)
    for rational in (False, True):
        net = transform(model, rational)
        assert len(net) == len(model) and structural_check(net, model) == []

def test_structural_random():
    for seed in range(60):
        model = random_model(seed)
        assert structural_check(transform(model), model) == []

def test_missing_fail_exit(treasure):
    net = transform(treasure)
    st = net.models[net.index['ST']]
    kept = [t for t in st.transitions if not (t.src == 0 and t.action == 'f_nok')]
    broken = net.replace('ST', st.replace(kept))
    diags = structural_check(broken, treasure)
    assert [(d.rule, d.subject) for d in diags] == [('MissingFailExit', 'ST')]

def test_missing_self_loop(treasure):
    net = transform(treasure)
    h = net.models[net.index['h']]
    kept = [t for t in h.transitions if not t.is_loop]
    diags = structural_check(net.replace('h', h.replace(kept)), treasure)
    assert [(d.rule, d.subject) for d in diags] == [('MissingSelfLoop', 'h')]

def test_rational_or_locations(treasure):
    m = local_model(treasure.node('GA'), rational=True)
    assert m.locations == ('l0', 'l1', 'l_GA', "l'1", "l'2") and m.fail == 4 and m.success == 2

def test_subset_or_locations(treasure):
    m = local_model(treasure.node('GA'))
    assert m.locations[0] == 'l0' and m.locations[m.fail] == "l'1" and m.locations[m.success] == 'l_GA'
    assert 'l1{h}+' in m.locations and 'l1~' not in m.locations and 'l1{}~' in m.locations

def test_network_attrs(case):
    assert network_attrs(case('forestall')) == ('cost', 'time')

SHAPES = [sh for pol in (Polarity.ATTACK, Polarity.DEFENCE) for n in range(1, 5) for sh in shapes(n, pol)]
CHUNKS = 16

def ok_assignments(model):
    """Leaf outcome vectors under which the network reaches root_ok.

    Every leaf is pinned, so all of them decide before the root moves and each
    root success state carries a complete assignment."""
    net = transform(model)
    sched = Scheduler(net, pinned=model.leaves)
    leaves = [net.index[x] for x in model.leaves]
    root = net.models[net.index[model.root]]
    start = sched.initial()
    seen, stack, found = {start}, [start], set()
    while stack:
        s = stack.pop()
        if s.locs[net.index[model.root]] == root.success:
            found.add(tuple(s.locs[i] == net.models[i].success for i in leaves))
            continue
        for t in sched.successors(s):
            if t.target not in seen:
                seen.add(t.target)
                stack.append(t.target)
    return found

def true_assignments(model):
    leaves = model.leaves
    return {bits for bits in product((True, False), repeat=len(leaves))
            if eval_boolean(model, dict(zip(leaves, bits)))[model.root]}

def test_shape_count():
    assert [len(shapes(n)) for n in range(1, 5)] == [1, 6, 75, 1173]

@pytest.mark.parametrize('chunk', range(CHUNKS))
def test_boolean_adequacy_shapes(chunk):
    for sh in SHAPES[chunk::CHUNKS]:
        model = shape_model(sh)
        assert ok_assignments(model) == true_assignments(model), sh

@pytest.mark.parametrize('seed', range(60))
def test_boolean_adequacy_random(seed):
    model = random_model(seed)
    got, want = ok_assignments(model), true_assignments(model)
    if any(n.condition is not None for n in model.nodes.values()):
        # a failed guard only removes successes; a false tree never reaches root_ok
        assert got <= want
    else:
        assert got == want

def forced(net, model, bits):
    """Network whose leaves can only take the given outcomes."""
    for leaf, ok in zip(model.leaves, bits):
        want = 'ok' if ok else 'nok'
        local = net.models[net.index[leaf]]
        net = net.replace(leaf, local.replace(t for t in local.transitions if t.choice is None or t.choice[2] == want))
    return net

def reaches_root(net, reduce):
    sched = Scheduler(net, reduce=reduce)
    root = net.index[net.model.root]
    start = sched.initial()
    seen, stack = {start}, [start]
    while stack:
        s = stack.pop()
        if s.locs[root] == net.models[root].success:
            return True
        for t in sched.successors(s):
            if t.target not in seen:
                seen.add(t.target)
                stack.append(t.target)
    return False

@pytest.mark.parametrize('reduce', [True, False])
def test_forced_leaves_shapes(reduce):
    for sh in SHAPES:
        model = shape_model(sh)
        if len(model.leaves) > 3:
            continue
        net = transform(model)
        for bits in product((True, False), repeat=len(model.leaves)):
            want = eval_boolean(model, dict(zip(model.leaves, bits)))[model.root]
            # a false tree never reaches root_ok, it deadlocks or fails instead
            assert reaches_root(forced(net, model, bits), reduce) == want, (sh, bits)
