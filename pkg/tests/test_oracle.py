# -*- coding: utf-8 -*-
# pylint: disable=redefined-outer-name
import pytest

from adtmas.engine import cross_check
from adtmas.oracle import (
    ChoiceVector, choice_vectors, enumerate_by_vectors, enumerate_outcomes, goal_node, or_options, oracle_eval,
    outcome_tables, replay, run,
)
from adtmas.records import MissingLeafOutcome, UnknownLabel
from adtmas.transform import network_attrs

from tests.randmodels import random_model

ATTACK_OK = {'b': True, 'f': True, 'h': True, 'e': True}

@pytest.fixture(scope='module')
def treasure(case):
    yield case('treasure')

def test_treasure_helicopter(treasure):
    leaves = dict(ATTACK_OK, p=False)
    ok, vals = oracle_eval(treasure, ChoiceVector(leaves, {'GA': ('h',)}))
    assert ok and vals['cost'] == 1100 and vals['time'] == 125

def test_treasure_single_agent(treasure):
    agents = {nid: 'police' if nid == 'p' else 'thief' for nid in treasure.nodes}
    leaves = dict(ATTACK_OK, p=False)
    ok, vals = oracle_eval(treasure.with_agents(agents), ChoiceVector(leaves, {'GA': ('h',)}))
    assert ok and vals['time'] == 185

def test_treasure_guard(treasure):
    leaves = dict(ATTACK_OK, p=False)
    ok, vals = oracle_eval(treasure, ChoiceVector(leaves, {'GA': ('e',)}))
    # police arrive in 10 min, the thieves need 2 + 10
    assert not ok and vals['time'] == 132
    assert not oracle_eval(treasure, ChoiceVector(dict(ATTACK_OK, p=True), {'GA': ('h',)}))[0]

def test_failure_values(treasure):
    leaves = dict(ATTACK_OK, h=False, e=False, p=False)
    ev = run(treasure, ChoiceVector(leaves, {'GA': ('h', 'e')}))
    assert ev.status['GA'] is False and ev.status['TF'] is False and ev.status['TS'] is False
    assert ev.values['GA']['time'] == 0 and ev.values['TF']['time'] == 0
    ev = run(treasure, ChoiceVector(leaves, {'GA': ('h',)}))
    assert ev.status['GA'] is None and ev.status['TS'] is None

def test_missing_leaf(treasure):
    with pytest.raises(MissingLeafOutcome):
        oracle_eval(treasure, ChoiceVector({'b': True}))

def test_options(treasure):
    ga = treasure.node('GA')
    assert or_options(ga) == [('h',), ('e',), ('h', 'e')]
    assert or_options(ga, rational=True) == [('h',), ('e',), ('h', 'e')]
    assert sum(1 for _ in choice_vectors(treasure)) == 2 ** 5 * 3

def test_goal_node(treasure):
    assert goal_node('root_ok', treasure) == ('TS', True) and goal_node('GA_ok', treasure) == ('GA', True)
    assert goal_node('GA_nok', treasure) == ('GA', False) and goal_node('root_nok', treasure) == ('TS', False)
    with pytest.raises(UnknownLabel):
        goal_node('zz_ok', treasure)
    with pytest.raises(UnknownLabel):
        goal_node('GA', treasure)

def test_enumerate(treasure):
    rows = enumerate_outcomes(treasure).all()
    assert {(r.cost, r.time) for r in rows} == {(1100, 125)}
    for r in rows:
        assert replay(treasure, r) == (True, {'cost': r.cost, 'time': r.time})

@pytest.mark.parametrize('name', ('treasure', 'forestall', 'forestall-id', 'iot-dev', 'iot-dev-inc', 'gain-admin', 'gain-admin-tla'))
def test_cross_check_cases(case, name):
    for rational in (False, True):
        report = cross_check(case(name), rational, workers=1)
        assert report.match, (report.engine_only, report.oracle_only)

def test_cross_check_node_goal(case):
    assert cross_check(case('forestall'), goal='NAS_ok', workers=1)

@pytest.mark.parametrize('seed', range(200))
def test_cross_check_random(seed):
    model = random_model(seed)
    report = cross_check(model, seed % 4 == 0, workers=1)
    assert report.match, (report.engine_only, report.oracle_only)

def test_tables(treasure):
    tables = outcome_tables(treasure)
    assert {out.status for out, _ in tables['p']} == {True, False}
    ts = {out for out, _ in tables['TS']}
    assert {(o.status, o.values) for o in ts if o.status} == {(True, (1100, 125))}
    ga = outcome_tables(treasure, upto='GA')
    assert 'TS' not in ga and 'GA' in ga

def test_cross_check_nok_goals(case, treasure):
    assert cross_check(treasure, goal='root_nok', workers=1)
    assert cross_check(treasure, goal='GA_nok', workers=1)
    assert cross_check(case('forestall'), goal='PRS_nok', workers=1)

@pytest.mark.parametrize('seed', range(60))
def test_cross_check_random_nok(seed):
    model = random_model(seed)
    report = cross_check(model, seed % 3 == 0, goal='root_nok', workers=1)
    assert report.match, (report.engine_only, report.oracle_only)

@pytest.mark.parametrize('seed', range(100))
def test_tables_against_vectors(seed):
    model = random_model(seed, max_leaves=5)
    rational = seed % 2 == 1
    for goal in ('root_ok', 'root_nok'):
        want = enumerate_by_vectors(model, rational, goal).projections(('cost', 'time'))
        assert enumerate_outcomes(model, rational, goal).projections(('cost', 'time')) == want, goal

@pytest.mark.parametrize('seed', range(60))
def test_table_traces_replay(seed):
    model = random_model(seed)
    rational = seed % 2 == 0
    attrs = network_attrs(model)
    for r in enumerate_outcomes(model, rational).all():
        assert replay(model, r, rational) == (True, {a: r[a] for a in attrs}), seed
