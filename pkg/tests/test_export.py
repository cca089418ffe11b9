# -*- coding: utf-8 -*-
# pylint: disable=redefined-outer-name
import pytest

from adtmas import export
from adtmas.transform import transform

@pytest.fixture(scope='module')
def treasure(case):
    yield case('treasure')

def test_adt_dot(treasure):
    text = export.adt_dot(treasure)
    assert text.startswith('// attack-defence tree treasure\ndigraph treasure {')
    assert 'TS -> p [style=dashed]' in text and 'TF -> ST [label=1]' in text and 'TF -> GA [label=2]' in text
    assert 'shape=hexagon' in text and 'color=green' in text
    assert 'time=1h' not in text and 'time=60 min (1 h)' in text

def test_eamas_dot(treasure):
    net = transform(treasure)
    text = export.eamas_dot(net)
    assert text.count('subgraph cluster_') == 9
    assert '?b_ok' in text and '!ST_ok' in text and 't[p.time] > 2 + t_GA' in text
    assert 'shape=doublecircle' in text
    assert export.eamas_dot(transform(treasure)) == text

def test_write(tmp_path, treasure):
    path = tmp_path / 'treasure.dot'
    export.write(export.adt_dot(treasure), str(path))
    data = path.read_bytes()
    assert b'\r\n' not in data and data.decode('utf-8') == export.adt_dot(treasure)
