import hashlib
from fractions import Fraction

from .dsl import UNITS
from .model import Polarity, TIME, fmt_number
from .records import UsageError

def agents_parser(text, model):
    """Agent assignment from ``agent:node,node;agent:node`` merged over the model's own.

    ``single:ALL`` puts every attack node under ``attacker`` and every defence
    node under ``defender``; ``parallel:ALL`` gives every node its own agent.

    :param str text: assignment override
    :param model: :py:class:`adtmas.model.AdtModel`
    :return: node id -> agent name
    :rtype: dict
    """
    text = text.strip()
    if text == 'single:ALL':
        return {nid: 'attacker' if n.polarity is Polarity.ATTACK else 'defender' for nid, n in model.nodes.items()}
    if text == 'parallel:ALL':
        return {nid: nid for nid in model.nodes}
    agents = dict(model.agents)
    for group in text.split(';'):
        group = group.strip()
        if not group:
            continue
        agent, sep, nodes = group.partition(':')
        agent = agent.strip()
        if not sep or not agent:
            raise UsageError('bad agent group {!r}, expected agent:node,node'.format(group))
        for nid in (n.strip() for n in nodes.split(',')):
            if not nid:
                continue
            if nid not in model:
                raise UsageError("agent override names unknown node '{}'".format(nid))
            agents[nid] = agent
    return agents

def fmt_time(value, unit='min'):
    """``61920 min (43 d)``: minutes, plus the display unit when it divides exactly."""
    q = Fraction(value)
    text = '{} min'.format(fmt_number(q))
    per = UNITS.get(unit, 1)
    if per > 1 and q % per == 0:
        text += ' ({} {})'.format(fmt_number(q / per), unit)
    return text

def fmt_value(value, attr, unit='min'):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if attr == TIME:
        return fmt_time(value, unit)
    return fmt_number(value)

def file_digest(path):
    h = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(65536), b''):
            h.update(chunk)
    return 'sha256:' + h.hexdigest()
