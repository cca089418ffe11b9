# -*- coding: utf-8 -*-
"""Seeded random trees for property tests: small DAGs over both polarities,
with shared subtrees, agent overlaps and occasional countering conditions."""
import functools
import random
from itertools import product

import networkx as nx

from adtmas.model import AdtModel, Condition, Node, NodeKind, Polarity, Term, validate

GATES = (NodeKind.AND, NodeKind.OR, NodeKind.SAND)
COUNTERS = (NodeKind.COUNTER, NodeKind.NOCOUNTER, NodeKind.SCOUNTER)
ATTACKERS = ('a1', 'a2', 'a3')
MAX_CHOICES = 4096

class _Draft(object):
    def __init__(self, rng):
        self.rng = rng
        self.graph = nx.DiGraph()
        self.nodes = {}
        self.agents = {}

    def attrs(self):
        return (('cost', self.rng.randint(0, 5)), ('time', self.rng.randint(0, 5)))

    def add(self, kind, polarity, children=(), condition=None):
        nid = '{}{}'.format('d' if polarity is Polarity.DEFENCE else 'a', len(self.nodes))
        if kind is not NodeKind.LEAF:
            nid = 'G{}'.format(len(self.nodes))
        self.nodes[nid] = Node(nid, kind, polarity, tuple(children), self.attrs(), condition)
        self.graph.add_node(nid)
        for c in children:
            self.graph.add_edge(nid, c)
        self.agents[nid] = self.rng.choice(ATTACKERS) if polarity is Polarity.ATTACK else 'd1'
        return nid

    def pool(self, polarity, free=True):
        return [n for n, node in self.nodes.items()
                if node.polarity is polarity and (not free or self.graph.in_degree(n) == 0)]

    def pick(self, polarity, share):
        # free nodes first; with probability ``share`` any node, making a DAG
        cands = self.pool(polarity, free=self.rng.random() >= share) or self.pool(polarity, free=False)
        return self.rng.choice(cands)

    def gate(self, polarity, share, width):
        free = self.pool(polarity)
        anyn = self.pool(polarity, free=False)
        cands = anyn if self.rng.random() < share else (free or anyn)
        k = self.rng.randint(1, min(width, len(cands)))
        return self.add(self.rng.choice(GATES), polarity, self.rng.sample(cands, k))

    def counter(self, own, opp, conditions):
        cond = None
        if self.rng.random() < conditions:
            op = self.rng.choice(('>', '>=', '<'))
            cond = Condition(Term('init', opp, 'time'), op, Term('value', own, 'time'))
        return self.add(self.rng.choice(COUNTERS), Polarity.ATTACK, (own, opp), cond)

def _choices(model):
    total = 2 ** len(model.leaves)
    for nid in model.nodes:
        n = model.node(nid)
        if n.kind is NodeKind.OR:
            total *= 2 ** len(n.children) - 1
    return total

def _draft(rng, max_leaves, share, conditions):
    d = _Draft(rng)
    n_att = rng.randint(1, max_leaves - 1)
    n_def = rng.randint(0, min(2, max_leaves - n_att))
    for _ in range(n_att):
        d.add(NodeKind.LEAF, Polarity.ATTACK)
    for _ in range(n_def):
        d.add(NodeKind.LEAF, Polarity.DEFENCE)

    for _ in range(rng.randint(0, 3)):
        defence = d.pool(Polarity.DEFENCE, free=False)
        r = rng.random()
        if defence and r < 0.35:
            d.counter(d.pick(Polarity.ATTACK, share), d.pick(Polarity.DEFENCE, share), conditions)
        elif len(defence) > 1 and r < 0.45:
            d.gate(Polarity.DEFENCE, share, 2)
        else:
            d.gate(Polarity.ATTACK, share, 3)

    for opp in d.pool(Polarity.DEFENCE):
        d.counter(rng.choice(d.pool(Polarity.ATTACK)), opp, conditions)
    tops = d.pool(Polarity.ATTACK)
    if len(tops) > 1:
        rng.shuffle(tops)
        d.add(rng.choice(GATES), Polarity.ATTACK, tops)
    return AdtModel('rand{}'.format(rng.randint(0, 10 ** 6)), d.nodes.values(), agents=d.agents)

def random_model(seed, max_leaves=6, share=0.25, conditions=0.3):
    """A valid model with at most ``max_leaves`` leaves and a bounded number of
    choice vectors, reproducible from ``seed``."""
    rng = random.Random(seed)
    while True:
        model = _draft(rng, max_leaves, share, conditions)
        if not validate(model) and _choices(model) <= MAX_CHOICES:
            return model

def _compositions(n, parts=2):
    """Ordered splits of ``n`` into at least ``parts`` positive parts."""
    if n == 0:
        yield ()
        return
    for k in range(1, n + 1):
        for rest in _compositions(n - k, max(parts - 1, 0)):
            if len(rest) + 1 >= parts:
                yield (k,) + rest

@functools.lru_cache(maxsize=None)
def shapes(n, polarity=Polarity.ATTACK):
    """Every tree with ``n`` leaves rooted at ``polarity`` as nested
    ``(kind, polarity, children)`` tuples; gates take two or more children."""
    if n == 1:
        return ((NodeKind.LEAF, polarity, ()),)
    out = []
    for split in _compositions(n):
        for kids in product(*(shapes(k, polarity) for k in split)):
            out.extend((kind, polarity, kids) for kind in GATES)
    for k in range(1, n):
        for own, opp in product(shapes(k, polarity), shapes(n - k, polarity.opposite)):
            out.extend((kind, polarity, (own, opp)) for kind in COUNTERS)
    return tuple(out)

def shape_model(shape, name='shape'):
    """Model of a nested shape; attack nodes go to ``a1``, defence nodes to ``d1``."""
    nodes, agents = [], {}

    def build(sh):
        kind, polarity, kids = sh
        ids = [build(k) for k in kids]
        prefix = 'G' if kind is not NodeKind.LEAF else ('d' if polarity is Polarity.DEFENCE else 'a')
        nid = '{}{}'.format(prefix, len(nodes))
        nodes.append(Node(nid, kind, polarity, tuple(ids), (('cost', 1), ('time', 1))))
        agents[nid] = 'd1' if polarity is Polarity.DEFENCE else 'a1'
        return nid

    build(shape)
    return AdtModel(name, nodes, agents=agents)

def unshared(model):
    """Tree copy of ``model`` in which a node reached through k paths appears k
    times, conditions dropped.

    :return: ``(tree, copy id -> original id)``
    """
    nodes, origin, count = [], {}, {}

    def copy(nid):
        k = count.get(nid, 0)
        count[nid] = k + 1
        cid = nid if k == 0 else '{}_{}'.format(nid, k)
        n = model.node(nid)
        kids = tuple(copy(c) for c in n.children)
        nodes.append(Node(cid, n.kind, n.polarity, kids, n.attrs))
        origin[cid] = nid
        return cid

    copy(model.root)
    agents = {cid: model.agents.get(nid) for cid, nid in origin.items()}
    return AdtModel(model.name + '-tree', nodes, agents=agents), origin
