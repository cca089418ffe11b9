"""DOT views of a model (the tree) and of its EAMAS network (one cluster per agent model)."""
from graphviz import Digraph

from .eamas import Dir
from .model import NodeKind, Polarity, TIME, fmt_number
from .transform import render_guard
from .utils import fmt_time

SHAPES = {
    NodeKind.LEAF: 'ellipse',
    NodeKind.AND: 'box',
    NodeKind.OR: 'diamond',
    NodeKind.SAND: 'box',
    NodeKind.COUNTER: 'hexagon',
    NodeKind.NOCOUNTER: 'octagon',
    NodeKind.SCOUNTER: 'doubleoctagon',
}

COLORS = {Polarity.ATTACK: 'red', Polarity.DEFENCE: 'green'}

def _node_label(model, node):
    lines = [node.id if node.kind is NodeKind.LEAF else '{} ({})'.format(node.id, node.kind.value)]
    for k, v in node.attrs:
        text = fmt_time(v, model.time_unit) if k == TIME else fmt_number(v)
        lines.append('{}={}'.format(k, text))
    for nid, attr in model.params:
        if nid == node.id:
            lines.append('param {}'.format(attr))
    if node.condition is not None:
        lines.append('[{}]'.format(node.condition))
    return '\\n'.join(lines)

def adt_dot(model):
    """DOT source of the tree: gate shapes by kind, attack red, defence green,
    dashed edges to children of the opposite polarity.

    :param model: :py:class:`adtmas.model.AdtModel`
    :rtype: str
    """
    dot = Digraph(name=model.name, comment='attack-defence tree {}'.format(model.name))
    dot.attr(rankdir='TB')
    for nid, node in model.nodes.items():
        style = 'rounded' if node.kind is NodeKind.SAND else ''
        attrs = {'shape': SHAPES[node.kind], 'color': COLORS[node.polarity]}
        if style:
            attrs['style'] = style
        dot.node(nid, _node_label(model, node), **attrs)
    for nid, node in model.nodes.items():
        for k, c in enumerate(node.children, 1):
            attrs = {}
            if node.kind is NodeKind.SAND:
                attrs['label'] = str(k)
            if c in model and model.node(c).polarity is not node.polarity:
                attrs['style'] = 'dashed'
            dot.edge(nid, c, **attrs)
    return dot.source

def _transition_label(net, t):
    parts = [str(t.message) if t.message is not None else t.action]
    if t.guard is not None:
        parts.append('[{}]'.format(render_guard(t.guard, net.model)))
    for u in t.updates:
        parts.append(str(u))
    return '\\n'.join(parts)

def eamas_dot(net):
    """DOT source of the network: one ``cluster_<node>`` per agent model, locations
    as nodes, transitions labelled with their message or action, guard and
    updates. Synchronised transitions are blue.

    :param net: :py:class:`adtmas.eamas.EamasNetwork`
    :rtype: str
    """
    dot = Digraph(name='{}_eamas'.format(net.model.name), comment='EAMAS network of {}'.format(net.model.name))
    dot.attr(rankdir='LR')
    for m in net.models:
        node = net.model.node(m.node)
        with dot.subgraph(name='cluster_{}'.format(m.node)) as c:
            c.attr(label='{} [{}]'.format(m.node, net.agents.get(m.node, '?')), color=COLORS[node.polarity])
            for k, loc in enumerate(m.locations):
                attrs = {'shape': 'circle'}
                if k == m.success:
                    attrs = {'shape': 'doublecircle'}
                elif k == m.fail:
                    attrs = {'shape': 'doublecircle', 'style': 'dashed'}
                c.node('{}_{}'.format(m.node, k), loc, **attrs)
            for t in m.transitions:
                attrs = {}
                if t.message is not None:
                    attrs['color'] = 'blue'
                    if t.message.dir is Dir.SEND:
                        attrs['fontcolor'] = 'blue'
                c.edge('{}_{}'.format(m.node, t.src), '{}_{}'.format(m.node, t.dst), _transition_label(net, t), **attrs)
    return dot.source

def write(text, path):
    """Write DOT text with LF endings."""
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)
