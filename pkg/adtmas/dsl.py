"""Textual ``.adt`` format: parser with located errors and a canonical serializer.

.. code-block:: text

    tree treasure {
      leaf b : attack [cost=500, time=1h]
      leaf p : defence [cost=100, time=10min]
      node TS = counter(TF, p) condition { init(p.time) > init(ST.time) + value(GA.time) }
      assign agents { thief1: b, TS ; police: p }
      param p.time
    }
"""
import dataclasses
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction

from pyparsing import (
    CaselessKeyword,
    DelimitedList,
    Group,
    Literal,
    OpAssoc,
    Opt,
    ParseBaseException,
    ParseException,
    Regex,
    StringEnd,
    Suppress,
    ZeroOrMore,
    col,
    infix_notation,
    lineno,
    one_of,
    python_style_comment,
)

from .model import (
    AdtModel, BinOp, Condition, Const, Diagnostic, Neg, Node, NodeKind, Polarity,
    SourceSpan, TIME, Term, fmt_number, validate,
)
from .records import AdtSemanticError, AdtSyntaxError

UNITS = OrderedDict([('min', 1), ('h', 60), ('d', 1440)])

KIND_WORDS = {
    'and': NodeKind.AND,
    'or': NodeKind.OR,
    'sand': NodeKind.SAND,
    'counter': NodeKind.COUNTER,
    'nand': NodeKind.COUNTER,
    'nocounter': NodeKind.NOCOUNTER,
    'scounter': NodeKind.SCOUNTER,
    'snand': NodeKind.SCOUNTER,
}

@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    message: str
    expected: tuple = ()

    def __str__(self):
        return '{}: {}'.format(self.span, self.message)

@dataclass(frozen=True)
class _Ref:
    name: str
    loc: int

@dataclass(frozen=True)
class _Decl:
    kind: str
    loc: int
    data: object

def _number(s, loc, toks):
    try:
        return Fraction(toks[0])
    except (ValueError, ZeroDivisionError):
        raise ParseException(s, loc, 'invalid number {}'.format(toks[0]))

def _span(s, loc, length, file=None):
    return SourceSpan(file, lineno(loc, s), col(loc, s), max(length, 1))

def _binop(toks):
    items = toks[0]
    expr = items[0]
    for i in range(1, len(items), 2):
        expr = BinOp(items[i], expr, items[i + 1])
    return expr

def _neg(toks):
    return Neg(toks[0][1])

LBRACE, RBRACE, LPAR, RPAR, LBRACK, RBRACK, COLON, SEMI, EQ, DOT = map(Suppress, '{}()[]:;=.')

TREE      = Suppress(CaselessKeyword('tree'     ))
LEAF      = Suppress(CaselessKeyword('leaf'     ))
NODE      = Suppress(CaselessKeyword('node'     ))
ASSIGN    = Suppress(CaselessKeyword('assign'   ))
AGENTS    = Suppress(CaselessKeyword('agents'   ))
PARAM     = Suppress(CaselessKeyword('param'    ))
CONDITION = Suppress(CaselessKeyword('condition'))
INIT      = CaselessKeyword('init' )
VALUE     = CaselessKeyword('value')

IDENT     = Regex(r'[A-Za-z_][A-Za-z0-9_]*')
TREE_NAME = Regex(r'[A-Za-z_][A-Za-z0-9_\-]*')
REF       = IDENT.copy().set_parse_action(lambda s, l, t: _Ref(t[0], l))
NUMBER    = Regex(r'\d+/\d+|\d+(\.\d+)?')
UNIT      = Regex(r'(min|h|d)\b')

POLARITY = (
    CaselessKeyword('attack') | CaselessKeyword('defence') | CaselessKeyword('defense')
).set_parse_action(lambda t: Polarity.ATTACK if t[0] == 'attack' else Polarity.DEFENCE)

KIND = one_of(list(KIND_WORDS), caseless=True, as_keyword=True).set_parse_action(lambda t: KIND_WORDS[t[0].lower()])

ATTR  = Group(IDENT('name') + EQ + NUMBER.copy().set_parse_action(_number)('number') + Opt(UNIT('unit')))
ATTR.set_parse_action(lambda s, l, t: _Decl('attr', l, t[0]))
ATTRS = LBRACK + Opt(DelimitedList(ATTR)) + RBRACK

TERM = ((INIT | VALUE)('fn') + LPAR + IDENT('node') + DOT + IDENT('attr') + RPAR).set_parse_action(
    lambda s, l, t: Term(t.fn.lower(), t.node, t.attr, _span(s, l, len(t.node))))
OPERAND = NUMBER.copy().set_parse_action(lambda s, l, t: Const(_number(s, l, t))) | TERM
EXPR = infix_notation(OPERAND, [
    (Literal('-'), 1, OpAssoc.RIGHT, _neg),
    (Literal('*'), 2, OpAssoc.LEFT, _binop),
    (one_of('+ -'), 2, OpAssoc.LEFT, _binop),
])
CMP = one_of('<= >= < > = ≤ ≥').set_parse_action(lambda t: {'≤': '<=', '≥': '>='}.get(t[0], t[0]))
COMPARISON = (EXPR('lhs') + CMP('op') + EXPR('rhs')).set_parse_action(
    lambda s, l, t: Condition(t.lhs, t.op, t.rhs, _span(s, l, 1)))

LEAF_DECL = (
    LEAF + REF('id') + COLON + POLARITY('polarity') + Group(Opt(ATTRS))('attrs')
).set_parse_action(lambda s, l, t: _Decl('leaf', l, t))

NODE_DECL = (
    NODE + REF('id') + EQ + KIND('kind')
    + LPAR + Group(DelimitedList(REF))('children') + RPAR
    + Group(Opt(ATTRS))('attrs')
    + Opt(CONDITION + LBRACE + COMPARISON('condition') + RBRACE)
).set_parse_action(lambda s, l, t: _Decl('node', l, t))

AGENT_GROUP = Group(IDENT('agent') + COLON + Group(DelimitedList(REF))('nodes'))
ASSIGN_DECL = (
    ASSIGN + AGENTS + LBRACE + Opt(DelimitedList(AGENT_GROUP, delim=';')) + Opt(SEMI) + RBRACE
).set_parse_action(lambda s, l, t: _Decl('assign', l, list(t)))

PARAM_DECL = (PARAM + REF('node') + DOT + IDENT('attr')).set_parse_action(lambda s, l, t: _Decl('param', l, t))

DECL = LEAF_DECL | NODE_DECL | ASSIGN_DECL | PARAM_DECL

TREE_DEF = TREE + TREE_NAME('name') + LBRACE + Group(ZeroOrMore(DECL))('decls') + RBRACE + StringEnd()
TREE_DEF.ignore(python_style_comment)

class _Builder(object):
    """Turns parsed declarations into an :py:class:`AdtModel` plus diagnostics."""
    def __init__(self, text, file):
        self.text = text
        self.file = file
        self.diags = []
        self.decls = OrderedDict()
        self.agents = {}
        self.params = []
        self.units = set()

    def span(self, loc, length=1):
        return _span(self.text, loc, length, self.file)

    def diag(self, rule, subject, message, loc=None, length=1):
        span = self.span(loc, length) if loc is not None else None
        self.diags.append(Diagnostic(rule, subject, message, span))

    def attrs(self, owner, group):
        out = {}
        for d in group:
            a = d.data
            name, value, unit = a['name'], a['number'], a.get('unit')
            if name in out:
                self.diag('DuplicateAttribute', owner, "attribute {} of '{}' given twice".format(name, owner), d.loc, len(name))
            if unit is not None:
                if name != TIME:
                    self.diag('UnitViolation', owner, "unit {} on non-time attribute {}".format(unit, name), d.loc, len(name))
                else:
                    self.units.add(unit)
                    value = value * UNITS[unit]
            out[name] = value
        return tuple(out.items())

    def add(self, decl):
        t = decl.data
        if decl.kind in ('leaf', 'node'):
            ref = t.id
            if ref.name in self.decls:
                self.diag('DuplicateNode', ref.name, "node '{}' declared twice".format(ref.name), ref.loc, len(ref.name))
                return
            self.decls[ref.name] = (decl.kind, ref, t)
        elif decl.kind == 'assign':
            for g in decl.data:
                for ref in g.nodes:
                    prev = self.agents.get(ref.name)
                    if prev is not None and prev[0] != g.agent:
                        self.diag('AgentConflict', ref.name,
                                  "node '{}' assigned to both '{}' and '{}'".format(ref.name, prev[0], g.agent),
                                  ref.loc, len(ref.name))
                    self.agents[ref.name] = (g.agent, ref)
        else:
            self.params.append((t.node, t.attr))

    def polarity(self, nid, seen=()):
        kind, _, t = self.decls[nid]
        if kind == 'leaf':
            return t.polarity
        first = t.children[0].name
        if first not in self.decls or first in seen:
            return Polarity.ATTACK
        return self.polarity(first, seen + (nid,))

    def build(self, name):
        nodes = []
        for nid, (kind, ref, t) in self.decls.items():
            span = self.span(ref.loc, len(nid))
            attrs = self.attrs(nid, t.attrs)
            if kind == 'leaf':
                nodes.append(Node(nid, NodeKind.LEAF, t.polarity, (), attrs, None, span))
                continue
            children = []
            for c in t.children:
                if c.name not in self.decls:
                    self.diag('UnknownNode', c.name, "unknown node '{}'".format(c.name), c.loc, len(c.name))
                children.append(c.name)
            cond = t.condition if 'condition' in t else None
            if cond is not None:
                cond = dataclasses.replace(cond, span=dataclasses.replace(cond.span, file=self.file))
            nodes.append(Node(nid, t.kind, self.polarity(nid), tuple(children), attrs, cond, span))

        agents = {}
        for nid, (agent, ref) in self.agents.items():
            if nid not in self.decls:
                self.diag('UnknownNode', nid, "unknown node '{}'".format(nid), ref.loc, len(nid))
                continue
            agents[nid] = agent
        for n in nodes:
            if n.id not in agents:
                agents[n.id] = 'attacker' if n.polarity is Polarity.ATTACK else 'defender'

        params = []
        for ref, attr in self.params:
            if ref.name not in self.decls:
                self.diag('UnknownParameter', ref.name, "parameter {}.{} names an unknown node".format(ref.name, attr), ref.loc, len(ref.name))
                continue
            params.append((ref.name, attr))

        unit = 'min'
        for u in UNITS:
            if u in self.units:
                unit = u
        return AdtModel(name, nodes, agents=agents, params=params, time_unit=unit)

def parse(text, file='<string>'):
    """Parse ``.adt`` source into a validated model.

    :param str text: source text, LF or CRLF line endings
    :param str file: name used in spans
    :return: the model
    :rtype: :py:class:`adtmas.model.AdtModel`
    :raises AdtSyntaxError: the text does not follow the grammar
    :raises AdtSemanticError: the tree violates a typing rule

    .. code-block:: Python
        :linenos:

        m = parse('tree T { leaf a : attack }')
        m.root  # 'a'
    """
    text = text.replace('\r\n', '\n')
    try:
        res = TREE_DEF.parse_string(text, parse_all=True)
    except ParseBaseException as e:
        expected = getattr(e, 'parser_element', None) or getattr(e, 'parserElement', None)
        raise AdtSyntaxError([ParseError(
            SourceSpan(file, e.lineno, e.col, 1),
            e.msg or 'syntax error',
            (str(expected),) if expected is not None else (),
        )])

    b = _Builder(text, file)
    for decl in res.decls:
        b.add(decl)
    model = b.build(res['name'])

    reported = {(d.rule, d.subject) for d in b.diags}
    diags = list(b.diags)
    for d in validate(model):
        if (d.rule, d.subject) in reported:
            continue
        if d.span is not None and d.span.file is None:
            d = dataclasses.replace(d, span=dataclasses.replace(d.span, file=file))
        diags.append(d)
    if diags:
        raise AdtSemanticError(sorted(diags, key=lambda d: (d.rule, d.subject, d.message)))
    return model

def load(path):
    """Read and parse a ``.adt`` file."""
    with open(path, 'r', encoding='utf-8', newline='') as f:
        text = f.read()
    return parse(text, file=str(path))

def _fmt_attrs(node, unit):
    items = []
    for k, v in node.attrs:
        if k == TIME and unit != 'min' and (v / UNITS[unit]).denominator == 1:
            items.append('{}={}{}'.format(k, fmt_number(v / UNITS[unit]), unit))
        else:
            items.append('{}={}'.format(k, fmt_number(v)))
    return ' [{}]'.format(', '.join(items)) if items else ''

def serialize(model):
    """Canonical text of a model: nodes children-first, attributes sorted, LF endings.

    :param model: :py:class:`adtmas.model.AdtModel`
    :rtype: str
    """
    unit = model.time_unit
    lines = ['tree {} {{'.format(model.name)]
    for nid in model.order:
        n = model.node(nid)
        attrs = _fmt_attrs(n, unit)
        if n.kind is NodeKind.LEAF:
            lines.append('  leaf {} : {}{}'.format(nid, n.polarity.value, attrs))
            continue
        line = '  node {} = {}({}){}'.format(nid, n.kind.value, ', '.join(n.children), attrs)
        if n.condition is not None:
            line += ' condition {{ {} }}'.format(n.condition)
        lines.append(line)
    if model.agents:
        groups = OrderedDict()
        for nid in model.order:
            if nid in model.agents:
                groups.setdefault(model.agents[nid], []).append(nid)
        body = ' ; '.join('{}: {}'.format(a, ', '.join(groups[a])) for a in sorted(groups))
        lines.append('  assign agents {{ {} }}'.format(body))
    for nid, attr in model.params:
        lines.append('  param {}.{}'.format(nid, attr))
    lines.append('}')
    return '\n'.join(lines) + '\n'
