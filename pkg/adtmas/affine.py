"""Affine expressions over parameters and exact satisfiability by Fourier-Motzkin
elimination, plus the disjunctive constraint sets synthesis returns."""
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .model import fmt_number
from .records import NonAffineParameterFlow

class AffineExpr(object):
    """``const + sum(coeff * param)`` with exact coefficients.

    Arithmetic that cancels every parameter returns a plain :py:class:`Fraction`,
    so a symbolic value is always an ``AffineExpr`` with at least one parameter.
    """
    __slots__ = ('const', 'coeffs')

    def __init__(self, const=0, coeffs=()):
        self.const = Fraction(const)
        items = dict(coeffs)
        self.coeffs = tuple(sorted((p, Fraction(c)) for p, c in items.items() if c != 0))

    @staticmethod
    def make(const, coeffs):
        e = AffineExpr(const, coeffs)
        return e.const if not e.coeffs else e

    @classmethod
    def var(cls, name):
        return cls(0, ((name, 1),))

    @property
    def params(self):
        return tuple(p for p, _ in self.coeffs)

    def coeff(self, name):
        return dict(self.coeffs).get(name, Fraction(0))

    def evaluate(self, point):
        return self.const + sum((c * Fraction(point[p]) for p, c in self.coeffs), Fraction(0))

    def __add__(self, other):
        if isinstance(other, AffineExpr):
            coeffs = dict(self.coeffs)
            for p, c in other.coeffs:
                coeffs[p] = coeffs.get(p, 0) + c
            return AffineExpr.make(self.const + other.const, coeffs)
        if isinstance(other, (int, Fraction)):
            return AffineExpr.make(self.const + other, self.coeffs)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return AffineExpr.make(-self.const, [(p, -c) for p, c in self.coeffs])

    def __sub__(self, other):
        if isinstance(other, (AffineExpr, int, Fraction)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, AffineExpr):
            raise NonAffineParameterFlow('{} * {}'.format(self, other))
        if isinstance(other, (int, Fraction)):
            return AffineExpr.make(self.const * other, [(p, c * other) for p, c in self.coeffs])
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, AffineExpr):
            return self.const == other.const and self.coeffs == other.coeffs
        return False

    def __hash__(self):
        return hash((self.const, self.coeffs))

    def __getstate__(self):
        return (self.const, self.coeffs)

    def __setstate__(self, state):
        self.const, self.coeffs = state

    def __str__(self):
        parts = []
        for p, c in self.coeffs:
            mag = abs(c)
            txt = p if mag == 1 else '{} {}'.format(fmt_number(mag), p)
            parts.append(('-' if c < 0 else '+', txt))
        if self.const != 0 or not parts:
            parts.append(('-' if self.const < 0 else '+', fmt_number(abs(self.const))))
        sign, txt = parts[0]
        out = ('-' if sign == '-' else '') + txt
        for sign, txt in parts[1:]:
            out += ' {} {}'.format(sign, txt)
        return out

    def __repr__(self):
        return '<AffineExpr {}>'.format(self)

def as_affine(v):
    return v if isinstance(v, AffineExpr) else AffineExpr(v)

@dataclass(frozen=True)
class Constraint:
    """``expr op 0`` with ``op`` normalised to one of ``<``, ``<=``, ``=``."""
    expr: AffineExpr
    op: str

    @classmethod
    def make(cls, expr, op):
        expr = as_affine(expr)
        if op == '>':
            return cls(as_affine(-expr), '<')
        if op == '>=':
            return cls(as_affine(-expr), '<=')
        if op not in ('<', '<=', '='):
            raise ValueError('unknown comparison {}'.format(op))
        return cls(expr, op)

    @classmethod
    def compare(cls, lhs, op, rhs):
        return cls.make(as_affine(lhs) - as_affine(rhs), op)

    def negate(self):
        """Constraints whose disjunction is the negation of this one."""
        if self.op == '<':
            return (Constraint.make(self.expr, '>='),)
        if self.op == '<=':
            return (Constraint.make(self.expr, '>'),)
        return (Constraint.make(self.expr, '<'), Constraint.make(self.expr, '>'))

    @property
    def params(self):
        return self.expr.params

    def holds(self, point):
        v = self.expr.evaluate(point)
        if self.op == '<':
            return v < 0
        if self.op == '<=':
            return v <= 0
        return v == 0

    def __str__(self):
        # print as "params op const", flipping so the first coefficient is positive
        coeffs, const, op = self.expr.coeffs, self.expr.const, self.op
        if coeffs and coeffs[0][1] < 0:
            coeffs = tuple((p, -c) for p, c in coeffs)
            const = -const
            op = {'<': '>', '<=': '>=', '=': '='}[op]
        lhs = AffineExpr(0, coeffs)
        return '{} {} {}'.format(lhs, op, fmt_number(-const))

# Fourier-Motzkin works on rows (coeffs dict, const, strict) meaning
# sum(coeffs) + const < 0 when strict, <= 0 otherwise.

def _rows(constraints):
    rows = []
    for c in constraints:
        coeffs = dict(c.expr.coeffs)
        if c.op == '=':
            rows.append((coeffs, c.expr.const, False))
            rows.append(({p: -v for p, v in coeffs.items()}, -c.expr.const, False))
        else:
            rows.append((coeffs, c.expr.const, c.op == '<'))
    return rows

def _normalize(row):
    coeffs, const, strict = row
    scale = max((abs(v) for v in coeffs.values()), default=Fraction(1)) or Fraction(1)
    key = (tuple(sorted((p, v / scale) for p, v in coeffs.items() if v != 0)), const / scale, strict)
    return key

def _eliminate(rows, var):
    pos, neg, rest = [], [], []
    for r in rows:
        a = r[0].get(var, 0)
        if a > 0:
            pos.append(r)
        elif a < 0:
            neg.append(r)
        else:
            rest.append(r)
    for (pc, pk, ps), (nc, nk, ns) in product(pos, neg):
        ap, an = pc[var], -nc[var]
        coeffs = {}
        for p in set(pc) | set(nc):
            if p == var:
                continue
            v = an * pc.get(p, 0) + ap * nc.get(p, 0)
            if v != 0:
                coeffs[p] = v
        rest.append((coeffs, an * pk + ap * nk, ps or ns))
    seen, out = set(), []
    for r in rest:
        key = _normalize(r)
        if key not in seen:
            seen.add(key)
            out.append(({p: v for p, v in key[0]}, key[1], key[2]))
    return out

def _trivially_false(row):
    coeffs, const, strict = row
    if coeffs:
        return False
    return const >= 0 if strict else const > 0

def project(constraints, keep=()):
    """Eliminate every parameter not in ``keep``; returns the remaining rows as constraints."""
    rows = _rows(constraints)
    params = sorted({p for r in rows for p in r[0]} - set(keep))
    for p in params:
        rows = _eliminate(rows, p)
        if any(_trivially_false(r) for r in rows):
            return [Constraint(AffineExpr(1), '<=')]
    out = []
    for coeffs, const, strict in rows:
        if not coeffs:
            if _trivially_false((coeffs, const, strict)):
                return [Constraint(AffineExpr(1), '<=')]
            continue
        out.append(Constraint(AffineExpr(const, coeffs), '<' if strict else '<='))
    return out

def is_satisfiable(constraints):
    """Exact satisfiability of a conjunction over the rationals.

    :param constraints: iterable of :py:class:`Constraint`
    :rtype: bool

    .. code-block:: Python
        :linenos:

        x = AffineExpr.var('x')
        is_satisfiable([Constraint.make(x - 5, '>'), Constraint.make(x - 3, '<=')])  # False
    """
    rows = _rows(constraints)
    if any(_trivially_false(r) for r in rows):
        return False
    for p in sorted({p for r in rows for p in r[0]}):
        rows = _eliminate(rows, p)
        if any(_trivially_false(r) for r in rows):
            return False
    return not any(_trivially_false(r) for r in rows)

def domain(params):
    """Parameters range over the non-negative rationals."""
    return frozenset(Constraint.make(AffineExpr.var(p), '>=') for p in params)

@dataclass(frozen=True)
class Interval:
    lo: Fraction
    lo_closed: bool
    hi: Fraction = None
    hi_closed: bool = False

    def render(self, name):
        if self.hi is not None and self.lo == self.hi:
            return '{} = {}'.format(name, fmt_number(self.lo))
        if self.hi is None:
            if self.lo == 0 and self.lo_closed:
                return 'true'
            return '{} {} {}'.format(name, '>=' if self.lo_closed else '>', fmt_number(self.lo))
        return '{} {} {} {} {}'.format(
            fmt_number(self.lo), '<=' if self.lo_closed else '<', name,
            '<=' if self.hi_closed else '<', fmt_number(self.hi))

    def contains(self, x):
        if x < self.lo or (x == self.lo and not self.lo_closed):
            return False
        if self.hi is None:
            return True
        return x < self.hi or (x == self.hi and self.hi_closed)

    def constraints(self, name):
        x = AffineExpr.var(name)
        out = [Constraint.make(x - self.lo, '>=' if self.lo_closed else '>')]
        if self.hi is not None:
            out.append(Constraint.make(x - self.hi, '<=' if self.hi_closed else '<'))
        return frozenset(out)

def _interval(conj, name):
    lo, lo_closed, hi, hi_closed = Fraction(0), True, None, False
    for c in conj:
        a, k = c.expr.coeff(name), c.expr.const
        if a == 0:
            continue
        bound = -k / a
        if c.op == '=':
            lows, highs = [(bound, True)], [(bound, True)]
        elif a > 0:
            lows, highs = [], [(bound, c.op == '<=')]
        else:
            lows, highs = [(bound, c.op == '<=')], []
        for b, closed in lows:
            if b > lo or (b == lo and not closed):
                lo, lo_closed = b, closed
        for b, closed in highs:
            if hi is None or b < hi or (b == hi and not closed):
                hi, hi_closed = b, closed
    if hi is not None and (hi < lo or (hi == lo and not (lo_closed and hi_closed))):
        return None
    return Interval(lo, lo_closed, hi, hi_closed)

def _merge(intervals):
    intervals = sorted(intervals, key=lambda i: (i.lo, not i.lo_closed))
    out = []
    for cur in intervals:
        if out:
            last = out[-1]
            touches = last.hi is None or cur.lo < last.hi or (
                cur.lo == last.hi and (last.hi_closed or cur.lo_closed))
            if touches:
                if last.hi is None or cur.hi is None:
                    hi, hi_closed = None, False
                elif cur.hi > last.hi or (cur.hi == last.hi and cur.hi_closed):
                    hi, hi_closed = cur.hi, cur.hi_closed
                else:
                    hi, hi_closed = last.hi, last.hi_closed
                out[-1] = Interval(last.lo, last.lo_closed, hi, hi_closed)
                continue
        out.append(cur)
    return out

class ConstraintSet(object):
    """A disjunction of satisfiable conjunctions over the non-negative parameter domain.

    :param params: parameter names, e.g. ``('p.time',)``
    :param disjuncts: iterable of iterables of :py:class:`Constraint`
    """
    def __init__(self, params, disjuncts=()):
        self.params = tuple(sorted(params))
        dom = domain(self.params)
        conjs = []
        for d in disjuncts:
            conj = frozenset(d) | dom
            if is_satisfiable(conj) and conj not in conjs:
                conjs.append(conj)
        self.disjuncts = tuple(conjs)
        if len(self.params) == 1:
            self._canonicalize()

    def _canonicalize(self):
        name = self.params[0]
        intervals = [i for i in (_interval(c, name) for c in self.disjuncts) if i is not None]
        self.intervals = _merge(intervals)
        self.disjuncts = tuple(i.constraints(name) for i in self.intervals)

    @classmethod
    def true(cls, params):
        return cls(params, [()])

    @classmethod
    def false(cls, params):
        return cls(params, [])

    @property
    def is_empty(self):
        return not self.disjuncts

    @property
    def is_universal(self):
        return self.complement().is_empty

    def contains(self, point):
        point = {p: Fraction(v) for p, v in point.items()}
        return any(all(c.holds(point) for c in conj) for conj in self.disjuncts)

    def _subtract_from(self, conj):
        """Satisfiable conjunctions covering ``conj`` minus this set."""
        todo = [frozenset(conj)]
        for d in self.disjuncts:
            nxt = []
            for base in todo:
                for atom in d:
                    for neg in atom.negate():
                        c = base | {neg}
                        if is_satisfiable(c):
                            nxt.append(c)
            todo = nxt
            if not todo:
                break
        return todo

    def covers(self, conj):
        """True when every point of ``conj`` (within the domain) is in this set."""
        return not self._subtract_from(frozenset(conj) | domain(self.params))

    def union(self, other):
        return ConstraintSet(self.params, self.disjuncts + other.disjuncts)

    def complement(self):
        """Complement within the non-negative domain."""
        return ConstraintSet(self.params, self._subtract_from(domain(self.params)))

    def render(self):
        """Canonical text: ``true``, ``false``, intervals for one parameter, otherwise
        parenthesised conjunctions joined by ``or``."""
        if self.is_empty:
            return 'false'
        if len(self.params) == 1:
            return ' or '.join(i.render(self.params[0]) for i in self.intervals)
        if self.is_universal:
            return 'true'
        dom = domain(self.params)
        parts = []
        for conj in self.disjuncts:
            atoms = sorted(str(c) for c in conj if c not in dom)
            parts.append('(' + ' and '.join(atoms) + ')' if atoms else 'true')
        return ' or '.join(sorted(parts))

    def as_json(self):
        dom = domain(self.params)
        return {
            'params': list(self.params),
            'text': self.render(),
            'disjuncts': [sorted(str(c) for c in conj if c not in dom) for conj in self.disjuncts],
        }

    def __eq__(self, other):
        if not isinstance(other, ConstraintSet):
            return NotImplemented
        return self.params == other.params and set(self.disjuncts) == set(other.disjuncts)

    __hash__ = None

    def __str__(self):
        return self.render()

    def __repr__(self):
        return '<ConstraintSet {}>'.format(self.render())
