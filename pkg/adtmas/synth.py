"""Parameter synthesis: the exact parameter valuations under which a goal is reachable."""
import logging
import operator
import time

from .affine import AffineExpr, Constraint, ConstraintSet, domain, is_satisfiable
from .explorer import Explorer, Scheduler
from .records import StateSpaceExceeded, UnknownLabel, UsageError
from .transform import transform

_CMP = {'<': operator.lt, '<=': operator.le, '=': operator.eq, '>=': operator.ge, '>': operator.gt}

def param_name(node, attr):
    return '{}.{}'.format(node, attr)

class SymbolicInterp(object):
    """Declared parameters evaluate to :py:class:`adtmas.affine.AffineExpr` variables;
    comparisons over them split into constrained branches."""
    symbolic = True

    def __init__(self, model):
        self.model = model

    def intrinsic(self, node, attr):
        if self.model.is_param(node, attr):
            return AffineExpr.var(param_name(node, attr))
        return self.model.intrinsic(node, attr)

    def maximum(self, values):
        if not any(isinstance(v, AffineExpr) for v in values):
            return [((), max(values))]
        distinct = []
        for v in values:
            if v not in distinct:
                distinct.append(v)
        out = []
        for i, vi in enumerate(distinct):
            assum = []
            possible = True
            for j, vj in enumerate(distinct):
                if i == j:
                    continue
                # earlier candidates win ties
                op = '>' if j < i else '>='
                diff = vi - vj
                if isinstance(diff, AffineExpr):
                    assum.append(Constraint.make(diff, op))
                elif not _CMP[op](diff, 0):
                    possible = False
                    break
            if possible:
                out.append((tuple(assum), vi))
        return out

    def decide(self, diff, op):
        if not isinstance(diff, AffineExpr):
            return [((), _CMP[op](diff, 0))]
        atom = Constraint.make(diff, op)
        return [((atom,), True)] + [((neg,), False) for neg in atom.negate()]

class Synthesizer(Explorer):
    """Explores a model's network with symbolic parameters.

    Each path carries the conjunction of the assumptions made along it; paths
    whose conjunction is unsatisfiable or already covered by the result are cut.

    :param model: :py:class:`adtmas.model.AdtModel` declaring at least one parameter
    :param kwargs: ``goal`` (``root_ok``), ``rational`` (False), ``reduce`` (True),
        ``max_states`` (10**7), ``debug``

    .. code-block:: Python
        :linenos:

        with Synthesizer(dsl.load('data/treasure.adt')) as s:
            print(s.feasible())  # p.time > 5
    """
    def __init__(self, model, **kwargs):
        if not model.params:
            raise UsageError('model {} declares no parameters; add a `param node.attr` line'.format(model.name))
        self.model = model
        self.cfg = {}
        self.cfg.update(kwargs)
        cfgdef = {
            'goal': 'root_ok',
            'rational': False,
            'reduce': True,
            'max_states': 10 ** 7,
            'debug': False,
        }
        for k, v in cfgdef.items():
            self.cfg[k] = self.cfg.get(k, v)
        self.debug = self.cfg.get('debug', False)
        self.params = tuple(param_name(n, a) for n, a in model.params)
        self.net = transform(model, self.cfg['rational'])
        goal = self.cfg['goal']
        if goal not in self.net.labels:
            raise UnknownLabel(goal)
        pinned = (self.net.models[self.net.labels[goal][0]].node,)
        self.sched = Scheduler(self.net, SymbolicInterp(model), self.cfg['reduce'], pinned)
        self._sat = {}
        self._result = None
        self.states = 0

    @property
    def info(self):
        return {
            'model': self.model.name,
            'params': list(self.params),
            'goal': self.cfg['goal'],
            'rational': self.cfg['rational'],
        }

    def satisfiable(self, conj):
        if conj not in self._sat:
            self._sat[conj] = is_satisfiable(conj | domain(self.params))
        return self._sat[conj]

    def feasible(self):
        """Parameter valuations under which the goal is reachable.

        :rtype: :py:class:`adtmas.affine.ConstraintSet`
        """
        if self._result is not None:
            return self._result
        start = time.perf_counter()
        goal = self.cfg['goal']
        limit = self.cfg['max_states']
        found = ConstraintSet.false(self.params)
        root = (self.sched.initial(), frozenset())
        stack, seen = [root], {root}
        while stack:
            s, pc = stack.pop()
            self.states += 1
            if self.states > limit:
                raise StateSpaceExceeded(limit)
            if found.disjuncts and found.covers(pc):
                continue
            if self.sched.is_goal(s, goal):
                found = found.union(ConstraintSet(self.params, [pc]))
                if self.debug:
                    logging.debug('goal under %s', ' and '.join(sorted(str(c) for c in pc)) or 'true')
                continue
            for t in self.sched.successors(s):
                nxt_pc = pc | frozenset(t.assumptions)
                if t.assumptions and not self.satisfiable(nxt_pc):
                    continue
                nxt = (t.target, nxt_pc)
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        self._result = found
        logging.info('synthesis on %s for %s: %d states, %.3fs, %s', self.model.name, goal, self.states, time.perf_counter() - start, found)
        return found

    def blocking(self):
        """Complement of :py:meth:`feasible` within the non-negative domain."""
        return self.feasible().complement()

    def close(self):
        self._sat.clear()

def synthesize_feasible(model, goal='root_ok', **kwargs):
    with Synthesizer(model, goal=goal, **kwargs) as s:
        return s.feasible()

def synthesize_blocking(model, goal='root_ok', **kwargs):
    with Synthesizer(model, goal=goal, **kwargs) as s:
        return s.blocking()
