"""Command-line front end: ``adtmas validate|show|check|synth|export|crosscheck``."""
import argparse
import logging
import sys
import traceback

from . import dsl, export
from .__version__ import __version__
from .engine import Engine, Query, cross_check
from .model import validate
from .records import (
    AdtmasError, AdtSemanticError, AdtSyntaxError, GoalUnreachable, NonAffineParameterFlow, UsageError,
)
from .report import RunReport, Stats, jsonable, write_report
from .synth import Synthesizer
from .transform import transform
from .utils import agents_parser, file_digest, fmt_value

EX_OK = 0
EX_FAILURE = 1
EX_SYNTAX = 2
EX_UNREACHABLE = 3
EX_NONAFFINE = 4
EX_USAGE = 64
EX_NOINPUT = 66
EX_CANTCREAT = 73

class InputError(AdtmasError):
    pass

class OutputError(AdtmasError):
    pass

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError('{}\n{}'.format(message, self.format_usage().rstrip()))

def _load(path):
    try:
        return dsl.load(path)
    except OSError as e:
        raise InputError('cannot open {}: {}'.format(path, e.strerror or e))

def _model(args):
    model = _load(args.file)
    if getattr(args, 'agents', None):
        model = model.with_agents(agents_parser(args.agents, model))
        diags = validate(model)
        if diags:
            raise AdtSemanticError(diags)
    return model

def _write(path, fn, *fargs):
    try:
        fn(*fargs)
    except OSError as e:
        raise OutputError('cannot create {}: {}'.format(path, e.strerror or e))

def _engine_kwargs(args):
    kwargs = {'debug': args.debug}
    if getattr(args, 'workers', None) is not None:
        kwargs['workers'] = args.workers
    return kwargs

def _trace_text(trace):
    parts = ['{}={{{}}}'.format(k, ','.join(v)) for k, v in trace['ors'].items()]
    noks = [k for k, v in trace['leaves'].items() if v == 'nok']
    if noks:
        parts.append('nok: ' + ','.join(noks))
    return '; '.join(parts)

def cmd_validate(args):
    model = _load(args.file)
    logging.info('%s: %d nodes, root %s', args.file, len(model), model.root)
    return EX_OK

def cmd_show(args):
    model = _model(args)
    print('tree {}  root {}  time unit {}'.format(model.name, model.root, model.time_unit))
    rows = [('node', 'kind', 'polarity', 'agent', 'children', 'attributes')]
    for nid in model.order:
        n = model.node(nid)
        attrs = ' '.join('{}={}'.format(k, fmt_value(v, k, model.time_unit)) for k, v in n.attrs)
        rows.append((nid, n.kind.value, n.polarity.value, model.agents.get(nid, '-'), ','.join(n.children), attrs))
    widths = [max(len(r[k]) for r in rows) for k in range(len(rows[0]) - 1)]
    for r in rows:
        print('  '.join(c.ljust(w) for c, w in zip(r, widths)) + '  ' + r[-1])
        if r[0] != 'node' and model.node(r[0]).condition is not None:
            print('    condition {}'.format(model.node(r[0]).condition))
    if model.params:
        print('params: ' + ', '.join('{}.{}'.format(n, a) for n, a in model.params))
    return EX_OK

def cmd_check(args):
    model = _model(args)
    if args.query in ('min', 'max') and not args.attr:
        raise UsageError('--attr is required for --query {}'.format(args.query))
    q = Query(args.query, args.attr if args.query in ('min', 'max') else None, args.goal)
    net = transform(model, args.rational)
    with Engine(net, **_engine_kwargs(args)) as e:
        res = e.check(q)
    if q.kind == 'enumerate':
        records = res.value.all()
        for r in records:
            vals = ' '.join('{}={}'.format(a, fmt_value(r[a], a, model.time_unit)) for a in net.attrs)
            print('{}  {}'.format(vals, _trace_text(r['trace'])))
        result = res.value.all(as_dict=True)
    else:
        print(fmt_value(res.value, q.attr, model.time_unit))
        result = {'value': res.value, 'witness': res.witness}
    if args.json:
        query = q.as_dict()
        query.update(agents=args.agents, rational=args.rational)
        report = RunReport(command='check', model_digest=file_digest(args.file), query=query,
                           result=jsonable(result), stats=Stats(**res.stats.as_dict()))
        _write(args.json, write_report, args.json, report)
    return EX_OK

def cmd_synth(args):
    model = _model(args)
    with Synthesizer(model, goal=args.goal, rational=args.rational, debug=args.debug) as s:
        found = s.feasible() if args.mode == 'feasible' else s.blocking()
        states = s.states
    print(found.render())
    if args.json:
        query = {'mode': args.mode, 'goal': args.goal, 'rational': args.rational}
        report = RunReport(command='synth', model_digest=file_digest(args.file), query=query,
                           result=found.as_json(), stats=Stats(states=states))
        _write(args.json, write_report, args.json, report)
    return EX_OK

def cmd_export(args):
    model = _model(args)
    if args.format == 'dot-adt':
        text = export.adt_dot(model)
    else:
        text = export.eamas_dot(transform(model, args.rational))
    _write(args.output, export.write, text, args.output)
    return EX_OK

def cmd_crosscheck(args):
    model = _model(args)
    report = cross_check(model, args.rational, args.goal, **_engine_kwargs(args))
    if report.match:
        print('match')
        return EX_OK
    for p in report.engine_only:
        print('engine only: {}'.format(' '.join(str(x) for x in p)))
    for p in report.oracle_only:
        print('oracle only: {}'.format(' '.join(str(x) for x in p)))
    return EX_FAILURE

def build_parser():
    parser = _Parser(prog='adtmas', description='Attack-defence tree analysis through multi-agent model checking.')
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    parser.add_argument('-v', '--verbose', action='store_true', help='log progress')
    parser.add_argument('-d', '--debug', action='store_true', help='log debugging detail')
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True

    p = sub.add_parser('validate', help='parse and type-check a model')
    p.add_argument('file')
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser('show', help='print the nodes, agents and parameters of a model')
    p.add_argument('file')
    p.add_argument('--agents', help='agent override, agent:node,node;... or single:ALL / parallel:ALL')
    p.set_defaults(func=cmd_show)

    p = sub.add_parser('check', help='answer a reachability or min/max query')
    p.add_argument('file')
    p.add_argument('--query', choices=('feasible', 'min', 'max', 'enumerate'), default='feasible')
    p.add_argument('--attr', help='attribute for min and max, e.g. time or cost')
    p.add_argument('--goal', default='root_ok', help='goal label, root_ok or <node>_ok / <node>_nok')
    p.add_argument('--agents', help='agent override, agent:node,node;... or single:ALL / parallel:ALL')
    p.add_argument('--rational', action='store_true', help='Or nodes attempt exactly one child')
    p.add_argument('--workers', type=int, help='worker processes (env ADTMAS_WORKERS)')
    p.add_argument('--json', metavar='OUT', help='write a JSON run report')
    p.set_defaults(func=cmd_check)

    p = sub.add_parser('synth', help='synthesise the parameter constraint of a goal')
    p.add_argument('file')
    p.add_argument('--mode', choices=('feasible', 'blocking'), default='feasible')
    p.add_argument('--goal', default='root_ok')
    p.add_argument('--agents', help='agent override')
    p.add_argument('--rational', action='store_true')
    p.add_argument('--json', metavar='OUT', help='write a JSON run report')
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser('export', help='write a DOT view of the tree or of its network')
    p.add_argument('file')
    p.add_argument('--format', choices=('dot-adt', 'dot-eamas'), default='dot-adt')
    p.add_argument('-o', '--output', required=True)
    p.add_argument('--agents', help='agent override')
    p.add_argument('--rational', action='store_true')
    p.set_defaults(func=cmd_export)

    p = sub.add_parser('crosscheck', help='compare network outcomes with the bottom-up oracle')
    p.add_argument('file')
    p.add_argument('--goal', default='root_ok')
    p.add_argument('--agents', help='agent override')
    p.add_argument('--rational', action='store_true')
    p.add_argument('--workers', type=int)
    p.set_defaults(func=cmd_crosscheck)
    return parser

def _err(message):
    print('adtmas: {}'.format(message), file=sys.stderr)

def main(argv=None):
    """Run one command; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        _err(e.reason)
        return EX_USAGE
    if args.debug:
        logging.basicConfig(level=logging.DEBUG)
    elif args.verbose:
        logging.basicConfig(level=logging.INFO)
    try:
        return args.func(args)
    except UsageError as e:
        _err(e.reason)
        return EX_USAGE
    except InputError as e:
        _err(e.reason)
        return EX_NOINPUT
    except OutputError as e:
        _err(e.reason)
        return EX_CANTCREAT
    except AdtSyntaxError as e:
        for err in e.errors:
            print(str(err), file=sys.stderr)
        return EX_SYNTAX
    except AdtSemanticError as e:
        for d in e.diagnostics:
            print(d.format(args.file), file=sys.stderr)
        return EX_FAILURE
    except GoalUnreachable as e:
        _err(e.reason)
        return EX_UNREACHABLE
    except NonAffineParameterFlow as e:
        _err(e.reason)
        return EX_NONAFFINE
    except AdtmasError as e:
        _err(e.reason)
        return EX_FAILURE
    except Exception:
        logging.error(traceback.format_exc())
        return EX_FAILURE
