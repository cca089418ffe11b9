class OutcomeRecord(object):
    """One successful outcome: the verdict, the goal attribute values and the
    choice trace that produced them.

    Fields read by name, by position or as attributes::

        r['time'], r[1], r.time
    """
    __slots__ = ('_fields',)

    def __init__(self, values, trace=None, verdict=True):
        self._fields = {'verdict': verdict}
        self._fields.update(values)
        self._fields['trace'] = trace

    def keys(self):
        return list(self._fields)

    def values(self):
        return list(self._fields.values())

    def __repr__(self):
        shown = ' '.join('{}={}'.format(k, v) for k, v in self._fields.items() if k != 'trace')
        return '<OutcomeRecord {}>'.format(shown)

    def __eq__(self, other):
        return isinstance(other, OutcomeRecord) and self._fields == other._fields

    def __hash__(self):
        return hash(self.projection(k for k in self._fields if k not in ('verdict', 'trace')))

    def __getitem__(self, key):
        if isinstance(key, int):
            return self.values()[key]
        try:
            return self._fields[key]
        except KeyError:
            raise KeyError("outcome has no '{}' field".format(key)) from None

    def __getattr__(self, key):
        if key.startswith('_'):
            raise AttributeError(key)
        try:
            return self[key]
        except KeyError as e:
            raise AttributeError(e) from None

    def __dir__(self):
        return sorted(set(dir(type(self))) | {str(k) for k in self._fields})

    def get(self, key, default=None):
        return self._fields.get(key, default)

    def as_dict(self):
        return dict(self._fields)

    def projection(self, attrs):
        """``(verdict, attr values...)``, the key outcomes are compared on.
        Attributes the record lacks count as 0."""
        return (self._fields['verdict'],) + tuple(self._fields.get(a, 0) for a in attrs)

class OutcomeCollection(object):
    """Outcome records drawn lazily from an iterator and cached once drawn.

    The source may yield :py:class:`OutcomeRecord` objects or plain dicts
    holding ``verdict``, the attribute values and ``trace``.
    """
    def __init__(self, rows):
        self._rows = iter(rows)
        self._seen = []
        self.pending = True

    def _draw(self):
        row = next(self._rows)
        if isinstance(row, dict):
            row = dict(row)
            row = OutcomeRecord(row, row.pop('trace', None), row.pop('verdict', True))
        self._seen.append(row)
        return row

    def _fill(self, upto=None):
        while self.pending and (upto is None or len(self._seen) < upto):
            try:
                self._draw()
            except StopIteration:
                self.pending = False

    def __iter__(self):
        i = 0
        while True:
            # another iterator may have drawn rows in between
            if i >= len(self._seen):
                self._fill(i + 1)
                if i >= len(self._seen):
                    return
            yield self._seen[i]
            i += 1

    def __getitem__(self, key):
        if isinstance(key, slice):
            if key.stop is None or key.stop < 0 or (key.start or 0) < 0:
                self._fill()
            else:
                self._fill(key.stop)
            return OutcomeCollection(self._seen[key])
        self._fill(None if key < 0 else key + 1)
        return self._seen[key]

    def __len__(self):
        return len(self._seen)

    def all(self, as_dict=False):
        """Every outcome, drawing the rest of the source if needed."""
        self._fill()
        if as_dict:
            return [r.as_dict() for r in self._seen]
        return list(self._seen)

    def projections(self, attrs):
        """Set of ``(verdict, attr values...)`` tuples over all outcomes."""
        return {r.projection(attrs) for r in self.all()}

    def __repr__(self):
        return '<OutcomeCollection size={} pending={}>'.format(len(self), self.pending)

class AdtmasError(Exception):
    def __init__(self, reason):
        super(AdtmasError, self).__init__(reason)
        self.reason = reason

class AdtSyntaxError(AdtmasError):
    """The input text is not a well-formed tree; ``errors`` holds ParseErrors."""
    def __init__(self, errors):
        self.errors = list(errors)
        super(AdtSyntaxError, self).__init__('; '.join(str(e) for e in self.errors))

class AdtSemanticError(AdtmasError):
    """The tree parsed but violates typing rules; ``diagnostics`` holds them."""
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super(AdtSemanticError, self).__init__('; '.join(d.message for d in self.diagnostics))

class MissingLeafOutcome(AdtmasError):
    def __init__(self, node):
        self.node = node
        super(MissingLeafOutcome, self).__init__("no outcome given for leaf '{}'".format(node))

class UnknownLabel(AdtmasError):
    def __init__(self, label):
        self.label = label
        super(UnknownLabel, self).__init__("unknown goal label '{}'".format(label))

class GoalUnreachable(AdtmasError):
    def __init__(self, query):
        self.query = query
        super(GoalUnreachable, self).__init__('goal unreachable for {}'.format(query))

class NonAffineParameterFlow(AdtmasError):
    def __init__(self, detail):
        self.detail = detail
        super(NonAffineParameterFlow, self).__init__('non-affine parameter flow: {}'.format(detail))

class StateSpaceExceeded(AdtmasError):
    def __init__(self, limit):
        self.limit = limit
        super(StateSpaceExceeded, self).__init__('more than {} states visited'.format(limit))

class UsageError(AdtmasError):
    pass
