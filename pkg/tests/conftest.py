import os

import pytest

DATA_DIR = os.path.join(os.path.abspath(os.path.dirname(__file__)), '..', 'data')

@pytest.fixture(scope='session')
def case():
    """Loader for the bundled case studies, ``case('treasure')``."""
    from adtmas import dsl
    cache = {}
    def load(name):
        if name not in cache:
            cache[name] = dsl.load(os.path.join(DATA_DIR, name + '.adt'))
        return cache[name]
    return load
