"""JSON run reports written by the CLI ``--json`` option."""
from fractions import Fraction
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from .__version__ import __version__
from .model import fmt_number

SCHEMA = 'adtmas/1'

class Stats(BaseModel):
    states: int = Field(0, ge=0)
    transitions: int = Field(0, ge=0)
    wall_time: float = Field(0.0, ge=0)
    peak_frontier: int = Field(0, ge=0)

class RunReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True, protected_namespaces=())

    schema_version: str = Field(SCHEMA, alias='schema')
    command: str
    model_digest: str
    query: dict = Field(default_factory=dict)
    result: Any = None
    stats: Stats = Field(default_factory=Stats)
    version: str = __version__

    def to_json(self):
        return self.model_dump_json(by_alias=True, indent=2)

def jsonable(value):
    """Exact numbers as ``"n"`` or ``"n/d"`` strings, containers converted recursively."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, (int, Fraction)):
        return fmt_number(value)
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = [jsonable(v) for v in value]
        return sorted(items, key=str) if isinstance(value, (set, frozenset)) else items
    return str(value)

def write_report(path, report):
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(report.to_json())
        f.write('\n')

def read_report(path):
    with open(path, 'r', encoding='utf-8') as f:
        return RunReport.model_validate_json(f.read())
