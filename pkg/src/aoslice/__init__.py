"""Dynamic slicing for MiniAJ, a small aspect-oriented Java subset.

Typical use::

    unit = parse_source(text)
    graph = build_aosg(unit)
    state = initialize(graph)
    run(unit, graph, ["7"], listener=state.on_event)
    state.lookup(SlicingCriterion(16, "n")).stmts
"""

from aoslice.aosg import Aosg, build_aosg
from aoslice.interp import Execution, run
from aoslice.lang import parse_file, parse_source
from aoslice.slicer import Slice, SliceState, SlicingCriterion, initialize, lookup_slice

__all__ = [
    "Aosg", "Execution", "Slice", "SliceState", "SlicingCriterion", "build_aosg",
    "initialize", "lookup_slice", "parse_file", "parse_source", "run",
]
