"""Trace-based reference slicer.

Keeps the whole execution history and answers a query by walking it
backwards. It deliberately shares nothing with :mod:`aoslice.slicer`
beyond the event type: definitions are found by scanning the trace,
control dependence is recomputed here by brute force (post-dominance by
reachability on each body's loop-free flow graph).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable

from aoslice.errors import CriterionError, NotExecuted
from aoslice.interp import Event, EventKind
from aoslice.lang import ast as A

# a parent reference is either ("occ", trace index) or ("stmt", number) for a
# statement that is depended upon without an execution to point at
Ref = tuple[str, int]


@dataclass
class TraceEntry:
    index: int
    event: Event
    parents: list[Ref] = field(default_factory=list)
    by_var: dict[str, list[Ref]] = field(default_factory=dict)

    @property
    def stmt(self) -> int | None:
        return self.event.stmt

    def touches(self, var: str) -> bool:
        return var in self.event.uses or any(n == var for n, _ in self.event.defs)


@dataclass
class Trace:
    entries: list[TraceEntry]


# --- control dependence, recomputed independently ---------------------------


def _flow_graph(body: A.Block, entry: Hashable) -> dict[Hashable, set[Hashable]]:
    """Loop-free flow graph: the end of a loop body falls through to the loop's successor."""
    succ: dict[Hashable, set[Hashable]] = {entry: set(), "EXIT": set()}

    def link(a: Hashable, b: Hashable) -> None:
        succ.setdefault(a, set()).add(b)
        succ.setdefault(b, set())

    def seq(stmts: Iterable[A.Stmt], after: Hashable) -> Hashable:
        nxt = after
        for s in reversed(list(stmts)):
            nxt = one(s, nxt)
        return nxt

    def one(s: A.Stmt, after: Hashable) -> Hashable:
        n = s.number
        if isinstance(s, A.If):
            link(n, seq(s.then.stmts, after))
            link(n, seq(s.orelse.stmts, after) if s.orelse else after)
            return n
        if isinstance(s, A.While):
            link(n, seq(s.body.stmts, after))
            link(n, after)
            return n
        if isinstance(s, A.For):
            tail: Hashable = after
            if s.step is not None:
                link(("step", n), after)
                tail = ("step", n)
            link(n, seq(s.body.stmts, tail))
            link(n, after)
            if s.init is not None:
                link(("init", n), n)
                return ("init", n)
            return n
        link(n, "EXIT" if isinstance(s, A.Return) else after)
        return n

    link(entry, seq(body.stmts, "EXIT"))
    link(entry, "EXIT")
    return succ


def _reaches_exit(succ: dict[Hashable, set[Hashable]], start: Hashable, removed: Hashable) -> bool:
    if start == removed:
        return False
    seen = {start}
    todo = [start]
    while todo:
        x = todo.pop()
        if x == "EXIT":
            return True
        for y in succ[x]:
            if y != removed and y not in seen:
                seen.add(y)
                todo.append(y)
    return False


def control_parents(body: A.Block, entry: Hashable) -> dict[int, set[Hashable]]:
    """Statement -> nodes it is control dependent on.

    ``u`` depends on ``p`` when some successor ``x`` of ``p`` is
    post-dominated by ``u`` (or is ``u``) while ``u`` does not strictly
    post-dominate ``p``.
    """
    succ = _flow_graph(body, entry)
    nodes = list(succ)

    def pdom(u: Hashable, x: Hashable) -> bool:  # u post-dominates x
        return u == x or not _reaches_exit(succ, x, u)

    out: dict[int, set[Hashable]] = {}
    for u in nodes:
        if u in ("EXIT", entry) or not isinstance(u, int):
            continue
        ps: set[Hashable] = set()
        for p in nodes:
            if p == u:
                continue
            if any(pdom(u, x) for x in succ[p]) and not pdom(u, p):
                ps.add(p[1] if isinstance(p, tuple) else p)
        ps.discard(u)
        out[u] = ps
    return out


# --- trace construction ---------------------------------------------------


class _Builder:
    def __init__(self, unit: A.SourceUnit):
        self.unit = unit
        self.entries: list[TraceEntry] = []
        self.cd: dict[int, set[Hashable]] = {}
        self.returns: dict[int | None, list[int]] = {}
        self.completion: dict[int, int] = {}
        self.after: set[int] = set()
        self.aspect_of: dict[int, int] = {}
        self.ctor_number = None
        if unit.classes:
            for m in unit.methods():
                key = m.number if m.number is not None else "MAIN"
                self.cd.update(control_parents(m.body, key))
                self.returns[m.number] = [s.number for s in A.iter_stmts(m.body) if isinstance(s, A.Return)]
        for asp in unit.aspects:
            for pc in asp.pointcuts:
                self.aspect_of[pc.number] = asp.number
            for adv in asp.advices:
                self.cd.update(control_parents(adv.body, adv.number))
                self.completion[adv.number] = adv.body.stmts[-1].number if adv.body.stmts else adv.number
                if adv.kind == A.AFTER_RETURNING:
                    self.after.add(adv.number)
        self.entry_of_frame: dict[int, TraceEntry] = {}

    # backward scans ------------------------------------------------------

    def last(self, pred, before: int | None = None) -> TraceEntry | None:
        stop = len(self.entries) if before is None else before
        for i in range(stop - 1, -1, -1):
            if pred(self.entries[i]):
                return self.entries[i]
        return None

    def definition(self, var: str, frame: int, static: bool, before: int | None = None) -> TraceEntry | None:
        def pred(t: TraceEntry) -> bool:
            ev = t.event
            if not any(n == var for n, _ in ev.defs):
                return False
            if static:
                return var in ev.statics
            return ev.frame == frame and var not in ev.statics
        return self.last(pred, before)

    def latest_stmt(self, stmt: int, frame: int) -> TraceEntry | None:
        return self.last(lambda t: t.event.kind == EventKind.STATEMENT and t.event.frame == frame
                         and t.event.stmt == stmt)

    def pending_call(self, site: int, frame: int) -> TraceEntry | None:
        """The call-phase entry of the unfinished statement at *site* in *frame*."""
        for t in reversed(self.entries):
            ev = t.event
            if ev.frame != frame or ev.vertex != site:
                continue
            if ev.kind in (EventKind.CALL, EventKind.OBJECT_CREATED):
                return t
            if ev.kind == EventKind.STATEMENT:
                return None
        return None

    def callee_returns(self, call: TraceEntry, frame: int) -> list[Ref]:
        site = call.event.vertex
        enter = self.last(lambda t: t.event.kind == EventKind.METHOD_ENTER and t.event.caller == frame
                          and t.event.call_site == site and t.index > call.index)
        if enter is None:
            return []
        out: list[Ref] = []
        for r in self.returns.get(enter.event.stmt, []):
            occ = self.latest_stmt(r, enter.event.frame)
            out.append(("occ", occ.index) if occ else ("stmt", r))
        return out

    def advice_completions(self, call: TraceEntry, frame: int, after: bool) -> list[Ref]:
        out: list[Ref] = []
        site = call.event.vertex
        for t in self.entries[call.index + 1:]:
            ev = t.event
            if ev.kind != EventKind.ADVICE_ENTER or ev.caller != frame or ev.call_site != site:
                continue
            if (ev.vertex in self.after) != after:
                continue
            done = self.completion[ev.vertex]
            occ = t if done == ev.vertex else self.latest_stmt(done, ev.frame)
            assert occ is not None
            out.append(("occ", occ.index))
        return out

    def control(self, ev: Event) -> list[Ref]:
        out: list[Ref] = []
        entry = self.entry_of_frame[ev.frame]
        for p in sorted(self.cd.get(ev.stmt, ()), key=str):
            if p == entry.event.stmt or p == "MAIN":
                out.append(("occ", entry.index))
                continue
            occ = self.latest_stmt(p, ev.frame)
            if occ is not None:
                out.append(("occ", occ.index))
        return out

    # events ---------------------------------------------------------------

    def add(self, ev: Event) -> None:
        k = ev.kind
        if k in (EventKind.METHOD_EXIT, EventKind.ADVICE_EXIT):
            return
        t = TraceEntry(len(self.entries), ev)
        if k == EventKind.ASPECT_INIT:
            pass
        elif k == EventKind.METHOD_ENTER:
            if ev.caller is not None:
                call = self.pending_call(ev.call_site, ev.caller)
                assert call is not None
                t.parents = [("occ", call.index)] + self.advice_completions(call, ev.caller, after=False)
        elif k == EventKind.POINTCUT:
            call = self.pending_call(ev.call_site, ev.frame)
            aspect = self.last(lambda x: x.event.kind == EventKind.ASPECT_INIT
                               and x.event.vertex == self.aspect_of[ev.vertex])
            assert call is not None and aspect is not None
            t.parents = [("occ", call.index), ("occ", aspect.index)]
        elif k == EventKind.ADVICE_ENTER:
            call = self.pending_call(ev.call_site, ev.caller)
            assert call is not None
            pc = self.last(lambda x: x.event.kind == EventKind.POINTCUT and x.event.frame == ev.caller
                           and x.event.call_site == ev.call_site)
            assert pc is not None
            t.parents = [("occ", pc.index)]
            if ev.vertex in self.after:
                t.parents += self.callee_returns(call, ev.caller)
        else:
            self._statement(t)
        if k in (EventKind.METHOD_ENTER, EventKind.ADVICE_ENTER):
            self.entry_of_frame[ev.frame] = t
        for name, _ in ev.defs:
            t.by_var[name] = list(t.parents)
        self.entries.append(t)

    def _statement(self, t: TraceEntry) -> None:
        ev = t.event
        control = self.control(ev)
        extra: list[Ref] = []
        call = None
        if ev.kind == EventKind.STATEMENT:
            call = self.pending_call(ev.vertex, ev.frame)
        if call is not None:
            extra = self.callee_returns(call, ev.frame) + self.advice_completions(call, ev.frame, after=True)
        every = control + extra
        for var in ev.uses:
            static = var in ev.statics
            found: list[Ref] = []
            if call is not None and var in call.event.uses:
                d = self.definition(var, ev.frame, static, before=call.index)
                if d is not None:
                    found.append(("occ", d.index))
            if call is None or var in ev.post_uses or var not in call.event.uses:
                d = self.definition(var, ev.frame, static)
                if d is not None:
                    found.append(("occ", d.index))
            t.by_var[var] = control + extra + found
            every = every + found
        t.parents = every


def build_trace(unit: A.SourceUnit, events: Iterable[Event]) -> Trace:
    b = _Builder(unit)
    for ev in events:
        b.add(ev)
    return Trace(b.entries)


def trace_slice(trace: Trace, stmt: int, var: str) -> tuple[int, ...]:
    """Backward closure from the last occurrence of *stmt* touching *var*."""
    start = None
    seen_stmt = False
    for t in reversed(trace.entries):
        if t.stmt == stmt:
            seen_stmt = True
            if t.touches(var):
                start = t
                break
    if start is None:
        if seen_stmt:
            raise CriterionError(f"statement {stmt} never used or defined {var!r}")
        raise NotExecuted(f"statement {stmt} was not executed")
    result = {stmt}
    seen: set[int] = set()
    todo = deque(start.by_var.get(var, []))
    while todo:
        kind, x = todo.popleft()
        if kind == "stmt":
            result.add(x)
            continue
        if x in seen:
            continue
        seen.add(x)
        t = trace.entries[x]
        if t.stmt is not None:
            result.add(t.stmt)
        todo.extend(t.parents)
    return tuple(sorted(result))
