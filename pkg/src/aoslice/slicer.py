"""Edge-marking dynamic slicer.

Consumes interpreter events one at a time. After each event every
``dslice(u, var)`` touched by it holds the statements the latest execution
of ``u`` depends on, so answering a slicing command is a dictionary read.

Each executed vertex contributes ``{stmt(u)} | dslice(u)`` to the vertices
depending on it. Local definitions are tracked per activation record,
static ones globally.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from aoslice.aosg import Aosg, Edge, EdgeKind, VertexKind
from aoslice.errors import CriterionError, InvariantViolation, NotExecuted
from aoslice.interp import Event, EventKind
from aoslice.model import ENTRY

Stmts = frozenset[int]
_EMPTY: Stmts = frozenset()


@dataclass(frozen=True)
class SlicingCriterion:
    stmt: int
    var: str


@dataclass(frozen=True)
class Slice:
    criterion: SlicingCriterion
    stmts: tuple[int, ...]


@dataclass
class _Def:
    vertex: int
    contrib: Stmts  # {stmt(vertex)} | dslice at the defining execution


@dataclass
class _Call:
    site: int
    contrib: Stmts
    arg_defs: dict[str, _Def | None]
    pointcut: Stmts | None = None
    returns: list[tuple[int, Stmts]] = field(default_factory=list)
    before: list[tuple[int, Stmts]] = field(default_factory=list)
    after: list[tuple[int, Stmts]] = field(default_factory=list)


@dataclass
class _Frame:
    entry: int
    entry_contrib: Stmts
    caller: int | None
    defs: dict[str, _Def] = field(default_factory=dict)
    latest: dict[int, Stmts] = field(default_factory=dict)
    call: _Call | None = None


class SliceState:
    """Run-time marks, most recent definitions and per-vertex slice sets."""

    def __init__(self, aosg: Aosg):
        self.g = aosg
        self.marks: dict[Edge, bool] = dict(aosg.static_marks)
        self.dslice: dict[tuple[int, str], Stmts] = {}
        self.contributors: dict[tuple[int, str], Stmts] = {}
        self.executed: set[int] = set()
        self.recent_static: dict[str, _Def] = {}
        self.frames: dict[int, _Frame] = {}
        self.aspects: dict[int, Stmts] = {}
        self._data_mark: dict[tuple[int, str], list[Edge]] = {}
        self._activation: dict[int, list[Edge]] = {}
        model = aosg.model
        self._control: dict[int, tuple[tuple[int, bool], ...]] = {}
        for stmt, owner in model.owner_of.items():
            if stmt == owner:
                continue
            parents = []
            for p in model.control_parents(stmt):
                if p == owner or p == ENTRY:
                    parents.append((aosg.main_entry if p == ENTRY else p, True))
                else:
                    parents.append((p, False))  # type: ignore[arg-type]
            self._control[stmt] = tuple(parents)
        self._method_of = {v: name for name, v in aosg.method_entry.items()}
        ctor = aosg.unit.cls.constructor if aosg.unit.classes else None
        self._ctor_entry = aosg.method_entry[ctor.name] if ctor is not None else None

    # --- helpers -------------------------------------------------------------

    def _stmt(self, v: int) -> Stmts:
        s = self.g.vertices[v].stmt
        return _EMPTY if s is None else frozenset((s,))

    def _require(self, src: int, dst: int, kind: EdgeKind, var: str = "") -> Edge:
        e = Edge(src, dst, kind, var)
        if not self.g.has_edge(e):
            raise InvariantViolation(f"dynamic dependence without static edge {e.describe()}")
        return e

    def _mark_activation(self, key: int, edges: list[Edge]) -> None:
        for e in self._activation.get(key, ()):
            if self.g.static_marks[e] is False:
                self.marks[e] = False
        for e in edges:
            self.marks[e] = True
        self._activation[key] = edges

    def _frame(self, fid: int) -> _Frame:
        try:
            return self.frames[fid]
        except KeyError:
            raise InvariantViolation(f"event refers to unknown activation {fid}") from None

    def _lookup_def(self, frame: _Frame, var: str, static: bool) -> _Def | None:
        return self.recent_static.get(var) if static else frame.defs.get(var)

    def _control_contrib(self, frame: _Frame, u: int) -> tuple[Stmts, set[int]]:
        acc: set[int] = set()
        who: set[int] = set()
        for p, is_entry in self._control.get(u, ()):
            if is_entry:
                if p != frame.entry:
                    raise InvariantViolation(f"statement {u} executed outside its body")
                self._require(p, u, EdgeKind.CONTROL)
                acc |= frame.entry_contrib
                who |= self._stmt(p)
            elif p in frame.latest:
                self._require(p, u, EdgeKind.CONTROL)
                acc |= frame.latest[p]
                who.add(p)
        return frozenset(acc), who

    def _use_data(self, u: int, var: str, defs: list[_Def]) -> None:
        # edges marked by the previous execution of u for var are superseded
        for old in self._data_mark.pop((u, var), ()):
            self.marks[old] = False
        edges = [self._require(d.vertex, u, EdgeKind.DATA, var) for d in defs]
        for e in edges:
            self.marks[e] = True
        if edges:
            self._data_mark[(u, var)] = edges

    # --- events --------------------------------------------------------------

    def on_event(self, ev: Event) -> None:
        if ev.vertex not in self.g.vertices:
            raise InvariantViolation(f"event at unknown vertex {ev.vertex}")
        handler = _HANDLERS[ev.kind]
        handler(self, ev)
        if ev.kind not in (EventKind.METHOD_EXIT, EventKind.ADVICE_EXIT):
            self.executed.add(ev.vertex)

    def _aspect_init(self, ev: Event) -> None:
        self.aspects[ev.vertex] = self._stmt(ev.vertex)

    def _method_enter(self, ev: Event) -> None:
        e_v = ev.vertex
        parents = _EMPTY
        who: set[int] = set()
        if ev.caller is not None:
            call = self._frame(ev.caller).call
            if call is None or call.site != ev.call_site:
                raise InvariantViolation(f"method entry {e_v} without a pending call")
            site = call.site
            kind = EdgeKind.METHOD_ENTRY if e_v == self._ctor_entry else EdgeKind.CALL
            edges = [self._require(site, e_v, kind)]
            parents = call.contrib
            who.add(site)
            jp = self.g.matches.get(site)
            for b_v, contrib in call.before:
                assert jp is not None
                self._require(b_v, jp.cnode, EdgeKind.WEAVE)
                self._require(jp.cnode, e_v, EdgeKind.WEAVE)
                parents = parents | contrib
                who |= self._stmt(b_v)
            edges += self._call_edges(site, e_v)
            self._mark_activation(e_v, edges)
        frame = _Frame(e_v, self._stmt(e_v) | parents, ev.caller)
        self.frames[ev.frame] = frame
        for var, _ in ev.defs:
            frame.defs[var] = _Def(e_v, frame.entry_contrib)
            self.dslice[(e_v, var)] = parents
            self.contributors[(e_v, var)] = frozenset(who)

    def _call_edges(self, site: int, entry: int) -> list[Edge]:
        g = self.g
        edges = []
        fo = g.formal_out[entry]
        ao = g.actual_out.get(site)
        i = 0
        while (site, i) in g.actual_in:
            ai = g.actual_in[(site, i)]
            for e in g.out_edges(ai):
                if e.kind in (EdgeKind.PARAM_IN, EdgeKind.SUMMARY) and (
                        e.kind == EdgeKind.SUMMARY or g.vertices[e.dst].owner == g.vertices[fo].owner):
                    edges.append(e)
            i += 1
        for r in g.returns.get(self._method_name(entry), ()):
            edges.append(self._require(r, fo, EdgeKind.RETURN))
        if ao is not None:
            edges.append(self._require(fo, ao, EdgeKind.PARAM_OUT))
            edges.append(self._require(ao, site, EdgeKind.PARAM_OUT))
        return edges

    def _method_name(self, entry: int) -> str:
        try:
            return self._method_of[entry]
        except KeyError:
            raise InvariantViolation(f"{entry} is not a method entry") from None

    def _method_exit(self, ev: Event) -> None:
        frame = self._frame(ev.frame)
        if frame.caller is not None:
            call = self._frame(frame.caller).call
            assert call is not None
            name = self._method_name(frame.entry)
            # every return of the callee counts; one that did not run in this
            # activation contributes only its own statement number
            call.returns = [(r, frame.latest.get(r, frozenset((r,))))
                            for r in self.g.returns.get(name, ())]
        del self.frames[ev.frame]

    def _call(self, ev: Event) -> None:
        frame = self._frame(ev.frame)
        u = ev.vertex
        control, who = self._control_contrib(frame, u)
        acc = set(control)
        arg_defs: dict[str, _Def | None] = {}
        for var in ev.uses:
            d = self._lookup_def(frame, var, var in ev.statics)
            arg_defs[var] = d
            self._use_data(u, var, [d] if d else [])
            own = d.contrib if d else _EMPTY
            acc |= own
            self.dslice[(u, var)] = control | own
            self.contributors[(u, var)] = frozenset(who | (self._stmt(d.vertex) if d else _EMPTY))
        frame.call = _Call(u, self._stmt(u) | acc, arg_defs)

    def _pointcut(self, ev: Event) -> None:
        frame = self._frame(ev.frame)
        call = frame.call
        pc = ev.vertex
        if call is None or call.site != ev.call_site:
            raise InvariantViolation(f"pointcut {pc} fired without a pending call")
        g = self.g
        aspect = g.aspect_of[pc]
        edges = [self._require(call.site, pc, EdgeKind.MEMBERSHIP)]
        self._require(aspect, pc, EdgeKind.CONTROL)
        jp = g.matches[call.site]
        for i, pname in jp.bindings:
            edges.append(self._require(g.actual_in[(call.site, i)], g.formal_in[(pc, pname)], EdgeKind.PARAM_IN))
        for a in jp.before + jp.after:
            edges.append(self._require(pc, a, EdgeKind.ADVICE))
            for e in g.out_edges(a):
                if g.vertices[e.dst].kind == VertexKind.FORMAL_IN:
                    edges += [x for x in g.in_edges(e.dst)
                              if x.kind in (EdgeKind.PARAM_IN, EdgeKind.PARAM_OUT)]
        self._mark_activation(pc, edges)
        parents = call.contrib | self.aspects.get(aspect, _EMPTY)
        call.pointcut = self._stmt(pc) | parents
        for var, _ in ev.defs:
            self.dslice[(pc, var)] = parents
            self.contributors[(pc, var)] = frozenset({call.site, aspect})

    def _advice_enter(self, ev: Event) -> None:
        a = ev.vertex
        if ev.caller is None:
            raise InvariantViolation(f"advice {a} entered without a caller")
        call = self._frame(ev.caller).call
        if call is None or call.pointcut is None or call.site != ev.call_site:
            raise InvariantViolation(f"advice {a} entered without a fired pointcut")
        g = self.g
        jp = g.matches[call.site]
        self._require(jp.pointcut, a, EdgeKind.ADVICE)
        parents = set(call.pointcut)
        who = {jp.pointcut}
        if a in jp.after:
            entry = g.method_entry[jp.method]
            fo = g.formal_out[entry]
            for r, contrib in call.returns:
                self._require(r, fo, EdgeKind.RETURN)
                parents |= contrib
                who.add(r)
        frozen = frozenset(parents)
        frame = _Frame(a, self._stmt(a) | frozen, ev.caller)
        self.frames[ev.frame] = frame
        for var, _ in ev.defs:
            frame.defs[var] = _Def(a, frame.entry_contrib)
            self.dslice[(a, var)] = frozen
            self.contributors[(a, var)] = frozenset(who)

    def _advice_exit(self, ev: Event) -> None:
        frame = self._frame(ev.frame)
        a = ev.vertex
        call = self._frame(frame.caller).call if frame.caller is not None else None
        if call is None:
            raise InvariantViolation(f"advice {a} finished without a pending call")
        done = self.g.completion[a]
        contrib = frame.entry_contrib if done == a else frame.latest[done]
        if a in self.g.matches[call.site].before:
            call.before.append((done, contrib))
        else:
            call.after.append((done, contrib))
        del self.frames[ev.frame]

    def _statement(self, ev: Event) -> None:
        frame = self._frame(ev.frame)
        u = ev.vertex
        control, who = self._control_contrib(frame, u)
        call = frame.call if frame.call is not None and frame.call.site == u else None
        extra: set[int] = set()
        extra_who: set[int] = set()
        if call is not None:
            g = self.g
            target = g.call_target.get(u)
            entry = g.method_entry.get(target) if target is not None else None
            for r, contrib in call.returns:
                assert entry is not None
                self._require(r, g.formal_out[entry], EdgeKind.RETURN)
                extra |= contrib
                extra_who.add(r)
            jp = g.matches.get(u)
            for a_v, contrib in call.after:
                assert jp is not None
                self._require(a_v, jp.cnode, EdgeKind.WEAVE)
                self._require(jp.cnode, u, EdgeKind.WEAVE)
                extra |= contrib
                extra_who |= self._stmt(a_v)
        base = control | frozenset(extra)
        base_who = who | extra_who
        acc = set(base)
        all_who = set(base_who)
        for var in ev.uses:
            static = var in ev.statics
            defs: list[_Def] = []
            if call is not None and var in call.arg_defs:
                d = call.arg_defs[var]
                if d is not None:
                    defs.append(d)
            if call is None or var in ev.post_uses or var not in call.arg_defs:
                d = self._lookup_def(frame, var, static)
                if d is not None:
                    defs.append(d)
            own: set[int] = set()
            own_who: set[int] = set()
            for d in defs:
                own |= d.contrib
                own_who |= self._stmt(d.vertex)
            self._use_data(u, var, defs)
            self.dslice[(u, var)] = base | frozenset(own)
            self.contributors[(u, var)] = frozenset(base_who | own_who)
            acc |= own
            all_who |= own_who
        total = frozenset(acc)
        contrib = self._stmt(u) | total
        for var, _ in ev.defs:
            self.dslice[(u, var)] = total
            self.contributors[(u, var)] = frozenset(all_who)
            d = _Def(u, contrib)
            if var in ev.statics:
                self.recent_static[var] = d
            else:
                frame.defs[var] = d
        frame.latest[u] = contrib
        if call is not None:
            frame.call = None

    # --- queries -------------------------------------------------------------

    def lookup(self, criterion: SlicingCriterion) -> Slice:
        """The slice for *criterion*: a read of one stored set, no graph walk."""
        stmt, var = criterion.stmt, criterion.var
        du = self.g.model.def_use.per_statement.get(stmt)
        if du is None:
            raise CriterionError(f"no statement numbered {stmt}")
        if stmt not in self.executed:
            raise NotExecuted(f"statement {stmt} was not executed")
        if var not in du[0] and var not in du[1]:
            raise CriterionError(f"statement {stmt} neither uses nor defines {var!r}")
        found = self.dslice.get((stmt, var))
        if found is None:
            raise NotExecuted(f"statement {stmt} has not yet used or defined {var!r}")
        return Slice(criterion, tuple(sorted(found | {stmt})))

    def contributors_of(self, stmt: int, var: str) -> frozenset[int]:
        return self.contributors.get((stmt, var), _EMPTY)

    def stored_elements(self) -> int:
        return sum(len(s) for s in self.dslice.values())

    def mark_dump(self) -> dict[str, bool]:
        return {e.describe(): m for e, m in sorted(self.marks.items(), key=lambda t: t[0])}


_HANDLERS = {
    EventKind.ASPECT_INIT: SliceState._aspect_init,
    EventKind.METHOD_ENTER: SliceState._method_enter,
    EventKind.METHOD_EXIT: SliceState._method_exit,
    EventKind.CALL: SliceState._call,
    EventKind.OBJECT_CREATED: SliceState._call,
    EventKind.POINTCUT: SliceState._pointcut,
    EventKind.ADVICE_ENTER: SliceState._advice_enter,
    EventKind.ADVICE_EXIT: SliceState._advice_exit,
    EventKind.STATEMENT: SliceState._statement,
}


def initialize(aosg: Aosg) -> SliceState:
    return SliceState(aosg)


def on_event(state: SliceState, ev: Event) -> SliceState:
    state.on_event(ev)
    return state


def lookup_slice(state: SliceState, criterion: SlicingCriterion) -> Slice:
    return state.lookup(criterion)
