"""The aspect system dependence graph.

Numbered statements own the vertex whose id equals their statement number.
Parameter vertices, C-nodes and the implicit entry of a script get the ids
after that, in construction order. The topology is frozen once built; the
slicer only flips mark bits on a copy of :attr:`Aosg.static_marks`.
"""

from __future__ import annotations

import json
from collections import defaultdict, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping

from aoslice.errors import InvariantViolation
from aoslice.lang import ast as A
from aoslice.lang.semantics import designator_matches
from aoslice.model import ENTRY, Node, ProgramModel, build_model, reaching_definitions, stmt_of


class VertexKind(str, Enum):
    METHOD_ENTRY = "MethodEntry"
    ADVICE_ENTRY = "AdviceEntry"
    ASPECT_ENTRY = "AspectEntry"
    POINTCUT_START = "PointcutStart"
    STATEMENT = "Statement"
    PREDICATE = "Predicate"
    CALL_SITE = "CallSite"
    ACTUAL_IN = "ActualIn"
    ACTUAL_OUT = "ActualOut"
    FORMAL_IN = "FormalIn"
    FORMAL_OUT = "FormalOut"
    CNODE = "CNode"


class EdgeKind(str, Enum):
    CONTROL = "ControlDep"
    DATA = "DataDep"
    CALL = "Call"
    METHOD_ENTRY = "MethodEntryEdge"
    PARAM_IN = "ParamIn"
    PARAM_OUT = "ParamOut"
    SUMMARY = "Summary"
    MEMBERSHIP = "AspectMembership"
    ADVICE = "AdviceEdge"
    WEAVE = "Weave"    # weaving order, routed through a C-node
    RETURN = "Return"  # return statement -> the method's FormalOut


INITIALLY_MARKED = frozenset({EdgeKind.CONTROL, EdgeKind.WEAVE})
PARAMETER_KINDS = frozenset({VertexKind.ACTUAL_IN, VertexKind.ACTUAL_OUT,
                             VertexKind.FORMAL_IN, VertexKind.FORMAL_OUT})


@dataclass(frozen=True)
class Vertex:
    id: int
    kind: VertexKind
    stmt: int | None
    owner: str
    aspect_side: bool
    label: str = ""


@dataclass(frozen=True, order=True)
class Edge:
    src: int
    dst: int
    kind: EdgeKind
    var: str = ""

    def describe(self) -> str:
        tag = f"{self.kind.value}({self.var})" if self.var else self.kind.value
        return f"{self.src}->{self.dst}:{tag}"


@dataclass(frozen=True)
class JoinPointMatch:
    call_site: int
    pointcut: int
    method: str
    bindings: tuple[tuple[int, str], ...]  # (argument index, pointcut parameter)
    before: tuple[int, ...]
    after: tuple[int, ...]
    cnode: int = -1


@dataclass
class Aosg:
    unit: A.SourceUnit
    model: ProgramModel
    vertices: dict[int, Vertex] = field(default_factory=dict)
    edges: tuple[Edge, ...] = ()
    static_marks: dict[Edge, bool] = field(default_factory=dict)
    # lookup tables used by the interpreter, slicer and oracle
    method_entry: dict[str, int] = field(default_factory=dict)
    formal_in: dict[tuple[int, str], int] = field(default_factory=dict)
    formal_out: dict[int, int] = field(default_factory=dict)
    actual_in: dict[tuple[int, int], int] = field(default_factory=dict)
    actual_out: dict[int, int] = field(default_factory=dict)
    call_target: dict[int, str] = field(default_factory=dict)
    matches: dict[int, JoinPointMatch] = field(default_factory=dict)
    returns: dict[str, tuple[int, ...]] = field(default_factory=dict)
    completion: dict[int, int] = field(default_factory=dict)
    aspect_of: dict[int, int] = field(default_factory=dict)
    main_entry: int = 0
    edge_visits: int = 0
    _edge_set: frozenset[Edge] = frozenset()
    _out: dict[int, tuple[Edge, ...]] = field(default_factory=dict)
    _in: dict[int, tuple[Edge, ...]] = field(default_factory=dict)

    # --- queries ---------------------------------------------------------

    def has_edge(self, edge: Edge) -> bool:
        self.edge_visits += 1
        return edge in self._edge_set

    def out_edges(self, v: int) -> tuple[Edge, ...]:
        es = self._out.get(v, ())
        self.edge_visits += len(es)
        return es

    def in_edges(self, v: int) -> tuple[Edge, ...]:
        es = self._in.get(v, ())
        self.edge_visits += len(es)
        return es

    def iter_edges(self) -> Iterator[Edge]:
        for e in self.edges:
            self.edge_visits += 1
            yield e

    def stmt_vertices(self) -> list[Vertex]:
        return [v for v in self.vertices.values() if v.stmt is not None and v.kind not in PARAMETER_KINDS]

    def edges_of_kind(self, kind: EdgeKind) -> list[Edge]:
        return [e for e in self.edges if e.kind == kind]

    # --- export ------------------------------------------------------------

    def to_json(self, marks: Mapping[Edge, bool] | None = None) -> str:
        marks = self.static_marks if marks is None else marks
        doc = {
            "vertices": [{"id": v.id, "kind": v.kind.value, "stmt": v.stmt, "owner": v.owner,
                          "aspectSide": v.aspect_side, **({"label": v.label} if v.label else {})}
                         for v in sorted(self.vertices.values(), key=lambda v: v.id)],
            "edges": [{"from": e.src, "to": e.dst, "kind": e.kind.value,
                       **({"var": e.var} if e.var else {}),
                       "staticMark": self.static_marks[e],
                       **({} if marks is self.static_marks else {"mark": marks[e]})}
                      for e in self.edges],
        }
        return json.dumps(doc, indent=2)

    def to_dot(self, marks: Mapping[Edge, bool] | None = None) -> str:
        marks = self.static_marks if marks is None else marks
        lines = ["digraph aosg {", "  node [fontname=\"Helvetica\"];"]
        for v in sorted(self.vertices.values(), key=lambda v: v.id):
            if v.stmt is not None and v.kind not in PARAMETER_KINDS:
                text = f"{v.stmt}: {v.kind.value}"
                shape = "ellipse"
            else:
                text = f"{v.kind.value} {v.label}".strip()
                shape = "diamond" if v.kind == VertexKind.CNODE else "box"
            lines.append(f"  v{v.id} [label={json.dumps(text)}, shape={shape}];")
        for e in self.edges:
            label = f"{e.kind.value} {e.var}".strip()
            style = "solid" if marks[e] else "dashed"
            lines.append(f"  v{e.src} -> v{e.dst} [label={json.dumps(label)}, style={style}];")
        lines.append("}")
        return "\n".join(lines) + "\n"


# --- construction -----------------------------------------------------------


class _Builder:
    def __init__(self, unit: A.SourceUnit, model: ProgramModel):
        self.g = Aosg(unit, model)
        self.unit = unit
        self.model = model
        self.edges: set[Edge] = set()
        self.next_id = unit.statement_count() + 1

    def vertex(self, kind: VertexKind, stmt: int | None, owner: str, aspect: bool,
               label: str = "", vid: int | None = None) -> int:
        if vid is None:
            vid = self.next_id
            self.next_id += 1
        self.g.vertices[vid] = Vertex(vid, kind, stmt, owner, aspect, label)
        return vid

    def edge(self, src: int, dst: int, kind: EdgeKind, var: str = "") -> None:
        for end in (src, dst):
            if end not in self.g.vertices:
                raise InvariantViolation(f"dangling edge endpoint {end}")
        self.edges.add(Edge(src, dst, kind, var))

    def node_vertex(self, entry_vertex: int, node: Node) -> int:
        if node == ENTRY:
            return entry_vertex
        n = stmt_of(node)
        assert n is not None
        return n


def _stmt_kind(s: A.Stmt) -> VertexKind:
    if isinstance(s, (A.If, A.While, A.For)):
        return VertexKind.PREDICATE
    if A.call_of(s) is not None:
        return VertexKind.CALL_SITE
    return VertexKind.STATEMENT


def _returns(body: A.Block) -> tuple[int, ...]:
    return tuple(s.number for s in A.iter_stmts(body) if isinstance(s, A.Return))


def completion_stmt(adv: A.AdviceDecl) -> int:
    """Vertex whose execution marks the end of an advice body."""
    return adv.body.stmts[-1].number if adv.body.stmts else adv.number


def build_sdg(b: _Builder) -> None:
    """Vertices and intra/inter-method edges of the class."""
    unit, g = b.unit, b.g
    cls = unit.cls
    for m in unit.methods():
        owner = f"{cls.name}.{m.name}"
        if m.number is None:
            entry = b.vertex(VertexKind.METHOD_ENTRY, None, owner, False, label=m.name)
        else:
            entry = b.vertex(VertexKind.METHOD_ENTRY, m.number, owner, False, vid=m.number)
        g.method_entry[m.name] = entry
        if m.name == "main":
            g.main_entry = entry
        for s in A.iter_stmts(m.body):
            b.vertex(_stmt_kind(s), s.number, owner, False, vid=s.number)
        g.returns[m.name] = _returns(m.body)
    for m in unit.methods():
        entry = g.method_entry[m.name]
        for p in m.params:
            fi = b.vertex(VertexKind.FORMAL_IN, None, f"{cls.name}.{m.name}", False, label=p.name)
            g.formal_in[(entry, p.name)] = fi
            b.edge(entry, fi, EdgeKind.CONTROL)
        fo = b.vertex(VertexKind.FORMAL_OUT, None, f"{cls.name}.{m.name}", False, label="result")
        g.formal_out[entry] = fo
        b.edge(entry, fo, EdgeKind.CONTROL)
        for r in g.returns[m.name]:
            b.edge(r, fo, EdgeKind.RETURN)
    for m in unit.methods():
        for s in A.iter_stmts(m.body):
            _call_site(b, s, f"{cls.name}.{m.name}", False)


def _call_site(b: _Builder, s: A.Stmt, owner: str, aspect: bool) -> None:
    """Call edge plus actual-parameter vertices for a statement holding a call."""
    g, unit = b.g, b.unit
    call = A.call_of(s)
    if call is None:
        return
    site = s.number
    callee = unit.cls.constructor if isinstance(call, A.NewExpr) else unit.method(call.name)
    if callee is None:  # `new` on a class without an explicit constructor
        g.call_target[site] = unit.cls.name
        return
    g.call_target[site] = callee.name
    target = g.method_entry[callee.name]
    b.edge(site, target, EdgeKind.METHOD_ENTRY if callee.is_constructor else EdgeKind.CALL)
    for i, p in enumerate(callee.params):
        ai = b.vertex(VertexKind.ACTUAL_IN, None, owner, aspect, label=f"{site}#{i}")
        g.actual_in[(site, i)] = ai
        b.edge(site, ai, EdgeKind.CONTROL)
        b.edge(ai, g.formal_in[(target, p.name)], EdgeKind.PARAM_IN)
    ao = b.vertex(VertexKind.ACTUAL_OUT, None, owner, aspect, label=f"{site}")
    g.actual_out[site] = ao
    b.edge(site, ao, EdgeKind.CONTROL)
    b.edge(g.formal_out[target], ao, EdgeKind.PARAM_OUT)
    b.edge(ao, site, EdgeKind.PARAM_OUT)


def build_adg(b: _Builder) -> None:
    """Aspect, pointcut and advice vertices with their intra-aspect edges."""
    g = b.g
    for asp in b.unit.aspects:
        b.vertex(VertexKind.ASPECT_ENTRY, asp.number, asp.name, True, vid=asp.number)
        for pc in asp.pointcuts:
            b.vertex(VertexKind.POINTCUT_START, pc.number, asp.name, True, vid=pc.number)
            g.aspect_of[pc.number] = asp.number
            b.edge(asp.number, pc.number, EdgeKind.CONTROL)
        for adv in asp.advices:
            owner = f"{asp.name}.{adv.kind}@{adv.number}"
            b.vertex(VertexKind.ADVICE_ENTRY, adv.number, owner, True, vid=adv.number)
            for s in A.iter_stmts(adv.body):
                b.vertex(_stmt_kind(s), s.number, owner, True, vid=s.number)
            g.completion[adv.number] = completion_stmt(adv)
            g.aspect_of[adv.number] = asp.number
        pcs = {pc.name: pc for pc in asp.pointcuts}
        for pc in asp.pointcuts:
            for p in pc.params:
                fi = b.vertex(VertexKind.FORMAL_IN, None, asp.name, True, label=p.name)
                g.formal_in[(pc.number, p.name)] = fi
                b.edge(pc.number, fi, EdgeKind.CONTROL)
        for adv in asp.advices:
            pc = pcs[adv.pointcut]
            b.edge(pc.number, adv.number, EdgeKind.ADVICE)
            names = [p.name for p in adv.params] + ([adv.result.name] if adv.result else [])
            for name in names:
                fi = b.vertex(VertexKind.FORMAL_IN, None, asp.name, True, label=name)
                g.formal_in[(adv.number, name)] = fi
                b.edge(adv.number, fi, EdgeKind.CONTROL)
            for pparam, name in zip(pc.params, adv.pointcut_args):
                b.edge(g.formal_in[(pc.number, pparam.name)], g.formal_in[(adv.number, name)],
                       EdgeKind.PARAM_IN)
    # advice bodies may call methods of the class
    for asp in b.unit.aspects:
        for adv in asp.advices:
            for s in A.iter_stmts(adv.body):
                _call_site(b, s, f"{asp.name}.{adv.kind}@{adv.number}", True)


def build_intra_edges(b: _Builder) -> None:
    """Control and data dependence edges inside every method and advice body."""
    g, model, unit = b.g, b.model, b.unit
    static_defs: dict[str, set[int]] = defaultdict(set)
    static_uses: dict[str, set[int]] = defaultdict(set)
    for owner, body in unit.bodies():
        entry_node = ENTRY if owner.number is None else owner.number
        entry_v = g.method_entry["main"] if owner.number is None else owner.number
        cfg = model.cfgs[entry_node]
        cd = model.control[entry_node]
        statics = model.static_vars[entry_node]
        for stmt, parents in cd.parents.items():
            for p in parents:
                b.edge(b.node_vertex(entry_v, p), stmt, EdgeKind.CONTROL)
        rd = reaching_definitions(cfg)
        groups: dict[int, list[Node]] = defaultdict(list)
        for node in cfg.succ:
            n = stmt_of(node)
            if n is not None and node != entry_node:
                groups[n].append(node)
        for n, nodes in groups.items():
            uses = {v for node in nodes for v in cfg.node_uses.get(node, ())}
            reaching = set().union(*(rd[node] for node in nodes))
            for v in sorted(uses):
                if v in statics:
                    static_uses[v].add(n)
                    continue
                for var, d in reaching:
                    if var == v:
                        b.edge(b.node_vertex(entry_v, d), n, EdgeKind.DATA, v)
            for node in nodes:
                for v in cfg.node_defs.get(node, ()):
                    if v in statics:
                        static_defs[v].add(n)
    for v in sorted(static_defs):
        for d in static_defs[v]:
            for u in static_uses.get(v, ()):
                b.edge(d, u, EdgeKind.DATA, v)


def match_join_points(unit: A.SourceUnit) -> list[JoinPointMatch]:
    """Every call site tested against every pointcut designator."""
    if not unit.classes:
        return []
    cls = unit.cls
    out = []
    for owner, body in unit.bodies():
        for s in A.iter_stmts(body):
            call = A.call_of(s)
            if not isinstance(call, A.CallExpr):
                continue
            m = unit.method(call.name)
            if m is None:
                continue
            for asp in unit.aspects:
                for pc in asp.pointcuts:
                    if not designator_matches(pc.designator, cls, m):
                        continue
                    advs = [a for a in asp.advices if a.pointcut == pc.name]
                    out.append(JoinPointMatch(
                        s.number, pc.number, m.name,
                        tuple(enumerate(pc.designator.args_binding)),
                        tuple(a.number for a in advs if a.kind == A.BEFORE),
                        tuple(a.number for a in advs if a.kind == A.AFTER_RETURNING)))
    return sorted(out, key=lambda jp: (jp.call_site, jp.pointcut))


def weave(b: _Builder, matches: Iterable[JoinPointMatch]) -> None:
    g = b.g
    advices = {a.number: a for asp in b.unit.aspects for a in asp.advices}
    for jp in matches:
        site, pc = jp.call_site, jp.pointcut
        c = b.vertex(VertexKind.CNODE, None, "weave", False, label=f"{site}/{pc}")
        jp = JoinPointMatch(site, pc, jp.method, jp.bindings, jp.before, jp.after, c)
        g.matches[site] = jp
        target = g.method_entry[jp.method]
        b.edge(site, pc, EdgeKind.MEMBERSHIP)
        for i, pname in jp.bindings:
            b.edge(g.actual_in[(site, i)], g.formal_in[(pc, pname)], EdgeKind.PARAM_IN)
        for a in jp.before:
            b.edge(c, a, EdgeKind.CONTROL)
            b.edge(g.completion[a], c, EdgeKind.WEAVE)
        b.edge(c, target, EdgeKind.CONTROL)
        b.edge(c, target, EdgeKind.WEAVE)
        for a in jp.after:
            b.edge(c, a, EdgeKind.CONTROL)
            b.edge(g.completion[a], c, EdgeKind.WEAVE)
            result = advices[a].result
            assert result is not None
            b.edge(g.formal_out[target], g.formal_in[(a, result.name)], EdgeKind.PARAM_OUT)
        if jp.after:
            b.edge(c, site, EdgeKind.WEAVE)


def summary_edges(b: _Builder) -> None:
    """ActualIn -> ActualOut wherever the callee's result depends on that formal."""
    g = b.g
    by_owner: dict[str, set[int]] = defaultdict(set)
    for v in g.vertices.values():
        by_owner[v.owner].add(v.id)
    out: dict[int, list[Edge]] = defaultdict(list)
    for e in b.edges:
        out[e.src].append(e)
    follow = {EdgeKind.CONTROL, EdgeKind.DATA, EdgeKind.RETURN}
    reaches: dict[tuple[str, int], bool] = {}
    cls = b.unit.cls
    for m in b.unit.methods():
        entry = g.method_entry[m.name]
        inside = by_owner[f"{cls.name}.{m.name}"]
        fo = g.formal_out[entry]
        for i, p in enumerate(m.params):
            start = [e.dst for e in out[entry] if e.kind == EdgeKind.DATA and e.var == p.name]
            seen = set(start)
            queue = deque(start)
            while queue:
                v = queue.popleft()
                for e in out[v]:
                    if e.kind in follow and e.dst in inside and e.dst not in seen and e.dst != entry:
                        seen.add(e.dst)
                        queue.append(e.dst)
            reaches[(m.name, i)] = fo in seen
    for (site, i), ai in sorted(g.actual_in.items()):
        if reaches.get((g.call_target[site], i)):
            b.edge(ai, g.actual_out[site], EdgeKind.SUMMARY)


def build_aosg(unit: A.SourceUnit, model: ProgramModel | None = None) -> Aosg:
    model = build_model(unit) if model is None else model
    b = _Builder(unit, model)
    if unit.classes:
        build_sdg(b)
        build_adg(b)
        build_intra_edges(b)
        weave(b, match_join_points(unit))
        summary_edges(b)
    g = b.g
    g.edges = tuple(sorted(b.edges, key=lambda e: (e.src, e.dst, e.kind.value, e.var)))
    g._edge_set = frozenset(g.edges)
    g.static_marks = {e: e.kind in INITIALLY_MARKED for e in g.edges}
    outs: dict[int, list[Edge]] = defaultdict(list)
    ins: dict[int, list[Edge]] = defaultdict(list)
    for e in g.edges:
        outs[e.src].append(e)
        ins[e.dst].append(e)
    g._out = {k: tuple(v) for k, v in outs.items()}
    g._in = {k: tuple(v) for k, v in ins.items()}
    return g
