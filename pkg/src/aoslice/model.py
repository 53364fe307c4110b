"""Static program facts: def/use sets, control-flow graphs, control dependence.

CFG nodes are statement numbers, plus a few synthetic string nodes:
``"entry"`` (implicit script main), ``"exit"``, and ``"init:N"`` /
``"step:N"`` for the init and step clauses of the ``for`` numbered N.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Union

from aoslice.lang import ast as A
from aoslice.lang.semantics import is_static

Node = Union[int, str]
EXIT = "exit"
ENTRY = "entry"


def init_node(n: int) -> str:
    return f"init:{n}"


def step_node(n: int) -> str:
    return f"step:{n}"


def stmt_of(node: Node) -> int | None:
    """Statement number a CFG node belongs to (``None`` for entry/exit)."""
    if isinstance(node, int):
        return node
    if ":" in node:
        return int(node.split(":", 1)[1])
    return None


# --- def/use ----------------------------------------------------------------


def expr_vars(e: A.Expr | None) -> list[str]:
    """Variables read by *e*, in left-to-right order, duplicates kept."""
    out = []
    for sub in A.iter_exprs(e):
        if isinstance(sub, A.Var):
            out.append(sub.name)
        elif isinstance(sub, A.ArgRead):
            out.append(sub.array)
    return out


def header_defs(owner: A.MethodDecl | A.AdviceDecl | A.PointcutDecl) -> tuple[str, ...]:
    names = tuple(p.name for p in owner.params)
    if isinstance(owner, A.AdviceDecl) and owner.result is not None:
        names += (owner.result.name,)
    return names


def stmt_defs(s: A.Stmt) -> tuple[str, ...]:
    if isinstance(s, (A.VarDecl, A.Assign)):
        return (s.name,)
    if isinstance(s, A.For):
        names = []
        if s.init is not None:
            names.append(s.init.name)
        if s.step is not None and s.step.name not in names:
            names.append(s.step.name)
        return tuple(names)
    return ()


def stmt_uses(s: A.Stmt) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for e in A.stmt_exprs(s):
        for v in expr_vars(e):
            seen.setdefault(v, None)
    return tuple(seen)


@dataclass
class DefUseInfo:
    per_statement: dict[int, tuple[frozenset[str], frozenset[str]]]
    def_set: dict[str, frozenset[int]]
    use_set: dict[str, frozenset[int]]

    def defs(self, stmt: int) -> frozenset[str]:
        return self.per_statement[stmt][0]

    def uses(self, stmt: int) -> frozenset[str]:
        return self.per_statement[stmt][1]


def _invert(per: dict[int, frozenset[str]]) -> dict[str, frozenset[int]]:
    acc: dict[str, set[int]] = defaultdict(set)
    for stmt, names in per.items():
        for name in names:
            acc[name].add(stmt)
    return {k: frozenset(v) for k, v in sorted(acc.items())}


def compute_def_use(unit: A.SourceUnit) -> DefUseInfo:
    per: dict[int, tuple[frozenset[str], frozenset[str]]] = {}
    for m in unit.methods():
        if m.number is not None:
            per[m.number] = (frozenset(header_defs(m)), frozenset())
        for s in A.iter_stmts(m.body):
            per[s.number] = (frozenset(stmt_defs(s)), frozenset(stmt_uses(s)))
    for asp in unit.aspects:
        per[asp.number] = (frozenset(), frozenset())
        for pc in asp.pointcuts:
            per[pc.number] = (frozenset(header_defs(pc)), frozenset())
        for adv in asp.advices:
            per[adv.number] = (frozenset(header_defs(adv)), frozenset())
            for s in A.iter_stmts(adv.body):
                per[s.number] = (frozenset(stmt_defs(s)), frozenset(stmt_uses(s)))
    per = dict(sorted(per.items()))
    return DefUseInfo(
        per,
        _invert({k: d for k, (d, _) in per.items()}),
        _invert({k: u for k, (_, u) in per.items()}),
    )


# --- CFG --------------------------------------------------------------------


@dataclass
class Cfg:
    entry: Node
    exit: Node = EXIT
    succ: dict[Node, list[Node]] = field(default_factory=dict)
    back_edges: set[tuple[Node, Node]] = field(default_factory=set)
    # CFG node -> (defined vars, used vars) for that node alone
    node_defs: dict[Node, tuple[str, ...]] = field(default_factory=dict)
    node_uses: dict[Node, tuple[str, ...]] = field(default_factory=dict)
    # for-loop number -> node control returns to when the loop is finished
    loop_exit: dict[int, Node] = field(default_factory=dict)

    @property
    def nodes(self) -> list[Node]:
        return list(self.succ)

    def add(self, node: Node, *targets: Node) -> None:
        self.succ.setdefault(node, [])
        for t in targets:
            if t not in self.succ[node]:
                self.succ[node].append(t)

    def preds(self) -> dict[Node, list[Node]]:
        out: dict[Node, list[Node]] = {n: [] for n in self.succ}
        for a, bs in self.succ.items():
            for b in bs:
                out[b].append(a)
        return out


def build_cfg(body: A.Block, entry: Node = ENTRY, entry_defs: tuple[str, ...] = ()) -> Cfg:
    """Structured CFG for one method or advice body."""
    cfg = Cfg(entry)
    cfg.add(EXIT)
    cfg.node_defs[entry] = entry_defs
    cfg.node_uses[entry] = ()
    first = _build_seq(cfg, body.stmts, EXIT)
    cfg.add(entry, first)
    for s in A.iter_stmts(body):
        if isinstance(s, (A.While, A.For)):
            inside: set[Node] = {step_node(s.number)}
            for t in A.iter_stmts(s.body):
                inside |= {t.number, init_node(t.number), step_node(t.number)}
            for a, bs in cfg.succ.items():
                if s.number in bs and (a in inside or a == s.number):
                    cfg.back_edges.add((a, s.number))
    return cfg


def _build_seq(cfg: Cfg, stmts: Iterable[A.Stmt], nxt: Node) -> Node:
    for s in reversed(list(stmts)):
        nxt = _build_stmt(cfg, s, nxt)
    return nxt


def _build_stmt(cfg: Cfg, s: A.Stmt, nxt: Node) -> Node:
    n = s.number
    if isinstance(s, A.If):
        then_first = _build_seq(cfg, s.then.stmts, nxt)
        else_first = _build_seq(cfg, s.orelse.stmts, nxt) if s.orelse else nxt
        cfg.add(n, then_first, else_first)
        cfg.node_defs[n], cfg.node_uses[n] = (), tuple(expr_vars(s.cond))
        return n
    if isinstance(s, (A.While, A.For)):
        cfg.add(n)
        cfg.loop_exit[n] = nxt
        cfg.node_defs[n], cfg.node_uses[n] = (), tuple(expr_vars(s.cond))
        back: Node = n
        if isinstance(s, A.For) and s.step is not None:
            back = step_node(n)
            cfg.add(back, n)
            cfg.node_defs[back], cfg.node_uses[back] = (s.step.name,), tuple(expr_vars(s.step.value))
        cfg.add(n, _build_seq(cfg, s.body.stmts, back), nxt)
        if isinstance(s, A.For) and s.init is not None:
            it = init_node(n)
            cfg.add(it, n)
            cfg.node_defs[it], cfg.node_uses[it] = (s.init.name,), tuple(expr_vars(s.init.value))
            return it
        return n
    if isinstance(s, A.Return):
        cfg.add(n, EXIT)
    else:
        cfg.add(n, nxt)
    cfg.node_defs[n] = stmt_defs(s)
    cfg.node_uses[n] = stmt_uses(s)
    return n


def reaching_definitions(cfg: Cfg) -> dict[Node, frozenset[tuple[str, Node]]]:
    """Definitions ``(var, node)`` reaching the start of each CFG node."""
    preds = cfg.preds()
    out: dict[Node, frozenset[tuple[str, Node]]] = {n: frozenset() for n in cfg.succ}
    rd_in: dict[Node, frozenset[tuple[str, Node]]] = dict(out)
    changed = True
    while changed:
        changed = False
        for n in cfg.succ:
            inset = frozenset().union(*(out[p] for p in preds[n]))
            defs = cfg.node_defs.get(n, ())
            new = frozenset(d for d in inset if d[0] not in defs) | {(v, n) for v in defs}
            rd_in[n] = inset
            if new != out[n]:
                out[n] = new
                changed = True
    return rd_in


# --- post-dominators and control dependence ---------------------------------


def _acyclic(cfg: Cfg) -> dict[Node, list[Node]]:
    """The CFG with each loop back edge redirected to the loop's exit.

    Control dependence is computed on this graph: a loop predicate is then
    controlled by its enclosing context only, never by statements in its
    own body, while early returns still make later code depend on the
    predicates guarding them.
    """
    exits = cfg.loop_exit
    out: dict[Node, list[Node]] = {}
    for a, bs in cfg.succ.items():
        row: list[Node] = []
        for b in bs:
            t = exits[b] if (a, b) in cfg.back_edges else b
            if t not in row:
                row.append(t)
        out[a] = row
    return out


def post_dominators(succ: dict[Node, list[Node]], exit_node: Node) -> dict[Node, set[Node]]:
    nodes = list(succ)
    pdom = {n: set(nodes) for n in nodes}
    pdom[exit_node] = {exit_node}
    changed = True
    while changed:
        changed = False
        for n in nodes:
            if n == exit_node:
                continue
            outs = [pdom[s] for s in succ[n]]
            new = set.intersection(*outs) if outs else set()
            new = new | {n}
            if new != pdom[n]:
                pdom[n] = new
                changed = True
    return pdom


def immediate(pdom: dict[Node, set[Node]]) -> dict[Node, Node | None]:
    """Immediate (post-)dominator from full (post-)dominator sets."""
    idom: dict[Node, Node | None] = {}
    for n, ds in pdom.items():
        strict = ds - {n}
        # the closest strict dominator is dominated by every other strict dominator
        best = [d for d in strict if all(o in pdom[d] for o in strict)]
        idom[n] = best[0] if best else None
    return idom


@dataclass
class ControlDeps:
    """Statement -> controlling predicates (or the body's entry node)."""

    parents: dict[int, tuple[Node, ...]]
    entry: Node

    def of(self, stmt: int) -> tuple[Node, ...]:
        return self.parents[stmt]


def control_dependences(cfg: Cfg) -> ControlDeps:
    succ = _acyclic(cfg)
    succ = {k: list(v) for k, v in succ.items()}
    succ[cfg.entry] = succ[cfg.entry] + [cfg.exit]  # augmented entry -> exit edge
    pdom = post_dominators(succ, cfg.exit)
    ipdom = immediate(pdom)
    raw: dict[Node, set[Node]] = defaultdict(set)
    for a, bs in succ.items():
        for b in bs:
            if b in pdom[a] and b != a:
                continue
            stop = ipdom[a]
            t: Node | None = b
            while t is not None and t != stop:
                raw[t].add(a)
                t = ipdom[t]
    parents: dict[int, tuple[Node, ...]] = {}
    for node in succ:
        if not isinstance(node, int) or node == cfg.entry:
            continue
        ps = {p if isinstance(p, int) or p == cfg.entry else stmt_of(p) for p in raw.get(node, ())}
        ps.discard(node)
        parents[node] = tuple(sorted(ps, key=_node_key))
    return ControlDeps(dict(sorted(parents.items())), cfg.entry)


def _node_key(n: Node) -> tuple[int, str]:
    return (n, "") if isinstance(n, int) else (-1, n)


# --- whole-program view -----------------------------------------------------


@dataclass
class ProgramModel:
    unit: A.SourceUnit
    def_use: DefUseInfo
    cfgs: dict[Node, Cfg]             # keyed by body entry node
    control: dict[Node, ControlDeps]  # keyed by body entry node
    owner_of: dict[int, Node]         # statement -> entry node of its body
    static_vars: dict[Node, frozenset[str]]  # entry -> names that are statics there

    def control_parents(self, stmt: int) -> tuple[Node, ...]:
        return self.control[self.owner_of[stmt]].of(stmt)

    def to_json(self) -> str:
        rows = {}
        for stmt, (defs, uses) in self.def_use.per_statement.items():
            owner = self.owner_of.get(stmt)
            parents = list(self.control[owner].of(stmt)) if owner is not None and stmt != owner else []
            rows[str(stmt)] = {"parents": parents, "defs": sorted(defs), "uses": sorted(uses)}
        return json.dumps(rows, indent=2, sort_keys=False)


def body_entry(owner: A.MethodDecl | A.AdviceDecl) -> Node:
    return ENTRY if owner.number is None else owner.number


def build_model(unit: A.SourceUnit) -> ProgramModel:
    du = compute_def_use(unit)
    cfgs: dict[Node, Cfg] = {}
    control: dict[Node, ControlDeps] = {}
    owner_of: dict[int, Node] = {}
    static_vars: dict[Node, frozenset[str]] = {}
    for owner, body in unit.bodies():
        entry = body_entry(owner)
        cfg = build_cfg(body, entry, header_defs(owner))
        cfgs[entry] = cfg
        control[entry] = control_dependences(cfg)
        if isinstance(entry, int):
            owner_of[entry] = entry
        for s in A.iter_stmts(body):
            owner_of[s.number] = entry
        names = set(du.def_set) | set(du.use_set)
        static_vars[entry] = frozenset(v for v in names if is_static(unit, owner, v))
    return ProgramModel(unit, du, cfgs, control, owner_of, static_vars)
