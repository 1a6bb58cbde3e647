"""Name resolution, kind checking and control-flow graph construction.

Program points are numbered consecutively across procedures in declaration
order. The exit point of a structured statement (the join after an ``if``,
the exit of a loop, the return point of a procedure) receives its number
only once all nodes inside the statement have been numbered.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple, Union

from . import parser as P
from .parser import NEGATED, Cmp, KindError, ParseError

# ---------------------------------------------------------------------------
# Resolved expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LVar:
    name: str
    kind: str


@dataclass(frozen=True)
class GVar:
    name: str
    kind: str


@dataclass(frozen=True)
class DerefR:
    ptr: Union[LVar, GVar]


@dataclass(frozen=True)
class AddrLocal:
    name: str


@dataclass(frozen=True)
class AddrGlobal:
    name: str


_PREC = {"+": 1, "-": 1, "*": 2}


def render_expr(e, prec: int = 0) -> str:
    if isinstance(e, P.Num):
        return str(e.value)
    if isinstance(e, (LVar, GVar)):
        return e.name
    if isinstance(e, DerefR):
        return "*" + e.ptr.name
    if isinstance(e, (AddrLocal, AddrGlobal)):
        return "&" + e.name
    if isinstance(e, P.Neg):
        return "-" + render_expr(e.operand, 3)
    if isinstance(e, P.Bin):
        p = _PREC[e.op]
        s = f"{render_expr(e.left, p)} {e.op} {render_expr(e.right, p + 1)}"
        return f"({s})" if p < prec else s
    raise TypeError(f"cannot render {e!r}")


def render_cond(c: Cmp, polarity: bool = True) -> str:
    op = c.op if polarity else NEGATED[c.op]
    return f"{render_expr(c.left)} {op} {render_expr(c.right)}"


# ---------------------------------------------------------------------------
# Edge labels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Skip:
    def render(self) -> str:
        return "skip"


@dataclass(frozen=True)
class AssignL:
    target: Union[LVar, GVar]
    rhs: object

    def render(self) -> str:
        return f"assign({self.target.name} = {render_expr(self.rhs)})"


@dataclass(frozen=True)
class GuardL:
    cond: Cmp
    polarity: bool

    def render(self) -> str:
        return f"guard({render_cond(self.cond, self.polarity)})"


@dataclass(frozen=True)
class CallL:
    proc: str
    args: Tuple[object, ...]

    def render(self) -> str:
        return f"call {self.proc}({', '.join(render_expr(a) for a in self.args)})"


@dataclass(frozen=True)
class AssertL:
    cond: Cmp
    site: int

    def render(self) -> str:
        return f"assert({render_cond(self.cond)})"


@dataclass(frozen=True)
class Edge:
    src: int
    label: object
    dst: int


@dataclass(frozen=True)
class AssertSite:
    index: int
    node: int
    line: int
    cond: Cmp
    proc: str

    def render(self) -> str:
        return f"line {self.line}: assert({render_cond(self.cond)})"


@dataclass
class ProcCFG:
    name: str
    params: List[Tuple[str, str]]
    kinds: Dict[str, str]
    st: int
    ret: int
    nodes: List[int]
    edges: List[Edge]
    address_taken: Set[str]
    widening_points: Set[int] = field(default_factory=set)
    in_edges: Dict[int, List[Edge]] = field(default_factory=dict)
    out_edges: Dict[int, List[Edge]] = field(default_factory=dict)

    @property
    def local_names(self) -> List[str]:
        return sorted(self.kinds)


@dataclass(frozen=True)
class GlobalInfo:
    name: str
    kind: str
    init: object  # int for int globals, target name for pointer globals


@dataclass
class Program:
    globals: List[GlobalInfo]
    procs: Dict[str, ProcCFG]
    thread_entries: List[str]
    asserts: List[AssertSite]
    node_proc: Dict[int, str]
    literals: Set[int]

    @property
    def global_kinds(self) -> Dict[str, str]:
        return {g.name: g.kind for g in self.globals}

    def default_thresholds(self) -> List[int]:
        """Integer literals from comparison guards, closed under 0 (infinities added by the widening)."""
        return sorted(self.literals | {0})


# ---------------------------------------------------------------------------
# Builder
# ---------------------------------------------------------------------------


class _Hole:
    """An exit point whose number is assigned once its statement is complete."""

    __slots__ = ("node",)

    def __init__(self):
        self.node: Optional[int] = None


class _ProcBuilder:
    def __init__(self, prog: "_ProgramBuilder", decl: P.ProcDecl):
        self.prog = prog
        self.decl = decl
        self.kinds: Dict[str, str] = {}
        self.address_taken: Set[str] = set()
        self.edges: List[list] = []
        self.nodes: List[int] = []

    # -- numbering ---------------------------------------------------------

    def new_node(self) -> int:
        n = self.prog.counter
        self.prog.counter += 1
        self.nodes.append(n)
        return n

    def resolve(self, hole: _Hole) -> int:
        hole.node = self.new_node()
        return hole.node

    def edge(self, u: int, label, v) -> None:
        self.edges.append([u, label, v])

    # -- scoping -----------------------------------------------------------

    def declare(self, scope: Dict[str, str], name: str, kind: str, line: int, col: int) -> None:
        if name in self.kinds:
            raise ParseError(f"duplicate declaration of {name!r} in {self.decl.name}", line, col)
        if name in self.prog.global_kinds:
            raise ParseError(f"local {name!r} shadows a global", line, col)
        self.kinds[name] = kind
        scope[name] = kind

    def lookup(self, scopes: List[Dict[str, str]], name: str, line: int, col: int):
        for s in reversed(scopes):
            if name in s:
                return LVar(name, s[name])
        if name in self.prog.global_kinds:
            return GVar(name, self.prog.global_kinds[name])
        raise ParseError(f"undeclared variable {name!r}", line, col)

    # -- expressions -------------------------------------------------------

    def int_expr(self, e, scopes, line: int, col: int):
        if isinstance(e, P.Num):
            return e
        if isinstance(e, P.Var):
            v = self.lookup(scopes, e.name, e.line, e.col)
            if v.kind != "int":
                raise KindError(f"pointer {e.name!r} used as an int", e.line, e.col)
            return v
        if isinstance(e, P.Deref):
            v = self.lookup(scopes, e.name, e.line, e.col)
            if v.kind != "ptr":
                raise KindError(f"cannot dereference int {e.name!r}", e.line, e.col)
            return DerefR(v)
        if isinstance(e, P.Neg):
            return P.Neg(self.int_expr(e.operand, scopes, line, col))
        if isinstance(e, P.Bin):
            return P.Bin(e.op, self.int_expr(e.left, scopes, line, col), self.int_expr(e.right, scopes, line, col))
        if isinstance(e, P.AddrOf):
            raise KindError(f"address &{e.name} used as an int", e.line, e.col)
        raise TypeError(e)

    def ptr_expr(self, e, scopes, line: int, col: int):
        if isinstance(e, P.AddrOf):
            v = self.lookup(scopes, e.name, e.line, e.col)
            if v.kind != "int":
                raise KindError(f"pointers to pointers are not supported (&{e.name})", e.line, e.col)
            if isinstance(v, LVar):
                self.address_taken.add(e.name)
                return AddrLocal(e.name)
            return AddrGlobal(e.name)
        if isinstance(e, P.Var):
            v = self.lookup(scopes, e.name, e.line, e.col)
            if v.kind != "ptr":
                raise KindError(f"int {e.name!r} used as a pointer", e.line, e.col)
            return v
        raise KindError("expected a pointer expression", line, col)

    def rhs(self, kind: str, e, scopes, line: int, col: int):
        if kind == "ptr":
            return self.ptr_expr(e, scopes, line, col)
        return self.int_expr(e, scopes, line, col)

    def cond(self, c: Cmp, scopes, line: int) -> Cmp:
        return Cmp(c.op, self.int_expr(c.left, scopes, line, 0), self.int_expr(c.right, scopes, line, 0))

    # -- statements --------------------------------------------------------

    def build(self) -> ProcCFG:
        scope: Dict[str, str] = {}
        params = []
        for name, kind in self.decl.params:
            self.declare(scope, name, kind, self.decl.line, self.decl.col)
            params.append((name, kind))
        self.st = self.new_node()
        ret = _Hole()
        self.seq(self.decl.body, self.st, ret, [scope])
        ret_node = self.resolve(ret)
        edges = [Edge(u, lbl, v.node if isinstance(v, _Hole) else v) for u, lbl, v in self.edges]
        cfg = ProcCFG(self.decl.name, params, dict(self.kinds), self.st, ret_node, sorted(self.nodes), edges,
                      set(self.address_taken))
        for n in cfg.nodes:
            cfg.in_edges[n] = []
            cfg.out_edges[n] = []
        for e in edges:
            cfg.out_edges[e.src].append(e)
            cfg.in_edges[e.dst].append(e)
        cfg.widening_points = _widening_points(cfg)
        return cfg

    def seq(self, stmts, u: int, exit, scopes):
        if not stmts:
            if exit is not None:
                self.edge(u, Skip(), exit)
                return exit
            return u
        scopes = scopes + [{}]
        for i, s in enumerate(stmts):
            u = self.stmt(s, u, exit if i == len(stmts) - 1 else None, scopes)
        return u

    def target(self, exit):
        return exit if exit is not None else self.new_node()

    def stmt(self, s, u: int, exit, scopes):
        if isinstance(s, P.Block):
            return self.seq(s.stmts, u, exit, scopes)
        if isinstance(s, P.Decl):
            rhs = self.rhs(s.kind, s.rhs, scopes, s.line, s.col)
            self.declare(scopes[-1], s.name, s.kind, s.line, s.col)
            v = self.target(exit)
            self.edge(u, AssignL(LVar(s.name, s.kind), rhs), v)
            return v
        if isinstance(s, P.Assign):
            tgt = self.lookup(scopes, s.name, s.line, s.col)
            rhs = self.rhs(tgt.kind, s.rhs, scopes, s.line, s.col)
            v = self.target(exit)
            self.edge(u, AssignL(tgt, rhs), v)
            return v
        if isinstance(s, P.CallStmt):
            callee = self.prog.proc_decls.get(s.name)
            if callee is None:
                raise ParseError(f"call to undeclared procedure {s.name!r}", s.line, s.col)
            if len(callee.params) != len(s.args):
                raise KindError(f"{s.name} expects {len(callee.params)} argument(s), got {len(s.args)}", s.line, s.col)
            args = tuple(self.rhs(kind, a, scopes, s.line, s.col) for (_, kind), a in zip(callee.params, s.args))
            v = self.target(exit)
            self.edge(u, CallL(s.name, args), v)
            return v
        if isinstance(s, P.Assert):
            c = self.cond(s.cond, scopes, s.line)
            site = self.prog.add_assert(u, s.line, c, self.decl.name)
            v = self.target(exit)
            self.edge(u, AssertL(c, site), v)
            return v
        if isinstance(s, P.If):
            c = self.cond(s.cond, scopes, s.line)
            self.prog.note_literals(c)
            join = exit if exit is not None else _Hole()
            for branch, pol in ((s.then, True), (s.orelse, False)):
                if branch:
                    b = self.new_node()
                    self.edge(u, GuardL(c, pol), b)
                    self.seq(branch, b, join, scopes)
                else:
                    self.edge(u, GuardL(c, pol), join)
            return join if exit is not None else self.resolve(join)
        if isinstance(s, P.While):
            c = self.cond(s.cond, scopes, s.line)
            self.prog.note_literals(c)
            head = u
            if u == self.st:
                head = self.new_node()
                self.edge(u, Skip(), head)
            out = exit if exit is not None else _Hole()
            if s.body:
                b = self.new_node()
                self.edge(head, GuardL(c, True), b)
                self.seq(s.body, b, head, scopes)
            else:
                self.edge(head, GuardL(c, True), head)
            self.edge(head, GuardL(c, False), out)
            return out if exit is not None else self.resolve(out)
        raise TypeError(s)


def _widening_points(cfg: ProcCFG) -> Set[int]:
    """Targets of DFS back edges plus the successors of call edges."""
    wp: Set[int] = set()
    color: Dict[int, int] = {}
    stack = [(cfg.st, iter(cfg.out_edges[cfg.st]))]
    color[cfg.st] = 1
    while stack:
        n, it = stack[-1]
        e = next(it, None)
        if e is None:
            color[n] = 2
            stack.pop()
            continue
        c = color.get(e.dst, 0)
        if c == 1:
            wp.add(e.dst)
        elif c == 0:
            color[e.dst] = 1
            stack.append((e.dst, iter(cfg.out_edges[e.dst])))
    for e in cfg.edges:
        if isinstance(e.label, CallL):
            wp.add(e.dst)
    return wp


class _ProgramBuilder:
    def __init__(self, ast: P.ProgramAST):
        self.ast = ast
        self.counter = 0
        self.global_kinds: Dict[str, str] = {}
        self.proc_decls: Dict[str, P.ProcDecl] = {}
        self.asserts: List[AssertSite] = []
        self.literals: Set[int] = set()

    def add_assert(self, node: int, line: int, cond: Cmp, proc: str) -> int:
        idx = len(self.asserts)
        self.asserts.append(AssertSite(idx, node, line, cond, proc))
        return idx

    def note_literals(self, c: Cmp) -> None:
        for side in (c.left, c.right):
            if isinstance(side, P.Num):
                self.literals.add(side.value)

    def build(self) -> Program:
        globals_: List[GlobalInfo] = []
        for g in self.ast.globals:
            if g.name in self.global_kinds:
                raise ParseError(f"duplicate global {g.name!r}", g.line, g.col)
            if g.kind == "ptr":
                if self.global_kinds.get(g.init) != "int":
                    raise KindError(f"pointer global {g.name!r} must point to a declared int global", g.line, g.col)
            self.global_kinds[g.name] = g.kind
            globals_.append(GlobalInfo(g.name, g.kind, g.init))
        for p in self.ast.procs:
            if p.name in self.proc_decls:
                raise ParseError(f"duplicate procedure {p.name!r}", p.line, p.col)
            if p.name in self.global_kinds:
                raise ParseError(f"procedure {p.name!r} clashes with a global", p.line, p.col)
            self.proc_decls[p.name] = p
        procs: Dict[str, ProcCFG] = {}
        for p in self.ast.procs:
            procs[p.name] = _ProcBuilder(self, p).build()
        entries = [n for n in procs if n == "main"] + [n for n in procs if n.startswith("thread")]
        for n in entries:
            if procs[n].params:
                d = self.proc_decls[n]
                raise KindError(f"thread entry {n!r} must not take parameters", d.line, d.col)
        node_proc = {n: name for name, cfg in procs.items() for n in cfg.nodes}
        return Program(globals_, procs, entries, self.asserts, node_proc, self.literals)


def build_program(ast: P.ProgramAST) -> Program:
    return _ProgramBuilder(ast).build()


def parse(source: str) -> Program:
    """Parse source text into a :class:`Program` with one CFG per procedure."""
    return build_program(P.parse_ast(source))


__all__ = [
    "parse", "build_program", "Program", "ProcCFG", "GlobalInfo", "Edge", "AssertSite",
    "Skip", "AssignL", "GuardL", "CallL", "AssertL", "LVar", "GVar", "DerefR", "AddrLocal", "AddrGlobal",
    "render_expr", "render_cond",
]
