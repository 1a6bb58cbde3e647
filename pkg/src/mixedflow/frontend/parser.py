"""Recursive-descent parser for the mini C-like language.

The grammar covers int and int-pointer variables, ``void``/``int``
procedures with parameters, ``while``/``for``/``if``, calls, assignments
(including ``x = &y``), ``assert`` and ``//`` comments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Var:
    name: str
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class Deref:
    name: str
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class AddrOf:
    name: str
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class Bin:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Cmp:
    op: str
    left: object
    right: object


@dataclass
class Decl:
    kind: str
    name: str
    rhs: object
    line: int
    col: int


@dataclass
class Assign:
    name: str
    rhs: object
    line: int
    col: int


@dataclass
class CallStmt:
    name: str
    args: List[object]
    line: int
    col: int


@dataclass
class While:
    cond: Cmp
    body: List[object]
    line: int


@dataclass
class If:
    cond: Cmp
    then: List[object]
    orelse: List[object]
    line: int


@dataclass
class Assert:
    cond: Cmp
    line: int
    col: int


@dataclass
class Block:
    stmts: List[object]


@dataclass
class GlobalDecl:
    name: str
    kind: str  # "int" or "ptr"
    init: object  # int for ints, target name for pointers
    line: int
    col: int


@dataclass
class ProcDecl:
    name: str
    params: List[Tuple[str, str]]
    body: List[object]
    line: int
    col: int


@dataclass
class ProgramAST:
    globals: List[GlobalDecl] = field(default_factory=list)
    procs: List[ProcDecl] = field(default_factory=list)


class ParseError(Exception):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


class KindError(TypeError):
    """An int/pointer mismatch or arity error; carries a source position."""

    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

KEYWORDS = {"int", "void", "while", "for", "if", "else", "assert", "true", "false"}

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>//[^\n]*)|(?P<num>\d+)|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<op>\+\+|--|==|!=|<=|>=|[-+*&<>=(){};,])"
)


@dataclass(frozen=True)
class Tok:
    kind: str  # num, name, kw, op, eof
    text: str
    line: int
    col: int


def tokenize(src: str) -> List[Tok]:
    toks: List[Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "num":
            toks.append(Tok("num", text, line, col))
        elif kind == "name":
            toks.append(Tok("kw" if text in KEYWORDS else "name", text, line, col))
        elif kind == "op":
            toks.append(Tok("op", text, line, col))
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - line_start + 1))
    return toks


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

REL_OPS = ("<", ">", "<=", ">=", "==", "!=")


class _Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Optional[Tok] = None):
        t = tok or self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"{msg}, found {found}", t.line, t.col)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "kw") and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Tok:
        if not self.at(text):
            self.error(f"expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def name(self) -> Tok:
        if self.tok.kind != "name":
            self.error("expected a name")
        t = self.tok
        self.i += 1
        return t

    # -- top level ---------------------------------------------------------

    def program(self) -> ProgramAST:
        prog = ProgramAST()
        while self.tok.kind != "eof":
            start = self.tok
            if self.at("void") or (self.at("int") and self.peek().kind == "name" and self.peek(2).text == "("):
                self.i += 1
                prog.procs.append(self.proc(start))
            elif self.at("int"):
                prog.globals.append(self.global_decl())
            else:
                self.error("expected a global declaration or a procedure")
        return prog

    def global_decl(self) -> GlobalDecl:
        start = self.expect("int")
        if self.accept("*"):
            n = self.name()
            self.expect("=")
            self.expect("&")
            target = self.name()
            self.expect(";")
            return GlobalDecl(n.text, "ptr", target.text, n.line, n.col)
        n = self.name()
        self.expect("=")
        neg = self.accept("-")
        if self.tok.kind != "num":
            self.error("expected an integer literal")
        v = int(self.tok.text)
        self.i += 1
        self.expect(";")
        return GlobalDecl(n.text, "int", -v if neg else v, start.line, start.col)

    def proc(self, start: Tok) -> ProcDecl:
        n = self.name()
        self.expect("(")
        params: List[Tuple[str, str]] = []
        if not self.at(")"):
            while True:
                self.expect("int")
                kind = "ptr" if self.accept("*") else "int"
                params.append((self.name().text, kind))
                if not self.accept(","):
                    break
        self.expect(")")
        body = self.block()
        return ProcDecl(n.text, params, body, start.line, start.col)

    # -- statements --------------------------------------------------------

    def block(self) -> List[object]:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("expected '}'")
            stmts.append(self.stmt())
        self.expect("}")
        return stmts

    def body(self) -> List[object]:
        if self.at("{"):
            return self.block()
        return [self.stmt()]

    def stmt(self):
        t = self.tok
        if self.at("{"):
            return Block(self.block())
        if self.accept(";"):
            return Block([])
        if self.at("int"):
            decls = self.decls()
            self.expect(";")
            return decls[0] if len(decls) == 1 else Block(decls)
        if self.accept("while"):
            self.expect("(")
            c = self.cond()
            self.expect(")")
            return While(c, self.body(), t.line)
        if self.accept("for"):
            return self.for_stmt(t)
        if self.accept("if"):
            self.expect("(")
            c = self.cond()
            self.expect(")")
            then = self.body()
            orelse = self.body() if self.accept("else") else []
            return If(c, then, orelse, t.line)
        if self.accept("assert"):
            self.expect("(")
            c = self.cond()
            self.expect(")")
            self.expect(";")
            return Assert(c, t.line, t.col)
        if t.kind == "name":
            s = self.simple()
            self.expect(";")
            return s
        self.error("expected a statement")

    def decls(self) -> List[Decl]:
        self.expect("int")
        out = []
        while True:
            kind = "ptr" if self.accept("*") else "int"
            n = self.name()
            self.expect("=")
            out.append(Decl(kind, n.text, self.rhs(), n.line, n.col))
            if not self.accept(","):
                return out
            if self.at("int"):
                self.i += 1

    def simple(self):
        """Assignment, increment/decrement or call (without the trailing ';')."""
        n = self.name()
        if self.accept("("):
            args = []
            if not self.at(")"):
                while True:
                    args.append(self.rhs())
                    if not self.accept(","):
                        break
            self.expect(")")
            return CallStmt(n.text, args, n.line, n.col)
        if self.accept("++"):
            return Assign(n.text, Bin("+", Var(n.text, n.line, n.col), Num(1)), n.line, n.col)
        if self.accept("--"):
            return Assign(n.text, Bin("-", Var(n.text, n.line, n.col), Num(1)), n.line, n.col)
        self.expect("=")
        return Assign(n.text, self.rhs(), n.line, n.col)

    def for_stmt(self, t: Tok):
        self.expect("(")
        init: List[object] = []
        if self.at("int"):
            init = list(self.decls())
        elif not self.at(";"):
            init = [self.simple()]
            while self.accept(","):
                init.append(self.simple())
        self.expect(";")
        c = self.cond() if not self.at(";") else Cmp("!=", Num(1), Num(0))
        self.expect(";")
        step: List[object] = []
        if not self.at(")"):
            step = [self.simple()]
            while self.accept(","):
                step.append(self.simple())
        self.expect(")")
        body = self.body()
        return Block(init + [While(c, body + step, t.line)])

    # -- expressions -------------------------------------------------------

    def rhs(self):
        if self.at("&"):
            self.i += 1
            n = self.name()
            return AddrOf(n.text, n.line, n.col)
        return self.expr()

    def cond(self) -> Cmp:
        if self.accept("true"):
            return Cmp("!=", Num(1), Num(0))
        if self.accept("false"):
            return Cmp("==", Num(1), Num(0))
        left = self.expr()
        if self.tok.kind == "op" and self.tok.text in REL_OPS:
            op = self.tok.text
            self.i += 1
            return Cmp(op, left, self.expr())
        return Cmp("!=", left, Num(0))

    def expr(self):
        e = self.term()
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.i += 1
            e = Bin(op, e, self.term())
        return e

    def term(self):
        e = self.factor()
        while self.at("*"):
            self.i += 1
            e = Bin("*", e, self.factor())
        return e

    def factor(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Num(int(t.text))
        if t.kind == "name":
            self.i += 1
            return Var(t.text, t.line, t.col)
        if self.accept("*"):
            n = self.name()
            return Deref(n.text, n.line, n.col)
        if self.accept("-"):
            inner = self.factor()
            if isinstance(inner, Num):
                return Num(-inner.value)
            return Neg(inner)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        self.error("expected an expression")


def parse_ast(src: str) -> ProgramAST:
    return _Parser(src).program()


NEGATED = {"<": ">=", ">=": "<", ">": "<=", "<=": ">", "==": "!=", "!=": "=="}
