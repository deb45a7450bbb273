"""Text format for algorithms (``.asm``) with a round-tripping printer.

    @generated                      # only needed for '$' names
    use arithmetic
    enum Msg { alarm }
    fn b/0 dynamic relational in 1
    fn out/0 dynamic out
    fn g/1 static intrinsic numeric
    table g { (1) -> 5 }
    init b := true
    program
      if b then par { out := alarm ; b := false }

Rules: ``skip``, ``par { R ; ... }``, ``if t then R [else R]``, ``f(t, ...) := t``.
Terms are prefix applications; the logic symbols are true, false, nil,
eq, and, or, not, ite.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .algorithm import Algorithm
from .backends import Arithmetic, EnumBackend
from .core import (
    FALSE, LOGIC_SYMBOLS, NIL, TRUE, ASMError, Assign, Cond, EnumValue, Logic, Par, Rule,
    Symbol, Table, Term, Value, Vocabulary, args_key, is_reserved, value_key,
)

KEYWORDS = {"if", "then", "else", "par", "skip", "fn", "table", "init", "program", "use",
            "enum"} | set(LOGIC_SYMBOLS)
FLAGS = {"static", "dynamic", "intrinsic", "extrinsic", "relational", "numeric", "in", "out"}


class ParseError(ASMError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class CheckError(ASMError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.message = message
        self.line = line
        self.col = col


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<op>:=|->)
  | (?P<directive>@[A-Za-z_]+)
  | (?P<num>[0-9]+)
  | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<punct>[(){},;/])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str  # num | ident | op | punct | directive | eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.generated = False
        self.backends: List = []
        self.decls: List[Symbol] = []
        self.tables: Dict[str, Table] = {}
        self.init: Dict = {}
        self.vocab = Vocabulary()
        self.elements: Dict[str, EnumValue] = {}

    # -- token helpers -------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, expected: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"expected {expected}, found {found}", tok.line, tok.col)

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("ident", "op", "punct", "directive")

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(repr(text))
        return self.advance()

    def expect_ident(self) -> Token:
        if self.tok.kind != "ident":
            self.error("identifier")
        return self.advance()

    def expect_num(self) -> int:
        if self.tok.kind != "num":
            self.error("number")
        return int(self.advance().text)

    def new_name(self, tok: Token) -> str:
        name = tok.text
        if name in KEYWORDS:
            raise CheckError(f"{name} is a reserved word", tok.line, tok.col)
        if is_reserved(name) and not self.generated:
            raise CheckError(f"{name} uses the reserved '$' namespace", tok.line, tok.col)
        if name in self.vocab:
            raise CheckError(f"{name} is already declared", tok.line, tok.col)
        return name

    def refresh_vocab(self):
        syms = [s for b in self.backends for s in b.symbols] + self.decls
        self.vocab = Vocabulary(syms, numerals=any(b.numerals for b in self.backends))

    # -- unit ----------------------------------------------------------
    def unit(self) -> Algorithm:
        if self.tok.kind == "directive":
            if self.tok.text != "@generated":
                self.error("@generated")
            self.advance()
            self.generated = True
        while not self.at("program"):
            t = self.tok
            if self.at("use"):
                self.use()
            elif self.at("enum"):
                self.enum()
            elif self.at("fn"):
                self.fn()
            elif self.at("table"):
                self.table()
            elif self.at("init"):
                self.init_line()
            else:
                self.error("declaration or 'program'", t)
        self.advance()
        for s in self.decls:
            if s.static and s.intrinsic and s.name not in self.tables:
                raise CheckError(f"intrinsic static {s.name} has no table")
        program = self.rule()
        if self.tok.kind != "eof":
            self.error("end of input")
        return Algorithm(tuple(self.decls), program, tuple(self.backends), self.tables, self.init)

    def use(self):
        self.advance()
        tok = self.expect_ident()
        if tok.text != "arithmetic":
            raise CheckError(f"unknown datastructure {tok.text}", tok.line, tok.col)
        if any(isinstance(b, Arithmetic) for b in self.backends):
            raise CheckError("arithmetic used twice", tok.line, tok.col)
        if self.decls:
            raise CheckError("datastructures must precede fn declarations", tok.line, tok.col)
        self.backends.append(Arithmetic())
        self.refresh_vocab()

    def enum(self):
        self.advance()
        tok = self.expect_ident()
        name = self.new_name(tok)
        if self.decls:
            raise CheckError("datastructures must precede fn declarations", tok.line, tok.col)
        self.expect("{")
        elems = []
        while True:
            et = self.expect_ident()
            e = self.new_name(et)
            if e in elems or e == name:
                raise CheckError(f"duplicate element {e}", et.line, et.col)
            elems.append(e)
            if self.at(","):
                self.advance()
                continue
            break
        self.expect("}")
        backend = EnumBackend(name, tuple(elems))
        self.backends.append(backend)
        for e in elems:
            self.elements[e] = backend.value(e)
        self.refresh_vocab()

    def fn(self):
        self.advance()
        tok = self.expect_ident()
        name = self.new_name(tok)
        self.expect("/")
        arity = self.expect_num()
        flags = {"static": False, "dynamic": False, "intrinsic": False, "extrinsic": False,
                 "relational": False, "numeric": False}
        io, pos = None, 0
        while self.tok.kind == "ident" and self.tok.text in FLAGS:
            ft = self.advance()
            if ft.text == "in":
                io, pos = "in", self.expect_num()
            elif ft.text == "out":
                io = "out"
            else:
                flags[ft.text] = True
        if flags["static"] and flags["dynamic"]:
            raise CheckError(f"{name} is both static and dynamic", tok.line, tok.col)
        if flags["intrinsic"] and flags["extrinsic"]:
            raise CheckError(f"{name} is both intrinsic and extrinsic", tok.line, tok.col)
        static = flags["static"] or flags["intrinsic"] or flags["extrinsic"]
        if static and flags["dynamic"]:
            raise CheckError(f"only static symbols are intrinsic/extrinsic", tok.line, tok.col)
        if flags["relational"] and flags["numeric"]:
            raise CheckError(f"{name} is both relational and numeric", tok.line, tok.col)
        if io is not None:
            if static or arity != 0:
                raise CheckError(f"input/output variable {name} must be dynamic and nullary",
                                 tok.line, tok.col)
            if io == "out" and (flags["relational"] or flags["numeric"]):
                raise CheckError(f"output variable {name} must have default nil",
                                 tok.line, tok.col)
            if io == "out" and any(s.io == "out" for s in self.decls):
                raise CheckError("more than one output variable", tok.line, tok.col)
            if io == "in":
                used = {s.position for s in self.decls if s.io == "in"}
                if pos != len(used) + 1:
                    raise CheckError(f"input position {pos} out of order", tok.line, tok.col)
        sym = Symbol(name, arity, static=static, intrinsic=not flags["extrinsic"],
                     relational=flags["relational"], numerical=flags["numeric"], io=io,
                     position=pos)
        self.decls.append(sym)
        self.refresh_vocab()

    def value(self) -> Value:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return int(t.text)
        if t.kind == "ident":
            self.advance()
            if t.text == "true":
                return TRUE
            if t.text == "false":
                return FALSE
            if t.text == "nil":
                return NIL
            if t.text in self.elements:
                return self.elements[t.text]
            raise CheckError(f"unknown value {t.text}", t.line, t.col)
        self.error("value")

    def declared(self, tok: Token) -> Symbol:
        sym = self.vocab.get(tok.text)
        if sym is None or tok.text not in {s.name for s in self.decls}:
            raise CheckError(f"{tok.text} is not a declared fn", tok.line, tok.col)
        return sym

    def table(self):
        self.advance()
        tok = self.expect_ident()
        sym = self.declared(tok)
        if not (sym.static and sym.intrinsic):
            raise CheckError(f"table for non-intrinsic {sym.name}", tok.line, tok.col)
        if sym.name in self.tables:
            raise CheckError(f"second table for {sym.name}", tok.line, tok.col)
        total = False
        if self.at("default"):
            self.advance()
            total = True
        self.expect("{")
        entries: Dict = {}
        if not self.at("}"):
            while True:
                et = self.tok
                self.expect("(")
                args = []
                if not self.at(")"):
                    args.append(self.value())
                    while self.at(","):
                        self.advance()
                        args.append(self.value())
                self.expect(")")
                self.expect("->")
                v = self.value()
                if len(args) != sym.arity:
                    raise CheckError(f"table entry arity mismatch for {sym.name}", et.line, et.col)
                if tuple(args) in entries:
                    raise CheckError(f"duplicate table entry for {sym.name}", et.line, et.col)
                entries[tuple(args)] = v
                if self.at(";"):
                    self.advance()
                    continue
                break
        self.expect("}")
        self.tables[sym.name] = Table(entries, total)

    def init_line(self):
        self.advance()
        tok = self.expect_ident()
        sym = self.declared(tok)
        if sym.static or sym.io is not None:
            raise CheckError(f"init of {sym.name}: only non-io dynamic symbols", tok.line, tok.col)
        args = []
        if self.at("("):
            self.advance()
            args.append(self.value())
            while self.at(","):
                self.advance()
                args.append(self.value())
            self.expect(")")
        if len(args) != sym.arity:
            raise CheckError(f"{sym.name} expects {sym.arity} arguments", tok.line, tok.col)
        self.expect(":=")
        self.init[(sym.name, tuple(args))] = self.value()

    # -- program -------------------------------------------------------
    def term(self) -> Term:
        t = self.tok
        if t.kind not in ("ident", "num"):
            self.error("term")
        self.advance()
        if t.kind == "ident" and t.text in KEYWORDS - set(LOGIC_SYMBOLS):
            self.error("term", t)
        args = []
        if self.at("("):
            self.advance()
            args.append(self.term())
            while self.at(","):
                self.advance()
                args.append(self.term())
            self.expect(")")
        sym = self.vocab.get(t.text)
        if sym is None:
            raise CheckError(f"undeclared symbol {t.text}", t.line, t.col)
        if len(args) != sym.arity:
            raise CheckError(f"{t.text} expects {sym.arity} arguments, got {len(args)}",
                             t.line, t.col)
        return Term(t.text, tuple(args))

    def guard(self) -> Term:
        t = self.tok
        g = self.term()
        sym = self.vocab[g.head]
        if not sym.relational and g.head != "ite":
            raise CheckError(f"guard {g.head}(...) is not Boolean", t.line, t.col)
        return g

    def rule(self) -> Rule:
        t = self.tok
        if self.at("skip"):
            self.advance()
            return Par(())
        if self.at("par"):
            self.advance()
            self.expect("{")
            rules = [self.rule()]
            while self.at(";"):
                self.advance()
                rules.append(self.rule())
            self.expect("}")
            return Par(tuple(rules))
        if self.at("if"):
            self.advance()
            links = []
            orelse: Rule = Par(())
            while True:
                g = self.guard()
                self.expect("then")
                links.append((g, self.rule()))
                if not self.at("else"):
                    break
                self.advance()
                if not self.at("if"):
                    orelse = self.rule()
                    break
                self.advance()  # else-if: continue the chain without recursing
            for g, then in reversed(links):
                orelse = Cond(g, then, orelse)
            return orelse
        if t.kind != "ident":
            self.error("rule")
        lhs = self.term()
        sym = self.vocab[lhs.head]
        if sym.static:
            raise CheckError(f"cannot assign to static {lhs.head}", t.line, t.col)
        self.expect(":=")
        rhs = self.term()
        return Assign(lhs.head, lhs.args, rhs)


def parse(text: str) -> Algorithm:
    """Parse and check an ``.asm`` unit."""
    return _Parser(text).unit()


# ---------------------------------------------------------------------------
# Printer


def format_value(v: Value) -> str:
    if isinstance(v, Logic):
        return v.value
    if isinstance(v, EnumValue):
        return v.name
    return str(v)


def format_term(t: Term) -> str:
    if not t.args:
        return t.head
    return f"{t.head}({', '.join(format_term(a) for a in t.args)})"


def _lhs(a: Assign) -> str:
    return format_term(Term(a.target, a.args))


def format_rule(rule: Rule, indent: int = 0, in_then: bool = False) -> str:
    """Canonical layout.  ``in_then`` marks positions followed by an outer
    ``else``, where an inner conditional must print its own ``else``."""
    pad = "  " * indent
    if isinstance(rule, Assign):
        return f"{pad}{_lhs(rule)} := {format_term(rule.rhs)}"
    if isinstance(rule, Par):
        if not rule.rules:
            return f"{pad}skip"
        body = " ;\n".join(format_rule(r, indent + 1) for r in rule.rules)
        return f"{pad}par {{\n{body}\n{pad}}}"
    return pad + _format_cond(rule, indent, in_then)


def _format_cond(rule: Cond, indent: int, in_then: bool) -> str:
    pad = "  " * indent
    parts = []
    while True:
        explicit_else = in_then or rule.orelse != Par(())
        parts.append(f"if {format_term(rule.guard)} then\n"
                     + format_rule(rule.then, indent + 1, in_then=explicit_else))
        if not explicit_else:
            return "".join(parts)
        if not isinstance(rule.orelse, Cond):
            break
        parts.append(f"\n{pad}else ")
        rule = rule.orelse
    parts.append(f"\n{pad}else\n" + format_rule(rule.orelse, indent + 1, in_then))
    return "".join(parts)


def _format_decl(s: Symbol) -> str:
    parts = [f"fn {s.name}/{s.arity}", "static" if s.static else "dynamic"]
    if s.static:
        parts.append("intrinsic" if s.intrinsic else "extrinsic")
    if s.relational:
        parts.append("relational")
    if s.numerical:
        parts.append("numeric")
    if s.io == "in":
        parts.append(f"in {s.position}")
    elif s.io == "out":
        parts.append("out")
    return " ".join(parts)


def print_unit(alg: Algorithm) -> str:
    """Canonical text of an algorithm; ``parse(print_unit(a)) == a``."""
    lines = []
    if alg.has_reserved():
        lines.append("@generated")
    for b in alg.backends:
        if isinstance(b, Arithmetic):
            lines.append("use arithmetic")
        else:
            lines.append(f"enum {b.datatype} {{ {', '.join(b.elements_)} }}")
    for s in alg.decls:
        lines.append(_format_decl(s))
    for s in alg.decls:
        table = alg.tables.get(s.name)
        if table is None:
            continue
        entries = sorted(table.entries.items(), key=lambda kv: args_key(kv[0]))
        body = " ; ".join(f"({', '.join(map(format_value, k))}) -> {format_value(v)}"
                          for k, v in entries)
        head = f"table {s.name}" + (" default" if table.total else "")
        lines.append(f"{head} {{ {body} }}" if body else f"{head} {{ }}")
    for (name, args), v in sorted(alg.init.items(),
                                  key=lambda kv: (kv[0][0], args_key(kv[0][1]))):
        lhs = name + (f"({', '.join(map(format_value, args))})" if args else "")
        lines.append(f"init {lhs} := {format_value(v)}")
    lines.append("program")
    lines.append(format_rule(alg.program, 1))
    return "\n".join(lines) + "\n"
