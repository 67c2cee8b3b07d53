"""Parser and printer for the shared clause grammar.

Clauses are written ``head :- lit1, ..., litn.``, facts ``atom.``,
constraints ``:- body.`` and negation as ``not atom``. ``%`` starts a
comment. Mode declarations are facts ``modeh(schema).`` / ``modeb(schema).``
whose schema may hold placemarkers ``+type``, ``-type`` and ``#type``;
``modeb(not schema)`` declares a negative body schema.
"""

from __future__ import annotations

import re
from typing import List, Optional, Tuple

from .errors import ParseError
from .logic import FALSE, Clause, Const, Fn, Literal, Program, Term, Var
from .modes import ModeDeclaration, Placemarker

__all__ = [
    "parse_term", "parse_atom", "parse_literal", "parse_clause", "parse_program",
    "parse_statements", "parse_modes", "format_term", "format_literal",
    "format_clause", "format_program", "format_mode",
]

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) |
    (?P<nl>\n) |
    (?P<comment>%[^\n]*) |
    (?P<neck>:-) |
    (?P<int>\d+) |
    (?P<var>[A-Z_][A-Za-z0-9_]*) |
    (?P<ident>[a-z][A-Za-z0-9_]*) |
    (?P<punct>[(),.+\-\#])
""", re.VERBOSE)


class _Tok:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"{self.kind}:{self.text}@{self.line}:{self.col}"


def _tokenize(text: str, line0: int = 1, source: Optional[str] = None) -> List[_Tok]:
    toks: List[_Tok] = []
    pos, line, line_start = 0, line0, 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1, source)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str, line0: int = 1, source: Optional[str] = None, placemarkers: bool = False):
        self.toks = _tokenize(text, line0, source)
        self.i = 0
        self.source = source
        self.placemarkers = placemarkers

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: Optional[_Tok] = None):
        tok = tok or self.tok
        found = tok.text or "end of input"
        raise ParseError(f"{msg} (found {found!r})", tok.line, tok.col, self.source)

    def eat(self, text: str) -> _Tok:
        tok = self.tok
        if tok.kind not in ("punct", "neck") or tok.text != text:
            self.error(f"expected {text!r}")
        self.i += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.kind in ("punct", "neck") and self.tok.text == text

    # terms -------------------------------------------------------------
    def term(self) -> Term:
        left = self.primary()
        while self.at("+") or self.at("-"):
            # a sign directly followed by an identifier is a placemarker, never infix
            op = self.tok.text
            nxt = self.toks[self.i + 1]
            if nxt.kind not in ("int", "var", "ident") and nxt.text != "(":
                break
            self.i += 1
            right = self.primary()
            left = Fn(op, (left, right))
        return left

    def primary(self) -> Term:
        tok = self.tok
        if tok.kind == "var":
            self.i += 1
            return Var(tok.text)
        if tok.kind == "int":
            self.i += 1
            return Const(int(tok.text))
        if tok.kind == "ident":
            self.i += 1
            if self.at("("):
                self.i += 1
                args = [self.term()]
                while self.at(","):
                    self.i += 1
                    args.append(self.term())
                self.eat(")")
                return Fn(tok.text, args)
            return Const(tok.text)
        if tok.kind == "punct" and tok.text in "+-#":
            nxt = self.toks[self.i + 1]
            if tok.text == "-" and nxt.kind == "int":
                self.i += 2
                return Const(-int(nxt.text))
            if self.placemarkers and nxt.kind == "ident":
                self.i += 2
                return Placemarker(tok.text, nxt.text)
            self.error("placemarker not allowed here" if nxt.kind == "ident" else "expected a term")
        if self.at("("):
            self.i += 1
            t = self.term()
            self.eat(")")
            return t
        self.error("expected a term")

    def atom(self) -> Fn:
        tok = self.tok
        t = self.term()
        if isinstance(t, Const) and isinstance(t.value, str):
            return Fn(t.value)
        if not isinstance(t, Fn) or t.name in ("+", "-"):
            self.error("expected an atom", tok)
        return t

    def literal(self) -> Literal:
        tok = self.tok
        if tok.kind == "ident" and tok.text == "not" and self.toks[self.i + 1].text != "(":
            self.i += 1
            return Literal(self.atom(), True)
        return Literal(self.atom(), False)

    def body(self) -> Tuple[Literal, ...]:
        lits = [self.literal()]
        while self.at(","):
            self.i += 1
            lits.append(self.literal())
        return tuple(lits)

    def statement(self) -> Tuple[Literal, Tuple[Literal, ...]]:
        """A head literal (possibly negated, for ``not a.`` facts) and a body."""
        if self.at(":-"):
            self.i += 1
            body = self.body()
            self.eat(".")
            return Literal(FALSE), body
        head = self.literal()
        body: Tuple[Literal, ...] = ()
        if self.at(":-"):
            if head.negated:
                self.error("clause heads cannot be negated")
            self.i += 1
            body = self.body()
        self.eat(".")
        return head, body

    def statements(self):
        out = []
        while self.tok.kind != "eof":
            line = self.tok.line
            out.append((line,) + self.statement())
        return out


def parse_term(text: str) -> Term:
    p = _Parser(text, placemarkers=True)
    t = p.term()
    if p.tok.kind != "eof":
        p.error("trailing input")
    return t


def parse_atom(text: str) -> Fn:
    p = _Parser(text, placemarkers=True)
    a = p.atom()
    if p.tok.kind != "eof":
        p.error("trailing input")
    return a


def parse_literal(text: str) -> Literal:
    p = _Parser(text)
    lit = p.literal()
    if p.tok.kind != "eof":
        p.error("trailing input")
    return lit


def parse_statements(text: str, line0: int = 1, source: Optional[str] = None):
    """Parse into ``(line, head_literal, body)`` triples; negative facts allowed."""
    return _Parser(text, line0, source).statements()


def parse_clause(text: str) -> Clause:
    prog = parse_program(text)
    if len(prog) != 1:
        raise ParseError(f"expected exactly one clause, got {len(prog)}")
    return prog.clauses[0]


def parse_program(text: str, source: Optional[str] = None) -> Program:
    clauses = []
    for line, head, body in parse_statements(text, source=source):
        if head.negated:
            raise ParseError("negative facts are only allowed in window files", line, None, source)
        clauses.append(Clause(head.atom, body))
    return Program(tuple(clauses))


def parse_modes(text: str, source: Optional[str] = None) -> List[ModeDeclaration]:
    """Parse ``modeh``/``modeb`` declarations; other statements are rejected."""
    p = _Parser(text, source=source, placemarkers=True)
    modes: List[ModeDeclaration] = []
    while p.tok.kind != "eof":
        tok = p.tok
        if tok.kind != "ident" or tok.text not in ("modeh", "modeb"):
            p.error("expected modeh(...) or modeb(...)")
        p.i += 1
        p.eat("(")
        negated = False
        if p.tok.kind == "ident" and p.tok.text == "not" and p.toks[p.i + 1].text != "(":
            if tok.text == "modeh":
                p.error("modeh schemas cannot be negated")
            p.i += 1
            negated = True
        schema = p.atom()
        p.eat(")")
        p.eat(".")
        modes.append(ModeDeclaration("head" if tok.text == "modeh" else "body", schema, negated))
    return modes


# ---------------------------------------------------------------------------
# printing

def format_term(t) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return str(t.value)
    if isinstance(t, Placemarker):
        return t.kind + t.type
    if isinstance(t, Fn):
        if t.name in ("+", "-") and len(t.args) == 2:
            return format_term(t.args[0]) + t.name + format_term(t.args[1])
        if not t.args:
            return t.name
        return t.name + "(" + ",".join(format_term(a) for a in t.args) + ")"
    raise TypeError(f"not a term: {t!r}")


def format_literal(lit: Literal) -> str:
    return ("not " if lit.negated else "") + format_term(lit.atom)


def format_clause(c: Clause) -> str:
    body = ", ".join(format_literal(l) for l in c.body)
    if c.head == FALSE:
        return ":- " + body + "."
    if not c.body:
        return format_term(c.head) + "."
    return format_term(c.head) + " :- " + body + "."


def format_program(p) -> str:
    return "".join(format_clause(c) + "\n" for c in p)


def format_mode(m: ModeDeclaration) -> str:
    inner = ("not " if m.negated else "") + format_term(m.schema)
    return ("modeh(" if m.kind == "head" else "modeb(") + inner + ")."
