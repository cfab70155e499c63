"""Tokenizer and recursive-descent parsers for the concrete grammar.

Grammar (``#`` starts a line comment everywhere):

* terms:       ``IDENT | null``  (identifiers may carry prime suffixes)
* atoms:       ``emp | x -> t | x -/> | t == t | t != t`` joined by ``*``
* quantified heap: ``exists x1 x2 . <atoms>``
* assertion:   disjuncts joined by ``\\/``; the literal ``false`` is the
  empty disjunction
* commands:    ``skip``, ``x := t``, ``x := *``, ``assume(<pure atoms>)``,
  ``local x { C }``, ``C ; C``, ``choice { C } or { C }``, ``star { C }``,
  ``x := alloc()``, ``free(x)``, ``x := [y]``, ``[x] := t``, ``error``,
  plus ``{ C }`` grouping
* sugar:       ``if (B) { C } else { C }``, ``while (B) { C }``,
  ``assert(B)``, ``x := malloc()``
* triple file: ``[ P ] C [ ok: Q ]`` or ``[ P ] C [ er: Q ]``
* wpo query:   ``P ; C ; ok`` or ``P ; C ; er``
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    NULL, Alloc, Assign, Assume, Assertion, AssertCmd, Choice, Emp,
    ErrorCmd, Exit, Free, Havoc, If, Load, Local, Malloc, NegPoints, PointsTo,
    PureAtom, QuantifiedHeap, Seq, Skip, Star, Store, SugaredCommand,
    SymbolicHeap, Term, Triple, Var, While,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int,
                 expected: tuple[str, ...] = ()):
        self.message = message
        self.line = line
        self.col = col
        self.expected = expected
        loc = f"{line}:{col}"
        if expected:
            message = f"{message} (expected one of: {', '.join(expected)})"
        super().__init__(f"{loc}: {message}")


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident' | 'op' | 'eof'
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""(?P<ws>[ \t\r]+)
      | (?P<comment>\#[^\n]*)
      | (?P<nl>\n)
      | (?P<op>:=|->|-/>|==|!=|\\/|[*.;:(){}\[\]])
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*'*)
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(lexeme)
        else:
            tokens.append(Token(kind, lexeme, line, col))
            col += len(lexeme)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


_KEYWORDS = {
    "null", "emp", "exists", "false", "skip", "assume", "local", "choice",
    "or", "star", "alloc", "free", "error", "if", "else", "while", "assert",
    "malloc", "ok", "er",
}


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    # -- token plumbing ----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind != "eof"

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.text != text or t.kind == "eof":
            raise ParseError(f"got {t.text!r}" if t.kind != "eof" else "unexpected end of input",
                             t.line, t.col, (text,))
        return self.advance()

    def expect_eof(self) -> None:
        t = self.peek()
        if t.kind != "eof":
            raise ParseError(f"trailing input {t.text!r}", t.line, t.col, ("end of input",))

    def name(self) -> Var:
        t = self.peek()
        if t.kind != "ident" or t.text in _KEYWORDS:
            raise ParseError(f"got {t.text!r}" if t.kind != "eof" else "unexpected end of input",
                             t.line, t.col, ("identifier",))
        self.advance()
        return Var(t.text)

    # -- assertions ---------------------------------------------------------

    def term(self) -> Term:
        if self.at("null"):
            self.advance()
            return NULL
        return self.name()

    def atom(self):
        t = self.peek()
        if self.at("emp"):
            self.advance()
            return Emp()
        lhs = self.term()
        op = self.peek()
        if op.text == "->":
            if not isinstance(lhs, Var):
                raise ParseError("points-to source must be a variable", t.line, t.col)
            self.advance()
            return PointsTo(lhs, self.term())
        if op.text == "-/>":
            if not isinstance(lhs, Var):
                raise ParseError("negative-atom source must be a variable", t.line, t.col)
            self.advance()
            return NegPoints(lhs)
        if op.text == "==":
            self.advance()
            return PureAtom("eq", lhs, self.term())
        if op.text == "!=":
            self.advance()
            return PureAtom("neq", lhs, self.term())
        raise ParseError(f"got {op.text!r}" if op.kind != "eof" else "unexpected end of input",
                         op.line, op.col, ("->", "-/>", "==", "!="))

    def symbolic_heap(self) -> SymbolicHeap:
        atoms = [self.atom()]
        while self.at("*"):
            self.advance()
            atoms.append(self.atom())
        return SymbolicHeap(tuple(atoms))

    def quantified_heap(self) -> QuantifiedHeap:
        binders: tuple[Var, ...] = ()
        if self.at("exists"):
            self.advance()
            names = [self.name()]
            while self.peek().kind == "ident" and self.peek().text not in _KEYWORDS:
                names.append(self.name())
            self.expect(".")
            binders = tuple(names)
        return QuantifiedHeap(binders, self.symbolic_heap())

    def assertion(self) -> Assertion:
        if self.at("false"):
            self.advance()
            return Assertion(())
        disjuncts = [self.quantified_heap()]
        while self.at("\\/"):
            self.advance()
            disjuncts.append(self.quantified_heap())
        return Assertion(tuple(disjuncts))

    # -- commands -----------------------------------------------------------

    def pure_heap(self) -> SymbolicHeap:
        h = self.symbolic_heap()
        if not h.is_pure:
            t = self.peek()
            raise ParseError("condition must be a pure formula", t.line, t.col)
        return h

    def braced(self) -> SugaredCommand:
        self.expect("{")
        c = self.command()
        self.expect("}")
        return c

    def command(self, stop_at_exit: bool = False) -> SugaredCommand:
        parts = [self.basic_command()]
        while self.at(";"):
            if stop_at_exit and self.peek(1).text in ("ok", "er") \
                    and self.peek(2).kind == "eof":
                break
            self.advance()
            parts.append(self.basic_command())
        cmd = parts[-1]
        for p in reversed(parts[:-1]):
            cmd = Seq(p, cmd)
        return cmd

    def basic_command(self) -> SugaredCommand:
        t = self.peek()
        if t.text == "{":
            return self.braced()
        if t.text == "skip":
            self.advance()
            return Skip()
        if t.text == "error":
            self.advance()
            return ErrorCmd()
        if t.text == "assume":
            self.advance()
            self.expect("(")
            cond = self.pure_heap()
            self.expect(")")
            return Assume(cond)
        if t.text == "assert":
            self.advance()
            self.expect("(")
            cond = self.pure_heap()
            self.expect(")")
            return AssertCmd(cond)
        if t.text == "free":
            self.advance()
            self.expect("(")
            x = self.name()
            self.expect(")")
            return Free(x)
        if t.text == "local":
            self.advance()
            x = self.name()
            return Local(x, self.braced())
        if t.text == "choice":
            self.advance()
            left = self.braced()
            self.expect("or")
            right = self.braced()
            return Choice(left, right)
        if t.text == "star":
            self.advance()
            return Star(self.braced())
        if t.text == "if":
            self.advance()
            self.expect("(")
            cond = self.pure_heap()
            self.expect(")")
            then = self.braced()
            self.expect("else")
            orelse = self.braced()
            return If(cond, then, orelse)
        if t.text == "while":
            self.advance()
            self.expect("(")
            cond = self.pure_heap()
            self.expect(")")
            return While(cond, self.braced())
        if t.text == "[":
            self.advance()
            x = self.name()
            self.expect("]")
            self.expect(":=")
            return Store(x, self.term())
        if t.kind == "ident" and t.text not in _KEYWORDS:
            x = self.name()
            self.expect(":=")
            return self.assignment_rhs(x)
        raise ParseError(f"got {t.text!r}" if t.kind != "eof" else "unexpected end of input",
                         t.line, t.col, ("command",))

    def assignment_rhs(self, x: Var) -> SugaredCommand:
        t = self.peek()
        if t.text == "*":
            self.advance()
            return Havoc(x)
        if t.text == "alloc":
            self.advance()
            self.expect("(")
            self.expect(")")
            return Alloc(x)
        if t.text == "malloc":
            self.advance()
            self.expect("(")
            self.expect(")")
            return Malloc(x)
        if t.text == "[":
            self.advance()
            y = self.name()
            self.expect("]")
            return Load(x, y)
        return Assign(x, self.term())

    # -- triples and queries --------------------------------------------------

    def exit_condition(self) -> Exit:
        t = self.peek()
        if t.text == "ok":
            self.advance()
            return Exit.OK
        if t.text == "er":
            self.advance()
            return Exit.ER
        raise ParseError(f"got {t.text!r}" if t.kind != "eof" else "unexpected end of input",
                         t.line, t.col, ("ok", "er"))

    def triple(self) -> Triple:
        self.expect("[")
        pre = self.assertion()
        self.expect("]")
        cmd = self.command()
        self.expect("[")
        exit_ = self.exit_condition()
        self.expect(":")
        post = self.assertion()
        self.expect("]")
        return Triple(pre, cmd, exit_, post)

    def wpo_query(self) -> tuple[Assertion, SugaredCommand, Exit]:
        pre = self.assertion()
        self.expect(";")
        cmd = self.command(stop_at_exit=True)
        self.expect(";")
        exit_ = self.exit_condition()
        return pre, cmd, exit_


def parse_assertion(text: str) -> Assertion:
    p = _Parser(text)
    a = p.assertion()
    p.expect_eof()
    return a


def parse_command(text: str) -> SugaredCommand:
    p = _Parser(text)
    c = p.command()
    p.expect_eof()
    return c


def parse_triple(text: str) -> Triple:
    p = _Parser(text)
    t = p.triple()
    p.expect_eof()
    return t


def parse_wpo_query(text: str) -> tuple[Assertion, SugaredCommand, Exit]:
    p = _Parser(text)
    q = p.wpo_query()
    p.expect_eof()
    return q


def parse(text: str, kind: str):
    """Parse ``text`` as a 'program', 'assertion' or 'triple'."""
    if kind == "program":
        return parse_command(text)
    if kind == "assertion":
        return parse_assertion(text)
    if kind == "triple":
        return parse_triple(text)
    raise ValueError(f"unknown parse kind {kind!r}")
