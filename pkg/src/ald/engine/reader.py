"""Reader for programs, queries and terms.

Clauses end with a ``.`` followed by layout. Supported operators, with
standard precedences:

    :- (1200)   , (1000)   : (978)   => (975)
    = is < > =< >= =:= =\\= (700)   + - (500)   * // / (400)   - (prefix)

``test`` and ``pred`` act as prefix operators inside directives so the
assertion syntax of the fixtures reads without a special grammar.
``%`` starts a line comment, ``/* ... */`` a block comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ReadError
from .terms import NIL, Atom, Compound, Integer, Term, Var, format_term


@dataclass(frozen=True)
class Clause:
    head: Term
    body: tuple[Term, ...]


@dataclass(frozen=True)
class ModuleDirective:
    packages: tuple[str, ...]


@dataclass(frozen=True)
class TestDirective:
    goal: Term
    post: Term | None
    props: tuple[str, ...]

    def __post_init__(self):
        if not self.props and self.post is None:
            raise ValueError("test directive needs a postcondition or properties")


Directive = ModuleDirective | TestDirective


@dataclass(frozen=True)
class Program:
    """An immutable Horn-clause program.

    ``fair_search`` is on iff a module directive's package list carries
    ``bf/bfall``; the solver then enumerates answers fairly.
    """

    clauses: tuple[Clause, ...]
    directives: tuple[Directive, ...]
    fair_search: bool = False

    def __post_init__(self):
        index: dict[tuple[str, int], list] = {}
        for clause in self.clauses:
            head = clause.head
            if isinstance(head, Atom):
                key = (head.name, 0)
            else:
                key = (head.functor, len(head.args))
            index.setdefault(key, []).append(_prepare(clause))
        object.__setattr__(
            self, "_index", {k: tuple(v) for k, v in index.items()}
        )

    @property
    def index(self):
        return self._index

    def tests(self) -> tuple[TestDirective, ...]:
        return tuple(d for d in self.directives if isinstance(d, TestDirective))


@dataclass(frozen=True)
class PreparedClause:
    head: Term
    body: tuple[Term, ...]
    ground_ids: frozenset[int]


def _scan_ground(term: Term, acc: set[int]) -> bool:
    if isinstance(term, Var):
        return False
    if isinstance(term, Compound):
        parts = [_scan_ground(a, acc) for a in term.args]
        if all(parts):
            acc.add(id(term))
            return True
        return False
    acc.add(id(term))
    return True


def _prepare(clause: Clause) -> PreparedClause:
    acc: set[int] = set()
    _scan_ground(clause.head, acc)
    for goal in clause.body:
        _scan_ground(goal, acc)
    return PreparedClause(clause.head, clause.body, frozenset(acc))


# --- tokenizer -------------------------------------------------------------

_ATOM = re.compile(r"[a-z][A-Za-z0-9_]*")
_VAR = re.compile(r"[A-Z_][A-Za-z0-9_]*")
_INT = re.compile(r"\d+")
_SYMBOL_OPS = (":-", "=\\=", "=:=", "=<", ">=", "=>", "//", "<", ">", "=",
               "+", "-", "*", "/", ":")
_PUNCT = "()[],|"


@dataclass(frozen=True)
class _Token:
    type: str  # atom var int op punct end eof
    value: str
    line: int


def _describe(tok: _Token) -> str:
    return "end of input" if tok.type == "eof" else repr(tok.value)


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n, line = 0, len(text), 1
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            continue
        if ch == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                raise ReadError("unterminated block comment", line)
            line += text.count("\n", i, end)
            i = end + 2
            continue
        if ch == ".":
            nxt = text[i + 1] if i + 1 < n else ""
            if nxt == "" or nxt.isspace() or nxt == "%":
                tokens.append(_Token("end", ".", line))
                i += 1
                continue
            raise ReadError("unexpected '.' (floats are not supported)", line)
        if ch in _PUNCT:
            tokens.append(_Token("punct", ch, line))
            i += 1
            continue
        m = _INT.match(text, i)
        if m:
            tokens.append(_Token("int", m.group(), line))
            i = m.end()
            continue
        m = _ATOM.match(text, i)
        if m:
            tokens.append(_Token("atom", m.group(), line))
            i = m.end()
            continue
        m = _VAR.match(text, i)
        if m:
            tokens.append(_Token("var", m.group(), line))
            i = m.end()
            continue
        for op in _SYMBOL_OPS:
            if text.startswith(op, i):
                tokens.append(_Token("op", op, line))
                i += len(op)
                break
        else:
            raise ReadError(f"unexpected character {ch!r}", line)
    tokens.append(_Token("eof", "", line))
    return tokens


# --- operator-precedence parser --------------------------------------------

# name -> (priority, type); xfx/xfy/yfx in the usual Prolog sense.
_INFIX = {
    ":-": (1200, "xfx"),
    ",": (1000, "xfy"),
    ":": (978, "xfx"),
    "=>": (975, "xfx"),
    "=": (700, "xfx"),
    "is": (700, "xfx"),
    "<": (700, "xfx"),
    ">": (700, "xfx"),
    "=<": (700, "xfx"),
    ">=": (700, "xfx"),
    "=:=": (700, "xfx"),
    "=\\=": (700, "xfx"),
    "+": (500, "yfx"),
    "-": (500, "yfx"),
    "*": (400, "yfx"),
    "//": (400, "yfx"),
    "/": (400, "yfx"),
}

# Word operators used only in directives (Ciao assertion style).
_PREFIX_WORDS = {"test": 1150, "pred": 1150}

_TERM_START = {"atom", "var", "int"}


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.vars: dict[str, Var] = {}

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_punct(self, value: str) -> None:
        tok = self.next()
        if tok.type != "punct" or tok.value != value:
            raise ReadError(f"expected {value!r}, found {_describe(tok)}", tok.line)

    def at_clause_start(self) -> bool:
        return self.peek().type != "eof"

    def new_clause_scope(self) -> None:
        self.vars = {}

    def _mkvar(self, name: str) -> Var:
        if name == "_":
            return Var("_")
        var = self.vars.get(name)
        if var is None:
            var = Var(name)
            self.vars[name] = var
        return var

    def _starts_term(self, tok: _Token) -> bool:
        if tok.type in _TERM_START:
            return True
        if tok.type == "punct" and tok.value in "([":
            return True
        if tok.type == "op" and tok.value in ("-", ":-"):
            return True
        return False

    def parse(self, maxprec: int) -> tuple[Term, int]:
        left, lprec = self.parse_primary(maxprec)
        while True:
            tok = self.peek()
            if tok.type == "op" or (tok.type == "atom" and tok.value == "is"):
                name = tok.value
            elif tok.type == "punct" and tok.value == ",":
                name = ","
            else:
                break
            entry = _INFIX.get(name)
            if entry is None:
                break
            prec, typ = entry
            if prec > maxprec:
                break
            left_max = prec if typ == "yfx" else prec - 1
            if lprec > left_max:
                break
            self.next()
            right_max = prec if typ == "xfy" else prec - 1
            right, _ = self.parse(right_max)
            left = Compound(name, (left, right))
            lprec = prec
        return left, lprec

    def parse_primary(self, maxprec: int) -> tuple[Term, int]:
        tok = self.next()
        if tok.type == "int":
            return Integer(int(tok.value)), 0
        if tok.type == "var":
            return self._mkvar(tok.value), 0
        if tok.type == "atom":
            nxt = self.peek()
            if nxt.type == "punct" and nxt.value == "(":
                return self.parse_compound(tok), 0
            prefix_prec = _PREFIX_WORDS.get(tok.value)
            if (
                prefix_prec is not None
                and prefix_prec <= maxprec
                and self._starts_term(nxt)
            ):
                arg, _ = self.parse(prefix_prec - 1)
                return Compound(tok.value, (arg,)), prefix_prec
            return Atom(tok.value), 0
        if tok.type == "punct" and tok.value == "(":
            term, _ = self.parse(1200)
            self.expect_punct(")")
            return term, 0
        if tok.type == "punct" and tok.value == "[":
            return self.parse_list(tok), 0
        if tok.type == "op" and tok.value == "-":
            nxt = self.peek()
            if nxt.type == "int":
                self.next()
                return Integer(-int(nxt.value)), 0
            arg, _ = self.parse(200)
            return Compound("-", (arg,)), 200
        if tok.type == "op" and tok.value == ":-" and maxprec >= 1200:
            arg, _ = self.parse(1199)
            return Compound(":-", (arg,)), 1200
        raise ReadError(f"unexpected {_describe(tok)}", tok.line)

    def parse_compound(self, name_tok: _Token) -> Term:
        self.expect_punct("(")
        args = [self.parse(999)[0]]
        while True:
            tok = self.next()
            if tok.type == "punct" and tok.value == ",":
                args.append(self.parse(999)[0])
                continue
            if tok.type == "punct" and tok.value == ")":
                return Compound(name_tok.value, tuple(args))
            raise ReadError(f"expected ',' or ')', found {_describe(tok)}", tok.line)

    def parse_list(self, open_tok: _Token) -> Term:
        tok = self.peek()
        if tok.type == "punct" and tok.value == "]":
            self.next()
            return NIL
        items = [self.parse(999)[0]]
        tail: Term = NIL
        while True:
            tok = self.next()
            if tok.type == "punct" and tok.value == ",":
                items.append(self.parse(999)[0])
                continue
            if tok.type == "punct" and tok.value == "|":
                tail = self.parse(999)[0]
                self.expect_punct("]")
                break
            if tok.type == "punct" and tok.value == "]":
                break
            raise ReadError(f"expected ',', '|' or ']', found {_describe(tok)}", tok.line)
        out = tail
        for item in reversed(items):
            out = Compound(".", (item, out))
        return out


def _flatten_conj(term: Term) -> tuple[Term, ...]:
    if isinstance(term, Compound) and term.functor == "," and len(term.args) == 2:
        return _flatten_conj(term.args[0]) + _flatten_conj(term.args[1])
    return (term,)


def _is_bfall(term: Term) -> bool:
    if term == Atom("bfall"):
        return True
    return (
        isinstance(term, Compound)
        and term.functor == "/"
        and len(term.args) == 2
        and term.args == (Atom("bf"), Atom("bfall"))
    )


def _list_items(term: Term) -> list[Term]:
    items = []
    while isinstance(term, Compound) and term.functor == "." and len(term.args) == 2:
        items.append(term.args[0])
        term = term.args[1]
    return items


def _split_test(term: Term, line: int) -> TestDirective:
    goal_side, post_side = term, None
    if isinstance(term, Compound) and term.functor == "=>" and len(term.args) == 2:
        goal_side, post_side = term.args

    props: list[str] = []

    def peel(t: Term) -> Term:
        while (
            isinstance(t, Compound)
            and t.functor == "+"
            and len(t.args) == 2
            and isinstance(t.args[1], Atom)
            and t.args[1].name in ("fails", "not_fails")
        ):
            props.insert(0, t.args[1].name)
            t = t.args[0]
        return t

    if post_side is not None:
        post = peel(post_side)
        goal = goal_side
    else:
        goal = peel(goal_side)
        post = None
    if not isinstance(goal, (Atom, Compound)):
        raise ReadError("test goal must be callable", line)
    if post is None and not props:
        raise ReadError("test directive needs '=> Post' or '+ fails/not_fails'", line)
    return TestDirective(goal=goal, post=post, props=tuple(props))


def _dispatch_directive(term: Term, line: int):
    """Return a directive, a fair-search flag, or None for ignored forms."""
    if not isinstance(term, Compound):
        return None
    if term.functor == "module" and len(term.args) == 3:
        packages = _list_items(term.args[2])
        fair = any(
            _is_bfall(p.args[0]) if isinstance(p, Compound) and p.functor == "library"
            and len(p.args) == 1 else _is_bfall(p)
            for p in packages
        )
        return ModuleDirective(tuple(format_term(p) for p in packages)), fair
    if term.functor == "test" and len(term.args) == 1:
        return _split_test(term.args[0], line), False
    return None


def parse_program(text: str) -> Program:
    """Parse program text into clauses and directives."""
    parser = _Parser(_tokenize(text))
    clauses: list[Clause] = []
    directives: list[Directive] = []
    fair = False
    while parser.at_clause_start():
        parser.new_clause_scope()
        start = parser.peek().line
        term, _ = parser.parse(1200)
        tok = parser.next()
        if tok.type != "end":
            raise ReadError(f"expected '.' to end the clause, found {_describe(tok)}", tok.line)
        if isinstance(term, Compound) and term.functor == ":-" and len(term.args) == 1:
            dispatched = _dispatch_directive(term.args[0], start)
            if dispatched is not None:
                directive, dfair = dispatched
                directives.append(directive)
                fair = fair or dfair
            continue
        if isinstance(term, Compound) and term.functor == ":-" and len(term.args) == 2:
            head, body = term.args
            if not isinstance(head, (Atom, Compound)):
                raise ReadError("clause head must be an atom or compound", start)
            clauses.append(Clause(head, _flatten_conj(body)))
            continue
        if not isinstance(term, (Atom, Compound)):
            raise ReadError("clause head must be an atom or compound", start)
        clauses.append(Clause(term, ()))
    return Program(tuple(clauses), tuple(directives), fair)


def parse_term(text: str) -> Term:
    """Read a single term (shared variable scope, no trailing '.')."""
    parser = _Parser(_tokenize(text))
    term, _ = parser.parse(1200)
    tok = parser.next()
    if tok.type == "end":
        tok = parser.next()
    if tok.type != "eof":
        raise ReadError(f"unexpected trailing input {_describe(tok)}", tok.line)
    return term


def parse_query(text: str) -> Term:
    """Read one query goal; a leading ``?-`` and trailing ``.`` are optional."""
    stripped = text.strip()
    if stripped.startswith("?-"):
        stripped = stripped[2:]
    goal = parse_term(stripped)
    if not isinstance(goal, (Atom, Compound)):
        raise ReadError("query must be a callable term", 1)
    return goal
