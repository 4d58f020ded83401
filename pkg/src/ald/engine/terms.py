"""First-order terms: variables, atoms, integers and compounds.

List syntax desugars to the usual cons representation, ``'.'/2`` cells
terminated by the atom ``[]``. Variables are mutable binding cells
compared by identity; everything else is immutable and hashable.
"""

from __future__ import annotations

from dataclasses import dataclass


class Term:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Atom(Term):
    name: str


@dataclass(frozen=True, slots=True)
class Integer(Term):
    value: int


@dataclass(frozen=True, slots=True)
class Compound(Term):
    functor: str
    args: tuple[Term, ...]

    def __post_init__(self):
        if not self.functor:
            raise ValueError("compound functor must be nonempty")
        if not self.args:
            raise ValueError("compound terms have arity >= 1")


class Var(Term):
    __slots__ = ("name", "ref")

    def __init__(self, name: str = "_"):
        self.name = name
        self.ref: Term | None = None

    def __repr__(self):
        return f"Var({self.name})"


NIL = Atom("[]")
TRUE = Atom("true")


def cons(head: Term, tail: Term) -> Compound:
    return Compound(".", (head, tail))


def mklist(items, tail: Term = NIL) -> Term:
    out = tail
    for item in reversed(list(items)):
        out = cons(item, out)
    return out


def deref(term: Term) -> Term:
    while isinstance(term, Var) and term.ref is not None:
        term = term.ref
    return term


# Binary operators printed infix so that formatted terms read back
# through the term reader. Everything is fully parenthesized; the only
# word operator, `is`, keeps spaces so it stays a separate token.
_INFIX_OPS = frozenset(
    {":-", ",", "=>", ":", "=", "is", "<", ">", "=<", ">=", "=:=", "=\\=",
     "+", "-", "*", "//", "/"}
)


def format_term(term: Term) -> str:
    """Canonical text for a term; round-trips through the reader."""
    t = deref(term)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Integer):
        return str(t.value)
    if isinstance(t, Atom):
        return t.name
    assert isinstance(t, Compound)
    if t.functor == "." and len(t.args) == 2:
        return _format_list(t)
    if len(t.args) == 2 and t.functor in _INFIX_OPS:
        left, right = t.args
        return f"({format_term(left)} {t.functor} {format_term(right)})"
    if len(t.args) == 1 and t.functor == "-":
        return f"-({format_term(t.args[0])})"
    return f"{t.functor}({','.join(format_term(a) for a in t.args)})"


def _format_list(t: Compound) -> str:
    items = []
    node: Term = t
    while True:
        node = deref(node)
        if isinstance(node, Compound) and node.functor == "." and len(node.args) == 2:
            items.append(format_term(node.args[0]))
            node = node.args[1]
            continue
        break
    if node == NIL:
        return "[" + ",".join(items) + "]"
    return "[" + ",".join(items) + "|" + format_term(node) + "]"
