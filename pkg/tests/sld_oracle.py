"""Brute-force breadth-first oracle over the SLD tree.

Used to cross-check the engine's fair enumeration. Deliberately
independent of the engine's search machinery: goals are expanded
breadth-first by resolution-step count with immutable substitution
maps, while the engine uses iterative deepening over a mutable trail.
Only the term types and the reader are shared.

Each goal carries its nesting depth (root goals at 1, clause bodies one
deeper); answers whose proofs would exceed ``max_depth`` are pruned, so
the answer set matches what depth-bounded fair search may enumerate.
"""

from __future__ import annotations

from collections import deque

from ald.engine import Atom, Compound, Integer, Program, Term, Var
from ald.engine.solve import eval_arith
from ald.engine.errors import EngineError

NIL = Atom("[]")


class OracleOverflow(Exception):
    pass


def walk(term: Term, subst: dict) -> Term:
    # subst is keyed by the Var objects themselves (identity hash); keying
    # by id() would break once collected ids get reused.
    while isinstance(term, Var) and term in subst:
        term = subst[term]
    return term


def unify(a: Term, b: Term, subst: dict) -> dict | None:
    a = walk(a, subst)
    b = walk(b, subst)
    if a is b:
        return subst
    if isinstance(a, Var):
        out = dict(subst)
        out[a] = b
        return out
    if isinstance(b, Var):
        out = dict(subst)
        out[b] = a
        return out
    if isinstance(a, Atom) and isinstance(b, Atom):
        return subst if a.name == b.name else None
    if isinstance(a, Integer) and isinstance(b, Integer):
        return subst if a.value == b.value else None
    if isinstance(a, Compound) and isinstance(b, Compound):
        if a.functor != b.functor or len(a.args) != len(b.args):
            return None
        for x, y in zip(a.args, b.args):
            subst = unify(x, y, subst)
            if subst is None:
                return None
        return subst
    return None


def resolve(term: Term, subst: dict) -> Term:
    term = walk(term, subst)
    if isinstance(term, Compound):
        return Compound(term.functor, tuple(resolve(a, subst) for a in term.args))
    return term


def rename(term: Term, mapping: dict) -> Term:
    if isinstance(term, Var):
        fresh = mapping.get(term)
        if fresh is None:
            fresh = Var(term.name)
            mapping[term] = fresh
        return fresh
    if isinstance(term, Compound):
        return Compound(term.functor, tuple(rename(a, mapping) for a in term.args))
    return term


def flatten(goal: Term, subst: dict) -> list[Term]:
    goal = walk(goal, subst)
    if isinstance(goal, Compound) and goal.functor == "," and len(goal.args) == 2:
        return flatten(goal.args[0], subst) + flatten(goal.args[1], subst)
    return [goal]


def query_vars(term: Term) -> list[Var]:
    out: list[Var] = []

    def go(t: Term) -> None:
        if isinstance(t, Var):
            if t.name != "_" and all(t is not v for v in out):
                out.append(t)
        elif isinstance(t, Compound):
            for a in t.args:
                go(a)

    go(term)
    return out


def _label(n: int) -> str:
    letters = ""
    n += 1
    while n > 0:
        n, rem = divmod(n - 1, 26)
        letters = chr(ord("A") + rem) + letters
    return "_" + letters


def format_answer(qvars: list[Var], subst: dict) -> str:
    from ald.engine import format_term

    fresh: dict[Var, Var] = {}

    def reify(term: Term) -> Term:
        term = walk(term, subst)
        if isinstance(term, Var):
            named = fresh.get(term)
            if named is None:
                named = Var(_label(len(fresh)))
                fresh[term] = named
            return named
        if isinstance(term, Compound):
            return Compound(term.functor, tuple(reify(a) for a in term.args))
        return term

    return "\n".join(f"{v.name} = {format_term(reify(v))}" for v in qvars)


def _try_builtin(goal: Term, subst: dict):
    """Returns None when the goal is not a builtin, else a list of substs."""
    if isinstance(goal, Atom):
        name, args = goal.name, ()
    elif isinstance(goal, Compound):
        name, args = goal.functor, goal.args
    else:
        raise EngineError("bad goal")
    key = (name, len(args))
    if key == ("true", 0):
        return [subst]
    if key == ("=", 2):
        out = unify(args[0], args[1], subst)
        return [out] if out is not None else []
    if key == ("is", 2):
        value = Integer(eval_arith(resolve(args[1], subst)))
        out = unify(args[0], value, subst)
        return [out] if out is not None else []
    if key in (("<", 2), (">", 2), ("=<", 2), (">=", 2), ("=:=", 2), ("=\\=", 2)):
        a = eval_arith(resolve(args[0], subst))
        b = eval_arith(resolve(args[1], subst))
        ok = {
            "<": a < b, ">": a > b, "=<": a <= b,
            ">=": a >= b, "=:=": a == b, "=\\=": a != b,
        }[name]
        return [subst] if ok else []
    if key == ("var", 1):
        return [subst] if isinstance(walk(args[0], subst), Var) else []
    if key == ("nonvar", 1):
        return [subst] if not isinstance(walk(args[0], subst), Var) else []
    if key == ("list", 1):
        node = walk(args[0], subst)
        while isinstance(node, Compound) and node.functor == "." and len(node.args) == 2:
            node = walk(node.args[1], subst)
        return [subst] if node == NIL else []
    return None


def bfs_answers(
    program: Program,
    query: Term,
    max_depth: int,
    max_answers: int = 10_000,
    max_nodes: int = 300_000,
) -> list[str]:
    """Enumerate answers breadth-first; returns deduped formatted bindings."""
    qvars = query_vars(query)
    goals = [(g, 1) for g in flatten(query, {})]
    queue: deque = deque([(goals, {})])
    answers: list[str] = []
    seen: set[str] = set()
    expanded = 0

    while queue:
        goals, subst = queue.popleft()
        if not goals:
            key = format_answer(qvars, subst)
            if key not in seen:
                seen.add(key)
                answers.append(key)
                if len(answers) >= max_answers:
                    return answers
            continue
        expanded += 1
        if expanded > max_nodes:
            raise OracleOverflow(f"more than {max_nodes} nodes")
        (goal, depth), rest = goals[0], goals[1:]
        goal = walk(goal, subst)
        if isinstance(goal, Compound) and goal.functor == "," and len(goal.args) == 2:
            queue.append(([(g, depth) for g in flatten(goal, subst)] + rest, subst))
            continue
        if depth > max_depth:
            continue
        built = _try_builtin(goal, subst)
        if built is not None:
            for out in built:
                queue.append((rest, out))
            continue
        if isinstance(goal, Atom):
            key = (goal.name, 0)
        elif isinstance(goal, Compound):
            key = (goal.functor, len(goal.args))
        else:
            continue
        for clause in _clauses(program, key):
            mapping: dict = {}
            head = rename(clause.head, mapping)
            out = unify(goal, head, subst)
            if out is None:
                continue
            body = [(rename(g, mapping), depth + 1) for g in clause.body]
            queue.append((body + rest, out))
    return answers


def _clauses(program: Program, key):
    for clause in program.clauses:
        head = clause.head
        ckey = (head.name, 0) if isinstance(head, Atom) else (head.functor, len(head.args))
        if ckey == key:
            yield clause
