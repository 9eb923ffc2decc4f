"""Core term and type representations for the grid DSL.

Terms are lambda-calculus trees with de Bruijn variables, so alpha-equivalent
programs are structurally equal and rewriting never has to rename binders.
Types are simple: named base types, right-associated arrows, and type
variables that only ever occur in the signature of the polymorphic `if`.
"""
from __future__ import annotations

from dataclasses import dataclass


# ---------------------------------------------------------------------------
# Types

@dataclass(frozen=True)
class Ty:
    pass


@dataclass(frozen=True)
class BaseTy(Ty):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Arrow(Ty):
    src: Ty
    dst: Ty

    def __str__(self):
        src = f"({self.src})" if isinstance(self.src, Arrow) else str(self.src)
        return f"{src} -> {self.dst}"


@dataclass(frozen=True)
class TyVar(Ty):
    id: int

    def __str__(self):
        return f"t{self.id}"


ACTION = BaseTy("action")
INT = BaseTy("int")
MAP = BaseTy("map")
DIRECTION = BaseTy("direction")
OBJECT = BaseTy("object")
MAP_OBJECT = BaseTy("mapObject")
BOOL = BaseTy("bool")
TX = BaseTy("tx")
TY_COORD = BaseTy("ty")

_BASE_TYPES = {
    t.name: t
    for t in (ACTION, INT, MAP, DIRECTION, OBJECT, MAP_OBJECT, BOOL, TX, TY_COORD)
}


def arrow(*tys: Ty) -> Ty:
    """Right-associated function type: arrow(a, b, c) == a -> (b -> c)."""
    if not tys:
        raise ValueError("arrow() needs at least one type")
    result = tys[-1]
    for t in reversed(tys[:-1]):
        result = Arrow(t, result)
    return result


def arg_types(ty: Ty) -> list[Ty]:
    """Argument types of an arrow chain, outermost first."""
    args = []
    while isinstance(ty, Arrow):
        args.append(ty.src)
        ty = ty.dst
    return args


def return_type(ty: Ty) -> Ty:
    """Final result type of an arrow chain."""
    while isinstance(ty, Arrow):
        ty = ty.dst
    return ty


def parse_type(text: str) -> Ty:
    """Parse a type string like "map -> direction -> action"."""
    text = text.strip()
    parts = _split_arrows(text)
    if len(parts) == 1:
        part = parts[0]
        if part.startswith("(") and part.endswith(")"):
            return parse_type(part[1:-1])
        if part in _BASE_TYPES:
            return _BASE_TYPES[part]
        if part.startswith("t") and part[1:].isdigit():
            return TyVar(int(part[1:]))
        raise ValueError(f"unknown type {part!r}")
    return arrow(*(parse_type(p) for p in parts))


def _split_arrows(text: str) -> list[str]:
    parts, depth, start = [], 0, 0
    i = 0
    while i < len(text):
        c = text[i]
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
        elif depth == 0 and text.startswith("->", i):
            parts.append(text[start:i].strip())
            i += 2
            start = i
            continue
        i += 1
    parts.append(text[start:].strip())
    return parts


# ---------------------------------------------------------------------------
# Terms

@dataclass(frozen=True)
class Term:
    pass


@dataclass(frozen=True)
class Prim(Term):
    """A DSL primitive or a named library abstraction."""

    name: str


@dataclass(frozen=True)
class Var(Term):
    """De Bruijn index; 0 is the innermost binder."""

    index: int


@dataclass(frozen=True)
class Lambda(Term):
    body: Term


@dataclass(frozen=True)
class Apply(Term):
    fn: Term
    arg: Term


def apply_all(head: Term, args: list[Term]) -> Term:
    term = head
    for a in args:
        term = Apply(term, a)
    return term


def spine(term: Term) -> tuple[Term, list[Term]]:
    """Split an application chain into (head, [arg1, ..., argN])."""
    args: list[Term] = []
    while isinstance(term, Apply):
        args.append(term.arg)
        term = term.fn
    args.reverse()
    return term, args


def depth(term: Term) -> int:
    """Syntax-tree depth in S-expression levels.

    A full application `(f a1 .. an)` is one level above its arguments, a
    lambda binder one level above its body; leaves have depth 1. This is the
    depth that the sampler's and enumerator's d_max bound refers to.
    """
    head, args = spine(term)
    if not args:
        if isinstance(head, Lambda):
            return 1 + depth(head.body)
        return 1
    children = args if isinstance(head, Prim) else [head] + args
    return 1 + max(depth(c) for c in children)


def subterms(term: Term):
    """All spine-level subtrees (the term itself, lambda bodies, arguments)."""
    yield term
    head, args = spine(term)
    if not args:
        if isinstance(head, Lambda):
            yield from subterms(head.body)
    else:
        if not isinstance(head, Prim):
            yield from subterms(head)
        for a in args:
            yield from subterms(a)


def free_vars(term: Term, cutoff: int = 0) -> set[int]:
    """Indices of variables free at the given binder depth."""
    if isinstance(term, Var):
        return {term.index - cutoff} if term.index >= cutoff else set()
    if isinstance(term, Lambda):
        return free_vars(term.body, cutoff + 1)
    if isinstance(term, Apply):
        return free_vars(term.fn, cutoff) | free_vars(term.arg, cutoff)
    return set()


def shift(term: Term, amount: int, cutoff: int = 0) -> Term:
    """Shift free variable indices by `amount`."""
    if isinstance(term, Var):
        return Var(term.index + amount) if term.index >= cutoff else term
    if isinstance(term, Lambda):
        return Lambda(shift(term.body, amount, cutoff + 1))
    if isinstance(term, Apply):
        return Apply(shift(term.fn, amount, cutoff), shift(term.arg, amount, cutoff))
    return term


def substitute(term: Term, index: int, replacement: Term) -> Term:
    """Capture-avoiding substitution of `replacement` for Var(index)."""
    if isinstance(term, Var):
        if term.index == index:
            return replacement
        if term.index > index:
            return Var(term.index - 1)
        return term
    if isinstance(term, Lambda):
        return Lambda(substitute(term.body, index + 1, shift(replacement, 1)))
    if isinstance(term, Apply):
        return Apply(
            substitute(term.fn, index, replacement),
            substitute(term.arg, index, replacement),
        )
    return term


def beta_reduce(term: Term) -> Term:
    """Normal-order beta reduction to normal form.

    The DSL has no recursion, so this always terminates.
    """
    while True:
        reduced = _beta_step(term)
        if reduced is None:
            return term
        term = reduced


def inline(term: Term, defs) -> Term:
    """Replace named Prims by their definitions and beta-reduce.

    `defs` maps names to closed Lambda-terms. Definitions may reference other
    defined names; they form a DAG, so repeated passes terminate.
    """
    while True:
        replaced = _replace_prims(term, defs)
        if replaced == term:
            return term
        term = beta_reduce(replaced)


def _replace_prims(term: Term, defs) -> Term:
    if isinstance(term, Prim) and term.name in defs:
        return defs[term.name]
    if isinstance(term, Lambda):
        return Lambda(_replace_prims(term.body, defs))
    if isinstance(term, Apply):
        return Apply(_replace_prims(term.fn, defs), _replace_prims(term.arg, defs))
    return term


def _beta_step(term: Term):
    if isinstance(term, Apply):
        if isinstance(term.fn, Lambda):
            return substitute(term.fn.body, 0, term.arg)
        step = _beta_step(term.fn)
        if step is not None:
            return Apply(step, term.arg)
        step = _beta_step(term.arg)
        if step is not None:
            return Apply(term.fn, step)
        return None
    if isinstance(term, Lambda):
        step = _beta_step(term.body)
        return Lambda(step) if step is not None else None
    return None
