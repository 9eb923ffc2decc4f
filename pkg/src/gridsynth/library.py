"""Library learning: anti-unification candidates, MDL compression, expansion.

Candidates come from anti-unifying pairs of full-application subtrees drawn
from different corpus programs: mismatching subtrees become argument slots
(at most three), repeated mismatches share a slot, and slots are numbered by
first use. The greedy compressor scores each candidate by the change in total
description length (corpus under the extended grammar, rewritten to call the
candidate, plus the candidate body stored once) and keeps accepting the best
candidate while that total strictly drops.

Abstraction bodies are stored as closed lambda terms; their serialized form
prints argument slots as $0..$2.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from gridsynth.errors import GridSynthError, UnknownAbstractionError
from gridsynth.grammar import Grammar, add_abstractions, description_length
from gridsynth.lang import (
    BOOL,
    Apply,
    Lambda,
    Prim,
    Term,
    Ty,
    Var,
    apply_all,
    arg_types,
    arrow,
    free_vars,
    inline,
    parse_type,
    return_type,
    spine,
)
from gridsynth.primitives import PrimTable, primitive_table
from gridsynth.sexpr import parse_program, print_program

LIBRARY_SCHEMA = "gridsynth-library-v1"
_SLOT_RE = re.compile(r"^\$(\d)$")
_ABS_RE = re.compile(r"^f\d+$")
_EPS = 1e-9


@dataclass(frozen=True)
class Abstraction:
    """A named reusable function: `body` is a closed term with `arity` lambdas."""

    name: str
    body: Term
    type: Ty
    arity: int
    use_count: int
    children: tuple[str, ...]


@dataclass(frozen=True)
class CompressionResult:
    grammar: Grammar
    library: tuple[Abstraction, ...]  # full library, earlier entries first
    new_abstractions: tuple[Abstraction, ...]
    rewritten: dict
    dl_before: float
    dl_after: float


def _signatures(prims: PrimTable, library) -> dict:
    sig = {p.name: p.type for p in prims.entries}
    for a in library or ():
        sig[a.name] = a.type
    return sig


def core_to_lambda(core: Term, arity: int) -> Term:
    """Slot prims $i become de Bruijn vars under `arity` wrapping lambdas."""

    def conv(t: Term) -> Term:
        if isinstance(t, Prim):
            m = _SLOT_RE.match(t.name)
            if m:
                return Var(arity - 1 - int(m.group(1)))
            return t
        if isinstance(t, Apply):
            return Apply(conv(t.fn), conv(t.arg))
        raise GridSynthError(f"unexpected node in abstraction core: {t!r}")

    body = conv(core)
    for _ in range(arity):
        body = Lambda(body)
    return body


def lambda_to_core(body: Term, arity: int) -> Term:
    """Inverse of core_to_lambda; bodies contain no internal lambdas."""
    for _ in range(arity):
        if not isinstance(body, Lambda):
            raise GridSynthError("abstraction body has fewer lambdas than its arity")
        body = body.body

    def conv(t: Term) -> Term:
        if isinstance(t, Var):
            if t.index >= arity:
                raise GridSynthError("abstraction body is not closed")
            return Prim(f"${arity - 1 - t.index}")
        if isinstance(t, Apply):
            return Apply(conv(t.fn), conv(t.arg))
        if isinstance(t, Prim):
            return t
        raise GridSynthError(f"unexpected node in abstraction body: {t!r}")

    return conv(body)


def body_text(a: Abstraction) -> str:
    return print_program(lambda_to_core(a.body, a.arity))


def definitions(library) -> dict:
    return {a.name: a.body for a in library or ()}


def expand(term: Term, library) -> Term:
    """Inline every abstraction call down to base primitives."""
    defs = definitions(library)
    missing = sorted(
        p.name
        for p in _prims_in(term)
        if _ABS_RE.match(p.name) and p.name not in defs
    )
    if missing:
        raise UnknownAbstractionError(f"term references unknown abstractions: {missing}")
    return inline(term, defs)


def _prims_in(term: Term):
    if isinstance(term, Prim):
        yield term
    elif isinstance(term, Apply):
        yield from _prims_in(term.fn)
        yield from _prims_in(term.arg)
    elif isinstance(term, Lambda):
        yield from _prims_in(term.body)


def count_calls(term: Term, name: str) -> int:
    return sum(1 for p in _prims_in(term) if p.name == name)


def _arg_types_for(name: str, ret: Ty, sig: dict) -> list[Ty]:
    if name == "if":
        return [BOOL, ret, ret]
    return arg_types(sig[name])


def _typed_fragments(node: Term, ret: Ty, sig: dict, out: list) -> None:
    """Every full-application subtree paired with its (syntax-directed) type."""
    if not isinstance(node, Apply):
        return
    out.append((node, ret))
    head, args = spine(node)
    if isinstance(head, Prim):
        for a, t in zip(args, _arg_types_for(head.name, ret, sig)):
            _typed_fragments(a, t, sig, out)


def _peel(term: Term) -> Term:
    while isinstance(term, Lambda):
        term = term.body
    return term


def _closed(term: Term) -> bool:
    return not free_vars(term)


class _AuSlots:
    def __init__(self):
        self.by_key = {}
        self.types = []

    def slot(self, key, ty: Ty) -> Term:
        if key not in self.by_key:
            self.by_key[key] = len(self.types)
            self.types.append(ty)
        return Prim(f"${self.by_key[key]}")


def _anti_unify(t1: Term, t2: Term, ret: Ty, sig: dict, slots: _AuSlots) -> Term:
    if t1 == t2 and _closed(t1):
        return t1
    h1, a1 = spine(t1)
    h2, a2 = spine(t2)
    if (
        isinstance(h1, Prim)
        and isinstance(h2, Prim)
        and h1.name == h2.name
        and len(a1) == len(a2)
        and a1
    ):
        arg_ts = _arg_types_for(h1.name, ret, sig)
        if len(arg_ts) == len(a1):
            return apply_all(
                h1, [_anti_unify(x, y, t, sig, slots) for x, y, t in zip(a1, a2, arg_ts)]
            )
    return slots.slot((t1, t2), ret)


def _non_slot_nodes(core: Term) -> int:
    if isinstance(core, Prim):
        return 0 if _SLOT_RE.match(core.name) else 1
    if isinstance(core, Apply):
        return _non_slot_nodes(core.fn) + _non_slot_nodes(core.arg)
    return 0


def _match(core: Term, term: Term, binding: dict) -> bool:
    if isinstance(core, Prim):
        m = _SLOT_RE.match(core.name)
        if m:
            i = int(m.group(1))
            if i in binding:
                return binding[i] == term
            binding[i] = term
            return True
        return core == term
    if isinstance(core, Apply):
        return (
            isinstance(term, Apply)
            and _match(core.fn, term.fn, binding)
            and _match(core.arg, term.arg, binding)
        )
    return core == term


def rewrite(term: Term, core: Term, name: str, arity: int) -> Term:
    """Replace pattern matches with calls to `name`, outermost first."""
    binding: dict = {}
    if _match(core, term, binding):
        args = [rewrite(binding[i], core, name, arity) for i in range(arity)]
        return apply_all(Prim(name), args)
    if isinstance(term, Apply):
        return Apply(rewrite(term.fn, core, name, arity), rewrite(term.arg, core, name, arity))
    if isinstance(term, Lambda):
        return Lambda(rewrite(term.body, core, name, arity))
    return term


@dataclass(frozen=True)
class _Candidate:
    core: Term
    arg_types: tuple
    ret: Ty
    text: str

    @property
    def arity(self) -> int:
        return len(self.arg_types)

    @property
    def type(self) -> Ty:
        return arrow(*self.arg_types, self.ret) if self.arg_types else self.ret


def _matching_programs(cand: _Candidate, corpus_terms) -> int:
    count = 0
    for term in corpus_terms:
        if count_calls(rewrite(term, cand.core, "$match", cand.arity), "$match"):
            count += 1
    return count


def _propose(corpus_terms, max_arity: int, prims: PrimTable, library) -> list:
    sig = _signatures(prims, library)
    ret = return_type(prims.request)
    frag_progs: dict = {}
    for pi, term in enumerate(corpus_terms):
        frags: list = []
        _typed_fragments(_peel(term), ret, sig, frags)
        for frag, ty in frags:
            frag_progs.setdefault((frag, ty), set()).add(pi)
    buckets: dict = {}
    for (frag, ty), progs in frag_progs.items():
        head, args = spine(frag)
        if isinstance(head, Prim):
            buckets.setdefault((head.name, len(args), ty), []).append((frag, progs))
    seen: dict = {}
    for (_, _, ty), bucket in sorted(buckets.items(), key=lambda kv: str(kv[0])):
        for i, (f1, p1) in enumerate(bucket):
            for f2, p2 in bucket[i:]:
                if f1 == f2 and len(p1) < 2:
                    continue
                if f1 != f2 and p1 == p2 and len(p1) < 2:
                    continue
                slots = _AuSlots()
                core = _anti_unify(f1, f2, ty, sig, slots)
                if len(slots.types) > max_arity or _non_slot_nodes(core) < 2:
                    continue
                cand = _Candidate(core, tuple(slots.types), ty, print_program(core))
                seen.setdefault(cand.text, cand)
    out = [seen[k] for k in sorted(seen)]
    return [c for c in out if _matching_programs(c, corpus_terms) >= 2]


def propose_candidates(corpus_terms, max_arity: int, prims: PrimTable, library=()) -> list:
    """Candidate patterns (core with $-slots, argTypes, ret), sorted by text."""
    return _propose(list(corpus_terms), max_arity, prims, library)


def _next_index(library) -> int:
    best = -1
    for a in library or ():
        m = _ABS_RE.match(a.name)
        if m:
            best = max(best, int(a.name[1:]))
    return best + 1


def _abstraction_from(cand: _Candidate, name: str, use_count: int, library) -> Abstraction:
    lib_names = {a.name for a in library}
    children = tuple(
        sorted({p.name for p in _prims_in(cand.core) if p.name in lib_names})
    )
    return Abstraction(
        name=name,
        body=core_to_lambda(cand.core, cand.arity),
        type=cand.type,
        arity=cand.arity,
        use_count=use_count,
        children=children,
    )


def _corpus_dl(corpus: dict, grammar: Grammar, request: Ty) -> float:
    return sum(description_length(grammar, term, request) for term in corpus.values())


def _body_dl(a: Abstraction, grammar: Grammar) -> float:
    return description_length(grammar, a.body, a.type)


def _total_dl(corpus: dict, grammar: Grammar, request: Ty, new_abs) -> float:
    return _corpus_dl(corpus, grammar, request) + sum(_body_dl(a, grammar) for a in new_abs)


def compress(
    corpus: dict, grammar: Grammar, library=(), max_arity: int = 3
) -> CompressionResult:
    """Greedy MDL compression; accepts candidates while total DL strictly drops."""
    prims = primitive_table(grammar.env_tag)
    request = prims.request
    lib = list(library)
    current = dict(corpus)
    g = grammar
    new_abs: list[Abstraction] = []
    dl_before = _total_dl(current, g, request, [])
    while True:
        candidates = _propose(list(current.values()), max_arity, prims, lib)
        now = _total_dl(current, g, request, new_abs)
        best = None
        for cand in candidates:
            name = f"f{_next_index(lib)}"
            abs_ = _abstraction_from(cand, name, 0, lib)
            g2 = add_abstractions(g, [abs_])
            rewritten = {
                tid: rewrite(t, cand.core, name, cand.arity) for tid, t in current.items()
            }
            used_in = sum(1 for t in rewritten.values() if count_calls(t, name))
            if used_in < 2:
                continue
            total = _total_dl(rewritten, g2, request, new_abs + [abs_])
            gain = now - total
            if gain > _EPS and (best is None or gain > best[0] + _EPS):
                best = (gain, cand, abs_, g2, rewritten)
        if best is None:
            break
        _, cand, abs_, g, current = best
        lib.append(abs_)
        new_abs.append(abs_)
    lib, new_abs, current, g = _drop_underused(lib, new_abs, current, g, grammar)
    counted = []
    for a in lib:
        uses = sum(count_calls(t, a.name) for t in current.values())
        uses += sum(count_calls(b.body, a.name) for b in lib if b.name != a.name)
        counted.append(
            Abstraction(a.name, a.body, a.type, a.arity, uses, a.children)
        )
    new_names = {a.name for a in new_abs}
    counted_new = tuple(a for a in counted if a.name in new_names)
    dl_after = _total_dl(current, g, request, counted_new)
    return CompressionResult(
        grammar=g,
        library=tuple(counted),
        new_abstractions=counted_new,
        rewritten=current,
        dl_before=dl_before,
        dl_after=dl_after,
    )


def _drop_underused(lib, new_abs, corpus, g, base_grammar):
    """Inline and remove freshly added abstractions referenced fewer than twice."""
    lib = list(lib)
    new_abs = list(new_abs)
    corpus = dict(corpus)
    while True:
        victim = None
        for a in new_abs:
            refs = sum(count_calls(t, a.name) for t in corpus.values())
            refs += sum(count_calls(b.body, a.name) for b in lib if b.name != a.name)
            if refs < 2:
                victim = a
                break
        if victim is None:
            break
        defs = {victim.name: victim.body}
        corpus = {tid: inline(t, defs) for tid, t in corpus.items()}
        lib = [
            a if victim.name not in a.children and not count_calls(a.body, victim.name)
            else Abstraction(
                a.name,
                inline(a.body, defs),
                a.type,
                a.arity,
                a.use_count,
                tuple(c for c in a.children if c != victim.name),
            )
            for a in lib
            if a.name != victim.name
        ]
        new_abs = [a for a in new_abs if a.name != victim.name]
    g = add_abstractions(base_grammar, lib)
    return lib, new_abs, corpus, g


def library_to_json(library) -> dict:
    return {
        "schema": LIBRARY_SCHEMA,
        "abstractions": [
            {
                "name": a.name,
                "arity": a.arity,
                "type": str(a.type),
                "body": body_text(a),
                "children": list(a.children),
                "useCount": a.use_count,
            }
            for a in library
        ],
    }


def library_from_json(doc: dict, prims: PrimTable):
    if doc.get("schema") != LIBRARY_SCHEMA:
        raise GridSynthError(f"unexpected library schema {doc.get('schema')!r}")
    out: list[Abstraction] = []
    for entry in doc["abstractions"]:
        arity = entry["arity"]
        extra = [f"${i}" for i in range(arity)] + [a.name for a in out]
        core = parse_program(entry["body"], prims, extra=extra)
        out.append(
            Abstraction(
                name=entry["name"],
                body=core_to_lambda(core, arity),
                type=parse_type(entry["type"]),
                arity=arity,
                use_count=entry["useCount"],
                children=tuple(entry["children"]),
            )
        )
    return out


def save_library(library, path) -> None:
    Path(path).write_text(json.dumps(library_to_json(library), indent=2) + "\n", encoding="utf-8")


def load_library(path, prims: PrimTable):
    return library_from_json(json.loads(Path(path).read_text(encoding="utf-8")), prims)


def library_report(library) -> str:
    """One line per function with its fully expanded base-primitive form."""
    lines = []
    for a in library:
        expanded = expand(a.body, library)
        shown = print_program(expanded, binder_names=[f"${i}" for i in range(a.arity)])
        lines.append(
            f"{a.name} (arity {a.arity}, uses {a.use_count}) : {a.type} = "
            f"{body_text(a)}  expands to {shown}"
        )
    return "\n".join(lines)
