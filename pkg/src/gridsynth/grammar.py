"""Probabilistic grammar over DSL productions, with sampling, description
length, and refitting.

Weights are stored raw (nats) and normalized per compatible-choice set at
query time, so per-set probabilities always sum to one by construction. The
initial grammar carries weight 0.0 everywhere (uniform); `refit` replaces
weights with log(1 + count), which normalizes to Laplace-smoothed frequencies.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from functools import lru_cache

from gridsynth.errors import DepthUnsatisfiableError, NotDerivableError
from gridsynth.lang import (
    Arrow,
    Lambda,
    Prim,
    Term,
    Ty,
    TyVar,
    Var,
    apply_all,
    arg_types,
    parse_type,
    return_type,
    spine,
)
from gridsynth.primitives import PrimTable, instantiate

GRAMMAR_SCHEMA = "gridsynth-grammar-v1"


@dataclass(frozen=True)
class Production:
    name: str
    type: Ty
    logp: float


@dataclass(frozen=True)
class Grammar:
    env_tag: str
    productions: tuple[Production, ...]
    var_logp: float
    requests: tuple[Ty, ...]

    def production(self, name: str) -> Production | None:
        for p in self.productions:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class SampleConfig:
    d_max: int
    request: Ty
    seed: int


def uniform_grammar(prims: PrimTable, extra_productions=()) -> Grammar:
    prods = [Production(p.name, p.type, 0.0) for p in prims.entries]
    prods.extend(extra_productions)
    return Grammar(
        env_tag=prims.env_tag,
        productions=tuple(prods),
        var_logp=0.0,
        requests=(prims.request,),
    )


@dataclass(frozen=True)
class Choice:
    """One normalized option at a (request type, binder environment) site."""

    kind: str  # "prim" | "var"
    name: str | None
    var_index: int | None
    args: tuple[Ty, ...]
    cost: float  # -log probability, nats


class Tables:
    """Per-request candidate sets, min depths, and admissible DL bounds.

    Binder environments are constant throughout a program body (no primitive
    takes a function argument), so one table serves the whole search.
    """

    def __init__(self, grammar: Grammar, request: Ty):
        self.grammar = grammar
        self.request = request
        self.binders = arg_types(request)  # outermost first
        self.env = tuple(reversed(self.binders))  # de Bruijn indexed
        self.body_request = return_type(request)
        self.choices: dict[Ty, tuple[Choice, ...]] = {}
        self._build_choice_sets()
        self.min_depth = self._min_depths()
        self.min_dl = self._min_dls()

    def _reachable_types(self) -> list[Ty]:
        seen = {self.body_request}
        frontier = [self.body_request]
        while frontier:
            ty = frontier.pop()
            for p in self.grammar.productions:
                rt = return_type(p.type)
                if rt == ty or isinstance(rt, TyVar):
                    for arg in arg_types(instantiate(p.type, ty)):
                        if arg not in seen:
                            seen.add(arg)
                            frontier.append(arg)
        return list(seen)

    def _build_choice_sets(self):
        for ty in self._reachable_types():
            raw = []
            for p in self.grammar.productions:
                rt = return_type(p.type)
                if rt == ty or isinstance(rt, TyVar):
                    sig = instantiate(p.type, ty)
                    raw.append(("prim", p.name, None, tuple(arg_types(sig)), p.logp))
            for i, binder_ty in enumerate(self.env):
                if binder_ty == ty:
                    raw.append(("var", None, i, (), self.grammar.var_logp))
            if not raw:
                self.choices[ty] = ()
                continue
            lse = _logsumexp([r[4] for r in raw])
            self.choices[ty] = tuple(
                Choice(kind, name, idx, args, -(w - lse))
                for kind, name, idx, args, w in raw
            )

    def _min_depths(self) -> dict[Ty, float]:
        md = {ty: math.inf for ty in self.choices}
        changed = True
        while changed:
            changed = False
            for ty, cands in self.choices.items():
                best = math.inf
                for c in cands:
                    if not c.args:
                        best = min(best, 1)
                    else:
                        worst = max(md.get(a, math.inf) for a in c.args)
                        best = min(best, 1 + worst)
                if best < md[ty]:
                    md[ty] = best
                    changed = True
        return md

    def _min_dls(self) -> dict[Ty, float]:
        dl = {ty: math.inf for ty in self.choices}
        for _ in range(10_000):
            changed = False
            for ty, cands in self.choices.items():
                best = math.inf
                for c in cands:
                    total = c.cost
                    for a in c.args:
                        total += dl.get(a, math.inf)
                    best = min(best, total)
                if best < dl[ty] - 1e-12:
                    dl[ty] = best
                    changed = True
            if not changed:
                break
        return dl

    def feasible(self, ty: Ty, remaining: int) -> list[int]:
        """Indices of choices completable within the remaining depth."""
        out = []
        for i, c in enumerate(self.choices.get(ty, ())):
            if not c.args:
                out.append(i)
            elif remaining >= 2:
                need = max(self.min_depth.get(a, math.inf) for a in c.args)
                if need <= remaining - 1:
                    out.append(i)
        return out


@lru_cache(maxsize=64)
def tables_for(grammar: Grammar, request: Ty) -> Tables:
    return Tables(grammar, request)


def _logsumexp(xs) -> float:
    m = max(xs)
    return m + math.log(sum(math.exp(x - m) for x in xs))


def sample_program(grammar: Grammar, cfg: SampleConfig) -> Term:
    """Draw one well-typed term of the requested type, depth at most d_max.

    Type-directed descent with per-node renormalization over choices that can
    still complete within the depth budget; no rejection loops.
    """
    tables = tables_for(grammar, cfg.request)
    budget = cfg.d_max - len(tables.binders)
    need = tables.min_depth.get(tables.body_request, math.inf)
    if budget < need:
        raise DepthUnsatisfiableError(
            f"no {tables.body_request} term fits depth {cfg.d_max}"
        )
    rng = random.Random(cfg.seed)
    body = _sample_node(tables, tables.body_request, budget, rng)
    for _ in tables.binders:
        body = Lambda(body)
    return body


def _sample_node(tables: Tables, ty: Ty, remaining: int, rng) -> Term:
    cands = tables.choices[ty]
    idx = _pick(tables, ty, remaining, rng)
    choice = cands[idx]
    if choice.kind == "var":
        return Var(choice.var_index)
    head = Prim(choice.name)
    args = [_sample_node(tables, a, remaining - 1, rng) for a in choice.args]
    return apply_all(head, args)


def _pick(tables: Tables, ty: Ty, remaining: int, rng) -> int:
    feasible = tables.feasible(ty, remaining)
    if not feasible:
        raise DepthUnsatisfiableError(f"no {ty} term fits remaining depth {remaining}")
    cands = tables.choices[ty]
    weights = [math.exp(-cands[i].cost) for i in feasible]
    total = sum(weights)
    r = rng.random() * total
    acc = 0.0
    for i, w in zip(feasible, weights):
        acc += w
        if r <= acc:
            return i
    return feasible[-1]


def description_length(grammar: Grammar, term: Term, request: Ty | None = None) -> float:
    """Negative log-probability (nats) of the term's derivation."""
    if request is None:
        request = _match_request(grammar, term)
    tables = tables_for(grammar, request)
    body = term
    for _ in tables.binders:
        if not isinstance(body, Lambda):
            raise NotDerivableError("term has fewer binders than the request")
        body = body.body
    return _dl_node(tables, body, tables.body_request)


def _match_request(grammar: Grammar, term: Term) -> Ty:
    n = 0
    body = term
    while isinstance(body, Lambda):
        n += 1
        body = body.body
    for req in grammar.requests:
        if len(arg_types(req)) == n:
            return req
    return grammar.requests[0]


def _dl_node(tables: Tables, term: Term, ty: Ty) -> float:
    head, args = spine(term)
    cands = tables.choices.get(ty, ())
    if isinstance(head, Var):
        if args:
            raise NotDerivableError("applied variable")
        for c in cands:
            if c.kind == "var" and c.var_index == head.index:
                return c.cost
        raise NotDerivableError(f"no variable of type {ty} at index {head.index}")
    if isinstance(head, Lambda):
        raise NotDerivableError("lambda at a base-type position")
    for c in cands:
        if c.kind == "prim" and c.name == head.name:
            if len(args) != len(c.args):
                raise NotDerivableError(f"partial application of {head.name}")
            total = c.cost
            for a, aty in zip(args, c.args):
                total += _dl_node(tables, a, aty)
            return total
    raise NotDerivableError(f"production {head.name!r} unavailable at type {ty}")


def count_usages(grammar: Grammar, term: Term, request: Ty | None = None):
    """Production and variable usage counts along the term's derivation."""
    if request is None:
        request = _match_request(grammar, term)
    tables = tables_for(grammar, request)
    body = term
    for _ in tables.binders:
        body = body.body
    counts: dict[str, int] = {}
    holder = [0]
    _count_node(tables, body, tables.body_request, counts, holder)
    return counts, holder[0]


def _count_node(tables: Tables, term: Term, ty: Ty, counts, var_holder):
    head, args = spine(term)
    if isinstance(head, Var):
        var_holder[0] += 1
        return
    for c in tables.choices.get(ty, ()):
        if c.kind == "prim" and c.name == head.name:
            counts[head.name] = counts.get(head.name, 0) + 1
            for a, aty in zip(args, c.args):
                _count_node(tables, a, aty, counts, var_holder)
            return
    raise NotDerivableError(f"production {head.name!r} unavailable at type {ty}")


def refit(grammar: Grammar, solved: list[Term]) -> Grammar:
    """Laplace-smoothed (alpha=1) usage frequencies from the solved corpus.

    Raw weight log(1 + count) per production normalizes per choice set to
    (1 + count) / sum(1 + count); an empty corpus yields the uniform grammar.
    """
    counts: dict[str, int] = {}
    var_count = 0
    for term in solved:
        c, v = count_usages(grammar, term)
        for name, n in c.items():
            counts[name] = counts.get(name, 0) + n
        var_count += v
    prods = tuple(
        Production(p.name, p.type, math.log1p(counts.get(p.name, 0)))
        for p in grammar.productions
    )
    return Grammar(
        env_tag=grammar.env_tag,
        productions=prods,
        var_logp=math.log1p(var_count),
        requests=grammar.requests,
    )


def add_abstractions(grammar: Grammar, abstractions) -> Grammar:
    """Extend the grammar with library abstractions as ordinary productions.

    New productions start at raw weight 0.0 (an unseen count under refit)."""
    existing = {p.name for p in grammar.productions}
    new = [
        Production(a.name, a.type, 0.0)
        for a in abstractions
        if a.name not in existing
    ]
    return Grammar(
        env_tag=grammar.env_tag,
        productions=grammar.productions + tuple(new),
        var_logp=grammar.var_logp,
        requests=grammar.requests,
    )


def grammar_to_json(grammar: Grammar) -> dict:
    return {
        "schema": GRAMMAR_SCHEMA,
        "envTag": grammar.env_tag,
        "varLogp": grammar.var_logp,
        "requests": [str(t) for t in grammar.requests],
        "productions": [
            {"name": p.name, "type": str(p.type), "logp": p.logp}
            for p in grammar.productions
        ],
    }


def grammar_from_json(doc: dict) -> Grammar:
    if doc.get("schema") != GRAMMAR_SCHEMA:
        raise ValueError(f"unexpected grammar schema {doc.get('schema')!r}")
    return Grammar(
        env_tag=doc["envTag"],
        productions=tuple(
            Production(p["name"], parse_type(p["type"]), float(p["logp"]))
            for p in doc["productions"]
        ),
        var_logp=float(doc["varLogp"]),
        requests=tuple(parse_type(t) for t in doc["requests"]),
    )


def save_grammar(grammar: Grammar, path) -> None:
    with open(path, "w") as fh:
        json.dump(grammar_to_json(grammar), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_grammar(path) -> Grammar:
    with open(path) as fh:
        return grammar_from_json(json.load(fh))
