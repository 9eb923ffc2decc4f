"""Term and type machinery: depth, substitution, parsing of type strings."""
import pytest

from gridsynth.lang import (
    ACTION,
    BOOL,
    DIRECTION,
    MAP,
    Apply,
    Arrow,
    Lambda,
    Prim,
    TyVar,
    Var,
    apply_all,
    arg_types,
    arrow,
    beta_reduce,
    depth,
    free_vars,
    parse_type,
    return_type,
    spine,
    subterms,
)
from gridsynth.sexpr import parse_program

from conftest import LISTING_WALL_CHECK


def test_arrow_right_association():
    ty = arrow(MAP, DIRECTION, ACTION)
    assert ty == Arrow(MAP, Arrow(DIRECTION, ACTION))
    assert arg_types(ty) == [MAP, DIRECTION]
    assert return_type(ty) == ACTION


def test_parse_type_round_trip():
    for text in ("action", "map -> action", "map -> direction -> action",
                 "(bool -> bool) -> bool", "mapObject -> object -> bool"):
        ty = parse_type(text)
        assert parse_type(str(ty)) == ty


def test_parse_type_rejects_unknown():
    with pytest.raises(ValueError):
        parse_type("banana")


def test_spine_unrolls_application_chain():
    term = apply_all(Prim("get"), [Var(0), Prim("1"), Prim("0")])
    head, args = spine(term)
    assert head == Prim("get")
    assert args == [Var(0), Prim("1"), Prim("0")]


def test_depth_counts_sexpr_levels(maze_prims):
    # λ(x) body is one level above body; a full application is one level
    # above its deepest argument.
    assert depth(Lambda(Prim("left-action"))) == 2
    get_term = apply_all(Prim("get"), [Var(0), Prim("1"), Prim("0")])
    assert depth(get_term) == 2
    term = parse_program(LISTING_WALL_CHECK, maze_prims)
    assert depth(term) == 5


def test_depth_nested_lambda():
    term = Lambda(Lambda(Prim("left-action")))
    assert depth(term) == 3


def test_free_vars_and_closedness():
    term = Lambda(Apply(Var(0), Var(1)))
    assert free_vars(term) == {0}
    assert free_vars(Lambda(term)) == set()


def test_beta_reduce_simple():
    # (λ(x) x) applied to a constant
    term = Apply(Lambda(Var(0)), Prim("left-action"))
    assert beta_reduce(term) == Prim("left-action")


def test_beta_reduce_nested_binders():
    # (λ(x) λ(y) x) a b -> a
    term = apply_all(Lambda(Lambda(Var(1))), [Prim("a"), Prim("b")])
    assert beta_reduce(term) == Prim("a")
    term = apply_all(Lambda(Lambda(Var(0))), [Prim("a"), Prim("b")])
    assert beta_reduce(term) == Prim("b")


def test_beta_reduce_under_lambda():
    # λ(z) ((λ(x) x) z) -> λ(z) z
    term = Lambda(Apply(Lambda(Var(0)), Var(0)))
    assert beta_reduce(term) == Lambda(Var(0))


def test_subterms_walks_spine_nodes(maze_prims):
    term = parse_program(LISTING_WALL_CHECK, maze_prims)
    subs = list(subterms(term))
    assert term in subs
    get_term = apply_all(Prim("get"), [Var(0), Prim("1"), Prim("0")])
    assert get_term in subs


def test_tyvar_str():
    assert str(TyVar(0)) == "t0"
    assert str(Arrow(BOOL, BOOL)) == "bool -> bool"
