"""S-expression parsing and printing."""
import pytest

from gridsynth.errors import ParseError, UnboundVariableError, UnknownPrimitiveError
from gridsynth.lang import Apply, Lambda, Prim, Var, apply_all
from gridsynth.sexpr import parse_program, print_program

from conftest import LISTING_WALL_CHECK

CANONICAL_WALL_CHECK = (
    "(λ(x) (if (eq-obj? wall-obj (get x 1 0)) left-action forward-action))"
)


def test_parse_wall_check_structure(maze_prims):
    term = parse_program(LISTING_WALL_CHECK, maze_prims)
    expected = Lambda(
        apply_all(
            Prim("if"),
            [
                apply_all(
                    Prim("eq-obj?"),
                    [
                        Prim("wall-obj"),
                        apply_all(Prim("get"), [Var(0), Prim("1"), Prim("0")]),
                    ],
                ),
                Prim("left-action"),
                Prim("forward-action"),
            ],
        )
    )
    assert term == expected


def test_print_canonical(maze_prims):
    term = parse_program(LISTING_WALL_CHECK, maze_prims)
    assert print_program(term) == CANONICAL_WALL_CHECK


def test_round_trip(maze_prims):
    term = parse_program(LISTING_WALL_CHECK, maze_prims)
    assert parse_program(print_program(term), maze_prims) == term


def test_lambda_keyword_accepted(maze_prims):
    a = parse_program("(lambda (x) left-action)", maze_prims)
    b = parse_program("(λ(x) left-action)", maze_prims)
    assert a == b == Lambda(Prim("left-action"))


def test_multi_binder_lambda(maze_prims):
    term = parse_program("(λ (m d) (if (eq-direction? d direction-0) left-action right-action))", maze_prims)
    assert isinstance(term, Lambda)
    assert isinstance(term.body, Lambda)
    # d is the inner binder, so it is Var(0)
    assert print_program(term) == (
        "(λ(x) (λ(y) (if (eq-direction? y direction-0) left-action right-action)))"
    )


def test_nested_lambda_prints_one_binder_each(maze_prims):
    term = Lambda(Lambda(Prim("left-action")))
    assert print_program(term) == "(λ(x) (λ(y) left-action))"


def test_unbalanced_raises(maze_prims):
    with pytest.raises(ParseError):
        parse_program("(λ(x) (get x 1 0", maze_prims)


def test_stray_close_raises(maze_prims):
    with pytest.raises(ParseError):
        parse_program("(λ(x) left-action))", maze_prims)


def test_unknown_symbol_raises(maze_prims):
    with pytest.raises(UnknownPrimitiveError):
        parse_program("(λ(x) warp-action)", maze_prims)


def test_unbound_variable_raises(maze_prims):
    with pytest.raises((UnboundVariableError, UnknownPrimitiveError)):
        parse_program("(λ(x) (get y 1 0))", maze_prims)


def test_empty_input_raises(maze_prims):
    with pytest.raises(ParseError):
        parse_program("   ", maze_prims)


def test_grouping_parens_collapse(maze_prims):
    a = parse_program("(λ(x) ((left-action)))", maze_prims)
    assert a == Lambda(Prim("left-action"))


def test_extra_symbols_allowed(maze_prims):
    term = parse_program("(λ(x) (f0 x))", maze_prims, extra={"f0"})
    assert term == Lambda(Apply(Prim("f0"), Var(0)))


def test_slot_names_print(maze_prims):
    body = Lambda(Lambda(Apply(Var(1), Var(0))))
    text = print_program(body, binder_names=["$0", "$1"])
    assert text == "(λ($0) (λ($1) ($0 $1)))"


def test_identity_round_trip(maze_prims):
    term = parse_program("(λ(x) x)", maze_prims)
    assert term == Lambda(Var(0))
    assert print_program(term) == "(λ(x) x)"
