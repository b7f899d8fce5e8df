"""Parsing, rendering, and unification of logic terms."""

import pytest

from duotalk.terms import (
    NIL,
    Atom,
    Cons,
    Literal,
    Money,
    Num,
    Rule,
    Struct,
    TermSyntaxError,
    Var,
    atom,
    format_cents,
    is_ground,
    list_items,
    make_list,
    num,
    parse_fact,
    parse_goal,
    parse_program,
    struct,
    to_source,
    to_source_fact,
    to_text,
    unify,
)


def test_parse_simple_fact():
    facts, rules = parse_program("dish('Soft Taco').")
    assert rules == []
    assert facts == [struct("dish", atom("Soft Taco"))]


def test_parse_fact_with_number_and_bare_atom():
    facts, _ = parse_program("original_price('Soft Taco', 179).\ncategory('Soft Taco', taco).")
    assert facts[0].args[1] == Num(179)
    assert facts[1].args[1] == Atom("taco")


def test_parse_comments_and_blank_lines():
    text = """
    % menu fragment
    dish('Pepsi').   % trailing comment

    size_changable_drink('Pepsi').
    """
    facts, _ = parse_program(text)
    assert len(facts) == 2


def test_parse_list_fact():
    facts, _ = parse_program("combo_option_group(drink, ['Pepsi', 'Mountain Dew']).")
    items = list_items(facts[0].args[1])
    assert items == [Atom("Pepsi"), Atom("Mountain Dew")]


def test_parse_rule_with_negation():
    _, rules = parse_program("updated_runout(X) :- runout(X), not new_restore(X).")
    rule = rules[0]
    assert rule.head == struct("updated_runout", Var("X"))
    assert rule.body[0] == Literal(struct("runout", Var("X")))
    assert rule.body[1] == Literal(struct("new_restore", Var("X")), negated=True)


def test_parse_list_pattern_rule():
    _, rules = parse_program("all_unavailable([First|Rest]) :- unavailable(First), all_unavailable(Rest).")
    head_arg = rules[0].head.args[0]
    assert isinstance(head_arg, Cons)
    assert head_arg.head == Var("First")
    assert head_arg.tail == Var("Rest")


def test_parse_comparison_literal():
    _, rules = parse_program("cheap(X) :- original_price(X, P), P < 200.")
    builtin = rules[0].body[1].pred
    assert builtin.name == "<"
    assert builtin.args == (Var("P"), Num(200))


def test_parse_constraint():
    _, rules = parse_program("false :- new_runout(X), new_restore(X).")
    assert rules[0].head == Struct("false", ())


def test_parse_zero_arity_fact():
    facts, _ = parse_program("quit.")
    assert facts == [Struct("quit", ())]


def test_parse_quoted_atom_with_apostrophe():
    facts, _ = parse_program("dish('Nacho''s Special').")
    assert facts[0].args[0] == Atom("Nacho's Special")


def test_parse_rejects_nonground_fact():
    with pytest.raises(TermSyntaxError):
        parse_program("dish(X).")


def test_parse_rejects_garbage():
    with pytest.raises(TermSyntaxError):
        parse_program("dish('Soft Taco')")  # missing final period
    with pytest.raises(TermSyntaxError):
        parse_program("???")


def test_parse_goal_roundtrip():
    goal = parse_goal("unavailable(X)")
    assert goal == struct("unavailable", Var("X"))
    assert parse_goal("quit") == Struct("quit", ())


def test_parse_fact_helper_rejects_variables():
    with pytest.raises(ValueError):
        parse_fact("runout(X)")


def test_source_rendering_quotes_when_needed():
    fact = struct("original_price", atom("Soft Taco"), num(179))
    assert to_source_fact(fact) == "original_price('Soft Taco', 179)."
    assert to_source(atom("taco")) == "taco"
    assert to_source(atom("Nacho's")) == "'Nacho''s'"


def test_text_rendering_is_bare_and_formats_money():
    pred = struct("price", Money(757))
    assert to_text(pred) == "price(7.57)"
    nested = struct(
        "confirm",
        atom("unavailable"),
        make_list([struct("unavailable", atom("Cantina Chicken Soft Taco"),
                          struct("runout", atom("Slow-Roasted Chicken")))]),
    )
    assert (
        to_text(nested)
        == "confirm(unavailable, [unavailable(Cantina Chicken Soft Taco, runout(Slow-Roasted Chicken))])"
    )


def test_format_cents():
    assert format_cents(757) == "7.57"
    assert format_cents(0) == "0.00"
    assert format_cents(5) == "0.05"
    assert format_cents(12068) == "120.68"
    assert format_cents(-40) == "-0.40"


def test_source_roundtrip_through_parser():
    original = struct(
        "combo_option_group",
        atom("drink"),
        make_list([atom("Pepsi"), atom("Baja Blast")]),
    )
    reparsed = parse_fact(to_source_fact(original)[:-1])
    assert reparsed == original


def test_unify_binds_variables():
    subst = unify(struct("runout", Var("X")), struct("runout", atom("Tomatoes")))
    assert subst == {"X": Atom("Tomatoes")}


def test_unify_mismatch_returns_none():
    assert unify(struct("a", atom("x")), struct("b", atom("x"))) is None
    assert unify(struct("a", atom("x")), struct("a", atom("y"))) is None


def test_unify_list_pattern():
    pattern = Cons(Var("H"), Var("T"))
    value = make_list([atom("a"), atom("b")])
    subst = unify(pattern, value)
    assert subst is not None
    assert subst["H"] == Atom("a")
    assert list_items(subst["T"]) == [Atom("b")]


def test_ground_checks():
    assert is_ground(struct("dish", atom("Pepsi")))
    assert not is_ground(struct("dish", Var("X")))
    assert list_items(NIL) == []
