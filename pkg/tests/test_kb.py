"""Menu knowledge-base loading, validation, lookup, and mutation tests."""

import pathlib

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from duotalk.kb import (
    KBValidationError,
    MenuKB,
    MutationError,
    MutationSet,
    apply_mutations,
    delete_food_mutations,
    load_kb,
    load_kb_file,
    validate_facts,
)
from duotalk.terms import Atom, atom, list_items, num, parse_program, struct, to_text

DATA = pathlib.Path(__file__).parent / "data"
MAIN_MENU = pathlib.Path(__file__).parents[1] / "src" / "duotalk" / "data" / "menu.lp"


@pytest.fixture(scope="module")
def menu() -> MenuKB:
    return load_kb_file(str(MAIN_MENU))


@pytest.fixture(scope="module")
def small() -> MenuKB:
    return load_kb_file(str(DATA / "avail_menu.lp"))


# ------------------------------------------------------------
# loading and validation
# ------------------------------------------------------------


def test_main_menu_loads_clean(menu):
    assert len(menu.facts) == 1220
    assert menu.version == 1
    assert validate_facts(list(menu.facts)) == []


def test_main_menu_has_expected_names(menu):
    vocab = menu.vocabulary()
    for name in ("Soft Taco", "Cantina Chicken Soft Taco", "Pepsi", "Beans", "Tomatoes"):
        assert name in vocab, name
    assert menu.food_kind("Soft Taco") == "dish"
    assert menu.food_kind("Beans") == "ingredient"
    assert menu.food_kind("Hot Sauce") == "sauce"
    assert menu.food_kind("nonexistent thing") is None


def test_unknown_predicate_rejected():
    with pytest.raises(KBValidationError) as exc:
        load_kb("dish('A'). category('A', taco). original_price('A', 100). wibble('A').")
    assert any(v.code == "unknown-predicate" for v in exc.value.violations)


def test_rules_rejected_in_menu_files():
    with pytest.raises(KBValidationError) as exc:
        load_kb("dish('A') :- combo('A').")
    assert any(v.code == "rules-in-kb" for v in exc.value.violations)


def test_referential_closure_lone_property_fact():
    with pytest.raises(KBValidationError) as exc:
        load_kb("included_ingredient('Soft Taco', 'Cheese').")
    codes = {v.code for v in exc.value.violations}
    assert "undeclared-food" in codes


def test_ambiguous_food_declaration():
    with pytest.raises(KBValidationError) as exc:
        load_kb(
            "dish('Thing'). ingredient('Thing'). "
            "category('Thing', taco). original_price('Thing', 100)."
        )
    assert any(v.code == "ambiguous-food" for v in exc.value.violations)


def test_price_cardinality_enforced():
    with pytest.raises(KBValidationError) as exc:
        load_kb("dish('A'). category('A', taco).")
    assert any(v.code == "price-cardinality" for v in exc.value.violations)

    with pytest.raises(KBValidationError) as exc:
        load_kb(
            "dish('A'). category('A', taco). "
            "original_price('A', 100). original_price('A', 200)."
        )
    assert any(v.code == "price-cardinality" for v in exc.value.violations)


def test_category_must_be_known():
    with pytest.raises(KBValidationError) as exc:
        load_kb("dish('A'). category('A', sandwich). original_price('A', 100).")
    assert any(v.code == "unknown-category" for v in exc.value.violations)


def test_combo_must_have_content():
    with pytest.raises(KBValidationError) as exc:
        load_kb("combo('Empty Box'). original_price('Empty Box', 500).")
    assert any(v.code == "combo-no-content" for v in exc.value.violations)


def test_group_members_must_be_dishes():
    with pytest.raises(KBValidationError) as exc:
        load_kb(
            "ingredient('Cheese'). "
            "combo_option_group(picks, ['Cheese'])."
        )
    assert any(v.code == "bad-group-member" for v in exc.value.violations)


def test_group_upgrade_must_target_member():
    with pytest.raises(KBValidationError) as exc:
        load_kb(
            "dish('A'). category('A', taco). original_price('A', 100). "
            "dish('B'). category('B', taco). original_price('B', 100). "
            "combo_option_group(picks, ['A']). "
            "group_upgrade_price(picks, 'B', 50)."
        )
    assert any(v.code == "upgrade-outside-group" for v in exc.value.violations)


def test_warnings_do_not_block_loading(caplog):
    text = (
        "dish('A'). category('A', taco). original_price('A', 100). "
        "ingredient('X'). popular_topping('A', 'X'). "
        "dish('A2'). category('A2', taco). original_price('A2', 100). "
        "available_topping('A2', 'X')."
    )
    violations = validate_facts(parse_program(text)[0])
    codes = {v.code for v in violations}
    assert "popular-not-available" in codes
    assert "missing-upgrade-price" in codes
    assert all(v.severity == "warning" for v in violations)
    kb = load_kb(text)  # warnings only -> loads fine
    assert kb.food_kind("A") == "dish"


def test_duplicate_fact_warning():
    violations = validate_facts(
        parse_program("dish('A'). dish('A'). category('A', taco). original_price('A', 100).")[0]
    )
    assert any(v.code == "duplicate-fact" for v in violations)


# ------------------------------------------------------------
# lookup against a linear-scan oracle
# ------------------------------------------------------------


def _scan(kb: MenuKB, predicate: str, args):
    """Reference lookup: a straight linear scan with the same wildcards."""
    out = []
    for fact in kb.facts:
        if fact.name != predicate or (args is not None and len(fact.args) != len(args)):
            continue
        if args is None:
            out.append(fact)
            continue
        ok = True
        for want, got in zip(args, fact.args):
            if want is None:
                continue
            want_term = atom(want) if isinstance(want, str) else num(want)
            if want_term != got:
                ok = False
                break
        if ok:
            out.append(fact)
    return out


@pytest.mark.parametrize(
    "predicate,args",
    [
        ("included_ingredient", ["Crunchy Taco", None]),
        ("included_ingredient", [None, "Seasoned Beef"]),
        ("original_price", ["Soft Taco", None]),
        ("available_topping", ["Soft Taco", None]),
        ("category", [None, "taco"]),
        ("combo_contain", None),
        ("upgrade_price", ["Soft Taco", "Beans", None]),
        ("dish", ["Soft Taco"]),
        ("dish", ["No Such Dish"]),
    ],
)
def test_lookup_matches_linear_scan(menu, predicate, args):
    assert menu.lookup(predicate, args) == _scan(menu, predicate, args)


def test_lookup_preserves_file_order(menu):
    names = [f.args[1].name for f in menu.lookup("included_ingredient", ["Cantina Chicken Soft Taco", None])]
    assert names[0] == "Slow-Roasted Chicken"


def test_accessors(small):
    assert small.price("Beef Taco") == 199
    assert small.calories("Beef Taco") == 210
    assert small.price("not here") is None
    assert small.foods("combo") == ["Taco Box", "Family Pack", "Protein Duo", "Snack Pair"]
    groups = small.groups()
    assert groups["taco_pick"] == ["Beef Taco", "Chicken Taco", "Bean Taco"]
    assert set(groups) == {"taco_pick", "protein_taco_pick", "drink_pick", "side_pick"}


# ------------------------------------------------------------
# serialization round-trip
# ------------------------------------------------------------


def test_serialize_round_trip(small):
    text = small.serialize()
    reloaded = load_kb(text)
    assert sorted(map(to_text, reloaded.facts)) == sorted(map(to_text, small.facts))


def test_serialize_round_trip_main_menu(menu):
    reloaded = load_kb(menu.serialize())
    assert sorted(map(to_text, reloaded.facts)) == sorted(map(to_text, menu.facts))


# ------------------------------------------------------------
# mutations
# ------------------------------------------------------------


def _new_dish_mutations() -> MutationSet:
    return MutationSet(
        adds=(
            struct("dish", atom("Breakfast Taco")),
            struct("category", atom("Breakfast Taco"), atom("taco")),
            struct("original_price", atom("Breakfast Taco"), num(299)),
            struct("original_cal", atom("Breakfast Taco"), num(250)),
            struct("included_ingredient", atom("Breakfast Taco"), atom("Cheese")),
        ),
        removes=(),
    )


def test_apply_mutations_is_pure_and_versioned(small):
    before = small.facts
    out = apply_mutations(small, _new_dish_mutations())
    assert out.version == small.version + 1
    assert small.facts == before  # untouched input snapshot
    assert out.food_kind("Breakfast Taco") == "dish"
    assert small.food_kind("Breakfast Taco") is None


def test_apply_mutations_missing_remove(small):
    bad = MutationSet(adds=(), removes=(struct("dish", atom("Ghost Dish")),))
    with pytest.raises(MutationError):
        apply_mutations(small, bad)


def test_apply_mutations_duplicate_add(small):
    bad = MutationSet(adds=(struct("dish", atom("Beef Taco")),), removes=())
    with pytest.raises(MutationError):
        apply_mutations(small, bad)


def test_apply_mutations_validates_result(small):
    # dropping just the declaration leaves dangling property facts
    bad = MutationSet(adds=(), removes=(struct("dish", atom("Beef Taco")),))
    with pytest.raises(KBValidationError):
        apply_mutations(small, bad)


def test_edit_style_remove_add_pair(small):
    edit = MutationSet(
        adds=(struct("included_ingredient", atom("Beef Taco"), atom("Tomatoes")),),
        removes=(struct("included_ingredient", atom("Beef Taco"), atom("Lettuce")),),
    )
    out = apply_mutations(small, edit)
    names = [f.args[1].name for f in out.lookup("included_ingredient", ["Beef Taco", None])]
    assert "Lettuce" not in names and "Tomatoes" in names


# ------------------------------------------------------------
# delete closure
# ------------------------------------------------------------


def test_delete_ingredient_closure(small):
    ms = delete_food_mutations(small, "Tomatoes")
    out = apply_mutations(small, ms)
    assert out.food_kind("Tomatoes") is None
    for fact in out.facts:
        assert Atom("Tomatoes") not in fact.args, to_text(fact)
    # dishes that merely offered it as a topping survive
    assert out.food_kind("Beef Taco") == "dish"
    assert out.food_kind("Loaded Nachos") == "dish"


def test_delete_dish_rewrites_group_lists(small):
    ms = delete_food_mutations(small, "Chicken Taco")
    out = apply_mutations(small, ms)
    groups = out.groups()
    assert groups["taco_pick"] == ["Beef Taco", "Bean Taco"]
    assert groups["protein_taco_pick"] == ["Beef Taco", "Steak Taco"]
    # its group-upgrade pricing went with it
    assert out.lookup("group_upgrade_price", ["taco_pick", "Chicken Taco", None]) == []


def test_delete_last_member_cascades_to_group():
    text = (
        "dish('Only'). category('Only', taco). original_price('Only', 100). "
        "dish('Main'). category('Main', taco). original_price('Main', 100). "
        "combo('Box'). original_price('Box', 500). "
        "combo_option_group(solo_pick, ['Only']). "
        "group_upgrade_price(solo_pick, 'Only', 10). "
        "combo_contain('Box', 'Main'). "
        "combo_contain('Box', solo_pick)."
    )
    kb = load_kb(text)
    out = apply_mutations(kb, delete_food_mutations(kb, "Only"))
    assert out.groups() == {}
    assert [to_text(f) for f in out.lookup("combo_contain", None)] == ["combo_contain(Box, Main)"]


def test_delete_closure_always_revalidates(menu):
    # deleting any of a few load-bearing foods still yields a valid KB
    for food in ("Tomatoes", "Pepsi", "Soft Taco", "Slow-Roasted Chicken"):
        out = apply_mutations(menu, delete_food_mutations(menu, food))
        assert validate_facts(list(out.facts)) == []
        assert out.food_kind(food) is None


# ------------------------------------------------------------
# atomicity property: inverse mutations restore the snapshot
# ------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6), st.integers(min_value=0, max_value=5000))
def test_add_then_inverse_remove_round_trips(price, cal):
    kb = load_kb_file(str(DATA / "avail_menu.lp"))
    ms = MutationSet(
        adds=(
            struct("dish", atom("Prop Dish")),
            struct("category", atom("Prop Dish"), atom("side")),
            struct("original_price", atom("Prop Dish"), num(price)),
            struct("original_cal", atom("Prop Dish"), num(cal)),
        ),
        removes=(),
    )
    stepped = apply_mutations(kb, ms)
    back = apply_mutations(stepped, MutationSet(adds=(), removes=ms.adds))
    assert sorted(map(to_text, back.facts)) == sorted(map(to_text, kb.facts))
    assert back.version == kb.version + 2


def test_failed_mutation_leaves_no_trace(small):
    facts_before = small.facts
    version_before = small.version
    with pytest.raises(KBValidationError):
        apply_mutations(
            small,
            MutationSet(adds=(struct("dish", atom("Half Done")),), removes=()),
        )
    assert small.facts == facts_before and small.version == version_before
