"""Sign-off suite: one test per release criterion.

Run `pytest tests/test_acceptance.py -v` to get a pass/fail line per
criterion.  Each test states its tolerance inline; several reuse the
independent oracles from `oracles.py` so that the implementation and
the checker never share code paths.
"""

from __future__ import annotations

import itertools
import json
import pathlib
import random
import re
import time

import pytest
from click.testing import CliRunner

from duotalk.cli import main as cli_main
from duotalk.kb import default_menu, load_kb_file
from duotalk.orchestrator import Orchestrator, run_bench
from duotalk.shared_state import (
    ShortageState,
    SharedStore,
    StateDelta,
    reconcile,
    unavailability,
)
from duotalk.terms import atom, struct

from oracles import availability_closure, valid_reasons
from test_reasoner_random import check_program_agreement

DATA = pathlib.Path(__file__).parent / "data"


def normalize(text: str) -> str:
    """Whitespace normalization used for transcript comparison."""
    out = " ".join(text.split())
    return re.sub(r"\s*([()\[\],.])\s*", r"\1", out)


# ------------------------------------------------------------
# 1. golden transcript replay
# ------------------------------------------------------------


def test_sign_off_golden_transcript_replay():
    """`duotalk replay` on the bundled demo script reproduces the
    reference transcript's frames and response predicates verbatim
    (exact string match after whitespace normalization)."""
    golden = json.loads((DATA / "golden_replay.json").read_text(encoding="utf-8"))
    result = CliRunner().invoke(cli_main, ["replay", golden["script"], "--json"])
    assert result.exit_code == 0, result.output
    rows = [json.loads(line) for line in result.output.splitlines() if line.strip()]
    turns = [r for r in rows if r["event"] != "greeting"]
    assert len(turns) == len(golden["rounds"])

    for got, want in zip(turns, golden["rounds"]):
        assert got["role"] == want["role"]
        assert normalize(got["utterance"]) == normalize(want["utterance"])
        assert normalize(got["frames"]) == normalize(want["frames"]), want["utterance"]
        assert normalize(got["predicates"]) == normalize(want["predicates"]), want["utterance"]

    # the rejection round must carry the full nested explanation
    rejection = normalize(
        "confirm(unavailable,"
        " [unavailable(Cantina Chicken Soft Taco, runout(Slow-Roasted Chicken))])."
        " else."
    )
    assert any(normalize(r["predicates"]) == rejection for r in turns)


# ------------------------------------------------------------
# 2. rule engine vs. bottom-up oracle
# ------------------------------------------------------------


def test_sign_off_reasoner_agrees_with_bottom_up_oracle_on_500_programs():
    """On 500 randomly generated stratified programs, top-down solving
    equals the bottom-up fixpoint oracle on every derivable predicate.
    Zero mismatches, under 60 seconds."""
    started = time.perf_counter()
    for seed in range(500):
        check_program_agreement(seed)
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0, f"500-program sweep took {elapsed:.1f}s"


# ------------------------------------------------------------
# 3. availability closure, exhaustively
# ------------------------------------------------------------


def test_sign_off_availability_closure_exhaustive_sweep():
    """On a 44-food menu (40 dishes + 4 option-group combos), every
    shortage subset of up to three ingredient/sauce names yields exactly
    the unavailable set computed by the brute-force closure oracle, and
    every reported reason is a defensible blame assignment."""
    kb = load_kb_file(str(DATA / "sweep_menu.lp"))
    dishes, combos = kb.foods("dish"), kb.foods("combo")
    assert len(dishes) + len(combos) >= 40
    assert len(combos) >= 3
    assert kb.groups(), "combos must route through option groups"

    names = sorted(kb.foods("ingredient") + kb.foods("sauce"))
    states = [()]
    for size in (1, 2, 3):
        states += list(itertools.combinations(names, size))
    assert len(states) == 697

    for runouts in states:
        got = dict(unavailability(kb, ShortageState(tuple(runouts))))
        assert set(got) == availability_closure(kb, set(runouts)), runouts
        for food, reason in got.items():
            cause = reason.args[0].name
            assert cause in valid_reasons(kb, set(runouts), food), (runouts, food, cause)


# ------------------------------------------------------------
# 4. pricing vs. fact-walking oracle
# ------------------------------------------------------------


def test_sign_off_pricing_agrees_with_oracle_on_1000_orders():
    """1000 fuzzed multi-line orders (dishes, combos, group picks, paid
    and free modifiers) price identically under the order walker and the
    independent fact-tuple summation.  Exact integer equality."""
    from duotalk.orders import OrderLine, OrderLines
    from duotalk.pricing import price_order

    from test_pricing import price_oracle, random_line

    menu = default_menu()
    rng = random.Random(424242)
    for trial in range(1000):
        order = OrderLines()
        for _ in range(rng.randint(0, 5)):
            line = random_line(rng, menu)
            order.add(line.food, line.is_combo)
            order.lines[-1] = OrderLine(
                line.food, order.lines[-1].instance, line.is_combo, line.modifiers
            )
        assert price_order(menu, order) == price_oracle(menu, order), trial


# ------------------------------------------------------------
# 5. state-update semantics
# ------------------------------------------------------------


def test_sign_off_shortage_updates_follow_staging_rules():
    """A name leaves the shortage set iff a restore was staged for it
    (and it was not simultaneously re-reported); staged runouts always
    land.  The reconcile step (rule-engine evaluation) must equal the
    direct set-algebra reading on randomized staged deltas."""
    from duotalk.shared_state import InconsistentDelta

    kb = default_menu()
    pool = sorted(kb.foods("ingredient") + kb.foods("sauce"))[:12]
    rng = random.Random(20260814)

    def delta_of(runouts, restores):
        return StateDelta(
            staged=tuple(
                [struct("new_runout", atom(n)) for n in runouts]
                + [struct("new_restore", atom(n)) for n in restores]
            )
        )

    for _ in range(300):
        current = ShortageState(tuple(rng.sample(pool, rng.randint(0, 5))))
        runouts = rng.sample(pool, rng.randint(0, 3))
        restores = rng.sample([n for n in pool if n not in runouts], rng.randint(0, 3))
        nxt = set(reconcile(kb, current, delta_of(runouts, restores)).runout)
        expected = (set(current.runout) - set(restores)) | set(runouts)
        assert nxt == expected, (current.runout, runouts, restores)
        for name in set(current.runout) - nxt:
            assert name in restores  # removal only ever via a staged restore

    # a delta naming something as both run-out and restored is rejected
    # outright rather than applied in part
    state = ShortageState(("Beans",))
    with pytest.raises(InconsistentDelta):
        reconcile(kb, state, delta_of(["Beans"], ["Beans"]))


def test_sign_off_order_update_admission_matches_engine_clauses():
    """update(dish, op, option) is admitted iff the dish is ordered, the
    dish and option are available, and the operation is still open on
    some instance — exactly the instances derived by evaluating the
    admission clauses with the production rule engine."""
    import copy

    from oracles import admissible_update_instances
    from test_service import (
        DISH_POOL,
        FITTING_UPDATES,
        INGREDIENT_OPS,
        KB,
        SHORTAGE_POOL,
        UPDATE_POOL,
        admit_update,
        cf,
        open_service_session,
        run,
    )

    rng = random.Random(77)
    accepted = 0
    for _ in range(300):
        dish = rng.choice(DISH_POOL)
        shortage = ShortageState(tuple(rng.sample(SHORTAGE_POOL, rng.choice([0, 1, 1, 2]))))
        session = open_service_session("acceptance-fuzz")
        count = rng.choice([0, 1, 1, 2, 3])
        if count:
            run(session, [cf("order", dish, count)], shortage)
        pool = FITTING_UPDATES[dish] + UPDATE_POOL
        for _ in range(rng.randint(0, 3)):
            op, option = rng.choice(pool)
            admit_update(KB, shortage, session.order, cf("update", dish, op, option))

        lines = [
            (line.instance, [(m.op, m.option) for m in line.updates()])
            for line in session.order.instances_of(dish)
        ]
        op, option = rng.choice(pool)
        admissible = admissible_update_instances(KB, shortage.runout, lines, (dish, op, option))
        status, payload = admit_update(
            KB, shortage, copy.deepcopy(session.order), cf("update", dish, op, option)
        )
        label = (dish, op, option, shortage.runout, lines)
        if status == "ok":
            accepted += 1
            assert admissible, label
            settles_all = op not in INGREDIENT_OPS and option in ("no", "regular")
            expected = sorted(admissible) if settles_all else [min(admissible)]
            assert payload == expected, label
        else:
            assert admissible == set(), (label, status)
    assert accepted > 40  # the accepting path must be exercised


# ------------------------------------------------------------
# 6. atomic menu commits
# ------------------------------------------------------------

ADD_DISH_WALK = [
    "Let's add a new dish called {name}.",
    "It's a burrito.",
    "Let's say $3.99.",
    "Lettuce, tomatoes and cheddar cheese.",
    "That's all.",
    "It has 540 calories.",
    "Done.",
]

CUSTOMER_CHATTER = [
    "Can I have a soft taco?",
    "Add beans to the soft taco.",
    "One Pepsi, please.",
    "What is the price of the Crunchy Taco?",
    "Do you have any recommendations?",
]


def test_sign_off_menu_commits_apply_atomically():
    """Across randomized manager/customer interleavings, the
    (kb_version, state_version) history is monotone, and every menu
    snapshot contains either all facts of a staged dish or none —
    a partially applied mutation set is never observable."""
    rng = random.Random(99_2026)
    for trial in range(6):
        store = SharedStore(default_menu())
        orch = Orchestrator(store)
        managers = [orch.open_session("manager") for _ in range(2)]
        customers = [orch.open_session("customer") for _ in range(2)]
        dish_names = [f"Test Wrap {trial}A", f"Test Wrap {trial}B"]
        scripts = {
            managers[0].sid: [line.format(name=dish_names[0]) for line in ADD_DISH_WALK],
            managers[1].sid: [line.format(name=dish_names[1]) for line in ADD_DISH_WALK],
            customers[0].sid: rng.sample(CUSTOMER_CHATTER, 4),
            customers[1].sid: rng.sample(CUSTOMER_CHATTER, 4),
        }
        live = {s.sid for s in managers + customers}
        history = [(store.kb_version, store.state_version)]

        def observe():
            kb, _ = store.peek()
            history.append((store.kb_version, store.state_version))
            for name in dish_names:
                owned = [f for f in kb.facts if any(a == atom(name) for a in f.args)]
                if owned:  # all five facts of the walk, or nothing
                    kinds = {f.name for f in owned}
                    assert {"dish", "category", "original_price", "original_cal"} <= kinds, name

        while live:
            sid = rng.choice(sorted(live))
            if scripts[sid]:
                orch.message(sid, scripts[sid].pop(0))
            else:
                if not orch.get_session(sid).closed:
                    orch.close_session(sid)
                live.discard(sid)
            observe()

        assert history == sorted(history), "versions regressed"
        assert store.kb_version == 3  # exactly one bump per committed dish
        assert store.pending_commits == []
        final_kb, _ = store.peek()
        for name in dish_names:
            assert final_kb.first("dish", [name]) is not None


# ------------------------------------------------------------
# 7. round latency
# ------------------------------------------------------------


def test_sign_off_round_latency_within_budget():
    """Over 50 benchmark rounds against the full 1220-fact menu: mean
    reasoning time per manager round ≤ 50 ms, and mean total time per
    customer round with 10 staged order lines ≤ 1000 ms."""
    manager = run_bench(SharedStore(default_menu()), "manager", rounds=50)
    assert manager["kb_facts"] == 1220
    assert manager["reasoning"]["mean_ms"] <= 50.0, manager

    customer = run_bench(SharedStore(default_menu()), "customer", rounds=50, requirements=10)
    assert customer["kb_facts"] == 1220
    assert customer["total"]["mean_ms"] <= 1000.0, customer


# ------------------------------------------------------------
# 8. human preference scores
# ------------------------------------------------------------


def test_sign_off_human_evaluation_out_of_scope():
    """Reported human preference scores depend on human graders and on
    access to a proprietary comparison system; they cannot be reproduced
    by an automated suite.  The behavioural invariants above stand in
    for them."""
    pytest.skip(
        "human-graded comparison is not reproducible in CI;"
        " covered instead by the invariant suites in this file"
    )
