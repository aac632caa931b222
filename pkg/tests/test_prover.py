"""The decision core and the tactic layer."""

from __future__ import annotations

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURES
from ebhint.formula import Truth, evaluate
from ebhint.model import Hypothesis, Sequent
from ebhint.parser import load_model, parse_predicate
from ebhint.pog import case_sequents, generate
from ebhint.prover import (
    PROVED,
    UNPROVED,
    UNSUPPORTED,
    ProveOptions,
    decide,
    intro,
    one_point,
    prove_obligation,
    split_conjunction,
    tactic_cut,
    tactic_lasso,
    tactic_select,
)
from oracle import grid_counterexample, holds_at
from strategies import random_sequent, sequents


def p(text: str):
    return parse_predicate(text)


def seq(hyp_texts, goal_text, selected=True):
    hyps = tuple(
        Hypothesis(f"h{i + 1}", p(t), selected=selected) for i, t in enumerate(hyp_texts)
    )
    return Sequent(hyps, p(goal_text))


# --- decide: frozen examples ---------------------------------------------------


def test_decide_case_branch_example():
    d = decide((p("A <= C"), p("A = 1 => B <= C"), p("A = 1")), p("B - 1 <= C"))
    assert d.status == PROVED


def test_decide_counterexample_example():
    hyps = (p("x in NAT"), p("x in {1, 2}"))
    goal = p("y + 1 in NAT")
    d = decide(hyps, goal)
    assert d.status == UNPROVED
    assert d.counterexample is not None
    val = dict(d.counterexample)
    assert all(evaluate(h, val) for h in hyps)
    assert not evaluate(goal, val)


def test_decide_tautology_example():
    d = decide((), p("A = 1 or A /= 1"))
    assert d.status == PROVED


def test_decide_inconsistent_hypotheses():
    d = decide((p("x <= 0"), p("x >= 1")), p("1 = 2"))
    assert d.status == PROVED


def test_decide_quantifier_unsupported():
    d = decide((), p("exists q . q <= k"))
    assert d.status == UNSUPPORTED


def test_decide_nonlinear_unsupported():
    d = decide((), p("x * x >= 0"))
    assert d.status == UNSUPPORTED


def test_decide_opaque_set_membership_sound():
    # S is a named set: x in S proves x in S, but nothing more
    assert decide((p("x in S"),), p("x in S")).status == PROVED
    d = decide((p("x in S"),), p("y in S"))
    assert d.status == UNPROVED
    assert d.counterexample is None  # not confirmable, so not reported


def test_decide_branch_budget():
    hyps = tuple(p(f"v{i} in {{0, 1}}") for i in range(20))
    d = decide(hyps, p("v0 + v1 >= 9"), cap=4)
    assert d.status == UNPROVED
    assert "branch cap" in d.reason
    assert d.counterexample is None


# --- tactics -------------------------------------------------------------------


def test_one_point_direct_equality():
    assert one_point(p("exists q . q = r")) == Truth()


def test_one_point_partial_elimination():
    got = one_point(p("exists v' . v' = w' + 1 & v' >= 0"))
    assert got == p("w' + 1 >= 0")


def test_one_point_inapplicable():
    assert one_point(p("exists q . q <= k")) is None
    assert one_point(p("q = 1")) is None


def test_one_point_multiple_binders():
    got = one_point(p("exists a b . a = b + 1 & b = 5"))
    assert got == Truth()


def test_one_point_skips_self_referential_equation():
    assert one_point(p("exists a . a = a + 1")) is None


def test_intro_moves_antecedent():
    s = seq([], "x = 1 => x >= 1")
    t = intro(s)
    assert t.goal == p("x >= 1")
    assert t.hypotheses[-1].label == "intro1"
    assert t.hypotheses[-1].selected
    # fresh numbering avoids collisions
    u = intro(Sequent(t.hypotheses, p("x = 2 => x >= 2")))
    assert u.hypotheses[-1].label == "intro2"


def test_split_conjunction():
    s = seq([], "x = 1 & x <= 2")
    a, b = split_conjunction(s)
    assert a.goal == p("x = 1") and b.goal == p("x <= 2")
    assert split_conjunction(seq([], "x = 1")) is None


def test_tactic_select_adds_to_selection():
    s = Sequent(
        (
            Hypothesis("h1", p("x = 1"), selected=True),
            Hypothesis("h2", p("y = 2"), selected=False),
        ),
        p("x + y = 3"),
    )
    t = tactic_select(s, "h2")
    assert set(t.selected_labels()) == {"h1", "h2"}
    assert tactic_select(s, "nosuch") is None


def test_tactic_select_idempotent():
    s = seq(["x = 1", "y = 2"], "x + y = 3", selected=False)
    once = tactic_select(s, "h1")
    assert tactic_select(once, "h1") == once


def test_tactic_lasso_reaches_fixpoint():
    s = Sequent(
        (
            Hypothesis("h1", p("a = b")),
            Hypothesis("h2", p("b = c")),
            Hypothesis("h3", p("d = 0")),
        ),
        p("a >= 0"),
    )
    t, added = tactic_lasso(s)
    # h2 joins through h1 even though it shares nothing with the goal
    assert added == 2
    assert set(t.selected_labels()) == {"h1", "h2"}
    again, more = tactic_lasso(t)
    assert more == 0 and again == t


def test_tactic_lasso_selects_conditioned_invariant():
    model, _ = load_model(FIXTURES / "hypSel0.ebh")
    po = generate(model).get("set/hypSel0_1/INV")
    widened, added = tactic_lasso(po.sequent)
    # hypSel0_1 is already selected as the target invariant; only the
    # conditioned invariant joins
    assert added == 1
    sel = set(widened.selected_labels())
    assert "hypSel0_2" in sel and "hypSel0_1" in sel


def test_tactic_cut_side_and_main():
    s = Sequent((Hypothesis("h1", p("x in {1, 2}"), selected=True),), p("x + 1 >= 2"))
    side, main = tactic_cut(s, p("x >= 1"))
    assert side.goal == p("x >= 1")
    assert side.hypotheses == s.hypotheses
    cut_hyp = main.get("cut1")
    assert cut_hyp is not None and cut_hyp.selected
    assert main.goal == s.goal
    # both pieces close under the default decision core
    assert decide(tuple(h.predicate for h in side.hypotheses if h.selected), side.goal).status == PROVED
    assert decide(tuple(h.predicate for h in main.hypotheses if h.selected), main.goal).status == PROVED


def test_tactic_cut_existing_hypothesis_closes_side():
    s = Sequent((Hypothesis("h1", p("x >= 1"), selected=True),), p("x >= 0"))
    side, _main = tactic_cut(s, p("x >= 1"))
    assert any(h.selected and h.predicate == side.goal for h in side.hypotheses)


def test_tactic_cut_false_on_inconsistent_hypotheses():
    s = seq(["x <= 0", "x >= 1"], "y = 99")
    side, main = tactic_cut(s, p("1 = 0"))
    assert decide(tuple(h.predicate for h in side.hypotheses), side.goal).status == PROVED
    assert decide(tuple(h.predicate for h in main.hypotheses), main.goal).status == PROVED


def test_tactic_cut_fresh_label():
    s = Sequent((Hypothesis("cut1", p("x = 1")),), p("x = 1"))
    _side, main = tactic_cut(s, p("x >= 1"))
    assert main.get("cut2") is not None


# --- property tests -------------------------------------------------------------


@settings(max_examples=75, deadline=None)
@given(sequents())
def test_decide_sound_against_grid(s):
    hyps = tuple(h.predicate for h in s.hypotheses if h.selected)
    d = decide(hyps, s.goal)
    if d.status == PROVED:
        assert grid_counterexample(hyps, s.goal) is None
    if d.counterexample is not None:
        assert holds_at(hyps, s.goal, dict(d.counterexample))


@settings(max_examples=50, deadline=None)
@given(sequents(), st.integers(0, 5))
def test_decide_monotone_in_hypotheses(s, k):
    hyps = tuple(h.predicate for h in s.hypotheses if h.selected)
    extra = tuple(h.predicate for h in s.hypotheses if not h.selected)
    if decide(hyps, s.goal).status == PROVED:
        more = hyps + extra[: k % (len(extra) + 1)]
        assert decide(more, s.goal).status == PROVED


@settings(max_examples=50, deadline=None)
@given(sequents())
def test_case_split_sound_against_grid(s):
    rng = random.Random(42)
    pred = p(f"a = {rng.randint(-2, 2)}")
    pos, neg = case_sequents(s, pred)

    def proved(child):
        hyps = tuple(h.predicate for h in child.hypotheses if h.selected)
        return decide(hyps, child.goal).status == PROVED

    if proved(pos) and proved(neg):
        all_hyps = tuple(h.predicate for h in s.hypotheses)
        assert grid_counterexample(all_hyps, s.goal) is None


@settings(max_examples=50, deadline=None)
@given(sequents())
def test_lasso_idempotent_property(s):
    once, _ = tactic_lasso(s)
    twice, added = tactic_lasso(once)
    assert added == 0 and twice == once


# --- prove_obligation ------------------------------------------------------------


def hinted_po(name="set/hypSel0_1/INV"):
    model, _ = load_model(FIXTURES / "hypSel0.ebh")
    poset = generate(model)
    po = poset.get(name)
    hints = model.machine.events[0].hints
    return po, hints


def test_prove_obligation_hint_makes_the_difference():
    po, hints = hinted_po()
    bare = prove_obligation(po)
    assert bare.status == UNPROVED
    assert bare.counterexample is not None
    hinted = prove_obligation(po, hints)
    assert hinted.status == PROVED
    assert hinted.hint_applied == "use hypSel0_2 for hypSel0_1"
    assert any(step.tactic == "tacticSelect" for step in hinted.trace)
    assert "hypSel0_2" in hinted.selected_labels


def test_prove_obligation_hint_only_for_matching_target():
    po, hints = hinted_po("set/hypSel0_2/INV")
    result = prove_obligation(po, hints)
    assert result.status == PROVED
    assert result.hint_applied is None


def test_prove_obligation_case_hint_trace():
    model, _ = load_model(FIXTURES / "case0.ebh")
    poset = generate(model)
    po = poset.get("set/case0_1/INV")
    hints = model.machine.events[0].hints
    result = prove_obligation(po, hints)
    assert result.status == PROVED
    step = next(s for s in result.trace if s.tactic == "tacticCase")
    assert "2 subgoals" in step.detail


def test_prove_obligation_all_hyps_option():
    po, _ = hinted_po()
    result = prove_obligation(po, options=ProveOptions(all_hyps=True))
    assert result.status == PROVED
    assert "selectAll" in {s.tactic for s in result.trace}


def test_prove_obligation_lasso_option():
    po, _ = hinted_po()
    result = prove_obligation(po, options=ProveOptions(lasso=True))
    assert result.status == PROVED


def test_prove_obligation_aggregates_worst_status(tmp_path):
    src = (
        "machine m\nvariables x\ninvariants\n"
        "  i1: x in NAT & x <= 9\nevents\n  event e\n  then\n    a1: x := x - 1\n  end\nend\n"
    )
    f = tmp_path / "m.ebh"
    f.write_text(src)
    model, _ = load_model(f)
    po = generate(model).get("e/i1/INV")
    result = prove_obligation(po)
    # the conjunction splits; x' >= 0 fails while x' <= 9 holds
    assert result.status == UNPROVED


# --- seeded bulk run mirroring the acceptance generator -------------------------


def test_random_sequents_never_crash_decide():
    rng = random.Random(11)
    for _ in range(100):
        s = random_sequent(rng)
        hyps = tuple(h.predicate for h in s.hypotheses if h.selected)
        d = decide(hyps, s.goal)
        assert d.status in {PROVED, UNPROVED, UNSUPPORTED}
