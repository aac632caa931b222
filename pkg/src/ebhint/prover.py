"""Hint-aware tactic prover.

A sequent is first expanded with the safe structural tactics
(implication introduction, conjunction splitting, one-point rule), then
hints widen the hypothesis selection or split the proof into cases, and
each remaining leaf is closed either syntactically or by `decide`.

`decide` refutes the conjunction of the selected hypotheses and the
negated goal.  Membership is elaborated into arithmetic (memberships in
declared carrier sets stay opaque), the result is put in negation
normal form over linear atoms, all propositional branches are
enumerated, and each branch is checked with Fourier-Motzkin elimination
over rationals with integer bound tightening.  The procedure is sound
but incomplete: PROVED is trustworthy, UNPROVED may just mean "too
hard", and counterexamples are only reported when they check out
against the selected hypotheses.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable

from .formula import (
    And,
    Comparison,
    Falsity,
    Formula,
    Ident,
    Iff,
    Implies,
    IntLiteral,
    IntSet,
    Membership,
    Minus,
    Mul,
    NatSet,
    Not,
    Or,
    Predicate,
    Quantifier,
    SetLiteral,
    Sub,
    Add,
    Truth,
    Unevaluable,
    conjunction,
    evaluate,
    free_identifiers,
    substitute,
    walk,
)
from .model import (
    Hint,
    Hypothesis,
    KIND_INV,
    ProofObligation,
    SPLIT_CASE,
    Sequent,
    USE_HYPOTHESIS,
)
from .pog import case_sequents, describe_hint
from .printer import print_formula

PROVED = "proved"
UNPROVED = "unproved"
UNSUPPORTED = "unsupported"


@dataclass(frozen=True)
class ProveOptions:
    lasso: bool = False
    all_hyps: bool = False
    timeout_ms: int = 2000
    branch_cap: int = 1 << 16


@dataclass(frozen=True)
class TraceStep:
    tactic: str
    detail: str = ""

    def render(self) -> str:
        return f"{self.tactic}({self.detail})" if self.detail else self.tactic


@dataclass(frozen=True)
class Decision:
    status: str
    reason: str
    counterexample: tuple[tuple[str, int], ...] | None = None


@dataclass(frozen=True)
class ProofResult:
    name: str
    kind: str
    status: str
    reason: str
    selected_labels: tuple[str, ...]
    hint_applied: str | None
    trace: tuple[TraceStep, ...]
    counterexample: tuple[tuple[str, int], ...] | None = None

    def trace_summary(self) -> str:
        return "; ".join(step.render() for step in self.trace)


class _Unsupported(Exception):
    def __init__(self, reason: str) -> None:
        super().__init__(reason)
        self.reason = reason


class _Budget(Exception):
    def __init__(self, reason: str) -> None:
        super().__init__(reason)
        self.reason = reason


# --- linear atoms -------------------------------------------------------------

# A linear atom is sum(coeff * var) <= bound with integer coefficients,
# keyed by ((var, coeff), ...) sorted by name plus the bound.
_LinKey = tuple[tuple[tuple[str, int], ...], int]


def _linear(e: Formula) -> tuple[dict[str, int], int]:
    if isinstance(e, IntLiteral):
        return {}, e.value
    if isinstance(e, Ident):
        return {e.key: 1}, 0
    if isinstance(e, Minus):
        coeffs, const = _linear(e.operand)
        return {k: -v for k, v in coeffs.items()}, -const
    if isinstance(e, (Add, Sub)):
        lc, lk = _linear(e.left)
        rc, rk = _linear(e.right)
        sign = 1 if isinstance(e, Add) else -1
        for k, v in rc.items():
            lc[k] = lc.get(k, 0) + sign * v
        return lc, lk + sign * rk
    if isinstance(e, Mul):
        lc, lk = _linear(e.left)
        rc, rk = _linear(e.right)
        if not lc:
            return {k: lk * v for k, v in rc.items()}, lk * rk
        if not rc:
            return {k: rk * v for k, v in lc.items()}, rk * lk
        raise _Unsupported("nonlinear multiplication")
    raise _Unsupported(f"set-valued term in arithmetic position: {print_formula(e)}")


def _atom(diff_coeffs: dict[str, int], bound: int):
    """Normalised leaf for sum(coeffs) <= bound; constant atoms fold."""
    coeffs = {k: v for k, v in diff_coeffs.items() if v != 0}
    if not coeffs:
        return ("true",) if 0 <= bound else ("false",)
    g = math.gcd(*coeffs.values())
    if g > 1:
        coeffs = {k: v // g for k, v in coeffs.items()}
        bound = math.floor(Fraction(bound, g))
    key = ("lin", tuple(sorted(coeffs.items())), bound)
    return ("lit", key, True)


def _le(a: Formula, b: Formula, offset: int = 0):
    """Tree for a - b <= offset."""
    ac, ak = _linear(a)
    bc, bk = _linear(b)
    for k, v in bc.items():
        ac[k] = ac.get(k, 0) - v
    return _atom(ac, offset + bk - ak)


def _nnf(f: Formula, positive: bool):
    """Negation normal form tree over linear and opaque literals.

    Nodes: ("and"|"or", left, right), ("lit", key, polarity),
    ("true",), ("false",).
    """
    if isinstance(f, Truth):
        return ("true",) if positive else ("false",)
    if isinstance(f, Falsity):
        return ("false",) if positive else ("true",)
    if isinstance(f, Not):
        return _nnf(f.operand, not positive)
    if isinstance(f, And):
        op = "and" if positive else "or"
        return (op, _nnf(f.left, positive), _nnf(f.right, positive))
    if isinstance(f, Or):
        op = "or" if positive else "and"
        return (op, _nnf(f.left, positive), _nnf(f.right, positive))
    if isinstance(f, Implies):
        if positive:
            return ("or", _nnf(f.left, False), _nnf(f.right, True))
        return ("and", _nnf(f.left, True), _nnf(f.right, False))
    if isinstance(f, Iff):
        both = ("and", _nnf(f.left, positive), _nnf(f.right, True))
        neither = ("and", _nnf(f.left, not positive), _nnf(f.right, False))
        return ("or", both, neither)
    if isinstance(f, Comparison):
        return _comparison(f, positive)
    if isinstance(f, Membership):
        return _membership(f, positive)
    if isinstance(f, Quantifier):
        raise _Unsupported(f"quantified goal or hypothesis: {print_formula(f)}")
    raise _Unsupported(f"cannot decide {print_formula(f)}")


def _comparison(f: Comparison, positive: bool):
    a, b = f.left, f.right
    op = f.op
    if not positive:
        flip = {"=": "/=", "/=": "=", "<": ">=", ">=": "<", "<=": ">", ">": "<="}
        op = flip[op]
    if op == "<=":
        return _le(a, b)
    if op == "<":
        return _le(a, b, -1)
    if op == ">=":
        return _le(b, a)
    if op == ">":
        return _le(b, a, -1)
    if op == "=":
        return ("and", _le(a, b), _le(b, a))
    return ("or", _le(a, b, -1), _le(b, a, -1))


def _membership(f: Membership, positive: bool):
    if isinstance(f.container, NatSet):
        zero = IntLiteral(0)
        return _comparison(Comparison("<=", zero, f.element), positive)
    if isinstance(f.container, IntSet):
        return ("true",) if positive else ("false",)
    if isinstance(f.container, SetLiteral):
        tree = ("false",)
        for e in reversed(f.container.elements):
            eq = _comparison(Comparison("=", f.element, e), True)
            tree = eq if tree == ("false",) else ("or", eq, tree)
        if not positive:
            return _negate_tree(tree)
        return tree
    if isinstance(f.container, Ident):
        key = ("set", f.container.key, f.element)
        return ("lit", key, positive)
    raise _Unsupported(f"membership in {print_formula(f.container)}")


def _negate_tree(tree):
    head = tree[0]
    if head == "true":
        return ("false",)
    if head == "false":
        return ("true",)
    if head == "lit":
        _, key, polarity = tree
        if key[0] == "set":
            return ("lit", key, not polarity)
        (_, coeffs, bound) = key
        return _atom({k: -v for k, v in coeffs}, -bound - 1)
    op = "or" if head == "and" else "and"
    return (op, _negate_tree(tree[1]), _negate_tree(tree[2]))


# --- branch enumeration -------------------------------------------------------


class _Search:
    def __init__(self, deadline: float | None, cap: int) -> None:
        self.deadline = deadline
        self.cap = cap
        self.visited = 0

    def tick(self) -> None:
        self.visited += 1
        if self.visited > self.cap:
            raise _Budget("branch cap exceeded")
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise _Budget("timeout")


def _simplify(tree, assignment: dict):
    head = tree[0]
    if head in ("true", "false"):
        return tree
    if head == "lit":
        _, key, polarity = tree
        value = assignment.get(key)
        if value is None:
            return tree
        return ("true",) if value == polarity else ("false",)
    left = _simplify(tree[1], assignment)
    right = _simplify(tree[2], assignment)
    if head == "and":
        if left == ("false",) or right == ("false",):
            return ("false",)
        if left == ("true",):
            return right
        if right == ("true",):
            return left
    else:
        if left == ("true",) or right == ("true",):
            return ("true",)
        if left == ("false",):
            return right
        if right == ("false",):
            return left
    return (head, left, right)


def _first_literal(tree):
    if tree[0] == "lit":
        return tree[1]
    if tree[0] in ("and", "or"):
        found = _first_literal(tree[1])
        return found if found is not None else _first_literal(tree[2])
    return None


def _solve(tree, assignment: dict, search: _Search):
    """Depth-first enumeration of propositional branches; a branch that
    makes the tree true is accepted when its linear literals are
    arithmetically consistent.  Returns the integer sample (possibly
    partial), the literal assignment, or None when every branch is
    inconsistent."""
    search.tick()
    tree = _simplify(tree, assignment)
    if tree == ("false",):
        return None
    if tree == ("true",):
        feasible, sample = _feasible(assignment, search)
        if feasible:
            return sample, dict(assignment)
        return None
    key = _first_literal(tree)
    assert key is not None
    for value in (True, False):
        assignment[key] = value
        result = _solve(tree, assignment, search)
        del assignment[key]
        if result is not None:
            return result
    return None


# --- Fourier-Motzkin ----------------------------------------------------------

_Constraint = tuple[tuple[tuple[str, Fraction], ...], Fraction]


def _tighten(coeffs: dict[str, Fraction], bound: Fraction) -> _Constraint | None:
    """Scale to integer coefficients, divide by their gcd and floor the
    bound; all variables range over the integers.  Returns None for a
    trivially true constraint."""
    coeffs = {k: v for k, v in coeffs.items() if v != 0}
    if not coeffs:
        return ((), bound) if bound < 0 else None
    lcm = 1
    for v in coeffs.values():
        lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
    scaled = {k: v * lcm for k, v in coeffs.items()}
    bound = bound * lcm
    g = math.gcd(*(int(v) for v in scaled.values()))
    if g > 1:
        scaled = {k: v / g for k, v in scaled.items()}
        bound = Fraction(math.floor(bound / g))
    return tuple(sorted(scaled.items())), Fraction(math.floor(bound))


def _feasible(assignment: dict, search: _Search) -> tuple[bool, dict[str, int] | None]:
    constraints: set[_Constraint] = set()
    for key, value in assignment.items():
        if key[0] != "lin":
            continue
        _, coeffs, bound = key
        if value:
            c = _tighten({k: Fraction(v) for k, v in coeffs}, Fraction(bound))
        else:
            c = _tighten({k: Fraction(-v) for k, v in coeffs}, Fraction(-bound - 1))
        if c is not None:
            if not c[0]:
                return False, None
            constraints.add(c)

    names = sorted({name for coeffs, _ in constraints for name, _ in coeffs})
    stages: list[tuple[str, set[_Constraint]]] = []
    current = constraints
    for name in names:
        search.tick()
        stages.append((name, current))
        lowers, uppers, rest = [], [], set()
        for coeffs, bound in current:
            a = dict(coeffs).get(name, Fraction(0))
            if a > 0:
                uppers.append((dict(coeffs), bound, a))
            elif a < 0:
                lowers.append((dict(coeffs), bound, a))
            else:
                rest.add((coeffs, bound))
        for lc, lb, la in lowers:
            for uc, ub, ua in uppers:
                combined: dict[str, Fraction] = {}
                for k, v in uc.items():
                    combined[k] = combined.get(k, Fraction(0)) + v * -la
                for k, v in lc.items():
                    combined[k] = combined.get(k, Fraction(0)) + v * ua
                combined.pop(name, None)
                c = _tighten(combined, ub * -la + lb * ua)
                if c is not None:
                    if not c[0]:
                        return False, None
                    rest.add(c)
        current = rest

    sample: dict[str, int] = {}
    exact = True
    for name, cons in reversed(stages):
        lo: Fraction | None = None
        hi: Fraction | None = None
        for coeffs, bound in cons:
            cd = dict(coeffs)
            a = cd.pop(name, Fraction(0))
            if a == 0:
                continue
            rest_value = bound - sum(v * sample.get(k, 0) for k, v in cd.items())
            if a > 0:
                limit = rest_value / a
                hi = limit if hi is None else min(hi, limit)
            else:
                limit = rest_value / a
                lo = limit if lo is None else max(lo, limit)
        low_int = None if lo is None else math.ceil(lo)
        high_int = None if hi is None else math.floor(hi)
        if low_int is not None and high_int is not None and low_int > high_int:
            exact = False
            break
        if (low_int is None or low_int <= 0) and (high_int is None or high_int >= 0):
            sample[name] = 0
        elif low_int is not None and low_int > 0:
            sample[name] = low_int
        else:
            assert high_int is not None
            sample[name] = high_int
    return True, (sample if exact else None)


# --- the decision entry point ---------------------------------------------------


def _has_opaque(formulas: Iterable[Formula]) -> bool:
    for f in formulas:
        for node in walk(f):
            if isinstance(node, Membership) and isinstance(node.container, Ident):
                return True
    return False


def decide(
    hypotheses: tuple[Predicate, ...],
    goal: Predicate,
    deadline: float | None = None,
    cap: int = 1 << 16,
) -> Decision:
    """Validity of hypotheses |- goal, by refuting their conjunction with
    the negated goal."""
    try:
        tree = _nnf(goal, False)
        for h in reversed(hypotheses):
            tree = ("and", _nnf(h, True), tree)
    except _Unsupported as u:
        return Decision(UNSUPPORTED, u.reason)
    search = _Search(deadline, cap)
    try:
        found = _solve(tree, {}, search)
    except _Budget as b:
        return Decision(UNPROVED, b.reason)
    if found is None:
        return Decision(PROVED, "no countermodel")
    sample, assignment = found
    if _has_opaque(hypotheses + (goal,)):
        return Decision(UNPROVED, "countermodel constrains opaque set memberships")
    if sample is None:
        return Decision(UNPROVED, "countermodel is not integral")
    names = sorted(set().union(*[free_identifiers(f) for f in hypotheses + (goal,)]))
    valuation = {n: sample.get(n, 0) for n in names}
    try:
        ok = all(evaluate(h, valuation) for h in hypotheses) and not evaluate(goal, valuation)
    except Unevaluable:
        ok = False
    if not ok:
        return Decision(UNPROVED, "countermodel could not be confirmed")
    return Decision(UNPROVED, "countermodel found", tuple(sorted(valuation.items())))


# --- structural tactics -------------------------------------------------------


def _unique(base: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    label = base
    while label in taken:
        label += "'"
    return label


def _flatten_and(p: Predicate) -> list[Predicate]:
    if isinstance(p, And):
        return _flatten_and(p.left) + _flatten_and(p.right)
    return [p]


def _solved_by_equation(conjunct: Predicate, key: str) -> Formula | None:
    if not (isinstance(conjunct, Comparison) and conjunct.op == "="):
        return None
    left, right = conjunct.left, conjunct.right
    if isinstance(left, Ident) and left.key == key and key not in free_identifiers(right):
        return right
    if isinstance(right, Ident) and right.key == key and key not in free_identifiers(left):
        return left
    return None


def one_point(goal: Predicate) -> Predicate | None:
    """Eliminate existential binders that are pinned by an equation."""
    if not (isinstance(goal, Quantifier) and goal.kind == "exists"):
        return None
    binders = list(goal.binders)
    conjuncts = _flatten_and(goal.body)
    progress = False
    changed = True
    while changed:
        changed = False
        for b in list(binders):
            for i, c in enumerate(conjuncts):
                term = _solved_by_equation(c, b.key)
                if term is None:
                    continue
                rest = conjuncts[:i] + conjuncts[i + 1 :]
                conjuncts = [substitute(p, {b.key: term}) for p in rest]
                binders.remove(b)
                progress = changed = True
                break
            if changed:
                break
    if not progress:
        return None
    body = conjunction(tuple(conjuncts))
    if binders:
        return Quantifier("exists", tuple(binders), body)
    return body


def intro(sequent: Sequent) -> Sequent | None:
    if not isinstance(sequent.goal, Implies):
        return None
    taken = set(sequent.labels())
    n = 1
    while f"intro{n}" in taken:
        n += 1
    hyp = Hypothesis(f"intro{n}", sequent.goal.left, selected=True)
    return Sequent(sequent.hypotheses + (hyp,), sequent.goal.right)


def split_conjunction(sequent: Sequent) -> tuple[Sequent, Sequent] | None:
    if not isinstance(sequent.goal, And):
        return None
    return sequent.with_goal(sequent.goal.left), sequent.with_goal(sequent.goal.right)


def tactic_select(sequent: Sequent, label: str) -> Sequent | None:
    if sequent.get(label) is None:
        return None
    return sequent.select({label})


def tactic_cut(sequent: Sequent, predicate: Predicate) -> tuple[Sequent, Sequent]:
    """Cut: prove the predicate first, then use it.

    Returns the side sequent (same hypotheses, goal replaced by the cut
    predicate) and the main sequent (cut predicate added as a selected
    hypothesis under a fresh label).
    """
    taken = set(sequent.labels())
    n = 1
    while f"cut{n}" in taken:
        n += 1
    side = sequent.with_goal(predicate)
    main = sequent.add(Hypothesis(f"cut{n}", predicate, selected=True))
    return side, main


def tactic_lasso(sequent: Sequent) -> tuple[Sequent, int]:
    """Select unselected hypotheses that share an identifier with the
    goal or with an already selected hypothesis, to a fixed point."""
    hyps = list(sequent.hypotheses)
    reach = set(free_identifiers(sequent.goal))
    for h in hyps:
        if h.selected:
            reach |= free_identifiers(h.predicate)
    added = 0
    changed = True
    while changed:
        changed = False
        for i, h in enumerate(hyps):
            if h.selected:
                continue
            frees = free_identifiers(h.predicate)
            if frees & reach:
                hyps[i] = replace(h, selected=True)
                reach |= frees
                added += 1
                changed = True
    return Sequent(tuple(hyps), sequent.goal), added


def _expand(sequent: Sequent, trace: list[TraceStep]) -> list[Sequent]:
    """Apply intro, conjunction splitting and the one-point rule until
    none of them fires."""
    pending = [sequent]
    leaves: list[Sequent] = []
    while pending:
        s = pending.pop(0)
        intro_result = intro(s)
        if intro_result is not None:
            trace.append(TraceStep("intro", intro_result.hypotheses[-1].label))
            pending.insert(0, intro_result)
            continue
        halves = split_conjunction(s)
        if halves is not None:
            trace.append(TraceStep("splitConjunction", "2 subgoals"))
            pending[0:0] = list(halves)
            continue
        pinned = one_point(s.goal)
        if pinned is not None:
            trace.append(TraceStep("onePoint"))
            pending.insert(0, s.with_goal(pinned))
            continue
        leaves.append(s)
    return leaves


def _close(sequent: Sequent, options: ProveOptions, deadline: float, trace: list[TraceStep]) -> Decision:
    if isinstance(sequent.goal, Truth):
        trace.append(TraceStep("closeSyntactic", "goal is true"))
        return Decision(PROVED, "goal is true")
    for h in sequent.hypotheses:
        if h.selected and h.predicate == sequent.goal:
            trace.append(TraceStep("closeSyntactic", h.label))
            return Decision(PROVED, f"hypothesis {h.label}")
    selected = tuple(h.predicate for h in sequent.hypotheses if h.selected)
    decision = decide(selected, sequent.goal, deadline, options.branch_cap)
    trace.append(TraceStep("decide", decision.reason))
    return decision


def prove_obligation(
    po: ProofObligation,
    hints: tuple[Hint, ...] = (),
    mode: str = "tactic",
    options: ProveOptions = ProveOptions(),
) -> ProofResult:
    """Run the proof pipeline on one obligation.

    In tactic mode, the hint whose target matches the obligation's
    origin label is applied as a tactic; in pog mode hints are assumed
    to be baked into the obligation already.
    """
    deadline = time.perf_counter() + options.timeout_ms / 1000.0
    trace: list[TraceStep] = []
    leaves = _expand(po.sequent, trace)
    hint_applied = po.hint_applied

    if mode == "tactic" and po.kind == KIND_INV:
        hint = next((h for h in hints if h.target == po.origin.label), None)
        if hint is not None:
            if hint.kind == USE_HYPOTHESIS:
                assert hint.label is not None
                selected = [tactic_select(s, hint.label) for s in leaves]
                if all(s is not None for s in selected):
                    leaves = [s for s in selected if s is not None]
                    trace.append(TraceStep("tacticSelect", hint.label))
                    hint_applied = describe_hint(hint)
                else:
                    trace.append(TraceStep("tacticSelect", f"{hint.label} not available"))
            elif hint.kind == SPLIT_CASE:
                assert hint.predicate is not None
                split: list[Sequent] = []
                for s in leaves:
                    split.extend(case_sequents(s, hint.predicate))
                leaves = split
                trace.append(
                    TraceStep("tacticCase", f"{print_formula(hint.predicate)}, {len(split)} subgoals")
                )
                hint_applied = describe_hint(hint)

    if options.all_hyps:
        leaves = [s.select(set(s.labels())) for s in leaves]
        trace.append(TraceStep("selectAll"))
    elif options.lasso:
        lassoed: list[Sequent] = []
        added = 0
        for s in leaves:
            widened, n = tactic_lasso(s)
            lassoed.append(widened)
            added += n
        leaves = lassoed
        trace.append(TraceStep("tacticLasso", f"selected {added} more"))

    statuses: list[str] = []
    counterexample = None
    reasons: list[str] = []
    for s in leaves:
        decision = _close(s, options, deadline, trace)
        statuses.append(decision.status)
        reasons.append(decision.reason)
        if counterexample is None and decision.counterexample is not None:
            counterexample = decision.counterexample

    if any(s == UNPROVED for s in statuses):
        status = UNPROVED
    elif any(s == UNSUPPORTED for s in statuses):
        status = UNSUPPORTED
    else:
        status = PROVED
    reason = "; ".join(dict.fromkeys(reasons)) if reasons else "no goals"

    selected_labels = sorted({label for s in leaves for label in s.selected_labels()})
    return ProofResult(
        name=po.name,
        kind=po.kind,
        status=status,
        reason=reason,
        selected_labels=tuple(selected_labels),
        hint_applied=hint_applied,
        trace=tuple(trace),
        counterexample=counterexample,
    )
