"""Proof obligation generation.

Builds the obligation set for a machine: invariant preservation (INV),
theorems (THM), and for refinements guard strengthening (GRD), action
simulation (SIM), witness feasibility (WFIS) and merge correctness
(MRG).  Also hosts the hint interpreter that rewrites obligations ahead
of proving (`apply_hints_pog`) and the normalisation step used when
exporting sequents.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .diagnostics import Diagnostic
from .formula import (
    Comparison,
    Ident,
    Membership,
    Not,
    Predicate,
    Quantifier,
    conjunction,
    disjunction,
    free_identifiers,
    prime,
    substitute,
)
from .model import (
    DETERMINISTIC,
    Event,
    Hint,
    Hypothesis,
    KIND_GRD,
    KIND_INV,
    KIND_MRG,
    KIND_SIM,
    KIND_THM,
    KIND_WFIS,
    LabeledPredicate,
    MEMBER_OF,
    Model,
    Origin,
    PoSet,
    ProofObligation,
    Sequent,
    USE_HYPOTHESIS,
)
from .printer import print_formula


@dataclass(frozen=True)
class BaConjunct:
    """One conjunct of an event's before-after predicate.

    ``action_label`` is None for frame conjuncts (variables the event
    does not assign).
    """

    label: str
    predicate: Predicate
    variables: tuple[str, ...]
    action_label: str | None = None


def before_after(event: Event, variables: tuple[str, ...]) -> tuple[BaConjunct, ...]:
    """The before-after predicate of an event, one conjunct per variable
    in declaration order; a multi-target suchThat action yields a single
    conjunct at the position of its first target."""
    by_target: dict[str, object] = {}
    for a in event.actions:
        for t in a.targets:
            by_target[t] = a
    out: list[BaConjunct] = []
    emitted: set[str] = set()
    for v in variables:
        a = by_target.get(v)
        if a is None:
            out.append(
                BaConjunct("BA:" + v, Comparison("=", Ident(v, primed=True), Ident(v)), (v,))
            )
            continue
        if a.label in emitted:
            continue
        emitted.add(a.label)
        label = "BA:" + ",".join(a.targets)
        if a.kind == DETERMINISTIC:
            pred: Predicate = Comparison("=", Ident(a.targets[0], primed=True), a.rhs)
        elif a.kind == MEMBER_OF:
            pred = Membership(Ident(a.targets[0], primed=True), a.rhs)
        else:
            pred = a.rhs
        out.append(BaConjunct(label, pred, a.targets, a.label))
    return tuple(out)


# --- hypothesis assembly -----------------------------------------------------


def _fact_hyps(model: Model, event: Event) -> tuple[Hypothesis, ...]:
    """Visible facts, never selected by default.  The initialisation has
    no pre-state, so it only sees context facts."""
    if event.is_initialisation:
        facts: tuple[LabeledPredicate, ...] = model.context_axioms() + model.context_theorems()
        return tuple(Hypothesis(f.label, f.predicate) for f in facts)
    return tuple(Hypothesis(f.label, f.predicate) for f in model.visible_facts())


def _guard_hyps(event: Event) -> tuple[Hypothesis, ...]:
    return tuple(
        Hypothesis(lp.label, lp.predicate, selected=True)
        for lp in event.guards + event.guard_theorems
    )


def _ba_hyps(model: Model, event: Event) -> tuple[Hypothesis, ...]:
    hyps = [
        Hypothesis(c.label, c.predicate, selected=True)
        for c in before_after(event, model.machine.variables)
    ]
    if model.abstract is not None and not event.refines and not event.is_initialisation:
        # A new event leaves the abstract state alone: frame conjuncts
        # for disappearing variables stand in for the missing witnesses.
        for v in model.disappearing_variables():
            hyps.append(
                Hypothesis(
                    "BA:" + v,
                    Comparison("=", Ident(v, primed=True), Ident(v)),
                    selected=True,
                )
            )
    return tuple(hyps)


def _witness_hyps(event: Event, primed: bool | None = None) -> tuple[Hypothesis, ...]:
    return tuple(
        Hypothesis(w.subject.key, w.predicate, selected=True)
        for w in event.witnesses
        if primed is None or w.subject.primed == primed
    )


# --- obligation families -----------------------------------------------------


def _context_theorem_pos(model: Model) -> list[ProofObligation]:
    """Each context theorem is proved from the axioms of its visibility
    chain so far plus previously stated theorems."""
    out: list[ProofObligation] = []
    prior: list[Hypothesis] = []
    for ctx in model.contexts:
        for ax in ctx.axioms:
            prior.append(Hypothesis(ax.label, ax.predicate, selected=True))
        for th in ctx.theorems:
            out.append(
                ProofObligation(
                    f"{ctx.name}/{th.label}/THM",
                    KIND_THM,
                    Sequent(tuple(prior), th.predicate),
                    Origin(ctx.name, label=th.label),
                )
            )
            prior.append(Hypothesis(th.label, th.predicate, selected=True))
    return out


def _machine_theorem_pos(model: Model) -> list[ProofObligation]:
    m = model.machine
    base: list[Hypothesis] = [
        Hypothesis(f.label, f.predicate, selected=True)
        for f in model.context_axioms() + model.context_theorems()
    ]
    if model.abstract:
        for lp in model.abstract.machine.invariants + model.abstract.machine.theorems:
            base.append(Hypothesis(lp.label, lp.predicate, selected=True))
    for lp in m.invariants:
        base.append(Hypothesis(lp.label, lp.predicate, selected=True))
    out: list[ProofObligation] = []
    for i, th in enumerate(m.theorems):
        prior = [Hypothesis(t.label, t.predicate, selected=True) for t in m.theorems[:i]]
        out.append(
            ProofObligation(
                f"{m.name}/{th.label}/THM",
                KIND_THM,
                Sequent(tuple(base + prior), th.predicate),
                Origin(m.name, label=th.label),
            )
        )
    return out


def _guard_theorem_pos(model: Model, event: Event) -> list[ProofObligation]:
    m = model.machine
    facts = tuple(replace(h, selected=True) for h in _fact_hyps(model, event))
    guards = tuple(Hypothesis(lp.label, lp.predicate, selected=True) for lp in event.guards)
    out: list[ProofObligation] = []
    for i, th in enumerate(event.guard_theorems):
        prior = tuple(
            Hypothesis(t.label, t.predicate, selected=True)
            for t in event.guard_theorems[:i]
        )
        out.append(
            ProofObligation(
                f"{event.name}/{th.label}/THM",
                KIND_THM,
                Sequent(facts + guards + prior, th.predicate),
                Origin(m.name, event.name, th.label),
            )
        )
    return out


def _merge_po(model: Model, event: Event) -> ProofObligation:
    abstract_events = [model.abstract_event(r) for r in event.refines]
    goal = disjunction(
        tuple(conjunction(tuple(g.predicate for g in ae.guards)) for ae in abstract_events if ae)
    )
    hyps = _fact_hyps(model, event) + _guard_hyps(event)
    return ProofObligation(
        f"{event.name}/MRG",
        KIND_MRG,
        Sequent(hyps, goal),
        Origin(model.machine.name, event.name),
    )


def _guard_strengthening_pos(model: Model, event: Event) -> list[ProofObligation]:
    ae = model.abstract_event(event.refines[0])
    if ae is None:
        return []
    hyps = _fact_hyps(model, event) + _guard_hyps(event) + _witness_hyps(event, primed=False)
    return [
        ProofObligation(
            f"{event.name}/{g.label}/GRD",
            KIND_GRD,
            Sequent(hyps, g.predicate),
            Origin(model.machine.name, event.name, g.label),
        )
        for g in ae.guards
    ]


def _wfis_pos(model: Model, event: Event) -> list[ProofObligation]:
    out: list[ProofObligation] = []
    for w in event.witnesses:
        hyps = _fact_hyps(model, event) + _guard_hyps(event)
        if w.subject.primed:
            hyps += _ba_hyps(model, event)
        goal = Quantifier("exists", (w.subject,), w.predicate)
        out.append(
            ProofObligation(
                f"{event.name}/{w.subject.key}/WFIS",
                KIND_WFIS,
                Sequent(hyps, goal),
                Origin(model.machine.name, event.name, w.subject.key),
            )
        )
    return out


def _simulation_pos(model: Model, event: Event) -> list[ProofObligation]:
    ae = model.abstract_event(event.refines[0])
    if ae is None or model.abstract is None:
        return []
    hyps = (
        _fact_hyps(model, event)
        + _guard_hyps(event)
        + _ba_hyps(model, event)
        + _witness_hyps(event)
    )
    out: list[ProofObligation] = []
    for c in before_after(ae, model.abstract.machine.variables):
        label = c.action_label or c.label
        out.append(
            ProofObligation(
                f"{event.name}/{label}/SIM",
                KIND_SIM,
                Sequent(hyps, c.predicate),
                Origin(model.machine.name, event.name, label),
            )
        )
    return out


def _invariant_pos(model: Model, event: Event) -> list[ProofObligation]:
    m = model.machine
    hyps = (
        _fact_hyps(model, event)
        + _guard_hyps(event)
        + _ba_hyps(model, event)
        + _witness_hyps(event)
    )
    primed_names = set(m.variables)
    if not event.is_initialisation:
        primed_names |= set(model.abstract_variables())
    out: list[ProofObligation] = []
    for inv in m.invariants:
        seq = Sequent(hyps, prime(inv.predicate, primed_names))
        if not event.is_initialisation:
            seq = seq.select({inv.label})
        out.append(
            ProofObligation(
                f"{event.name}/{inv.label}/INV",
                KIND_INV,
                seq,
                Origin(m.name, event.name, inv.label),
            )
        )
    return out


def generate(model: Model) -> PoSet:
    """All proof obligations for the model's machine, in a fixed order.

    Hints are ignored here; they are applied either by
    `apply_hints_pog` or by the prover's tactic interpreter.
    """
    m = model.machine
    pos: list[ProofObligation] = []
    pos.extend(_context_theorem_pos(model))
    pos.extend(_machine_theorem_pos(model))
    events = ((m.initialisation,) if m.initialisation else ()) + m.events
    for event in events:
        pos.extend(_guard_theorem_pos(model, event))
        if len(event.refines) >= 2:
            pos.append(_merge_po(model, event))
        elif len(event.refines) == 1:
            pos.extend(_guard_strengthening_pos(model, event))
        pos.extend(_wfis_pos(model, event))
        if event.refines:
            pos.extend(_simulation_pos(model, event))
        pos.extend(_invariant_pos(model, event))
    return PoSet(m.name, "tactic", tuple(pos))


# --- hint application (pog mode) ---------------------------------------------


def describe_hint(hint: Hint) -> str:
    if hint.kind == USE_HYPOTHESIS:
        return f"use {hint.label} for {hint.target}"
    assert hint.predicate is not None
    return f"split case using {print_formula(hint.predicate)} for {hint.target}"


def _hint_for(model: Model, po: ProofObligation) -> Hint | None:
    if po.kind != KIND_INV or po.origin.event is None or po.origin.label is None:
        return None
    event = model.machine.event(po.origin.event)
    if event is None and model.machine.initialisation is not None:
        if model.machine.initialisation.name == po.origin.event:
            event = model.machine.initialisation
    if event is None:
        return None
    for h in event.hints:
        if h.target == po.origin.label:
            return h
    return None


def _unique_label(base: str, taken: tuple[str, ...]) -> str:
    label = base
    while label in taken:
        label += "'"
    return label


def case_sequents(sequent: Sequent, predicate: Predicate) -> tuple[Sequent, Sequent]:
    """Split a sequent on a case predicate.

    Both results additionally select every hypothesis sharing an
    identifier with the predicate, then one gains the predicate as
    hypothesis ``case+`` and the other its negation as ``case-``.
    """
    shared = free_identifiers(predicate)
    hyps = tuple(
        h if h.selected or not (free_identifiers(h.predicate) & shared) else replace(h, selected=True)
        for h in sequent.hypotheses
    )
    labels = tuple(h.label for h in hyps)
    pos = Hypothesis(_unique_label("case+", labels), predicate, selected=True)
    neg = Hypothesis(_unique_label("case-", labels), Not(predicate), selected=True)
    return (
        Sequent(hyps + (pos,), sequent.goal),
        Sequent(hyps + (neg,), sequent.goal),
    )


def apply_hints_pog(poset: PoSet, model: Model) -> tuple[PoSet, list[Diagnostic]]:
    """Rewrite obligations according to the hints of their origin events.

    A use hint widens the selection; a split hint replaces the
    obligation by two case children whose extra hypothesis is the case
    predicate (resp. its negation), additionally selecting every
    hypothesis that shares an identifier with it.
    """
    out: list[ProofObligation] = []
    diags: list[Diagnostic] = []
    for po in poset.obligations:
        hint = _hint_for(model, po)
        if hint is None:
            out.append(po)
            continue
        if hint.kind == USE_HYPOTHESIS:
            assert hint.label is not None
            if po.sequent.get(hint.label) is None:
                diags.append(
                    Diagnostic(
                        "unresolved-hint-label",
                        f"hint label {hint.label!r} is not a hypothesis of {po.name}",
                        hint.loc,
                    )
                )
                out.append(po)
                continue
            seq = po.sequent.select({hint.label})
            out.append(replace(po, sequent=seq, hint_applied=describe_hint(hint)))
            continue
        assert hint.predicate is not None
        described = describe_hint(hint)
        for suffix, seq in zip(("/case1", "/case2"), case_sequents(po.sequent, hint.predicate)):
            out.append(ProofObligation(po.name + suffix, po.kind, seq, po.origin, described))
    return PoSet(poset.source_machine, "pog", tuple(out)), diags


# --- misc --------------------------------------------------------------------


def normalize_deterministic_ba(sequent: Sequent) -> Sequent:
    """Inline deterministic before-after equations.

    Every ``BA:`` hypothesis of the shape ``x' = E`` with prime-free
    ``E`` is substituted into the rest of the sequent and dropped.
    """
    hyps = list(sequent.hypotheses)
    goal = sequent.goal
    changed = True
    while changed:
        changed = False
        for i, h in enumerate(hyps):
            if not h.label.startswith("BA:"):
                continue
            p = h.predicate
            if not (
                isinstance(p, Comparison)
                and p.op == "="
                and isinstance(p.left, Ident)
                and p.left.primed
            ):
                continue
            if any(k.endswith("'") for k in free_identifiers(p.right)):
                continue
            mapping = {p.left.key: p.right}
            hyps = [
                Hypothesis(g.label, substitute(g.predicate, mapping), g.selected)
                for j, g in enumerate(hyps)
                if j != i
            ]
            goal = substitute(goal, mapping)
            changed = True
            break
    return Sequent(tuple(hyps), goal)


def check_new_events(model: Model) -> list[Diagnostic]:
    """New events of a refinement must not assign variables that the
    abstract machine also declares."""
    diags: list[Diagnostic] = []
    if model.abstract is None:
        return diags
    abstract_vars = set(model.abstract.machine.variables)
    for e in model.machine.events:
        if e.refines:
            continue
        for v in e.assigned_variables():
            if v in abstract_vars:
                diags.append(
                    Diagnostic(
                        "new-event-assigns-abstract",
                        f"new event {e.name!r} assigns abstract variable {v!r}",
                        e.loc,
                    )
                )
    return diags
