"""Formula trees shared by models, proof obligations, and the prover.

A single recursive node type covers both predicates and integer
expressions; the well-formedness checker decides which is legal where.
Nodes are immutable and compare structurally, with source locations
excluded from equality so parse / pretty-print round trips can be
checked with ``==``.

Primed identifiers (post-state values such as ``x'``) are ordinary
identifiers carrying a flag; a doubly primed identifier is not
representable.  Throughout the package identifiers are referred to by
their *key*: the name with a trailing apostrophe when primed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Iterator, Mapping, NamedTuple


class Loc(NamedTuple):
    """1-based source position."""

    line: int
    column: int


@dataclass(frozen=True)
class Formula:
    """Base class of every predicate and expression node."""

    loc: Loc | None = field(default=None, kw_only=True, compare=False, repr=False)


# The distinction is enforced by type checking, not by the class tree.
Predicate = Formula
Expression = Formula


# --- predicate nodes -------------------------------------------------------


@dataclass(frozen=True)
class Truth(Formula):
    pass


@dataclass(frozen=True)
class Falsity(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


#: Comparison operators, canonical ASCII spelling.
COMPARISON_OPS = ("=", "/=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Comparison(Formula):
    op: str
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Membership(Formula):
    element: Formula
    container: Formula


@dataclass(frozen=True)
class Quantifier(Formula):
    """``exists`` or ``forall`` over one or more integer identifiers."""

    kind: str  # "exists" | "forall"
    binders: tuple[Ident, ...]
    body: Formula


# --- expression nodes ------------------------------------------------------


@dataclass(frozen=True)
class IntLiteral(Formula):
    value: int


@dataclass(frozen=True)
class Ident(Formula):
    name: str
    primed: bool = False

    @property
    def key(self) -> str:
        return self.name + "'" if self.primed else self.name


@dataclass(frozen=True)
class Minus(Formula):
    """Unary arithmetic negation."""

    operand: Formula


@dataclass(frozen=True)
class Add(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Sub(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Mul(Formula):
    """Multiplication; well-formedness requires one literal operand."""

    left: Formula
    right: Formula


@dataclass(frozen=True)
class SetLiteral(Formula):
    elements: tuple[Formula, ...]


@dataclass(frozen=True)
class NatSet(Formula):
    """The natural numbers (membership means >= 0)."""


@dataclass(frozen=True)
class IntSet(Formula):
    """The integers (membership is trivially true)."""


_BINARY = (And, Or, Implies, Iff, Add, Sub, Mul)
_UNARY = (Not, Minus)


def children(f: Formula) -> tuple[Formula, ...]:
    """Immediate subformulas, binders excluded."""
    if isinstance(f, _BINARY):
        return (f.left, f.right)
    if isinstance(f, _UNARY):
        return (f.operand,)
    if isinstance(f, Comparison):
        return (f.left, f.right)
    if isinstance(f, Membership):
        return (f.element, f.container)
    if isinstance(f, Quantifier):
        return (f.body,)
    if isinstance(f, SetLiteral):
        return f.elements
    return ()


def walk(f: Formula) -> Iterator[Formula]:
    """Yield every node of the tree, preorder."""
    yield f
    for c in children(f):
        yield from walk(c)


def free_identifiers(f: Formula) -> frozenset[str]:
    """Free identifier keys.  Primed and unprimed occurrences are distinct."""
    if isinstance(f, Ident):
        return frozenset((f.key,))
    if isinstance(f, Quantifier):
        bound = frozenset(b.key for b in f.binders)
        return free_identifiers(f.body) - bound
    out: frozenset[str] = frozenset()
    for c in children(f):
        out |= free_identifiers(c)
    return out


def _rebuild(f: Formula, new: tuple[Formula, ...]) -> Formula:
    if isinstance(f, Comparison):
        return Comparison(f.op, new[0], new[1], loc=f.loc)
    if isinstance(f, Membership):
        return Membership(new[0], new[1], loc=f.loc)
    if isinstance(f, _BINARY):
        return type(f)(new[0], new[1], loc=f.loc)
    if isinstance(f, _UNARY):
        return type(f)(new[0], loc=f.loc)
    if isinstance(f, SetLiteral):
        return SetLiteral(tuple(new), loc=f.loc)
    raise AssertionError(f"cannot rebuild {type(f).__name__}")


_FRESH_LIMIT = 10_000


def _fresh(base: Ident, taken: frozenset[str]) -> Ident:
    for i in range(1, _FRESH_LIMIT):
        cand = Ident(f"{base.name}{i}", base.primed)
        if cand.key not in taken:
            return cand
    raise RuntimeError("fresh identifier space exhausted")


def substitute(f: Formula, mapping: Mapping[str, Formula]) -> Formula:
    """Replace free identifiers by formulas, keyed by identifier key.

    Capture avoiding: quantifier binders shadow the mapping and are
    renamed when a replacement would be captured.
    """
    if not mapping:
        return f
    if isinstance(f, Ident):
        return mapping.get(f.key, f)
    if isinstance(f, Quantifier):
        bound = frozenset(b.key for b in f.binders)
        live = {k: v for k, v in mapping.items() if k not in bound and k in free_identifiers(f.body)}
        if not live:
            return f
        incoming = frozenset().union(*(free_identifiers(v) for v in live.values()))
        binders = list(f.binders)
        body = f.body
        for i, b in enumerate(binders):
            if b.key in incoming:
                taken = incoming | free_identifiers(body) | frozenset(x.key for x in binders) | frozenset(live)
                nb = _fresh(b, taken)
                body = substitute(body, {b.key: nb})
                binders[i] = nb
        return Quantifier(f.kind, tuple(binders), substitute(body, live), loc=f.loc)
    subs = children(f)
    if not subs:
        return f
    return _rebuild(f, tuple(substitute(c, mapping) for c in subs))


def prime(f: Formula, names: Iterable[str]) -> Formula:
    """Prime every free unprimed occurrence of the given variable names."""
    return substitute(f, {n: Ident(n, primed=True) for n in names})


def conjunction(preds: Iterable[Predicate]) -> Predicate:
    items = list(preds)
    if not items:
        return Truth()
    return reduce(And, items)


def disjunction(preds: Iterable[Predicate]) -> Predicate:
    items = list(preds)
    if not items:
        return Falsity()
    return reduce(Or, items)


class Unevaluable(Exception):
    """Raised when a formula cannot be evaluated under a valuation."""


def evaluate(f: Formula, valuation: Mapping[str, int]):
    """Evaluate a quantifier-free formula under an integer valuation.

    Predicates yield bool, expressions int.  Membership in a named set
    and quantifiers raise :class:`Unevaluable`.
    """
    if isinstance(f, Truth):
        return True
    if isinstance(f, Falsity):
        return False
    if isinstance(f, IntLiteral):
        return f.value
    if isinstance(f, Ident):
        try:
            return valuation[f.key]
        except KeyError:
            raise Unevaluable(f"no value for {f.key}") from None
    if isinstance(f, Minus):
        return -evaluate(f.operand, valuation)
    if isinstance(f, Add):
        return evaluate(f.left, valuation) + evaluate(f.right, valuation)
    if isinstance(f, Sub):
        return evaluate(f.left, valuation) - evaluate(f.right, valuation)
    if isinstance(f, Mul):
        return evaluate(f.left, valuation) * evaluate(f.right, valuation)
    if isinstance(f, Not):
        return not evaluate(f.operand, valuation)
    if isinstance(f, And):
        return evaluate(f.left, valuation) and evaluate(f.right, valuation)
    if isinstance(f, Or):
        return evaluate(f.left, valuation) or evaluate(f.right, valuation)
    if isinstance(f, Implies):
        return (not evaluate(f.left, valuation)) or evaluate(f.right, valuation)
    if isinstance(f, Iff):
        return evaluate(f.left, valuation) == evaluate(f.right, valuation)
    if isinstance(f, Comparison):
        l = evaluate(f.left, valuation)
        r = evaluate(f.right, valuation)
        return {
            "=": l == r,
            "/=": l != r,
            "<": l < r,
            "<=": l <= r,
            ">": l > r,
            ">=": l >= r,
        }[f.op]
    if isinstance(f, Membership):
        e = evaluate(f.element, valuation)
        c = f.container
        if isinstance(c, NatSet):
            return e >= 0
        if isinstance(c, IntSet):
            return True
        if isinstance(c, SetLiteral):
            return any(e == evaluate(x, valuation) for x in c.elements)
        raise Unevaluable("membership in a named set is not evaluable")
    if isinstance(f, Quantifier):
        raise Unevaluable("quantified formulas are not evaluable")
    raise AssertionError(f"unhandled node {type(f).__name__}")
