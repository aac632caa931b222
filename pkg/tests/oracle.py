"""Brute-force evaluation oracle, independent of the package's prover.

Validity of a sequent over a small integer box is decided by exhaustive
(numpy vectorized) enumeration.  The evaluation semantics here are
written from scratch on purpose: they share no code with
``ebhint.formula.evaluate`` or the decision core, so agreement between
the two is evidence rather than tautology.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from ebhint.formula import (
    Add,
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
    Quantifier,
    SetLiteral,
    Sub,
    Truth,
)

GRID_LO = -8
GRID_HI = 8


class OracleUnsupported(Exception):
    """The formula is outside the oracle's fragment."""


def collect_identifiers(f: Formula) -> frozenset[str]:
    """Free identifier keys, computed without ebhint helpers."""
    if isinstance(f, Ident):
        return frozenset((f.key,))
    if isinstance(f, Quantifier):
        raise OracleUnsupported("quantifier")
    out: frozenset[str] = frozenset()
    for attr in ("left", "right", "operand", "element", "container"):
        sub = getattr(f, attr, None)
        if isinstance(sub, Formula):
            out |= collect_identifiers(sub)
    if isinstance(f, SetLiteral):
        for e in f.elements:
            out |= collect_identifiers(e)
    return out


def _expr(f: Formula, env: Mapping[str, np.ndarray]) -> np.ndarray:
    if isinstance(f, IntLiteral):
        return np.int64(f.value)
    if isinstance(f, Ident):
        return env[f.key]
    if isinstance(f, Minus):
        return -_expr(f.operand, env)
    if isinstance(f, Add):
        return _expr(f.left, env) + _expr(f.right, env)
    if isinstance(f, Sub):
        return _expr(f.left, env) - _expr(f.right, env)
    if isinstance(f, Mul):
        return _expr(f.left, env) * _expr(f.right, env)
    raise OracleUnsupported(type(f).__name__)


def _pred(f: Formula, env: Mapping[str, np.ndarray]) -> np.ndarray:
    if isinstance(f, Truth):
        return np.bool_(True)
    if isinstance(f, Falsity):
        return np.bool_(False)
    if isinstance(f, Not):
        return ~_pred(f.operand, env)
    if isinstance(f, And):
        return _pred(f.left, env) & _pred(f.right, env)
    if isinstance(f, Or):
        return _pred(f.left, env) | _pred(f.right, env)
    if isinstance(f, Implies):
        return ~_pred(f.left, env) | _pred(f.right, env)
    if isinstance(f, Iff):
        return _pred(f.left, env) == _pred(f.right, env)
    if isinstance(f, Comparison):
        l, r = _expr(f.left, env), _expr(f.right, env)
        if f.op == "=":
            return l == r
        if f.op == "/=":
            return l != r
        if f.op == "<":
            return l < r
        if f.op == "<=":
            return l <= r
        if f.op == ">":
            return l > r
        if f.op == ">=":
            return l >= r
        raise OracleUnsupported(f.op)
    if isinstance(f, Membership):
        e = _expr(f.element, env)
        c = f.container
        if isinstance(c, NatSet):
            return e >= 0
        if isinstance(c, IntSet):
            return np.full(np.shape(e), True) if np.shape(e) else np.bool_(True)
        if isinstance(c, SetLiteral):
            out = np.bool_(False)
            for x in c.elements:
                out = out | (e == _expr(x, env))
            return out
        raise OracleUnsupported("named set membership")
    raise OracleUnsupported(type(f).__name__)


def grid_counterexample(
    hypotheses: tuple[Formula, ...],
    goal: Formula,
    lo: int = GRID_LO,
    hi: int = GRID_HI,
) -> dict[str, int] | None:
    """Search the integer box [lo, hi]^n for hyps true and goal false.

    Returns one offending valuation or ``None`` when the sequent holds
    everywhere on the grid.  Raises :class:`OracleUnsupported` outside
    the linear quantifier-free fragment.
    """
    names = sorted(
        frozenset().union(
            collect_identifiers(goal), *(collect_identifiers(h) for h in hypotheses)
        )
    )
    axis = np.arange(lo, hi + 1, dtype=np.int64)
    if not names:
        bad = ~_pred(goal, {})
        for h in hypotheses:
            bad = bad & _pred(h, {})
        return {} if bool(bad) else None
    grids = np.meshgrid(*[axis] * len(names), indexing="ij")
    env = dict(zip(names, grids))
    bad = ~_pred(goal, env)
    for h in hypotheses:
        bad = bad & _pred(h, env)
    hits = np.argwhere(np.broadcast_to(bad, grids[0].shape))
    if hits.size == 0:
        return None
    first = hits[0]
    return {n: int(axis[i]) for n, i in zip(names, first)}


def holds_at(
    hypotheses: tuple[Formula, ...], goal: Formula, valuation: Mapping[str, int]
) -> bool:
    """True when every hypothesis holds and the goal fails at the point."""
    env = {k: np.int64(v) for k, v in valuation.items()}
    if not all(bool(_pred(h, env)) for h in hypotheses):
        return False
    return not bool(_pred(goal, env))
