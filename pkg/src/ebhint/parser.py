"""Lexer, parser, and file loader for the ``.ebh`` modelling language.

The grammar is deterministic with one token of lookahead.  ASCII
operator spellings are canonical; the common Unicode forms are accepted
as aliases.  ``//`` starts a line comment.  One context or machine per
file; ``sees``, ``refines``, and ``extends`` references are resolved by
file name in the directory of the referring file.

Operator precedence, loosest first:

    <=>   (right associative)
    =>    (right associative)
    or
    &
    not
    = /= < <= > >= in   (non associative)
    + -
    *
    unary -

A quantifier body extends as far right as possible; parenthesize the
quantifier when it is an operand.
"""

from __future__ import annotations

from pathlib import Path
from typing import NamedTuple

from .diagnostics import Diagnostic
from .formula import (
    Add,
    Comparison,
    Falsity,
    Formula,
    Ident,
    IntLiteral,
    IntSet,
    Loc,
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
    Truth,
    And,
    Iff,
    Implies,
)
from .model import (
    Assignment,
    Context,
    DETERMINISTIC,
    Event,
    Hint,
    INITIALISATION,
    LabeledPredicate,
    MEMBER_OF,
    Machine,
    Model,
    SPLIT_CASE,
    SUCH_THAT,
    USE_HYPOTHESIS,
    Witness,
)

KEYWORDS = frozenset(
    """machine refines sees variables invariants theorems events event
       initialisation any where thm with then hints end use for split case
       using context extends sets constants axioms
       true false not or in exists forall NAT INT""".split()
)

_SYMBOLS = ("<=>", ":=", "::", ":|", "<=", ">=", "/=", "=>",
            "=", "<", ">", "&", "(", ")", "{", "}", ",", ".", "+", "-", "*", ":")

# Unicode aliases, each one character long.
_UNI_SYMBOL = {"≤": "<=", "≥": ">=", "≠": "/=", "⇒": "=>", "⇔": "<=>",
               "≔": ":=", "∧": "&", "·": ".", "−": "-"}
_UNI_KEYWORD = {"∨": "or", "¬": "not", "∈": "in", "ℕ": "NAT", "ℤ": "INT",
                "∃": "exists", "∀": "forall"}


class Token(NamedTuple):
    kind: str  # "ident", "pident", "int", "kw", "eof", or a symbol
    text: str
    loc: Loc


class ParseError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.render())
        self.diagnostic = diagnostic


def _err(message: str, loc: Loc, path: str, code: str = "syntax") -> ParseError:
    return ParseError(Diagnostic(code, message, loc, path))


def lex(text: str, path: str = "<string>") -> list[Token]:
    tokens: list[Token] = []
    line, col, i = 1, 1, 0
    n = len(text)

    def loc() -> Loc:
        return Loc(line, col)

    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            start = i
            here = loc()
            while i < n and text[i].isdigit():
                i += 1
            tokens.append(Token("int", text[start:i], here))
            col += i - start
            continue
        if ch.isalpha() or ch == "_":
            start = i
            here = loc()
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            word = text[start:i]
            col += i - start
            # ℕ and ℤ are alphabetic, so they arrive here rather than
            # in the single-character branches below.
            word = _UNI_KEYWORD.get(word, word)
            if word in KEYWORDS:
                tokens.append(Token("kw", word, here))
            elif i < n and text[i] == "'":
                i += 1
                col += 1
                if i < n and text[i] == "'":
                    raise _err(f"doubly primed identifier {word!r}", here, path)
                tokens.append(Token("pident", word, here))
            else:
                tokens.append(Token("ident", word, here))
            continue
        if ch in _UNI_KEYWORD:
            tokens.append(Token("kw", _UNI_KEYWORD[ch], loc()))
            i += 1
            col += 1
            continue
        if ch in _UNI_SYMBOL:
            sym = _UNI_SYMBOL[ch]
            tokens.append(Token(sym, sym, loc()))
            i += 1
            col += 1
            continue
        if ch == ":" and i + 1 < n and text[i + 1] == "∈":
            tokens.append(Token("::", "::", loc()))
            i += 2
            col += 2
            continue
        if ch == ":" and i + 1 < n and text[i + 1] == "|":
            tokens.append(Token(":|", ":|", loc()))
            i += 2
            col += 2
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token(sym, sym, loc()))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise _err(f"unexpected character {ch!r}", loc(), path)
    tokens.append(Token("eof", "", Loc(line, col)))
    return tokens


_CMP_TOKENS = ("=", "/=", "<", "<=", ">", ">=")


class Parser:
    def __init__(self, tokens: list[Token], path: str):
        self.tokens = tokens
        self.pos = 0
        self.path = path

    # -- token plumbing -------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def at(self, kind: str) -> bool:
        return self.peek().kind == kind

    def at_kw(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == "kw" and tok.text in words

    def take_kw(self, word: str) -> bool:
        if self.at_kw(word):
            self.advance()
            return True
        return False

    def fail(self, message: str) -> ParseError:
        return _err(message, self.peek().loc, self.path)

    def expect(self, kind: str, what: str | None = None) -> Token:
        if not self.at(kind):
            tok = self.peek()
            found = tok.text or "end of file"
            raise self.fail(f"expected {what or kind!r}, found {found!r}")
        return self.advance()

    def expect_kw(self, word: str) -> Token:
        if not self.at_kw(word):
            tok = self.peek()
            found = tok.text or "end of file"
            raise self.fail(f"expected '{word}', found {found!r}")
        return self.advance()

    def ident(self, what: str = "identifier") -> Token:
        if not self.at("ident"):
            tok = self.peek()
            found = tok.text or "end of file"
            raise self.fail(f"expected {what}, found {found!r}")
        return self.advance()

    # -- identifier lists ------------------------------------------------

    def ident_list(self, what: str, allow_primed: bool = False) -> list[Token]:
        """One or more identifiers; commas between them are optional."""
        kinds = ("ident", "pident") if allow_primed else ("ident",)
        if self.peek().kind not in kinds:
            raise self.fail(f"expected {what}")
        out = [self.advance()]
        while True:
            if self.at(","):
                self.advance()
                if self.peek().kind not in kinds:
                    raise self.fail(f"expected {what} after ','")
                out.append(self.advance())
            elif self.peek().kind in kinds:
                out.append(self.advance())
            else:
                return out

    # -- formulas ---------------------------------------------------------

    def formula(self) -> Formula:
        return self._iff()

    def _iff(self) -> Formula:
        left = self._implies()
        if self.at("<=>"):
            loc = self.advance().loc
            return Iff(left, self._iff(), loc=loc)
        return left

    def _implies(self) -> Formula:
        left = self._or()
        if self.at("=>"):
            loc = self.advance().loc
            return Implies(left, self._implies(), loc=loc)
        return left

    def _or(self) -> Formula:
        left = self._and()
        while self.at_kw("or"):
            loc = self.advance().loc
            left = Or(left, self._and(), loc=loc)
        return left

    def _and(self) -> Formula:
        left = self._not()
        while self.at("&"):
            loc = self.advance().loc
            left = And(left, self._not(), loc=loc)
        return left

    def _not(self) -> Formula:
        if self.at_kw("not"):
            loc = self.advance().loc
            return Not(self._not(), loc=loc)
        return self._comparison()

    def _comparison(self) -> Formula:
        left = self._additive()
        tok = self.peek()
        if tok.kind in _CMP_TOKENS:
            self.advance()
            right = self._additive()
            self._reject_chain()
            return Comparison(tok.kind, left, right, loc=tok.loc)
        if self.at_kw("in"):
            self.advance()
            right = self._additive()
            self._reject_chain()
            return Membership(left, right, loc=tok.loc)
        return left

    def _reject_chain(self) -> None:
        if self.peek().kind in _CMP_TOKENS or self.at_kw("in"):
            raise self.fail("comparisons are non-associative; add parentheses")

    def _additive(self) -> Formula:
        left = self._multiplicative()
        while self.at("+") or self.at("-"):
            tok = self.advance()
            right = self._multiplicative()
            cls = Add if tok.kind == "+" else Sub
            left = cls(left, right, loc=tok.loc)
        return left

    def _multiplicative(self) -> Formula:
        left = self._unary()
        while self.at("*"):
            loc = self.advance().loc
            left = Mul(left, self._unary(), loc=loc)
        return left

    def _unary(self) -> Formula:
        if self.at("-"):
            loc = self.advance().loc
            operand = self._unary()
            # fold negative integer literals so they print back verbatim
            if isinstance(operand, IntLiteral):
                return IntLiteral(-operand.value, loc=loc)
            return Minus(operand, loc=loc)
        return self._primary()

    def _primary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            return IntLiteral(int(tok.text), loc=tok.loc)
        if tok.kind == "ident":
            self.advance()
            return Ident(tok.text, loc=tok.loc)
        if tok.kind == "pident":
            self.advance()
            return Ident(tok.text, primed=True, loc=tok.loc)
        if tok.kind == "kw":
            if tok.text == "true":
                self.advance()
                return Truth(loc=tok.loc)
            if tok.text == "false":
                self.advance()
                return Falsity(loc=tok.loc)
            if tok.text == "NAT":
                self.advance()
                return NatSet(loc=tok.loc)
            if tok.text == "INT":
                self.advance()
                return IntSet(loc=tok.loc)
            if tok.text in ("exists", "forall"):
                self.advance()
                binders = tuple(
                    Ident(t.text, primed=(t.kind == "pident"), loc=t.loc)
                    for t in self.ident_list("bound identifier", allow_primed=True)
                )
                self.expect(".", "'.' after quantifier binders")
                return Quantifier(tok.text, binders, self.formula(), loc=tok.loc)
        if tok.kind == "(":
            self.advance()
            inner = self.formula()
            self.expect(")")
            return inner
        if tok.kind == "{":
            self.advance()
            elements = [self.formula()]
            while self.at(","):
                self.advance()
                elements.append(self.formula())
            self.expect("}")
            return SetLiteral(tuple(elements), loc=tok.loc)
        found = tok.text or "end of file"
        raise self.fail(f"expected an expression or predicate, found {found!r}")

    # -- labeled predicates ------------------------------------------------

    def labeled_predicates(self) -> list[LabeledPredicate]:
        out = []
        while self.at("ident"):
            label = self.advance()
            self.expect(":", "':' after label")
            out.append(LabeledPredicate(label.text, self.formula(), loc=label.loc))
        return out

    # -- events -------------------------------------------------------------

    def event(self) -> Event:
        tok = self.peek()
        if self.take_kw("initialisation"):
            name = INITIALISATION
        else:
            self.expect_kw("event")
            name = self.ident("event name").text
        refines: tuple[str, ...] = ()
        if self.take_kw("refines"):
            refines = tuple(t.text for t in self.ident_list("abstract event name"))
        parameters: tuple[str, ...] = ()
        if self.take_kw("any"):
            parameters = tuple(t.text for t in self.ident_list("parameter"))
        guards: list[LabeledPredicate] = []
        if self.take_kw("where"):
            guards = self.labeled_predicates()
        guard_theorems: list[LabeledPredicate] = []
        if self.take_kw("thm"):
            guard_theorems = self.labeled_predicates()
        witnesses: list[Witness] = []
        if self.take_kw("with"):
            while self.peek().kind in ("ident", "pident"):
                sub = self.advance()
                self.expect(":", "':' after witness subject")
                subject = Ident(sub.text, primed=(sub.kind == "pident"), loc=sub.loc)
                witnesses.append(Witness(subject, self.formula(), loc=sub.loc))
        actions: list[Assignment] = []
        if self.take_kw("then"):
            while self.at("ident"):
                actions.append(self.action())
        hints: list[Hint] = []
        if self.take_kw("hints"):
            while self.at_kw("use", "split"):
                hints.append(self.hint())
        self.expect_kw("end")
        return Event(
            name,
            refines=refines,
            parameters=parameters,
            guards=tuple(guards),
            guard_theorems=tuple(guard_theorems),
            witnesses=tuple(witnesses),
            actions=tuple(actions),
            hints=tuple(hints),
            loc=tok.loc,
        )

    def action(self) -> Assignment:
        label = self.ident("action label")
        self.expect(":", "':' after action label")
        targets = [t.text for t in self.ident_list("assignment target")]
        tok = self.peek()
        if tok.kind == ":=":
            kind = DETERMINISTIC
        elif tok.kind == "::":
            kind = MEMBER_OF
        elif tok.kind == ":|":
            kind = SUCH_THAT
        else:
            raise self.fail("expected ':=', '::' or ':|'")
        self.advance()
        if kind != SUCH_THAT and len(targets) != 1:
            raise _err(f"'{tok.kind}' takes exactly one target", tok.loc, self.path)
        return Assignment(label.text, kind, tuple(targets), self.formula(), loc=label.loc)

    def hint(self) -> Hint:
        tok = self.peek()
        if self.take_kw("use"):
            label = self.ident("hypothesis label").text
            self.expect_kw("for")
            target = self.ident("invariant label").text
            return Hint(USE_HYPOTHESIS, target, label=label, loc=tok.loc)
        self.expect_kw("split")
        self.expect_kw("case")
        self.expect_kw("using")
        predicate = self.formula()
        self.expect_kw("for")
        target = self.ident("invariant label").text
        return Hint(SPLIT_CASE, target, predicate=predicate, loc=tok.loc)

    # -- machine and context --------------------------------------------------

    def machine(self) -> Machine:
        loc = self.expect_kw("machine").loc
        name = self.ident("machine name").text
        refines = self.ident("machine name").text if self.take_kw("refines") else None
        sees = self.ident("context name").text if self.take_kw("sees") else None
        variables: tuple[str, ...] = ()
        if self.take_kw("variables"):
            variables = tuple(t.text for t in self.ident_list("variable"))
        invariants: list[LabeledPredicate] = []
        if self.take_kw("invariants"):
            invariants = self.labeled_predicates()
        theorems: list[LabeledPredicate] = []
        if self.take_kw("theorems"):
            theorems = self.labeled_predicates()
        events: list[Event] = []
        initialisation: Event | None = None
        if self.take_kw("events"):
            while self.at_kw("event", "initialisation"):
                here = self.peek().loc
                e = self.event()
                if e.is_initialisation:
                    if initialisation is not None:
                        raise _err("duplicate initialisation event", here, self.path)
                    initialisation = e
                else:
                    events.append(e)
        self.expect_kw("end")
        return Machine(
            name,
            refines=refines,
            sees=sees,
            variables=variables,
            invariants=tuple(invariants),
            theorems=tuple(theorems),
            events=tuple(events),
            initialisation=initialisation,
            loc=loc,
        )

    def context(self) -> Context:
        loc = self.expect_kw("context").loc
        name = self.ident("context name").text
        extends = self.ident("context name").text if self.take_kw("extends") else None
        sets: tuple[str, ...] = ()
        if self.take_kw("sets"):
            sets = tuple(t.text for t in self.ident_list("carrier set name"))
        constants: tuple[str, ...] = ()
        if self.take_kw("constants"):
            constants = tuple(t.text for t in self.ident_list("constant name"))
        axioms: list[LabeledPredicate] = []
        if self.take_kw("axioms"):
            axioms = self.labeled_predicates()
        theorems: list[LabeledPredicate] = []
        if self.take_kw("theorems"):
            theorems = self.labeled_predicates()
        self.expect_kw("end")
        return Context(
            name,
            extends=extends,
            sets=sets,
            constants=constants,
            axioms=tuple(axioms),
            theorems=tuple(theorems),
            loc=loc,
        )

    def component(self) -> Machine | Context:
        if self.at_kw("machine"):
            out: Machine | Context = self.machine()
        elif self.at_kw("context"):
            out = self.context()
        else:
            raise self.fail("expected 'machine' or 'context'")
        self.expect("eof", "end of file (one component per file)")
        return out


# --- public API ----------------------------------------------------------


def parse_source(text: str, path: str = "<string>") -> Machine | Context:
    """Parse one machine or context.  Raises :class:`ParseError`."""
    return Parser(lex(text, path), path).component()


def try_parse(text: str, path: str = "<string>") -> tuple[Machine | Context | None, list[Diagnostic]]:
    """Like :func:`parse_source` but collects diagnostics instead of raising."""
    try:
        return parse_source(text, path), []
    except ParseError as e:
        return None, [e.diagnostic]


def parse_predicate(text: str) -> Predicate:
    """Parse a standalone predicate or expression (handy in tests and tools)."""
    parser = Parser(lex(text, "<predicate>"), "<predicate>")
    f = parser.formula()
    parser.expect("eof", "end of input")
    return f


parse_expression = parse_predicate


# --- file loading -----------------------------------------------------------


def _ref_diag(code: str, message: str, path: str) -> Diagnostic:
    return Diagnostic(code, message, None, path)


class _Loader:
    """Resolves sees / refines / extends by file name, with cycle detection."""

    def __init__(self):
        self.cache: dict[Path, Machine | Context | None] = {}
        self.diagnostics: list[Diagnostic] = []

    def parse_file(self, path: Path) -> Machine | Context | None:
        path = path.resolve()
        if path in self.cache:
            return self.cache[path]
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            self.diagnostics.append(_ref_diag("unresolved-reference", str(e), str(path)))
            self.cache[path] = None
            return None
        component, diags = try_parse(text, str(path))
        self.diagnostics.extend(diags)
        self.cache[path] = component
        return component

    def resolve(self, directory: Path, name: str, want: type, referrer: str) -> Machine | Context | None:
        target = directory / f"{name}.ebh"
        if not target.is_file():
            kind = "machine" if want is Machine else "context"
            self.diagnostics.append(
                _ref_diag(
                    "unresolved-reference",
                    f"cannot resolve {kind} '{name}': no file {target.name} next to it",
                    referrer,
                )
            )
            return None
        component = self.parse_file(target)
        if component is None:
            return None
        if not isinstance(component, want):
            self.diagnostics.append(
                _ref_diag("unresolved-reference", f"{target.name} does not contain a {want.__name__.lower()}", referrer)
            )
            return None
        if component.name != name:
            self.diagnostics.append(
                _ref_diag(
                    "name-mismatch",
                    f"{target.name} declares '{component.name}', expected '{name}'",
                    referrer,
                )
            )
            return None
        return component

    def context_chain(self, directory: Path, name: str, referrer: str, seen: tuple[str, ...] = ()) -> list[Context]:
        if name in seen:
            self.diagnostics.append(
                _ref_diag("circular-reference", f"circular extends chain through '{name}'", referrer)
            )
            return []
        ctx = self.resolve(directory, name, Context, referrer)
        if ctx is None:
            return []
        chain: list[Context] = []
        if ctx.extends:
            chain = self.context_chain(directory, ctx.extends, str(directory / f"{name}.ebh"), seen + (name,))
        chain.append(ctx)
        return chain

    def model(self, machine: Machine, directory: Path, referrer: str, seen: tuple[str, ...] = ()) -> Model:
        abstract: Model | None = None
        if machine.refines:
            if machine.refines in seen:
                self.diagnostics.append(
                    _ref_diag("circular-reference", f"circular refinement through '{machine.refines}'", referrer)
                )
            else:
                parent = self.resolve(directory, machine.refines, Machine, referrer)
                if parent is not None:
                    abstract = self.model(
                        parent, directory, str(directory / f"{machine.refines}.ebh"), seen + (machine.name,)
                    )
        contexts: list[Context] = list(abstract.contexts) if abstract else []
        if machine.sees:
            for ctx in self.context_chain(directory, machine.sees, referrer):
                if all(c.name != ctx.name for c in contexts):
                    contexts.append(ctx)
        return Model(machine, tuple(contexts), abstract)


def load_model(path: str | Path) -> tuple[Model | None, list[Diagnostic]]:
    """Load a machine or context file together with everything it references.

    A context file is wrapped in a model whose machine is empty and named
    after the context, so checking and theorem-obligation generation work
    uniformly.  Problems in referenced files become diagnostics; an
    unreadable ``path`` itself raises ``OSError``.
    """
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    component, diags = try_parse(text, str(p))
    if component is None:
        return None, diags
    loader = _Loader()
    loader.cache[p.resolve()] = component
    if isinstance(component, Context):
        chain: list[Context] = []
        if component.extends:
            chain = loader.context_chain(p.parent, component.extends, str(p))
        chain.append(component)
        model = Model(Machine(name=component.name), tuple(chain), None)
        return (model if not loader.diagnostics else None), diags + loader.diagnostics
    model = loader.model(component, p.parent, str(p))
    if loader.diagnostics:
        return None, diags + loader.diagnostics
    return model, []
