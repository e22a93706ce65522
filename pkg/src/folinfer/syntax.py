"""ASCII first-order logic surface syntax.

Grammar (loosest binding first): `<->` and `->` are right-associative,
`|` and `&` are left-associative, `-` binds tightest among connectives,
and a quantifier (`all x.` / `exists x.`) extends as far right as
possible.  Identifiers match [A-Za-z][A-Za-z0-9_']*; a lowercase first
letter makes a term position a variable, otherwise a constant.  Bare
numbers are constants.  Double-quoted literals are normalized to bare
constants by dropping the quotes and any character that cannot appear
in an identifier.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


# ---------------------------------------------------------------------------
# terms and formulas

@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Constant:
    name: str


@dataclass(frozen=True)
class Application:
    functor: str
    args: tuple  # nonempty tuple of terms


Term = Variable | Constant | Application


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple = ()


@dataclass(frozen=True)
class Not:
    sub: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class ForAll:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Formula = Atom | Not | And | Or | Implies | Iff | ForAll | Exists

_BINARY = (And, Or, Implies, Iff)
_QUANT = (ForAll, Exists)


# ---------------------------------------------------------------------------
# diagnostics

@dataclass(frozen=True)
class Diagnostic:
    """One machine-readable problem found while lexing, parsing, or
    checking a signature.

    kind is one of: lex-error, parse-error, multiple-arity, mixed-role,
    free-variable.  location is a half-open byte offset span
    (start, end) into the source text; signature-level findings, which
    see formula objects rather than text, carry the degenerate span
    (0, 0).
    """

    kind: str
    message: str
    location: tuple[int, int] = (0, 0)
    symbol: str | None = None
    arities: tuple[int, ...] = ()


class FolSyntaxError(ValueError):
    """Raised for any lexical, grammatical, or signature violation."""

    def __init__(self, diagnostics):
        if isinstance(diagnostics, Diagnostic):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(d.message for d in self.diagnostics))

    @property
    def kind(self) -> str:
        return self.diagnostics[0].kind


# ---------------------------------------------------------------------------
# lexer

@dataclass(frozen=True)
class Token:
    kind: str  # ident | number | quoted | all | exists | punctuation kinds
    text: str
    pos: int   # byte offset into the source


_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<ident>[A-Za-z][A-Za-z0-9_']*)
      | (?P<number>\d+)
      | (?P<quoted>"[^"\n]*")
      | (?P<iff><->)
      | (?P<implies>->)
      | (?P<punct>[()\.,\-&|])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"all", "exists"}


def _token_span(tok: Token) -> tuple[int, int]:
    return (tok.pos, tok.pos + len(tok.text))


def tokenize(text: str) -> list[Token]:
    """Lex one formula.  Raises FolSyntaxError (kind lex-error) on any
    character outside the surface alphabet, including `=` and `>`.
    """
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            ch = text[pos]
            raise FolSyntaxError(Diagnostic(
                kind="lex-error",
                message=f"unexpected character {ch!r} at offset {pos}",
                location=(pos, pos + 1),
                symbol=ch,
            ))
        if m.lastgroup != "ws":
            raw = m.group()
            if m.lastgroup == "ident":
                kind = raw if raw in _KEYWORDS else "ident"
            elif m.lastgroup in ("number", "quoted"):
                kind = m.lastgroup
            else:
                kind = raw  # punctuation tokens carry their own spelling
            tokens.append(Token(kind, raw, pos))
        pos = m.end()
    return tokens


# ---------------------------------------------------------------------------
# parser

class _Parser:
    def __init__(self, tokens: list[Token], text: str):
        self.tokens = tokens
        self.text = text
        self.i = 0

    def _fail(self, message: str) -> "FolSyntaxError":
        if self.i < len(self.tokens):
            loc = _token_span(self.tokens[self.i])
        else:
            loc = (len(self.text), len(self.text))
        return FolSyntaxError(Diagnostic("parse-error", message, loc))

    def peek(self) -> Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise self._fail("unexpected end of input")
        self.i += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            if kind == ")":
                raise self._fail("unbalanced parentheses: expected ')'")
            raise self._fail(f"expected {kind!r}")
        return self.take()

    # precedence ladder, loosest first
    def formula(self) -> Formula:
        left = self._implies()
        tok = self.peek()
        if tok is not None and tok.kind == "<->":
            self.take()
            return Iff(left, self.formula())
        return left

    def _implies(self) -> Formula:
        left = self._or()
        tok = self.peek()
        if tok is not None and tok.kind == "->":
            self.take()
            return Implies(left, self._implies())
        return left

    def _or(self) -> Formula:
        left = self._and()
        while (tok := self.peek()) is not None and tok.kind == "|":
            self.take()
            left = Or(left, self._and())
        return left

    def _and(self) -> Formula:
        left = self._unary()
        while (tok := self.peek()) is not None and tok.kind == "&":
            self.take()
            left = And(left, self._unary())
        return left

    def _unary(self) -> Formula:
        tok = self.peek()
        if tok is None:
            raise self._fail("unexpected end of input")
        if tok.kind == "-":
            self.take()
            return Not(self._unary())
        if tok.kind in ("all", "exists"):
            self.take()
            var = self.expect("ident")
            if not var.text[0].islower():
                self.i -= 1
                raise self._fail(
                    f"quantified variable {var.text!r} must start lowercase")
            self.expect(".")
            body = self.formula()  # maximal scope
            return ForAll(var.text, body) if tok.kind == "all" else Exists(var.text, body)
        if tok.kind == "(":
            self.take()
            inner = self.formula()
            self.expect(")")
            return inner
        if tok.kind == "ident":
            return self._atom()
        raise self._fail(f"unexpected token {tok.text!r}")

    def _atom(self) -> Formula:
        name = self.take()
        tok = self.peek()
        if tok is not None and tok.kind == "(":
            self.take()
            args = [self._term()]
            while (nxt := self.peek()) is not None and nxt.kind == ",":
                self.take()
                args.append(self._term())
            self.expect(")")
            return Atom(name.text, tuple(args))
        return Atom(name.text, ())

    def _term(self) -> Term:
        tok = self.peek()
        if tok is None:
            raise self._fail("unexpected end of input in term")
        if tok.kind == "ident":
            self.take()
            nxt = self.peek()
            if nxt is not None and nxt.kind == "(":
                self.take()
                args = [self._term()]
                while (after := self.peek()) is not None and after.kind == ",":
                    self.take()
                    args.append(self._term())
                self.expect(")")
                return Application(tok.text, tuple(args))
            if tok.text[0].islower():
                return Variable(tok.text)
            return Constant(tok.text)
        if tok.kind == "number":
            self.take()
            return Constant(tok.text)
        if tok.kind == "quoted":
            self.take()
            name = re.sub(r"[^A-Za-z0-9_']", "", tok.text[1:-1])
            if not name or not re.fullmatch(r"[A-Za-z][A-Za-z0-9_']*", name):
                raise FolSyntaxError(Diagnostic(
                    "parse-error",
                    f"quoted literal {tok.text} does not normalize to an identifier",
                    _token_span(tok)))
            return Constant(name)
        raise self._fail(f"unexpected token {tok.text!r} in term")


def parse(text: str) -> Formula:
    """Parse one formula.  Raises FolSyntaxError with kind lex-error or
    parse-error; a structurally valid formula always round-trips through
    format_formula.
    """
    tokens = tokenize(text)
    parser = _Parser(tokens, text)
    if parser.peek() is None:
        raise parser._fail("empty input")
    f = parser.formula()
    if parser.peek() is not None:
        tok = parser.peek()
        if tok.kind == ")":
            raise parser._fail("unbalanced parentheses: unmatched ')'")
        raise parser._fail(f"unexpected trailing input at {tok.text!r}")
    return f


# ---------------------------------------------------------------------------
# printing

def format_term(t: Term) -> str:
    if isinstance(t, (Variable, Constant)):
        return t.name
    return t.functor + "(" + ", ".join(format_term(a) for a in t.args) + ")"


def _open_to_the_right(f: Formula) -> bool:
    # a quantifier body (or a negation ending in one) would swallow
    # following tokens on re-parse; such subformulas need parentheses
    # when printed as a left operand
    while isinstance(f, Not):
        f = f.sub
    return isinstance(f, _QUANT)


_OPS = {And: "&", Or: "|", Implies: "->", Iff: "<->"}


def format_formula(f: Formula) -> str:
    """Canonical printing: binary connectives fully parenthesized,
    quantifiers and negation bare.  parse(format_formula(f)) == f.
    """
    if isinstance(f, Atom):
        if not f.args:
            return f.predicate
        return f.predicate + "(" + ", ".join(format_term(a) for a in f.args) + ")"
    if isinstance(f, Not):
        return "-" + format_formula(f.sub)
    if isinstance(f, _BINARY):
        left = format_formula(f.left)
        if _open_to_the_right(f.left):
            left = "(" + left + ")"
        right = format_formula(f.right)
        return f"({left} {_OPS[type(f)]} {right})"
    if isinstance(f, ForAll):
        return f"all {f.var}. {format_formula(f.body)}"
    if isinstance(f, Exists):
        return f"exists {f.var}. {format_formula(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# variables and closure

def _walk_free(f: Formula, bound: frozenset, out: list) -> None:
    if isinstance(f, Atom):
        for a in f.args:
            _walk_term(a, bound, out)
    elif isinstance(f, Not):
        _walk_free(f.sub, bound, out)
    elif isinstance(f, _BINARY):
        _walk_free(f.left, bound, out)
        _walk_free(f.right, bound, out)
    elif isinstance(f, _QUANT):
        _walk_free(f.body, bound | {f.var}, out)
    else:
        raise TypeError(f"not a formula: {f!r}")


def _walk_term(t: Term, bound: frozenset, out: list) -> None:
    if isinstance(t, Variable):
        if t.name not in bound and t.name not in out:
            out.append(t.name)
    elif isinstance(t, Application):
        for a in t.args:
            _walk_term(a, bound, out)


def free_vars_ordered(f: Formula) -> list[str]:
    """Free variable names in first-occurrence order (left to right)."""
    out: list[str] = []
    _walk_free(f, frozenset(), out)
    return out


def free_vars(f: Formula) -> set[str]:
    return set(free_vars_ordered(f))


def close_universally(f: Formula) -> Formula:
    """Prefix one `all` per free variable, in first-occurrence order, so
    the leftmost free variable becomes the outermost quantifier.  A
    closed formula is returned unchanged.
    """
    result = f
    for name in reversed(free_vars_ordered(f)):
        result = ForAll(name, result)
    return result


def ensure_closed(f: Formula) -> Formula:
    """Return f unchanged if it has no free variables, else raise a
    free-variable FolSyntaxError naming them in first-occurrence order.
    """
    names = free_vars_ordered(f)
    if names:
        raise FolSyntaxError([
            Diagnostic(
                "free-variable",
                f"unbound variable {name} in {format_formula(f)}",
                symbol=name)
            for name in names
        ])
    return f


# ---------------------------------------------------------------------------
# signature checking

@dataclass(frozen=True)
class Signature:
    """Arity map of a validated formula set: predicate name -> arity and
    term symbol name -> arity (constants have arity 0).
    """

    predicates: dict = field(default_factory=dict)
    terms: dict = field(default_factory=dict)


def _observe_term(t: Term, uses: dict) -> None:
    if isinstance(t, Constant):
        uses.setdefault(t.name, []).append(("term", 0))
    elif isinstance(t, Application):
        uses.setdefault(t.functor, []).append(("term", len(t.args)))
        for a in t.args:
            _observe_term(a, uses)
    # variables are not signature symbols


def _observe(f: Formula, uses: dict) -> None:
    if isinstance(f, Atom):
        uses.setdefault(f.predicate, []).append(("predicate", len(f.args)))
        for a in f.args:
            _observe_term(a, uses)
    elif isinstance(f, Not):
        _observe(f.sub, uses)
    elif isinstance(f, _BINARY):
        _observe(f.left, uses)
        _observe(f.right, uses)
    elif isinstance(f, _QUANT):
        _observe(f.body, uses)
    else:
        raise TypeError(f"not a formula: {f!r}")


def check_signature(formulas) -> Signature:
    """Validate symbol usage across a set of formulas.

    Every symbol must keep a single arity and be used exclusively as a
    predicate or exclusively as a term.  On violation raises
    FolSyntaxError whose message lists offenders as `Name/arity` pairs
    in first-observation order.  The returned Signature is independent
    of formula order.
    """
    uses: dict[str, list[tuple[str, int]]] = {}
    for f in formulas:
        _observe(f, uses)

    diagnostics = []
    multi_bits = []
    mixed_bits = []
    for name, occ in uses.items():
        arities = []
        for _, ar in occ:
            if ar not in arities:
                arities.append(ar)
        roles = {role for role, _ in occ}
        if len(arities) > 1:
            pairs = ", ".join(f"{name}/{a}" for a in arities)
            multi_bits.append(pairs)
            diagnostics.append(Diagnostic(
                "multiple-arity",
                f"symbol {name} used with arities {', '.join(map(str, arities))}",
                symbol=name, arities=tuple(arities)))
        elif len(roles) > 1:
            mixed_bits.append(f"{name}/{arities[0]}")
            diagnostics.append(Diagnostic(
                "mixed-role",
                f"symbol {name} used both as a predicate and as a term",
                symbol=name, arities=tuple(arities)))

    if multi_bits:
        header = Diagnostic(
            "multiple-arity",
            "The following symbols are used with multiple arities: "
            + ", ".join(multi_bits) + ".",
        )
        raise FolSyntaxError([header] + diagnostics)
    if mixed_bits:
        header = Diagnostic(
            "mixed-role",
            "The following symbols are used both as predicates and as terms: "
            + ", ".join(mixed_bits) + ".",
        )
        raise FolSyntaxError([header] + diagnostics)

    sig = Signature()
    for name, occ in uses.items():
        role, ar = occ[0]
        if role == "predicate":
            sig.predicates[name] = ar
        else:
            sig.terms[name] = ar
    return sig


def symbols_of(f: Formula) -> set[str]:
    """All predicate and term symbol names occurring in f."""
    uses: dict[str, list] = {}
    _observe(f, uses)
    return set(uses)
