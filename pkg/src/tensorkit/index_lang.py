"""Index-notation expressions: parsing, rendering and legitimacy checks.

Grammar (whitespace-insensitive, ``*`` between factors optional)::

    equation     := expression '=' expression
    expression   := ['+' | '-'] term (('+' | '-') term)*
    term         := [rational] factor*          (at least one of the two)
    factor       := name index_block*
    index_block  := '^' '{' letter+ '}' | '_' '{' letter+ '}' | '^' letter | '_' letter
    rational     := integer ['/' integer]

Names ``e`` and ``d`` denote the permutation symbol and the Kronecker
delta; ``pd`` is the partial-derivative operator and acts on every factor
to its right within the same term.  A term consisting of the bare
rational ``0`` is the zero tensor and is compatible with any free-index
set.

Index symbols are single lowercase letters.  Their range is not part of
the language; it is bound when an expression is evaluated.
"""

from __future__ import annotations

import functools
import string
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

from .errors import ParseError, ValidationError

UPPER = "upper"
LOWER = "lower"

EPSILON_NAME = "e"
DELTA_NAME = "d"
DERIVATIVE_NAME = "pd"

STRICT = "strict"
CARTESIAN = "cartesian"

ALPHABET = string.ascii_lowercase


@dataclass(frozen=True)
class IndexOccurrence:
    symbol: str
    position: str

    def __post_init__(self):
        if len(self.symbol) != 1 or self.symbol not in ALPHABET:
            raise ValueError(f"index symbol must be one lowercase letter, got {self.symbol!r}")
        if self.position not in (UPPER, LOWER):
            raise ValueError(f"index position must be 'upper' or 'lower', got {self.position!r}")

    def __str__(self):
        return ("^" if self.position == UPPER else "_") + self.symbol


@dataclass(frozen=True)
class TensorFactor:
    name: str
    indices: tuple[IndexOccurrence, ...] = ()
    is_derivative: bool = False

    def __post_init__(self):
        if self.is_derivative and len(self.indices) != 1:
            raise ValueError("a derivative factor carries exactly one index")


@dataclass(frozen=True)
class Term:
    coefficient: Fraction = Fraction(1)
    factors: tuple[TensorFactor, ...] = ()

    def occurrences(self) -> list[IndexOccurrence]:
        return [occ for f in self.factors for occ in f.indices]

    @property
    def is_zero_literal(self) -> bool:
        return not self.factors and self.coefficient == 0


@dataclass(frozen=True)
class Expression:
    terms: tuple[Term, ...]


@dataclass(frozen=True)
class Equation:
    lhs: Expression
    rhs: Expression


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    term: int
    message: str

    def to_dict(self):
        return {"rule": self.rule, "term": self.term, "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate`.

    ``term`` numbers in diagnostics run over the left-hand side first and
    continue over the right-hand side for equations.
    """

    free_indices: frozenset
    dummy_pairs: tuple
    diagnostics: tuple = ()
    rank: int = 0
    mode: str = STRICT

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    def to_dict(self):
        free = sorted(self.free_indices, key=lambda o: (o.symbol, o.position))
        return {
            "ok": self.ok,
            "mode": self.mode,
            "rank": self.rank,
            "free_indices": [{"symbol": o.symbol, "position": o.position} for o in free],
            "dummy_pairs": [
                [{"symbol": a.symbol, "positions": [a.position, b.position]} for a, b in pairs]
                for pairs in self.dummy_pairs
            ],
            "diagnostics": [d.to_dict() for d in self.diagnostics],
        }


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message, pos=None):
        pos = self.pos if pos is None else pos
        raise ParseError(message, offset=len(self.text[:pos].encode("utf-8")))

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def at_end(self):
        return self.peek() == ""

    def expect(self, ch):
        if self.peek() != ch:
            found = self.peek() or "end of input"
            self.error(f"expected {ch!r}, found {found!r}")
        self.pos += 1

    def integer(self):
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected an integer")
        return int(self.text[start:self.pos])

    def rational(self):
        num = self.integer()
        if self.peek() == "/":
            self.pos += 1
            self.skip_ws()
            den_pos = self.pos
            den = self.integer()
            if den == 0:
                self.error("zero denominator", den_pos)
            return Fraction(num, den)
        return Fraction(num)

    def name(self):
        self.skip_ws()
        start = self.pos
        if self.pos >= len(self.text) or not self.text[self.pos].isalpha() or not self.text[self.pos].isascii():
            self.error("expected a factor name")
        while self.pos < len(self.text) and self.text[self.pos].isascii() and self.text[self.pos].isalnum():
            self.pos += 1
        return self.text[start:self.pos]

    def index_letter(self):
        self.skip_ws()
        if self.pos < len(self.text) and self.text[self.pos] in ALPHABET:
            self.pos += 1
            return self.text[self.pos - 1]
        found = self.text[self.pos] if self.pos < len(self.text) else "end of input"
        self.error(f"malformed index list: expected a lowercase letter, found {found!r}")

    def index_block(self, position):
        if self.peek() == "{":
            self.pos += 1
            letters = [self.index_letter()]
            while self.peek() != "}":
                if self.at_end():
                    self.error("malformed index list: unterminated '{'")
                letters.append(self.index_letter())
            self.pos += 1
        else:
            letters = [self.index_letter()]
        return [IndexOccurrence(s, position) for s in letters]

    def factor(self):
        start = self.pos
        name = self.name()
        indices = []
        while self.peek() in ("^", "_"):
            position = UPPER if self.peek() == "^" else LOWER
            self.pos += 1
            indices.extend(self.index_block(position))
        is_derivative = name == DERIVATIVE_NAME
        if is_derivative and len(indices) != 1:
            self.error("derivative factor 'pd' takes exactly one index", start)
        return TensorFactor(name, tuple(indices), is_derivative)

    def term(self, sign):
        coefficient = Fraction(sign)
        has_number = False
        if self.peek().isdigit():
            coefficient *= self.rational()
            has_number = True
        factors = []
        while True:
            ch = self.peek()
            if ch == "*":
                self.pos += 1
                ch = self.peek()
                if not (ch.isascii() and ch.isalpha()):
                    self.error("expected a factor after '*'")
            if ch.isascii() and ch.isalpha():
                factors.append(self.factor())
            else:
                break
        if not factors and not has_number:
            self.error("expected a term")
        return Term(coefficient, tuple(factors))

    def expression(self):
        sign = 1
        if self.peek() in "+-" and self.peek():
            sign = -1 if self.peek() == "-" else 1
            self.pos += 1
        terms = [self.term(sign)]
        while self.peek() in ("+", "-") and self.peek():
            sign = -1 if self.peek() == "-" else 1
            self.pos += 1
            terms.append(self.term(sign))
        return Expression(tuple(terms))


@functools.lru_cache(maxsize=512)
def parse_expression(text: str) -> Expression:
    """Parse a single index-notation expression (no ``=``)."""
    p = _Parser(text)
    expr = p.expression()
    if not p.at_end():
        p.error(f"unexpected {p.peek()!r}")
    return expr


@functools.lru_cache(maxsize=512)
def parse(text: str) -> Union[Expression, Equation]:
    """Parse an expression, or an equation if the text contains ``=``."""
    p = _Parser(text)
    lhs = p.expression()
    if p.peek() == "=":
        p.pos += 1
        rhs = p.expression()
        if not p.at_end():
            p.error(f"unexpected {p.peek()!r}")
        return Equation(lhs, rhs)
    if not p.at_end():
        p.error(f"unexpected {p.peek()!r}")
    return lhs


def parse_equation(text: str) -> Equation:
    result = parse(text)
    if not isinstance(result, Equation):
        raise ParseError("expected an equation containing '='", offset=len(text.encode("utf-8")))
    return result


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def _render_factor(f: TensorFactor) -> str:
    out = [f.name]
    i = 0
    while i < len(f.indices):
        pos = f.indices[i].position
        j = i
        while j < len(f.indices) and f.indices[j].position == pos:
            j += 1
        letters = "".join(o.symbol for o in f.indices[i:j])
        out.append(("^" if pos == UPPER else "_") + "{" + letters + "}")
        i = j
    return "".join(out)


def _render_term_body(t: Term) -> str:
    c = abs(t.coefficient)
    parts = []
    if c != 1 or not t.factors:
        parts.append(str(c))
    parts.extend(_render_factor(f) for f in t.factors)
    return " ".join(parts)


def render(obj) -> str:
    """Canonical text for a term, expression or equation; reparses to an equal AST."""
    if isinstance(obj, Equation):
        return f"{render(obj.lhs)} = {render(obj.rhs)}"
    if isinstance(obj, Term):
        obj = Expression((obj,))
    out = []
    for k, t in enumerate(obj.terms):
        body = _render_term_body(t)
        if k == 0:
            out.append(("-" if t.coefficient < 0 else "") + body)
        else:
            out.append(("- " if t.coefficient < 0 else "+ ") + body)
    return " ".join(out)


# ---------------------------------------------------------------------------
# Index classification and validation
# ---------------------------------------------------------------------------


def _counts(term: Term) -> Counter:
    return Counter(o.symbol for o in term.occurrences())


def free_occurrences(term: Term) -> list[IndexOccurrence]:
    """Free indices of ``term`` in order of first appearance."""
    counts = _counts(term)
    return [o for o in term.occurrences() if counts[o.symbol] == 1]


def dummy_symbols(term: Term) -> list[str]:
    """Dummy symbols of ``term`` in order of first appearance."""
    counts = _counts(term)
    seen = []
    for o in term.occurrences():
        if counts[o.symbol] == 2 and o.symbol not in seen:
            seen.append(o.symbol)
    return seen


def classify_indices(term: Term) -> tuple[frozenset, frozenset]:
    """Split the indices of ``term`` into free occurrences and dummy symbols.

    Raises :class:`ValidationError` when a symbol occurs more than twice.
    """
    counts = _counts(term)
    over = sorted(s for s, n in counts.items() if n > 2)
    if over:
        raise ValidationError(
            "index " + ", ".join(f"{s!r} occurs {counts[s]} times" for s in over)
            + "; at most two occurrences are allowed in a term"
        )
    return frozenset(free_occurrences(term)), frozenset(dummy_symbols(term))


def _dummy_pairs(term: Term):
    by_symbol = {}
    for o in term.occurrences():
        by_symbol.setdefault(o.symbol, []).append(o)
    return tuple(tuple(v) for v in by_symbol.values() if len(v) == 2)


def validate(obj, mode: str = STRICT) -> ValidationReport:
    """Check an expression or equation against the index rules.

    Strict mode requires every dummy pair to be one upper and one lower
    index and free indices to keep their position across terms.  Cartesian
    mode drops both position requirements.  Violations are returned as
    diagnostics, never raised.
    """
    if mode not in (STRICT, CARTESIAN):
        raise ValueError(f"unknown validation mode {mode!r}")
    if isinstance(obj, str):
        obj = parse(obj)
    if isinstance(obj, Equation):
        terms = list(obj.lhs.terms) + list(obj.rhs.terms)
        n_lhs = len(obj.lhs.terms)
    else:
        terms = list(obj.terms)
        n_lhs = len(terms)

    diagnostics = []
    per_term_free = []
    dummy_pairs = []
    for k, t in enumerate(terms):
        counts = _counts(t)
        over = sorted(s for s, n in counts.items() if n > 2)
        for s in over:
            diagnostics.append(Diagnostic(
                "occurrence-limit", k, f"index '{s}' occurs {counts[s]} times (at most twice allowed)"))
        pairs = _dummy_pairs(t)
        dummy_pairs.append(pairs)
        if mode == STRICT:
            for a, b in pairs:
                if a.position == b.position:
                    diagnostics.append(Diagnostic(
                        "dummy-variance", k,
                        f"dummy index '{a.symbol}' is {a.position} twice; a summed pair needs one upper and one lower"))
        if over or t.is_zero_literal:
            per_term_free.append(None)
        else:
            per_term_free.append(frozenset(free_occurrences(t)))

    reference = next(((k, fr) for k, fr in enumerate(per_term_free) if fr is not None), None)
    if reference is not None:
        ref_k, ref_free = reference
        ref_symbols = {o.symbol for o in ref_free}
        for k, fr in enumerate(per_term_free):
            if fr is None or k == ref_k:
                continue
            symbols = {o.symbol for o in fr}
            if symbols != ref_symbols:
                diagnostics.append(Diagnostic(
                    "free-index-mismatch", k,
                    f"{_side(k, n_lhs)} {k} has free indices {_fmt_set(symbols)} but term {ref_k} has {_fmt_set(ref_symbols)}"))
            elif mode == STRICT and fr != ref_free:
                bad = sorted(o.symbol for o in fr if o not in ref_free)
                diagnostics.append(Diagnostic(
                    "free-variance-mismatch", k,
                    f"free index {', '.join(repr(s) for s in bad)} changes position between term {ref_k} and term {k}"))
        free, rank = ref_free, len(ref_free)
    else:
        free, rank = frozenset(), 0

    return ValidationReport(free, tuple(dummy_pairs), tuple(diagnostics), rank, mode)


def _side(k, n_lhs):
    return "term" if k < n_lhs else "right-hand term"


def _fmt_set(symbols) -> str:
    return "{" + ", ".join(sorted(symbols)) + "}"


def rename_dummies(term: Term, reserved: Iterable[str] = ()) -> Term:
    """Rename dummy pairs to the first letters not reserved and not free.

    Dummies are renamed in order of first appearance.  The free-index set
    and the value under summation are unchanged.
    """
    free, dummies = classify_indices(term)
    blocked = set(reserved) | {o.symbol for o in free}
    order = dummy_symbols(term)
    available = [s for s in ALPHABET if s not in blocked]
    if len(available) < len(order):
        raise ValidationError(
            f"alphabet exhausted: {len(order)} dummy symbols needed, {len(available)} available")
    mapping = dict(zip(order, available))
    factors = tuple(
        TensorFactor(
            f.name,
            tuple(IndexOccurrence(mapping.get(o.symbol, o.symbol), o.position) for o in f.indices),
            f.is_derivative,
        )
        for f in term.factors
    )
    return Term(term.coefficient, factors)


def factor_names(obj) -> set[str]:
    if isinstance(obj, Equation):
        return factor_names(obj.lhs) | factor_names(obj.rhs)
    return {f.name for t in obj.terms for f in t.factors}
