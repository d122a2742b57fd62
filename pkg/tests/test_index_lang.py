from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import ROUND_TRIP_CORPUS
from tensorkit import index_lang as il
from tensorkit.errors import ParseError, ValidationError

LEGITIMATE = ["A_{ij}^{ij}", "A^{im}_m + B^{ink}_{nk}", "C_{ij} = A_{ij} - B_{ij}", "a = B^j_j"]
ILLEGITIMATE = ["B_i^{ii}", "A_i + B_{ij}", "A^i + B^j", "A_i - B^i", "A^i_i = B_i"]


def first_term(text):
    return il.parse_expression(text).terms[0]


# -- parsing ----------------------------------------------------------------


def test_two_term_coefficients():
    expr = il.parse_expression("A_{ij} - B_{ij}")
    assert [t.coefficient for t in expr.terms] == [1, -1]
    assert [t.factors[0].name for t in expr.terms] == ["A", "B"]


def test_scalar_symbol():
    expr = il.parse_expression("a")
    assert len(expr.terms) == 1
    assert expr.terms[0].factors[0].indices == ()
    assert il.validate(expr).rank == 0


def test_cross_product_term():
    term = first_term("e_{ijk} A^j B^k")
    assert len(term.factors) == 3
    free, dummy = il.classify_indices(term)
    assert free == {il.IndexOccurrence("i", il.LOWER)}
    assert dummy == {"j", "k"}


def test_index_order_and_positions_preserved():
    f = first_term("R^a_{bcd}").factors[0]
    assert [(o.symbol, o.position) for o in f.indices] == [
        ("a", "upper"), ("b", "lower"), ("c", "lower"), ("d", "lower")]


def test_rational_coefficients_are_exact():
    expr = il.parse_expression("1/6 A_i - 2/3 B_i + 4 C_i")
    assert [t.coefficient for t in expr.terms] == [Fraction(1, 6), Fraction(-2, 3), Fraction(4)]


def test_whitespace_insensitive():
    assert il.parse("A_{ij}B_{jk}") == il.parse("  A_{ij}   B_{jk} ")
    assert il.parse("A_i*B_i") == il.parse("A_i B_i")


@pytest.mark.parametrize("text,offset", [
    ("A_{i", 4),
    ("A_{}", 3),
    ("A_i +", 5),
    ("A_I", 2),
    ("1/0 A", 2),
    ("A_i = B_i = C_i", 10),
])
def test_parse_errors_carry_byte_offsets(text, offset):
    with pytest.raises(ParseError) as info:
        il.parse(text)
    assert info.value.offset == offset
    assert f"byte {offset}" in str(info.value)


def test_byte_offsets_count_utf8_bytes():
    with pytest.raises(ParseError) as info:
        il.parse("A_i + é")
    assert info.value.offset == 6


def test_derivative_takes_exactly_one_index():
    with pytest.raises(ParseError):
        il.parse("pd_{ij} A_j")
    assert first_term("pd_i A_i").factors[0].is_derivative


# -- classification and validation ---------------------------------------------


def test_classify_legitimate_term():
    free, dummy = il.classify_indices(first_term("A^{im}_m + B^{ink}_{nk}"))
    assert free == {il.IndexOccurrence("i", il.UPPER)}
    assert dummy == {"m"}


def test_classify_rejects_triple_occurrence():
    with pytest.raises(ValidationError):
        il.classify_indices(first_term("B_i^{ii}"))


def test_classify_scalar():
    assert il.classify_indices(first_term("f")) == (frozenset(), frozenset())


@pytest.mark.parametrize("text", LEGITIMATE)
def test_legitimate_examples(text):
    report = il.validate(text)
    assert report.ok, report.diagnostics


@pytest.mark.parametrize("text", ILLEGITIMATE)
def test_illegitimate_examples(text):
    assert not il.validate(text).ok


def test_free_index_set_mismatch_rule():
    rules = [d.rule for d in il.validate("A_i + B_{ij}").diagnostics]
    assert rules == ["free-index-mismatch"]
    rules = [d.rule for d in il.validate("A^i + B^j").diagnostics]
    assert rules == ["free-index-mismatch"]


def test_scalar_equation_rank_zero():
    report = il.validate("a = B^j_j", il.STRICT)
    assert report.ok and report.rank == 0


def test_dummy_variance_rule_only_in_strict_mode():
    assert [d.rule for d in il.validate("A_i B_i").diagnostics] == ["dummy-variance"]
    assert il.validate("A_i B_i", il.CARTESIAN).ok


def test_variance_mismatch_only_in_strict_mode():
    assert [d.rule for d in il.validate("A_i - B^i").diagnostics] == ["free-variance-mismatch"]
    assert il.validate("A_i - B^i", il.CARTESIAN).ok


def test_report_ok_iff_no_diagnostics():
    for text in LEGITIMATE + ILLEGITIMATE:
        r = il.validate(text)
        assert r.ok == (len(r.diagnostics) == 0)
        assert r.to_dict()["ok"] == r.ok


def test_zero_literal_matches_any_free_set():
    assert il.validate("e_{ijk} A_j A_k = 0", il.CARTESIAN).ok


# -- renaming ----------------------------------------------------------------


def test_rename_with_reserved():
    term = il.rename_dummies(first_term("A^{im}_m"), reserved={"i"})
    assert il.render(il.Expression((term,))) == "A^{ia}_{a}"


def test_rename_without_dummies_is_identity():
    term = first_term("A_{ij} B_k")
    assert il.rename_dummies(term) == term


def test_rename_multiple():
    term = il.rename_dummies(first_term("C^{lm}_{lmk}"))
    assert il.render(il.Expression((term,))) == "C^{ab}_{abk}"


def test_rename_alphabet_exhausted():
    letters = "abcdefghijklmnopqrstuvwxyz"
    text = "A_{" + letters[:13] + "} B_{" + letters[:13] + "}"
    with pytest.raises(ValidationError):
        il.rename_dummies(first_term(text), reserved=letters[12:])


# -- round trip ----------------------------------------------------------------


def test_corpus_has_fifty_entries():
    assert len(ROUND_TRIP_CORPUS) == 50


@pytest.mark.parametrize("text", ROUND_TRIP_CORPUS)
def test_corpus_round_trip(text):
    ast = il.parse(text)
    assert il.parse(il.render(ast)) == ast


# -- property tests ----------------------------------------------------------------

LETTERS = "ijklmn"


@st.composite
def factors(draw):
    name = draw(st.sampled_from(["A", "B", "C", "T", "e", "d", "Ab"]))
    n = draw(st.integers(0, 3))
    idx = draw(st.lists(st.tuples(st.sampled_from(LETTERS), st.sampled_from("^_")), min_size=n, max_size=n))
    return name + "".join(f"{pos}{{{s}}}" for s, pos in idx)


@st.composite
def terms(draw):
    coeff = draw(st.sampled_from(["", "2 ", "1/2 ", "3/4 ", "10 "]))
    body = " ".join(draw(st.lists(factors(), min_size=1, max_size=3)))
    return coeff + body


@st.composite
def expressions(draw):
    ts = draw(st.lists(terms(), min_size=1, max_size=3))
    ops = draw(st.lists(st.sampled_from([" + ", " - "]), min_size=len(ts) - 1, max_size=len(ts) - 1))
    text = ts[0]
    for op, t in zip(ops, ts[1:]):
        text += op + t
    if draw(st.booleans()):
        text = "-" + text
    return text


@given(expressions())
@settings(max_examples=200, deadline=None)
def test_property_round_trip(text):
    ast = il.parse(text)
    assert il.parse(il.render(ast)) == ast


@given(expressions())
@settings(max_examples=200, deadline=None)
def test_property_cartesian_accepts_strict(text):
    if il.validate(text, il.STRICT).ok:
        assert il.validate(text, il.CARTESIAN).ok


@given(terms(), st.sets(st.sampled_from("abcdefgh")))
@settings(max_examples=200, deadline=None)
def test_property_rename_preserves_free_set(text, reserved):
    term = il.parse_expression(text).terms[0]
    try:
        free_before, dummies = il.classify_indices(term)
    except ValidationError:
        return
    renamed = il.rename_dummies(term, reserved)
    free_after, new_dummies = il.classify_indices(renamed)
    assert free_after == free_before
    assert not (new_dummies & {o.symbol for o in free_before})
    assert not (new_dummies & set(reserved))
    assert len(new_dummies) == len(dummies)
