import pytest
from hypothesis import given, strategies as st

from artifact.fixtures import ACC_PSPACE_BODY, lfp_so, span_l_formula
from artifact.formula.ast import (BOTTOM, TOP, Add, And, Bool, Eq, ExistsFO, FOVar, ForallFO,
                                  FormulaError, Iff, Implies, Leq, LfpFO, Mul,
                                  Not, Or, RelApp, SOApp, SOVar, SumFO, SumSO, check_positive,
                                  formula_length, free_fo, free_so)
from artifact.formula.fragments import (FragmentTag, classify_fragment, normalize_totp_fo,
                                        recognize_define, recognize_extend)
from artifact.formula.parser import ParseError, parse_bool, parse_qformula
from artifact.formula.printer import bool_text, to_text

CLIQUE_TEXT = "Sum X:1. [forall x. forall y. (X(x) & X(y) & !(x=y)) -> E(x,y)]"


# ------------------------------------------------------------------ parsing

def test_parse_clique_formula():
    q = parse_qformula(CLIQUE_TEXT, sentence=True)
    body = ForallFO("x", ForallFO("y", Implies(
        And(And(SOApp("X", ("x",)), SOApp("X", ("y",))), Not(Eq("x", "y"))), RelApp("E", ("x", "y")))))
    assert q == SumSO("X", 1, Bool(body))


def test_parse_true():
    assert parse_qformula("[true]") == Bool(TOP)


def test_parse_smallest_sum():
    assert parse_qformula("sum y. y", sentence=True) == SumFO("y", FOVar("y"))


def test_product_binds_tighter_than_sum():
    q = parse_qformula("x + x * x")
    assert q == Add(FOVar("x"), Mul(FOVar("x"), FOVar("x")))


def test_quantifier_body_extends_right():
    q = parse_qformula("sum y. y + y", sentence=True)
    assert q == SumFO("y", Add(FOVar("y"), FOVar("y")))


@pytest.mark.parametrize("text", ["[x = 1]", "sum y. 3", "x + 2"])
def test_numeric_literals_rejected(text):
    with pytest.raises(FormulaError):
        parse_qformula(text)


def test_unbound_variable_in_sentence():
    with pytest.raises(FormulaError, match="unbound|free"):
        parse_qformula("x", sentence=True)


def test_arity_mismatch():
    with pytest.raises(FormulaError, match="arity"):
        parse_qformula("Sum X:1. [exists x, y. X(x, y)]", sentence=True)


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse_qformula("sum y.\n  y + ")
    assert info.value.line == 2


def test_min_macro_is_first_order():
    phi = parse_bool("exists x. x = min", sentence=True)
    assert "min" not in repr(phi)


def test_lfp_rel_negative_occurrence_rejected():
    with pytest.raises(FormulaError):
        parse_bool("lfpR P(x) = !P(x) in P(a)")


def test_check_positive():
    P = SOApp("P", ("x",))
    assert check_positive(Or(P, RelApp("E", ("x", "x"))), "P")
    assert check_positive(Not(Not(P)), "P")
    assert not check_positive(Not(P), "P")
    assert not check_positive(Implies(P, TOP), "P")
    assert not check_positive(Iff(P, TOP), "P")


# ------------------------------------------------------------------ printing

names = st.sampled_from(["x", "y"])


@st.composite
def bools(draw, depth=2):
    if depth == 0 or draw(st.booleans()):
        a, b = draw(names), draw(names)
        return draw(st.sampled_from([RelApp("E", (a, b)), RelApp("R", (a,)), Eq(a, b), Leq(a, b),
                                     TOP, BOTTOM, SOApp("X", (a,))]))
    kind = draw(st.sampled_from(["not", "and", "or", "imp", "iff", "all", "ex"]))
    if kind == "not":
        return Not(draw(bools(depth - 1)))
    if kind in ("all", "ex"):
        v = draw(names)
        return (ForallFO if kind == "all" else ExistsFO)(v, draw(bools(depth - 1)))
    cls = {"and": And, "or": Or, "imp": Implies, "iff": Iff}[kind]
    return cls(draw(bools(depth - 1)), draw(bools(depth - 1)))


@st.composite
def qformulas(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        leaf = draw(st.sampled_from(["fo", "so", "bool"]))
        if leaf == "fo":
            return FOVar(draw(names))
        if leaf == "so":
            return SOVar("X")
        return Bool(draw(bools()))
    kind = draw(st.sampled_from(["add", "mul", "sum", "Sum"]))
    if kind == "sum":
        return SumFO(draw(names), draw(qformulas(depth - 1)))
    if kind == "Sum":
        return SumSO("X", 1, draw(qformulas(depth - 1)))
    cls = Add if kind == "add" else Mul
    return cls(draw(qformulas(depth - 1)), draw(qformulas(depth - 1)))


@given(qformulas())
def test_print_parse_round_trip(q):
    assert parse_qformula(to_text(q), free_so={"X": 1}) == q


@given(bools(depth=3))
def test_bool_round_trip(phi):
    assert parse_bool(bool_text(phi), free_so={"X": 1}) == phi


def test_round_trip_with_lfp():
    for text in [
        "lfp f(x) = [forall y. !E(x, y)] * x + sum y. [E(x, y)] * f(y) in f(s)",
        "lfp f(X:1) = " + ACC_PSPACE_BODY + " in f(X0)",
        "[lfpR T(x, y) = E(x, y) | exists z. E(x, z) & T(z, y) in T(a, b)]",
    ]:
        q = parse_qformula(text, free_so={"X0": 1})
        assert parse_qformula(to_text(q), free_so={"X0": 1}) == q


# ------------------------------------------------------------------ metrics

def test_length_of_boolean_leaf():
    assert formula_length(Bool(parse_bool("forall x. exists y. E(x, y)"))) == 1


def test_length_of_sum():
    assert formula_length(Add(FOVar("x"), SOVar("X"))) == 3


def test_length_of_first_order_sum():
    assert formula_length(SumFO("y", Mul(Bool(TOP), FOVar("y")))) == 4


@given(qformulas())
def test_length_recursion(q):
    # independent recount on the printed tree
    def count(node):
        if isinstance(node, (Add, Mul)):
            return count(node.left) + count(node.right) + 1
        if isinstance(node, (SumFO, SumSO)):
            return count(node.body) + 1
        return 1
    assert formula_length(q) == count(q)


def test_free_variables():
    q = parse_qformula("sum y. [E(x, y)] * $X", free_so={"X": 1})
    assert free_fo(q) == {"x"}
    assert free_so(q) == {"X"}


# ------------------------------------------------------------ classification

def test_span_formula_is_fo_recursion():
    q = LfpFO("f", ("x",), span_l_formula(), ("s",))
    assert classify_fragment(q) == FragmentTag.RfoSfoFO


def test_acc_pspace_is_restricted_so():
    assert classify_fragment(lfp_so(ACC_PSPACE_BODY)) == FragmentTag.RsoR_SsoSO


def test_true_is_fo_xfree():
    assert classify_fragment(Bool(TOP)) == FragmentTag.SigmaSO_FO_xfree


def test_fo_leaves_with_relation_outputs():
    assert classify_fragment(parse_qformula("Sum X:1. $X", sentence=True)) == FragmentTag.SigmaSO_FO_xfree


def test_second_order_leaf_is_so_xfree():
    q = parse_qformula("Sum X:1. [ExistsR Z:1. Z(min)] * $X", sentence=True)
    assert classify_fragment(q) == FragmentTag.SigmaSO_SO_xfree


def test_x_dependent_formula_is_general():
    assert classify_fragment(parse_qformula("sum y. y", sentence=True)) == FragmentTag.General


def test_fo_recursion_with_x_output_in_base_is_general():
    # base case outputs a relation, which the first-order recursion forbids
    q = parse_qformula("lfp f(x) = $X + sum y. [E(x, y)] * f(y) in f(s)", free_so={"X": 1})
    assert classify_fragment(q) == FragmentTag.General


def test_unrestricted_so_recursion():
    q = lfp_so("[X(min)] + (Sum Y:1. [Y(min)] * f(Y)) + Sum Z:1. [!Z(min)] * f(Z)")
    assert classify_fragment(q) == FragmentTag.RsoSsoSO


STRICT = "(forall y. Y(y) <-> X(y) | y = max) & (exists y. !X(y) & Y(y))"


def test_totp_fo_shape():
    q = lfp_so(f"[forall x. X(x)] * $X + [exists x. !X(x)] * (Sum Y:1. [{STRICT}] * $Y * f(Y))")
    assert classify_fragment(q) == FragmentTag.RsoR_SsoR_FO


def test_totp_lfp_shape():
    q = lfp_so(f"[true] + [exists x. !X(x)] * $X * ([true] + Sum Y:1. [{STRICT}] * f(Y))")
    assert classify_fragment(q) == FragmentTag.RsoR_SsoR_LFP


def test_non_strict_recursion_is_not_totp():
    q = lfp_so("[exists x. !X(x)] * $X * ([true] + Sum Y:1. [forall y. Y(y) <-> X(y)] * f(Y))")
    assert classify_fragment(q) not in (FragmentTag.RsoR_SsoR_LFP, FragmentTag.RsoR_SsoR_FO)


# ------------------------------------------------------------ define / extend

def test_recognize_define():
    phi = parse_bool("forall y. Y(y) <-> E(y, y)", free_so={"Y": 1})
    assert recognize_define(phi) == ("Y", ("y",), RelApp("E", ("y", "y")))


def test_recognize_define_rejects_existential():
    assert recognize_define(parse_bool("exists y. Y(y)", free_so={"Y": 1})) is None


def test_extend_is_not_a_define():
    phi = parse_bool("forall y. Y(y) <-> X(y) | E(y, y)", free_so={"Y": 1, "X": 1})
    assert recognize_define(phi) is None
    shape = recognize_extend(phi)
    assert (shape.source, shape.target, shape.strict) == ("X", "Y", False)


def test_extend_by_nothing():
    shape = recognize_extend(parse_bool("forall y. Y(y) <-> X(y)", free_so={"Y": 1, "X": 1}))
    assert shape.psi == BOTTOM and not shape.strict


def test_strict_extend():
    shape = recognize_extend(parse_bool(STRICT, free_so={"Y": 1, "X": 1}))
    assert shape.strict and shape.params == ("y",)


def test_mixed_arities_do_not_extend():
    phi = And(ForallFO("y", Iff(SOApp("Y", ("y",)), SOApp("X", ("y", "y")))),
              ExistsFO("y", And(Not(SOApp("X", ("y",))), SOApp("Y", ("y",)))))
    assert recognize_extend(phi) is None


def test_tm_branch_formula_strictly_extends():
    from artifact.compilers import compile_tm_to_tot, word_structure
    from artifact.fixtures import toy_machine
    M, word = toy_machine("m1")
    q = compile_tm_to_tot(M, word_structure(word))
    branches = [n for n in _walk(q) if isinstance(n, SumSO) and n.var == "Y"]
    assert branches
    for s in branches:
        psi = [b for b in _walk(s.body) if isinstance(b, Bool) and recognize_extend(b.formula)]
        assert psi and all(recognize_extend(b.formula).strict for b in psi)


def _walk(q):
    from artifact.formula.ast import walk
    return list(walk(q))


@given(bools(depth=3))
def test_define_and_extend_never_both(phi):
    wrapped = ForallFO("y", Iff(SOApp("Y", ("y",)), phi))
    assert not (recognize_define(wrapped) and recognize_extend(wrapped))


# ------------------------------------------------------------ normal form

def _body(text):
    return lfp_so(text).body


BRANCH = f"(Sum Y:1. [{STRICT}] * $Y * f(Y))"


def test_normalize_plain_alpha():
    nf = normalize_totp_fo(_body("[forall x. X(x)] * $X"), "f", "X")
    assert len(nf.alpha) == 1 and nf.terms == []


def test_normalize_distributes_complementary_guards():
    body = _body(f"[R(min)] * ({BRANCH} + {BRANCH} + [true]) + [!R(min)] * {BRANCH}")
    nf = normalize_totp_fo(body, "f", "X")
    assert len(nf.terms) == 3
    assert [len(g) for g, _ in nf.terms] == [1, 1, 1]


def test_normalize_merges_top_sum():
    body = _body(f"[exists x. !X(x)] * ({BRANCH} + {BRANCH} + [true])")
    nf = normalize_totp_fo(body, "f", "X")
    assert len(nf.terms) == 2
    assert len(nf.alpha) == 1


def test_normalize_rejects_overlapping_guards_without_epsilon():
    body = _body(f"[R(min)] * {BRANCH} + [exists x. X(x)] * {BRANCH}")
    with pytest.raises(FormulaError):
        normalize_totp_fo(body, "f", "X")


def test_normalized_form_stays_in_fragment():
    body = _body(f"[true] + [R(min)] * ({BRANCH} + {BRANCH})")
    nf = normalize_totp_fo(body, "f", "X")
    again = normalize_totp_fo(nf.to_formula(), "f", "X")
    assert len(again.terms) == len(nf.terms)
