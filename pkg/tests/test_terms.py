from fractions import Fraction

import pytest

from moxicheck.system import TransitionSystem
from moxicheck.terms import (
    BOOL, FALSE, INT, REAL, TRUE, Array, ArrayValue, BitVec, EvalError, SortError, Variable,
    check_sort, conjoin_invariance, conjuncts, evaluate, free_vars, instantiate, mk_and, mk_app,
    mk_bv, mk_const, mk_eq, mk_int, mk_not, mk_or, mk_real, mk_var, prime, substitute,
)

S = Variable("s", BitVec(3), "output")
X = Variable("x", BitVec(3), "input")
N = Variable("n", INT, "local")


def bv(v, w=3):
    return mk_bv(v, w)


def test_counter_transition_instantiates_at_frame_zero():
    t = mk_eq(mk_var(S.prime()), mk_app("bvadd", [mk_var(S), bv(2)]))
    assert str(instantiate(t, 0)) == "(= s@1 (bvadd s@0 #b010))"


def test_inputs_keep_their_frame_under_instantiate():
    t = mk_eq(mk_var(S.prime()), mk_app("bvadd", [mk_var(S), mk_var(X)]))
    got = instantiate(t, 4)
    assert free_vars(got) == {S.at(5), S.at(4), X.at(4)}


def test_prime_touches_state_variables_only():
    t = mk_app("bvult", [mk_var(S), mk_var(X)])
    assert free_vars(prime(t)) == {S.prime(), X}


def test_priming_an_input_is_rejected():
    with pytest.raises(SortError):
        X.prime()


def test_sort_mismatch_in_equality():
    with pytest.raises(SortError):
        mk_eq(mk_var(S), mk_bv(1, 4))


def test_bvadd_needs_equal_widths():
    with pytest.raises(SortError):
        mk_app("bvadd", [mk_var(S), mk_bv(1, 4)])


def test_extract_and_concat_sorts():
    assert check_sort(mk_app("extract", [mk_var(S)], (2, 1))) == BitVec(2)
    assert check_sort(mk_app("concat", [mk_var(S), mk_bv(0, 5)])) == BitVec(8)
    with pytest.raises(SortError):
        mk_app("extract", [mk_var(S)], (3, 0))


def test_int_literal_coerces_in_real_context():
    r = Variable("r", REAL)
    t = mk_app("<", [mk_var(r), mk_int(2)])
    assert check_sort(t) == BOOL
    assert t.args[1].sort == REAL and t.args[1].value == Fraction(2)


def test_and_or_degenerate_forms():
    assert mk_and() == TRUE and mk_or() == FALSE
    a = mk_app("bvult", [mk_var(S), bv(3)])
    assert mk_and(a) is a


def test_conjuncts_flatten_nested_and():
    a, b, c = (mk_eq(mk_var(S), bv(i)) for i in range(3))
    assert conjuncts(mk_and(a, mk_and(b, c))) == [a, b, c]


def test_conjoin_invariance_shape():
    sys_ = TransitionSystem("m", outputs=(S,), init=mk_eq(mk_var(S), bv(0)),
                            trans=mk_eq(mk_var(S.prime()), mk_var(S)),
                            inv=mk_app("bvult", [mk_var(S), bv(6)]))
    init, trans = conjoin_invariance(sys_)
    assert str(init) == "(and (= s #b000) (bvult s #b110))"
    assert str(trans) == "(and (= s' s) (bvult s #b110) (bvult s' #b110))"


def test_substitute_replaces_variable():
    t = mk_app("bvadd", [mk_var(S), mk_var(S)])
    assert evaluate(substitute(t, {S: bv(3)}), {}) == 6


@pytest.mark.parametrize("op,a,b,want", [
    ("bvudiv", 5, 0, 7),      # division by zero yields all ones
    ("bvurem", 5, 0, 5),      # remainder by zero yields the dividend
    ("bvsdiv", 7, 2, 0),      # -1 / 2 truncates toward zero
    ("bvsrem", 5, 2, 7),      # -3 rem 2 = -1
    ("bvsmod", 5, 2, 1),      # -3 mod 2 = 1
    ("bvshl", 3, 1, 6),
    ("bvlshr", 6, 5, 0),
    ("bvashr", 4, 1, 6),
    ("bvmul", 3, 3, 1),
])
def test_bitvector_semantics(op, a, b, want):
    assert evaluate(mk_app(op, [bv(a), bv(b)]), {}) == want


def test_signed_comparison():
    assert evaluate(mk_app("bvslt", [bv(4), bv(3)]), {}) is True
    assert evaluate(mk_app("bvult", [bv(4), bv(3)]), {}) is False


def test_int_div_mod_are_euclidean():
    assert evaluate(mk_app("div", [mk_int(-7), mk_int(2)]), {}) == -4
    assert evaluate(mk_app("mod", [mk_int(-7), mk_int(2)]), {}) == 1
    assert evaluate(mk_app("div", [mk_int(-7), mk_int(-2)]), {}) == 4


def test_real_division_by_zero_raises():
    with pytest.raises(EvalError):
        evaluate(mk_app("/", [mk_real(1), mk_real(0)]), {})


def test_evaluate_missing_variable():
    with pytest.raises(EvalError):
        evaluate(mk_var(N), {})


def test_arrays_select_store():
    a = Variable("a", Array(BitVec(2), BOOL))
    env = {a: ArrayValue(False, ())}
    t = mk_app("select", [mk_app("store", [mk_var(a), mk_bv(1, 2), TRUE]), mk_bv(1, 2)])
    assert evaluate(t, env) is True
    assert evaluate(mk_app("select", [mk_var(a), mk_bv(2, 2)]), env) is False


def test_ite_and_distinct():
    t = mk_app("ite", [mk_app("distinct", [bv(1), bv(2), bv(1)]), bv(5), bv(6)])
    assert evaluate(t, {}) == 6


def test_terms_hash_structurally():
    a = mk_eq(mk_var(S), bv(1))
    b = mk_eq(mk_var(S), bv(1))
    assert a == b and hash(a) == hash(b) and len({a, b}) == 1
    assert mk_not(a) != a


def test_const_range_checked():
    with pytest.raises(SortError):
        mk_const(8, BitVec(3))
