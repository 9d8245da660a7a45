import math
import random
from fractions import Fraction

import pytest
import sympy
from flint import arb

from flatlab.ball import to_arb, working_precision
from flatlab.cache import DerivativeCache
from flatlab.flatfun import (ExpPolyFlatFunction, derivative_sequence, differentiate,
                             eval_ball, eval_range_ball, nth_derivative, sign_at_one, zero_set)
from flatlab.laurent import LaurentPoly, sign_at
from oracles import X, symbolic_nth_derivative

u = LaurentPoly.u()


def fam(p, L=None):
    return ExpPolyFlatFunction(p, L if L is not None else LaurentPoly.constant(1))


# -- construction ------------------------------------------------------------


@pytest.mark.parametrize("p", [LaurentPoly.constant(3), -u, u**-1 + u, LaurentPoly.constant(0)])
def test_non_flat_exponents_are_rejected(p):
    with pytest.raises(ValueError):
        fam(p)


def test_zero_L_is_rejected():
    with pytest.raises(ValueError):
        fam(u, LaurentPoly.constant(0))


def test_spec_text():
    assert ExpPolyFlatFunction.exp_neg_inv().spec() == "exp(-(u))"
    assert fam(4 * u, u**2 - 3).spec() == "exp(-(4*u))*(u^2-3)"


# -- recurrence ----------------------------------------------------------------


def test_differentiate_examples(f_exp):
    f1 = differentiate(f_exp)
    assert f1.L == u**2 and f1.p == u
    assert differentiate(f1).L == u**4 - 2 * u**3
    assert differentiate(differentiate(f1)).L == u**6 - 6 * u**5 + 6 * u**4


def test_nth_derivative_examples(f_exp):
    assert nth_derivative(f_exp, 0) == f_exp
    assert nth_derivative(f_exp, 2).L == u**4 - 2 * u**3
    assert nth_derivative(f_exp, 3).L == u**6 - 6 * u**5 + 6 * u**4


@pytest.mark.parametrize("p, L, n", [
    ({1: 1}, {0: 1}, 4),
    ({1: 2}, {0: 1}, 3),
    ({2: 1}, {0: 1}, 3),
    ({1: 4}, {2: 1, 0: -3}, 3),
    ({1: 1, 2: "1/2"}, {-1: 2, 1: 1}, 2),
])
def test_recurrence_matches_symbolic_differentiation(p, L, n):
    pl = sum((LaurentPoly.monomial(Fraction(c), k) for k, c in p.items()), LaurentPoly.constant(0))
    Ll = sum((LaurentPoly.monomial(Fraction(c), k) for k, c in L.items()), LaurentPoly.constant(0))
    mine = nth_derivative(fam(pl, Ll), n, DerivativeCache())
    expected = symbolic_nth_derivative(p, L, n)
    ours = sympy.exp(-sum(sympy.Rational(c) * X**-k for k, c in mine.p.items())) * \
        sum(sympy.Rational(c) * X**-k for k, c in mine.L.items())
    assert sympy.simplify(ours - expected) == 0


def _random_family_member(rng):
    p = sum((LaurentPoly.monomial(Fraction(rng.randint(1, 3), rng.randint(1, 2)), k)
             for k in range(1, rng.randint(1, 2) + 1)), LaurentPoly.constant(0))
    L = sum((LaurentPoly.monomial(Fraction(rng.randint(-5, 5), rng.randint(1, 3)), k)
             for k in range(-1, 3)), LaurentPoly.constant(0))
    if L.is_zero():
        L = LaurentPoly.constant(1)
    return fam(p, L)


def test_central_difference_agrees_with_differentiate():
    # |(f(x+h) - f(x-h))/(2h) - f'(x)| <= h^2/6 * max |f'''| on [x-h, x+h]
    rng = random.Random(11)
    h = Fraction(1, 2**20)
    for _ in range(100):
        f = _random_family_member(rng)
        x0 = Fraction(rng.randint(1, 1000), 1000) * Fraction(3, 4) + Fraction(1, 4)
        x0 = min(x0, 1 - h)
        f1, f3 = differentiate(f), nth_derivative(f, 3, DerivativeCache())
        prec = 256
        with working_precision(prec):
            fd = (eval_ball(f, x0 + h, prec).arb - eval_ball(f, x0 - h, prec).arb) / to_arb(2 * h)
        exact = eval_ball(f1, x0, prec).arb
        m3 = eval_range_ball(f3, x0 - h, x0 + h, prec).arb
        with working_precision(prec):
            bound = abs(m3).upper() * float(h) ** 2 / 6
            diff = abs(fd - exact)
            assert diff.lower() <= bound, (f.spec(), x0)


# -- evaluation ------------------------------------------------------------------


def test_eval_ball_examples(f_exp):
    b1 = eval_ball(f_exp, 1)
    assert abs(float(b1) - math.exp(-1)) < 1e-15 and b1.radius < Fraction(1, 2**100)
    assert abs(float(eval_ball(f_exp, Fraction(1, 2))) - math.exp(-2)) < 1e-15


def test_eval_ball_radius_shrinks_with_precision(f_exp):
    f3 = nth_derivative(f_exp, 3)
    for x in [Fraction(1, 3), Fraction(5, 7), Fraction(1)]:
        radii = [eval_ball(f3, x, prec).radius for prec in (64, 128, 256)]
        assert radii[0] >= radii[1] >= radii[2]
        inner = eval_ball(f3, x, 256)
        assert eval_ball(f3, x, 64).arb.contains(inner.arb)


def test_eval_ball_rejects_nonpositive(f_exp):
    with pytest.raises(ValueError):
        eval_ball(f_exp, 0)


def test_flatness_near_zero(f_exp):
    for n in range(11):
        fn = nth_derivative(f_exp, n)
        values = [abs(eval_ball(fn, Fraction(1, 2**k)).arb) for k in range(1, 21)]
        # once past the last zero the values head monotonically to 0
        tail = values[6:]
        assert all(b < a for a, b in zip(tail, tail[1:])), n
        assert values[-1] < arb(2) ** -1000


# -- zero sets ---------------------------------------------------------------------


def test_zero_set_examples(f_exp):
    assert zero_set(f_exp, 1).z == 0
    (b,) = zero_set(f_exp, 2).brackets
    assert b.contains(Fraction(1, 2))
    z3 = zero_set(f_exp, 3)
    assert z3.z == 2
    low, high = z3.brackets
    x3 = (1 - 1 / sympy.sqrt(3)) / 2
    assert low.lo <= x3 < low.hi
    assert high.lo <= (1 + 1 / sympy.sqrt(3)) / 2 < high.hi


def test_sign_at_one_examples(f_exp):
    assert [sign_at_one(f_exp, n) for n in range(4)] == [1, 1, -1, 1]


def test_zero_brackets_straddle_a_sign_change(f_exp):
    for n in range(12):
        L = nth_derivative(f_exp, n).L
        zs = zero_set(f_exp, n)
        assert list(zs.brackets) == sorted(zs.brackets, key=lambda b: b.lo)
        for b in zs.brackets:
            assert 0 < b.lo < b.hi < 1
            if b.sign_change:
                assert sign_at(L, 1 / b.hi) * sign_at(L, 1 / b.lo) < 0


def test_derivative_sequence_matches_repeated_differentiate(f_exp):
    seq = derivative_sequence(f_exp, 6, DerivativeCache())
    cur = f_exp
    for L in seq:
        assert L == cur.L
        cur = differentiate(cur)
