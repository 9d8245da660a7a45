import random
from fractions import Fraction

import pytest

from flatlab.ball import to_arb, working_precision
from flatlab.cache import DerivativeCache
from flatlab.census import census
from flatlab.errors import HypothesisViolated
from flatlab.flatfun import eval_ball, nth_derivative, zero_set
from flatlab.funcspec import parse_spec
from flatlab.laurent import LaurentPoly
from flatlab.report import FAIL, HYPOTHESIS_VIOLATED, INCONCLUSIVE, PASS
from flatlab.verify import (Lemma4Instance, _compare, default_samples, hypothesis_evidence,
                            lemma4_check, lemma7_probe, numerator_check, numerator_laurent,
                            ratio_chain_check, rescale_to_unit, theorem1_witness)

u = LaurentPoly.u()
QUARTER = Fraction(1, 4)

# least witnessing order, first verified run
WITNESSES = {"exp(-(u))": 2, "exp(-(2*u))": 3, "exp(-(u^2))": 2}


# -- first vanishing derivative -------------------------------------------


@pytest.mark.parametrize("spec, n", sorted(WITNESSES.items()))
def test_witnesses(spec, n):
    w = theorem1_witness(parse_spec(spec), 30, DerivativeCache())
    assert w.found and w.n_witness == n and w.reason == "zero"


def test_witness_brackets_one_half(f_exp):
    w = theorem1_witness(f_exp, 10)
    assert w.zero.contains(Fraction(1, 2))
    assert w.to_report().status == PASS


def test_witness_not_found_within_budget(f_exp):
    w = theorem1_witness(f_exp, 1)
    assert not w.found and w.n_searched == 1 and w.zero is None
    assert w.to_report().status == INCONCLUSIVE


def test_witness_for_negative_function():
    w = theorem1_witness(parse_spec("exp(-(u))*(-1)"), 5)
    assert w.found and w.n_witness == 0 and w.reason == "negative"


@pytest.mark.parametrize("spec", ["exp(-(u))", "exp(-(2*u))", "exp(-(u^2))", "exp(-(u))*(u-3)"])
def test_witness_consistent_with_census(spec):
    f = parse_spec(spec)
    w = theorem1_witness(f, 30)
    rows = census(f, w.n_witness, DerivativeCache())
    assert rows[-1].z >= 1
    assert all(r.z == 0 for r in rows[:-1])


# -- rescaling -------------------------------------------------------------------


def test_rescale_example(f_exp):
    g = rescale_to_unit(f_exp, QUARTER)
    assert g.p == 4 * u and g.L == LaurentPoly.constant(1)
    assert eval_ball(g, Fraction(1, 2)).overlaps(eval_ball(f_exp, Fraction(1, 8)))
    assert rescale_to_unit(f_exp, 1) is f_exp
    with pytest.raises(ValueError):
        rescale_to_unit(f_exp, 0)


def test_rescale_moves_zeros(f_exp):
    # zeros of f(alpha x) are the zeros of f divided by alpha, kept if inside (0, 1)
    alpha = Fraction(3, 4)
    g = rescale_to_unit(f_exp, alpha)
    for n in range(2, 8):
        zf = [b for b in zero_set(f_exp, n).brackets if b.hi <= alpha]
        zg = zero_set(g, n).brackets
        assert len(zg) == len(zf)
        for a, b in zip(zf, zg):
            assert b.lo <= a.hi / alpha and a.lo / alpha <= b.hi


def test_rescale_commutes_with_differentiation():
    rng = random.Random(1)
    f = parse_spec("exp(-(u+1/2*u^2))*(u-3)")
    for _ in range(20):
        alpha = Fraction(rng.randint(1, 9), 10)
        n = rng.randint(0, 4)
        x = Fraction(rng.randint(1, 99), 100)
        lhs = eval_ball(nth_derivative(rescale_to_unit(f, alpha), n), x, 256)
        rhs = eval_ball(nth_derivative(f, n), alpha * x, 256)
        with working_precision(256):
            # d^n/dx^n f(alpha x) = alpha^n f^(n)(alpha x)
            assert lhs.arb.overlaps(rhs.arb * to_arb(alpha**n))


# -- g(x) < x^n g(1) on a sample grid -------------------------------------


def test_default_samples():
    s = default_samples()
    assert len(s) == 1024 + 64  # k/1025 never equals 2^-j
    assert all(0 < q < 1 for q in s) and s == sorted(s)


def test_lemma4_pass_instance(f_exp):
    inst = Lemma4Instance.from_alpha(f_exp, QUARTER, 1)
    ok, evidence = hypothesis_evidence(inst)
    assert ok and evidence["L_next"] == "16*u^4-8*u^3" and evidence["roots_u_gt_1"] == []
    report = lemma4_check(inst)
    assert report.status == PASS
    assert report.summary["passed"] == report.summary["samples"] == len(default_samples())


def test_lemma4_hypothesis_violated(f_exp):
    inst = Lemma4Instance.from_alpha(f_exp, QUARTER, 2)
    report = lemma4_check(inst)
    assert report.status == HYPOTHESIS_VIOLATED
    (evidence,) = report.details
    assert evidence["L_next"] == "64*u^6-96*u^5+24*u^4"
    (root,) = evidence["roots_u_gt_1"]
    # root of 8u^2 - 12u + 3 above 1 is u = (3 + sqrt 3)/4, i.e. x = 4/(3 + sqrt 3)
    x = 4 / (3 + 3**0.5)
    assert Fraction(root["x_lo"]) <= x <= Fraction(root["x_hi"])


def test_lemma4_rejects_closed_endpoint(f_exp):
    with pytest.raises(ValueError):
        Lemma4Instance.from_alpha(f_exp, QUARTER, 1, samples=[Fraction(1, 2), 1])


def test_lemma4_g_of_one_zero():
    with pytest.raises(HypothesisViolated):
        Lemma4Instance(parse_spec("exp(-(u))*(u-1)"), 1)


def test_lemma4_fails_on_false_inequality(f_exp):
    # negative control: g(99/100) < (99/100)^40 g(1) is false, the comparison must say FAIL
    inst = Lemma4Instance(rescale_to_unit(f_exp, QUARTER), 40, (Fraction(99, 100),))
    assert hypothesis_evidence(inst)[0] is False
    status, _ = _compare(inst.g, 1, Fraction(99, 100), Fraction(1), Fraction(1),
                         Fraction(99, 100) ** 40, 64, 4096)
    assert status == FAIL


def test_lemma4_pass_is_monotone_in_precision(f_exp):
    inst = Lemma4Instance.from_alpha(f_exp, QUARTER, 1, samples=default_samples(64, 16))
    for prec in (64, 128, 512):
        assert lemma4_check(inst, precision=prec).status == PASS


def test_ratio_chain(f_exp):
    inst = Lemma4Instance.from_alpha(f_exp, QUARTER, 1)
    report = ratio_chain_check(inst)
    assert report.status == PASS and report.summary["chain_length"] == 64


# -- numerator ---------------------------------------------------------------------


def test_numerator_pass(f_exp):
    inst = Lemma4Instance.from_alpha(f_exp, QUARTER, 1)
    assert numerator_laurent(inst) == 4 * u - 1
    assert numerator_check(inst, [QUARTER, Fraction(1, 2), Fraction(3, 4)]).status == PASS
    assert numerator_check(inst).status == PASS


def test_numerator_n_zero(f_exp):
    inst = Lemma4Instance.from_alpha(f_exp, QUARTER, 0)
    assert numerator_check(inst).status == PASS


def test_numerator_tampered_sign_oracle(f_exp):
    inst = Lemma4Instance.from_alpha(f_exp, QUARTER, 1)
    report = numerator_check(inst, [Fraction(1, 2)], sign_fn=lambda a, q: -1)
    assert report.status == FAIL


# -- power comparison probe ---------------------------------------------------


@pytest.mark.parametrize("x, p", [(Fraction(1, 2), 2), (Fraction(9, 10), 2), (Fraction(1, 10), 4),
                                  (Fraction(99, 100), 2)])
def test_lemma7_least_p(f_exp, x, p):
    report = lemma7_probe(f_exp, 0, 20, x)
    assert report.status == PASS and report.summary["least_p"] == p


def test_lemma7_vacuous(f_exp):
    report = lemma7_probe(f_exp, 0, 0, Fraction(1, 2))
    assert report.status == INCONCLUSIVE and report.summary["least_p"] is None
    assert report.summary["margin_at_p_max"] > 0


def test_lemma7_higher_order(f_exp):
    assert lemma7_probe(f_exp, 3, 30, Fraction(9, 10)).summary["least_p"] == 3
    # the second derivative vanishes at 1/2 and the third is negative there,
    # so no power of x is ever exceeded
    for N in (2, 3):
        report = lemma7_probe(f_exp, N, 30, Fraction(1, 2))
        assert report.status == INCONCLUSIVE and report.summary["least_p"] is None
    with pytest.raises(ValueError):
        lemma7_probe(f_exp, 0, 5, 1)
