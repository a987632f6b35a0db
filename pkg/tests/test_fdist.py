import itertools
import random
from fractions import Fraction

import pytest

from twistlab.fdist import (
    FdistError,
    GenSeries,
    KernelPoly,
    LieAlg,
    QuadraticSpace,
    UNKNOWN,
    WindowUnderflow,
    compare_status,
    derive,
    gen_binom,
    kernel_Delta,
    kernel_Delta_via_F,
    kernel_F,
    kernel_delta_check,
    lie_from_products,
    locality_test,
    nth_product,
    series_compare,
    verify_axioms,
    zero_series,
)
from twistlab.scalar import CycScalar, ONE


def test_gen_binom():
    assert gen_binom(Fraction(7, 3), 0) == 1
    assert gen_binom(Fraction(1, 2), 2) == Fraction(-1, 8)
    for n in range(6):
        for j in range(n + 1):
            import math

            assert gen_binom(Fraction(n), j) == math.comb(n, j)
    assert gen_binom(Fraction(3), 5) == 0
    assert gen_binom(Fraction(-2), 3) == -4


def test_quadratic_space_validation():
    with pytest.raises(FdistError):
        QuadraticSpace(["a", "b"], [0, 0], [[0, 1], [2, 0]])  # not symmetric
    with pytest.raises(FdistError):
        # nonzero pairing across incompatible degrees
        QuadraticSpace(["a", "b"], [0, Fraction(1, 2)], [[2, 1], [1, 2]])


def heisenberg(degree):
    """One-generator twisted Heisenberg with (h|h) = 2."""
    sp = QuadraticSpace(["h"], [degree], [[2]])
    alg = LieAlg(sp)
    series = GenSeries(alg, lambda n: alg.gen_mode(0, n), {degree})
    return alg, series


def two_heisenberg(la, mu, pair):
    sp = QuadraticSpace(["a", "b"], [la, mu], [[0, pair], [pair, 0]])
    alg = LieAlg(sp)
    sa = GenSeries(alg, lambda n: alg.gen_mode(0, n), {la})
    sb = GenSeries(alg, lambda n: alg.gen_mode(1, n), {mu})
    return alg, sa, sb


def constant_series(alg, value, slot=-1):
    return GenSeries(
        alg,
        lambda n: value if n == Fraction(slot) else alg.zero(),
        {Fraction(slot)},
    )


def series_equal(s1, s2, slots):
    return compare_status(series_compare(s1, s2, slots)) == "pass"


SLOTS = [Fraction(n, 2) for n in range(-8, 9)]


def test_affine_first_product_untwisted():
    alg, sa, sb = two_heisenberg(0, 0, 3)
    prod = nth_product(sa, sb, 1, 2)
    expect = constant_series(alg, alg.central().scale(3))
    assert series_equal(prod, expect, SLOTS)
    # zeroth product vanishes for an abelian pair
    assert series_equal(nth_product(sa, sb, 0, 2), zero_series(alg), SLOTS)


def test_affine_first_product_twisted():
    half = Fraction(1, 2)
    alg, sa, sb = two_heisenberg(half, half, 5)
    prod = nth_product(sa, sb, 1, 2)
    expect = constant_series(alg, alg.central().scale(5))
    assert series_equal(prod, expect, SLOTS)


def test_tau_products_case_table():
    half = Fraction(1, 2)
    # lambda = mu = 0: tau[1]tau = (a|b) c
    alg, sa, sb = two_heisenberg(0, 0, 7)
    ta, tb = sa.shift(0), sb.shift(0)
    assert series_equal(nth_product(ta, tb, 1, 2),
                        constant_series(alg, alg.central().scale(7)), SLOTS)
    # lambda + mu = 1: tau[1]tau = z (a|b) c  (slot -2)
    alg, sa, sb = two_heisenberg(half, half, 7)
    ta, tb = sa.shift(half), sb.shift(half)
    assert series_equal(
        nth_product(ta, tb, 1, 2),
        constant_series(alg, alg.central().scale(7), slot=-2), SLOTS)
    # lambda + mu >= 1, abelian: tau[0]tau = lambda (a|b) c
    assert series_equal(
        nth_product(ta, tb, 0, 2),
        constant_series(alg, alg.central().scale(Fraction(7, 2))), SLOTS)
    # lambda + mu < 1, abelian: tau[0]tau = tau_{[ab]} = 0
    alg0, sa0, sb0 = two_heisenberg(0, 0, 7)
    assert series_equal(nth_product(sa0.shift(0), sb0.shift(0), 0, 2),
                        zero_series(alg0), SLOTS)


def sl2_twisted():
    """Twisted sl2 under the swap involution: u = e+f (degree 0),
    v = e-f and h (degree 1/2); [u,v] = -2h, [h,u] = 2v, [h,v] = 2u;
    form (u|u) = 2, (v|v) = -2, (h|h) = 2."""
    half = Fraction(1, 2)
    two = CycScalar.rational(2)
    bracket = {
        (0, 1): ((2, -two),), (1, 0): ((2, two),),
        (2, 0): ((1, two),), (0, 2): ((1, -two),),
        (2, 1): ((0, two),), (1, 2): ((0, -two),),
    }
    sp = QuadraticSpace(
        ["u", "v", "h"], [0, half, half],
        [[2, 0, 0], [0, -2, 0], [0, 0, 2]], bracket)
    alg = LieAlg(sp)
    su = GenSeries(alg, lambda n: alg.gen_mode(0, n), {Fraction(0)})
    sv = GenSeries(alg, lambda n: alg.gen_mode(1, n), {half})
    sh = GenSeries(alg, lambda n: alg.gen_mode(2, n), {half})
    return alg, su, sv, sh


def test_tau_zeroth_product_with_bracket():
    half = Fraction(1, 2)
    alg, su, sv, sh = sl2_twisted()
    tu, tv, th = su.shift(0), sv.shift(half), sh.shift(half)
    # lambda + mu = 1/2 + 0 < 1: tau_h [0] tau_u = tau_{[h,u]} = 2 tau_v
    assert series_equal(nth_product(th, tu, 0, 2), tv.scale(2), SLOTS)
    # lambda + mu = 1 >= 1: tau_h [0] tau_h = z tau_{[h,h]} + lambda (h|h) c
    assert series_equal(nth_product(th, th, 0, 2),
                        constant_series(alg, alg.central()), SLOTS)
    # lambda + mu = 1 with nonzero bracket: tau_h [0] tau_v = 2 z tau_u
    got = nth_product(th, tv, 0, 2)
    expect = tu.scale(2).shift(1)
    assert series_equal(got, expect, SLOTS)


def test_lie_from_products_heisenberg():
    alg, s = heisenberg(Fraction(1, 2))
    for m in [Fraction(1, 2), Fraction(3, 2), Fraction(-1, 2)]:
        direct, recovered = lie_from_products(s, s, m, -m, 2)
        assert direct == recovered
        assert direct == alg.central().scale(Fraction(2) * m)
    # m + n != 0: bracket vanishes
    direct, recovered = lie_from_products(
        s, s, Fraction(1, 2), Fraction(1, 2), 2)
    assert direct == recovered
    assert direct.is_zero()


def test_lie_from_products_m_zero_single_term():
    alg, su, sv, sh = sl2_twisted()
    direct, recovered = lie_from_products(su, sh, 0, Fraction(1, 2), 2)
    assert direct == recovered
    prod0 = nth_product(su, sh, 0, 2)
    assert direct == prod0.coeff(Fraction(1, 2))
    assert direct == alg.gen_mode(1, Fraction(1, 2)).scale(-2)


def test_locality():
    alg, s = heisenberg(Fraction(1, 2))
    slots = [(Fraction(1, 2), Fraction(-1, 2)), (Fraction(3, 2), Fraction(1, 2))]
    assert locality_test(s, s, 2, slots)
    assert not locality_test(s, s, 1, slots)
    # commuting pair is local of order 0
    alg2, sa, sb = two_heisenberg(0, 0, 0)
    assert locality_test(sa, sb, 0, [(1, -1), (0, 2)])


def test_derive_relation():
    alg, s = heisenberg(Fraction(1, 2))
    d = derive(s)
    for n in SLOTS:
        assert d.coeff(n) == s.coeff(n - 1).scale(-n)


def test_window_untestable():
    alg = LieAlg(QuadraticSpace(["h"], [0], [[2]]))
    entries = {n: alg.gen_mode(0, n) for n in range(-3, 4)}
    s = GenSeries.from_dict(alg, entries, lo=-3, hi=3)
    assert s.coeff(5) is UNKNOWN
    assert s.coeff(Fraction(1, 2)).is_zero()
    d = derive(s)
    assert d.coeff(5) is UNKNOWN
    assert d.coeff(2) == alg.gen_mode(0, 1).scale(-2)
    pairs = series_compare(s, s, [0, 10])
    assert dict(pairs)[Fraction(10)] == "untestable"
    assert compare_status(pairs) == "untestable"
    with pytest.raises(WindowUnderflow):
        locality_test(s, s, 2, [(10, 0)])


def test_verify_axioms_twisted_affine():
    half = Fraction(1, 2)
    alg, su, sv, sh = sl2_twisted()
    family = [("tu", su.shift(0)), ("tv", sv.shift(half)),
              ("th", sh.shift(half))]
    slots = list(range(-4, 5))
    report = verify_axioms(family, ["C1", "C2", "C3", "C4"], slots,
                           lambda a, b: 2)
    assert report
    bad = [line for line in report if line[2] != "pass"]
    assert not bad, bad


def test_verify_axioms_untestable_marking():
    alg = LieAlg(QuadraticSpace(["h"], [0], [[2]]))
    entries = {n: alg.gen_mode(0, n) for n in range(-2, 3)}
    s = GenSeries.from_dict(alg, entries, lo=-2, hi=2)
    report = verify_axioms([("h", s)], ["C2"], [0, 50], lambda a, b: 2)
    assert all(status in ("pass", "untestable") for _, _, status in report)
    assert any(status == "untestable" for _, _, status in report)


# ---------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------

def test_kernel_F_p1_is_one():
    for m in range(7):
        assert kernel_F(1, m) == KernelPoly.monomial(1, 0, 0, 1)


def test_kernel_F_diagonal_identity():
    for p in range(1, 6):
        for m in range(7):
            diag = kernel_F(p, m).restrict_diagonal()
            # expect p^-m z^((m+1)(1-p)/p): exponent in 1/p units
            expect = {(m + 1) * (1 - p): Fraction(1, p ** m)}
            assert diag == expect


def test_kernel_delta_two_routes_agree():
    for p in range(1, 5):
        for n in range(-2, 3):
            for N in range(max(n + 1, 0), n + 4):
                agree, d1, d2 = kernel_delta_check(p, n, N)
                assert agree, (p, n, N)


def test_kernel_delta_p1():
    # p = 1: Delta is identically 1 (only the j = 0 term survives)
    for n in range(-2, 3):
        for N in range(n + 1, n + 4):
            assert kernel_Delta(1, n, N) == KernelPoly.monomial(1, 0, 0, 1)


def test_kernel_poly_arithmetic():
    p = KernelPoly(3, {(1, 0): 2, (0, 1): -1})
    q = KernelPoly(3, {(1, 0): 1})
    assert (p - q) + q == p
    assert p * q == KernelPoly(3, {(2, 0): 2, (1, 1): -1})
    assert q ** 3 == KernelPoly(3, {(3, 0): 1})
