"""q-number arithmetic and the two field backends."""

import random
from fractions import Fraction

import pytest

from qdyb.scalars import (
    RATIONAL, DegenerateParameterError, PoleError, PrimeField, QContext,
    f_poly, qfact, qfact_base, qnum, qnum_base, xi_of_f,
)


def ctx(q="2", n=3, root=None):
    return QContext(Fraction(q), n, root=root)


def test_qnum_small_values():
    c = ctx()
    assert qnum(0, c) == 0
    assert qnum(1, c) == 1
    # [2] = q + qbar at q = 2
    assert qnum(2, c) == Fraction(5, 2)
    assert qnum(-1, c) == -1
    assert qnum(-2, c) == -Fraction(5, 2)


def test_qnum_at_unit_q_uses_continuation():
    c = QContext(Fraction(1), 4)
    assert qnum(3, c) == 3
    c = QContext(Fraction(-1), 2)  # [2] = 2*(-1) != 0 via continuation
    assert qnum(2, c) == -2


def test_qfact():
    c = ctx()
    assert qfact(0, c) == 1
    assert qfact(2, c) == qnum(2, c)
    # [3] = q^2 + 1 + qbar^2 = 21/4 at q = 2, so [3]! = (5/2)(21/4)
    assert qfact(3, c) == Fraction(105, 8)


def test_qnum_base():
    c = ctx()
    d = Fraction(7, 3)
    assert qnum_base(1, d, c) == 1
    assert qnum_base(2, d, c) == 2 * d - c.lam
    assert qnum_base(5, c.q, c) == qnum(5, c)
    assert qfact_base(4, c.q, c) == qfact(4, c)


def test_qnum_addition_rule():
    # [j][k+1] - [j+1][k] = [j-k]
    c = ctx(q="5/3")
    rng = random.Random(11)
    for _ in range(40):
        j = rng.randint(-6, 6)
        k = rng.randint(-6, 6)
        lhs = qnum(j, c) * qnum(k + 1, c) - qnum(j + 1, c) * qnum(k, c)
        assert lhs == qnum(j - k, c)


def test_f_poly_initial_and_recursion():
    c = ctx(q="2")
    rng = random.Random(5)
    for _ in range(10):
        beta = Fraction(rng.randint(-8, 8), rng.randint(1, 3))
        assert f_poly(0, beta, c) == 1
        assert f_poly(1, beta, c) == c.qbar + beta
        for p in range(-8, 9):
            lhs = f_poly(p + 1, beta, c) + f_poly(p - 1, beta, c)
            assert lhs == qnum(2, c) * f_poly(p, beta, c)


def test_f_poly_closed_value():
    c = ctx(q="2")
    # f(2, 1) = [2] f(1,1) - f(0,1) = (5/2)(3/2) - 1 = 11/4
    assert f_poly(2, Fraction(1), c) == Fraction(11, 4)
    assert xi_of_f(2, Fraction(1), c) == Fraction(6, 11)


def test_xi_ratio_b_recursion():
    # b(p) = q - xi(p) satisfies b(p+1) = b(p) q / (qbar + b(p))
    c = ctx(q="3/2")
    rng = random.Random(7)
    for _ in range(10):
        beta = Fraction(rng.randint(-8, 8), rng.randint(1, 3))
        for p in range(-6, 6):
            try:
                b = c.q - xi_of_f(p, beta, c)
                b1 = c.q - xi_of_f(p + 1, beta, c)
            except PoleError:
                continue
            if c.qbar + b:
                assert b1 == b * c.q / (c.qbar + b)


def test_pole_raises():
    c = ctx(q="2")
    # f(p, beta) = 0 at beta = -qbar^p/[p]
    beta = -c.qbar**3 / qnum(3, c)
    with pytest.raises(PoleError):
        xi_of_f(3, beta, c)


def test_division_by_zero_is_an_error():
    with pytest.raises(ZeroDivisionError):
        Fraction(1) / Fraction(0)
    F = PrimeField()
    with pytest.raises(ZeroDivisionError):
        F.one / F.zero


def test_context_guards():
    with pytest.raises(DegenerateParameterError):
        QContext(Fraction(0), 2)
    QContext(Fraction(4), 2, root=Fraction(2))
    with pytest.raises(DegenerateParameterError):
        QContext(Fraction(4), 2, root=Fraction(3))


def test_fractional_power_via_root():
    c = QContext(Fraction(4), 2, root=Fraction(2))
    assert c.qpow(Fraction(1, 2)) == 2
    assert c.qpow(Fraction(-3, 2)) == Fraction(1, 8)
    assert c.qpow(3) == 64
    c2 = QContext(Fraction(4), 2)
    with pytest.raises(DegenerateParameterError):
        c2.qpow(Fraction(1, 2))


def test_prime_field_agrees_with_rationals():
    """Map-then-compare on every scalar operation, small random inputs."""
    F = PrimeField()
    rng = random.Random(31)
    for _ in range(25):
        q = Fraction(rng.randint(2, 9), rng.randint(1, 3))
        if q in (1,):
            continue
        cq = QContext(q, 3)
        cf = QContext(F.of(q), 3, field=F)
        beta = Fraction(rng.randint(-5, 5), rng.randint(1, 2))
        j = rng.randint(-5, 5)
        assert F.of(qnum(j, cq)) == qnum(j, cf)
        assert F.of(qfact(abs(j), cq)) == qfact(abs(j), cf)
        d = Fraction(rng.randint(1, 7), 2)
        assert F.of(qnum_base(4, d, cq)) == qnum_base(4, F.of(d), cf)
        assert F.of(f_poly(j, beta, cq)) == f_poly(j, F.of(beta), cf)


def test_modint_field_axioms():
    F = PrimeField()
    assert F.p > 2**61
    a, b, c = F.of(Fraction(3, 7)), F.of(-5), F.of(Fraction(11, 2))
    assert (a + b) * c == a * c + b * c
    assert a * a**-1 == F.one
    assert a - a == F.zero
    assert F.of(Fraction(3, 7)) * 7 == 3
