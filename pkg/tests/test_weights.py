"""Weight points and the derived parameter tables."""

import random
from fractions import Fraction

import pytest

from qdyb.scalars import DegenerateParameterError, QContext, qnum
from qdyb.weights import (
    BETA_INFINITY, CONSTANT_MULTIPARAM, GENERIC, INTERMEDIATE, PairFamily,
    SLnParams, WeightPoint, derive_beta, pole_free, sample_params,
    sample_point, sample_q,
)


def test_weightpoint_additivity_and_shift():
    w = WeightPoint(4, (2, -1, 3))
    assert w.p(1, 2) == 2 and w.p(2, 3) == -1 and w.p(3, 4) == 3
    assert w.p(1, 3) == 1 and w.p(1, 4) == 4 and w.p(2, 4) == 2
    assert w.p(3, 1) == -1 and w.p(2, 2) == 0
    # shifting by v(m): p_jk -> p_jk + delta(m,j) - delta(m,k)
    for m in range(1, 5):
        s = w.shift(m)
        for j in range(1, 5):
            for k in range(1, 5):
                d = (1 if m == j else 0) - (1 if m == k else 0)
                assert s.p(j, k) == w.p(j, k) + d
        assert s.shift(m, -1) == w


def test_weightpoint_from_pairs_checks_additivity():
    WeightPoint.from_pairs(3, {(1, 2): 1, (2, 3): 2, (1, 3): 3})
    with pytest.raises(DegenerateParameterError):
        WeightPoint.from_pairs(3, {(1, 2): 1, (2, 3): 2, (1, 3): 0})


def test_derive_beta_small_cases():
    ctx = QContext(Fraction(2), 2)
    b = derive_beta(ctx, [Fraction(1)])
    assert b[(1, 2)] == 1 and b[(2, 1)] == ctx.lam - 1

    ctx3 = QContext(Fraction(2), 3)
    b = derive_beta(ctx3, [Fraction(1), Fraction(3)])
    assert b[(1, 3)] == Fraction(6, 5)


def test_beta_invariants_and_pi():
    rng = random.Random(3)
    for _ in range(20):
        n = rng.choice([2, 3, 4])
        params = sample_params(n, rng)
        lam = params.ctx.lam
        for i in range(1, n + 1):
            assert params.beta(i, i) == 0
            for j in range(1, n + 1):
                if i != j:
                    assert params.beta(i, j) + params.beta(j, i) == lam
                    assert params.pi(i, j) * params.pi(j, i) == 1
                for k in range(1, n + 1):
                    if len({i, j, k}) == 3:
                        assert (params.beta(i, j) * params.beta(j, k)
                                * params.beta(k, i)
                                + params.beta(i, k) * params.beta(k, j)
                                * params.beta(j, i)) == 0
                        assert (params.pi(i, j) * params.pi(j, k)
                                * params.pi(k, i)) == 1
        # multiplicativity along the chain
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                prod = params.ctx.field.one
                for k in range(i, j):
                    prod = prod * params.pi(k, k + 1)
                assert params.pi(i, j) == prod


def test_pi_closed_value():
    ctx = QContext(Fraction(2), 2)
    params = SLnParams(ctx, [Fraction(1)])
    assert params.pi(1, 2) == Fraction(-1, 2)


def test_b_table_properties():
    rng = random.Random(17)
    for _ in range(12):
        n = rng.choice([2, 3])
        params = sample_params(n, rng)
        p = sample_point(params, rng)
        lam = params.ctx.lam
        q = params.ctx.q
        for i in range(1, n + 1):
            assert params.b_entry(i, i, 0) == 0
            for j in range(1, n + 1):
                if i == j:
                    continue
                pij = p.p(i, j)
                b_ij = params.b_entry(i, j, pij)
                b_ji = params.b_entry(j, i, -pij)
                a_ij = params.a_entry(i, j, pij)
                a_ji = params.a_entry(j, i, -pij)
                assert b_ij + b_ji == lam
                assert a_ij * a_ji - b_ij * b_ji == 1
        for trip in [(i, j, k) for i in range(1, n + 1)
                     for j in range(1, n + 1) for k in range(1, n + 1)
                     if len({i, j, k}) == 3]:
            i, j, k = trip
            prod1 = (params.b_entry(i, j, p.p(i, j))
                     * params.b_entry(j, k, p.p(j, k))
                     * params.b_entry(k, i, p.p(k, i)))
            prod2 = (params.b_entry(i, k, p.p(i, k))
                     * params.b_entry(k, j, p.p(k, j))
                     * params.b_entry(j, i, p.p(j, i)))
            assert prod1 + prod2 == 0


def test_cycle_reversal_identity():
    # b_{i1 i2} b_{i2 i3} ... b_{ik i1} = (-1)^k b_{i1 ik} ... b_{i2 i1}
    rng = random.Random(23)
    for _ in range(6):
        params = sample_params(5, rng)
        p = sample_point(params, rng)

        def b(i, j):
            return params.b_entry(i, j, p.p(i, j))

        for k in (3, 4, 5):
            idx = rng.sample(range(1, 6), k)
            fwd = params.ctx.field.one
            for t in range(k):
                fwd = fwd * b(idx[t], idx[(t + 1) % k])
            bwd = params.ctx.field.one
            for t in range(k):
                bwd = bwd * b(idx[(t + 1) % k], idx[t])
            assert fwd == (-1) ** k * bwd


def test_xi_values_and_regimes():
    ctx = QContext(Fraction(2), 2)
    params = SLnParams(ctx, [Fraction(1)])
    assert params.regime == GENERIC
    assert params.xi(1, 1, 0) == ctx.q
    assert params.xi(1, 2, 2) == Fraction(6, 11)

    inf = SLnParams(ctx, None)
    assert inf.regime == BETA_INFINITY
    p = WeightPoint(2, (1,))
    assert inf.xi(1, 2, p.p(1, 2)) == 0  # [0]/[1]
    assert inf.xi(2, 1, -1) == qnum(2, ctx)

    cm = SLnParams(ctx, [ctx.lam])
    assert cm.regime == CONSTANT_MULTIPARAM

    ctx3 = QContext(Fraction(2), 3)
    mixed = SLnParams(ctx3, [Fraction(0), Fraction(5)])
    assert mixed.regime == INTERMEDIATE


def test_alpha_constraint_and_twist():
    rng = random.Random(9)
    fam = PairFamily.geometric(
        3, {(1, 2): Fraction(2), (1, 3): Fraction(3, 2), (2, 3): Fraction(5)},
        {(1, 2): Fraction(2), (1, 3): Fraction(3), (2, 3): Fraction(1, 2)})
    for i in range(1, 4):
        for j in range(1, 4):
            for x in range(-6, 7):
                if i != j:
                    assert fam(i, j, x) * fam(j, i, -x) == 1
            assert fam(i, i, 3) == 1
    psi = PairFamily.constant(3, {(1, 2): Fraction(7), (1, 3): Fraction(1, 3),
                                  (2, 3): Fraction(2)})
    tw = fam.twisted(psi)
    for i in range(1, 4):
        for j in range(1, 4):
            if i == j:
                continue
            for x in range(-4, 5):
                assert tw(i, j, x) == fam(i, j, x) * psi(j, i, -x) ** 2
                assert tw(i, j, x) * tw(j, i, -x) == 1


def test_twist_can_cancel_constant_alpha():
    # psi chosen as c_ji^(1/2)-free trick: pick alpha = psi-squared twist of 1
    rng = random.Random(1)
    base = PairFamily.unit(3)
    psi = PairFamily.constant(3, {(1, 2): Fraction(2), (1, 3): Fraction(5),
                                  (2, 3): Fraction(1, 7)})
    fam = base.twisted(psi)
    # twisting back by the inverse family restores alpha = 1
    inv = PairFamily.constant(3, {(1, 2): Fraction(1, 2),
                                  (1, 3): Fraction(1, 5),
                                  (2, 3): Fraction(7)})
    back = fam.twisted(inv)
    for i in range(1, 4):
        for j in range(1, 4):
            if i != j:
                assert back(i, j, 4) == 1


def test_phi_is_discrete_antiderivative():
    fam = PairFamily.geometric(2, {(1, 2): Fraction(3)},
                               {(1, 2): Fraction(2)})
    for x in range(-5, 6):
        assert fam.phi(1, 2, x + 1) == fam(1, 2, x) * fam.phi(1, 2, x)
        assert fam.phi(2, 1, x + 1) == fam(2, 1, x) * fam.phi(2, 1, x)


def test_geometric_alpha_bad_ratio_rejected():
    with pytest.raises(DegenerateParameterError):
        PairFamily(2, "geometric",
                   {(1, 2): Fraction(2), (2, 1): Fraction(1, 2)},
                   {(1, 2): Fraction(2), (2, 1): Fraction(1, 2)})


def test_degenerate_chain_raises():
    ctx = QContext(Fraction(2), 3)
    # beta_2 chosen so prod(beta) - prod(beta - lam) = 0 for the (1,3) pair
    lam = ctx.lam
    b1 = Fraction(1)
    # b1*b2 = (b1-lam)(b2-lam) collapses to b1 + b2 = lam
    b2 = lam - b1
    with pytest.raises(DegenerateParameterError):
        derive_beta(ctx, [b1, b2])


def test_params_json_roundtrip():
    rng = random.Random(77)
    for alpha in ("unit", "standard", "constant", "geometric"):
        params = sample_params(3, rng, alpha=alpha)
        doc = params.to_json()
        back = SLnParams.from_json(doc)
        assert back.to_json() == doc
        assert back.regime == params.regime
    inf = SLnParams(QContext(Fraction(2), 2), None)
    assert SLnParams.from_json(inf.to_json()).beta_chain is None


def test_sample_point_is_pole_free():
    rng = random.Random(13)
    for _ in range(10):
        params = sample_params(3, rng)
        p = sample_point(params, rng, clearance=3)
        assert pole_free(params, p, 3)
