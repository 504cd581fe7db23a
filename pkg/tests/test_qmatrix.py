"""The word calculus: derivation replays, the membership oracle, scripts."""

import json
import random
from fractions import Fraction

import pytest

from qdyb.scalars import PrimeField, QContext
from qdyb.weights import sample_params, sample_point
from qdyb.qmatrix import (
    MoveError, ReplayEngine, ShiftFunc, SpacedTensor, builtin_derivations,
    derivation_from_json, derivation_to_json, membership_oracle,
    oracle_confirm, _eps_bra, _eps_bra_dyn, _eps_ket, _gen_word, _rho,
    _rho_dyn, _slot, _sym,
)

ALL = ["D1", "D1k", "D2", "D3", "D4", "D4r", "D5", "D5a", "D6c", "D6", "D6r"]


def engine(n, rng, field=None, alpha="constant", npoints=3):
    r = Fraction(3, 2)
    if field is None:
        ctx = QContext(r**n, n, root=r)
    else:
        ctx = QContext(field.of(r**n), n, root=field.of(r), field=field)
    params = sample_params(n, rng, ctx=ctx, alpha=alpha)
    pts = [sample_point(params, rng, clearance=6) for _ in range(npoints)]
    return ReplayEngine(params, pts)


def test_spaced_tensor_compose():
    one = Fraction(1)
    A = SpacedTensor((1,), (2,), {((i,), (i,)): one for i in (1, 2)})
    B = SpacedTensor((2,), (3,), {((i,), (i,)): Fraction(i) for i in (1, 2)})
    C = A.compose(B)
    assert C.kets == (1,) and C.bras == (3,)
    assert C.data[((2,), (2,))] == 2
    with pytest.raises(MoveError):
        A.compose(A)  # ket collision at space 1


def test_shift_func():
    sf = ShiftFunc(Fraction(3), {("f", 1, 2, 0): 1, ("qp", 1, 2, 1): -2})
    sh = sf.shifted(1, -1)  # p_12 -> p_12 - 1
    assert sh.atoms == {("f", 1, 2, -1): 1, ("qp", 1, 2, 0): -2}
    back = ShiftFunc.from_json(sf.to_json())
    assert back.atoms == sf.atoms and back.coef == sf.coef


def test_all_derivations_rational():
    rng = random.Random(41)
    for n in (2, 3):
        eng = engine(n, rng)
        ds = builtin_derivations(n)
        for name in ALL:
            recs = eng.run(ds[name])
            assert all(ok for _, ok, _ in recs), (n, name, recs)


def test_derivations_prime_field_n3():
    rng = random.Random(42)
    eng = engine(3, rng, field=PrimeField())
    ds = builtin_derivations(3)
    for name in ALL:
        recs = eng.run(ds[name])
        assert all(ok for _, ok, _ in recs), (name, recs)


def test_oracle_confirms_all_endpoints_n2():
    rng = random.Random(43)
    eng = engine(2, rng, npoints=2)
    ds = builtin_derivations(2)
    for name in ALL:
        assert oracle_confirm(eng, ds[name]) == "equal", name


def test_oracle_basic_instances():
    rng = random.Random(44)
    eng = engine(2, rng, npoints=2)
    g = _gen_word(1)
    A = eng.expr([_rho_dyn(g, (1, 2)), _slot(1), _slot(2)])
    B = eng.expr([_slot(1), _slot(2), _rho(g, (1, 2))])
    assert membership_oracle(eng, A, B) == "equal"
    C = eng.expr([_slot(1), _slot(2)])
    assert membership_oracle(eng, C, C) == "equal"
    # a wrong scale must be rejected
    X = eng.expr([_eps_bra_dyn((1, 2)), _slot(1), _slot(2)])
    Y = eng.expr([_sym("q", 1), _sym("qfact_inv", 2), _eps_bra_dyn((1, 2)),
                  _slot(1), _slot(2), _eps_ket((1, 2)), _eps_bra((1, 2))])
    assert membership_oracle(eng, X, Y) == "unequal"
    # size guard
    big = eng.expr([_slot(s) for s in range(1, 12)])
    assert membership_oracle(eng, big, big, max_dim=100) == "inconclusive"


def test_script_roundtrip_and_replay():
    rng = random.Random(45)
    eng = engine(2, rng, npoints=2)
    d = builtin_derivations(2)["D3"]
    text = derivation_to_json(d)
    back = derivation_from_json(text)
    assert back == json.loads(text)
    recs = eng.run(back)
    assert all(ok for _, ok, _ in recs)


def test_empty_script_trivially_passes():
    rng = random.Random(46)
    eng = engine(2, rng, npoints=2)
    d = {"name": "empty", "start": [_slot(1)], "moves": [],
         "end": [_slot(1)], "end_moves": []}
    recs = eng.run(d)
    assert recs == [("empty", True, None)]


def test_inapplicable_move_names_step():
    rng = random.Random(47)
    eng = engine(2, rng, npoints=2)
    d = {"name": "bad", "start": [_slot(1), _slot(2)],
         "moves": [{"move": "swap", "at": 0}],
         "end": [_slot(2), _slot(1)], "end_moves": []}
    recs = eng.run(d)
    assert len(recs) == 1 and recs[0][1] is False
    assert "move[0]" in recs[0][0]


def test_non_unimodular_dressing_rejected():
    """Dropping one slot from the weight-commute window (a stand-in for
    a non-unimodular shift matrix) must break the refactor step."""
    from qdyb.qmatrix import derivation_d2
    rng = random.Random(48)
    eng = engine(2, rng, npoints=2)
    d = derivation_d2(2)
    # corrupt: the dressed function is compared against the undressed one
    # after crossing only one of the two slots
    bad = dict(d)
    bad["name"] = "corrupted-weight-commute"
    bad["moves"] = d["moves"][:-2] + [d["moves"][-2]]
    # drop one scalar_shift: the refactor payload no longer matches
    bad["moves"] = [m for m in d["moves"]][:3] + d["moves"][4:]
    recs = eng.run(bad)
    assert any(ok is False for _, ok, _ in recs)


def test_central_u_needs_geometric_closed_form():
    """With geometric alpha the antiderivative is c^p w^(p(p-1)/2)."""
    rng = random.Random(49)
    eng = engine(2, rng, alpha="geometric", npoints=2)
    ds = builtin_derivations(2)
    for name in ("D5", "D5a"):
        recs = eng.run(ds[name])
        assert all(ok for _, ok, _ in recs), (name, recs)


def test_derivations_with_geometric_alpha():
    rng = random.Random(50)
    eng = engine(2, rng, alpha="geometric", npoints=2)
    ds = builtin_derivations(2)
    for name in ("D1", "D3", "D4", "D6", "D6r"):
        recs = eng.run(ds[name])
        assert all(ok for _, ok, _ in recs), (name, recs)


def test_derivations_many_draws_n2():
    """Five generic draws, five pole-free points each."""
    rng = random.Random(61)
    r = Fraction(3, 2)
    ctx = QContext(r**2, 2, root=r)
    for d in range(5):
        params = sample_params(2, rng, ctx=ctx,
                               alpha=("constant", "unit", "geometric")[d % 3])
        pts = [sample_point(params, rng, clearance=6) for _ in range(5)]
        eng = ReplayEngine(params, pts)
        for name, deriv in sorted(builtin_derivations(2).items()):
            recs = eng.run(deriv)
            assert all(ok for _, ok, _ in recs), (d, name, recs)


def test_det_commutes_with_assorted_functions():
    rng = random.Random(62)
    eng = engine(2, rng, npoints=2)
    from qdyb.qmatrix import derivation_d2
    families = [
        ShiftFunc(Fraction(1), {("qp", 1, 2, 0): 1}),
        ShiftFunc(Fraction(1), {("f", 1, 2, 0): 1}),
        ShiftFunc(Fraction(5, 3), {("f", 1, 2, 2): -1, ("qp", 1, 2, -1): 3,
                                   ("qnum", 1, 2, 1): 1}),
    ]
    for h in families:
        recs = eng.run(derivation_d2(2, hfunc=h))
        assert all(ok for _, ok, _ in recs), recs
