import random
from fractions import Fraction

import pytest

from hscalc.errors import (
    InvalidDerivation,
    NonConfluent,
    NonUnitDivision,
    ParseError,
)
from hscalc.rings import GF, QQ, ZZ, Algebra, BaseRing, Derivation


def test_base_ring_flags():
    assert QQ.is_field and QQ.characteristic == 0
    assert not ZZ.is_field and ZZ.characteristic == 0
    assert GF(5).is_field and GF(5).characteristic == 5
    z4 = BaseRing("Zmod", 4)
    assert not z4.is_field and z4.characteristic == 4


def test_base_ring_mod_arithmetic():
    f3 = GF(3)
    assert f3.add(2, 2) == 1
    assert f3.mul(2, 2) == 1
    assert f3.inv(2) == 2
    with pytest.raises(NonUnitDivision):
        BaseRing("Zmod", 4).inv(2)


def test_parse_and_print_round_trip():
    A = Algebra(QQ, ["x", "y"])
    for text in ["3*x^2*y - 1/2", "x + y", "-x^3", "0", "7"]:
        p = A.parse(text)
        assert A.parse(str(p)) == p


def test_rational_coefficients_stay_exact():
    A = Algebra(QQ, ["x"])
    p = A.parse("1/3*x")
    q = p + p + p
    assert q == A.var(0)
    assert p.coeff((1,)) == Fraction(1, 3)


def test_quotient_normal_form():
    A = Algebra(GF(2), ["x"], ["x^3"])
    x = A.var(0)
    assert (x ** 3).is_zero()
    assert (x ** 2) * x == A.zero
    assert A.dimension() == 3
    assert A.monomial_basis() == [(0,), (1,), (2,)]


def test_two_variable_quotient_basis():
    A = Algebra(GF(3), ["x", "y"], ["x^2", "y^2"])
    assert A.dimension() == 4
    assert A.parse("x^2 + y") == A.var(1)


def test_nonmonomial_relation_reduces():
    # x^2 = y makes every polynomial linear in x
    A = Algebra(QQ, ["x", "y"], ["x^2 - y"])
    assert A.parse("x^4") == A.parse("y^2")
    assert A.parse("x^3 + x") == A.parse("x*y + x")


def test_completion_degree_cap():
    with pytest.raises(NonConfluent):
        Algebra(GF(2), ["x", "y"], ["x^2*y + y", "x*y^2 + x"], cap=2)
    # the same presentation completes under the default cap
    A = Algebra(GF(2), ["x", "y"], ["x^2*y + y", "x*y^2 + x"])
    assert A.parse("x^2*y") == A.parse("y")


def test_partial_derivative_on_representatives():
    A = Algebra(QQ, ["x", "y"])
    p = A.parse("x^3*y + 2*x")
    assert p.partial(0) == A.parse("3*x^2*y + 2")
    assert p.partial(1) == A.parse("x^3")


def test_derivation_validates_relations():
    # char 2: delta(x^2) = 2*x*delta(x) = 0, so any image works
    A = Algebra(GF(2), ["x"], ["x^2"])
    Derivation(A, [A.one])
    # char 3: delta(x^2) = 2*x*delta(x), which forces x | delta(x)... not 1
    B = Algebra(GF(3), ["x"], ["x^2"])
    with pytest.raises(InvalidDerivation):
        Derivation(B, [B.one])
    Derivation(B, [B.var(0)])  # 2*x*x = 2*x^2 = 0 in the quotient


def test_derivation_is_linear_leibniz():
    rng = random.Random(11)
    A = Algebra(GF(3), ["x", "y"])
    d = Derivation(A, [A.parse("y"), A.parse("x^2")])
    for _ in range(25):
        p = _rand_poly(rng, A)
        q = _rand_poly(rng, A)
        assert d(p * q) == d(p) * q + p * d(q)
        assert d(p + q) == d(p) + d(q)


def _rand_poly(rng, A):
    p = A.zero
    for _ in range(rng.randint(0, 4)):
        e = tuple(rng.randint(0, 2) for _ in range(A.nvars))
        c = A.base.random_element(rng)
        p = p + A.poly({e: c})
    return p


def test_algebra_json_round_trip():
    for A in [
        Algebra(QQ, ["x"]),
        Algebra(GF(2), ["x"], ["x^2"]),
        Algebra(ZZ, []),
        Algebra(GF(7), ["u", "v"], ["u^3", "v^2"]),
    ]:
        assert Algebra.from_json(A.to_json()) == A


def test_base_ring_json_spec_keys():
    assert GF(2).to_json() == {"kind": "Fp", "p": 2}
    assert BaseRing.from_json({"kind": "Fp", "p": 2}) == GF(2)
    assert BaseRing.from_json({"kind": "Zn", "n": 4}) == BaseRing("Zmod", 4)
    with pytest.raises(ParseError):
        BaseRing.from_json({"kind": "Fp", "p": 4})
    with pytest.raises(ParseError):
        BaseRing.from_json({"kind": "Fp", "p": 2, "extra": 1})


def test_unknown_json_fields_rejected():
    A = Algebra(QQ, ["x"])
    obj = A.to_json()
    obj["note"] = "hi"
    with pytest.raises(ParseError):
        Algebra.from_json(obj)


def test_zero_variable_algebra():
    A = Algebra(ZZ, [])
    assert A.parse("5") == A.const(5)
    assert (A.const(2) * A.const(3)).constant_term() == 6
