import random

import pytest

from hscalc.coideal import Coideal
from hscalc.errors import NotAUnit, ParseError, ShapeMismatch
from hscalc.rings import GF, QQ, Algebra
from hscalc.sampling import random_unit_series
from hscalc.tseries import (
    PolySpace,
    TruncSeries,
    format_series,
    parse_series,
    series_from_json,
    series_to_json,
)


def _qx():
    return Algebra(QQ, ["x"])


def test_parse_drops_exponents_outside_shape():
    A = _qx()
    s = parse_series("1 + s1 + s1^5", A, Coideal.tm(1, 2))
    assert s.coeff((1,)) == A.one
    assert s.coeff((2,)) == A.zero
    assert (5,) not in s.coeffs


def test_cauchy_product_truncates():
    A = _qx()
    sh = Coideal.tm(1, 2)
    s = parse_series("1 + s1", A, sh)
    assert s * s == parse_series("1 + 2*s1 + s1^2", A, sh)
    t = parse_series("s1^2", A, sh)
    assert (s * t).coeff((2,)) == A.one  # s1^3 and s1^4 fall away


def test_geometric_inverse():
    A = _qx()
    s = parse_series("1 + s1", A, Coideal.tm(1, 2))
    assert s.invert() == parse_series("1 - s1 + s1^2", A, Coideal.tm(1, 2))


def test_two_variable_inverse_frozen_values():
    # coefficients computed independently with a symbolic solver
    A = _qx()
    sh = Coideal.tm(2, 2)
    s = parse_series("1 + x*s1 + (x + 1)*s2 + s1*s2", A, sh)
    inv = s.invert()
    assert inv.coeff((0, 0)) == A.one
    assert inv.coeff((1, 0)) == A.parse("-x")
    assert inv.coeff((0, 1)) == A.parse("-x - 1")
    assert inv.coeff((2, 0)) == A.parse("x^2")
    assert inv.coeff((1, 1)) == A.parse("2*x^2 + 2*x - 1")
    assert inv.coeff((0, 2)) == A.parse("x^2 + 2*x + 1")
    assert s * inv == TruncSeries.one(PolySpace(A), sh)


def test_inverse_is_two_sided_at_random():
    rng = random.Random(3)
    for ring in [_qx(), Algebra(GF(2), ["x"]), Algebra(GF(3), ["x", "y"], ["x^2", "y^2"])]:
        one = TruncSeries.one(PolySpace(ring), Coideal.tm(2, 2))
        for _ in range(20):
            s = random_unit_series(rng, ring, Coideal.tm(2, 2))
            assert s * s.invert() == one
            assert s.invert() * s == one


def test_invert_requires_unit_constant():
    A = _qx()
    s = parse_series("s1", A, Coideal.tm(1, 2))
    with pytest.raises(NotAUnit):
        s.invert()


def test_truncate_to_subshape():
    A = _qx()
    s = parse_series("1 + s1 + s1^2", A, Coideal.tm(1, 2))
    t = s.truncate(Coideal.tm(1, 1))
    assert t.coeff((1,)) == A.one and (2,) not in t.coeffs
    with pytest.raises(ShapeMismatch):
        s.truncate(Coideal.tm(1, 3))


def test_external_product_concatenates_indices():
    A = _qx()
    s = parse_series("1 + x*s1", A, Coideal.tm(1, 1))
    t = parse_series("1 + s1^2", A, Coideal.tm(1, 2))
    e = s.external(t)
    assert e.shape.nvars == 2
    assert e.coeff((1, 2)) == A.var(0)
    assert e.coeff((1, 0)) == A.var(0)


def test_order_and_format():
    A = _qx()
    s = parse_series("x*s1 + s1^2", A, Coideal.tm(1, 2))
    assert s.order() == 1
    assert parse_series(format_series(s), A, s.shape) == s


def test_scale_left_vs_right_commutative_coeffs():
    A = _qx()
    s = parse_series("1 + x*s1", A, Coideal.tm(1, 1))
    assert s.scale_left(A.var(0)) == s.scale_right(A.var(0))


def test_json_round_trip_and_validation():
    A = _qx()
    s = parse_series("1 + s1 + x*s1^2", A, Coideal.tm(1, 2))
    j = series_to_json(s)
    assert series_from_json(j, A) == s
    j2 = series_to_json(s)
    j2["coeffs"].append({"alpha": [1], "value": "1"})
    with pytest.raises(ParseError):
        series_from_json(j2, A)  # duplicate exponent
    with pytest.raises(ParseError):
        series_from_json({"shape": s.shape.to_json(), "coeffs": [], "x": 1}, A)
    with pytest.raises(ParseError):
        series_from_json(
            {"shape": s.shape.to_json(), "coeffs": [{"alpha": [9], "value": "1"}]}, A
        )


def test_pow_matches_repeated_product():
    A = Algebra(GF(3), ["x"])
    s = parse_series("1 + x*s1 + s1^2", A, Coideal.tm(1, 3))
    assert s ** 3 == s * s * s
    assert s ** 0 == TruncSeries.one(PolySpace(A), s.shape)
