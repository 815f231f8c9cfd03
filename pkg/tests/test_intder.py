import math
from fractions import Fraction

import pytest

from hscalc.coideal import Coideal
from hscalc.errors import HsError, InvalidDerivation
from hscalc.hsder import HSDerivation, hasse_derivation
from hscalc.intder import (
    derivation_space,
    extend_step,
    ider_dimension,
    ider_filtration,
    integrate,
)
from hscalc.rings import GF, QQ, Algebra, Derivation


def test_rational_canonical_extension_of_x_squared():
    """delta(x) = x^2 extends with D_i(x) = x^(i+1), by direct induction."""
    A = Algebra(QQ, ["x"])
    res = integrate(Derivation(A, ["x^2"]), 6)
    assert res.is_integrable()
    D = res.derivation
    for i in range(7):
        assert D.images[0].coeff((i,)) == A.parse(f"x^{i + 1}")


def test_rational_extension_of_ordinary_derivative_is_taylor_shift():
    A = Algebra(QQ, ["x"])
    delta = Derivation(A, ["1"])
    res = integrate(delta, 6)
    assert res.is_integrable()
    assert res.derivation == hasse_derivation(A, Coideal.tm(1, 6))
    # and every layer is the iterated derivative with its factorial removed
    f = A.parse("x^5 + 3*x^2")
    for i in range(1, 7):
        it = f
        for _ in range(i):
            it = delta(it)
        assert res.derivation.coeff_apply((i,), f) == it * Fraction(1, math.factorial(i))


def test_free_algebra_extends_by_zero():
    A = Algebra(GF(2), ["x"])
    res = integrate(Derivation(A, ["1"]), 6)
    assert res.is_integrable()
    assert res.derivation == hasse_derivation(A, Coideal.tm(1, 6))
    assert any("free algebra" in line for line in res.log)


def test_obstruction_mod_two_with_verified_certificate():
    A = Algebra(GF(2), ["x"], ["x^2"])
    delta = Derivation(A, ["1"])
    assert integrate(delta, 1).is_integrable()
    res = integrate(delta, 2)
    assert res.status == "not_integrable"
    assert res.stage == 2
    cert = res.certificate
    assert cert is not None and cert.verify(GF(2))
    j = res.to_json(GF(2))
    assert j["status"] == "not_integrable"
    assert j["stage"] == 2
    assert "certificate" in j


def test_multiplicative_family_survives_nilpotents():
    A = Algebra(GF(2), ["x"], ["x^2"])
    res = integrate(Derivation(A, ["x"]), 3)
    assert res.is_integrable()
    D = res.derivation
    # revalidate from scratch, including the relation check
    HSDerivation(A, D.shape, D.images, check=True)
    assert D.images[0].coeff((1,)) == A.var(0)


def test_stage_system_exposes_the_failing_equations():
    A = Algebra(GF(2), ["x"], ["x^2"])
    D = HSDerivation(A, Coideal.tm(1, 1), ["x + s1"])
    step = extend_step(D, 2)
    assert not step.solutions
    cert = step.certificate()
    assert cert.stage == 2
    assert cert.verify(GF(2))
    assert len(cert.unknown_labels) == len(cert.rows[0])


def test_node_budget_gives_inconclusive():
    A = Algebra(GF(2), ["x"], ["x^2"])
    res = integrate(Derivation(A, ["x"]), 3, node_budget=0)
    assert res.status == "inconclusive"
    assert any("budget" in line for line in res.log)


def test_integrate_input_validation():
    A = Algebra(QQ, ["x"])
    with pytest.raises(TypeError):
        integrate("not a derivation", 2)
    with pytest.raises(ValueError):
        integrate(Derivation(A, ["1"]), 0)


def test_derivations_must_respect_relations():
    A = Algebra(GF(2), ["x"], ["x^3"])
    with pytest.raises(InvalidDerivation):
        Derivation(A, ["1"])  # delta(x^3) = 3x^2 = x^2 is not in (x^3)
    Derivation(A, ["x"])


def test_derivation_space_dimensions():
    basis, vecs = derivation_space(Algebra(GF(2), ["x"], ["x^2"]))
    assert len(vecs) == 2
    basis, vecs = derivation_space(Algebra(GF(2), ["x"], ["x^3"]))
    assert len(vecs) == 2
    basis, vecs = derivation_space(Algebra(GF(3), ["x"], ["x^3"]))
    assert len(vecs) == 3
    with pytest.raises(HsError):
        derivation_space(Algebra(GF(2), ["x"]))


def test_characteristic_zero_counts_all_derivations():
    A = Algebra(QQ, ["x"], ["x^3"])
    assert ider_dimension(A, 5) == 2


def test_filtration_values():
    """Three quotients whose integrable loci were worked out by hand.

    F2[x]/(x^2): only delta(x) = x survives degree 2 (delta(x) = 1 is
    obstructed, and the locus is a subspace, so 1 + x cannot appear alone).
    F2[x]/(x^3): both x and x^2 give multiplicative-style families, so
    nothing drops.  F3[x]/(x^3): at degree 3 the cube of delta(x) = a + ..
    reduces to the scalar a by Frobenius, forcing a = 0.
    """
    assert ider_filtration(Algebra(GF(2), ["x"], ["x^2"]), 3) == [2, 1, 1]
    assert ider_filtration(Algebra(GF(2), ["x"], ["x^3"]), 3) == [2, 2, 2]
    assert ider_filtration(Algebra(GF(3), ["x"], ["x^3"]), 3) == [3, 3, 2]
