import random

import pytest

from hscalc.coideal import Coideal, sort_key


def test_tm_membership_and_size():
    d = Coideal.tm(2, 2)
    assert (0, 0) in d
    assert (1, 1) in d
    assert (2, 1) not in d
    assert len(d) == 6
    assert d.height() == 2


def test_nbeta_box():
    d = Coideal.nbeta((1, 2))
    assert len(d) == 6
    assert (1, 2) in d and (2, 0) not in d
    assert d.height() == 3


def test_zero_index_required():
    with pytest.raises(ValueError):
        Coideal(1, [(1,)])


def test_downward_closure_enforced():
    with pytest.raises(ValueError):
        Coideal(2, [(0, 0), (1, 1)])


def test_product_concatenates_first_factor_first():
    a = Coideal.nbeta((2,))
    b = Coideal.tm(1, 1)
    p = a.product(b)
    assert p.nvars == 2
    assert (2, 1) in p and (1, 1) in p
    assert (0, 2) not in p


def test_canonical_order_is_degree_then_lex():
    d = Coideal.tm(2, 2)
    assert list(d) == sorted(d.elements, key=sort_key)
    assert list(d)[0] == (0, 0)
    # degree ties break lexicographically
    assert sort_key((0, 2)) < sort_key((1, 1))
    assert list(Coideal.tm(2, 1)) == [(0, 0), (0, 1), (1, 0)]


def test_complement_generators_tm():
    d = Coideal.tm(1, 3)
    assert d.complement_min_gens() == [(4,)]


def test_complement_generators_box():
    d = Coideal.nbeta((1, 2))
    assert d.complement_min_gens() == [(2, 0), (0, 3)]


def test_splits_cover_all_decompositions():
    d = Coideal.tm(2, 2)
    s = d.splits((1, 1))
    assert set(s) == {((0, 0), (1, 1)), ((0, 1), (1, 0)), ((1, 0), (0, 1)), ((1, 1), (0, 0))}


def test_below_filters_componentwise():
    d = Coideal.tm(2, 3)
    assert d.below((1, 1)) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_intersection_and_subset():
    a = Coideal.tm(2, 2)
    b = Coideal.nbeta((2, 1))
    c = a.intersection(b)
    assert c.is_subset(a) and c.is_subset(b)
    assert (2, 0) in c and (2, 1) not in c


def test_random_downward_closed_remains_closed_under_intersection():
    rng = random.Random(5)
    for _ in range(40):
        n = rng.randint(1, 3)
        elems = {(0,) * n}
        for _ in range(rng.randint(0, 12)):
            a = rng.choice(sorted(elems))
            i = rng.randrange(n)
            b = a[:i] + (a[i] + 1,) + a[i + 1 :]
            elems.add(b)
            # close downward
            stack = [b]
            while stack:
                t = stack.pop()
                for j in range(n):
                    if t[j] > 0:
                        u = t[:j] + (t[j] - 1,) + t[j + 1 :]
                        if u not in elems:
                            elems.add(u)
                            stack.append(u)
        d = Coideal(n, elems)
        e = d.intersection(Coideal.tm(n, 2))
        assert all(sum(a) <= 2 for a in e.elements)


def test_json_round_trip():
    for d in [Coideal.tm(2, 3), Coideal.nbeta((1, 2)), Coideal(1, [(0,), (1,)])]:
        assert Coideal.from_json(d.to_json()) == d
