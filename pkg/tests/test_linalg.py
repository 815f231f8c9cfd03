import random
from fractions import Fraction

import pytest

from hscalc.linalg import nullspace, solve_affine
from hscalc.rings import GF, QQ, ZZ

# fixed 3x4 system with a rank-2 matrix, solutions computed offline
A_ROWS = [[2, 4, -2, 6], [1, 2, 0, 1], [3, 6, -2, 7]]
B_GOOD = [10, 3, 13]
B_BAD = [10, 3, 14]


def _matvec(rows, v):
    return [sum(r * x for r, x in zip(row, v)) for row in rows]


def test_consistent_system_frozen_solution():
    sol = solve_affine(QQ, A_ROWS, B_GOOD)
    assert sol
    assert sol.particular == [Fraction(3), Fraction(0), Fraction(-2), Fraction(0)]
    assert _matvec(A_ROWS, sol.particular) == B_GOOD
    assert len(sol.kernel) == 2
    for k in sol.kernel:
        assert _matvec(A_ROWS, k) == [0, 0, 0]


def test_kernel_spans_the_frozen_basis():
    """The two directions found offline lie in the span of the computed kernel."""
    sol = solve_affine(QQ, A_ROWS, B_GOOD)
    for target in ([-2, 1, 0, 0], [-1, 0, 2, 1]):
        combo = solve_affine(
            QQ,
            [[k[i] for k in sol.kernel] for i in range(4)],
            target,
        )
        assert combo


def test_inconsistent_system_carries_a_certificate():
    sol = solve_affine(QQ, A_ROWS, B_BAD)
    assert not sol
    assert sol.particular is None
    lam = sol.certificate
    # lam . A = 0 while lam . b != 0: checked here, not trusted
    for col in range(4):
        assert sum(l * row[col] for l, row in zip(lam, A_ROWS)) == 0
    assert sum(l * b for l, b in zip(lam, B_BAD)) == sol.residual != 0
    # the offline computation found the combination (-1, -1, 1)
    scale = lam[2]
    assert [x / scale for x in lam] == [-1, -1, 1]


def test_solving_needs_a_field():
    with pytest.raises(ValueError):
        solve_affine(ZZ, [[2]], [1])


def test_mod_two_arithmetic_changes_the_answer():
    # x + y = 1, x - y = 1 collapses mod 2
    rows = [[1, 1], [1, -1]]
    sol_q = solve_affine(QQ, rows, [1, 1])
    assert sol_q.particular == [1, 0] and sol_q.kernel == []
    sol_2 = solve_affine(GF(2), rows, [1, 1])
    assert sol_2
    assert len(sol_2.kernel) == 1


def test_nullspace_dimension():
    assert nullspace(QQ, A_ROWS, 4) == solve_affine(QQ, A_ROWS, [0, 0, 0]).kernel
    assert nullspace(GF(3), [[1, 2], [2, 4]], 2) != []
    assert nullspace(QQ, [[1, 0], [0, 1]], 2) == []


def test_random_systems_verify_both_ways():
    rng = random.Random(83)
    for base in (QQ, GF(2), GF(5)):
        for _ in range(20):
            m, n = rng.randrange(1, 5), rng.randrange(1, 5)
            rows = [[base.from_int(rng.randrange(-4, 5)) for _ in range(n)] for _ in range(m)]
            rhs = [base.from_int(rng.randrange(-4, 5)) for _ in range(m)]
            sol = solve_affine(base, rows, rhs)
            if sol:
                got = _matvec(rows, sol.particular)
                assert [base.normalize(g) for g in got] == rhs
                for k in sol.kernel:
                    assert all(base.normalize(v) == 0 for v in _matvec(rows, k))
            else:
                lam = sol.certificate
                for col in range(n):
                    s = sum(l * row[col] for l, row in zip(lam, rows))
                    assert base.normalize(s) == 0
                r = sum(l * b for l, b in zip(lam, rhs))
                assert base.normalize(r) != 0
