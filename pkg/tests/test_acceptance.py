"""Acceptance gate: one test per advertised guarantee, full sample sizes.

Each test runs a named suite at its contract size with the default seed and
prints a single PASS/FAIL line; `pytest -v tests/test_acceptance.py` shows
exactly one verdict per criterion.  The expected per-axiom labels are pinned
so a suite cannot silently drop one of its checks and stay green.
"""

import pytest

from hscalc.suites import run_suite

CRITERIA = [
    (
        1,
        "group-laws",
        200,
        {"associative", "two-sided-inverse", "truncation-homomorphism"},
        "composition group laws over Q[x], F2[x], F3[x,y], F2[x]/(x^3)",
    ),
    (
        2,
        "subst-action",
        100,
        {"transport-composes", "product-transport", "twist-chain", "inverse-transport"},
        "substitution transport identities, all four",
    ),
    (
        3,
        "symbol",
        100,
        {"multiplicative", "substitution-symbol"},
        "graded symbols multiply and move through substitutions",
    ),
    (
        4,
        "order-bounds",
        100,
        {"order-ceiling", "commutator-drop"},
        "layer order ceilings and the commutator drop on free rings",
    ),
    (
        5,
        "integrability",
        10,
        {
            "obstruction-certificate",
            "char2-translation",
            "factorial-stages",
            "revalidates",
            "scaling-closure",
            "filtration-monotone",
        },
        "integrability searches: verified obstruction, shift family, factorial stages",
    ),
    (
        6,
        "divided-powers",
        50,
        {"integer-table", "exponential-law", "exponential-integral-independence"},
        "integer divided-power table and the exponential membership laws",
    ),
    (
        7,
        "gamma-coverage",
        2,
        {"graded-coverage", "table-transport"},
        "divided powers cover the graded operators, degree 9, two characteristics",
    ),
    (
        8,
        "env-relations",
        200,
        {
            "relation-R0",
            "relation-Ri",
            "relation-Rii",
            "relation-Riii",
            "relation-Riv",
            "relation-Rv",
            "audit-locality",
            "audit-zero-layer",
            "audit-order",
            "floor-inequality",
        },
        "enveloping relations, degree audits, exhaustive floor inequality",
    ),
    (
        9,
        "module-structures",
        100,
        {
            "one-forms-axioms",
            "fields-axioms",
            "one-forms-equivariance",
            "fields-equivariance",
            "classical-one-forms",
            "classical-fields",
            "composite-tensor",
            "composite-hom",
            "composite-tensor-trivial",
            "composite-hom-trivial",
        },
        "module structures: axioms, equivariance, classical degree-1 actions, composites",
    ),
    (
        10,
        "deviation-growth",
        100,
        {"commutator-deviation", "transport-deviation"},
        "deviation order grows under commutators and transport",
    ),
]


@pytest.mark.parametrize(
    "num,suite,cases,labels,desc",
    CRITERIA,
    ids=[f"{n:02d}-{s}" for n, s, _, _, _ in CRITERIA],
)
def test_criterion(num, suite, cases, labels, desc):
    res = run_suite(suite, cases=cases)
    verdict = "PASS" if res.ok else "FAIL"
    print(f"criterion {num:2d} {verdict}: {desc} [{suite}, {cases} cases, seed {res.seed}]")
    assert set(res.checks) == labels, (
        f"suite {suite} ran axioms {sorted(res.checks)}, contract pins {sorted(labels)}"
    )
    assert res.cases == cases
    assert res.ok, res.summary()
