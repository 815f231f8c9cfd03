import pytest

from hscalc.errors import HsError
from hscalc.rings import GF, Algebra
from hscalc.suites import DEFAULT_SEED, run_suite, suite_names


def test_registry_is_complete():
    assert len(suite_names()) == 10
    assert suite_names() == sorted(suite_names())


def test_unknown_suite_and_bad_cases():
    with pytest.raises(HsError):
        run_suite("nonexistent")
    with pytest.raises(HsError):
        run_suite("group-laws", cases=0)


def test_default_seed_is_applied():
    res = run_suite("symbol", cases=3)
    assert res.seed == DEFAULT_SEED
    res2 = run_suite("symbol", cases=3, seed=123)
    assert res2.seed == 123


def test_results_are_reproducible():
    a = run_suite("group-laws", cases=6, seed=5).to_json()
    b = run_suite("group-laws", cases=6, seed=5).to_json()
    assert a == b


def test_ring_override_narrows_the_pool():
    alg = Algebra(GF(2), ["x"])
    res = run_suite("order-bounds", cases=5, alg=alg)
    assert res.ok


def test_summary_mentions_every_axiom():
    res = run_suite("deviation-growth", cases=4)
    text = res.summary()
    for label in res.checks:
        assert label in text
