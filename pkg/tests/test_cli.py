import json

import pytest

from hscalc.cli import main
from hscalc.coideal import Coideal
from hscalc.hsder import HSDerivation
from hscalc.rings import GF, Algebra

F2X = json.dumps({"base": {"kind": "Fp", "p": 2}, "vars": ["x"], "relations": []})
F2X2 = json.dumps({"base": {"kind": "Fp", "p": 2}, "vars": ["x"], "relations": ["x^2"]})
TM2 = {"kind": "tm", "p": 1, "m": 2}


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def _family_json(image="x + s1", m=2, relations=()):
    return json.dumps(
        {
            "algebra": {
                "base": {"kind": "Fp", "p": 2},
                "vars": ["x"],
                "relations": list(relations),
            },
            "shape": {"kind": "tm", "p": 1, "m": m},
            "phi": {"x": image},
        }
    )


def test_invert_geometric_series(capsys):
    series = json.dumps(
        {
            "shape": TM2,
            "coeffs": [
                {"alpha": [0], "value": "1"},
                {"alpha": [1], "value": "1"},
            ],
        }
    )
    got = run_json(capsys, "invert", "--ring", "Q", "--series", series)
    assert got["shape"] == TM2
    assert got["coeffs"] == [
        {"alpha": [0], "value": "1"},
        {"alpha": [1], "value": "-1"},
        {"alpha": [2], "value": "1"},
    ]


def test_invert_rejects_non_units(capsys):
    series = json.dumps(
        {"shape": TM2, "coeffs": [{"alpha": [1], "value": "1"}]}
    )
    code, out, err = run(capsys, "invert", "--ring", "Q", "--series", series)
    assert code == 1
    assert out == ""
    assert "error" in err


def test_series_invert_round_trips_through_the_cli(capsys):
    series = json.dumps(
        {
            "shape": TM2,
            "coeffs": [
                {"alpha": [0], "value": "1"},
                {"alpha": [1], "value": "x + 1"},
                {"alpha": [2], "value": "x^2"},
            ],
        }
    )
    inv = run_json(capsys, "invert", "--ring", F2X, "--series", series)
    back = run_json(capsys, "invert", "--ring", F2X, "--series", json.dumps(inv))
    assert back == json.loads(series)


def test_compose_frozen_example(capsys):
    got = run_json(
        capsys,
        "compose",
        "--left",
        _family_json("x + s1"),
        "--right",
        _family_json("x + x*s1"),
    )
    assert got["phi"] == {"x": "x + (x + 1)*s1 + s1^2"}
    swapped = run_json(
        capsys,
        "compose",
        "--right",
        _family_json("x + s1"),
        "--left",
        _family_json("x + x*s1"),
    )
    assert swapped["phi"] == {"x": "x + (x + 1)*s1"}


def test_invert_derivation_then_compose_gives_identity(capsys):
    fam = _family_json("x + s1 + x*s1^2")
    inv = run_json(capsys, "invert", "--derivation", fam)
    got = run_json(capsys, "compose", "--left", fam, "--right", json.dumps(inv))
    assert got["phi"] == {"x": "x"}


def test_act_and_phid_satisfy_the_twist_identity(capsys):
    fam = _family_json("x + s1 + s1^2")
    phi = json.dumps(
        {
            "source": {"p": 1, "shape": TM2},
            "target": {"p": 1, "shape": TM2},
            "images": ["x*t1"],
        }
    )
    moved = run_json(capsys, "act", "--derivation", fam, "--subst", phi)
    twisted = run_json(capsys, "phiD", "--derivation", fam, "--subst", phi)
    assert twisted["source"] == {"p": 1, "shape": TM2}
    # transported family composed with the twist reproduces phi . original:
    # checked here through JSON only, using library objects to recombine
    D = HSDerivation.from_json(json.loads(fam))
    from hscalc.subst import SubstMap

    chi = SubstMap.from_json(twisted, D.alg)
    DM = HSDerivation.from_json(moved)
    for r in (D.images[0], D.transform(D.alg.parse("x^2"))):
        assert DM.tilde_apply(chi.apply(r)) == SubstMap.from_json(
            json.loads(phi), D.alg
        ).apply(D.tilde_apply(r))


def test_integrate_obstruction_exits_zero(capsys):
    code, out, err = run(
        capsys,
        "integrate",
        "--ring",
        F2X2,
        "--derivation",
        '{"x": "1"}',
        "--to",
        "2",
    )
    assert code == 0
    got = json.loads(out)
    assert got["status"] == "NotIntegrable"
    assert got["stage"] == 2
    cert = got["certificate"]
    assert set(cert) == {"stage", "unknowns", "equations", "combination", "residual"}
    assert cert["residual"] != "0"


def test_integrate_success_returns_the_family(capsys):
    got = run_json(
        capsys, "integrate", "--ring", "Q", "--derivation", "{}", "--to", "3"
    )
    # zero-variable ring: only the empty derivation, trivially integrable
    assert got["status"] == "Integrable"
    assert got["derivation"]["phi"] == {}


def test_integrate_budget_is_inconclusive(capsys):
    got = run_json(
        capsys,
        "integrate",
        "--ring",
        F2X2,
        "--derivation",
        '{"x": "x"}',
        "--to",
        "2",
        "--node-budget",
        "0",
    )
    assert got["status"] == "Inconclusive"


def test_order_of_a_family(capsys):
    got = run_json(capsys, "order", "--derivation", _family_json("x + x*s1^2"))
    assert got["deviation"] == 2
    layers = {tuple(l["alpha"]): l for l in got["layers"]}
    assert layers[(0,)]["order"] == 0
    assert layers[(2,)]["bound"] == 1
    assert layers[(1,)]["order"] is None  # zero layer


def test_order_of_subst_and_series_need_a_ring(capsys):
    phi = json.dumps(
        {
            "source": {"p": 1, "shape": TM2},
            "target": {"p": 1, "shape": TM2},
            "images": ["t1^2"],
        }
    )
    got = run_json(capsys, "order", "--subst", phi, "--ring", "Q")
    assert got == {"order": 2}
    code, _, err = run(capsys, "order", "--subst", phi)
    assert code == 2
    code, _, err = run(capsys, "order")
    assert code == 2


def test_symbol_of_an_operator(capsys):
    got = run_json(capsys, "symbol", "--ring", F2X, "--op", "x*d[2] + d[1]")
    assert got == {"order": 2, "symbol": "x*d[2]"}
    zero = run_json(capsys, "symbol", "--ring", F2X, "--op", "0")
    assert zero == {"order": None, "symbol": "0"}


def test_symbol_of_a_family_layer(capsys):
    got = run_json(
        capsys,
        "symbol",
        "--ring",
        F2X,
        "--derivation",
        _family_json("x + s1"),
        "--alpha",
        "[2]",
    )
    assert got == {"order": 2, "symbol": "d[2]"}
    code, _, err = run(
        capsys, "symbol", "--ring", F2X, "--derivation", _family_json()
    )
    assert code == 2  # --alpha required with --derivation


def test_gamma_table_rank_one(capsys):
    got = run_json(
        capsys, "gamma-table", "--rank", "1", "--base", "Z", "--max-degree", "3"
    )
    assert got["rank"] == 1
    entries = {(tuple(e["left"]), tuple(e["right"])): e for e in got["entries"]}
    assert len(entries) == 10
    assert entries[((1,), (2,))]["coefficient"] == 3
    assert entries[((1,), (2,))]["product"] == [3]


def test_check_suite_runs_and_is_deterministic(capsys):
    args = ("check", "--suite", "group-laws", "--cases", "5", "--seed", "7")
    code1, out1, _ = run(capsys, *args)
    code2, out2, _ = run(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2
    got = json.loads(out1)
    assert got["suite"] == "group-laws"
    assert got["ok"] is True
    assert got["cases"] == 5
    assert all(v["failed"] == 0 for v in got["checks"].values())


def test_check_rejects_unknown_suite(capsys):
    code, _, err = run(capsys, "check", "--suite", "no-such-suite")
    assert code == 2


def test_eval_operator_and_layer(capsys):
    got = run_json(
        capsys, "eval", "--ring", F2X, "--op", "d[2]", "--poly", "x^3 + x^2"
    )
    assert got == {"value": "x + 1"}
    got = run_json(
        capsys,
        "eval",
        "--derivation",
        _family_json("x + s1"),
        "--alpha",
        "1",
        "--poly",
        "x^2",
    )
    assert got == {"value": "0"}  # 2x = 0 mod 2
    code, _, _ = run(capsys, "eval", "--op", "d[1]", "--poly", "x")
    assert code == 2  # --op without --ring


def test_ring_argument_from_file(tmp_path, capsys):
    ring_file = tmp_path / "ring.json"
    ring_file.write_text(F2X)
    got = run_json(
        capsys, "eval", "--ring", str(ring_file), "--op", "d[1]", "--poly", "x^2"
    )
    assert got == {"value": "0"}
    code, _, err = run(
        capsys, "eval", "--ring", str(tmp_path / "absent.json"), "--op", "d[1]", "--poly", "x"
    )
    assert code == 2


def test_pretty_output_mode(capsys):
    code, out, _ = run(
        capsys,
        "order",
        "--derivation",
        _family_json("x + s1"),
        "--output",
        "pretty",
    )
    assert code == 0
    assert "deviation 1" in out
    with pytest.raises(json.JSONDecodeError):
        json.loads(out)


def test_version_and_missing_command(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0
    assert out.startswith("hs ")
    code, _, _ = run(capsys)
    assert code == 2


def test_degree_cap_guards_completion(capsys, monkeypatch):
    ring = json.dumps(
        {
            "base": {"kind": "Fp", "p": 2},
            "vars": ["x", "y"],
            "relations": ["x^2*y + y", "x*y^2 + x"],
        }
    )
    monkeypatch.setenv("HS_DEGREE_CAP", "2")
    code, _, err = run(capsys, "eval", "--ring", ring, "--op", "1", "--poly", "x")
    assert code == 1
    assert "cap" in err
    monkeypatch.delenv("HS_DEGREE_CAP")
    got = run_json(capsys, "eval", "--ring", ring, "--op", "1", "--poly", "x")
    assert got == {"value": "x"}


def test_malformed_json_is_a_parse_error(capsys):
    code, _, err = run(capsys, "compose", "--left", "{not json", "--right", "{}")
    assert code == 2
    assert "error" in err


def test_family_json_round_trip_matches_library(capsys):
    A = Algebra(GF(2), ["x"], ["x^3"])
    D = HSDerivation(A, Coideal.nbeta((2,)), ["x + x^2*s1"])
    out = run_json(capsys, "invert", "--derivation", json.dumps(D.to_json()))
    assert HSDerivation.from_json(out) == D.invert()
