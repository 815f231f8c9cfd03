"""Terminal front end.

Objects travel as JSON: inline on the command line or in files.  Results
go to stdout as JSON with sorted keys (byte-identical for identical
arguments and seed); anything diagnostic goes to stderr.  Exit codes:
0 success (a non-integrable verdict is a successful computation), 1 domain
error, 2 parse or validation error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__
from .dpexp import DPAlgebra
from .dop import parse_operator
from .errors import HsError, ParseError
from .hsder import HSDerivation
from .intder import integrate
from .rings import GF, QQ, ZZ, Algebra, Derivation
from .subst import SubstMap
from .suites import run_suite, suite_names
from .tseries import format_series, series_from_json, series_to_json

STATUS_NAMES = {
    "integrable": "Integrable",
    "not_integrable": "NotIntegrable",
    "inconclusive": "Inconclusive",
}


# ---------------------------------------------------------------------------
# argument decoding
# ---------------------------------------------------------------------------


def _read_arg(val: str) -> str:
    """Inline JSON if it looks like an object, otherwise a file path."""
    if val.lstrip().startswith("{"):
        return val
    try:
        with open(val, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {val!r}: {exc}") from exc


def _json_arg(val: str):
    try:
        return json.loads(_read_arg(val))
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad JSON in argument: {exc}") from exc


def _ring_arg(val: str) -> Algebra:
    v = val.strip()
    if v == "Q":
        return Algebra(QQ, [])
    if v == "Z":
        return Algebra(ZZ, [])
    if v.startswith("F") and v[1:].isdigit():
        return Algebra(GF(int(v[1:])), [])
    return Algebra.from_json(_json_arg(val))


def _alpha_arg(val: str):
    try:
        a = json.loads(val)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad index {val!r}: {exc}") from exc
    if isinstance(a, int):
        a = [a]
    if not isinstance(a, list) or not all(isinstance(k, int) and k >= 0 for k in a):
        raise ParseError(f"an index must be a nonnegative integer vector, got {val!r}")
    return tuple(a)


def _derivation_arg(val: str) -> HSDerivation:
    return HSDerivation.from_json(_json_arg(val))


def _plain_derivation_arg(val: str, alg: Algebra) -> Derivation:
    obj = _json_arg(val)
    if not isinstance(obj, dict) or not all(isinstance(v, str) for v in obj.values()):
        raise ParseError("a derivation is given as {variable: polynomial string}")
    unknown = set(obj) - set(alg.varnames)
    if unknown:
        raise ParseError(f"unknown variables {sorted(unknown)} in derivation")
    return Derivation(alg, [alg.parse(obj.get(nm, "0")) for nm in alg.varnames])


def _finite(x):
    """Numbers for JSON: infinity becomes null."""
    return None if x == math.inf or x == -1 else x


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _emit(args, payload: dict, pretty: str | None = None) -> int:
    if args.output == "pretty" and pretty is not None:
        print(pretty)
    else:
        print(json.dumps(payload, sort_keys=True))
    return 0


def _hs_pretty(D: HSDerivation) -> str:
    return "\n".join(
        f"{nm} -> {format_series(im)}" for nm, im in zip(D.alg.varnames, D.images)
    )


def _subst_pretty(phi: SubstMap) -> str:
    return "\n".join(
        f"s{i + 1} -> {format_series(im, 't')}" for i, im in enumerate(phi.images)
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_compose(args) -> int:
    D = _derivation_arg(args.left)
    E = _derivation_arg(args.right)
    out = D.compose(E)
    return _emit(args, out.to_json(), _hs_pretty(out))


def _cmd_invert(args) -> int:
    if (args.series is None) == (args.derivation is None):
        raise ParseError("give exactly one of --series, --derivation")
    if args.series is not None:
        if args.ring is None:
            raise ParseError("--series needs --ring")
        alg = _ring_arg(args.ring)
        s = series_from_json(_json_arg(args.series), alg)
        inv = s.invert()
        return _emit(args, series_to_json(inv), format_series(inv))
    out = _derivation_arg(args.derivation).invert()
    return _emit(args, out.to_json(), _hs_pretty(out))


def _cmd_act(args) -> int:
    if (args.series is None) == (args.derivation is None):
        raise ParseError("give exactly one of --series, --derivation")
    if args.series is not None:
        if args.ring is None:
            raise ParseError("--series needs --ring")
        alg = _ring_arg(args.ring)
        phi = SubstMap.from_json(_json_arg(args.subst), alg)
        s = series_from_json(_json_arg(args.series), alg)
        out = phi.apply(s)
        return _emit(args, series_to_json(out), format_series(out, "t"))
    D = _derivation_arg(args.derivation)
    phi = SubstMap.from_json(_json_arg(args.subst), D.alg)
    out = D.subst_act(phi)
    return _emit(args, out.to_json(), _hs_pretty(out))


def _cmd_phid(args) -> int:
    D = _derivation_arg(args.derivation)
    phi = SubstMap.from_json(_json_arg(args.subst), D.alg)
    out = D.twist(phi)
    return _emit(args, out.to_json(), _subst_pretty(out))


def _cmd_integrate(args) -> int:
    alg = _ring_arg(args.ring)
    delta = _plain_derivation_arg(args.derivation, alg)
    res = integrate(delta, args.to, node_budget=args.node_budget)
    payload = res.to_json(alg.base)
    payload["status"] = STATUS_NAMES[res.status]
    lines = [f"status {payload['status']}" + (f", stage {res.stage}" if res.stage else "")]
    lines += [f"  {entry}" for entry in res.log]
    if res.is_integrable():
        lines.append(_hs_pretty(res.derivation))
    return _emit(args, payload, "\n".join(lines))


def _cmd_order(args) -> int:
    given = [x for x in (args.derivation, args.subst, args.series) if x is not None]
    if len(given) != 1:
        raise ParseError("give exactly one of --derivation, --subst, --series")
    if args.derivation is not None:
        D = _derivation_arg(args.derivation)
        layers = []
        for a in D.shape:
            op = D.coeff_op(a)
            layers.append(
                {
                    "alpha": list(a),
                    "order": _finite(op.order()),
                    "bound": D.order_bound_at(a),
                }
            )
        payload = {"deviation": _finite(D.deviation_order()), "layers": layers}
        lines = [f"deviation {payload['deviation']}"] + [
            f"  {tuple(l['alpha'])}: operator order {l['order']} (bound {l['bound']})"
            for l in layers
        ]
        return _emit(args, payload, "\n".join(lines))
    if args.ring is None:
        raise ParseError("--subst and --series need --ring")
    alg = _ring_arg(args.ring)
    if args.subst is not None:
        phi = SubstMap.from_json(_json_arg(args.subst), alg)
        v = _finite(phi.order())
    else:
        s = series_from_json(_json_arg(args.series), alg)
        v = _finite(s.order())
    return _emit(args, {"order": v}, f"order {v}")


def _cmd_symbol(args) -> int:
    alg = _ring_arg(args.ring)
    if (args.op is None) == (args.derivation is None):
        raise ParseError("give exactly one of --op, --derivation")
    if args.op is not None:
        op = parse_operator(args.op, alg)
    else:
        D = _derivation_arg(args.derivation)
        if D.alg != alg:
            raise ParseError("--ring disagrees with the derivation's algebra")
        if args.alpha is None:
            raise ParseError("--derivation needs --alpha to pick a layer")
        op = D.coeff_op(_alpha_arg(args.alpha))
    k = op.order()
    if k < 0:
        return _emit(args, {"order": None, "symbol": "0"}, "0")
    sym = op.symbol(k)
    return _emit(args, {"order": k, "symbol": str(sym)}, f"order {k}: {sym}")


def _cmd_gamma_table(args) -> int:
    alg = _ring_arg(args.base)
    dp = DPAlgebra(alg, args.rank, args.max_degree)
    entries = [
        {
            "left": list(b),
            "right": list(c),
            "coefficient": coeff,
            "product": list(t),
        }
        for b, c, coeff, t in dp.product_table()
    ]
    payload = {
        "rank": args.rank,
        "max_degree": args.max_degree,
        "base": alg.to_json(),
        "entries": entries,
    }
    lines = [
        f"gamma{list(e['left'])} * gamma{list(e['right'])} = "
        f"{e['coefficient']} * gamma{list(e['product'])}"
        for e in entries
    ]
    return _emit(args, payload, "\n".join(lines))


def _cmd_check(args) -> int:
    alg = _ring_arg(args.ring) if args.ring is not None else None
    res = run_suite(args.suite, cases=args.cases, seed=args.seed, alg=alg)
    code = _emit(args, res.to_json(), res.summary())
    if code == 0 and not res.ok:
        return 1
    return code


def _cmd_eval(args) -> int:
    if (args.op is None) == (args.derivation is None):
        raise ParseError("give exactly one of --op, --derivation")
    if args.op is not None:
        if args.ring is None:
            raise ParseError("--op needs --ring")
        alg = _ring_arg(args.ring)
        op = parse_operator(args.op, alg)
        val = op(alg.parse(args.poly))
    else:
        D = _derivation_arg(args.derivation)
        alg = D.alg
        if args.alpha is None:
            raise ParseError("--derivation needs --alpha to pick a layer")
        val = D.coeff_apply(_alpha_arg(args.alpha), alg.parse(args.poly))
    return _emit(args, {"value": str(val)}, str(val))


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hs",
        description="Exact calculus of truncated Hasse-Schmidt derivations.",
    )
    parser.add_argument("--version", action="version", version=f"hs {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument(
            "--output", choices=("json", "pretty"), default="json",
            help="output mode (default json)",
        )
        p.set_defaults(func=fn)
        return p

    p = add("compose", _cmd_compose, "group product of two derivation families")
    p.add_argument("--left", required=True, help="family JSON (inline or path)")
    p.add_argument("--right", required=True, help="family JSON (inline or path)")

    p = add("invert", _cmd_invert, "invert a unit series or a derivation family")
    p.add_argument("--series", help="series JSON (needs --ring)")
    p.add_argument("--ring", help="ring: Q, Z, F<p>, inline JSON, or path")
    p.add_argument("--derivation", help="family JSON")

    p = add("act", _cmd_act, "apply a substitution map to a series or family")
    p.add_argument("--subst", required=True, help="substitution map JSON")
    p.add_argument("--series", help="series JSON (needs --ring)")
    p.add_argument("--ring", help="ring for --series")
    p.add_argument("--derivation", help="family JSON")

    p = add("phiD", _cmd_phid, "twist a substitution map through a family")
    p.add_argument("--subst", required=True, help="substitution map JSON")
    p.add_argument("--derivation", required=True, help="family JSON")

    p = add("integrate", _cmd_integrate, "search for an integral of a derivation")
    p.add_argument("--ring", required=True, help="ring JSON or path")
    p.add_argument(
        "--derivation", required=True,
        help='degree-one data as {"var": "polynomial"}',
    )
    p.add_argument("--to", type=int, required=True, help="target truncation degree")
    p.add_argument("--node-budget", type=int, default=None, help="search node cap")

    p = add("order", _cmd_order, "orders and ceilings of an object")
    p.add_argument("--derivation", help="family JSON")
    p.add_argument("--subst", help="substitution map JSON (needs --ring)")
    p.add_argument("--series", help="series JSON (needs --ring)")
    p.add_argument("--ring", help="ring for --subst/--series")

    p = add("symbol", _cmd_symbol, "top graded part of an operator")
    p.add_argument("--ring", required=True, help="ring JSON or path")
    p.add_argument("--op", help="operator expression, e.g. 'x*d[2] + d[1]'")
    p.add_argument("--derivation", help="family JSON (with --alpha)")
    p.add_argument("--alpha", help="layer index, e.g. '[2]'")

    p = add("gamma-table", _cmd_gamma_table, "divided-power multiplication table")
    p.add_argument("--rank", type=int, required=True, help="module rank")
    p.add_argument("--base", required=True, help="coefficient ring: Z, Q, F<p>, or JSON")
    p.add_argument("--max-degree", type=int, required=True, help="degree bound")

    p = add("check", _cmd_check, "run a named randomized property suite")
    p.add_argument("--suite", required=True, choices=suite_names(), help="suite name")
    p.add_argument("--cases", type=int, default=None, help="instance count")
    p.add_argument("--seed", type=int, default=None, help="generator seed")
    p.add_argument("--ring", default=None, help="restrict the suite to one ring")

    p = add("eval", _cmd_eval, "apply an operator or family layer to a polynomial")
    p.add_argument("--op", help="operator expression (needs --ring)")
    p.add_argument("--ring", help="ring for --op")
    p.add_argument("--derivation", help="family JSON (with --alpha)")
    p.add_argument("--alpha", help="layer index, e.g. '[1,0]'")
    p.add_argument("--poly", required=True, help="polynomial to act on")

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
