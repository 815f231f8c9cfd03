"""Named randomized property suites.

Each suite draws instances from a seeded generator, runs a fixed set of
identities on them, and reports per-identity pass/fail counts plus a capped
list of counterexamples.  The command line (``hs check``) and the test
battery both call :func:`run_suite`, so a green suite means the same thing
in both places.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .config import DEFAULT_SEED
from .coideal import Coideal
from .dop import total_symbol
from .dpexp import DPAlgebra, ExpSeries, chi, exp_check, multi_binom, vartheta_eval
from .errors import HsError
from .hsder import HSDerivation, hasse_derivation
from .hsmod import (
    ENV_TAGS,
    adjoint_structure,
    audit_commutator,
    audit_order_bound,
    audit_small_layers,
    audit_truncation_locality,
    audit_zero_layer,
    check_structure,
    graded_floor_inequality,
    hom_structure,
    lie_structure,
    tensor_structure,
    trivial_structure,
    vartheta_surjectivity_probe,
    verify_env_relation,
)
from .intder import ider_filtration, integrate
from .rings import GF, QQ, ZZ, Algebra, Derivation
from .sampling import (
    random_coideal,
    random_derivation,
    random_filtered_op_series,
    random_hs,
    random_poly,
    random_subst,
)
from .tseries import PolySpace, TruncSeries

MAX_COUNTEREXAMPLES = 8


@dataclass
class SuiteResult:
    name: str
    seed: int
    cases: int
    checks: dict
    counterexamples: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(f == 0 for _, f in self.checks.values()) and not self.counterexamples

    def to_json(self) -> dict:
        return {
            "suite": self.name,
            "seed": self.seed,
            "cases": self.cases,
            "ok": self.ok,
            "checks": {
                label: {"passed": p, "failed": f}
                for label, (p, f) in sorted(self.checks.items())
            },
            "counterexamples": self.counterexamples,
        }

    def summary(self) -> str:
        lines = [f"suite {self.name}: {'ok' if self.ok else 'FAILED'} ({self.cases} cases)"]
        for label, (p, f) in sorted(self.checks.items()):
            lines.append(f"  {label}: {p} passed, {f} failed")
        for ce in self.counterexamples:
            lines.append(f"  counterexample [{ce['axiom']}] case {ce['case']}: {ce['detail']}")
        return "\n".join(lines)


class _Tally:
    def __init__(self):
        self.counts = {}
        self.counterexamples = []

    def check(self, label: str, ok: bool, case=None, detail: str = ""):
        c = self.counts.setdefault(label, [0, 0])
        if ok:
            c[0] += 1
        else:
            c[1] += 1
            if len(self.counterexamples) < MAX_COUNTEREXAMPLES:
                self.counterexamples.append(
                    {"axiom": label, "case": case, "detail": detail}
                )


SUITES: dict = {}


def _suite(name: str, default_cases: int):
    def deco(fn):
        SUITES[name] = (fn, default_cases)
        return fn

    return deco


def suite_names():
    return sorted(SUITES)


def run_suite(name: str, cases: int | None = None, seed: int | None = None,
              alg: Algebra | None = None) -> SuiteResult:
    if name not in SUITES:
        raise HsError(f"unknown suite {name!r}; available: {', '.join(suite_names())}")
    fn, dflt = SUITES[name]
    n = dflt if cases is None else cases
    if n < 1:
        raise HsError("cases must be at least 1")
    s = DEFAULT_SEED if seed is None else seed
    t = _Tally()
    fn(random.Random(s), n, t, alg)
    return SuiteResult(
        name, s, n, {k: tuple(v) for k, v in t.counts.items()}, t.counterexamples
    )


# ---------------------------------------------------------------------------
# standard instance pools
# ---------------------------------------------------------------------------


def _group_rings():
    return [
        Algebra(QQ, ["x"]),
        Algebra(GF(2), ["x"]),
        Algebra(GF(3), ["x", "y"]),
        Algebra(GF(2), ["x"], ["x^3"]),
    ]


def _free_rings():
    return [Algebra(QQ, ["x"]), Algebra(GF(2), ["x"]), Algebra(GF(3), ["x", "y"])]


def _sub_shape(rng: random.Random, shape: Coideal) -> Coideal:
    m = rng.randrange(shape.height() + 1)
    return Coideal(shape.nvars, [a for a in shape if sum(a) <= m])


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


@_suite("group-laws", 200)
def _group_laws(rng, cases, t, alg):
    pool = [alg] if alg is not None else _group_rings()
    for case in range(cases):
        ring = pool[case % len(pool)]
        p = rng.randint(1, 2)
        shape = random_coideal(rng, p, rng.randint(1, 3))
        D = random_hs(rng, ring, shape)
        E = random_hs(rng, ring, shape)
        F = random_hs(rng, ring, shape)
        t.check(
            "associative",
            D.compose(E).compose(F) == D.compose(E.compose(F)),
            case,
            f"ring {ring}, shape {sorted(shape.elements)}",
        )
        Di = D.invert()
        t.check(
            "two-sided-inverse",
            D.compose(Di).is_identity() and Di.compose(D).is_identity(),
            case,
            f"ring {ring}, shape {sorted(shape.elements)}",
        )
        sub = _sub_shape(rng, shape)
        t.check(
            "truncation-homomorphism",
            D.compose(E).truncate(sub) == D.truncate(sub).compose(E.truncate(sub)),
            case,
            f"ring {ring}, sub-shape {sorted(sub.elements)}",
        )


def _shape_chain(rng: random.Random, alg: Algebra):
    """Source shape plus two substitution maps chaining out of it."""
    for _ in range(30):
        p = rng.randint(1, 2)
        delta = random_coideal(rng, p, rng.randint(1, 3))
        q = rng.randint(1, 2)
        nabla = random_coideal(rng, q, rng.randint(1, max(1, delta.height())))
        r = rng.randint(1, 2)
        omega = random_coideal(rng, r, rng.randint(1, max(1, nabla.height())))
        try:
            phi = random_subst(rng, alg, delta, nabla)
            psi = random_subst(rng, alg, nabla, omega)
        except HsError:
            continue
        return delta, phi, psi
    raise HsError("could not sample a valid substitution chain")


@_suite("subst-action", 100)
def _subst_action(rng, cases, t, alg):
    pool = [alg] if alg is not None else _group_rings()
    for case in range(cases):
        ring = pool[case % len(pool)]
        delta, phi, psi = _shape_chain(rng, ring)
        D = random_hs(rng, ring, delta)
        E = random_hs(rng, ring, delta)
        t.check(
            "transport-composes",
            D.subst_act(psi.compose(phi)) == D.subst_act(phi).subst_act(psi),
            case,
            f"ring {ring}",
        )
        t.check(
            "product-transport",
            D.compose(E).subst_act(phi)
            == D.subst_act(phi).compose(E.subst_act(D.twist(phi))),
            case,
            f"ring {ring}",
        )
        t.check(
            "twist-chain",
            D.twist(psi.compose(phi))
            == D.subst_act(phi).twist(psi).compose(D.twist(phi)),
            case,
            f"ring {ring}",
        )
        t.check(
            "inverse-transport",
            D.subst_act(phi).invert() == D.invert().subst_act(D.twist(phi)),
            case,
            f"ring {ring}",
        )


@_suite("symbol", 100)
def _symbol(rng, cases, t, alg):
    pool = [alg] if alg is not None else [Algebra(GF(2), ["x"]), Algebra(QQ, ["x"])]
    for case in range(cases):
        ring = pool[case % len(pool)]
        p = rng.randint(1, 2)
        shape = random_coideal(rng, p, rng.randint(1, 3))
        r = random_filtered_op_series(rng, ring, shape)
        r2 = random_filtered_op_series(rng, ring, shape)
        t.check(
            "multiplicative",
            total_symbol(r * r2) == total_symbol(r) * total_symbol(r2),
            case,
            f"ring {ring}, shape {sorted(shape.elements)}",
        )
        for _ in range(30):
            q = rng.randint(1, 2)
            target = random_coideal(rng, q, rng.randint(1, max(1, shape.height())))
            try:
                phi = random_subst(rng, ring, shape, target)
                break
            except HsError:
                continue
        else:
            raise HsError("could not sample a substitution map")
        t.check(
            "substitution-symbol",
            total_symbol(phi.act_left(r)) == phi.init_part().act_left(total_symbol(r)),
            case,
            f"ring {ring}",
        )


@_suite("order-bounds", 100)
def _order_bounds(rng, cases, t, alg):
    pool = [alg] if alg is not None else _free_rings()
    for case in range(cases):
        ring = pool[case % len(pool)]
        p = rng.randint(1, 2)
        shape = random_coideal(rng, p, rng.randint(1, 3))
        D = random_hs(rng, ring, shape)
        bad = None
        for a in shape:
            if not audit_order_bound(D, a):
                bad = a
                break
        t.check("order-ceiling", bad is None, case, f"ring {ring}, index {bad}")
        E = random_hs(rng, ring, shape)
        a = rng.choice(list(shape))
        b = rng.choice(list(shape))
        t.check(
            "commutator-drop",
            audit_commutator(D, E, a, b),
            case,
            f"ring {ring}, indices {a}, {b}",
        )


@_suite("integrability", 10)
def _integrability(rng, cases, t, alg):
    # obstructed quotient: the square-zero line with unit tangent
    A = Algebra(GF(2), ["x"], ["x^2"])
    res = integrate(Derivation(A, [A.one]), 2)
    cert_ok = (
        res.status == "not_integrable"
        and res.stage == 2
        and res.certificate is not None
        and res.certificate.verify(A.base)
    )
    t.check("obstruction-certificate", cert_ok, 0, f"status {res.status}")

    # the divided-power derivative integrates the plain derivative in char 2
    B = Algebra(GF(2), ["x"])
    res2 = integrate(Derivation(B, [B.one]), 6)
    t.check(
        "char2-translation",
        res2.is_integrable() and res2.derivation == hasse_derivation(B, Coideal.tm(1, 6)),
        0,
        f"status {res2.status}",
    )

    # characteristic zero: stagewise agreement with iterated delta over i!
    C = Algebra(QQ, ["x"])
    for case in range(cases):
        delta = random_derivation(rng, C)
        res3 = integrate(delta, 6)
        ok = res3.is_integrable()
        if ok:
            fact = 1
            img = C.var(0)
            for i in range(1, 7):
                fact *= i
                img = delta(img)
                if res3.derivation.coeff_apply((i,), C.var(0)) != img * Fraction(1, fact):
                    ok = False
                    break
        t.check("factorial-stages", ok, case, f"delta(x) = {delta.images[0]}")

    # solver outputs re-validate and stay closed under coefficient scaling
    pool = [B, A, Algebra(GF(2), ["x"], ["x^3"])]
    for case in range(cases):
        ring = pool[case % len(pool)]
        delta = random_derivation(rng, ring)
        res4 = integrate(delta, rng.randint(2, 4))
        if not res4.is_integrable():
            t.check("revalidates", True, case)
            continue
        D = res4.derivation
        t.check(
            "revalidates",
            [D.coeff_apply((1,), ring.var(j)) for j in range(ring.nvars)]
            == [im for im in delta.images],
            case,
            f"ring {ring}",
        )
        a = random_poly(rng, ring, 2)
        scaled = D.scalar_act([a])
        t.check(
            "scaling-closure",
            [scaled.coeff_apply((1,), ring.var(j)) for j in range(ring.nvars)]
            == [a * im for im in delta.images],
            case,
            f"ring {ring}, a = {a}",
        )

    dims = ider_filtration(A, 3)
    t.check("filtration-monotone", dims == [2, 1, 1], 0, f"dims {dims}")


@_suite("divided-powers", 50)
def _divided_powers(rng, cases, t, alg):
    # rank-one integer table against the fraction-arithmetic oracle
    dp = DPAlgebra(Algebra(ZZ, []), 1, 8)
    bad = None
    for i in range(9):
        for j in range(9 - i):
            got = dp.gamma((i,)) * dp.gamma((j,))
            want = Fraction(1, math.factorial(i)) * Fraction(1, math.factorial(j)) \
                / Fraction(1, math.factorial(i + j))
            if want.denominator != 1 or got != dp.gamma((i + j,)).scale(want.numerator):
                bad = (i, j)
    t.check("integer-table", bad is None, 0, f"pair {bad}")

    pool = _free_rings()
    for case in range(cases):
        ring = pool[case % len(pool)]
        delta = random_derivation(rng, ring)
        m = rng.randint(2, 4)
        res = integrate(delta, m)
        if not res.is_integrable():
            t.check("exponential-law", False, case, f"sample failed to integrate over {ring}")
            continue
        D = res.derivation
        r = chi(D)
        rep = exp_check(r)
        t.check("exponential-law", rep.ok, case, f"ring {ring}, witness {rep.witness}")

        # another integral of the same derivation: compose with a family
        # that only moves degrees >= 2
        sp = PolySpace(ring)
        images = []
        for j in range(ring.nvars):
            coeffs = {(0,): ring.var(j)}
            for k in range(2, m + 1):
                if rng.random() < 0.5:
                    coeffs[(k,)] = random_poly(rng, ring, 2)
            images.append(TruncSeries(sp, D.shape, coeffs))
        K = HSDerivation(ring, D.shape, images)
        D2 = D.compose(K)
        t.check(
            "exponential-integral-independence",
            D2.coeff_apply((1,), ring.var(0)) == D.coeff_apply((1,), ring.var(0))
            and chi(D2) == r,
            case,
            f"ring {ring}",
        )


@_suite("gamma-coverage", 2)
def _gamma_coverage(rng, cases, t, alg):
    pool = [alg] if alg is not None else [Algebra(GF(2), ["x"]), Algebra(GF(3), ["x"])]
    bound = 9
    for case, ring in enumerate(pool):
        rep = vartheta_surjectivity_probe(ring, bound)
        t.check(
            "graded-coverage",
            rep.ok and rep.checked > 0,
            case,
            f"ring {ring}, failures {rep.failures}",
        )
        dp = DPAlgebra(ring, ring.nvars, bound)
        bad = None
        for i in range(bound + 1):
            for j in range(bound + 1 - i):
                lhs = vartheta_eval(dp.gamma((i,)) * dp.gamma((j,)), ring)
                rhs = vartheta_eval(dp.gamma((i,)), ring) * vartheta_eval(
                    dp.gamma((j,)), ring
                )
                if lhs != rhs:
                    bad = (i, j)
        t.check("table-transport", bad is None, case, f"ring {ring}, pair {bad}")


def _env_instance(rng, ring, tag):
    if tag == "R0":
        return {
            "a": random_poly(rng, ring, 2),
            "b": random_poly(rng, ring, 2),
            "c": ring.base.random_element(rng),
        }
    p = rng.randint(1, 2)
    shape = random_coideal(rng, p, rng.randint(1, 2))
    if tag == "Ri":
        return {"shape": shape}
    if tag == "Rii":
        pos = [a for a in shape if sum(a) > 0]
        if not pos:
            shape = Coideal.tm(1, 1)
            pos = [(1,)]
        return {"shape": shape, "alpha": rng.choice(pos)}
    if tag == "Riii":
        return {
            "D": random_hs(rng, ring, shape),
            "E": random_hs(rng, ring, shape),
            "alpha": rng.choice(list(shape)),
        }
    if tag == "Riv":
        return {
            "D": random_hs(rng, ring, shape),
            "alpha": rng.choice(list(shape)),
            "a": random_poly(rng, ring, 2),
        }
    if tag == "Rv":
        for _ in range(30):
            q = rng.randint(1, 2)
            target = random_coideal(rng, q, rng.randint(1, max(1, shape.height())))
            try:
                phi = random_subst(rng, ring, shape, target)
            except HsError:
                continue
            return {
                "phi": phi,
                "D": random_hs(rng, ring, shape),
                "beta": rng.choice(list(target)),
            }
        raise HsError("could not sample a substitution map")
    raise ValueError(tag)


@_suite("env-relations", 200)
def _env_relations(rng, cases, t, alg):
    pool = [alg] if alg is not None else [Algebra(GF(2), ["x"]), Algebra(QQ, ["x"])]
    for case in range(cases):
        ring = pool[case % len(pool)]
        tag = ENV_TAGS[case % len(ENV_TAGS)]
        rep = verify_env_relation(tag, ring, **_env_instance(rng, ring, tag))
        t.check(f"relation-{tag}", rep.ok, case, f"ring {ring}: {rep.detail}")

    audits = max(1, cases // 4)
    for case in range(audits):
        ring = pool[case % len(pool)]
        shape = random_coideal(rng, rng.randint(1, 2), rng.randint(1, 3))
        D = random_hs(rng, ring, shape)
        E = random_hs(rng, ring, shape)
        a = rng.choice(list(shape))
        b = rng.choice(list(shape))
        t.check("audit-locality", audit_truncation_locality(D, a), case, f"index {a}")
        t.check(
            "audit-zero-layer",
            audit_zero_layer(D) and audit_small_layers(D, a),
            case,
            f"index {a}",
        )
        t.check(
            "audit-order",
            audit_order_bound(D, a) and audit_commutator(D, E, a, b),
            case,
            f"indices {a}, {b}",
        )

    bad = None
    for l1 in range(1, 6):
        for l2 in range(1, 6):
            for a1 in range(l1, 21):
                for b1 in range(l2, 21):
                    for a2 in range(0, 21):
                        for b2 in range(0, 21):
                            if not graded_floor_inequality(l1, l2, a1, a2, b1, b2):
                                bad = (l1, l2, a1, a2, b1, b2)
    t.check("floor-inequality", bad is None, 0, f"tuple {bad}")


def _classical_lie_ok(ring, D, alpha, vec):
    """Degree-one layer on rank-n columns = transport of one-forms."""
    delta = Derivation(
        ring, [D.coeff_apply(alpha, ring.var(j)) for j in range(ring.nvars)], check=False
    )
    psi = lie_structure(ring)
    got = psi(D).coeff(alpha).apply(vec)
    want = [
        delta(vec[i])
        + sum(
            (vec[j] * delta(ring.var(j)).partial(i) for j in range(ring.nvars)),
            ring.zero,
        )
        for i in range(ring.nvars)
    ]
    return list(got) == want


def _classical_adjoint_ok(ring, D, alpha, vec):
    """Degree-one layer on coefficient columns = commutator of derivations."""
    delta = Derivation(
        ring, [D.coeff_apply(alpha, ring.var(j)) for j in range(ring.nvars)], check=False
    )
    psi = adjoint_structure(ring)
    got = psi(D).coeff(alpha).apply(vec)
    want = [
        delta(vec[i])
        - sum(
            (vec[j] * delta(ring.var(i)).partial(j) for j in range(ring.nvars)),
            ring.zero,
        )
        for i in range(ring.nvars)
    ]
    return list(got) == want


@_suite("module-structures", 100)
def _module_structures(rng, cases, t, alg):
    pool = [alg] if alg is not None else _free_rings()
    for case in range(cases):
        ring = pool[case % len(pool)]
        shape = random_coideal(rng, rng.randint(1, 2), rng.randint(1, 2))
        D = random_hs(rng, ring, shape)
        E = random_hs(rng, ring, shape)
        for label, mk in (("one-forms", lie_structure), ("fields", adjoint_structure)):
            psi = mk(ring)
            rep = check_structure(psi, compose_pairs=[(D, E)], delement_samples=[D])
            t.check(
                f"{label}-axioms",
                rep.ok,
                case,
                f"ring {ring}: " + "; ".join(f.axiom + " " + f.detail for f in rep.failures),
            )
        if case < cases // 2:
            for _ in range(30):
                target = random_coideal(
                    rng, rng.randint(1, 2), rng.randint(1, max(1, shape.height()))
                )
                try:
                    phi = random_subst(rng, ring, shape, target, constant_coeff=True)
                    break
                except HsError:
                    continue
            else:
                raise HsError("could not sample a constant-coefficient substitution")
            for label, mk in (("one-forms", lie_structure), ("fields", adjoint_structure)):
                rep = check_structure(mk(ring), subst_samples=[(phi, D)])
                t.check(
                    f"{label}-equivariance",
                    rep.ok,
                    case,
                    f"ring {ring}: " + "; ".join(f.detail for f in rep.failures),
                )
            ones = [a for a in shape if sum(a) == 1]
            if ones:
                a0 = rng.choice(ones)
                vec = [random_poly(rng, ring, 2) for _ in range(ring.nvars)]
                t.check(
                    "classical-one-forms",
                    _classical_lie_ok(ring, D, a0, vec),
                    case,
                    f"ring {ring}, index {a0}",
                )
                t.check(
                    "classical-fields",
                    _classical_adjoint_ok(ring, D, a0, vec),
                    case,
                    f"ring {ring}, index {a0}",
                )

    # composite structures at small rank
    for case, ring in enumerate([Algebra(GF(2), ["x"]), Algebra(QQ, ["x"])]):
        shape = Coideal.tm(1, 2)
        D = random_hs(rng, ring, shape)
        E = random_hs(rng, ring, shape)
        lie = lie_structure(ring)
        adj = adjoint_structure(ring)
        triv = trivial_structure(ring)
        for label, psi in (
            ("tensor", tensor_structure(lie, adj)),
            ("hom", hom_structure(lie, adj)),
            ("tensor-trivial", tensor_structure(triv, lie)),
            ("hom-trivial", hom_structure(triv, adj)),
        ):
            rep = check_structure(psi, compose_pairs=[(D, E)], delement_samples=[D])
            t.check(
                f"composite-{label}",
                rep.ok,
                case,
                f"ring {ring}: " + "; ".join(f.axiom + " " + f.detail for f in rep.failures),
            )


@_suite("deviation-growth", 100)
def _deviation_growth(rng, cases, t, alg):
    pool = [alg] if alg is not None else _group_rings()
    for case in range(cases):
        ring = pool[case % len(pool)]
        p = rng.randint(1, 2)
        shape = random_coideal(rng, p, rng.randint(1, 3))
        D = random_hs(rng, ring, shape)
        E = random_hs(rng, ring, shape)
        comm = D.compose(E).compose(D.invert()).compose(E.invert())
        t.check(
            "commutator-deviation",
            comm.deviation_order() >= D.deviation_order() + E.deviation_order(),
            case,
            f"ring {ring}: {comm.deviation_order()} < {D.deviation_order()} + {E.deviation_order()}",
        )
        for _ in range(30):
            target = random_coideal(rng, rng.randint(1, 2), rng.randint(1, max(1, shape.height())))
            try:
                phi = random_subst(rng, ring, shape, target, deg=1)
                break
            except HsError:
                continue
        else:
            raise HsError("could not sample a substitution map")
        moved = D.subst_act(phi)
        lhs = moved.deviation_order()
        rhs = phi.order() * D.deviation_order()
        t.check(
            "transport-deviation",
            lhs >= rhs or (math.isnan(rhs) and lhs == math.inf),
            case,
            f"ring {ring}: {lhs} < {rhs}",
        )
