"""Deciding whether an ordinary derivation extends to a truncated
Hasse-Schmidt derivation, one degree at a time.

The key fact: if D is a valid family up to degree n-1, then a candidate top
layer u = (u_1, .., u_nvars) extends it to degree n exactly when, for every
defining relation f,

    [s^n] f(D(x))  +  sum_j (df/dx_j)(x) * u_j  =  0        in A.

The correction term is affine in u, so over a finite dimensional quotient of
a field the fiber of valid extensions is an affine subspace computed by
exact elimination.  Over the rationals the fiber is always nonempty and has
a canonical point u_j = delta(D_{n-1}(x_j)) / n; over a free algebra u = 0
always works.  Only the remaining case (finite field, finite dimensional
quotient) needs an actual search, and there the fibers are finite, so the
tree of partial extensions can be walked exhaustively under a node budget.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .config import DEFAULT_NODE_BUDGET
from .coideal import Coideal
from .errors import HsError, InternalInvariantViolation, ShapeMismatch
from .hsder import HSDerivation
from .linalg import solve_affine, nullspace
from .rings import Algebra, Derivation, Poly
from .tseries import PolySpace, TruncSeries


class _BudgetHit(Exception):
    pass


@dataclass
class StageCertificate:
    """Proof that some stage has no valid top layer.

    ``combination`` are scalars, one per equation row, with
    combination . rows = 0 while combination . rhs = residual != 0.
    """

    stage: int
    unknown_labels: list
    equation_labels: list
    rows: list
    rhs: list
    combination: list
    residual: object

    def verify(self, base) -> bool:
        ncols = len(self.unknown_labels)
        for c in range(ncols):
            acc = base.zero
            for lam, row in zip(self.combination, self.rows):
                acc = base.add(acc, base.mul(lam, row[c]))
            if not base.is_zero(acc):
                return False
        acc = base.zero
        for lam, v in zip(self.combination, self.rhs):
            acc = base.add(acc, base.mul(lam, v))
        return acc == base.normalize(self.residual) and not base.is_zero(acc)

    def to_json(self, base):
        return {
            "stage": self.stage,
            "unknowns": list(self.unknown_labels),
            "equations": list(self.equation_labels),
            "combination": [base.scalar_str(v) for v in self.combination],
            "residual": base.scalar_str(self.residual),
        }


@dataclass
class StageSystem:
    """The affine system cutting out the valid degree-n top layers."""

    stage: int
    unknown_labels: list
    equation_labels: list
    rows: list
    rhs: list
    solutions: object  # AffineSolutions

    def certificate(self) -> StageCertificate:
        if self.solutions.ok:
            raise ValueError("stage system is consistent, no certificate")
        return StageCertificate(
            self.stage,
            self.unknown_labels,
            self.equation_labels,
            self.rows,
            self.rhs,
            self.solutions.certificate,
            self.solutions.residual,
        )


@dataclass
class IntegralSearchResult:
    status: str  # "integrable" | "not_integrable" | "inconclusive"
    to_order: int
    derivation: HSDerivation | None = None
    stage: int | None = None
    certificate: StageCertificate | None = None
    log: list = field(default_factory=list)
    nodes: int = 0

    def is_integrable(self) -> bool:
        return self.status == "integrable"

    def __bool__(self):
        return self.is_integrable()

    def to_json(self, base=None):
        out = {"status": self.status, "to": self.to_order, "nodes": self.nodes}
        if self.derivation is not None:
            out["derivation"] = self.derivation.to_json()
        if self.stage is not None:
            out["stage"] = self.stage
        if self.certificate is not None:
            if base is None:
                base = self.derivation.alg.base if self.derivation else None
            out["certificate"] = self.certificate.to_json(base) if base else "unavailable"
        out["log"] = list(self.log)
        return out


def _mono_name(alg: Algebra, e) -> str:
    if not any(e):
        return "1"
    return "*".join(
        f"{nm}^{k}" if k > 1 else nm for nm, k in zip(alg.varnames, e) if k
    )


def _lift(D: HSDerivation, shape: Coideal) -> HSDerivation:
    sp = PolySpace(D.alg)
    imgs = [TruncSeries(sp, shape, dict(im.coeffs)) for im in D.images]
    return HSDerivation(D.alg, shape, imgs, check=False)


def _free_relation_polys(alg: Algebra):
    """Each relation as an unreduced representative, with its formal partials."""
    out = []
    for t in alg.relation_terms:
        rep = Poly(alg, dict(t))
        out.append((t, [rep.partial(j) for j in range(alg.nvars)]))
    return out


def extend_step(D: HSDerivation, n: int | None = None) -> StageSystem:
    """Affine system for the degree-n top layers extending D.

    D must live over the one-variable shape of height n-1.  Needs a finite
    dimensional quotient over a field base so that the conditions become a
    finite exact linear system.
    """
    alg = D.alg
    base = alg.base
    if D.shape.nvars != 1:
        raise ShapeMismatch("stage extension works over one-variable shapes")
    if n is None:
        n = D.shape.height() + 1
    if n != D.shape.height() + 1:
        raise ValueError(f"can only extend by one degree, asked for {n}")
    if not base.is_field:
        raise HsError(f"stage solving needs a field base, got {base.name}")
    if not alg.is_finite_dimensional():
        raise HsError("stage solving needs a finite dimensional quotient")

    basis = alg.monomial_basis()
    index = {e: i for i, e in enumerate(basis)}
    nv = alg.nvars
    unknown_labels = [
        f"{alg.varnames[j]}:{_mono_name(alg, e)}" for j in range(nv) for e in basis
    ]
    shape_n = Coideal.tm(1, n)
    lifted = _lift(D, shape_n)

    rows, rhs, eq_labels = [], [], []
    for t, partials in _free_relation_polys(alg):
        drift = lifted._eval_free_terms(t).coeff((n,))
        gcols = []
        for j in range(nv):
            for e in basis:
                prod = partials[j] * Poly(alg, {e: base.one})
                gcols.append(prod)
        rel_name = format_relation(alg, t)
        for b in basis:
            row = [g.coeff(b) for g in gcols]
            rows.append(row)
            rhs.append(base.neg(drift.coeff(b)))
            eq_labels.append(f"{rel_name} @ {_mono_name(alg, b)}")
    sols = solve_affine(base, rows, rhs) if rows else solve_affine(base, [[base.zero] * len(unknown_labels)], [base.zero])
    return StageSystem(n, unknown_labels, eq_labels, rows, rhs, sols)


def format_relation(alg: Algebra, terms: dict) -> str:
    from .rings import format_terms

    return format_terms(terms, alg.varnames, alg.base)


def _vec_to_polys(alg: Algebra, basis, vec):
    """Coordinate vector (j-major over the staircase basis) -> one Poly per variable."""
    nb = len(basis)
    out = []
    for j in range(alg.nvars):
        terms = {}
        for i, e in enumerate(basis):
            v = alg.base.normalize(vec[j * nb + i])
            if not alg.base.is_zero(v):
                terms[e] = v
        out.append(Poly(alg, terms))
    return out


def _extended(D: HSDerivation, n: int, tops) -> HSDerivation:
    shape_n = Coideal.tm(1, n)
    sp = PolySpace(D.alg)
    imgs = []
    for im, u in zip(D.images, tops):
        coeffs = dict(im.coeffs)
        if not u.is_zero():
            coeffs[(n,)] = u
        imgs.append(TruncSeries(sp, shape_n, coeffs))
    return HSDerivation(D.alg, shape_n, imgs, check=True)


def _fiber_points(base, sols):
    """All solutions of the affine system, canonical particular point first."""
    yield list(sols.particular)
    kdim = len(sols.kernel)
    if kdim == 0:
        return
    elems = [base.normalize(v) for v in base.elements()]
    for combo in itertools.product(elems, repeat=kdim):
        if all(base.is_zero(c) for c in combo):
            continue
        vec = list(sols.particular)
        for c, kv in zip(combo, sols.kernel):
            if base.is_zero(c):
                continue
            vec = [base.add(x, base.mul(c, y)) for x, y in zip(vec, kv)]
        yield vec


def _degree_one(delta: Derivation) -> HSDerivation:
    alg = delta.alg
    sp = PolySpace(alg)
    shape = Coideal.tm(1, 1)
    imgs = []
    for j in range(alg.nvars):
        coeffs = {(0,): alg.var(j)}
        d = delta.images[j]
        if not d.is_zero():
            coeffs[(1,)] = d
        imgs.append(TruncSeries(sp, shape, coeffs))
    return HSDerivation(alg, shape, imgs, check=True)


def integrate(delta: Derivation, to_order: int, *, node_budget: int | None = None) -> IntegralSearchResult:
    """Search for a Hasse-Schmidt derivation of length to_order whose degree-1
    layer is delta.

    Returns a result object rather than raising: not finding one is a valid
    outcome and comes with a stage certificate that can be reverified.
    """
    if not isinstance(delta, Derivation):
        raise TypeError("expected a Derivation")
    if to_order < 1:
        raise ValueError("to_order must be at least 1")
    alg = delta.alg
    base = alg.base
    log = []

    D = _degree_one(delta)
    if to_order == 1:
        return IntegralSearchResult("integrable", 1, derivation=D, log=["degree 1 is the input"])

    if base.kind == "Q":
        # canonical extension: top layer = delta applied to the previous one, over n
        for n in range(2, to_order + 1):
            tops = []
            for j in range(alg.nvars):
                prev = D.images[j].coeff((n - 1,))
                tops.append(delta(prev) * base.div(base.one, base.from_int(n)))
            try:
                D = _extended(D, n, tops)
            except ShapeMismatch as exc:
                # One particular solution is followed per stage, so a dead end
                # here only means this route failed, not that none exists.
                log.append(f"degree {n}: canonical layer rejected ({exc})")
                return IntegralSearchResult("inconclusive", to_order, stage=n, log=log)
            log.append(f"degree {n}: canonical layer delta(previous)/{n}")
        return IntegralSearchResult("integrable", to_order, derivation=D, log=log)

    if not alg.relation_terms:
        # no relations to obstruct: extending by zero always works
        shape = Coideal.tm(1, to_order)
        D = _lift(D, shape)
        log.append(f"free algebra: zero top layers up to degree {to_order}")
        return IntegralSearchResult("integrable", to_order, derivation=D, log=log)

    if not base.is_field:
        raise HsError(
            f"integrability search over {base.name} with relations is not supported; "
            "use a field base or drop the relations"
        )
    if not alg.is_finite_dimensional():
        raise HsError(
            "integrability search needs a finite dimensional quotient in positive "
            "characteristic"
        )

    budget = DEFAULT_NODE_BUDGET if node_budget is None else node_budget
    nodes = 0
    worst = {"stage": 1, "cert": None}

    def grow(cur: HSDerivation):
        nonlocal nodes
        n = cur.shape.height() + 1
        if n > to_order:
            return cur
        step = extend_step(cur, n)
        if not step.solutions:
            if n >= worst["stage"]:
                worst["stage"] = n
                worst["cert"] = step.certificate()
            log.append(f"degree {n}: empty fiber ({len(step.rows)} equations)")
            return None
        kdim = len(step.solutions.kernel)
        log.append(f"degree {n}: fiber of dimension {kdim}")
        for vec in _fiber_points(base, step.solutions):
            nodes += 1
            if nodes > budget:
                raise _BudgetHit
            cand = _extended(cur, n, _vec_to_polys(alg, alg.monomial_basis(), vec))
            got = grow(cand)
            if got is not None:
                return got
        return None

    try:
        found = grow(D)
    except _BudgetHit:
        log.append(f"node budget {budget} exhausted")
        return IntegralSearchResult(
            "inconclusive", to_order, log=log, nodes=nodes,
            stage=worst["stage"] if worst["cert"] else None,
            certificate=worst["cert"],
        )
    if found is not None:
        return IntegralSearchResult("integrable", to_order, derivation=found, log=log, nodes=nodes)
    cert = worst["cert"]
    if cert is None:
        raise InternalInvariantViolation("search exhausted with no failing stage recorded")
    if not cert.verify(base):
        raise InternalInvariantViolation("stage certificate failed its own verification")
    return IntegralSearchResult(
        "not_integrable", to_order, stage=worst["stage"], certificate=cert,
        log=log, nodes=nodes,
    )


def derivation_space(alg: Algebra):
    """Basis of the derivations of a finite dimensional quotient.

    Returns (basis_monomials, vectors) where each vector lists, variable by
    variable, the coordinates of delta(x_j) over the staircase basis.
    """
    base = alg.base
    if not base.is_field:
        raise HsError(f"derivation space needs a field base, got {base.name}")
    if not alg.is_finite_dimensional():
        raise HsError("derivation space of an infinite dimensional algebra")
    basis = alg.monomial_basis()
    nb = len(basis)
    ncols = alg.nvars * nb
    rows = []
    for t, partials in _free_relation_polys(alg):
        gcols = []
        for j in range(alg.nvars):
            for e in basis:
                gcols.append(partials[j] * Poly(alg, {e: base.one}))
        for b in basis:
            rows.append([g.coeff(b) for g in gcols])
    vectors = nullspace(base, rows, ncols)
    return basis, vectors


def _vector_to_derivation(alg: Algebra, basis, vec) -> Derivation:
    return Derivation(alg, _vec_to_polys(alg, basis, vec), check=True)


def ider_dimension(alg: Algebra, m: int, *, node_budget: int | None = None) -> int:
    """Dimension over the base field of the degree-m integrable derivations.

    Characteristic zero: every derivation extends, so this is dim Der.  Over a
    finite field the integrable locus is a subspace; its size is counted by
    exhausting the (finite) space of derivations.
    """
    base = alg.base
    basis, vectors = derivation_space(alg)
    d = len(vectors)
    if base.characteristic == 0:
        return d
    q = base.n
    count = 0
    elems = [base.normalize(v) for v in base.elements()]
    for combo in itertools.product(elems, repeat=d):
        vec = [base.zero] * (alg.nvars * len(basis))
        for c, kv in zip(combo, vectors):
            if base.is_zero(c):
                continue
            vec = [base.add(x, base.mul(c, y)) for x, y in zip(vec, kv)]
        delta = _vector_to_derivation(alg, basis, vec)
        res = integrate(delta, m, node_budget=node_budget)
        if res.status == "inconclusive":
            raise HsError(
                f"node budget hit while counting integrable derivations at degree {m}"
            )
        if res.is_integrable():
            count += 1
    e = count.bit_length() - 1 if q == 2 else round(math.log(count, q))
    if q ** e != count:
        raise InternalInvariantViolation(
            f"integrable locus has size {count}, not a power of {q}"
        )
    return e


def ider_filtration(alg: Algebra, m_max: int, *, node_budget: int | None = None) -> list:
    """Dimensions of the integrable-derivation subspaces for degrees 1..m_max.

    Degree 1 is all derivations; the chain can only shrink as the degree
    grows, and that is enforced rather than assumed.
    """
    dims = [ider_dimension(alg, m, node_budget=node_budget) for m in range(1, m_max + 1)]
    for a, b in zip(dims, dims[1:]):
        if b > a:
            raise InternalInvariantViolation(
                f"integrable filtration grew from {a} to {b}"
            )
    return dims
