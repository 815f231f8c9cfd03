"""Seeded random generators for the property suites.

Everything takes an explicit random.Random so runs are reproducible; nothing
here reads global state.  Families over quotients are built index by index:
at each exponent the defining relations impose an affine condition on the
new layer (the linear part is the Jacobian of the relations, the drift is
what the already-chosen layers produce), so we solve exactly and pick a
random point of the fiber, retrying from scratch on a dead end.
"""

from __future__ import annotations

import random

from .coideal import Coideal, sort_key
from .dop import DpOp, MatOp, OpSpace, dp_derivative, identity_op, mult_op
from .errors import HsError, IllDefinedSubstitution, ShapeMismatch
from .hsder import HSDerivation
from .intder import derivation_space, _vec_to_polys
from .linalg import solve_affine
from .rings import Algebra, Derivation, Poly
from .subst import SubstMap
from .tseries import PolySpace, TruncSeries


def random_poly(rng: random.Random, alg: Algebra, deg: int, terms: int = 3) -> Poly:
    """Sparse random element of bounded total degree (post normal form)."""
    out = alg.zero
    for _ in range(terms):
        e = []
        left = deg
        for _ in range(alg.nvars):
            k = rng.randint(0, left)
            e.append(k)
            left -= k
        rng.shuffle(e)
        c = alg.base.random_element(rng, 5)
        out = out + Poly(alg, alg.nf({tuple(e): alg.base.normalize(c)}))
    return out


def random_unit_series(rng: random.Random, alg: Algebra, shape: Coideal, deg: int = 2) -> TruncSeries:
    """Series with constant coefficient 1 and sparse random higher layers."""
    sp = PolySpace(alg)
    coeffs = {(0,) * shape.nvars: alg.one}
    for a in shape:
        if sum(a) == 0:
            continue
        if rng.random() < 0.7:
            coeffs[a] = random_poly(rng, alg, deg)
    return TruncSeries(sp, shape, coeffs)


def random_hs(rng: random.Random, alg: Algebra, shape: Coideal, *, deg: int = 2,
              attempts: int = 60) -> HSDerivation:
    """Random family over the shape; relations are honored layer by layer."""
    sp = PolySpace(alg)
    zero_idx = (0,) * shape.nvars
    order = sorted(shape, key=sort_key)

    if not alg.relation_terms:
        imgs = []
        for j in range(alg.nvars):
            coeffs = {zero_idx: alg.var(j)}
            for a in order:
                if a == zero_idx:
                    continue
                if rng.random() < 0.6:
                    coeffs[a] = random_poly(rng, alg, deg)
            imgs.append(TruncSeries(sp, shape, coeffs))
        return HSDerivation(alg, shape, imgs, check=True)

    if not (alg.base.is_field and alg.is_finite_dimensional()):
        raise HsError(
            "random families over a quotient need a field base and a finite "
            "dimensional quotient"
        )
    base = alg.base
    basis = alg.monomial_basis()
    nb = len(basis)
    nv = alg.nvars

    # Jacobian rows: same linear part at every index
    from .intder import _free_relation_polys

    rows = []
    rels = _free_relation_polys(alg)
    for t, partials in rels:
        gcols = []
        for j in range(nv):
            for e in basis:
                gcols.append(partials[j] * Poly(alg, {e: base.one}))
        for b in basis:
            rows.append([g.coeff(b) for g in gcols])

    elems = [base.normalize(v) for v in base.elements()]
    for _ in range(attempts):
        images = [{zero_idx: alg.var(j)} for j in range(nv)]
        ok = True
        for a in order:
            if a == zero_idx:
                continue
            partial = HSDerivation(
                alg, shape, [TruncSeries(sp, shape, c) for c in images], check=False
            )
            rhs = []
            for t, _ in rels:
                drift = partial._eval_free_terms(t).coeff(a)
                for b in basis:
                    rhs.append(base.neg(drift.coeff(b)))
            sol = solve_affine(base, rows, rhs)
            if not sol:
                ok = False
                break
            vec = list(sol.particular)
            for kv in sol.kernel:
                c = rng.choice(elems)
                if not base.is_zero(c):
                    vec = [base.add(x, base.mul(c, y)) for x, y in zip(vec, kv)]
            tops = _vec_to_polys(alg, basis, vec)
            for j in range(nv):
                if not tops[j].is_zero():
                    images[j][a] = tops[j]
        if ok:
            return HSDerivation(
                alg, shape, [TruncSeries(sp, shape, c) for c in images], check=True
            )
    raise HsError(f"no valid family found in {attempts} attempts")


def random_derivation(rng: random.Random, alg: Algebra, deg: int = 2) -> Derivation:
    if not alg.relation_terms:
        return Derivation(alg, [random_poly(rng, alg, deg) for _ in range(alg.nvars)])
    basis, vectors = derivation_space(alg)
    base = alg.base
    vec = [base.zero] * (alg.nvars * len(basis))
    elems = [base.normalize(v) for v in base.elements()]
    for kv in vectors:
        c = rng.choice(elems)
        if not base.is_zero(c):
            vec = [base.add(x, base.mul(c, y)) for x, y in zip(vec, kv)]
    return Derivation(alg, _vec_to_polys(alg, basis, vec))


def random_subst(rng: random.Random, alg: Algebra, source: Coideal, target: Coideal,
                 *, constant_coeff: bool = False, deg: int = 1,
                 attempts: int = 40) -> SubstMap:
    """Random substitution map; retried until well defined.

    With target height at most the source height a draw is always valid for
    box and total-degree sources, so the retry loop is only doing real work
    for exotic shapes.
    """
    sp = PolySpace(alg)
    for trial in range(attempts):
        images = []
        for _ in range(source.nvars):
            coeffs = {}
            for e in target:
                if sum(e) == 0:
                    continue
                keep = rng.random() < (0.8 if sum(e) == 1 else 0.45)
                if not keep:
                    continue
                if constant_coeff:
                    c = alg.const(alg.base.random_element(rng, 5))
                else:
                    c = random_poly(rng, alg, deg, terms=2)
                if not c.is_zero():
                    coeffs[e] = c
            images.append(TruncSeries(sp, target, coeffs))
        try:
            return SubstMap(alg, source, target, images)
        except IllDefinedSubstitution:
            continue
    raise HsError(f"no well-defined substitution found in {attempts} attempts")


def random_filtered_op_series(rng: random.Random, alg: Algebra, shape: Coideal,
                              *, unit: bool = True) -> TruncSeries:
    """Series of operators with the order of each coefficient at most its
    total degree, suitable for taking total symbols."""
    sp = OpSpace(alg)
    coeffs = {}
    zero_idx = (0,) * shape.nvars
    n = alg.nvars
    for a in shape:
        d = sum(a)
        if d == 0:
            coeffs[a] = identity_op(alg) if unit else _random_op(rng, alg, 0)
            continue
        if rng.random() < 0.75:
            op = _random_op(rng, alg, d)
            if not op.is_zero():
                coeffs[a] = op
    if unit:
        coeffs[zero_idx] = identity_op(alg)
    return TruncSeries(sp, shape, coeffs)


def _random_op(rng: random.Random, alg: Algebra, max_order: int):
    """Sum of a few terms mult(poly) . derivative^[b] with |b| <= max_order."""
    n = alg.nvars
    out = None
    for _ in range(rng.randint(1, 2)):
        b = []
        left = max_order
        for _ in range(n):
            k = rng.randint(0, left)
            b.append(k)
            left -= k
        rng.shuffle(b)
        term = mult_op(alg, random_poly(rng, alg, 2, terms=2))
        for j, k in enumerate(b):
            if k:
                term = term * dp_derivative(alg, j, k)
        out = term if out is None else out + term
    return out


def random_coideal(rng: random.Random, nvars: int, max_height: int) -> Coideal:
    """One of the stock shapes, or a randomly grown downward-closed set."""
    kind = rng.choice(["tm", "nbeta", "grown"])
    if kind == "tm":
        return Coideal.tm(nvars, rng.randint(1, max_height))
    if kind == "nbeta":
        beta = tuple(rng.randint(0, max_height) for _ in range(nvars))
        if sum(beta) == 0:
            beta = (1,) * nvars
        return Coideal.nbeta(beta)
    elems = {(0,) * nvars}
    frontier = [(0,) * nvars]
    steps = rng.randint(nvars, 2 * nvars + 2)
    for _ in range(steps):
        src = rng.choice(frontier)
        j = rng.randrange(nvars)
        cand = src[:j] + (src[j] + 1,) + src[j + 1 :]
        if sum(cand) > max_height:
            continue
        if all(
            cand[:i] + (cand[i] - 1,) + cand[i + 1 :] in elems
            for i in range(nvars)
            if cand[i] > 0
        ):
            elems.add(cand)
            frontier.append(cand)
    return Coideal(nvars, elems)
