"""Exponential-type truncated series and divided power algebras.

An exponential series over a ring B is a unit series (1, r_1, .., r_m) whose
coefficients satisfy binomial(i+j, i) * r_{i+j} = r_i * r_j.  These form a
group under series multiplication and carry a module action r -> (a^i r_i).
The membership test here runs two independent routes and insists they agree:
the binomial identities directly, and the substitution t -> t' + t'' compared
against the product of the two re-embedded copies.

The divided power algebra of a free module collects symbols gamma_b (b a
multi-index over the module basis) with gamma_b * gamma_c = prod_j
binomial(b_j + c_j, b_j) * gamma_{b+c}.  The universal map sending a module
element to its exponential series lands in that algebra, and for a free
polynomial ring the algebra maps onto the graded algebra of differential
operators by gamma_b -> class of the divided-power derivative d[b].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .coideal import Coideal
from .dop import GrElement, GrSpace
from .errors import (
    DegreeCapExceeded,
    InternalInvariantViolation,
    ShapeMismatch,
)
from .hsder import HSDerivation
from .rings import Algebra, Poly
from .subst import SubstMap
from .tseries import CoeffSpace, TruncSeries


def multi_binom(b, c) -> int:
    out = 1
    for x, y in zip(b, c):
        out *= math.comb(x + y, x)
    return out


def _compositions(total: int, parts: int):
    """All exponent tuples of the given length summing to total."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


# ---------------------------------------------------------------------------
# exponential series
# ---------------------------------------------------------------------------


class ExpSeries:
    """Unit series (1, r_1, .., r_m) over a coefficient space.

    The constructor only pins down the shape (r_0 must be 1); whether the
    binomial relations hold is a separate question answered by exp_check.
    """

    __slots__ = ("space", "alg", "coeffs")

    def __init__(self, space: CoeffSpace, alg: Algebra, coeffs):
        self.space = space
        self.alg = alg
        vals = [space.coerce(v) for v in coeffs]
        if not vals:
            raise ShapeMismatch("an exponential series needs at least the constant 1")
        if not space.eq(vals[0], space.one()):
            raise ShapeMismatch("coefficient 0 of an exponential series must be 1")
        self.coeffs = vals

    @property
    def length(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, i: int):
        return self.coeffs[i]

    def to_series(self) -> TruncSeries:
        shape = Coideal.tm(1, self.length)
        return TruncSeries(
            self.space, shape, {(i,): v for i, v in enumerate(self.coeffs)}
        )

    @staticmethod
    def from_series(series: TruncSeries, alg: Algebra) -> "ExpSeries":
        if series.shape.nvars != 1:
            raise ShapeMismatch("one series variable expected")
        m = series.shape.height()
        return ExpSeries(series.space, alg, [series.coeff((i,)) for i in range(m + 1)])

    def _compat(self, other: "ExpSeries"):
        if self.space != other.space or self.length != other.length:
            raise ShapeMismatch("exponential series of different shapes")

    def __mul__(self, other):
        if not isinstance(other, ExpSeries):
            return NotImplemented
        self._compat(other)
        sp = self.space
        out = []
        for k in range(self.length + 1):
            acc = sp.zero()
            for i in range(k + 1):
                acc = sp.add(acc, sp.mul(self.coeffs[i], other.coeffs[k - i]))
            out.append(acc)
        return ExpSeries(sp, self.alg, out)

    def inverse(self) -> "ExpSeries":
        return ExpSeries.from_series(self.to_series().invert(), self.alg)

    def scale(self, a) -> "ExpSeries":
        """Module action: coefficient i gets multiplied by a^i."""
        a = self.alg.parse(a) if isinstance(a, str) else a
        if isinstance(a, int):
            a = self.alg.const(a)
        sp = self.space
        out = [self.coeffs[0]]
        pw = self.alg.one
        for i in range(1, self.length + 1):
            pw = pw * a
            out.append(sp.scal_left(pw, self.coeffs[i]))
        return ExpSeries(sp, self.alg, out)

    def __eq__(self, other):
        if not isinstance(other, ExpSeries):
            return NotImplemented
        if self.space != other.space or self.length != other.length:
            return False
        return all(self.space.eq(u, v) for u, v in zip(self.coeffs, other.coeffs))

    __hash__ = None

    def __repr__(self):
        return f"ExpSeries(length {self.length})"


@dataclass
class ExpReport:
    ok: bool
    witness: tuple | None = None
    detail: str = ""

    def __bool__(self):
        return self.ok


def exp_check(r: ExpSeries) -> ExpReport:
    """Does the series satisfy binomial(i+j,i) r_{i+j} = r_i r_j?

    Two routes that must agree: the identities themselves, and the series
    comparison phi(r) = iota(r) * kappa(r) where phi doubles the variable
    (t -> t' + t'') and iota, kappa re-embed along each factor.
    """
    sp = r.space
    m = r.length
    direct_ok, witness = True, None
    for i in range(1, m + 1):
        for j in range(i, m + 1 - i):
            lhs = sp.scal_left(r.alg.const(math.comb(i + j, i)), r.coeffs[i + j])
            rhs = sp.mul(r.coeffs[i], r.coeffs[j])
            if not sp.eq(lhs, rhs):
                direct_ok, witness = False, (i, j)
                break
        if not direct_ok:
            break

    src = Coideal.tm(1, m)
    tgt = Coideal.tm(2, m)
    doubling = SubstMap(r.alg, src, tgt, ["t1 + t2"])
    left_leg = SubstMap(r.alg, src, tgt, ["t1"])
    right_leg = SubstMap(r.alg, src, tgt, ["t2"])
    s = r.to_series()
    series_ok = doubling.act_left(s) == left_leg.act_left(s) * right_leg.act_left(s)

    if direct_ok != series_ok:
        raise InternalInvariantViolation(
            f"exponential-series routes disagree: identities say {direct_ok}, "
            f"doubling substitution says {series_ok}"
        )
    if direct_ok:
        return ExpReport(True)
    i, j = witness
    return ExpReport(False, witness, f"binomial({i + j},{i})*r_{i + j} != r_{i}*r_{j}")


def exp_mul(r: ExpSeries, r2: ExpSeries) -> ExpSeries:
    return r * r2


def exp_scale(a, r: ExpSeries) -> ExpSeries:
    return r.scale(a)


# ---------------------------------------------------------------------------
# divided power algebras of free modules
# ---------------------------------------------------------------------------


class DPAlgebra:
    """Divided powers of a free module of the given rank, truncated in degree.

    Elements are A-linear combinations of symbols gamma_b with b a multi-index
    over the module basis and |b| <= bound.  Products that would leave the
    truncation raise instead of silently dropping terms.
    """

    def __init__(self, alg: Algebra, rank: int, bound: int):
        if rank < 0 or bound < 0:
            raise ValueError("rank and bound must be nonnegative")
        self.alg = alg
        self.rank = rank
        self.bound = bound
        self.basis = [
            b
            for n in range(bound + 1)
            for b in sorted(_compositions(n, rank))
        ]

    def zero(self) -> "DPElement":
        return DPElement(self, {})

    def one(self) -> "DPElement":
        return DPElement(self, {(0,) * self.rank: self.alg.one})

    def gamma(self, b) -> "DPElement":
        b = tuple(b)
        if len(b) != self.rank or sum(b) > self.bound:
            raise ShapeMismatch(f"no basis symbol for index {b}")
        return DPElement(self, {b: self.alg.one})

    def gamma_of(self, n: int, coords) -> "DPElement":
        """Degree-n divided power of the module element with these coordinates."""
        coords = [self.alg.parse(c) if isinstance(c, str) else c for c in coords]
        if len(coords) != self.rank:
            raise ShapeMismatch(f"expected {self.rank} coordinates")
        if n > self.bound:
            raise DegreeCapExceeded(f"degree {n} exceeds the bound {self.bound}")
        terms = {}
        for b in _compositions(n, self.rank):
            c = self.alg.one
            for a, k in zip(coords, b):
                if k:
                    c = c * a ** k
            if not c.is_zero():
                terms[b] = c
        return DPElement(self, terms)

    def exp_of(self, coords) -> ExpSeries:
        """The universal exponential series of a module element."""
        sp = DPSpace(self)
        return ExpSeries(
            sp, self.alg, [self.gamma_of(n, coords) for n in range(self.bound + 1)]
        )

    def product_table(self):
        """All pairwise basis products that stay under the bound."""
        out = []
        for b in self.basis:
            for c in self.basis:
                if sum(b) + sum(c) > self.bound:
                    continue
                out.append((b, c, multi_binom(b, c), tuple(x + y for x, y in zip(b, c))))
        return out

    def __eq__(self, other):
        return (
            isinstance(other, DPAlgebra)
            and self.alg == other.alg
            and self.rank == other.rank
            and self.bound == other.bound
        )

    def __hash__(self):
        return hash((self.alg, self.rank, self.bound))

    def __repr__(self):
        return f"DPAlgebra(rank {self.rank}, bound {self.bound} over {self.alg.name})"


class DPElement:
    __slots__ = ("parent", "terms")

    def __init__(self, parent: DPAlgebra, terms: dict):
        self.parent = parent
        clean = {}
        for b, c in terms.items():
            b = tuple(b)
            if len(b) != parent.rank:
                raise ShapeMismatch(f"index {b} has the wrong length")
            if sum(b) > parent.bound:
                raise DegreeCapExceeded(f"index {b} exceeds the bound {parent.bound}")
            if not c.is_zero():
                clean[b] = c
        self.terms = clean

    def _compat(self, other):
        if not isinstance(other, DPElement) or other.parent != self.parent:
            raise ShapeMismatch("divided-power elements from different algebras")

    def __add__(self, other):
        self._compat(other)
        out = dict(self.terms)
        for b, c in other.terms.items():
            s = out.get(b, self.parent.alg.zero) + c
            if s.is_zero():
                out.pop(b, None)
            else:
                out[b] = s
        return DPElement(self.parent, out)

    def __neg__(self):
        return DPElement(self.parent, {b: -c for b, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Poly)):
            return self.scale(other)
        self._compat(other)
        alg = self.parent.alg
        out: dict = {}
        for b, c in self.terms.items():
            for b2, c2 in other.terms.items():
                coeff = c * c2
                if coeff.is_zero():
                    continue
                tgt = tuple(x + y for x, y in zip(b, b2))
                if sum(tgt) > self.parent.bound:
                    raise DegreeCapExceeded(
                        f"product gamma_{b} * gamma_{b2} leaves the degree bound "
                        f"{self.parent.bound}"
                    )
                coeff = coeff * multi_binom(b, b2)
                s = out.get(tgt, alg.zero) + coeff
                if s.is_zero():
                    out.pop(tgt, None)
                else:
                    out[tgt] = s
        return DPElement(self.parent, out)

    __rmul__ = __mul__

    def scale(self, a) -> "DPElement":
        if isinstance(a, int):
            a = self.parent.alg.const(a)
        return DPElement(self.parent, {b: a * c for b, c in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, b) -> Poly:
        return self.terms.get(tuple(b), self.parent.alg.zero)

    def degree(self):
        """Common total degree of the support; None for 0, error if mixed."""
        degs = {sum(b) for b in self.terms}
        if not degs:
            return None
        if len(degs) > 1:
            raise ShapeMismatch("element is not homogeneous")
        return degs.pop()

    def __eq__(self, other):
        if not isinstance(other, DPElement):
            return NotImplemented
        return self.parent == other.parent and self.terms == other.terms

    def __hash__(self):
        return hash((self.parent, frozenset((b, c) for b, c in self.terms.items())))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for b in sorted(self.terms, key=lambda t: (sum(t), t)):
            c = self.terms[b]
            sym = f"g{list(b)}" if any(b) else "1"
            cs = str(c)
            if cs == "1" and any(b):
                parts.append(sym)
            elif any(b):
                parts.append(f"({cs})*{sym}" if ("+" in cs or "-" in cs[1:]) else f"{cs}*{sym}")
            else:
                parts.append(cs)
        return " + ".join(parts)

    def __repr__(self):
        return f"<{self}>"


class DPSpace(CoeffSpace):
    """Series coefficients in a divided power algebra."""

    def __init__(self, parent: DPAlgebra):
        self.parent = parent

    def zero(self):
        return self.parent.zero()

    def one(self):
        return self.parent.one()

    def is_zero(self, v) -> bool:
        return v.is_zero()

    def add(self, u, v):
        return u + v

    def neg(self, v):
        return -v

    def mul(self, u, v):
        return u * v

    def scal_left(self, a, v):
        return v.scale(a)

    def scal_right(self, v, a):
        return v.scale(a)

    def coerce(self, v):
        if isinstance(v, DPElement) and v.parent == self.parent:
            return v
        raise ShapeMismatch(f"cannot use {v!r} as a divided-power coefficient")

    def __eq__(self, other):
        return isinstance(other, DPSpace) and self.parent == other.parent

    def __hash__(self):
        return hash(("DPSpace", self.parent))

    def __repr__(self):
        return f"DPSpace({self.parent!r})"


# ---------------------------------------------------------------------------
# symbols of integrable families, and the map onto graded operators
# ---------------------------------------------------------------------------


def chi(D: HSDerivation) -> ExpSeries:
    """Graded symbol series (1, symbol(D_1), .., symbol(D_m)) of a family D.

    Only the degree-1 layer of D matters up to the stated length: composing
    with any family whose degree-1 layer vanishes moves each D_i by terms of
    order < i, which die in the graded quotient.
    """
    if D.shape.nvars != 1:
        raise ShapeMismatch("symbol series wants a one-variable family")
    m = D.shape.height()
    sp = GrSpace(D.alg)
    coeffs = [D.coeff_op((i,)).symbol(i) for i in range(m + 1)]
    return ExpSeries(sp, D.alg, coeffs)


def vartheta_eval(el: DPElement, alg: Algebra) -> GrElement:
    """Image of a homogeneous divided-power element in the graded operators.

    The divided-power algebra must be built on the derivation module of a
    free polynomial ring (rank = number of variables, same coefficients);
    gamma_b then maps to the class of the divided-power derivative d[b].
    """
    if alg.rules:
        raise ShapeMismatch("graded comparison is for free polynomial rings")
    if el.parent.alg != alg or el.parent.rank != alg.nvars:
        raise ShapeMismatch(
            "divided-power algebra does not match the derivation module of the ring"
        )
    d = el.degree()
    if d is None:
        return GrElement(alg, None, {})
    terms: dict = {}
    for b, c in el.terms.items():
        for e, v in c.terms.items():
            key = (e, b)
            s = alg.base.add(terms.get(key, alg.base.zero), v)
            if alg.base.is_zero(s):
                terms.pop(key, None)
            else:
                terms[key] = s
    return GrElement(alg, d, terms)
