"""Differential operators with divided powers, in any characteristic.

Over a free polynomial algebra an operator is a finite sum of terms
``c * x^a * d[b]`` where ``d[b]`` is the divided-power derivative sending
x^m to binomial(m, b) x^(m-b) componentwise; these operators form a basis
in every characteristic (plain powers of d[1] do not, since d[1]^p = 0 in
characteristic p).  Over a finite-dimensional quotient algebra an operator
is a matrix acting on the monomial staircase basis, with its order
computed from the commutator criterion: order <= N iff commutators with
the generators have order <= N-1, and order <= 0 means multiplication by
an element.

The composition rule for divided-power terms is

    (x^a d[b]) (x^c d[d]) =
        sum over e <= min(b, c) of
        binom(c, e) binom(b - e + d, d) x^(a + c - e) d[b - e + d]

with all binomials componentwise, computed in Z and then mapped into the
base ring.
"""

from __future__ import annotations

import itertools
import math

from .coideal import sort_key
from .errors import OrderExceeded, ParseError, ShapeMismatch
from .rings import Algebra, Poly, TermParser, grevlex_key, tokenize
from .tseries import CoeffSpace, TruncSeries


def _comb(c, e) -> int:
    out = 1
    for ci, ei in zip(c, e):
        out *= math.comb(ci, ei)
        if out == 0:
            return 0
    return out


def _vadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _vsub(a, b):
    return tuple(x - y for x, y in zip(a, b))


class DpOp:
    """Operator on a free polynomial algebra in the divided-power basis."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: Algebra, terms: dict):
        if alg.rules:
            raise ShapeMismatch(
                "divided-power form needs a free algebra; use matrix operators on quotients"
            )
        self.alg = alg
        clean = {}
        base = alg.base
        for (a, b), c in terms.items():
            c = base.normalize(c)
            if c != 0:
                clean[(tuple(a), tuple(b))] = c
        self.terms = clean

    # -- linear structure ------------------------------------------------------

    def __add__(self, other):
        self._compat(other)
        base = self.alg.base
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = base.add(out.get(k, base.zero), c)
            if s == 0:
                out.pop(k, None)
            else:
                out[k] = s
        return DpOp(self.alg, out)

    def __neg__(self):
        base = self.alg.base
        return DpOp(self.alg, {k: base.neg(c) for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def _compat(self, other):
        if not isinstance(other, DpOp) or other.alg != self.alg:
            raise ShapeMismatch("operators over different algebras")

    def __rmul__(self, a):
        """Left multiplication by an algebra element: mult(a) composed with self."""
        if isinstance(a, int):
            a = self.alg.const(a)
        if not isinstance(a, Poly):
            return NotImplemented
        base = self.alg.base
        out: dict = {}
        for e, c0 in a.terms.items():
            for (x, b), c in self.terms.items():
                k = (_vadd(e, x), b)
                s = base.add(out.get(k, base.zero), base.mul(c0, c))
                if s == 0:
                    out.pop(k, None)
                else:
                    out[k] = s
        return DpOp(self.alg, out)

    # -- composition --------------------------------------------------------------

    def __mul__(self, other):
        """Composition self after other."""
        if isinstance(other, Poly):
            return self(other)
        self._compat(other)
        base = self.alg.base
        out: dict = {}
        for (a, b), c1 in self.terms.items():
            for (cc, d), c2 in other.terms.items():
                c12 = base.mul(c1, c2)
                for e in itertools.product(*(range(min(x, y) + 1) for x, y in zip(b, cc))):
                    w = _comb(cc, e) * _comb(_vadd(_vsub(b, e), d), d)
                    if w == 0:
                        continue
                    coef = base.mul(c12, base.from_int(w))
                    if coef == 0:
                        continue
                    k = (_vadd(a, _vsub(cc, e)), _vadd(_vsub(b, e), d))
                    s = base.add(out.get(k, base.zero), coef)
                    if s == 0:
                        out.pop(k, None)
                    else:
                        out[k] = s
        return DpOp(self.alg, out)

    def commutator(self, other):
        return self * other - other * self

    # -- action -------------------------------------------------------------------

    def __call__(self, p: Poly) -> Poly:
        if p.alg != self.alg:
            raise ShapeMismatch("polynomial from a different algebra")
        base = self.alg.base
        out: dict = {}
        for (a, b), c in self.terms.items():
            for m, cm in p.terms.items():
                w = _comb(m, b)
                if w == 0:
                    continue
                e = _vadd(a, _vsub(m, b))
                coef = base.mul(base.mul(c, cm), base.from_int(w))
                s = base.add(out.get(e, base.zero), coef)
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        return Poly(self.alg, out)

    # -- order and symbol ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def order(self):
        """Largest divided-power degree present; -1 for the zero operator."""
        return max((sum(b) for (_, b) in self.terms), default=-1)

    def symbol(self, d: int) -> "GrElement":
        """Class in the degree-d graded piece (top part of an order <= d operator)."""
        if self.order() > d:
            raise OrderExceeded(f"operator has order {self.order()} > {d}")
        terms = {k: c for k, c in self.terms.items() if sum(k[1]) == d}
        return GrElement(self.alg, d if terms else None, terms)

    def __eq__(self, other):
        if not isinstance(other, DpOp):
            return NotImplemented
        return self.alg == other.alg and self.terms == other.terms

    def __hash__(self):
        return hash((self.alg, frozenset(self.terms.items())))

    def __str__(self):
        return format_op_terms(self.terms, self.alg)

    def __repr__(self):
        return f"DpOp({self})"


class MatOp:
    """Operator on a finite-dimensional quotient, as a matrix on the staircase basis.

    Column j holds the coordinates of the image of the j-th staircase
    monomial.  Order comes from the commutator criterion and is +inf for
    endomorphisms that are not differential operators at all (possible on
    non-local quotients).
    """

    __slots__ = ("alg", "mat", "_order")

    def __init__(self, alg: Algebra, mat):
        self.alg = alg
        base = alg.base
        self.mat = tuple(tuple(base.normalize(v) for v in row) for row in mat)
        n = len(alg.monomial_basis())
        if len(self.mat) != n or any(len(r) != n for r in self.mat):
            raise ShapeMismatch(f"matrix must be {n}x{n} for {alg.name}")
        self._order = None

    @staticmethod
    def from_callable(alg: Algebra, fn) -> "MatOp":
        basis = alg.monomial_basis()
        index = {e: i for i, e in enumerate(basis)}
        n = len(basis)
        cols = []
        for e in basis:
            img = fn(Poly(alg, {e: alg.base.one}))
            col = [alg.base.zero] * n
            for m, c in img.terms.items():
                col[index[m]] = c
            cols.append(col)
        return MatOp(alg, [[cols[j][i] for j in range(n)] for i in range(n)])

    def _compat(self, other):
        if not isinstance(other, MatOp) or other.alg != self.alg:
            raise ShapeMismatch("operators over different algebras")

    def __add__(self, other):
        self._compat(other)
        base = self.alg.base
        return MatOp(
            self.alg,
            [
                [base.add(x, y) for x, y in zip(r1, r2)]
                for r1, r2 in zip(self.mat, other.mat)
            ],
        )

    def __neg__(self):
        base = self.alg.base
        return MatOp(self.alg, [[base.neg(x) for x in r] for r in self.mat])

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, a):
        if isinstance(a, int):
            a = self.alg.const(a)
        if not isinstance(a, Poly):
            return NotImplemented
        return mult_op(self.alg, a) * self

    def __mul__(self, other):
        if isinstance(other, Poly):
            return self(other)
        self._compat(other)
        base = self.alg.base
        n = len(self.mat)
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = base.zero
                for t in range(n):
                    acc = base.add(acc, base.mul(self.mat[i][t], other.mat[t][j]))
                row.append(acc)
            out.append(row)
        return MatOp(self.alg, out)

    def commutator(self, other):
        return self * other - other * self

    def __call__(self, p: Poly) -> Poly:
        if p.alg != self.alg:
            raise ShapeMismatch("polynomial from a different algebra")
        basis = self.alg.monomial_basis()
        index = {e: i for i, e in enumerate(basis)}
        base = self.alg.base
        out: dict = {}
        for m, c in p.terms.items():
            j = index[m]
            for i, e in enumerate(basis):
                v = self.mat[i][j]
                if v == 0:
                    continue
                s = base.add(out.get(e, base.zero), base.mul(c, v))
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        return Poly(self.alg, out)

    def is_zero(self) -> bool:
        return all(v == 0 for row in self.mat for v in row)

    def is_mult(self) -> bool:
        """Does this operator equal multiplication by its value at 1?"""
        return self == mult_op(self.alg, self(self.alg.one))

    def order(self):
        if self._order is None:
            self._order = _mat_order(self)
        return self._order

    def symbol(self, d: int) -> "MatGrElement":
        if self.order() > d:
            raise OrderExceeded(f"operator has order {self.order()} > {d}")
        return MatGrElement(self.alg, d, self)

    def __eq__(self, other):
        if not isinstance(other, MatOp):
            return NotImplemented
        return self.alg == other.alg and self.mat == other.mat

    def __hash__(self):
        return hash((self.alg, self.mat))

    def __repr__(self):
        return f"MatOp({self.alg.name}, order {self.order()})"


def _mat_order(op: MatOp):
    """Commutator-criterion order; +inf when the recursion does not bottom out."""
    alg = op.alg
    gens = [mult_op(alg, alg.var(j)) for j in range(alg.nvars)]
    cap = len(alg.monomial_basis()) ** 2 + 1
    memo: dict = {}

    def rec(p: MatOp, depth: int):
        if p.is_zero():
            return -1
        if p in memo:
            return memo[p]
        if depth > cap:
            return math.inf
        memo[p] = math.inf  # cycle guard: revisiting means unbounded order
        if p.is_mult():
            memo[p] = 0
            return 0
        sub = [rec(p.commutator(g), depth + 1) for g in gens]
        m = max(sub)
        out = math.inf if m is math.inf else m + 1
        memo[p] = out
        return out

    return rec(op, 0)


def identity_op(alg: Algebra):
    if alg.rules:
        basis = alg.monomial_basis()
        n = len(basis)
        one = alg.base.one
        zero = alg.base.zero
        return MatOp(alg, [[one if i == j else zero for j in range(n)] for i in range(n)])
    return DpOp(alg, {((0,) * alg.nvars, (0,) * alg.nvars): alg.base.one})


def zero_op(alg: Algebra):
    if alg.rules:
        n = len(alg.monomial_basis())
        zero = alg.base.zero
        return MatOp(alg, [[zero] * n for _ in range(n)])
    return DpOp(alg, {})


def mult_op(alg: Algebra, a: Poly):
    """Multiplication by a as an operator."""
    if isinstance(a, str):
        a = alg.parse(a)
    if alg.rules:
        return MatOp.from_callable(alg, lambda p: a * p)
    z = (0,) * alg.nvars
    return DpOp(alg, {(e, z): c for e, c in a.terms.items()})


def dp_derivative(alg: Algebra, var: int, k: int):
    """The k-th divided-power derivative in one chosen variable.

    On a free algebra this is the basis operator d[k e_var]; on a
    finite-dimensional quotient it is the matrix acting the same way on
    staircase monomials (a basis-dependent lift, still useful as input).
    """
    b = [0] * alg.nvars
    b[var] = k
    b = tuple(b)
    if not alg.rules:
        return DpOp(alg, {((0,) * alg.nvars, b): alg.base.one})
    base = alg.base

    def fn(p: Poly) -> Poly:
        out = {}
        for m, c in p.terms.items():
            w = _comb(m, b)
            if w == 0:
                continue
            out[_vsub(m, b)] = base.mul(c, base.from_int(w))
        return alg.poly(out)

    return MatOp.from_callable(alg, fn)


def operator_from_callable(alg: Algebra, fn, max_order: int, check_layers: int = 2):
    """Reconstruct an operator from its action (free: divided-power form).

    On a free algebra: interpolate coefficients from the values on
    monomials of degree <= max_order (the system is triangular in the
    staircase order), then verify the reconstruction against fn on all
    monomials of degree <= max_order + check_layers and raise
    OrderExceeded on any residual.  On a finite-dimensional quotient the
    matrix of fn is returned directly.
    """
    if alg.rules:
        return MatOp.from_callable(alg, fn)
    coeffs: dict = {}
    monos = sorted(
        _degree_ball(alg.nvars, max_order), key=lambda e: (sum(e), e)
    )
    base = alg.base
    for beta in monos:
        img = fn(Poly(alg, {beta: base.one}))
        acc = dict(img.terms)
        for b, a_b in coeffs.items():
            w = _comb(beta, b)
            if w == 0:
                continue
            shift = _vsub(beta, b)
            for e, c in a_b.items():
                g = _vadd(e, shift)
                s = base.sub(acc.get(g, base.zero), base.mul(c, base.from_int(w)))
                if s == 0:
                    acc.pop(g, None)
                else:
                    acc[g] = s
        if acc:
            coeffs[beta] = acc
    terms = {}
    for b, a_b in coeffs.items():
        for e, c in a_b.items():
            terms[(e, b)] = c
    op = DpOp(alg, terms)
    for beta in _degree_ball(alg.nvars, max_order + check_layers):
        if sum(beta) <= max_order:
            continue
        mono = Poly(alg, {beta: base.one})
        if op(mono) != fn(mono):
            raise OrderExceeded(
                f"action disagrees on degree {sum(beta)} monomial; "
                f"order exceeds {max_order}"
            )
    return op


def _degree_ball(nvars: int, bound: int):
    out = []
    for e in itertools.product(range(bound + 1), repeat=nvars):
        if sum(e) <= bound:
            out.append(e)
    return sorted(out, key=lambda e: (sum(e), e))


# ---------------------------------------------------------------------------
# graded pieces
# ---------------------------------------------------------------------------


class GrElement:
    """Homogeneous element of the graded algebra of operators on a free algebra.

    Stored as coset representatives {(a, b): coeff} with |b| equal to the
    degree.  The product lifts both sides to operators, composes, and
    keeps the top-degree part, so it never assumes commutativity.
    """

    __slots__ = ("alg", "degree", "terms")

    def __init__(self, alg: Algebra, degree, terms: dict):
        self.alg = alg
        clean = {}
        for (a, b), c in terms.items():
            c = alg.base.normalize(c)
            if c != 0:
                clean[(tuple(a), tuple(b))] = c
        for (_, b) in clean:
            if sum(b) != degree:
                raise ShapeMismatch("graded element with mixed degrees")
        self.degree = degree if clean else None
        self.terms = clean

    def is_zero(self) -> bool:
        return not self.terms

    def _lift(self) -> DpOp:
        return DpOp(self.alg, dict(self.terms))

    def __add__(self, other):
        if other.alg != self.alg:
            raise ShapeMismatch("graded elements over different algebras")
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.degree != other.degree:
            raise ShapeMismatch("cannot add graded elements of different degrees")
        s = self._lift() + other._lift()
        return GrElement(self.alg, self.degree, s.terms)

    def __neg__(self):
        return GrElement(self.alg, self.degree, (-self._lift()).terms)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, GrElement):
            if self.is_zero() or other.is_zero():
                return GrElement(self.alg, None, {})
            prod = self._lift() * other._lift()
            return prod.symbol(self.degree + other.degree)
        return NotImplemented

    def scale(self, a: Poly) -> "GrElement":
        return GrElement(self.alg, self.degree, (a * self._lift()).terms)

    def __eq__(self, other):
        if not isinstance(other, GrElement):
            return NotImplemented
        return self.alg == other.alg and self.terms == other.terms

    def __hash__(self):
        return hash((self.alg, self.degree, frozenset(self.terms.items())))

    def __str__(self):
        return format_op_terms(self.terms, self.alg)

    def __repr__(self):
        return f"GrElement(deg {self.degree}: {self})"


class MatGrElement:
    """Graded class of a matrix operator: a representative plus a degree.

    Equality holds when the difference has order below the degree, which
    the commutator criterion decides exactly.
    """

    __slots__ = ("alg", "degree", "rep")

    def __init__(self, alg: Algebra, degree, rep: MatOp | None):
        self.alg = alg
        self.degree = degree
        self.rep = rep if rep is not None else zero_op(alg)

    def is_zero(self) -> bool:
        return self.rep.order() < (self.degree if self.degree is not None else 0)

    def __add__(self, other):
        if self.degree is None:
            return other
        if other.degree is None:
            return self
        if self.degree != other.degree:
            raise ShapeMismatch("cannot add graded elements of different degrees")
        return MatGrElement(self.alg, self.degree, self.rep + other.rep)

    def __neg__(self):
        return MatGrElement(self.alg, self.degree, -self.rep)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, MatGrElement):
            if self.degree is None or other.degree is None:
                return MatGrElement(self.alg, None, None)
            return MatGrElement(self.alg, self.degree + other.degree, self.rep * other.rep)
        return NotImplemented

    def scale(self, a: Poly) -> "MatGrElement":
        return MatGrElement(self.alg, self.degree, mult_op(self.alg, a) * self.rep)

    def __eq__(self, other):
        if not isinstance(other, MatGrElement):
            return NotImplemented
        if self.alg != other.alg:
            return False
        if self.is_zero() or other.is_zero():
            return self.is_zero() and other.is_zero()
        if self.degree != other.degree:
            return False
        return (self.rep - other.rep).order() < self.degree

    __hash__ = None

    def __repr__(self):
        return f"MatGrElement(deg {self.degree})"


# ---------------------------------------------------------------------------
# coefficient spaces for series of operators / graded elements
# ---------------------------------------------------------------------------


class OpSpace(CoeffSpace):
    """Series coefficients that are differential operators (product = composition)."""

    def __init__(self, alg: Algebra):
        self.alg = alg

    def zero(self):
        return zero_op(self.alg)

    def one(self):
        return identity_op(self.alg)

    def is_zero(self, v) -> bool:
        return v.is_zero()

    def add(self, u, v):
        return u + v

    def neg(self, v):
        return -v

    def mul(self, u, v):
        return u * v

    def scal_left(self, a, v):
        return a * v

    def scal_right(self, v, a):
        return v * mult_op(self.alg, a)

    def coerce(self, v):
        if isinstance(v, str):
            return parse_operator(v, self.alg)
        if isinstance(v, (DpOp, MatOp)) and v.alg == self.alg:
            return v
        if isinstance(v, Poly) and v.alg == self.alg:
            return mult_op(self.alg, v)
        raise ShapeMismatch(f"cannot use {v!r} as an operator over {self.alg.name}")

    def __eq__(self, other):
        return isinstance(other, OpSpace) and self.alg == other.alg

    def __hash__(self):
        return hash(("OpSpace", self.alg))

    def __repr__(self):
        return f"OpSpace({self.alg.name})"


class GrSpace(CoeffSpace):
    """Series coefficients in the associated graded algebra of operators."""

    def __init__(self, alg: Algebra):
        self.alg = alg
        self.matrix_flavor = bool(alg.rules)

    def zero(self):
        if self.matrix_flavor:
            return MatGrElement(self.alg, None, None)
        return GrElement(self.alg, None, {})

    def one(self):
        if self.matrix_flavor:
            return MatGrElement(self.alg, 0, identity_op(self.alg))
        z = (0,) * self.alg.nvars
        return GrElement(self.alg, 0, {(z, z): self.alg.base.one})

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
        if isinstance(v, (GrElement, MatGrElement)) and v.alg == self.alg:
            return v
        raise ShapeMismatch(f"cannot use {v!r} as a graded coefficient")

    def __eq__(self, other):
        return isinstance(other, GrSpace) and self.alg == other.alg

    def __hash__(self):
        return hash(("GrSpace", self.alg))

    def __repr__(self):
        return f"GrSpace({self.alg.name})"


def total_symbol(series: TruncSeries) -> TruncSeries:
    """Symbol of a series of operators, coefficient by coefficient.

    The coefficient at alpha must have order at most |alpha| (checked
    here, lazily); its degree-|alpha| class becomes the new coefficient.
    """
    if not isinstance(series.space, OpSpace):
        raise ShapeMismatch("total_symbol expects a series of operators")
    alg = series.space.alg
    gsp = GrSpace(alg)
    out = {}
    for alpha, op in series.coeffs.items():
        d = sum(alpha)
        if op.order() > d:
            raise OrderExceeded(
                f"coefficient at {alpha} has order {op.order()} > {d}"
            )
        g = op.symbol(d)
        if not g.is_zero():
            out[alpha] = g
    return TruncSeries(gsp, series.shape, out)


def symbol_compatible(phi, series: TruncSeries) -> bool:
    """Dual-route check: symbol of (phi acting on r) against (linear part of
    phi) acting on the symbol of r."""
    lhs = total_symbol(phi.act_left(series))
    rhs = phi.init_part().act_left(total_symbol(series))
    return lhs == rhs


# ---------------------------------------------------------------------------
# parsing and printing
# ---------------------------------------------------------------------------


def format_op_terms(terms: dict, alg: Algebra) -> str:
    if not terms:
        return "0"
    base = alg.base

    def key(k):
        a, b = k
        return (grevlex_key(b), grevlex_key(a))

    parts = []
    for a, b in sorted(terms, key=key):
        c = terms[(a, b)]
        pieces = []
        if c != base.one or (sum(a) == 0 and sum(b) == 0):
            pieces.append(base.scalar_str(c))
        mono = "*".join(
            f"{nm}^{k}" if k > 1 else nm for nm, k in zip(alg.varnames, a) if k > 0
        )
        if mono:
            pieces.append(mono)
        if sum(b) > 0:
            pieces.append(f"d[{','.join(str(x) for x in b)}]")
        parts.append("*".join(pieces))
    return " + ".join(parts)


class _OpParser(TermParser):
    """Parses operator expressions like ``x^2*d[2] + d[1,0]``.

    The product here is composition, so factors are kept in order instead
    of being merged commutatively; each parse node is a DiffOp.
    """

    def __init__(self, tokens, alg: Algebra):
        super().__init__(tokens, alg.varnames, alg.base)
        self.alg = alg

    def term(self):
        t = self.factor()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            _, op = self.next()
            u = self.factor()
            if op == "/":
                c = u(self.alg.one)
                if not (c.is_constant() and u == mult_op(self.alg, c)):
                    raise ParseError("operators can only be divided by constant units")
                try:
                    inv = self.alg.base.inv(c.constant_term())
                except Exception:
                    raise ParseError(
                        f"cannot divide by non-unit constant {c}"
                    ) from None
                u = mult_op(self.alg, self.alg.const(inv))
            t = t * u
        return t

    def factor(self):
        if self.peek() == ("op", "-"):
            self.next()
            return -self.factor()
        return self.power()

    def power(self):
        t = self.atom()
        if self.peek() == ("op", "^"):
            self.next()
            kind, val = self.next()
            if kind != "num":
                raise ParseError(f"exponent must be a literal integer, got {val!r}")
            out = identity_op(self.alg)
            for _ in range(val):
                out = out * t
            return out
        return t

    def expr(self):
        t = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            _, op = self.next()
            u = self.term()
            t = t - u if op == "-" else t + u
        return t

    def atom(self):
        kind, val = self.next()
        if kind == "num":
            return mult_op(self.alg, self.alg.const(val))
        if kind == "name":
            if val == "d":
                self.expect_op("[")
                exps = [self._nat()]
                while self.peek() == ("op", ","):
                    self.next()
                    exps.append(self._nat())
                self.expect_op("]")
                if len(exps) != self.alg.nvars:
                    raise ParseError(
                        f"d[...] needs {self.alg.nvars} entries, got {len(exps)}"
                    )
                if not self.alg.rules:
                    z = (0,) * self.alg.nvars
                    return DpOp(self.alg, {(z, tuple(exps)): self.alg.base.one})
                op = identity_op(self.alg)
                for var, k in enumerate(exps):
                    if k:
                        op = op * dp_derivative(self.alg, var, k)
                return op
            if val in self.alg.varnames:
                return mult_op(self.alg, self.alg.var(val))
            raise ParseError(f"unknown name {val!r} in operator expression")
        if (kind, val) == ("op", "("):
            t = self.expr()
            self.expect_op(")")
            return t
        raise ParseError(f"unexpected token {val!r} in operator expression")

    def _nat(self) -> int:
        kind, val = self.next()
        if kind != "num":
            raise ParseError(f"expected an integer inside d[...], got {val!r}")
        return val


def parse_operator(text: str, alg: Algebra):
    return _OpParser(tokenize(text), alg).parse()
