"""Truncated power series with exponents ranging over a downward-closed shape.

A series holds one coefficient per shape element; products are Cauchy
products, which close because shapes are downward closed.  Coefficients
live in a pluggable CoeffSpace so the same series type serves polynomial
coefficients, differential operators (composition as product), matrices of
operators, and divided-power graded algebras.
"""

from __future__ import annotations

import math

from .coideal import Coideal, sort_key
from .errors import (
    InternalInvariantViolation,
    NotAUnit,
    ParseError,
    ShapeMismatch,
)
from .rings import Algebra, Poly, TermParser, _expect_keys, tokenize


class CoeffSpace:
    """Interface for series coefficient domains.

    Required: zero/is_zero/add/neg/coerce.  Domains that are rings also
    provide one/mul; left and right scalar actions default to mul.
    """

    def zero(self):
        raise NotImplementedError

    def is_zero(self, v) -> bool:
        raise NotImplementedError

    def add(self, u, v):
        raise NotImplementedError

    def neg(self, v):
        raise NotImplementedError

    def coerce(self, v):
        return v

    def one(self):
        raise NotImplementedError(f"{self!r} has no multiplicative unit")

    def mul(self, u, v):
        raise NotImplementedError(f"{self!r} has no product")

    def scal_left(self, a, v):
        """Left action of a ring-of-definition element (a Poly) on a value."""
        raise NotImplementedError(f"{self!r} has no left scalar action")

    def scal_right(self, v, a):
        raise NotImplementedError(f"{self!r} has no right scalar action")

    def eq(self, u, v) -> bool:
        return self.is_zero(self.add(u, self.neg(v)))


class PolySpace(CoeffSpace):
    """Coefficients in a commutative Algebra."""

    def __init__(self, alg: Algebra):
        self.alg = alg

    def zero(self):
        return self.alg.zero

    def is_zero(self, v) -> bool:
        return v.is_zero()

    def add(self, u, v):
        return u + v

    def neg(self, v):
        return -v

    def mul(self, u, v):
        return u * v

    def one(self):
        return self.alg.one

    def scal_left(self, a, v):
        return a * v

    def scal_right(self, v, a):
        return v * a

    def coerce(self, v):
        if isinstance(v, str):
            return self.alg.parse(v)
        if isinstance(v, int):
            return self.alg.const(v)
        if isinstance(v, Poly) and v.alg == self.alg:
            return v
        raise ShapeMismatch(f"cannot use {v!r} as a coefficient over {self.alg.name}")

    def __eq__(self, other):
        return isinstance(other, PolySpace) and type(other) is type(self) and self.alg == other.alg

    def __hash__(self):
        return hash((type(self).__name__, self.alg))

    def __repr__(self):
        return f"PolySpace({self.alg.name})"


class ModuleSpace(CoeffSpace):
    """Coefficients in a free module A^rank, stored as tuples of Poly."""

    def __init__(self, alg: Algebra, rank: int):
        self.alg = alg
        self.rank = rank

    def zero(self):
        return (self.alg.zero,) * self.rank

    def is_zero(self, v) -> bool:
        return all(x.is_zero() for x in v)

    def add(self, u, v):
        return tuple(a + b for a, b in zip(u, v))

    def neg(self, v):
        return tuple(-a for a in v)

    def scal_left(self, a, v):
        return tuple(a * x for x in v)

    def scal_right(self, v, a):
        return tuple(x * a for x in v)

    def coerce(self, v):
        v = tuple(v)
        if len(v) != self.rank:
            raise ShapeMismatch(f"expected a vector of length {self.rank}")
        return tuple(self.alg.parse(x) if isinstance(x, str) else x for x in v)

    def __eq__(self, other):
        return (
            isinstance(other, ModuleSpace)
            and self.alg == other.alg
            and self.rank == other.rank
        )

    def __hash__(self):
        return hash(("ModuleSpace", self.alg, self.rank))

    def __repr__(self):
        return f"ModuleSpace({self.alg.name}^{self.rank})"


class TruncSeries:
    """Series over a shape: {multi-index in shape: coefficient}."""

    __slots__ = ("space", "shape", "coeffs")

    def __init__(self, space: CoeffSpace, shape: Coideal, coeffs: dict | None = None):
        self.space = space
        self.shape = shape
        clean = {}
        for a, v in (coeffs or {}).items():
            a = tuple(a)
            if a not in shape:
                raise ShapeMismatch(f"index {a} lies outside the shape")
            v = space.coerce(v)
            if not space.is_zero(v):
                clean[a] = v
        self.coeffs = clean

    # -- constructors -----------------------------------------------------

    @staticmethod
    def zero(space, shape) -> "TruncSeries":
        return TruncSeries(space, shape, {})

    @staticmethod
    def one(space, shape) -> "TruncSeries":
        z = (0,) * shape.nvars
        return TruncSeries(space, shape, {z: space.one()})

    @staticmethod
    def monomial(space, shape, alpha, v) -> "TruncSeries":
        return TruncSeries(space, shape, {tuple(alpha): v})

    # -- coefficient access --------------------------------------------------

    def coeff(self, alpha):
        return self.coeffs.get(tuple(alpha), self.space.zero())

    def constant_coeff(self):
        return self.coeff((0,) * self.shape.nvars)

    def support(self):
        return sorted(self.coeffs, key=sort_key)

    def order(self):
        """Least total degree with a nonzero coefficient; +inf for the zero series."""
        if not self.coeffs:
            return math.inf
        return min(sum(a) for a in self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    # -- arithmetic --------------------------------------------------------------

    def _compat(self, other):
        if not isinstance(other, TruncSeries):
            raise ShapeMismatch(f"expected a series, got {type(other).__name__}")
        if other.shape != self.shape:
            raise ShapeMismatch("series over different shapes")
        if other.space != self.space:
            raise ShapeMismatch("series over different coefficient spaces")

    def __add__(self, other):
        self._compat(other)
        out = dict(self.coeffs)
        sp = self.space
        for a, v in other.coeffs.items():
            s = sp.add(out.get(a, sp.zero()), v)
            if sp.is_zero(s):
                out.pop(a, None)
            else:
                out[a] = s
        return self._raw(out)

    def __neg__(self):
        return self._raw({a: self.space.neg(v) for a, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        """Cauchy product; the left factor's coefficients act on the left."""
        self._compat(other)
        sp = self.space
        out: dict = {}
        for b, u in self.coeffs.items():
            for g, v in other.coeffs.items():
                a = tuple(x + y for x, y in zip(b, g))
                if a not in self.shape:
                    continue
                w = sp.mul(u, v)
                s = sp.add(out.get(a, sp.zero()), w)
                if sp.is_zero(s):
                    out.pop(a, None)
                else:
                    out[a] = s
        return self._raw(out)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative series power; use invert first")
        out = TruncSeries.one(self.space, self.shape)
        b = self
        while k:
            if k & 1:
                out = out * b
            b = b * b
            k >>= 1
        return out

    def _raw(self, coeffs: dict) -> "TruncSeries":
        s = TruncSeries.__new__(TruncSeries)
        s.space = self.space
        s.shape = self.shape
        s.coeffs = coeffs
        return s

    def map_coeffs(self, fn, space: CoeffSpace | None = None) -> "TruncSeries":
        sp = space or self.space
        out = {}
        for a, v in self.coeffs.items():
            w = fn(v)
            if not sp.is_zero(w):
                out[a] = w
        return TruncSeries(sp, self.shape, out)

    def scale_left(self, c) -> "TruncSeries":
        c = self.space.coerce(c)
        return self.map_coeffs(lambda v: self.space.mul(c, v))

    def scale_right(self, c) -> "TruncSeries":
        c = self.space.coerce(c)
        return self.map_coeffs(lambda v: self.space.mul(v, c))

    def invert(self) -> "TruncSeries":
        """Inverse of a series with unit coefficient 1 at index 0.

        Solved triangularly by total degree; works verbatim when the
        coefficient product is noncommutative (composition), and the result
        is checked to be two-sided.
        """
        sp = self.space
        z = (0,) * self.shape.nvars
        one = sp.one()
        if not sp.eq(self.coeff(z), one):
            raise NotAUnit("inversion needs constant coefficient 1")
        inv = {z: one}
        for a in self.shape:
            if a == z:
                continue
            acc = sp.zero()
            for b, g in self.shape.splits(a):
                if b == z:
                    continue
                rb = self.coeffs.get(b)
                ug = inv.get(g)
                if rb is None or ug is None:
                    continue
                acc = sp.add(acc, sp.mul(rb, ug))
            acc = sp.neg(acc)
            if not sp.is_zero(acc):
                inv[a] = acc
        out = self._raw(inv)
        check = out * self
        if not (check - TruncSeries.one(sp, self.shape)).is_zero():
            raise InternalInvariantViolation("one-sided inverse is not two-sided")
        return out

    def truncate(self, shape2: Coideal) -> "TruncSeries":
        """Restrict to a smaller shape (drop coefficients outside it)."""
        if not shape2.is_subset(self.shape):
            raise ShapeMismatch("can only truncate to a sub-shape")
        return TruncSeries(
            self.space, shape2, {a: v for a, v in self.coeffs.items() if a in shape2}
        )

    def external(self, other: "TruncSeries") -> "TruncSeries":
        """Product in the concatenated shape: coefficient at (a, b) is r_a * r'_b."""
        if other.space != self.space:
            raise ShapeMismatch("series over different coefficient spaces")
        sp = self.space
        shape = self.shape.product(other.shape)
        out = {}
        for a, u in self.coeffs.items():
            for b, v in other.coeffs.items():
                w = sp.mul(u, v)
                if not sp.is_zero(w):
                    out[a + b] = w
        return TruncSeries(sp, shape, out)

    # -- comparison -------------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        if self.shape != other.shape or self.space != other.space:
            return False
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self.space.eq(self.coeff(a), other.coeff(a)) for a in keys)

    __hash__ = None

    def __repr__(self):
        return f"<series over {self.shape!r}: {self}>"

    def __str__(self):
        return format_series(self)


def pair(op_series: TruncSeries, elt_series: TruncSeries, out_space: CoeffSpace, apply_fn=None):
    """Apply a series of operators to a series of elements.

    Coefficient at alpha is the convolution sum of op_beta applied to
    elt_gamma over beta + gamma = alpha.  Operators apply via call syntax
    unless apply_fn is given.
    """
    if op_series.shape != elt_series.shape:
        raise ShapeMismatch("operator and element series over different shapes")
    ap = apply_fn or (lambda op, v: op(v))
    sp = out_space
    out: dict = {}
    for b, op in op_series.coeffs.items():
        for g, v in elt_series.coeffs.items():
            a = tuple(x + y for x, y in zip(b, g))
            if a not in op_series.shape:
                continue
            w = ap(op, v)
            s = sp.add(out.get(a, sp.zero()), w)
            if sp.is_zero(s):
                out.pop(a, None)
            else:
                out[a] = s
    return TruncSeries(sp, op_series.shape, out)


# ---------------------------------------------------------------------------
# text form
# ---------------------------------------------------------------------------


def series_varnames(nvars: int, prefix: str = "s"):
    return tuple(f"{prefix}{i + 1}" for i in range(nvars))


def parse_series(text: str, alg: Algebra, shape: Coideal, prefix: str = "s") -> TruncSeries:
    """Parse a polynomial-coefficient series like ``1 + s1 + x*s1^2``.

    Series exponents beyond the shape are silently dropped, matching the
    quotient semantics of truncation.
    """
    svars = series_varnames(shape.nvars, prefix)
    clash = set(svars) & set(alg.varnames)
    if clash:
        raise ParseError(f"algebra variables {sorted(clash)} collide with series variables")
    allvars = tuple(alg.varnames) + svars
    terms = TermParser(tokenize(text), allvars, alg.base).parse()
    n = alg.nvars
    coeffs: dict = {}
    for e, c in terms.items():
        a = e[n:]
        if a not in shape:
            continue
        cur = coeffs.setdefault(a, {})
        cur[e[:n]] = alg.base.add(cur.get(e[:n], alg.base.zero), c)
    sp = PolySpace(alg)
    out = {}
    for a, t in coeffs.items():
        p = alg.poly(t)
        if not p.is_zero():
            out[a] = p
    return TruncSeries(sp, shape, out)


def format_series(s: TruncSeries, prefix: str = "s") -> str:
    if not s.coeffs:
        return "0"
    svars = series_varnames(s.shape.nvars, prefix)
    parts = []
    for a in s.support():
        v = s.coeffs[a]
        mono = "*".join(
            f"{nm}^{k}" if k > 1 else nm for nm, k in zip(svars, a) if k > 0
        )
        vs = str(v)
        sign = "+"
        if vs.startswith("-") and " " not in vs:
            sign = "-"
            vs = str(-v) if hasattr(v, "__neg__") else vs[1:]
        if not mono:
            body = vs
        elif vs == "1":
            body = mono
        elif " " in vs:
            body = f"({vs})*{mono}"
        else:
            body = f"{vs}*{mono}"
        parts.append((sign, body))
    out = parts[0][1] if parts[0][0] == "+" else "-" + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def series_to_json(s: TruncSeries) -> dict:
    """Polynomial-coefficient series as a shape plus a sparse coefficient list."""
    if not isinstance(s.space, PolySpace):
        raise ShapeMismatch("only polynomial-coefficient series serialize to JSON")
    return {
        "shape": s.shape.to_json(),
        "coeffs": [{"alpha": list(a), "value": str(s.coeffs[a])} for a in s.support()],
    }


def series_from_json(obj, alg: Algebra) -> TruncSeries:
    if not isinstance(obj, dict):
        raise ParseError(f"series must be a JSON object, got {obj!r}")
    _expect_keys(obj, {"shape", "coeffs"})
    shape = Coideal.from_json(obj["shape"])
    entries = obj["coeffs"]
    if not isinstance(entries, list):
        raise ParseError("'coeffs' must be a list of {alpha, value} entries")
    sp = PolySpace(alg)
    out: dict = {}
    seen = set()
    for ent in entries:
        if not isinstance(ent, dict):
            raise ParseError(f"series coefficient must be an object, got {ent!r}")
        _expect_keys(ent, {"alpha", "value"})
        a = ent["alpha"]
        if (
            not isinstance(a, list)
            or len(a) != shape.nvars
            or not all(isinstance(k, int) and k >= 0 for k in a)
        ):
            raise ParseError(f"bad exponent {a!r} for a {shape.nvars}-variable series")
        a = tuple(a)
        if a not in shape:
            raise ParseError(f"exponent {list(a)} lies outside the shape")
        if a in seen:
            raise ParseError(f"duplicate exponent {list(a)}")
        seen.add(a)
        if not isinstance(ent["value"], str):
            raise ParseError("coefficient 'value' must be a polynomial string")
        p = alg.parse(ent["value"])
        if not p.is_zero():
            out[a] = p
    return TruncSeries(sp, shape, out)
