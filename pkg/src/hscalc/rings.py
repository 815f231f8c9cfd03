"""Exact base rings, finitely presented algebras, and derivations.

Scalars are plain ``int`` (for Z and Z/n) or ``fractions.Fraction`` (for Q),
so everything downstream is exact.  An :class:`Algebra` is a commutative
polynomial ring over such a base modulo a list of relations; elements are
kept in normal form with respect to a confluent rewriting system fixed at
construction time (a reduced Groebner basis in grevlex order when the base
is a field, a triangular-monic system otherwise).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .config import degree_cap as _default_cap
from .errors import (
    InvalidDerivation,
    NonConfluent,
    NonUnitDivision,
    ParseError,
    PresentationError,
)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


class BaseRing:
    """Arithmetic context for scalar coefficients: Z, Q, or Z/n."""

    def __init__(self, kind: str, n: int | None = None):
        if kind not in ("Z", "Q", "Zmod"):
            raise ValueError(f"unknown base ring kind {kind!r}")
        if kind == "Zmod":
            if not isinstance(n, int) or n < 2:
                raise ValueError("modulus must be an integer >= 2")
        else:
            n = None
        self.kind = kind
        self.n = n
        self.is_field = kind == "Q" or (kind == "Zmod" and is_prime(n))
        self.characteristic = n if kind == "Zmod" else 0

    # -- canonical values --------------------------------------------------

    def normalize(self, v):
        if self.kind == "Zmod":
            if isinstance(v, Fraction):
                return self.div(self.normalize(v.numerator), self.normalize(v.denominator))
            return int(v) % self.n
        if self.kind == "Q":
            return Fraction(v)
        if isinstance(v, Fraction):
            if v.denominator != 1:
                raise NonUnitDivision(f"{v} is not an integer")
            return int(v)
        return int(v)

    @property
    def zero(self):
        return Fraction(0) if self.kind == "Q" else 0

    @property
    def one(self):
        return Fraction(1) if self.kind == "Q" else 1

    def from_int(self, c: int):
        if self.kind == "Zmod":
            return c % self.n
        return Fraction(c) if self.kind == "Q" else c

    # -- arithmetic ----------------------------------------------------------

    def add(self, a, b):
        return (a + b) % self.n if self.kind == "Zmod" else a + b

    def sub(self, a, b):
        return (a - b) % self.n if self.kind == "Zmod" else a - b

    def neg(self, a):
        return (-a) % self.n if self.kind == "Zmod" else -a

    def mul(self, a, b):
        return (a * b) % self.n if self.kind == "Zmod" else a * b

    def is_zero(self, a) -> bool:
        return a == 0

    def is_unit(self, a) -> bool:
        if self.kind == "Q":
            return a != 0
        if self.kind == "Z":
            return a in (1, -1)
        from math import gcd

        return gcd(a, self.n) == 1

    def inv(self, a):
        if not self.is_unit(a):
            raise NonUnitDivision(f"{a} is not a unit in {self}")
        if self.kind == "Q":
            return Fraction(1) / a
        if self.kind == "Z":
            return a
        return pow(a, -1, self.n)

    def div(self, a, b):
        """Exact division a / b; requires b to be a unit (or an exact integer divisor over Z)."""
        if self.is_unit(b):
            return self.mul(a, self.inv(b))
        if self.kind == "Z" and b != 0 and a % b == 0:
            return a // b
        raise NonUnitDivision(f"cannot divide by {b} in {self}")

    # -- misc ----------------------------------------------------------------

    def elements(self):
        if self.kind != "Zmod":
            raise ValueError(f"{self} is infinite")
        return range(self.n)

    def random_element(self, rng, bound: int = 5):
        if self.kind == "Zmod":
            return rng.randrange(self.n)
        if self.kind == "Z":
            return rng.randint(-bound, bound)
        return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))

    def parse_scalar(self, text: str):
        text = text.strip()
        m = re.fullmatch(r"(-?\d+)(?:/(\d+))?", text)
        if not m:
            raise ParseError(f"bad scalar {text!r}")
        num = int(m.group(1))
        if m.group(2) is None:
            return self.from_int(num)
        return self.div(self.from_int(num), self.from_int(int(m.group(2))))

    def scalar_str(self, v) -> str:
        return str(v)

    @property
    def name(self) -> str:
        if self.kind == "Zmod":
            return f"F{self.n}" if self.is_field else f"Z/{self.n}"
        return self.kind

    def __repr__(self):
        return f"BaseRing({self.name})"

    def __eq__(self, other):
        return isinstance(other, BaseRing) and (self.kind, self.n) == (other.kind, other.n)

    def __hash__(self):
        return hash((self.kind, self.n))

    def to_json(self):
        if self.kind == "Zmod":
            if self.is_field:
                return {"kind": "Fp", "p": self.n}
            return {"kind": "Zn", "n": self.n}
        return {"kind": self.kind}

    @staticmethod
    def from_json(obj) -> "BaseRing":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ParseError(f"base ring must be an object with a 'kind' field, got {obj!r}")
        kind = obj["kind"]
        if kind in ("Z", "Q"):
            _expect_keys(obj, {"kind"})
            return BaseRing(kind)
        if kind == "Fp":
            _expect_keys(obj, {"kind", "p"})
            p = obj["p"]
            if not isinstance(p, int) or not is_prime(p):
                raise ParseError(f"Fp needs a prime p, got {p!r} (use kind 'Zn' for composite moduli)")
            return BaseRing("Zmod", p)
        if kind == "Zn":
            _expect_keys(obj, {"kind", "n"})
            n = obj["n"]
            if not isinstance(n, int) or n < 2:
                raise ParseError(f"Zn needs an integer modulus >= 2, got {n!r}")
            return BaseRing("Zmod", n)
        raise ParseError(f"unknown base ring kind {kind!r}")


ZZ = BaseRing("Z")
QQ = BaseRing("Q")


def GF(p: int) -> BaseRing:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    return BaseRing("Zmod", p)


def integers_mod(n: int) -> BaseRing:
    return BaseRing("Zmod", n)


def base_ring_from_shorthand(text: str) -> BaseRing:
    """Accept 'Z', 'Q', 'F<p>' or 'Z/<n>'."""
    text = text.strip()
    if text == "Z":
        return ZZ
    if text == "Q":
        return QQ
    m = re.fullmatch(r"F(\d+)", text)
    if m:
        p = int(m.group(1))
        if not is_prime(p):
            raise ParseError(f"F{p}: {p} is not prime (write Z/{p} for the non-field ring)")
        return BaseRing("Zmod", p)
    m = re.fullmatch(r"Z/(\d+)", text)
    if m:
        return BaseRing("Zmod", int(m.group(1)))
    raise ParseError(f"unknown base ring shorthand {text!r}")


def _expect_keys(obj: dict, required: set, optional: set = frozenset()):
    keys = set(obj)
    missing = required - keys
    extra = keys - required - optional
    if missing:
        raise ParseError(f"missing fields {sorted(missing)} in {obj!r}")
    if extra:
        raise ParseError(f"unknown fields {sorted(extra)} in {obj!r}")


# ---------------------------------------------------------------------------
# monomial order and raw term-dict arithmetic
# ---------------------------------------------------------------------------


def grevlex_key(e):
    """Ascending sort key for graded reverse lexicographic order."""
    return (sum(e), tuple(-x for x in reversed(e)))


def _tadd(a: dict, b: dict, base: BaseRing) -> dict:
    out = dict(a)
    for e, c in b.items():
        s = base.add(out.get(e, base.zero), c)
        if s == 0:
            out.pop(e, None)
        else:
            out[e] = s
    return out


def _tscale(a: dict, c, base: BaseRing) -> dict:
    if c == 0:
        return {}
    return {e: base.mul(v, c) for e, v in a.items()}


def _tmul(a: dict, b: dict, base: BaseRing) -> dict:
    out: dict = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            s = base.add(out.get(e, base.zero), base.mul(c1, c2))
            if s == 0:
                out.pop(e, None)
            else:
                out[e] = s
    return out


def _lead(terms: dict):
    return max(terms, key=grevlex_key)


def _divides(d, e) -> bool:
    return all(x <= y for x, y in zip(d, e))


def _reduce(terms: dict, rules, base: BaseRing) -> dict:
    """Fully reduce a term dict by rules [(lead_exp, replacement_dict)]."""
    work = dict(terms)
    while True:
        hit = None
        for e in sorted(work, key=grevlex_key, reverse=True):
            for lead, rest in rules:
                if _divides(lead, e):
                    hit = (e, lead, rest)
                    break
            if hit:
                break
        if hit is None:
            return work
        e, lead, rest = hit
        c = work.pop(e)
        shift = tuple(x - y for x, y in zip(e, lead))
        for f, d in rest.items():
            g = tuple(x + y for x, y in zip(shift, f))
            s = base.add(work.get(g, base.zero), base.mul(c, d))
            if s == 0:
                work.pop(g, None)
            else:
                work[g] = s


def _buchberger(gens, base: BaseRing, cap: int):
    """Reduced Groebner basis in grevlex order over a field base."""
    basis = []
    for g in gens:
        if g:
            lc = g[_lead(g)]
            basis.append(_tscale(g, base.inv(lc), base))
    pairs = [(i, j) for i in range(len(basis)) for j in range(i + 1, len(basis))]
    seen = 0
    while pairs:
        pairs.sort(
            key=lambda ij: grevlex_key(
                tuple(max(x, y) for x, y in zip(_lead(basis[ij[0]]), _lead(basis[ij[1]])))
            )
        )
        i, j = pairs.pop(0)
        seen += 1
        if seen > 2000:
            raise NonConfluent("completion did not terminate within the pair budget", pair=(i, j))
        li, lj = _lead(basis[i]), _lead(basis[j])
        lcm = tuple(max(x, y) for x, y in zip(li, lj))
        if all(x + y == z for x, y, z in zip(li, lj, lcm)):
            continue  # coprime leading monomials: S-polynomial reduces to zero
        si = {tuple(a + b for a, b in zip(e, (x - y for x, y in zip(lcm, li)))): c for e, c in basis[i].items()}
        sj = {tuple(a + b for a, b in zip(e, (x - y for x, y in zip(lcm, lj)))): c for e, c in basis[j].items()}
        s = _tadd(si, _tscale(sj, base.from_int(-1), base), base)
        rules = [(_lead(g), _rest_of(g, base)) for g in basis]
        r = _reduce(s, rules, base)
        if r:
            lead = _lead(r)
            if sum(lead) > cap:
                raise NonConfluent(
                    f"completion produced a relation of degree {sum(lead)} beyond the cap {cap}",
                    pair=(i, j),
                    degree=sum(lead),
                )
            basis.append(_tscale(r, base.inv(r[lead]), base))
            k = len(basis) - 1
            pairs.extend((m, k) for m in range(k))
    # minimalize and reduce tails
    basis.sort(key=lambda g: grevlex_key(_lead(g)))
    minimal = []
    for g in basis:
        if not any(_divides(_lead(h), _lead(g)) for h in minimal):
            minimal.append(g)
    reduced = []
    for idx, g in enumerate(minimal):
        others = minimal[:idx] + minimal[idx + 1 :]
        rules = [(_lead(h), _rest_of(h, base)) for h in others]
        r = _reduce(g, rules, base)
        if r:
            reduced.append(_tscale(r, base.inv(r[_lead(r)]), base))
    reduced.sort(key=lambda g: grevlex_key(_lead(g)))
    return reduced


def _rest_of(g: dict, base: BaseRing) -> dict:
    """The rewriting replacement for a monic poly g: lead maps to -(g - lead)."""
    lead = _lead(g)
    return {e: base.neg(c) for e, c in g.items() if e != lead}


# ---------------------------------------------------------------------------
# Poly
# ---------------------------------------------------------------------------


class Poly:
    """Element of an Algebra, stored as {exponent tuple: nonzero coeff} in normal form."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: "Algebra", terms: dict):
        self.alg = alg
        self.terms = terms

    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.alg != self.alg:
                raise ValueError("polynomials from different algebras")
            return other
        if isinstance(other, (int, Fraction)):
            return self.alg.const(other)
        return None

    def __add__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        return Poly(self.alg, _tadd(self.terms, q.terms, self.alg.base))

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.alg, _tscale(self.terms, self.alg.base.from_int(-1), self.alg.base))

    def __sub__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        return self + (-q)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        return Poly(self.alg, self.alg.nf(_tmul(self.terms, q.terms, self.alg.base)))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        out = self.alg.one
        b = self
        while k:
            if k & 1:
                out = out * b
            b = b * b
            k >>= 1
        return out

    def __eq__(self, other):
        q = self._coerce(other) if not isinstance(other, Poly) else other
        if q is None:
            return NotImplemented
        return self.alg == q.alg and self.terms == q.terms

    def __hash__(self):
        return hash((self.alg, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree of the normal form; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def coeff(self, exps):
        return self.terms.get(tuple(exps), self.alg.base.zero)

    def constant_term(self):
        return self.terms.get(self.alg.zero_exp, self.alg.base.zero)

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def partial(self, j: int) -> "Poly":
        """Formal partial derivative with respect to generator j (on the representative)."""
        base = self.alg.base
        out: dict = {}
        for e, c in self.terms.items():
            if e[j] == 0:
                continue
            f = e[:j] + (e[j] - 1,) + e[j + 1 :]
            s = base.add(out.get(f, base.zero), base.mul(c, base.from_int(e[j])))
            if s == 0:
                out.pop(f, None)
            else:
                out[f] = s
        return Poly(self.alg, self.alg.nf(out))

    def __str__(self):
        return format_terms(self.terms, self.alg.varnames, self.alg.base)

    def __repr__(self):
        return f"<{self} in {self.alg.name}>"


def format_terms(terms: dict, varnames, base: BaseRing) -> str:
    if not terms:
        return "0"
    parts = []
    for idx, e in enumerate(sorted(terms, key=grevlex_key, reverse=True)):
        c = terms[e]
        sign = ""
        if (isinstance(c, (int, Fraction)) and base.kind != "Zmod") and c < 0:
            sign = "-"
            c = -c
        mono = "*".join(
            f"{nm}^{k}" if k > 1 else nm for nm, k in zip(varnames, e) if k > 0
        )
        if mono and c == base.one:
            body = mono
        elif mono:
            body = f"{base.scalar_str(c)}*{mono}"
        else:
            body = base.scalar_str(c)
        if idx == 0:
            parts.append(sign + body)
        else:
            parts.append(("- " if sign else "+ ") + body)
    return " ".join(parts)


# ---------------------------------------------------------------------------
# Algebra
# ---------------------------------------------------------------------------

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*\Z")
_RESERVED_RE = re.compile(r"[st]\d+\Z")


@dataclass
class ConfluenceReport:
    ok: bool
    message: str
    rules: list


class Algebra:
    """Finitely presented commutative algebra base[x_1..x_n] / (relations).

    Relations may be strings (parsed over the free algebra) or Poly values.
    Over a field base the presentation is completed to a reduced Groebner
    basis, with NonConfluent raised past the degree cap; over Z or a
    composite Z/n only triangular-monic systems are accepted (each relation
    has unit leading coefficient and a pure-power leading monomial in a
    distinct variable), which are confluent as given.
    """

    def __init__(self, base: BaseRing, varnames, relations=(), *, cap: int | None = None):
        if isinstance(varnames, str):
            varnames = varnames.split()
        self.base = base
        self.varnames = tuple(varnames)
        for nm in self.varnames:
            if not _IDENT_RE.match(nm):
                raise PresentationError(f"bad variable name {nm!r}")
            if _RESERVED_RE.match(nm):
                raise PresentationError(
                    f"variable name {nm!r} is reserved for series variables"
                )
        if len(set(self.varnames)) != len(self.varnames):
            raise PresentationError("duplicate variable names")
        self.nvars = len(self.varnames)
        self.zero_exp = (0,) * self.nvars
        self.cap = _default_cap() if cap is None else cap

        rel_terms = []
        for r in relations:
            if isinstance(r, str):
                rel_terms.append(_parse_terms(r, self.varnames, base))
            elif isinstance(r, Poly):
                rel_terms.append(dict(r.terms))
            else:
                raise PresentationError(f"relation must be a string or Poly, got {type(r)}")
        rel_terms = [t for t in rel_terms if t]
        self.relation_terms = rel_terms

        if not rel_terms:
            self.rules = []
        elif base.is_field:
            gb = _buchberger(rel_terms, base, self.cap)
            self.rules = [(_lead(g), _rest_of(g, base)) for g in gb]
        else:
            self.rules = self._triangular_rules(rel_terms)
        self.rules.sort(key=lambda r: grevlex_key(r[0]))

        self.zero = Poly(self, {})
        self.one = Poly(self, {self.zero_exp: base.one})

    def _triangular_rules(self, rel_terms):
        rules = []
        used_vars = set()
        for t in rel_terms:
            lead = _lead(t)
            lc = t[lead]
            if not self.base.is_unit(lc):
                raise PresentationError(
                    f"relation {format_terms(t, self.varnames, self.base)} is not monic "
                    f"(leading coefficient {lc} is not a unit over {self.base.name})"
                )
            nz = [i for i, x in enumerate(lead) if x > 0]
            if len(nz) != 1:
                raise PresentationError(
                    f"over {self.base.name} each relation needs a pure-power leading "
                    f"monomial; got {format_terms({lead: self.base.one}, self.varnames, self.base)}"
                )
            if nz[0] in used_vars:
                raise PresentationError(
                    f"two relations lead in the same variable {self.varnames[nz[0]]}"
                )
            used_vars.add(nz[0])
            monic = _tscale(t, self.base.inv(lc), self.base)
            rules.append((lead, _rest_of(monic, self.base)))
        return rules

    # -- normal form ---------------------------------------------------------

    def nf(self, terms: dict) -> dict:
        clean = {}
        for e, c in terms.items():
            c = self.base.normalize(c)
            if c != 0:
                clean[tuple(e)] = c
        if not self.rules:
            return clean
        return _reduce(clean, self.rules, self.base)

    # -- constructors ----------------------------------------------------------

    def poly(self, terms: dict) -> Poly:
        return Poly(self, self.nf(terms))

    def const(self, c) -> Poly:
        c = self.base.normalize(c)
        return Poly(self, {self.zero_exp: c} if c != 0 else {})

    def var(self, j) -> Poly:
        if isinstance(j, str):
            j = self.varnames.index(j)
        e = [0] * self.nvars
        e[j] = 1
        return self.poly({tuple(e): self.base.one})

    def gens(self):
        return [self.var(j) for j in range(self.nvars)]

    def parse(self, text: str) -> Poly:
        return Poly(self, self.nf(_parse_terms(text, self.varnames, self.base)))

    # -- monomial structure ----------------------------------------------------

    def is_finite_dimensional(self) -> bool:
        if self.nvars == 0:
            return True
        covered = set()
        for lead, _ in self.rules:
            nz = [i for i, x in enumerate(lead) if x > 0]
            if len(nz) == 1:
                covered.add(nz[0])
        return covered == set(range(self.nvars))

    def monomial_basis(self, max_degree: int | None = None):
        """Staircase monomials (normal-form basis), as exponent tuples.

        With no bound the quotient must be finite dimensional; otherwise all
        staircase monomials of total degree <= max_degree are returned.
        """
        if max_degree is None:
            if not self.is_finite_dimensional():
                raise ValueError(f"{self.name} is not finite dimensional; pass max_degree")
            bound = 0
            per_var = [None] * self.nvars
            for lead, _ in self.rules:
                nz = [i for i, x in enumerate(lead) if x > 0]
                if len(nz) == 1:
                    i = nz[0]
                    if per_var[i] is None or lead[i] < per_var[i]:
                        per_var[i] = lead[i]
            bound = sum((d - 1) for d in per_var) if self.nvars else 0
        else:
            bound = max_degree
        out = []
        for e in _exponents_up_to(self.nvars, bound):
            if not any(_divides(lead, e) for lead, _ in self.rules):
                out.append(e)
        out.sort(key=grevlex_key)
        return out

    def dimension(self) -> int:
        return len(self.monomial_basis())

    # -- identity ------------------------------------------------------------

    @property
    def name(self) -> str:
        if not self.varnames:
            return self.base.name
        s = f"{self.base.name}[{','.join(self.varnames)}]"
        if self.relation_terms:
            rels = ", ".join(
                format_terms(t, self.varnames, self.base) for t in self.relation_terms
            )
            s += f"/({rels})"
        return s

    def _signature(self):
        return (
            self.base,
            self.varnames,
            tuple(sorted((lead, tuple(sorted(rest.items()))) for lead, rest in self.rules)),
        )

    def __eq__(self, other):
        return isinstance(other, Algebra) and self._signature() == other._signature()

    def __hash__(self):
        return hash(self._signature())

    def __repr__(self):
        return f"Algebra({self.name})"

    def to_json(self):
        return {
            "base": self.base.to_json(),
            "vars": list(self.varnames),
            "relations": [
                format_terms(t, self.varnames, self.base) for t in self.relation_terms
            ],
        }

    @staticmethod
    def from_json(obj) -> "Algebra":
        if not isinstance(obj, dict):
            raise ParseError(f"ring must be a JSON object, got {obj!r}")
        _expect_keys(obj, {"base", "vars"}, {"relations"})
        base = BaseRing.from_json(obj["base"])
        varnames = obj["vars"]
        if not isinstance(varnames, list) or not all(isinstance(v, str) for v in varnames):
            raise ParseError("'vars' must be a list of strings")
        rels = obj.get("relations", [])
        if not isinstance(rels, list) or not all(isinstance(r, str) for r in rels):
            raise ParseError("'relations' must be a list of strings")
        return Algebra(base, varnames, rels)


def _exponents_up_to(nvars: int, bound: int):
    if nvars == 0:
        yield ()
        return

    def rec(prefix, remaining, slots):
        if slots == 1:
            for k in range(remaining + 1):
                yield prefix + (k,)
            return
        for k in range(remaining + 1):
            yield from rec(prefix + (k,), remaining - k, slots - 1)

    yield from rec((), bound, nvars)


def validate_presentation(base, varnames, relations, *, cap=None) -> ConfluenceReport:
    """Attempt to build the rewriting system and report instead of raising."""
    try:
        alg = Algebra(base, varnames, relations, cap=cap)
    except NonConfluent as exc:
        return ConfluenceReport(False, f"non-confluent: {exc}", [])
    except PresentationError as exc:
        return ConfluenceReport(False, str(exc), [])
    rules = [
        format_terms(
            _tadd({lead: alg.base.one}, _tscale(rest, alg.base.from_int(-1), alg.base), alg.base),
            alg.varnames,
            alg.base,
        )
        for lead, rest in alg.rules
    ]
    return ConfluenceReport(True, "confluent", rules)


# ---------------------------------------------------------------------------
# Derivation
# ---------------------------------------------------------------------------


class Derivation:
    """Base-linear derivation of an Algebra, determined by generator images.

    Accepts a dict {varname: image} or a list aligned with the generators;
    images may be strings or Poly values.  Construction verifies that every
    defining relation is killed, so the operator descends to the quotient.
    """

    def __init__(self, alg: Algebra, images, *, check: bool = True):
        self.alg = alg
        if isinstance(images, dict):
            seq = []
            extra = set(images) - set(alg.varnames)
            if extra:
                raise InvalidDerivation(f"images given for unknown variables {sorted(extra)}")
            for nm in alg.varnames:
                seq.append(images.get(nm, alg.zero))
        else:
            seq = list(images)
            if len(seq) != alg.nvars:
                raise InvalidDerivation(
                    f"expected {alg.nvars} images, got {len(seq)}"
                )
        self.images = [alg.parse(v) if isinstance(v, str) else v for v in seq]
        for im in self.images:
            if not isinstance(im, Poly) or im.alg != alg:
                raise InvalidDerivation("images must live in the same algebra")
        if check:
            for t in alg.relation_terms:
                rep = Poly(alg, dict(t))  # unreduced representative
                val = alg.zero
                for j in range(alg.nvars):
                    val = val + rep.partial(j) * self.images[j]
                if not val.is_zero():
                    raise InvalidDerivation(
                        f"relation {format_terms(t, alg.varnames, alg.base)} maps to {val}, "
                        "so the ideal is not preserved"
                    )

    def __call__(self, p: Poly) -> Poly:
        if p.alg != self.alg:
            raise ValueError("polynomial from a different algebra")
        out = self.alg.zero
        for j in range(self.alg.nvars):
            out = out + p.partial(j) * self.images[j]
        return out

    def __eq__(self, other):
        return (
            isinstance(other, Derivation)
            and self.alg == other.alg
            and self.images == other.images
        )

    def __hash__(self):
        return hash((self.alg, tuple(self.images)))

    def __add__(self, other):
        if not isinstance(other, Derivation) or other.alg != self.alg:
            return NotImplemented
        return Derivation(
            self.alg,
            [a + b for a, b in zip(self.images, other.images)],
            check=False,
        )

    def __rmul__(self, scalar):
        if isinstance(scalar, (int, Fraction)):
            scalar = self.alg.const(scalar)
        if isinstance(scalar, Poly):
            return Derivation(self.alg, [scalar * im for im in self.images], check=False)
        return NotImplemented

    def __repr__(self):
        body = ", ".join(f"{nm} -> {im}" for nm, im in zip(self.alg.varnames, self.images))
        return f"Derivation({body})"

    def to_json(self):
        return {nm: str(im) for nm, im in zip(self.alg.varnames, self.images)}


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\*\*|[-+*/^()\[\],]))"
)


def tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == m.start():
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos:].strip()[0]!r} in {text!r}")
        if m.lastgroup == "num":
            out.append(("num", int(m.group("num"))))
        elif m.lastgroup == "name":
            out.append(("name", m.group("name")))
        else:
            op = m.group("op")
            out.append(("op", "^" if op == "**" else op))
        pos = m.end()
    return out


class TermParser:
    """Recursive-descent parser producing term dicts over given variables.

    Grammar: expr := term (('+'|'-') term)*; term := factor (('*'|'/') factor)*;
    factor := '-' factor | power; power := atom ('^' nat)?;
    atom := nat | name | '(' expr ')'.  Division requires a constant unit
    divisor.  Subclasses may extend `atom` (operator syntax reuses this).
    """

    def __init__(self, tokens, varnames, base: BaseRing):
        self.toks = tokens
        self.i = 0
        self.varnames = varnames
        self.base = base

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("end", None)

    def next(self):
        t = self.peek()
        self.i += 1
        return t

    def expect_op(self, op):
        kind, val = self.next()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}, got {val!r}")

    def parse(self):
        t = self.expr()
        if self.peek()[0] != "end":
            raise ParseError(f"trailing input near {self.peek()[1]!r}")
        return t

    def expr(self):
        t = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.next()
            u = self.term()
            if op == "-":
                u = _tscale(u, self.base.from_int(-1), self.base)
            t = _tadd(t, u, self.base)
        return t

    def term(self):
        t = self.factor()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            _, op = self.next()
            u = self.factor()
            if op == "*":
                t = _tmul(t, u, self.base)
            else:
                if any(sum(e) > 0 for e in u):
                    raise ParseError("division only by constant units")
                c = u.get((0,) * len(self.varnames), self.base.zero)
                try:
                    inv = self.base.inv(c)
                except NonUnitDivision as exc:
                    raise ParseError(str(exc)) from None
                t = _tscale(t, inv, self.base)
        return t

    def factor(self):
        if self.peek() == ("op", "-"):
            self.next()
            return _tscale(self.factor(), self.base.from_int(-1), self.base)
        return self.power()

    def power(self):
        t = self.atom()
        if self.peek() == ("op", "^"):
            self.next()
            kind, val = self.next()
            if kind != "num":
                raise ParseError(f"exponent must be a literal integer, got {val!r}")
            out = {(0,) * len(self.varnames): self.base.one}
            for _ in range(val):
                out = _tmul(out, t, self.base)
            return out
        return t

    def atom(self):
        kind, val = self.next()
        if kind == "num":
            c = self.base.from_int(val)
            return {(0,) * len(self.varnames): c} if c != 0 else {}
        if kind == "name":
            if val not in self.varnames:
                raise ParseError(
                    f"unknown variable {val!r} (known: {', '.join(self.varnames) or 'none'})"
                )
            e = [0] * len(self.varnames)
            e[self.varnames.index(val)] = 1
            return {tuple(e): self.base.one}
        if (kind, val) == ("op", "("):
            t = self.expr()
            self.expect_op(")")
            return t
        raise ParseError(f"unexpected token {val!r}")


def _parse_terms(text: str, varnames, base: BaseRing) -> dict:
    return TermParser(tokenize(text), varnames, base).parse()
