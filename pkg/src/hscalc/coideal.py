"""Finite downward-closed sets of multi-indices.

These sets shape every truncated series in the package: a series over a
shape ``D`` in N^p has one coefficient per element of ``D``.  Downward
closure (alpha in D and beta <= alpha componentwise imply beta in D) is
what makes multiplication of such series well defined.
"""

from __future__ import annotations

import itertools

from .errors import ParseError, ShapeMismatch


def _leq(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def sort_key(alpha):
    """Canonical element order: by total degree, then lexicographic."""
    return (sum(alpha), alpha)


class Coideal:
    """A finite downward-closed subset of N^p, always containing 0."""

    __slots__ = ("nvars", "elements", "_sorted", "_descriptor")

    def __init__(self, nvars: int, elements, _descriptor=None):
        if nvars < 1:
            raise ValueError("need at least one series variable")
        elems = set()
        for e in elements:
            t = tuple(e)
            if len(t) != nvars or any(not isinstance(x, int) or x < 0 for x in t):
                raise ValueError(f"bad multi-index {e!r} for {nvars} variables")
            elems.add(t)
        if (0,) * nvars not in elems:
            raise ValueError("a shape must contain the zero index")
        for a in elems:
            for i in range(nvars):
                if a[i] > 0:
                    b = a[:i] + (a[i] - 1,) + a[i + 1 :]
                    if b not in elems:
                        raise ValueError(
                            f"not downward closed: {a} present but {b} missing"
                        )
        self.nvars = nvars
        self.elements = frozenset(elems)
        self._sorted = sorted(elems, key=sort_key)
        self._descriptor = _descriptor

    # -- constructors --------------------------------------------------------

    @staticmethod
    def nbeta(beta) -> "Coideal":
        """All indices componentwise below a given corner."""
        beta = tuple(beta)
        elems = itertools.product(*(range(b + 1) for b in beta))
        return Coideal(len(beta), elems, _descriptor=("nbeta", beta))

    @staticmethod
    def tm(nvars: int, m: int) -> "Coideal":
        """All indices of total degree at most m."""
        if m < 0:
            raise ValueError("total degree bound must be >= 0")
        elems = [
            e
            for e in itertools.product(range(m + 1), repeat=nvars)
            if sum(e) <= m
        ]
        return Coideal(nvars, elems, _descriptor=("tm", nvars, m))

    def product(self, other: "Coideal") -> "Coideal":
        """Concatenation shape in N^(p+q): pairs (alpha, beta) of members."""
        elems = [a + b for a in self.elements for b in other.elements]
        return Coideal(self.nvars + other.nvars, elems, _descriptor=("product", self, other))

    __mul__ = product

    # -- queries ---------------------------------------------------------------

    def __contains__(self, alpha) -> bool:
        return tuple(alpha) in self.elements

    def __iter__(self):
        return iter(self._sorted)

    def __len__(self):
        return len(self.elements)

    def height(self) -> int:
        return max(sum(a) for a in self.elements)

    def maximal_elements(self):
        out = [
            a
            for a in self._sorted
            if not any(a != b and _leq(a, b) for b in self.elements)
        ]
        return out

    def complement_min_gens(self):
        """Minimal elements of the complement N^p \\ D, sorted canonically.

        Every series index outside D that matters for well-definedness
        checks is above one of these.
        """
        cands = set()
        for a in self.elements:
            for i in range(self.nvars):
                b = a[:i] + (a[i] + 1,) + a[i + 1 :]
                if b not in self.elements:
                    cands.add(b)
        out = []
        for g in cands:
            ok = True
            for i in range(self.nvars):
                if g[i] > 0:
                    b = g[:i] + (g[i] - 1,) + g[i + 1 :]
                    if b not in self.elements:
                        ok = False
                        break
            if ok:
                out.append(g)
        return sorted(out, key=sort_key)

    def intersection(self, other: "Coideal") -> "Coideal":
        if other.nvars != self.nvars:
            raise ShapeMismatch("cannot intersect shapes with different arity")
        return Coideal(self.nvars, self.elements & other.elements)

    def is_subset(self, other: "Coideal") -> bool:
        return self.nvars == other.nvars and self.elements <= other.elements

    def splits(self, alpha):
        """All pairs (beta, gamma) with beta + gamma = alpha, componentwise."""
        alpha = tuple(alpha)
        out = []
        for beta in itertools.product(*(range(x + 1) for x in alpha)):
            gamma = tuple(x - y for x, y in zip(alpha, beta))
            out.append((beta, gamma))
        return out

    def below(self, alpha):
        """All members componentwise at most alpha, in canonical order."""
        alpha = tuple(alpha)
        return [b for b in self._sorted if _leq(b, alpha)]

    # -- identity ----------------------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, Coideal)
            and self.nvars == other.nvars
            and self.elements == other.elements
        )

    def __hash__(self):
        return hash((self.nvars, self.elements))

    def __repr__(self):
        d = self._descriptor
        if d and d[0] == "tm":
            return f"Coideal.tm({d[1]}, {d[2]})"
        if d and d[0] == "nbeta":
            return f"Coideal.nbeta({list(d[1])})"
        if d and d[0] == "product":
            return f"({d[1]!r} * {d[2]!r})"
        return f"Coideal({self.nvars}, {self._sorted})"

    # -- JSON ----------------------------------------------------------------------

    def to_json(self):
        d = self._descriptor
        if d and d[0] == "tm":
            return {"kind": "tm", "p": d[1], "m": d[2]}
        if d and d[0] == "nbeta":
            return {"kind": "nbeta", "beta": list(d[1])}
        if d and d[0] == "product":
            return {"kind": "product", "factors": [d[1].to_json(), d[2].to_json()]}
        return {
            "kind": "explicit",
            "p": self.nvars,
            "elements": [list(a) for a in self._sorted],
        }

    @staticmethod
    def from_json(obj) -> "Coideal":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ParseError(f"shape must be an object with a 'kind' field, got {obj!r}")
        kind = obj["kind"]
        keys = set(obj)
        if kind == "tm":
            if keys != {"kind", "p", "m"}:
                raise ParseError(f"tm shape needs exactly p and m, got {sorted(keys)}")
            return Coideal.tm(obj["p"], obj["m"])
        if kind == "nbeta":
            if keys != {"kind", "beta"}:
                raise ParseError(f"nbeta shape needs exactly beta, got {sorted(keys)}")
            return Coideal.nbeta(obj["beta"])
        if kind == "explicit":
            if keys != {"kind", "p", "elements"}:
                raise ParseError(f"explicit shape needs p and elements, got {sorted(keys)}")
            try:
                return Coideal(obj["p"], obj["elements"])
            except ValueError as exc:
                raise ParseError(str(exc)) from None
        if kind == "product":
            if keys != {"kind", "factors"}:
                raise ParseError(f"product shape needs exactly factors, got {sorted(keys)}")
            factors = [Coideal.from_json(f) for f in obj["factors"]]
            if len(factors) < 2:
                raise ParseError("product shape needs at least two factors")
            out = factors[0]
            for f in factors[1:]:
                out = out.product(f)
            return out
        raise ParseError(f"unknown shape kind {kind!r}")
