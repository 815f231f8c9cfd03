"""Substitution maps between truncated series algebras.

A substitution map sends each source series variable to a target series
with no constant term, extends to an algebra map on polynomial-coefficient
series, and acts on series with arbitrary module coefficients through its
coefficient table: the value ``C(alpha)[e]`` is the (polynomial)
coefficient of t^e in the image of s^alpha.  Well-definedness (images of
exponents outside the source shape must die in the target) is checked at
construction on the minimal generators of the source complement; only
generators of total degree at most the target height can fail.
"""

from __future__ import annotations

import math

from .coideal import Coideal
from .errors import IllDefinedSubstitution, ParseError, ShapeMismatch
from .rings import Algebra, _expect_keys
from .tseries import (
    PolySpace,
    TruncSeries,
    format_series,
    parse_series,
)


class SubstMap:
    """Shape-changing variable substitution with polynomial coefficients."""

    __slots__ = ("alg", "source", "target", "images", "_powers")

    def __init__(self, alg: Algebra, source: Coideal, target: Coideal, images):
        self.alg = alg
        self.source = source
        self.target = target
        sp = PolySpace(alg)
        imgs = []
        if len(images) != source.nvars:
            raise ShapeMismatch(
                f"need {source.nvars} variable images, got {len(images)}"
            )
        for i, im in enumerate(images):
            if isinstance(im, str):
                im = parse_series(im, alg, target, prefix="t")
            if not isinstance(im, TruncSeries) or im.shape != target or im.space != sp:
                raise ShapeMismatch(f"image {i} is not a series over the target shape")
            if im.order() < 1:
                raise IllDefinedSubstitution(
                    f"image of variable {i + 1} has a constant term",
                    alpha=(0,) * source.nvars,
                )
            imgs.append(im)
        self.images = imgs
        self._powers = {(0,) * source.nvars: TruncSeries.one(sp, target)}
        h = target.height()
        for g in source.complement_min_gens():
            if sum(g) <= h and not self._power(g).is_zero():
                raise IllDefinedSubstitution(
                    f"monomial with exponent {g} must vanish in the target but maps to "
                    f"{format_series(self._power(g), 't')}",
                    alpha=g,
                )

    # -- the coefficient table ------------------------------------------------

    def _power(self, alpha) -> TruncSeries:
        """Image of the source monomial s^alpha (alpha need not lie in the source)."""
        alpha = tuple(alpha)
        got = self._powers.get(alpha)
        if got is not None:
            return got
        i = max(j for j, x in enumerate(alpha) if x > 0)
        prev = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1 :]
        out = self._power(prev) * self.images[i]
        self._powers[alpha] = out
        return out

    def coeff_table(self, alpha) -> dict:
        """Coefficients {e: Poly} of the image of s^alpha."""
        return self._power(alpha).coeffs

    def coeff(self, e, alpha):
        """The polynomial coefficient of t^e in the image of s^alpha."""
        return self._power(alpha).coeff(e)

    # -- actions ---------------------------------------------------------------

    def apply(self, series: TruncSeries) -> TruncSeries:
        """The algebra map on polynomial-coefficient series over the source shape."""
        if series.shape != self.source:
            raise ShapeMismatch("series shape does not match the substitution source")
        sp = PolySpace(self.alg)
        if series.space != sp:
            raise ShapeMismatch("apply expects polynomial coefficients; use act_left")
        out = TruncSeries.zero(sp, self.target)
        for alpha, a in series.coeffs.items():
            out = out + self._power(alpha).scale_left(a)
        return out

    def act_left(self, series: TruncSeries) -> TruncSeries:
        """Coefficient at e of the result is the sum of C(alpha)[e] . r_alpha."""
        if series.shape != self.source:
            raise ShapeMismatch("series shape does not match the substitution source")
        sp = series.space
        out: dict = {}
        for alpha, v in series.coeffs.items():
            for e, c in self.coeff_table(alpha).items():
                w = sp.scal_left(c, v)
                s = sp.add(out.get(e, sp.zero()), w)
                if sp.is_zero(s):
                    out.pop(e, None)
                else:
                    out[e] = s
        return TruncSeries(sp, self.target, out)

    def act_right(self, series: TruncSeries) -> TruncSeries:
        """Coefficient at e of the result is the sum of r_alpha . C(alpha)[e]."""
        if series.shape != self.source:
            raise ShapeMismatch("series shape does not match the substitution source")
        sp = series.space
        out: dict = {}
        for alpha, v in series.coeffs.items():
            for e, c in self.coeff_table(alpha).items():
                w = sp.scal_right(v, c)
                s = sp.add(out.get(e, sp.zero()), w)
                if sp.is_zero(s):
                    out.pop(e, None)
                else:
                    out[e] = s
        return TruncSeries(sp, self.target, out)

    # -- algebra of substitution maps -----------------------------------------

    def compose(self, other: "SubstMap") -> "SubstMap":
        """self after other (other's target must be self's source)."""
        if other.alg != self.alg:
            raise ShapeMismatch("substitution maps over different algebras")
        if other.target != self.source:
            raise ShapeMismatch("shapes do not chain: target of inner is not source of outer")
        return SubstMap(
            self.alg, other.source, self.target, [self.apply(im) for im in other.images]
        )

    def tensor(self, other: "SubstMap") -> "SubstMap":
        """Act independently on two blocks of variables."""
        if other.alg != self.alg:
            raise ShapeMismatch("substitution maps over different algebras")
        src = self.source.product(other.source)
        tgt = self.target.product(other.target)
        q1 = self.target.nvars
        q2 = other.target.nvars
        images = []
        for im in self.images:
            images.append(_embed(im, tgt, 0, q1 + q2))
        for im in other.images:
            images.append(_embed(im, tgt, q1, q1 + q2))
        return SubstMap(self.alg, src, tgt, images)

    def init_part(self) -> "SubstMap":
        """Keep only the degree-one part of every image (still well defined)."""
        images = []
        for im in self.images:
            lin = {e: v for e, v in im.coeffs.items() if sum(e) == 1}
            images.append(TruncSeries(im.space, self.target, lin))
        return SubstMap(self.alg, self.source, self.target, images)

    # -- predicates ---------------------------------------------------------------

    def order(self):
        """Least order among variable images; +inf for the trivial map."""
        return min((im.order() for im in self.images), default=math.inf)

    def is_trivial(self) -> bool:
        return all(im.is_zero() for im in self.images)

    def is_constant_coeff(self) -> bool:
        return all(
            v.is_constant() for im in self.images for v in im.coeffs.values()
        )

    def is_combinatorial(self) -> bool:
        """Each variable maps to a single target variable with coefficient 1."""
        for im in self.images:
            if len(im.coeffs) != 1:
                return False
            (e, v), = im.coeffs.items()
            if sum(e) != 1 or v != self.alg.one:
                return False
        return True

    # -- stock constructions ---------------------------------------------------

    @staticmethod
    def trivial(alg: Algebra, source: Coideal, target: Coideal) -> "SubstMap":
        sp = PolySpace(alg)
        return SubstMap(
            alg, source, target, [TruncSeries.zero(sp, target)] * source.nvars
        )

    @staticmethod
    def combinatorial(alg: Algebra, source: Coideal, target: Coideal, var_map) -> "SubstMap":
        """Variable-to-variable map; var_map[i] is the target variable index."""
        sp = PolySpace(alg)
        images = []
        for j in var_map:
            e = [0] * target.nvars
            e[j] = 1
            images.append(TruncSeries.monomial(sp, target, tuple(e), alg.one))
        return SubstMap(alg, source, target, images)

    @staticmethod
    def truncation(alg: Algebra, from_shape: Coideal, to_shape: Coideal) -> "SubstMap":
        """Restriction to a sub-shape, seen as a substitution map."""
        if not to_shape.is_subset(from_shape):
            raise ShapeMismatch("truncation target must be a sub-shape of the source")
        sp = PolySpace(alg)
        images = []
        for i in range(from_shape.nvars):
            e = [0] * from_shape.nvars
            e[i] = 1
            e = tuple(e)
            if e in to_shape:
                images.append(TruncSeries.monomial(sp, to_shape, e, alg.one))
            else:
                images.append(TruncSeries.zero(sp, to_shape))
        return SubstMap(alg, from_shape, to_shape, images)

    @staticmethod
    def scaling(alg: Algebra, shape: Coideal, scalars) -> "SubstMap":
        """Send the i-th variable to scalars[i] times itself."""
        sp = PolySpace(alg)
        images = []
        for i, a in enumerate(scalars):
            a = sp.coerce(a)
            e = [0] * shape.nvars
            e[i] = 1
            images.append(TruncSeries(sp, shape, {tuple(e): a}))
        return SubstMap(alg, shape, shape, images)

    # -- identity -----------------------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, SubstMap)
            and self.alg == other.alg
            and self.source == other.source
            and self.target == other.target
            and self.images == other.images
        )

    __hash__ = None

    def __repr__(self):
        body = ", ".join(
            f"s{i + 1} -> {format_series(im, 't')}" for i, im in enumerate(self.images)
        )
        return f"SubstMap({body})"

    def to_json(self):
        return {
            "source": {"p": self.source.nvars, "shape": self.source.to_json()},
            "target": {"p": self.target.nvars, "shape": self.target.to_json()},
            "images": [format_series(im, "t") for im in self.images],
        }

    @staticmethod
    def from_json(obj, alg: Algebra) -> "SubstMap":
        if not isinstance(obj, dict):
            raise ParseError(f"substitution map must be a JSON object, got {obj!r}")
        _expect_keys(obj, {"source", "target", "images"})
        source = _end_from_json(obj["source"], "source")
        target = _end_from_json(obj["target"], "target")
        images = obj["images"]
        if not isinstance(images, list) or not all(isinstance(s, str) for s in images):
            raise ParseError("'images' must be a list of series strings")
        return SubstMap(alg, source, target, images)


def _end_from_json(obj, label: str) -> Coideal:
    """Parse one endpoint: {"p": nvars, "shape": coideal-json}."""
    if not isinstance(obj, dict):
        raise ParseError(f"'{label}' must be a JSON object, got {obj!r}")
    _expect_keys(obj, {"p", "shape"})
    shape = Coideal.from_json(obj["shape"])
    if obj["p"] != shape.nvars:
        raise ParseError(
            f"'{label}' declares p={obj['p']!r} but its shape has {shape.nvars} variables"
        )
    return shape


def _embed(series: TruncSeries, big_shape: Coideal, offset: int, total: int) -> TruncSeries:
    out = {}
    for e, v in series.coeffs.items():
        ee = (0,) * offset + e + (0,) * (total - offset - len(e))
        out[ee] = v
    return TruncSeries(series.space, big_shape, out)
