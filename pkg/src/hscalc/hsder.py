"""Hasse-Schmidt derivations over a shape.

A family (D_alpha) indexed by a shape, with D_0 the identity and the
Leibniz rule D_alpha(xy) = sum over beta+gamma=alpha of D_beta(x)
D_gamma(y), is the same thing as an algebra map from A to truncated series
over A that reduces to the identity modulo the series variables.  We store
that map: one series per generator of A.  All group operations reduce to
series manipulations on the images, which keeps every computation exact
and makes the deviation order (the order of D minus the identity) readable
off the images directly.
"""

from __future__ import annotations

import math

from .coideal import Coideal
from .errors import (
    InternalInvariantViolation,
    ParseError,
    ShapeMismatch,
)
from .rings import Algebra, Poly, _expect_keys
from .subst import SubstMap
from .tseries import PolySpace, TruncSeries, format_series, parse_series
from .dop import MatOp, OpSpace, mult_op, operator_from_callable


class HSDerivation:
    """A Hasse-Schmidt derivation, stored as generator images in A[[s]]."""

    __slots__ = ("alg", "shape", "images", "_powcache")

    def __init__(self, alg: Algebra, shape: Coideal, images, *, check: bool = True):
        self.alg = alg
        self.shape = shape
        sp = PolySpace(alg)
        if isinstance(images, dict):
            extra = set(images) - set(alg.varnames)
            if extra:
                raise ShapeMismatch(f"images for unknown variables {sorted(extra)}")
            seq = [images.get(nm) for nm in alg.varnames]
            if any(v is None for v in seq):
                missing = [nm for nm, v in zip(alg.varnames, seq) if v is None]
                raise ShapeMismatch(f"missing images for variables {missing}")
        else:
            seq = list(images)
            if len(seq) != alg.nvars:
                raise ShapeMismatch(f"expected {alg.nvars} images, got {len(seq)}")
        imgs = []
        for j, im in enumerate(seq):
            if isinstance(im, str):
                im = parse_series(im, alg, shape)
            if not isinstance(im, TruncSeries) or im.shape != shape or im.space != sp:
                raise ShapeMismatch(f"image of {alg.varnames[j]} is not a series over the shape")
            imgs.append(im)
        self.images = imgs
        self._powcache = {}
        if check:
            for j, im in enumerate(imgs):
                if im.constant_coeff() != alg.var(j):
                    raise ShapeMismatch(
                        f"image of {alg.varnames[j]} must reduce to it modulo the "
                        f"series variables, got constant coefficient {im.constant_coeff()}"
                    )
            for t in alg.relation_terms:
                val = self._eval_free_terms(t)
                if not val.is_zero():
                    raise ShapeMismatch(
                        "images do not kill the defining relations; offending value "
                        f"{format_series(val)}"
                    )

    # -- the algebra map -------------------------------------------------------

    def _power(self, j: int, k: int) -> TruncSeries:
        got = self._powcache.get((j, k))
        if got is None:
            if k == 0:
                got = TruncSeries.one(PolySpace(self.alg), self.shape)
            else:
                got = self._power(j, k - 1) * self.images[j]
            self._powcache[(j, k)] = got
        return got

    def _eval_free_terms(self, terms: dict) -> TruncSeries:
        sp = PolySpace(self.alg)
        out = TruncSeries.zero(sp, self.shape)
        for e, c in terms.items():
            t = TruncSeries.one(sp, self.shape)
            for j, k in enumerate(e):
                if k:
                    t = t * self._power(j, k)
            out = out + t.scale_left(self.alg.const(c))
        return out

    def transform(self, a: Poly) -> TruncSeries:
        """The image of a under the associated algebra map A -> A[[s]]."""
        if a.alg != self.alg:
            raise ShapeMismatch("element of a different algebra")
        return self._eval_free_terms(a.terms)

    def coeff_apply(self, alpha, a: Poly) -> Poly:
        """D_alpha applied to an algebra element."""
        return self.transform(a).coeff(alpha)

    def tilde_apply(self, series: TruncSeries) -> TruncSeries:
        """Extension to series over the same shape: acts on coefficients and
        shifts, dropping what leaves the shape."""
        if series.shape != self.shape or series.space != PolySpace(self.alg):
            raise ShapeMismatch("series must share the derivation's algebra and shape")
        sp = PolySpace(self.alg)
        out = TruncSeries.zero(sp, self.shape)
        for gamma, e in series.coeffs.items():
            img = self.transform(e)
            shifted = {}
            for beta, v in img.coeffs.items():
                a = tuple(x + y for x, y in zip(beta, gamma))
                if a in self.shape:
                    shifted[a] = v
            out = out + TruncSeries(sp, self.shape, shifted)
        return out

    # -- group structure ----------------------------------------------------------

    def compose(self, other: "HSDerivation") -> "HSDerivation":
        """Group product: coefficient at alpha is the sum of D_beta E_gamma."""
        self._compat(other)
        images = [self.tilde_apply(im) for im in other.images]
        return HSDerivation(self.alg, self.shape, images, check=False)

    def invert(self) -> "HSDerivation":
        """Group inverse, solved triangularly on the generator images."""
        sp = PolySpace(self.alg)
        zero = (0,) * self.shape.nvars
        new_images = []
        for j in range(self.alg.nvars):
            u: dict = {zero: self.alg.var(j)}
            for alpha in self.shape:
                if alpha == zero:
                    continue
                acc = self.alg.zero
                for beta, gamma in self.shape.splits(alpha):
                    if beta == zero:
                        continue
                    ug = u.get(gamma)
                    if ug is None or ug.is_zero():
                        continue
                    acc = acc + self.coeff_apply(beta, ug)
                if not acc.is_zero():
                    u[alpha] = -acc
            u = {a: v for a, v in u.items() if not v.is_zero()}
            new_images.append(TruncSeries(sp, self.shape, u))
        return HSDerivation(self.alg, self.shape, new_images, check=False)

    def _compat(self, other):
        if not isinstance(other, HSDerivation):
            raise ShapeMismatch(f"expected a Hasse-Schmidt derivation, got {type(other)}")
        if other.alg != self.alg or other.shape != self.shape:
            raise ShapeMismatch("derivations over different algebras or shapes")

    @staticmethod
    def identity(alg: Algebra, shape: Coideal) -> "HSDerivation":
        sp = PolySpace(alg)
        z = (0,) * shape.nvars
        return HSDerivation(
            alg,
            shape,
            [TruncSeries(sp, shape, {z: alg.var(j)}) for j in range(alg.nvars)],
            check=False,
        )

    def is_identity(self) -> bool:
        z = (0,) * self.shape.nvars
        return all(
            set(im.coeffs) <= {z} and im.constant_coeff() == self.alg.var(j)
            for j, im in enumerate(self.images)
        )

    # -- invariants ---------------------------------------------------------------

    def deviation_order(self):
        """Order of D minus the identity; +inf for the identity.

        Equals the least |alpha| > 0 with D_alpha nonzero: coefficients on
        the first nonzero layer are derivations, so they are determined by
        their values on the generators.
        """
        best = math.inf
        for im in self.images:
            for a, v in im.coeffs.items():
                if sum(a) == 0:
                    continue
                if sum(a) < best and not v.is_zero():
                    best = sum(a)
        return best

    def deviation_order_at(self, alpha):
        """Deviation order of the truncation to indices below alpha."""
        alpha = tuple(alpha)
        if alpha not in self.shape:
            raise ShapeMismatch(f"{alpha} is outside the shape")
        best = math.inf
        for im in self.images:
            for a, v in im.coeffs.items():
                if sum(a) == 0 or any(x > y for x, y in zip(a, alpha)):
                    continue
                if sum(a) < best and not v.is_zero():
                    best = sum(a)
        return best

    def order_bound_at(self, alpha) -> int:
        """The proven ceiling floor(|alpha| / deviation below alpha) on the
        operator order of the coefficient at alpha."""
        ell = self.deviation_order_at(alpha)
        return int(sum(alpha) // ell) if ell is not math.inf else 0

    # -- actions ---------------------------------------------------------------------

    def truncate(self, shape2: Coideal) -> "HSDerivation":
        if not shape2.is_subset(self.shape):
            raise ShapeMismatch("can only truncate to a sub-shape")
        return HSDerivation(
            self.alg, shape2, [im.truncate(shape2) for im in self.images], check=False
        )

    def subst_act(self, phi: SubstMap) -> "HSDerivation":
        """Transport along a substitution map: the new algebra map is phi
        composed with this one."""
        if phi.alg != self.alg:
            raise ShapeMismatch("substitution map over a different algebra")
        if phi.source != self.shape:
            raise ShapeMismatch("substitution source must match the derivation shape")
        return HSDerivation(
            self.alg, phi.target, [phi.apply(im) for im in self.images], check=False
        )

    def scalar_act(self, scalars) -> "HSDerivation":
        """Rescale: the coefficient at alpha picks up the monomial factor
        scalars^alpha."""
        sp = PolySpace(self.alg)
        scal = [sp.coerce(a) for a in scalars]
        if len(scal) != self.shape.nvars:
            raise ShapeMismatch(f"need {self.shape.nvars} scalars")
        images = []
        for im in self.images:
            out = {}
            for a, v in im.coeffs.items():
                f = v
                for ai, k in zip(scal, a):
                    for _ in range(k):
                        f = ai * f
                if not f.is_zero():
                    out[a] = f
            images.append(TruncSeries(sp, self.shape, out))
        return HSDerivation(self.alg, self.shape, images, check=False)

    def external(self, other: "HSDerivation") -> "HSDerivation":
        """Independent juxtaposition over the product shape: the coefficient
        at (alpha, beta) is D_alpha composed with E_beta."""
        if other.alg != self.alg:
            raise ShapeMismatch("derivations over different algebras")
        shape = self.shape.product(other.shape)
        sp = PolySpace(self.alg)
        images = []
        for j in range(self.alg.nvars):
            out = {}
            for gamma, e in other.images[j].coeffs.items():
                img = self.transform(e)
                for beta, v in img.coeffs.items():
                    out[beta + gamma] = v
            images.append(TruncSeries(sp, shape, out))
        return HSDerivation(self.alg, shape, images, check=False)

    # -- operator views -----------------------------------------------------------

    def coeff_op(self, alpha):
        """The coefficient at alpha as a differential operator.

        Over a free algebra the reconstruction window |alpha| is exact
        because Leibniz coefficients always have order at most |alpha|.
        """
        alpha = tuple(alpha)
        if self.alg.rules:
            return MatOp.from_callable(self.alg, lambda p: self.coeff_apply(alpha, p))
        return operator_from_callable(
            self.alg, lambda p: self.coeff_apply(alpha, p), max_order=sum(alpha)
        )

    def to_op_series(self) -> TruncSeries:
        """The same derivation as a series with operator coefficients."""
        sp = OpSpace(self.alg)
        out = {}
        for alpha in self.shape:
            op = self.coeff_op(alpha)
            if not op.is_zero():
                out[alpha] = op
        return TruncSeries(sp, self.shape, out)

    def twist(self, phi: SubstMap) -> SubstMap:
        """The unique substitution map chi with: transported-D-tilde after chi
        equals phi after D-tilde.

        Built in closed form by pushing phi's variable images through the
        inverse of the transported derivation, then re-verified against the
        defining identity; failure of that check is an internal bug, not
        bad input.
        """
        if phi.alg != self.alg or phi.source != self.shape:
            raise ShapeMismatch("substitution map does not match the derivation")
        moved = self.subst_act(phi)
        inv = moved.invert()
        images = [inv.tilde_apply(im) for im in phi.images]
        chi = SubstMap(self.alg, self.shape, phi.target, images)
        for i, im in enumerate(phi.images):
            if moved.tilde_apply(chi.images[i]) != im:
                raise InternalInvariantViolation(
                    f"twisted substitution fails its defining identity on variable {i + 1}"
                )
        return chi

    # -- identity -----------------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, HSDerivation):
            return NotImplemented
        return (
            self.alg == other.alg
            and self.shape == other.shape
            and self.images == other.images
        )

    __hash__ = None

    def __repr__(self):
        body = "; ".join(
            f"{nm} -> {format_series(im)}" for nm, im in zip(self.alg.varnames, self.images)
        )
        return f"HSDerivation({body})"

    def to_json(self):
        return {
            "algebra": self.alg.to_json(),
            "shape": self.shape.to_json(),
            "phi": {
                nm: format_series(im) for nm, im in zip(self.alg.varnames, self.images)
            },
        }

    @staticmethod
    def from_json(obj) -> "HSDerivation":
        if not isinstance(obj, dict):
            raise ParseError(f"derivation must be a JSON object, got {obj!r}")
        _expect_keys(obj, {"algebra", "shape", "phi"})
        alg = Algebra.from_json(obj["algebra"])
        shape = Coideal.from_json(obj["shape"])
        phi = obj["phi"]
        if not isinstance(phi, dict) or not all(isinstance(v, str) for v in phi.values()):
            raise ParseError("'phi' must map variable names to series strings")
        return HSDerivation(alg, shape, phi)


def hasse_derivation(alg: Algebra, shape: Coideal, var: int = 0) -> HSDerivation:
    """The Taylor-shift family in one variable: x maps to x + s.

    Its coefficient at k is the k-th divided-power derivative in that
    variable, which makes it the universal example in characteristic p.
    """
    if shape.nvars != 1:
        raise ShapeMismatch("the Taylor-shift family is one-parameter")
    sp = PolySpace(alg)
    images = []
    for j in range(alg.nvars):
        if j == var:
            images.append(
                TruncSeries(sp, shape, {(0,): alg.var(j), (1,): alg.one})
                if (1,) in shape
                else TruncSeries(sp, shape, {(0,): alg.var(j)})
            )
        else:
            images.append(TruncSeries(sp, shape, {(0,): alg.var(j)}))
    return HSDerivation(alg, shape, images)


class DElementReport:
    """Outcome of the module-element criterion for a series of operators.

    The criterion (commuting the series past multiplication operators
    against the transported coefficients) is multiplicative in the algebra
    element, so holding on the generators makes it hold everywhere; the
    check here is exact, and `witness` names the first failing generator.
    """

    def __init__(self, ok: bool, witness=None):
        self.ok = ok
        self.witness = witness

    def __bool__(self):
        return self.ok

    def __repr__(self):
        if self.ok:
            return "DElementReport(ok)"
        return f"DElementReport(fails on {self.witness})"


def is_d_element(r: TruncSeries, D: HSDerivation) -> DElementReport:
    """Does r commute with multiplications the way D prescribes?

    Checks, for every generator x: r composed with mult(x) equals the
    operator-coefficient series of D at x (mult of D_beta(x) at index
    beta) composed with r.
    """
    if not isinstance(r.space, OpSpace):
        raise ShapeMismatch("the criterion applies to series of operators")
    alg = r.space.alg
    if alg != D.alg or r.shape != D.shape:
        raise ShapeMismatch("series and derivation must share algebra and shape")
    sp = r.space
    for j in range(alg.nvars):
        xj = alg.var(j)
        lhs = r.scale_right(xj)
        dser = TruncSeries(
            sp,
            D.shape,
            {
                beta: mult_op(alg, v)
                for beta, v in D.transform(xj).coeffs.items()
            },
        )
        rhs = dser * r
        if lhs != rhs:
            return DElementReport(False, witness=alg.varnames[j])
    return DElementReport(True)
