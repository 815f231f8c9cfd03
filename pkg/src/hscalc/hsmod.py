"""Module actions of Hasse-Schmidt derivations, and the operator relations
they satisfy inside the ring of differential operators.

A structure on a free module E = A^rank assigns to every family D a series
of k-linear module endomorphisms, materialized here as matrices with
differential-operator entries.  Three axioms are checked, always as data
rather than by construction:

  (i)   group compatibility: the identity family acts as 1 and composition
        goes to the series product,
  (ii)  the assigned series intertwines multiplication through the family
        (the module-valued analogue of being a multiplicative element),
  (iii) substitution equivariance, either for constant-coefficient
        substitutions only ("pre") or for all of them ("full").

The differential-forms structure is the standard example that stops at
"pre": a substitution with non-constant coefficients shifts it by the
derivatives of the substitution coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .coideal import Coideal
from .dop import (
    DpOp,
    GrElement,
    identity_op,
    mult_op,
    zero_op,
)
from .dpexp import DPAlgebra, DPElement, vartheta_eval
from .errors import InternalInvariantViolation, ShapeMismatch
from .hsder import HSDerivation
from .rings import Algebra, Poly
from .subst import SubstMap
from .tseries import CoeffSpace, TruncSeries


# ---------------------------------------------------------------------------
# matrices of operators
# ---------------------------------------------------------------------------


class ModOp:
    """A k-linear endomorphism of A^rank: a matrix of operator entries."""

    __slots__ = ("alg", "rank", "mat")

    def __init__(self, alg: Algebra, mat):
        self.alg = alg
        self.mat = tuple(tuple(row) for row in mat)
        self.rank = len(self.mat)
        for row in self.mat:
            if len(row) != self.rank:
                raise ShapeMismatch("module operator matrices must be square")

    @staticmethod
    def zero(alg: Algebra, rank: int) -> "ModOp":
        z = zero_op(alg)
        return ModOp(alg, [[z] * rank for _ in range(rank)])

    @staticmethod
    def identity(alg: Algebra, rank: int) -> "ModOp":
        z, e = zero_op(alg), identity_op(alg)
        return ModOp(alg, [[e if i == j else z for j in range(rank)] for i in range(rank)])

    @staticmethod
    def diagonal(alg: Algebra, ops) -> "ModOp":
        z = zero_op(alg)
        r = len(ops)
        return ModOp(alg, [[ops[i] if i == j else z for j in range(r)] for i in range(r)])

    @staticmethod
    def from_mult_matrix(alg: Algebra, polys) -> "ModOp":
        return ModOp(alg, [[mult_op(alg, p) for p in row] for row in polys])

    def _compat(self, other):
        if not isinstance(other, ModOp) or other.alg != self.alg or other.rank != self.rank:
            raise ShapeMismatch("module operators of different shapes")

    def __add__(self, other):
        self._compat(other)
        return ModOp(
            self.alg,
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.mat, other.mat)],
        )

    def __neg__(self):
        return ModOp(self.alg, [[-a for a in row] for row in self.mat])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        """Matrix product; entries compose."""
        self._compat(other)
        n = self.rank
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = zero_op(self.alg)
                for k in range(n):
                    acc = acc + self.mat[i][k] * other.mat[k][j]
                row.append(acc)
            rows.append(row)
        return ModOp(self.alg, rows)

    def scale_left(self, a: Poly) -> "ModOp":
        return ModOp(self.alg, [[a * e for e in row] for row in self.mat])

    def compose_mult(self, a: Poly) -> "ModOp":
        m = mult_op(self.alg, a)
        return ModOp(self.alg, [[e * m for e in row] for row in self.mat])

    def apply(self, vec):
        vec = tuple(vec)
        if len(vec) != self.rank:
            raise ShapeMismatch(f"expected a vector of length {self.rank}")
        return tuple(
            sum((self.mat[i][j](vec[j]) for j in range(self.rank)), self.alg.zero)
            for i in range(self.rank)
        )

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.mat for e in row)

    def __eq__(self, other):
        if not isinstance(other, ModOp):
            return NotImplemented
        return self.alg == other.alg and self.rank == other.rank and self.mat == other.mat

    __hash__ = None

    def __repr__(self):
        return f"ModOp(rank {self.rank} over {self.alg.name})"


class ModOpSpace(CoeffSpace):
    """Series coefficients that are matrices of operators."""

    def __init__(self, alg: Algebra, rank: int):
        self.alg = alg
        self.rank = rank

    def zero(self):
        return ModOp.zero(self.alg, self.rank)

    def one(self):
        return ModOp.identity(self.alg, self.rank)

    def is_zero(self, v) -> bool:
        return v.is_zero()

    def add(self, u, v):
        return u + v

    def neg(self, v):
        return -v

    def mul(self, u, v):
        return u * v

    def scal_left(self, a, v):
        return v.scale_left(a)

    def scal_right(self, v, a):
        return v.compose_mult(a)

    def coerce(self, v):
        if isinstance(v, ModOp) and v.alg == self.alg and v.rank == self.rank:
            return v
        if isinstance(v, Poly) and v.alg == self.alg:
            return ModOp.diagonal(self.alg, [mult_op(self.alg, v)] * self.rank)
        raise ShapeMismatch(f"cannot use {v!r} as a rank-{self.rank} module operator")

    def __eq__(self, other):
        return isinstance(other, ModOpSpace) and self.alg == other.alg and self.rank == other.rank

    def __hash__(self):
        return hash(("ModOpSpace", self.alg, self.rank))

    def __repr__(self):
        return f"ModOpSpace({self.alg.name}, rank {self.rank})"


def module_d_element(r: TruncSeries, D: HSDerivation):
    """Does the matrix series intertwine multiplication through the family?

    The condition r . mult(a) = (transform of a) . r is multiplicative in a,
    so holding on the algebra generators makes it hold everywhere.  Returns
    (ok, witness) where the witness names a generator and an exponent.
    """
    space = r.space
    if r.shape != D.shape:
        raise ShapeMismatch("series and family over different shapes")
    for j in range(D.alg.nvars):
        xj = D.alg.var(j)
        lhs = r.scale_right(xj)
        coeffs = {}
        for beta in D.shape:
            c = D.coeff_apply(beta, xj)
            if not c.is_zero():
                coeffs[beta] = space.coerce(c)
        rhs = TruncSeries(space, D.shape, coeffs) * r
        if lhs != rhs:
            for a in D.shape:
                if not space.eq(lhs.coeff(a), rhs.coeff(a)):
                    return False, (D.alg.varnames[j], a)
    return True, None


# ---------------------------------------------------------------------------
# structures and their axioms
# ---------------------------------------------------------------------------


class HSStructure:
    """A rule assigning to each family a matrix series acting on A^rank.

    ``claims`` is "pre" when substitution equivariance is only promised for
    constant-coefficient substitutions, "full" when promised for all.
    """

    def __init__(self, alg: Algebra, rank: int, assign, name: str, claims: str = "pre"):
        self.alg = alg
        self.rank = rank
        self._assign = assign
        self.name = name
        self.claims = claims

    def __call__(self, D: HSDerivation) -> TruncSeries:
        out = self._assign(D)
        space = ModOpSpace(self.alg, self.rank)
        if out.space != space or out.shape != D.shape:
            raise InternalInvariantViolation(
                f"structure {self.name} produced a series of the wrong shape"
            )
        return out

    def __repr__(self):
        return f"HSStructure({self.name}, rank {self.rank}, {self.claims})"


@dataclass
class StructureFailure:
    axiom: str
    detail: str


@dataclass
class StructureReport:
    ok: bool
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def check_structure(
    psi: HSStructure,
    *,
    compose_pairs=(),
    delement_samples=(),
    subst_samples=(),
) -> StructureReport:
    """Run the three structure axioms on the given samples.

    compose_pairs: (D, E) pairs over a common shape.
    delement_samples: families D.
    subst_samples: (phi, D) pairs with phi.source = D.shape.
    Substitutions with non-constant coefficients are only required to pass
    when the structure claims "full".
    """
    failures = []
    seen_shapes = set()
    for D in list(delement_samples) + [p[0] for p in compose_pairs]:
        seen_shapes.add(D.shape)
    for shape in seen_shapes:
        ident = HSDerivation.identity(psi.alg, shape)
        if psi(ident) != TruncSeries.one(ModOpSpace(psi.alg, psi.rank), shape):
            failures.append(
                StructureFailure("group", f"identity family does not act as 1 over {shape!r}")
            )
    for D, E in compose_pairs:
        if psi(D.compose(E)) != psi(D) * psi(E):
            failures.append(
                StructureFailure("group", "composition does not go to the series product")
            )
    for D in delement_samples:
        ok, wit = module_d_element(psi(D), D)
        if not ok:
            failures.append(
                StructureFailure(
                    "delement",
                    f"multiplication intertwining fails at generator {wit[0]}, index {wit[1]}",
                )
            )
    for phi, D in subst_samples:
        if psi.claims != "full" and not phi.is_constant_coeff():
            continue
        lhs = psi(D.subst_act(phi))
        rhs = phi.act_left(psi(D))
        if lhs != rhs:
            wit = None
            for a in phi.target:
                if not lhs.space.eq(lhs.coeff(a), rhs.coeff(a)):
                    wit = a
                    break
            failures.append(
                StructureFailure("subst", f"substitution equivariance fails at index {wit}")
            )
    return StructureReport(not failures, failures)


def substitution_defect(psi: HSStructure, phi: SubstMap, D: HSDerivation) -> TruncSeries:
    """The difference psi(phi . D) - phi . psi(D), as a matrix series."""
    return psi(D.subst_act(phi)) - phi.act_left(psi(D))


# ---------------------------------------------------------------------------
# the standard structures
# ---------------------------------------------------------------------------


def _scalar_action_series(D: HSDerivation, rank: int, cop_cache: dict) -> TruncSeries:
    space = ModOpSpace(D.alg, rank)
    coeffs = {}
    for a in D.shape:
        op = cop_cache.get(a)
        if op is None:
            op = D.coeff_op(a)
            cop_cache[a] = op
        m = ModOp.diagonal(D.alg, [op] * rank)
        if not m.is_zero():
            coeffs[a] = m
    return TruncSeries(space, D.shape, coeffs)


def trivial_structure(alg: Algebra) -> HSStructure:
    """The module A itself: the family acts by its own coefficients."""

    def assign(D):
        return _scalar_action_series(D, 1, {})

    return HSStructure(alg, 1, assign, "scalars", claims="full")


def lie_structure(alg: Algebra) -> HSStructure:
    """Action on differential 1-forms of a free polynomial ring.

    The basis form dx_j goes to the sum over indices of d(D_alpha(x_j)); on
    general elements the scalars ride along through the family.  This is the
    canonical example that is NOT substitution-equivariant beyond constant
    coefficients: the defect picks up derivatives of the substitution
    coefficients.
    """
    if alg.rules:
        raise ShapeMismatch("the forms structure is implemented for free rings")
    n = alg.nvars
    if n == 0:
        raise ShapeMismatch("need at least one variable")

    def assign(D):
        space = ModOpSpace(alg, n)
        scal = _scalar_action_series(D, n, {})
        mats = {}
        for a in D.shape:
            rows = []
            for i in range(n):
                row = []
                for j in range(n):
                    row.append(D.coeff_apply(a, alg.var(j)).partial(i))
                rows.append(row)
            m = ModOp.from_mult_matrix(alg, rows)
            if not m.is_zero():
                mats[a] = m
        # scalars transported first, then the matrix part multiplies in
        return TruncSeries(space, D.shape, mats) * scal

    return HSStructure(alg, n, assign, "one-forms", claims="pre")


def adjoint_structure(alg: Algebra) -> HSStructure:
    """Action on derivations of a free polynomial ring by conjugation.

    delta goes to the series of sums D_a . delta . (inverse D)_b; each
    coefficient lands back inside the derivations, which is re-verified on
    the basis and is exactly what makes the matrix form possible.
    """
    if alg.rules:
        raise ShapeMismatch("the adjoint structure is implemented for free rings")
    n = alg.nvars
    if n == 0:
        raise ShapeMismatch("need at least one variable")

    def assign(D):
        space = ModOpSpace(alg, n)
        Dinv = D.invert()
        cops = {}
        scal = _scalar_action_series(D, n, cops)
        icops = {a: Dinv.coeff_op(a) for a in D.shape}
        dgen = [DpOp(alg, {((0,) * n, tuple(1 if t == j else 0 for t in range(n))): alg.base.one})
                for j in range(n)]
        mats = {}
        for g in D.shape:
            rows = [[None] * n for _ in range(n)]
            for j in range(n):
                conj = zero_op(alg)
                for b, c in D.shape.splits(g):
                    op = cops.get(b)
                    if op is None:
                        op = D.coeff_op(b)
                        cops[b] = op
                    conj = conj + op * dgen[j] * icops[c]
                back = zero_op(alg)
                for i in range(n):
                    coeff = conj(alg.var(i))
                    rows[i][j] = coeff
                    back = back + mult_op(alg, coeff) * dgen[i]
                if back != conj:
                    raise InternalInvariantViolation(
                        "conjugated derivation left the derivation module"
                    )
            m = ModOp.from_mult_matrix(alg, rows)
            if not m.is_zero():
                mats[g] = m
        return TruncSeries(space, D.shape, mats) * scal

    return HSStructure(alg, n, assign, "derivations", claims="pre")


def adjoint_stability(D: HSDerivation, delta: DpOp) -> bool:
    """Conjugating a derivation through the family stays a derivation,
    coefficient by coefficient."""
    alg = D.alg
    if alg.rules:
        raise ShapeMismatch("stability check is for free rings")
    n = alg.nvars
    Dinv = D.invert()
    dgen = [DpOp(alg, {((0,) * n, tuple(1 if t == j else 0 for t in range(n))): alg.base.one})
            for j in range(n)]
    for g in D.shape:
        conj = zero_op(alg)
        for b, c in D.shape.splits(g):
            conj = conj + D.coeff_op(b) * delta * Dinv.coeff_op(c)
        back = zero_op(alg)
        for i in range(n):
            back = back + mult_op(alg, conj(alg.var(i))) * dgen[i]
        if back != conj:
            return False
    return True


# -- building new structures out of old ones ---------------------------------


def tensor_structure(psi1: HSStructure, psi2: HSStructure) -> HSStructure:
    """Structure on the tensor product, coefficients normalized to the left factor."""
    if psi1.alg != psi2.alg:
        raise ShapeMismatch("structures over different rings")
    alg = psi1.alg
    r1, r2 = psi1.rank, psi2.rank
    rank = r1 * r2
    claims = "full" if psi1.claims == psi2.claims == "full" else "pre"

    def assign(D):
        space = ModOpSpace(alg, rank)
        s1, s2 = psi1(D), psi2(D)
        coeffs = {}
        for a in D.shape:
            rows = [[zero_op(alg) for _ in range(rank)] for _ in range(rank)]
            for b, c in D.shape.splits(a):
                M = s1.coeff(b)
                N = s2.coeff(c)
                if M.is_zero() or N.is_zero():
                    continue
                for ip in range(r1):
                    for jp in range(r2):
                        for i in range(r1):
                            ent_m = M.mat[ip][i]
                            if ent_m.is_zero():
                                continue
                            for j in range(r2):
                                w = N.mat[jp][j](alg.one)
                                if w.is_zero():
                                    continue
                                ridx, cidx = ip * r2 + jp, i * r2 + j
                                rows[ridx][cidx] = rows[ridx][cidx] + mult_op(alg, w) * ent_m
            m = ModOp(alg, rows)
            if not m.is_zero():
                coeffs[a] = m
        return TruncSeries(space, D.shape, coeffs)

    return HSStructure(alg, rank, assign, f"{psi1.name} (x) {psi2.name}", claims=claims)


def hom_structure(psi1: HSStructure, psi2: HSStructure) -> HSStructure:
    """Structure on A-linear maps E -> F: conjugate by the target action and
    the source action of the inverse family."""
    if psi1.alg != psi2.alg:
        raise ShapeMismatch("structures over different rings")
    alg = psi1.alg
    r1, r2 = psi1.rank, psi2.rank  # source rank, target rank
    rank = r1 * r2
    claims = "pre"

    def assign(D):
        space = ModOpSpace(alg, rank)
        s2 = psi2(D)
        s1inv = psi1(D.invert())
        coeffs = {}
        for a in D.shape:
            rows = [[zero_op(alg) for _ in range(rank)] for _ in range(rank)]
            for b, c in D.shape.splits(a):
                N = s2.coeff(b)
                Mi = s1inv.coeff(c)
                if N.is_zero() or Mi.is_zero():
                    continue
                for k in range(r2):
                    for l in range(r1):
                        for i in range(r2):
                            ent_n = N.mat[k][i]
                            if ent_n.is_zero():
                                continue
                            for j in range(r1):
                                w = Mi.mat[j][l](alg.one)
                                if w.is_zero():
                                    continue
                                ridx, cidx = k * r1 + l, i * r1 + j
                                rows[ridx][cidx] = rows[ridx][cidx] + ent_n * mult_op(alg, w)
            m = ModOp(alg, rows)
            if not m.is_zero():
                coeffs[a] = m
        return TruncSeries(space, D.shape, coeffs)

    return HSStructure(alg, rank, assign, f"Hom({psi1.name}, {psi2.name})", claims=claims)


def _tensor_power(psi: HSStructure, d: int) -> HSStructure:
    out = psi
    for _ in range(d - 1):
        out = tensor_structure(out, psi)
    return out


def _sandwich(alg, big, rows_map, cols_map, rank):
    """pi . big . section for sparse 0/scalar pi and section."""
    out = [[zero_op(alg) for _ in range(rank)] for _ in range(rank)]
    for (tix, six, sgn) in rows_map:
        for (cix, scol) in cols_map:
            ent = big.mat[tix][scol]
            if ent.is_zero():
                continue
            add = ent if sgn == 1 else -ent
            out[six][cix] = out[six][cix] + add
    return ModOp(alg, out)


def sym_structure(psi: HSStructure, d: int) -> HSStructure:
    """Structure on the degree-d symmetric power, through the tensor power."""
    import itertools

    alg = psi.alg
    r = psi.rank
    basis = list(itertools.combinations_with_replacement(range(r), d))
    pos = {b: i for i, b in enumerate(basis)}
    rank = len(basis)
    big_psi = _tensor_power(psi, d)

    def flat(t):
        idx = 0
        for v in t:
            idx = idx * r + v
        return idx

    rows_map = []
    for t in itertools.product(range(r), repeat=d):
        rows_map.append((flat(t), pos[tuple(sorted(t))], 1))
    cols_map = [(i, flat(b)) for i, b in enumerate(basis)]

    def assign(D):
        space = ModOpSpace(alg, rank)
        big = big_psi(D)
        coeffs = {}
        for a in D.shape:
            m = _sandwich(alg, big.coeff(a), rows_map, cols_map, rank)
            if not m.is_zero():
                coeffs[a] = m
        return TruncSeries(space, D.shape, coeffs)

    return HSStructure(alg, rank, assign, f"Sym^{d}({psi.name})", claims=psi.claims)


def wedge_structure(psi: HSStructure, d: int) -> HSStructure:
    """Structure on the degree-d exterior power, through the tensor power."""
    import itertools

    alg = psi.alg
    r = psi.rank
    basis = list(itertools.combinations(range(r), d))
    pos = {b: i for i, b in enumerate(basis)}
    rank = len(basis)
    if rank == 0:
        raise ShapeMismatch(f"exterior power {d} of rank {r} is zero")
    big_psi = _tensor_power(psi, d)

    def flat(t):
        idx = 0
        for v in t:
            idx = idx * r + v
        return idx

    rows_map = []
    for t in itertools.product(range(r), repeat=d):
        if len(set(t)) != d:
            continue
        srt = tuple(sorted(t))
        # parity of the permutation sorting t
        perm = sorted(range(d), key=lambda i: (t[i], i))
        inv = 0
        for i in range(d):
            for j in range(i + 1, d):
                if perm[i] > perm[j]:
                    inv += 1
        rows_map.append((flat(t), pos[srt], -1 if inv % 2 else 1))
    cols_map = [(i, flat(b)) for i, b in enumerate(basis)]

    def assign(D):
        space = ModOpSpace(alg, rank)
        big = big_psi(D)
        coeffs = {}
        for a in D.shape:
            m = _sandwich(alg, big.coeff(a), rows_map, cols_map, rank)
            if not m.is_zero():
                coeffs[a] = m
        return TruncSeries(space, D.shape, coeffs)

    return HSStructure(alg, rank, assign, f"Wedge^{d}({psi.name})", claims=psi.claims)


# ---------------------------------------------------------------------------
# relations of the enveloping operator algebra, evaluated on operators
# ---------------------------------------------------------------------------


@dataclass
class EnvReport:
    tag: str
    ok: bool
    detail: str = ""

    def __bool__(self):
        return self.ok


def verify_env_relation(tag: str, alg: Algebra, **kw) -> EnvReport:
    """Evaluate one defining relation of the enveloping operator algebra.

    Scalars map to multiplication operators and family layers to their
    coefficient operators; each relation must evaluate to the zero operator.

    Tags and the data they use:
      R0   scalars embed as a ring map          (a, b, c)
      Ri   the empty family layer is 1          ()
      Rii  higher layers of the identity die    (shape, alpha)
      Riii composition layers convolve          (D, E, alpha)
      Riv  layers move scalars by lower layers  (D, alpha, a)
      Rv   substitution acts through its table  (phi, D, beta)
    """
    if tag == "R0":
        a, b, c = kw["a"], kw["b"], kw["c"]
        ok = (
            mult_op(alg, a + b) == mult_op(alg, a) + mult_op(alg, b)
            and mult_op(alg, a * b) == mult_op(alg, a) * mult_op(alg, b)
            and mult_op(alg, alg.const(c)) == alg.const(c) * identity_op(alg)
        )
        return EnvReport(tag, ok, "scalar embedding")
    if tag == "Ri":
        shape = kw.get("shape") or Coideal.tm(1, 0)
        ident = HSDerivation.identity(alg, shape)
        z = (0,) * shape.nvars
        ok = ident.coeff_op(z) == identity_op(alg)
        return EnvReport(tag, ok, "zero layer of the identity family")
    if tag == "Rii":
        shape, alpha = kw["shape"], tuple(kw["alpha"])
        if sum(alpha) == 0:
            raise ValueError("Rii wants a positive index")
        ident = HSDerivation.identity(alg, shape)
        ok = ident.coeff_op(alpha).is_zero()
        return EnvReport(tag, ok, f"layer {alpha} of the identity family")
    if tag == "Riii":
        D, E, alpha = kw["D"], kw["E"], tuple(kw["alpha"])
        lhs = D.compose(E).coeff_op(alpha)
        rhs = zero_op(alg)
        for b, c in D.shape.splits(alpha):
            rhs = rhs + D.coeff_op(b) * E.coeff_op(c)
        return EnvReport(tag, lhs == rhs, f"composition layer {alpha}")
    if tag == "Riv":
        D, alpha, a = kw["D"], tuple(kw["alpha"]), kw["a"]
        lhs = D.coeff_op(alpha) * mult_op(alg, a)
        rhs = zero_op(alg)
        for b, c in D.shape.splits(alpha):
            rhs = rhs + mult_op(alg, D.coeff_apply(b, a)) * D.coeff_op(c)
        return EnvReport(tag, lhs == rhs, f"scalar transport at {alpha}")
    if tag == "Rv":
        phi, D, beta = kw["phi"], kw["D"], tuple(kw["beta"])
        moved = D.subst_act(phi)
        lhs = moved.coeff_op(beta)
        rhs = zero_op(alg)
        for a in phi.source:
            c = phi.coeff(beta, a)
            if c.is_zero():
                continue
            rhs = rhs + mult_op(alg, c) * D.coeff_op(a)
        return EnvReport(tag, lhs == rhs, f"substitution layer {beta}")
    raise ValueError(f"unknown relation tag {tag!r}")


ENV_TAGS = ("R0", "Ri", "Rii", "Riii", "Riv", "Rv")


# ---------------------------------------------------------------------------
# degree bookkeeping
# ---------------------------------------------------------------------------


def audit_truncation_locality(D: HSDerivation, alpha) -> bool:
    """A layer only sees the part of the family at indices at most alpha."""
    alpha = tuple(alpha)
    small = D.truncate(Coideal.nbeta(alpha))
    return D.coeff_op(alpha) == small.coeff_op(alpha)


def audit_zero_layer(D: HSDerivation) -> bool:
    z = (0,) * D.shape.nvars
    return D.coeff_op(z) == identity_op(D.alg)


def audit_small_layers(D: HSDerivation, alpha) -> bool:
    """Layers strictly below the deviation order vanish."""
    alpha = tuple(alpha)
    k = sum(alpha)
    ell = D.deviation_order_at(alpha)
    if not (0 < k and k < ell):
        return True
    return D.coeff_op(alpha).is_zero()


def audit_order_bound(D: HSDerivation, alpha) -> bool:
    alpha = tuple(alpha)
    bound = D.order_bound_at(alpha)
    order = D.coeff_op(alpha).order()
    if order == -1 or order == -math.inf:
        return True
    return order <= bound


def audit_commutator(D: HSDerivation, E: HSDerivation, alpha, beta) -> bool:
    """Commutators of layers drop one below the sum of the degree bounds."""
    alpha, beta = tuple(alpha), tuple(beta)
    p = D.coeff_op(alpha)
    q = E.coeff_op(beta)
    comm = p * q - q * p
    if comm.is_zero():
        return True
    return comm.order() <= D.order_bound_at(alpha) + E.order_bound_at(beta) - 1


def graded_floor_inequality(l1: int, l2: int, a1: int, a2: int, b1: int, b2: int) -> bool:
    """Strict floor comparison driving the graded degree count.

    For l1, l2 >= 1, a1 >= l1, b1 >= l2 and a2, b2 >= 0:
    (a1+b1)//(l1+l2) + a2//l1 + b2//l2 < (a1+a2)//l1 + (b1+b2)//l2.
    """
    if l1 < 1 or l2 < 1 or a1 < l1 or b1 < l2 or a2 < 0 or b2 < 0:
        raise ValueError("inputs outside the stated range")
    return (a1 + b1) // (l1 + l2) + a2 // l1 + b2 // l2 < (a1 + a2) // l1 + (b1 + b2) // l2


# ---------------------------------------------------------------------------
# coverage of the graded operator algebra by divided powers
# ---------------------------------------------------------------------------


def taylor_family(alg: Algebra, bvec) -> HSDerivation:
    """External product of one-variable shift families, one per variable.

    Over the box shape below bvec; the top layer is the divided-power
    derivative with multi-exponent bvec.
    """
    from .hsder import hasse_derivation

    bvec = tuple(bvec)
    if len(bvec) != alg.nvars:
        raise ShapeMismatch(f"need one bound per variable, got {bvec}")
    out = None
    for j, bj in enumerate(bvec):
        h = hasse_derivation(alg, Coideal.tm(1, bj), var=j)
        out = h if out is None else out.external(h)
    if out is None:
        raise ShapeMismatch("need at least one variable")
    return out


@dataclass
class ProbeReport:
    ok: bool
    checked: int
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def vartheta_surjectivity_probe(alg: Algebra, bound: int) -> ProbeReport:
    """Every divided-power basis symbol of degree <= bound is hit by the top
    layer of an actual family.

    Dual routes: the operator route takes the graded symbol of the top layer
    of an external product of shift families; the divided-power route maps
    gamma_b through the graded identification.  They must agree for every b.
    """
    if alg.rules:
        raise ShapeMismatch("the graded comparison runs over free rings")
    n = alg.nvars
    G = DPAlgebra(alg, n, bound)
    failures = []
    checked = 0
    for b in G.basis:
        if sum(b) == 0:
            continue
        fam = taylor_family(alg, b)
        top = fam.coeff_op(b)
        lhs = top.symbol(sum(b))
        rhs = vartheta_eval(G.gamma(b), alg)
        checked += 1
        if lhs != rhs:
            failures.append(b)
    return ProbeReport(not failures, checked, failures)


def substituted_symbol_identity(
    F: HSDerivation, phi: SubstMap, beta, G: DPAlgebra
) -> bool:
    """Graded symbol of a substituted layer against the divided-power side.

    Holds for families whose layer at each alpha has the divided-power
    derivative d[alpha] as its top part (shift families and their external
    products): the symbol of layer beta of phi . F then equals the image of
    sum_{|alpha| = |beta|} C_beta(phi, alpha) gamma_alpha.  Layers of lower
    degree die in the graded quotient, which is why only |alpha| = |beta|
    survives.
    """
    alg = F.alg
    beta = tuple(beta)
    d = sum(beta)
    moved = F.subst_act(phi)
    lhs = moved.coeff_op(beta).symbol(d)
    acc = G.zero()
    for a in phi.source:
        if sum(a) != d:
            continue
        c = phi.coeff(beta, a)
        if c.is_zero():
            continue
        acc = acc + G.gamma(a).scale(c)
    rhs = vartheta_eval(acc, alg) if not acc.is_zero() else GrElement(alg, None, {})
    return lhs == rhs
