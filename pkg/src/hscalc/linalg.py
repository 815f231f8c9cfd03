"""Exact Gaussian elimination over the field base rings.

Solves affine systems with certificates: an inconsistent system comes back
with the row combination proving it (lam . A = 0 with lam . b nonzero), so
callers can hand out verifiable evidence instead of a bare failure flag.
"""

from __future__ import annotations

from dataclasses import dataclass

from .rings import BaseRing


@dataclass
class AffineSolutions:
    """Solution set of A u = b: a particular point plus a kernel basis.

    ``certificate`` is only set when the system is inconsistent; it is a
    vector over the original equations whose combination yields 0 = nonzero.
    """

    ok: bool
    particular: list | None
    kernel: list | None
    certificate: list | None
    residual: object | None

    def __bool__(self):
        return self.ok


def solve_affine(base: BaseRing, rows, rhs) -> AffineSolutions:
    if not base.is_field:
        raise ValueError(f"linear solving needs a field base, got {base.name}")
    m = len(rows)
    n = len(rows[0]) if m else 0
    a = [[base.normalize(v) for v in row] for row in rows]
    b = [base.normalize(v) for v in rhs]
    # multipliers: mult[i] expresses current row i in terms of the originals
    mult = [[base.one if i == j else base.zero for j in range(m)] for i in range(m)]
    pivots = []  # (row, col)
    r = 0
    for c in range(n):
        p = None
        for i in range(r, m):
            if a[i][c] != 0:
                p = i
                break
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        b[r], b[p] = b[p], b[r]
        mult[r], mult[p] = mult[p], mult[r]
        inv = base.inv(a[r][c])
        a[r] = [base.mul(v, inv) for v in a[r]]
        b[r] = base.mul(b[r], inv)
        mult[r] = [base.mul(v, inv) for v in mult[r]]
        for i in range(m):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [base.sub(x, base.mul(f, y)) for x, y in zip(a[i], a[r])]
                b[i] = base.sub(b[i], base.mul(f, b[r]))
                mult[i] = [base.sub(x, base.mul(f, y)) for x, y in zip(mult[i], mult[r])]
        pivots.append((r, c))
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if b[i] != 0:
            return AffineSolutions(False, None, None, certificate=mult[i], residual=b[i])
    pivot_cols = {c for (_, c) in pivots}
    free_cols = [c for c in range(n) if c not in pivot_cols]
    particular = [base.zero] * n
    for (i, c) in pivots:
        particular[c] = b[i]
    kernel = []
    for fc in free_cols:
        v = [base.zero] * n
        v[fc] = base.one
        for (i, c) in pivots:
            v[c] = base.neg(a[i][fc])
        kernel.append(v)
    return AffineSolutions(True, particular, kernel, None, None)


def nullspace(base: BaseRing, rows, ncols: int):
    if not rows:
        # no constraints: the whole space
        out = []
        for i in range(ncols):
            v = [base.zero] * ncols
            v[i] = base.one
            out.append(v)
        return out
    sol = solve_affine(base, rows, [base.zero] * len(rows))
    return sol.kernel
