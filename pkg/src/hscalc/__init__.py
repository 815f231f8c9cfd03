"""Exact calculus of multivariate Hasse-Schmidt derivations.

Truncated power series whose exponents range over a finite downward-closed
set of multi-indices, substitution maps between them, Hasse-Schmidt
derivations in arbitrary characteristic, integrability of ordinary
derivations, divided-power algebras, differential operators with divided
powers, and module structures compatible with all of it.  Everything is
exact: coefficients are integers, rationals, or elements of Z/n.
"""

__version__ = "0.1.0"
