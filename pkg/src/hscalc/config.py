"""Tunable limits with environment overrides."""

import os


def _env_int(name, default):
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        return default


#: Hard cap on total degree during rewriting-system completion and on
#: monomial enumeration in quotient algebras.  Override with HS_DEGREE_CAP.
def degree_cap():
    return _env_int("HS_DEGREE_CAP", 12)


#: Seed used by CLI commands when none is given, so repeated runs of the
#: same command line produce byte-identical output.
DEFAULT_SEED = 20260815

#: Node budget for the exhaustive branch of the integrability search
#: over finite fields.
DEFAULT_NODE_BUDGET = 20000
