"""Two-phase checker for a small overloaded functional language.

Phase 1 elaborates intersection- and union-typed source programs into a
target language with products, tagged sums, and DEAD casts.  Phase 2
discharges the casts with refinement subtyping over linear integer
arithmetic.  Refinement inference solves kappa-templated signatures with
Houdini-style predicate abstraction.
"""

from .elaborate import ElabError, ElabResult, check_expr, elaborate_program
from .parser import ParseError, parse_expr, parse_pred, parse_program, parse_type
from .refine import CheckReport, RefEnv, check_refined
from .syntax import Program, print_expr, print_program, print_type

__all__ = [
    "CheckReport",
    "ElabError",
    "ElabResult",
    "ParseError",
    "Program",
    "RefEnv",
    "check_expr",
    "check_refined",
    "elaborate_program",
    "parse_expr",
    "parse_pred",
    "parse_program",
    "parse_type",
    "print_expr",
    "print_program",
    "print_type",
]
