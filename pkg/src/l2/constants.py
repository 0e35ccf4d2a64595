"""Primitive constants: source types, refined types, and curried semantics.

Application of a binary primitive to its first argument yields a derived
constant (for example ``add`` applied to 1 yields ``add@1``) whose delta
finishes the job.  The derived constant's refined type is exact and linear,
which is what makes ``mul`` usable: the outer ``mul`` type promises nothing,
but ``mul@k`` records multiplication by the known literal k.
"""

from __future__ import annotations

from functools import lru_cache

from .logic import (
    BVar,
    LinTerm,
    PAtom,
    Pred,
    TRUE,
    VALUE_VAR,
    cmp_pred,
    piff,
    pnot,
)
from .syntax import BOOL, BOOLEAN, Const, FunType, NUM, NUMBER, PrimConst, SrcExpr
from .target import RBase, RFun, RefType

_NU = LinTerm.of_var(VALUE_VAR)


def _num(ref: Pred = TRUE) -> RBase:
    return RBase(NUMBER, ref)


def _bool(ref: Pred = TRUE) -> RBase:
    return RBase(BOOLEAN, ref)


def _fun(binder: str, dom: RefType, cod: RefType) -> RFun:
    return RFun(binder, dom, cod)


def _var(name: str) -> LinTerm:
    return LinTerm.of_var(name)


def _const_term(k: int) -> LinTerm:
    return LinTerm.of_const(k)


@lru_cache(maxsize=None)
def int_const(k: int) -> PrimConst:
    return PrimConst(
        name=str(k),
        source_type=NUM,
        refined_type=_num(cmp_pred(_NU, "=", _const_term(k))),
        delta=None,
    )


TRUE_CONST = PrimConst(
    name="true",
    source_type=BOOL,
    refined_type=_bool(PAtom(BVar(VALUE_VAR))),
    delta=None,
)

FALSE_CONST = PrimConst(
    name="false",
    source_type=BOOL,
    refined_type=_bool(pnot(PAtom(BVar(VALUE_VAR)))),
    delta=None,
)


def bool_const(b: bool) -> PrimConst:
    return TRUE_CONST if b else FALSE_CONST


def const_int_value(e: SrcExpr) -> int | None:
    if isinstance(e, Const) and e.con.source_type == NUM and e.con.delta is None:
        try:
            return int(e.con.name)
        except ValueError:
            return None
    return None


def const_bool_value(e: SrcExpr) -> bool | None:
    if isinstance(e, Const):
        if e.con == TRUE_CONST:
            return True
        if e.con == FALSE_CONST:
            return False
    return None


# Arithmetic: number -> number -> number


def _arith_stage2(op: str, k: int) -> PrimConst:
    """The derived constant ``op@k``: already applied to its first argument."""
    if op == "add":
        fn, ref = (lambda m: k + m), cmp_pred(_NU, "=", _const_term(k) + _var("$b"))
    elif op == "sub":
        fn, ref = (lambda m: k - m), cmp_pred(_NU, "=", _const_term(k) - _var("$b"))
    elif op == "mul":
        fn, ref = (lambda m: k * m), cmp_pred(_NU, "=", _var("$b").scale(k))
    else:
        raise ValueError(op)

    def delta(arg: SrcExpr) -> SrcExpr | None:
        m = const_int_value(arg)
        if m is None:
            return None
        return Const(int_const(fn(m)))

    return PrimConst(
        name=f"{op}@{k}",
        source_type=FunType(NUM, NUM),
        refined_type=_fun("$b", _num(), _num(ref)),
        delta=delta,
    )


@lru_cache(maxsize=None)
def arith_stage2(op: str, k: int) -> PrimConst:
    return _arith_stage2(op, k)


def _arith_const(op: str, exact: Pred | None) -> PrimConst:
    def delta(arg: SrcExpr) -> SrcExpr | None:
        k = const_int_value(arg)
        if k is None:
            return None
        return Const(arith_stage2(op, k))

    cod = _fun("$b", _num(), _num(exact if exact is not None else TRUE))
    return PrimConst(
        name=op,
        source_type=FunType(NUM, FunType(NUM, NUM)),
        refined_type=_fun("$a", _num(), cod),
        delta=delta,
    )


ADD = _arith_const("add", cmp_pred(_NU, "=", _var("$a") + _var("$b")))
SUB = _arith_const("sub", cmp_pred(_NU, "=", _var("$a") - _var("$b")))
# v = $a * $b is not linear, so the outer type of mul promises only a number;
# mul@k carries the exact linear refinement once the literal is known.
MUL = _arith_const("mul", None)


# Comparisons: number -> number -> boolean


_CMP_FNS = {
    "lt": ("<", lambda a, b: a < b),
    "le": ("<=", lambda a, b: a <= b),
    "eq": ("=", lambda a, b: a == b),
    "ne": ("!=", lambda a, b: a != b),
}


@lru_cache(maxsize=None)
def cmp_stage2(op: str, k: int) -> PrimConst:
    sym, fn = _CMP_FNS[op]

    def delta(arg: SrcExpr) -> SrcExpr | None:
        m = const_int_value(arg)
        if m is None:
            return None
        return Const(bool_const(fn(k, m)))

    ref = piff(PAtom(BVar(VALUE_VAR)), cmp_pred(_const_term(k), sym, _var("$b")))
    return PrimConst(
        name=f"{op}@{k}",
        source_type=FunType(NUM, BOOL),
        refined_type=_fun("$b", _num(), _bool(ref)),
        delta=delta,
    )


def _cmp_const(op: str) -> PrimConst:
    sym, _ = _CMP_FNS[op]

    def delta(arg: SrcExpr) -> SrcExpr | None:
        k = const_int_value(arg)
        if k is None:
            return None
        return Const(cmp_stage2(op, k))

    ref = piff(PAtom(BVar(VALUE_VAR)), cmp_pred(_var("$a"), sym, _var("$b")))
    return PrimConst(
        name=op,
        source_type=FunType(NUM, FunType(NUM, BOOL)),
        refined_type=_fun("$a", _num(), _fun("$b", _num(), _bool(ref))),
        delta=delta,
    )


LT = _cmp_const("lt")
LE = _cmp_const("le")
EQ = _cmp_const("eq")
NE = _cmp_const("ne")


def _not_delta(arg: SrcExpr) -> SrcExpr | None:
    b = const_bool_value(arg)
    if b is None:
        return None
    return Const(bool_const(not b))


NOT = PrimConst(
    name="not",
    source_type=FunType(BOOL, BOOL),
    refined_type=_fun("$a", _bool(), _bool(piff(PAtom(BVar(VALUE_VAR)), pnot(PAtom(BVar("$a")))))),
    delta=_not_delta,
)


NAMED_CONSTANTS: dict[str, PrimConst] = {
    c.name: c for c in (TRUE_CONST, FALSE_CONST, ADD, SUB, MUL, LT, LE, EQ, NE, NOT)
}


def lookup_const(name: str) -> PrimConst | None:
    """Resolve a constant name as it appears in source text."""
    if name in NAMED_CONSTANTS:
        return NAMED_CONSTANTS[name]
    try:
        return int_const(int(name))
    except ValueError:
        return None


def ty(c: PrimConst) -> RefType:
    """The refined type of a constant."""
    if c.refined_type is None:
        raise ValueError(f"constant {c.name} has no refined type")
    return c.refined_type


def delta_apply(c: PrimConst, v: SrcExpr) -> SrcExpr | None:
    """delta(c, v); None when undefined for this constant and argument."""
    if c.delta is None:
        return None
    return c.delta(v)
