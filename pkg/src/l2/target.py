"""Target language: terms, refinement types, type translation, erased checking.

Intersections elaborate to products, unions to tagged sums, and trust
obligations appear as DEAD-cast nodes.  Refinement types keep source
refinements attached to the translated skeleton; ``strip`` erases them again
for the simple type checker that validates elaborator output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .logic import (
    FALSE,
    Pred,
    TRUE,
    is_true,
    pnot,
    render_pred,
)
from . import syntax
from .syntax import (
    AndType,
    FunType,
    OrType,
    Pos,
    PrimConst,
    PrimType,
    SrcType,
)


# ---------------------------------------------------------------------------
# Refinement types and erased skeletons
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RBase:
    base: str  # "number" | "boolean"
    refinement: Pred = TRUE


@dataclass(frozen=True)
class RFun:
    binder: str
    dom: RefType
    cod: RefType


@dataclass(frozen=True)
class RSum:
    left: RefType
    right: RefType


@dataclass(frozen=True)
class RProd:
    left: RefType
    right: RefType


RefType = RBase | RFun | RSum | RProd


@dataclass(frozen=True)
class EPrim:
    base: str


@dataclass(frozen=True)
class EFun:
    dom: ErasedType
    cod: ErasedType


@dataclass(frozen=True)
class ESum:
    left: ErasedType
    right: ErasedType


@dataclass(frozen=True)
class EProd:
    left: ErasedType
    right: ErasedType


ErasedType = EPrim | EFun | ESum | EProd


class _FreshBinders:
    def __init__(self) -> None:
        self.n = 0

    def __call__(self) -> str:
        self.n += 1
        return f"$d{self.n}"


def elab_type(t: SrcType, _fresh: Optional[_FreshBinders] = None) -> RefType:
    """Translate a source type; intersections become products, unions sums.

    Refinements ride along unchanged.  Arrow binders get fresh names in a
    reserved namespace so they cannot collide with program variables.
    """
    fresh = _fresh or _FreshBinders()
    match t:
        case PrimType(base, refinement):
            return RBase(base, refinement)
        case FunType(dom, cod):
            return RFun(fresh(), elab_type(dom, fresh), elab_type(cod, fresh))
        case AndType(left, right):
            return RProd(elab_type(left, fresh), elab_type(right, fresh))
        case OrType(left, right):
            return RSum(elab_type(left, fresh), elab_type(right, fresh))
    raise TypeError(f"not a source type: {t!r}")


def strip(t: RefType) -> ErasedType:
    match t:
        case RBase(base, _):
            return EPrim(base)
        case RFun(_, dom, cod):
            return EFun(strip(dom), strip(cod))
        case RSum(left, right):
            return ESum(strip(left), strip(right))
        case RProd(left, right):
            return EProd(strip(left), strip(right))
    raise TypeError(f"not a refinement type: {t!r}")


def erase_src(t: SrcType) -> ErasedType:
    """Source type straight to the erased skeleton, bypassing refinements."""
    match t:
        case PrimType(base, _):
            return EPrim(base)
        case FunType(dom, cod):
            return EFun(erase_src(dom), erase_src(cod))
        case AndType(left, right):
            return EProd(erase_src(left), erase_src(right))
        case OrType(left, right):
            return ESum(erase_src(left), erase_src(right))
    raise TypeError(f"not a source type: {t!r}")


def unelab_type(t: RefType) -> SrcType:
    """Inverse of elab_type up to binder names; products back to intersections."""
    match t:
        case RBase(base, refinement):
            return PrimType(base, refinement)
        case RFun(_, dom, cod):
            return FunType(unelab_type(dom), unelab_type(cod))
        case RSum(left, right):
            return OrType(unelab_type(left), unelab_type(right))
        case RProd(left, right):
            return AndType(unelab_type(left), unelab_type(right))
    raise TypeError(f"not a refinement type: {t!r}")


def ftx(t: RefType, r: Pred) -> RefType:
    """Replace every base refinement with r, negating across arrow domains."""
    match t:
        case RBase(base, _):
            return RBase(base, r)
        case RFun(binder, dom, cod):
            return RFun(binder, ftx(dom, pnot(r)), ftx(cod, r))
        case RSum(left, right):
            return RSum(ftx(left, r), ftx(right, r))
        case RProd(left, right):
            return RProd(ftx(left, r), ftx(right, r))
    raise TypeError(f"not a refinement type: {t!r}")


def fbot(t: RefType) -> RefType:
    return ftx(t, FALSE)


def print_ref_type(t: RefType) -> str:
    return _print_ref(t, 0)


def _print_ref(t: RefType, prec: int) -> str:
    match t:
        case RBase(base, refinement):
            if is_true(refinement):
                return base
            return f"{{v:{base} | {render_pred(refinement)}}}"
        case RFun(binder, dom, cod):
            s = f"({binder}:{_print_ref(dom, 0)}) -> {_print_ref(cod, 0)}"
            return f"({s})" if prec > 0 else s
        case RSum(left, right):
            s = f"{_print_ref(left, 2)} + {_print_ref(right, 2)}"
            return f"({s})" if prec > 1 else s
        case RProd(left, right):
            s = f"{_print_ref(left, 3)} * {_print_ref(right, 3)}"
            return f"({s})" if prec > 2 else s
    raise TypeError(f"not a refinement type: {t!r}")


def print_erased(t: ErasedType) -> str:
    match t:
        case EPrim(base):
            return base
        case EFun(dom, cod):
            return f"({print_erased(dom)} -> {print_erased(cod)})"
        case ESum(left, right):
            return f"({print_erased(left)} + {print_erased(right)})"
        case EProd(left, right):
            return f"({print_erased(left)} * {print_erased(right)})"
    raise TypeError(f"not an erased type: {t!r}")


# ---------------------------------------------------------------------------
# Target terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TConst:
    con: PrimConst
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class TVar:
    name: str
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class TLam:
    """Lambda with the arrow type recorded by elaboration.

    The annotation is required by both the erased checker and refinement
    checking; lambdas only appear in elaborator output, which always knows
    the arrow type it checked against.
    """

    param: str
    body: TgtExpr
    src_ann: SrcType | None = None
    ref_ann: RefType | None = None
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class TIf:
    cond: TgtExpr
    then: TgtExpr
    els: TgtExpr
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class TApp:
    fn: TgtExpr
    arg: TgtExpr
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class TLet:
    name: str
    bound: TgtExpr
    body: TgtExpr
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class TPair:
    first: TgtExpr
    second: TgtExpr
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class TProj:
    index: int  # 1 | 2
    tuple_: TgtExpr
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class TInj:
    index: int  # 1 | 2
    payload: TgtExpr
    src_ann: SrcType | None = None  # the full union type
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class TCase:
    scrutinee: TgtExpr
    var1: str
    branch1: TgtExpr
    var2: str
    branch2: TgtExpr
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class TDead:
    from_ty: SrcType
    to_ty: SrcType
    inner: TgtExpr
    pos: Pos = field(default=None, compare=False)


TgtExpr = TConst | TVar | TLam | TIf | TApp | TLet | TPair | TProj | TInj | TCase | TDead


def is_target_value(w: TgtExpr) -> bool:
    """w ::= c | x | \\x.W | inj_k w | (W, W) | DEAD(t,s,w)

    Pair components need not be values; injection payloads and DEAD bodies do.
    """
    match w:
        case TConst() | TVar() | TLam() | TPair():
            return True
        case TInj(_, payload):
            return is_target_value(payload)
        case TDead(_, _, inner):
            return is_target_value(inner)
        case _:
            return False


def is_dead_value(w: TgtExpr) -> bool:
    return isinstance(w, TDead) and is_target_value(w.inner)


def target_free_vars(w: TgtExpr) -> frozenset[str]:
    match w:
        case TConst():
            return frozenset()
        case TVar(name):
            return frozenset([name])
        case TLam(param, body):
            return target_free_vars(body) - {param}
        case TIf(c, t, f):
            return target_free_vars(c) | target_free_vars(t) | target_free_vars(f)
        case TApp(fn, arg):
            return target_free_vars(fn) | target_free_vars(arg)
        case TLet(name, bound, body):
            return target_free_vars(bound) | (target_free_vars(body) - {name})
        case TPair(a, b):
            return target_free_vars(a) | target_free_vars(b)
        case TProj(_, t):
            return target_free_vars(t)
        case TInj(_, p):
            return target_free_vars(p)
        case TCase(s, x1, b1, x2, b2):
            return (
                target_free_vars(s)
                | (target_free_vars(b1) - {x1})
                | (target_free_vars(b2) - {x2})
            )
        case TDead(_, _, inner):
            return target_free_vars(inner)
    raise TypeError(f"not a target expression: {w!r}")


# ---------------------------------------------------------------------------
# Erased type checking of elaborator output
# ---------------------------------------------------------------------------


class IllTyped(Exception):
    def __init__(self, node: TgtExpr, expected: object, actual: object):
        self.node = node
        self.expected = expected
        self.actual = actual
        super().__init__(f"ill-typed target node: expected {expected}, got {actual}")


def simple_typecheck(env: dict[str, ErasedType], w: TgtExpr) -> ErasedType:
    """Simply-typed checking over the erased skeleton.

    A failure on elaborator output signals a bug in the first phase, not a
    problem with the checked program.
    """
    match w:
        case TConst(con):
            return erase_src(con.source_type)
        case TVar(name):
            if name not in env:
                raise IllTyped(w, "bound variable", f"unbound {name}")
            return env[name]
        case TLam(param, body, src_ann, _):
            if src_ann is None or not isinstance(src_ann, FunType):
                raise IllTyped(w, "annotated lambda", src_ann)
            dom = erase_src(src_ann.dom)
            cod = simple_typecheck({**env, param: dom}, body)
            expected_cod = erase_src(src_ann.cod)
            if cod != expected_cod:
                raise IllTyped(w, expected_cod, cod)
            return EFun(dom, cod)
        case TIf(c, t, f):
            c_ty = simple_typecheck(env, c)
            if c_ty != EPrim(syntax.BOOLEAN):
                raise IllTyped(w, EPrim(syntax.BOOLEAN), c_ty)
            tt = simple_typecheck(env, t)
            ft = simple_typecheck(env, f)
            if tt != ft:
                raise IllTyped(w, tt, ft)
            return tt
        case TApp(fn, arg):
            fn_ty = simple_typecheck(env, fn)
            if not isinstance(fn_ty, EFun):
                raise IllTyped(w, "function", fn_ty)
            arg_ty = simple_typecheck(env, arg)
            if arg_ty != fn_ty.dom:
                raise IllTyped(w, fn_ty.dom, arg_ty)
            return fn_ty.cod
        case TLet(name, bound, body):
            bound_ty = simple_typecheck(env, bound)
            return simple_typecheck({**env, name: bound_ty}, body)
        case TPair(a, b):
            return EProd(simple_typecheck(env, a), simple_typecheck(env, b))
        case TProj(index, t):
            t_ty = simple_typecheck(env, t)
            if not isinstance(t_ty, EProd):
                raise IllTyped(w, "product", t_ty)
            return t_ty.left if index == 1 else t_ty.right
        case TInj(index, payload, src_ann):
            if src_ann is None or not isinstance(src_ann, OrType):
                raise IllTyped(w, "annotated injection", src_ann)
            sum_ty = erase_src(src_ann)
            assert isinstance(sum_ty, ESum)
            arm = sum_ty.left if index == 1 else sum_ty.right
            payload_ty = simple_typecheck(env, payload)
            if payload_ty != arm:
                raise IllTyped(w, arm, payload_ty)
            return sum_ty
        case TCase(s, x1, b1, x2, b2):
            s_ty = simple_typecheck(env, s)
            if not isinstance(s_ty, ESum):
                raise IllTyped(w, "sum", s_ty)
            t1 = simple_typecheck({**env, x1: s_ty.left}, b1)
            t2 = simple_typecheck({**env, x2: s_ty.right}, b2)
            if t1 != t2:
                raise IllTyped(w, t1, t2)
            return t1
        case TDead(from_ty, to_ty, inner):
            inner_ty = simple_typecheck(env, inner)
            expected = erase_src(from_ty)
            if inner_ty != expected:
                raise IllTyped(w, expected, inner_ty)
            return erase_src(to_ty)
    raise TypeError(f"not a target expression: {w!r}")


# ---------------------------------------------------------------------------
# Substitution and printing
# ---------------------------------------------------------------------------


def subst_target(w: TgtExpr, x: str, value: TgtExpr) -> TgtExpr:
    """Capture-avoiding substitution; substituted values are closed in practice."""
    match w:
        case TConst():
            return w
        case TVar(name):
            return value if name == x else w
        case TLam(param, body, src_ann, ref_ann, pos):
            if param == x:
                return w
            if param in target_free_vars(value):
                fresh = param + "'"
                while fresh in target_free_vars(value) or fresh in target_free_vars(body):
                    fresh += "'"
                body = subst_target(body, param, TVar(fresh))
                return TLam(fresh, subst_target(body, x, value), src_ann, ref_ann, pos)
            return TLam(param, subst_target(body, x, value), src_ann, ref_ann, pos)
        case TIf(c, t, f, pos):
            return TIf(
                subst_target(c, x, value), subst_target(t, x, value), subst_target(f, x, value), pos
            )
        case TApp(fn, arg, pos):
            return TApp(subst_target(fn, x, value), subst_target(arg, x, value), pos)
        case TLet(name, bound, body, pos):
            bound2 = subst_target(bound, x, value)
            if name == x:
                return TLet(name, bound2, body, pos)
            return TLet(name, bound2, subst_target(body, x, value), pos)
        case TPair(a, b, pos):
            return TPair(subst_target(a, x, value), subst_target(b, x, value), pos)
        case TProj(index, t, pos):
            return TProj(index, subst_target(t, x, value), pos)
        case TInj(index, payload, src_ann, pos):
            return TInj(index, subst_target(payload, x, value), src_ann, pos)
        case TCase(s, x1, b1, x2, b2, pos):
            s2 = subst_target(s, x, value)
            b1n = b1 if x1 == x else subst_target(b1, x, value)
            b2n = b2 if x2 == x else subst_target(b2, x, value)
            return TCase(s2, x1, b1n, x2, b2n, pos)
        case TDead(from_ty, to_ty, inner, pos):
            return TDead(from_ty, to_ty, subst_target(inner, x, value), pos)
    raise TypeError(f"not a target expression: {w!r}")


def print_target(w: TgtExpr) -> str:
    return _print_target(w, 0)


def _print_target(w: TgtExpr, prec: int) -> str:
    match w:
        case TConst(con):
            return con.name
        case TVar(name):
            return name
        case TLam(param, body):
            s = f"\\{param} => {_print_target(body, 0)}"
            return f"({s})" if prec > 0 else s
        case TIf(c, t, f):
            s = (
                f"if {_print_target(c, 0)} then {_print_target(t, 0)} "
                f"else {_print_target(f, 0)}"
            )
            return f"({s})" if prec > 0 else s
        case TApp(fn, arg):
            fn_s = _print_target(fn, 0) if isinstance(fn, TApp) else _print_target(fn, 1)
            s = f"{fn_s} {_print_target(arg, 2)}"
            return f"({s})" if prec > 1 else s
        case TLet(name, bound, body):
            s = f"let {name} = {_print_target(bound, 0)} in {_print_target(body, 0)}"
            return f"({s})" if prec > 0 else s
        case TPair(a, b):
            return f"({_print_target(a, 0)}, {_print_target(b, 0)})"
        case TProj(index, t):
            return f"proj{index}({_print_target(t, 0)})"
        case TInj(index, payload):
            return f"inj{index}({_print_target(payload, 0)})"
        case TCase(s, x1, b1, x2, b2):
            body = (
                f"case {_print_target(s, 0)} of {x1} => {_print_target(b1, 0)} "
                f"| {x2} => {_print_target(b2, 0)}"
            )
            return f"({body})" if prec > 0 else body
        case TDead(from_ty, to_ty, inner):
            return (
                f"DEAD[{syntax.print_type(from_ty)} => {syntax.print_type(to_ty)}]"
                f"({_print_target(inner, 0)})"
            )
    raise TypeError(f"not a target expression: {w!r}")
