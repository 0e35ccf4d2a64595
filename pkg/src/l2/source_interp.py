"""Small-step operational semantics of the source language.

Six rules over left-to-right evaluation contexts:

    E ::= [] | let x = E in e | if E then e1 else e2 | E e | v E

Stepping is deterministic; stuck terms are reported with a reason instead of
raising.  Type ascriptions are erased before evaluation starts, they have no
runtime meaning.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import constants, syntax
from .syntax import App, Ascribe, Const, FunType, If, Lam, Let, SrcExpr, Var

DEFAULT_FUEL = 100000


@dataclass(frozen=True)
class Stepped:
    next: SrcExpr
    rule: str


@dataclass(frozen=True)
class AlreadyValue:
    pass


@dataclass(frozen=True)
class Stuck:
    reason: str
    focus: SrcExpr


StepResult = Stepped | AlreadyValue | Stuck


@dataclass(frozen=True)
class Value:
    value: SrcExpr


@dataclass(frozen=True)
class StuckAt:
    expr: SrcExpr
    reason: str


@dataclass(frozen=True)
class FuelExhausted:
    expr: SrcExpr


Outcome = Value | StuckAt | FuelExhausted


def subst_source(e: SrcExpr, x: str, v: SrcExpr) -> SrcExpr:
    """Capture-avoiding substitution of v for x in e."""
    match e:
        case Const():
            return e
        case Var(name):
            return v if name == x else e
        case Lam(param, body, pos):
            if param == x:
                return e
            if param in syntax.free_vars(v):
                fresh = param + "'"
                while fresh in syntax.free_vars(v) or fresh in syntax.free_vars(body):
                    fresh += "'"
                body = subst_source(body, param, Var(fresh))
                return Lam(fresh, subst_source(body, x, v), pos)
            return Lam(param, subst_source(body, x, v), pos)
        case Ascribe(expr, ty, pos):
            return Ascribe(subst_source(expr, x, v), ty, pos)
        case Let(name, bound, body, pos):
            bound2 = subst_source(bound, x, v)
            if name == x:
                return Let(name, bound2, body, pos)
            return Let(name, bound2, subst_source(body, x, v), pos)
        case If(c, t, f, pos):
            return If(subst_source(c, x, v), subst_source(t, x, v), subst_source(f, x, v), pos)
        case App(fn, arg, pos):
            return App(subst_source(fn, x, v), subst_source(arg, x, v), pos)
    raise TypeError(f"not a source expression: {e!r}")


def step_source(e: SrcExpr) -> StepResult:
    if isinstance(e, Ascribe):
        raise ValueError("ascriptions must be erased before evaluation")
    if syntax.is_value(e):
        return AlreadyValue()
    match e:
        case Let(name, bound, body, pos):
            if syntax.is_value(bound):
                return Stepped(subst_source(body, name, bound), "E-Let")
            inner = step_source(bound)
            if isinstance(inner, Stepped):
                return Stepped(Let(name, inner.next, body, pos), inner.rule)
            return inner
        case If(cond, then, els, pos):
            if syntax.is_value(cond):
                b = constants.const_bool_value(cond)
                if b is True:
                    return Stepped(then, "E-If-True")
                if b is False:
                    return Stepped(els, "E-If-False")
                return Stuck("if-non-boolean", e)
            inner = step_source(cond)
            if isinstance(inner, Stepped):
                return Stepped(If(inner.next, then, els, pos), inner.rule)
            return inner
        case App(fn, arg, pos):
            if not syntax.is_value(fn):
                inner = step_source(fn)
                if isinstance(inner, Stepped):
                    return Stepped(App(inner.next, arg, pos), inner.rule)
                return inner
            if not syntax.is_value(arg):
                inner = step_source(arg)
                if isinstance(inner, Stepped):
                    return Stepped(App(fn, inner.next, pos), inner.rule)
                return inner
            match fn:
                case Lam(param, body):
                    return Stepped(subst_source(body, param, arg), "E-App-B")
                case Const(con):
                    result = constants.delta_apply(con, arg)
                    if result is not None:
                        return Stepped(result, "E-App-A")
                    if isinstance(con.source_type, FunType):
                        return Stuck("delta-undefined", e)
                    return Stuck("apply-non-function", e)
                case _:
                    return Stuck("apply-non-function", e)
    raise TypeError(f"not a source expression: {e!r}")


def eval_source(e: SrcExpr, fuel: int = DEFAULT_FUEL) -> Outcome:
    outcome, _, _ = eval_source_trace(e, fuel)
    return outcome


def eval_source_trace(
    e: SrcExpr, fuel: int = DEFAULT_FUEL
) -> tuple[Outcome, list[str], list[SrcExpr]]:
    """Evaluate and keep the applied rule names and every intermediate term."""
    e = syntax.erase_ascriptions(e)
    rules: list[str] = []
    states: list[SrcExpr] = [e]
    for _ in range(fuel):
        result = step_source(e)
        match result:
            case AlreadyValue():
                return Value(e), rules, states
            case Stuck(reason, _):
                return StuckAt(e, reason), rules, states
            case Stepped(next_e, rule):
                rules.append(rule)
                states.append(next_e)
                e = next_e
    return FuelExhausted(e), rules, states
