"""Randomized program generation and executable metatheory checks.

The consistency theorems quantify existentially over elaboration witnesses,
so the harness verifies membership in the elaboration relation directly:
``elab_matches`` replays the relation with the target term as an oracle for
the non-deterministic choices (which conjunct, which union arm, where to
split).  Administrative projection chains over pairs are normalized away
before matching.

``lockstep_check`` runs a program in both languages and checks:
  (a) a terminal target value is matched by a terminal source value that
      elaborates to it at the program type,
  (b) every source intermediate elaborates to some target intermediate,
      scanning forward monotonically,
  (c) the two sides agree on stuckness, and a stuck target's redex carries
      a DEAD value.
Fuel exhaustion on either side makes the report inconclusive, never a
counterexample.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import constants, source_interp, syntax, target_interp
from .elaborate import ElabError, Elaborator, elaborate_program
from .logic import LinTerm, VALUE_VAR, cmp_pred
from .refine import PhaseOrderError, RefEnv, check_refined
from .syntax import (
    AndType,
    App,
    Ascribe,
    BOOL,
    Const,
    FunType,
    If,
    Lam,
    Let,
    NUM,
    OrType,
    PrimType,
    Program,
    SrcExpr,
    SrcType,
    Var,
    is_value,
    print_program,
    tags_disjoint,
    types_equal_basic,
)
from .target import (
    TApp,
    TCase,
    TConst,
    TDead,
    TIf,
    TInj,
    TLam,
    TLet,
    TPair,
    TProj,
    TVar,
    TgtExpr,
    subst_target,
)

Env = dict[str, SrcType]


# ---------------------------------------------------------------------------
# Administrative normalization and type reconstruction
# ---------------------------------------------------------------------------


def normalize_admin(w: TgtExpr) -> TgtExpr:
    """Reduce projection-over-pair chains everywhere; nothing else."""
    match w:
        case TConst() | TVar():
            return w
        case TLam(p, body, sa, ra, pos):
            return TLam(p, normalize_admin(body), sa, ra, pos)
        case TIf(c, t, f, pos):
            return TIf(normalize_admin(c), normalize_admin(t), normalize_admin(f), pos)
        case TApp(fn, arg, pos):
            return TApp(normalize_admin(fn), normalize_admin(arg), pos)
        case TLet(n, b, body, pos):
            return TLet(n, normalize_admin(b), normalize_admin(body), pos)
        case TPair(a, b, pos):
            return TPair(normalize_admin(a), normalize_admin(b), pos)
        case TProj(k, t, pos):
            t2 = normalize_admin(t)
            if isinstance(t2, TPair):
                return t2.first if k == 1 else t2.second
            return TProj(k, t2, pos)
        case TInj(k, p, ann, pos):
            return TInj(k, normalize_admin(p), ann, pos)
        case TCase(s, x1, b1, x2, b2, pos):
            return TCase(
                normalize_admin(s), x1, normalize_admin(b1), x2, normalize_admin(b2), pos
            )
        case TDead(ft, tt, inner, pos):
            return TDead(ft, tt, normalize_admin(inner), pos)
    raise TypeError(f"not a target expression: {w!r}")


def reconstruct_src_type(env: Env, w: TgtExpr) -> SrcType | None:
    """The source type a target term was elaborated at, read off its shape."""
    match w:
        case TConst(con):
            return con.source_type
        case TVar(name):
            return env.get(name)
        case TLam():
            return w.src_ann
        case TApp(fn, _):
            t = reconstruct_src_type(env, fn)
            return t.cod if isinstance(t, FunType) else None
        case TLet(name, bound, body):
            t1 = reconstruct_src_type(env, bound)
            if t1 is None:
                return None
            return reconstruct_src_type({**env, name: t1}, body)
        case TIf(_, then, _):
            return reconstruct_src_type(env, then)
        case TPair(a, b):
            ta, tb = reconstruct_src_type(env, a), reconstruct_src_type(env, b)
            if ta is None or tb is None:
                return None
            return AndType(ta, tb)
        case TProj(k, t):
            tt = reconstruct_src_type(env, t)
            if not isinstance(tt, AndType):
                return None
            return tt.left if k == 1 else tt.right
        case TInj():
            return w.src_ann
        case TCase(s, x1, b1, _, _):
            ts = reconstruct_src_type(env, s)
            if not isinstance(ts, OrType):
                return None
            return reconstruct_src_type({**env, x1: ts.left}, b1)
        case TDead(_, to_ty, _):
            return to_ty
    raise TypeError(f"not a target expression: {w!r}")


# ---------------------------------------------------------------------------
# The elaboration relation, verified against a target witness
# ---------------------------------------------------------------------------


def elab_matches(env: Env, e: SrcExpr, tau: SrcType, w: TgtExpr, depth: int = 400) -> bool:
    """Does (e, tau, w) lie in the elaboration relation?

    Each target constructor pins down the rule that introduced it, so the
    check is a deterministic replay except for union splits, which search the
    source term's evaluation-context decompositions.
    """
    if depth <= 0:
        return False
    d = depth - 1
    match w:
        case TDead(from_ty, to_ty, inner):
            return (
                types_equal_basic(to_ty, tau)
                and tags_disjoint(from_ty, tau)
                and elab_matches(env, e, from_ty, inner, d)
            )
        case TPair(w1, w2):
            return (
                isinstance(tau, AndType)
                and is_value(_peel(e))
                and elab_matches(env, e, tau.left, w1, d)
                and elab_matches(env, e, tau.right, w2, d)
            )
        case TProj(k, w0):
            t0 = reconstruct_src_type(env, w0)
            if not isinstance(t0, AndType):
                return False
            arm = t0.left if k == 1 else t0.right
            return types_equal_basic(arm, tau) and elab_matches(env, e, t0, w0, d)
        case TInj(k, w0, _):
            if not isinstance(tau, OrType):
                return False
            arm = tau.left if k == 1 else tau.right
            return elab_matches(env, e, arm, w0, d)
        case TCase(w0, x1, w1, x2, w2):
            t0 = reconstruct_src_type(env, w0)
            if not isinstance(t0, OrType):
                return False
            for plug, e0 in Elaborator._decompositions(e):
                if not elab_matches(env, e0, t0, w0, d):
                    continue
                env1 = {**env, x1: t0.left}
                env2 = {**env, x2: t0.right}
                if elab_matches(env1, plug(Var(x1)), tau, w1, d) and elab_matches(
                    env2, plug(Var(x2)), tau, w2, d
                ):
                    return True
            return False
    e = _peel_matching(e, tau)
    match (e, w):
        case (Const(ca), TConst(cb)):
            return ca == cb and types_equal_basic(ca.source_type, tau)
        case (Var(na), TVar(nb)):
            return na == nb and na in env and types_equal_basic(env[na], tau)
        case (Lam(p_e, body_e), TLam(p_w, body_w)):
            if not isinstance(tau, FunType):
                return False
            if p_e != p_w:
                body_w = subst_target(body_w, p_w, TVar(p_e))
            return elab_matches({**env, p_e: tau.dom}, body_e, tau.cod, body_w, d)
        case (Let(n_e, bound_e, body_e), TLet(n_w, bound_w, body_w)):
            t1 = reconstruct_src_type(env, bound_w)
            if t1 is None or not elab_matches(env, bound_e, t1, bound_w, d):
                return False
            if n_e != n_w:
                body_w = subst_target(body_w, n_w, TVar(n_e))
            return elab_matches({**env, n_e: t1}, body_e, tau, body_w, d)
        case (If(c_e, t_e, f_e), TIf(c_w, t_w, f_w)):
            return (
                elab_matches(env, c_e, BOOL, c_w, d)
                and elab_matches(env, t_e, tau, t_w, d)
                and elab_matches(env, f_e, tau, f_w, d)
            )
        case (App(fn_e, arg_e), TApp(fn_w, arg_w)):
            t_fn = reconstruct_src_type(env, fn_w)
            if not isinstance(t_fn, FunType) or not types_equal_basic(t_fn.cod, tau):
                return False
            return elab_matches(env, fn_e, t_fn, fn_w, d) and elab_matches(
                env, arg_e, t_fn.dom, arg_w, d
            )
        case _:
            return False


def _peel(e: SrcExpr) -> SrcExpr:
    while isinstance(e, Ascribe):
        e = e.expr
    return e


def _peel_matching(e: SrcExpr, tau: SrcType) -> SrcExpr:
    while isinstance(e, Ascribe) and types_equal_basic(e.ty, tau):
        e = e.expr
    return e


# ---------------------------------------------------------------------------
# Differential reports
# ---------------------------------------------------------------------------


@dataclass
class DiffReport:
    program: str
    verdict: str  # "agree" | "counterexample" | "inconclusive"
    kind: str | None = None
    step_index: int | None = None
    source_trace: list[str] = field(default_factory=list)
    target_trace: list[str] = field(default_factory=list)
    detail: str = ""

    def to_json(self) -> dict:
        return {
            "program": self.program,
            "verdict": self.verdict,
            "kind": self.kind,
            "step_index": self.step_index,
            "source_trace": self.source_trace,
            "target_trace": self.target_trace,
            "detail": self.detail,
        }


def lockstep_check(program: Program, fuel: int = 10000) -> DiffReport:
    text = print_program(program)
    result = elaborate_program(program)
    tau = result.type
    src = syntax.erase_ascriptions(program.main)
    s_out, s_rules, s_states = source_interp.eval_source_trace(src, fuel)
    t_out, t_rules, t_states = target_interp.eval_target_trace(result.target, fuel)

    def report(verdict: str, kind: str | None = None, idx: int | None = None, detail: str = ""):
        return DiffReport(text, verdict, kind, idx, s_rules, t_rules, detail)

    if isinstance(s_out, source_interp.FuelExhausted) or isinstance(
        t_out, target_interp.TFuelExhausted
    ):
        return report("inconclusive", "fuel-exhausted")

    normalized = [normalize_admin(wj) for wj in t_states]

    # (b) every source intermediate elaborates to some target intermediate
    j = 0
    for i, ei in enumerate(s_states):
        found = None
        for jj in range(j, len(normalized)):
            if elab_matches({}, ei, tau, normalized[jj]):
                found = jj
                break
        if found is None:
            return report(
                "counterexample", "reverse-consistency", i,
                f"source state {i} has no elaboration witness in the target trace",
            )
        j = found

    # (a)/(c) terminal agreement
    s_stuck = isinstance(s_out, source_interp.StuckAt)
    t_stuck = isinstance(t_out, target_interp.TStuckAt)
    if s_stuck != t_stuck:
        return report(
            "counterexample", "stuckness-mismatch", len(s_states) - 1,
            f"source {type(s_out).__name__} vs target {type(t_out).__name__}",
        )
    if t_stuck:
        focus = target_interp.stuck_focus(t_out.expr)
        if not target_interp.contains_dead_value(focus):
            return report(
                "counterexample", "stuck-without-dead", len(t_states) - 1,
                "target stuck redex carries no DEAD value",
            )
    else:
        # both values: the final alignment above already related them, but the
        # terminal target value must itself be matched by the source value
        if not elab_matches({}, s_states[-1], tau, normalized[-1]):
            return report(
                "counterexample", "multistep-consistency", len(s_states) - 1,
                "terminal values are not related by elaboration",
            )
    return report("agree")


def soundness_trial(program: Program, fuel: int = 10000, sample_every: int = 5) -> str:
    """Accepted programs must run without getting stuck and stay accepted.

    Returns "pass", "vacuous" (the program is not well two-typed), or a
    failure tag.
    """
    try:
        result = elaborate_program(program)
    except ElabError:
        return "vacuous"
    try:
        if not check_refined(RefEnv(), result.target).accepted:
            return "vacuous"
    except PhaseOrderError:
        return "fail:phase-order"
    src = syntax.erase_ascriptions(program.main)
    s_out, _, s_states = source_interp.eval_source_trace(src, fuel)
    if isinstance(s_out, source_interp.StuckAt):
        return "fail:stuck"
    tau = result.type
    _, _, t_states = target_interp.eval_target_trace(result.target, fuel)
    normalized = [normalize_admin(wj) for wj in t_states]
    j = 0
    for i in range(0, len(s_states), sample_every):
        found = None
        for jj in range(j, len(normalized)):
            if elab_matches({}, s_states[i], tau, normalized[jj]):
                found = jj
                break
        if found is None:
            return "fail:preservation-witness"
        j = found
        try:
            if not check_refined(RefEnv(), t_states[found]).accepted:
                return "fail:preservation"
        except PhaseOrderError:
            return "fail:phase-order"
    return "pass"


# ---------------------------------------------------------------------------
# Assumption and canonical-form trials
# ---------------------------------------------------------------------------


def _prim_redexes(e: SrcExpr, out: list[tuple[Const, SrcExpr]]) -> None:
    match e:
        case App(Const() as c, arg) if is_value(arg) and c.con.is_function:
            out.append((c, arg))
            _prim_redexes(arg, out)
        case Const() | Var():
            pass
        case Lam(_, body):
            _prim_redexes(body, out)
        case Ascribe(inner, _):
            _prim_redexes(inner, out)
        case Let(_, bound, body):
            _prim_redexes(bound, out)
            _prim_redexes(body, out)
        case If(c, t, f):
            for part in (c, t, f):
                _prim_redexes(part, out)
        case App(fn, arg):
            _prim_redexes(fn, out)
            _prim_redexes(arg, out)


def assumption1_check(program: Program, fuel: int = 10000) -> list[str]:
    """Primitive application agrees between the languages for non-DEAD values."""
    violations: list[str] = []
    src = syntax.erase_ascriptions(program.main)
    _, _, states = source_interp.eval_source_trace(src, fuel)
    seen: set[tuple[str, str]] = set()
    elaborator = Elaborator()
    for state in states:
        pairs: list[tuple[Const, SrcExpr]] = []
        _prim_redexes(state, pairs)
        for c, v in pairs:
            key = (c.con.name, syntax.print_expr(v))
            if key in seen:
                continue
            seen.add(key)
            dom = c.con.source_type.dom
            step = source_interp.step_source(App(c, v))
            if not isinstance(step, source_interp.Stepped):
                continue  # delta undefined: the assumption does not apply
            try:
                w, _ = elaborator.check_expr({}, v, dom)
            except ElabError:
                violations.append(f"{key}: argument does not elaborate at the domain")
                continue
            if target_interp.is_dead_value(normalize_admin(w)):
                continue
            t_step = target_interp.step_target(TApp(TConst(c.con), w))
            if not isinstance(t_step, target_interp.TStepped):
                violations.append(f"{key}: target application does not step")
                continue
            if not elab_matches({}, step.next, c.con.source_type.cod, normalize_admin(t_step.next)):
                violations.append(f"{key}: results are not related by elaboration")
    return violations


def canonical_forms_check(program: Program, fuel: int = 10000) -> list[str]:
    """Terminal target values at lambda/constant sources are the expected shapes."""
    violations: list[str] = []
    try:
        result = elaborate_program(program)
    except ElabError:
        return violations
    src = syntax.erase_ascriptions(program.main)
    s_out, _, _ = source_interp.eval_source_trace(src, fuel)
    t_out, _, _ = target_interp.eval_target_trace(result.target, fuel)
    if not isinstance(s_out, source_interp.Value) or not isinstance(t_out, target_interp.TValue):
        return violations
    v, w = s_out.value, normalize_admin(t_out.value)
    if isinstance(v, Lam):
        ok = isinstance(w, TLam) or target_interp.is_dead_value(w) or isinstance(w, TPair)
        if not ok:
            violations.append(f"lambda value elaborated to {type(w).__name__}")
    elif isinstance(v, Const):
        ok = (
            (isinstance(w, TConst) and w.con == v.con)
            or target_interp.is_dead_value(w)
            or isinstance(w, (TInj, TPair))
        )
        if not ok:
            violations.append(f"constant value elaborated to {type(w).__name__}")
    return violations


def substitution_spot_check(program: Program, fuel: int = 2000) -> list[str]:
    """Substitution commutes with elaboration along let reductions."""
    violations: list[str] = []
    try:
        result = elaborate_program(program)
    except ElabError:
        return violations
    tau = result.type
    src = syntax.erase_ascriptions(program.main)
    _, _, s_states = source_interp.eval_source_trace(src, fuel)
    _, _, t_states = target_interp.eval_target_trace(result.target, fuel)
    normalized = [normalize_admin(wj) for wj in t_states]
    for i, state in enumerate(s_states):
        if not isinstance(state, Let) or not is_value(state.bound):
            continue
        # Find the matching target state that is also a rooted let over a value.
        for wj in normalized:
            if (
                isinstance(wj, TLet)
                and target_interp.is_target_value(wj.bound)
                and wj.name == state.name
                and elab_matches({}, state, tau, wj)
            ):
                reduced_src = source_interp.subst_source(state.body, state.name, state.bound)
                reduced_tgt = subst_target(wj.body, wj.name, wj.bound)
                if not elab_matches({}, reduced_src, tau, normalize_admin(reduced_tgt)):
                    violations.append(f"substitution mismatch at source step {i}")
                break
    return violations


# ---------------------------------------------------------------------------
# Program generation
# ---------------------------------------------------------------------------

_TT = PrimType(syntax.NUMBER, cmp_pred(LinTerm.of_var(VALUE_VAR), "!=", LinTerm.of_const(0)))
_FF = PrimType(syntax.NUMBER, cmp_pred(LinTerm.of_var(VALUE_VAR), "=", LinTerm.of_const(0)))


class _Gen:
    """Typed program generator.

    Two flags discipline every position.  ``synth`` marks positions the
    elaborator will synthesize rather than check (let bindings, the top
    level, DEAD-cast bodies): no tag mismatch may sit at their root and no
    union variable may be consumed there.  ``pure`` marks positions whose
    runtime value can escape into a variable or an enclosing cast: such
    subtrees must produce plain values of their static tag, so casts are
    confined to consumed positions (primitive arguments, conditions).
    Violating the discipline would stack DEAD casts whose tags cancel, and
    the target would get stuck where the source runs on.
    """

    def __init__(self, rng: random.Random, dead_density: float):
        self.rng = rng
        self.dead_density = dead_density
        self.fresh = 0
        self.union_arms: dict[str, int] = {}
        # Overloaded-call arguments must elaborate strictly so resolution
        # picks the intended clone, and union payloads must carry their arm's
        # tag at runtime so injection picks the faithful arm.  Both break if
        # the subtree consumes a union variable (one case branch always needs
        # a cast), so union machinery is suppressed at such positions.
        self.strict_depth = 0

    def name(self, base: str) -> str:
        self.fresh += 1
        return f"{base}{self.fresh}"

    def base_type(self) -> SrcType:
        return self.rng.choice([NUM, BOOL])

    def refined_num(self) -> SrcType:
        return self.rng.choice([NUM, _TT, _FF])

    def literal(self, tau: SrcType) -> SrcExpr:
        if types_equal_basic(tau, NUM):
            return Const(constants.int_const(self.rng.randint(-4, 4)))
        return Const(constants.bool_const(self.rng.random() < 0.5))

    def pick_var(self, env: Env, tau: SrcType) -> SrcExpr | None:
        options = [n for n, t in env.items() if types_equal_basic(t, tau)]
        if not options:
            return None
        return Var(self.rng.choice(sorted(options)))

    def union_arm_var(self, env: Env, tau: SrcType) -> SrcExpr | None:
        """A union variable whose recorded runtime arm is tau; using it at
        tau forces a case split whose taken branch is cast-free."""
        options = []
        for n, t in env.items():
            if isinstance(t, OrType) and n in self.union_arms:
                arm = t.left if self.union_arms[n] == 1 else t.right
                if types_equal_basic(arm, tau):
                    options.append(n)
        if not options:
            return None
        return Var(self.rng.choice(sorted(options)))

    def expr_at(
        self, env: Env, tau: SrcType, budget: int, synth: bool, pure: bool
    ) -> SrcExpr:
        rng = self.rng
        if not synth and not pure and budget > 1 and rng.random() < self.dead_density:
            other = self.mismatched_type(tau)
            if other is not None:
                return self.expr_at(env, other, max(1, budget - 1), True, True)
        if budget <= 1:
            return self.leaf(env, tau, synth)
        roll = rng.random()
        if isinstance(tau, OrType):
            if synth:
                var = self.pick_var(env, tau)
                if var is not None:
                    return var
                return Ascribe(self.leaf(env, self._pick_arm(tau), True), tau)
            arm = self._pick_arm(tau)
            self.strict_depth += 1
            try:
                return self.expr_at(env, arm, budget - 1, False, True)
            finally:
                self.strict_depth -= 1
        if isinstance(tau, (FunType, AndType)):
            var = self.pick_var(env, tau)
            if var is not None and roll < 0.5:
                return var
            return self.function_at(env, tau, budget, pure)
        # base types
        if roll < 0.18:
            cond = self.bool_expr(env, budget // 3)
            half = max(1, (budget - 2) // 2)
            return If(cond, self.expr_at(env, tau, half, synth, pure),
                      self.expr_at(env, tau, half, synth, pure))
        if roll < 0.40:
            return self.let_in(env, tau, budget, synth, pure)
        if roll < 0.62:
            return self.call(env, tau, budget, pure)
        if roll < 0.72 and types_equal_basic(tau, NUM):
            op = rng.choice([constants.ADD, constants.SUB, constants.MUL])
            half = max(1, (budget - 2) // 2)
            # primitive arguments are consumed by delta, so casts may appear
            return App(App(Const(op), self.expr_at(env, NUM, half, False, False)),
                       self.expr_at(env, NUM, half, False, False))
        return self.leaf(env, tau, synth)

    def _pick_arm(self, tau: OrType) -> SrcType:
        return tau.left if self.rng.random() < 0.5 else tau.right

    def leaf(self, env: Env, tau: SrcType, synth: bool) -> SrcExpr:
        if (not synth and self.strict_depth == 0 and isinstance(tau, PrimType)
                and self.rng.random() < 0.5):
            split = self.union_arm_var(env, tau)
            if split is not None:
                return split
        var = self.pick_var(env, tau)
        if var is not None and self.rng.random() < 0.6:
            return var
        match tau:
            case PrimType():
                return self.literal(tau)
            case OrType():
                return self.leaf(env, self._pick_arm(tau), synth)
            case _:
                if var is not None:
                    return var
                return self.function_at(env, tau, 4, True)

    def mismatched_type(self, tau: SrcType) -> SrcType | None:
        """A type whose tag set is disjoint from tau's, for DEAD injection."""
        candidates = [NUM, BOOL, FunType(NUM, NUM)]
        options = [t for t in candidates if tags_disjoint(t, tau)]
        if not options:
            return None
        return self.rng.choice(options)

    def bool_expr(self, env: Env, budget: int) -> SrcExpr:
        rng = self.rng
        if budget > 2 and rng.random() < 0.7:
            op = rng.choice([constants.LT, constants.LE, constants.EQ, constants.NE])
            half = max(1, (budget - 2) // 2)
            return App(App(Const(op), self.expr_at(env, NUM, half, False, False)),
                       self.expr_at(env, NUM, half, False, False))
        return self.expr_at(env, BOOL, 1, False, False)

    def let_in(self, env: Env, tau: SrcType, budget: int, synth: bool, pure: bool) -> SrcExpr:
        rng = self.rng
        x = self.name("x")
        roll = rng.random()
        if roll < 0.25 and self.strict_depth == 0:
            # union-typed binding; the actual arm is recorded so later case
            # splits take their cast-free branch at runtime
            arms = (NUM, BOOL) if rng.random() < 0.7 else (BOOL, NUM)
            union = OrType(*arms)
            k = 1 if rng.random() < 0.5 else 2
            arm = union.left if k == 1 else union.right
            self.strict_depth += 1
            try:
                payload = self.expr_at(env, arm, budget // 3, False, True)
            finally:
                self.strict_depth -= 1
            bound = Ascribe(payload, union)
            self.union_arms[x] = k
            body = self.expr_at({**env, x: union}, tau, budget - 3, synth, pure)
            return Let(x, bound, body)
        bound_ty = self.base_type() if roll < 0.8 else FunType(self.base_type(), self.base_type())
        if isinstance(bound_ty, FunType):
            bound: SrcExpr = self.function_at(env, bound_ty, budget // 3, True)
        else:
            # binding values escape into the environment, so they stay pure
            bound = Ascribe(self.expr_at(env, bound_ty, budget // 3, False, True), bound_ty)
        body = self.expr_at({**env, x: bound_ty}, tau, budget - budget // 3 - 1, synth, pure)
        return Let(x, bound, body)

    def function_at(self, env: Env, tau: SrcType, budget: int, pure: bool) -> SrcExpr:
        """An ascribed lambda (or clone pair) at an arrow or intersection."""
        match tau:
            case FunType(dom, cod):
                x = self.name("p")
                body = self.expr_at({**env, x: dom}, cod, max(1, budget - 2), False, pure)
                return Ascribe(Lam(x, body), tau)
            case AndType():
                if not pure and _conjunct_arrows(tau) is not None:
                    return self.overloaded(env, tau, budget)
                leaf = self.leaf(env, tau.left, True)
                if not is_value(leaf):
                    leaf = self.literal(tau.left) if isinstance(tau.left, PrimType) else leaf
                return Ascribe(leaf, tau)
        return self.leaf(env, tau, True)

    def overloaded(self, env: Env, tau: AndType, budget: int) -> SrcExpr:
        """A guard-dispatched two-clone function in the style of overloaded
        numeric/boolean negation: \\p => \\q => if ne p 0 then ... else ..."""
        arrows = _conjunct_arrows(tau)
        assert arrows is not None
        left, right = arrows
        p, q = self.name("p"), self.name("q")
        inner_budget = max(1, (budget - 4) // 2)
        then_body = self.expr_at(
            {**env, p: NUM, q: _dom_of(left.cod)}, _cod_of(left.cod), inner_budget, False, True
        )
        else_body = self.expr_at(
            {**env, p: NUM, q: _dom_of(right.cod)}, _cod_of(right.cod), inner_budget, False, True
        )
        guard = App(App(Const(constants.NE), Var(p)), Const(constants.int_const(0)))
        lam = Lam(p, Lam(q, If(guard, then_body, else_body)))
        return Ascribe(lam, tau)

    def call(self, env: Env, tau: SrcType, budget: int, pure: bool) -> SrcExpr:
        rng = self.rng
        roll = rng.random()
        if roll < 0.35 and budget >= 10 and isinstance(tau, PrimType) and not pure:
            # fresh overloaded function applied to a matching argument pair
            a_ty, b_ty = (NUM, BOOL) if rng.random() < 0.5 else (BOOL, NUM)
            g1, g2 = self.refined_num(), self.refined_num()
            over = AndType(
                FunType(g1, FunType(a_ty, tau)), FunType(g2, FunType(b_ty, tau))
            )
            if not syntax.wf_type(over).ok:
                return self.leaf(env, tau, False)
            f = self.name("f")
            fn = self.overloaded(env, over, budget // 2)
            pick_first = rng.random() < 0.5
            arg_ty = a_ty if pick_first else b_ty
            guard_val = rng.randint(0, 1)
            self.strict_depth += 1
            try:
                arg = self.expr_at(env, arg_ty, max(1, budget // 4), False, True)
            finally:
                self.strict_depth -= 1
            call = App(App(Var(f), Const(constants.int_const(guard_val))), arg)
            return Let(f, fn, call)
        if not isinstance(tau, PrimType):
            return self.leaf(env, tau, False)
        # plain unary call: the argument binds to the parameter, so it stays
        # pure; the body's value is the call's value and inherits purity
        dom = self.base_type()
        fn = self.function_at(env, FunType(dom, tau), budget // 2, pure)
        arg = self.expr_at(env, dom, max(1, budget - budget // 2 - 1), False, True)
        return App(fn, arg)


def _conjunct_arrows(tau: AndType) -> tuple[FunType, FunType] | None:
    l, r = tau.left, tau.right
    if (
        isinstance(l, FunType)
        and isinstance(r, FunType)
        and types_equal_basic(l.dom, NUM)
        and types_equal_basic(r.dom, NUM)
        and isinstance(l.cod, FunType)
        and isinstance(r.cod, FunType)
    ):
        return l, r
    return None


def _dom_of(t: SrcType) -> SrcType:
    assert isinstance(t, FunType)
    return t.dom


def _cod_of(t: SrcType) -> SrcType:
    assert isinstance(t, FunType)
    return t.cod


def gen_program(seed: int, size_budget: int = 30, dead_density: float = 0.12) -> Program:
    """Deterministic per seed; the output always passes phase 1.

    The top level is synthesized, so the root is generated mismatch-free;
    DEAD casts appear in the checking positions beneath it.
    """
    rng = random.Random(seed)
    gen = _Gen(rng, dead_density)
    top = gen.base_type() if size_budget > 1 else NUM
    main = gen.expr_at({}, top, size_budget, True, False)
    return Program((), syntax.uniquify(main))


# ---------------------------------------------------------------------------
# Shrinking and the fuzz loop
# ---------------------------------------------------------------------------


def _shrink_candidates(e: SrcExpr):
    match e:
        case Let(name, _, body) if name not in syntax.free_vars(body):
            yield body
        case Const(con) if constants.const_int_value(e) not in (None, 0):
            yield Const(constants.int_const(0))
        case _:
            pass
    for attr in ("body", "bound", "cond", "then", "els", "fn", "arg", "expr"):
        child = getattr(e, attr, None)
        if child is not None and isinstance(child, (Const, Var, Lam, Ascribe, Let, If, App)):
            for shrunk in _shrink_candidates(child):
                yield _replace_child(e, attr, shrunk)


def _replace_child(e: SrcExpr, attr: str, new):
    from dataclasses import replace

    return replace(e, **{attr: new})


def shrink_counterexample(program: Program, fuel: int) -> Program:
    current = program
    improved = True
    while improved:
        improved = False
        for candidate_main in _shrink_candidates(current.main):
            candidate = Program(current.type_aliases, candidate_main)
            try:
                if lockstep_check(candidate, fuel).verdict == "counterexample":
                    current = candidate
                    improved = True
                    break
            except ElabError:
                continue
    return current


@dataclass
class FuzzStats:
    reports: list[DiffReport]
    counterexamples: int
    inconclusive: int
    assumption1_violations: int
    canonical_violations: int
    substitution_violations: int
    soundness_failures: int
    accepted: int


def run_fuzz(
    trials: int,
    seed: int = 0,
    fuel: int = 10000,
    size_budget: int = 30,
    dead_density: float = 0.12,
    check_soundness: bool = True,
    shrink: bool = False,
) -> FuzzStats:
    reports: list[DiffReport] = []
    a1 = canon = subst = sound_fail = accepted = 0
    for i in range(trials):
        program = gen_program(seed + i, size_budget, dead_density)
        report = lockstep_check(program, fuel)
        if report.verdict == "counterexample" and shrink:
            program = shrink_counterexample(program, fuel)
            report = lockstep_check(program, fuel)
        reports.append(report)
        a1 += len(assumption1_check(program, fuel))
        canon += len(canonical_forms_check(program, fuel))
        subst += len(substitution_spot_check(program))
        if check_soundness:
            verdict = soundness_trial(program, fuel)
            if verdict == "pass":
                accepted += 1
            elif verdict.startswith("fail"):
                sound_fail += 1
    return FuzzStats(
        reports,
        sum(1 for r in reports if r.verdict == "counterexample"),
        sum(1 for r in reports if r.verdict == "inconclusive"),
        a1,
        canon,
        subst,
        sound_fail,
        accepted,
    )
