"""Predicate language and validity checking for verification conditions.

The logic is quantifier-free linear integer arithmetic plus boolean atoms.
A verification condition ``H1 ... Hn => (p => q)`` is discharged in-process:
negate it, normalize to disjunctive normal form, and refute every cube with
an integer-tightened Fourier-Motzkin elimination.  "valid" verdicts are
sound: a reported tautology has no integer counter-model.  Cubes that are
satisfiable over the rationals but not the integers are conservatively
reported as invalid.

SMT-LIB2 emission is provided so the same conditions can be cross-checked
with an external solver.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import gcd

VALUE_VAR = "v"


class ResourceLimit(Exception):
    """DNF expansion exceeded the configured clause budget."""


# ---------------------------------------------------------------------------
# Linear terms and atoms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinTerm:
    """Integer-linear term: sum of coeff*name plus a constant."""

    coeffs: tuple[tuple[str, int], ...] = ()
    const: int = 0

    @staticmethod
    def of_const(k: int) -> LinTerm:
        return LinTerm((), k)

    @staticmethod
    def of_var(name: str, coeff: int = 1) -> LinTerm:
        if coeff == 0:
            return LinTerm((), 0)
        return LinTerm(((name, coeff),), 0)

    def __add__(self, other: LinTerm) -> LinTerm:
        acc = dict(self.coeffs)
        for name, c in other.coeffs:
            acc[name] = acc.get(name, 0) + c
        coeffs = tuple(sorted((n, c) for n, c in acc.items() if c != 0))
        return LinTerm(coeffs, self.const + other.const)

    def __sub__(self, other: LinTerm) -> LinTerm:
        return self + other.scale(-1)

    def scale(self, k: int) -> LinTerm:
        if k == 0:
            return LinTerm((), 0)
        return LinTerm(tuple((n, c * k) for n, c in self.coeffs), self.const * k)

    def subst_var(self, name: str, replacement: LinTerm) -> LinTerm:
        coeff = dict(self.coeffs).get(name)
        if coeff is None:
            return self
        rest = LinTerm(tuple((n, c) for n, c in self.coeffs if n != name), self.const)
        return rest + replacement.scale(coeff)

    def names(self) -> frozenset[str]:
        return frozenset(n for n, _ in self.coeffs)

    def is_const(self) -> bool:
        return not self.coeffs

    def render(self) -> str:
        if not self.coeffs:
            return str(self.const)
        parts = []
        for name, c in self.coeffs:
            if not parts:
                if c == 1:
                    parts.append(name)
                elif c == -1:
                    parts.append(f"-{name}")
                else:
                    parts.append(f"{c}*{name}")
            else:
                sign = "+" if c > 0 else "-"
                mag = abs(c)
                parts.append(f" {sign} {name}" if mag == 1 else f" {sign} {mag}*{name}")
        if self.const > 0:
            parts.append(f" + {self.const}")
        elif self.const < 0:
            parts.append(f" - {-self.const}")
        return "".join(parts)


CMP_OPS = ("<", "<=", "=", "!=", ">=", ">")

_FLIP = {"<": ">=", "<=": ">", "=": "!=", "!=": "=", ">=": "<", ">": "<="}


@dataclass(frozen=True)
class Cmp:
    """Comparison of two linear integer terms."""

    lhs: LinTerm
    op: str
    rhs: LinTerm

    def flip(self) -> Cmp:
        return Cmp(self.lhs, _FLIP[self.op], self.rhs)

    def render(self) -> str:
        return f"{self.lhs.render()} {self.op} {self.rhs.render()}"


@dataclass(frozen=True)
class BVar:
    """A boolean variable used as an atom."""

    name: str

    def render(self) -> str:
        return self.name


Atom = Cmp | BVar


# ---------------------------------------------------------------------------
# Predicates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PBool:
    value: bool


@dataclass(frozen=True)
class PAtom:
    atom: Atom


@dataclass(frozen=True)
class PNot:
    inner: Pred


@dataclass(frozen=True)
class PAnd:
    parts: tuple[Pred, ...]


@dataclass(frozen=True)
class POr:
    parts: tuple[Pred, ...]


@dataclass(frozen=True)
class PImp:
    hyp: Pred
    concl: Pred


@dataclass(frozen=True)
class PIff:
    left: Pred
    right: Pred


@dataclass(frozen=True)
class PKappa:
    """Opaque refinement-variable application, resolved by inference.

    ``subst`` maps template names (the value variable and scope names) to the
    terms they were instantiated with; values are LinTerm, bool, or a boolean
    variable name.
    """

    kappa: str
    subst: tuple[tuple[str, object], ...] = ()


Pred = PBool | PAtom | PNot | PAnd | POr | PImp | PIff | PKappa

TRUE = PBool(True)
FALSE = PBool(False)


def pand(parts) -> Pred:
    flat: list[Pred] = []
    for p in parts:
        if isinstance(p, PBool):
            if not p.value:
                return FALSE
            continue
        if isinstance(p, PAnd):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return PAnd(tuple(flat))


def por(parts) -> Pred:
    flat: list[Pred] = []
    for p in parts:
        if isinstance(p, PBool):
            if p.value:
                return TRUE
            continue
        if isinstance(p, POr):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return POr(tuple(flat))


def pnot(p: Pred) -> Pred:
    match p:
        case PBool(b):
            return PBool(not b)
        case PNot(inner):
            return inner
        case PAtom(Cmp() as c):
            return PAtom(c.flip())
        case _:
            return PNot(p)


def pimp(hyp: Pred, concl: Pred) -> Pred:
    if isinstance(hyp, PBool):
        return concl if hyp.value else TRUE
    if isinstance(concl, PBool) and concl.value:
        return TRUE
    return PImp(hyp, concl)


def piff(left: Pred, right: Pred) -> Pred:
    if isinstance(left, PBool):
        return right if left.value else pnot(right)
    if isinstance(right, PBool):
        return left if right.value else pnot(left)
    return PIff(left, right)


def cmp_pred(lhs: LinTerm, op: str, rhs: LinTerm) -> Pred:
    if op not in CMP_OPS:
        raise ValueError(f"unknown comparison operator {op!r}")
    return PAtom(Cmp(lhs, op, rhs))


def contains_kappa(p: Pred) -> bool:
    match p:
        case PKappa():
            return True
        case PNot(inner):
            return contains_kappa(inner)
        case PAnd(parts) | POr(parts):
            return any(contains_kappa(q) for q in parts)
        case PImp(a, b):
            return contains_kappa(a) or contains_kappa(b)
        case PIff(a, b):
            return contains_kappa(a) or contains_kappa(b)
        case _:
            return False


def kappas_of(p: Pred) -> frozenset[str]:
    match p:
        case PKappa(k, _):
            return frozenset([k])
        case PNot(inner):
            return kappas_of(inner)
        case PAnd(parts) | POr(parts):
            out: frozenset[str] = frozenset()
            for q in parts:
                out |= kappas_of(q)
            return out
        case PImp(a, b) | PIff(a, b):
            return kappas_of(a) | kappas_of(b)
        case _:
            return frozenset()


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------


def _subst_value(value, name: str, repl):
    """Substitute inside a kappa-substitution payload."""
    if isinstance(value, LinTerm):
        if isinstance(repl, LinTerm):
            return value.subst_var(name, repl)
        return value
    if isinstance(value, str) and value == name:
        return repl
    return value


def subst_pred(p: Pred, name: str, repl) -> Pred:
    """Substitute ``repl`` for ``name`` in p.

    ``repl`` is a LinTerm (integer positions), a bool, or a boolean variable
    name (string).  Integer substitution rewrites linear terms; boolean
    substitution rewrites BVar atoms.
    """
    match p:
        case PBool():
            return p
        case PAtom(Cmp(lhs, op, rhs)):
            if isinstance(repl, LinTerm):
                return PAtom(Cmp(lhs.subst_var(name, repl), op, rhs.subst_var(name, repl)))
            return p
        case PAtom(BVar(n)):
            if n != name:
                return p
            if isinstance(repl, bool):
                return PBool(repl)
            if isinstance(repl, str):
                return PAtom(BVar(repl))
            return p
        case PNot(inner):
            return pnot(subst_pred(inner, name, repl))
        case PAnd(parts):
            return pand(subst_pred(q, name, repl) for q in parts)
        case POr(parts):
            return por(subst_pred(q, name, repl) for q in parts)
        case PImp(a, b):
            return pimp(subst_pred(a, name, repl), subst_pred(b, name, repl))
        case PIff(a, b):
            return piff(subst_pred(a, name, repl), subst_pred(b, name, repl))
        case PKappa(k, subst):
            # Rewrite recorded values, and record the new entry unless the
            # name was already consumed by an earlier substitution.  Names in
            # the reserved $ namespace never occur in solved refinements
            # (candidates range over the value variable and program names),
            # so substitutions for them are dropped rather than recorded.
            entries = tuple((n, _subst_value(v, name, repl)) for n, v in subst)
            if not name.startswith("$") and name not in (n for n, _ in subst):
                entries += ((name, repl),)
            return PKappa(k, entries)
    raise TypeError(f"not a predicate: {p!r}")


def instantiate_kappas(p: Pred, assignment: dict[str, Pred]) -> Pred:
    """Replace every kappa application with its assigned predicate."""
    match p:
        case PKappa(k, subst):
            body = assignment[k]
            # Simultaneous substitution: detour through fresh temporaries.
            temps = {n: f"$tmp{i}${n}" for i, (n, _) in enumerate(subst)}
            for n, _ in subst:
                tmp = temps[n]
                body = subst_pred(body, n, LinTerm.of_var(tmp))
                body = subst_pred(body, n, tmp)  # boolean position
            for n, value in subst:
                body = subst_pred(body, temps[n], value)
            return body
        case PNot(inner):
            return pnot(instantiate_kappas(inner, assignment))
        case PAnd(parts):
            return pand(instantiate_kappas(q, assignment) for q in parts)
        case POr(parts):
            return por(instantiate_kappas(q, assignment) for q in parts)
        case PImp(a, b):
            return pimp(instantiate_kappas(a, assignment), instantiate_kappas(b, assignment))
        case PIff(a, b):
            return piff(instantiate_kappas(a, assignment), instantiate_kappas(b, assignment))
        case _:
            return p


def free_names(p: Pred) -> frozenset[str]:
    match p:
        case PBool():
            return frozenset()
        case PAtom(Cmp(lhs, _, rhs)):
            return lhs.names() | rhs.names()
        case PAtom(BVar(n)):
            return frozenset([n])
        case PNot(inner):
            return free_names(inner)
        case PAnd(parts) | POr(parts):
            out: frozenset[str] = frozenset()
            for q in parts:
                out |= free_names(q)
            return out
        case PImp(a, b) | PIff(a, b):
            return free_names(a) | free_names(b)
        case PKappa(_, subst):
            out = frozenset()
            for _, value in subst:
                if isinstance(value, LinTerm):
                    out |= value.names()
                elif isinstance(value, str):
                    out |= frozenset([value])
            return out
    raise TypeError(f"not a predicate: {p!r}")


# ---------------------------------------------------------------------------
# Rendering and canonical keys
# ---------------------------------------------------------------------------


def render_pred(p: Pred) -> str:
    match p:
        case PBool(b):
            return "true" if b else "false"
        case PAtom(a):
            return a.render()
        case PNot(inner):
            return f"!({render_pred(inner)})"
        case PAnd(parts):
            return " && ".join(_render_nested(q) for q in parts)
        case POr(parts):
            return " || ".join(_render_nested(q) for q in parts)
        case PImp(a, b):
            return f"{_render_nested(a)} => {_render_nested(b)}"
        case PIff(a, b):
            # Boolean equality; rendered with the source-level operator.
            return f"{_render_nested(a)} = {_render_nested(b)}"
        case PKappa(k, subst):
            if not subst:
                return k
            inner = ", ".join(f"{_render_value(v)}/{n}" for n, v in subst)
            return f"{k}[{inner}]"
    raise TypeError(f"not a predicate: {p!r}")


def _render_value(v) -> str:
    if isinstance(v, LinTerm):
        return v.render()
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _render_nested(p: Pred) -> str:
    if isinstance(p, (PAnd, POr, PImp, PIff)):
        return f"({render_pred(p)})"
    return render_pred(p)


def _canon_cmp(c: Cmp):
    t = c.lhs - c.rhs
    op = c.op
    if op == ">":
        t, op = t.scale(-1), "<"
    elif op == ">=":
        t, op = t.scale(-1), "<="
    if op in ("=", "!="):
        lead = t.coeffs[0][1] if t.coeffs else t.const
        if lead < 0:
            t = t.scale(-1)
    nums = [c for _, c in t.coeffs] + ([t.const] if t.const else [])
    g = 0
    for n in nums:
        g = gcd(g, abs(n))
    if g > 1 and t.const % g == 0 and all(c % g == 0 for _, c in t.coeffs):
        t = LinTerm(tuple((n, c // g) for n, c in t.coeffs), t.const // g)
    return ("cmp", op, t.coeffs, t.const)


def pred_key(p: Pred):
    """Hashable key identifying predicates up to conjunct order and trivia."""
    match p:
        case PBool(b):
            return ("bool", b)
        case PAtom(Cmp() as c):
            return _canon_cmp(c)
        case PAtom(BVar(n)):
            return ("bvar", n)
        case PNot(PAtom(Cmp() as c)):
            return _canon_cmp(c.flip())
        case PNot(inner):
            return ("not", pred_key(inner))
        case PAnd(parts):
            keys = sorted(set(pred_key(q) for q in parts if pred_key(q) != ("bool", True)))
            if not keys:
                return ("bool", True)
            if len(keys) == 1:
                return keys[0]
            return ("and",) + tuple(keys)
        case POr(parts):
            keys = sorted(set(pred_key(q) for q in parts if pred_key(q) != ("bool", False)))
            if not keys:
                return ("bool", False)
            if len(keys) == 1:
                return keys[0]
            return ("or",) + tuple(keys)
        case PImp(a, b):
            return ("imp", pred_key(a), pred_key(b))
        case PIff(a, b):
            return ("iff",) + tuple(sorted([pred_key(a), pred_key(b)]))
        case PKappa(k, subst):
            return ("kappa", k, tuple((n, _render_value(v)) for n, v in subst))
    raise TypeError(f"not a predicate: {p!r}")


def is_true(p: Pred) -> bool:
    return pred_key(p) == ("bool", True)


def is_false(p: Pred) -> bool:
    return pred_key(p) == ("bool", False)


# ---------------------------------------------------------------------------
# Verification conditions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VC:
    """Implication ``hyps => (antecedent => consequent)``."""

    hyps: tuple[Pred, ...]
    antecedent: Pred
    consequent: Pred
    origin: str = ""
    scope: tuple[str, ...] = field(default=(), compare=False)

    def formula(self) -> Pred:
        return pimp(pand(self.hyps), pimp(self.antecedent, self.consequent))

    def negated(self) -> Pred:
        return pand(list(self.hyps) + [self.antecedent, pnot(self.consequent)])

    def render(self) -> str:
        hyp = " && ".join(render_pred(h) for h in self.hyps) if self.hyps else "true"
        return f"({hyp}) => ({render_pred(self.antecedent)} => {render_pred(self.consequent)})"

    def key(self):
        return (
            tuple(sorted(set(k for k in (pred_key(h) for h in self.hyps) if k != ("bool", True)))),
            pred_key(self.antecedent),
            pred_key(self.consequent),
        )


def is_tautology(vc: VC) -> bool:
    """True when the VC holds for structural reasons alone.

    Covers a true consequent and a false antecedent or hypothesis.  A
    reflexive implication between kappa applications is dropped too: it holds
    under every solution, so it constrains nothing.  Concrete reflexive
    obligations are kept and discharged like any other.
    """
    if is_true(vc.consequent):
        return True
    if is_false(vc.antecedent):
        return True
    if contains_kappa(vc.consequent) and pred_key(vc.antecedent) == pred_key(vc.consequent):
        return True
    return any(is_false(h) for h in vc.hyps)


# ---------------------------------------------------------------------------
# NNF / DNF
# ---------------------------------------------------------------------------

# Literal: (atom, positive). Comparison negation is folded into the operator,
# so cmp literals are always positive; boolean variables keep a sign.


def _nnf(p: Pred, neg: bool):
    match p:
        case PBool(b):
            return ("const", b != neg)
        case PAtom(Cmp() as c):
            return ("lit", c.flip() if neg else c, True)
        case PAtom(BVar() as b):
            return ("lit", b, not neg)
        case PNot(inner):
            return _nnf(inner, not neg)
        case PAnd(parts):
            kids = [_nnf(q, neg) for q in parts]
            return ("or" if neg else "and", kids)
        case POr(parts):
            kids = [_nnf(q, neg) for q in parts]
            return ("and" if neg else "or", kids)
        case PImp(a, b):
            if neg:
                return ("and", [_nnf(a, False), _nnf(b, True)])
            return ("or", [_nnf(a, True), _nnf(b, False)])
        case PIff(a, b):
            pos = POr((PAnd((a, b)), PAnd((pnot(a), pnot(b)))))
            return _nnf(pos, neg)
        case PKappa():
            raise ValueError("kappa variable reached the decision procedure")
    raise TypeError(f"not a predicate: {p!r}")


def _dnf(node, budget: int) -> list[frozenset]:
    kind = node[0]
    if kind == "const":
        return [frozenset()] if node[1] else []
    if kind == "lit":
        return [frozenset([(node[1], node[2])])]
    if kind == "or":
        out: list[frozenset] = []
        for kid in node[1]:
            out.extend(_dnf(kid, budget))
            if len(out) > budget:
                raise ResourceLimit(f"DNF clause budget {budget} exceeded")
        return out
    # and: cartesian product of children cubes
    cubes = [frozenset()]
    for kid in node[1]:
        kid_cubes = _dnf(kid, budget)
        cubes = [a | b for a in cubes for b in kid_cubes]
        if len(cubes) > budget:
            raise ResourceLimit(f"DNF clause budget {budget} exceeded")
    return cubes


def dnf_cubes(p: Pred, budget: int = 10000) -> list[frozenset]:
    return _dnf(_nnf(p, False), budget)


# ---------------------------------------------------------------------------
# Fourier-Motzkin over integer-tightened rows
# ---------------------------------------------------------------------------


def fm_unsat(literals) -> bool:
    """Decide a conjunction of comparison and boolean literals.

    Returns True only when a genuine contradiction is derived, so a True
    answer means no integer model exists.  Disequalities are split, strict
    inequalities are tightened over the integers, and the remaining rows go
    through Fourier-Motzkin elimination.
    """
    bools: dict[str, bool] = {}
    rows: list[LinTerm] = []  # each row means: row <= 0
    neqs: list[LinTerm] = []  # each means: term != 0
    for atom, positive in literals:
        if isinstance(atom, BVar):
            prev = bools.get(atom.name)
            if prev is not None and prev != positive:
                return True
            bools[atom.name] = positive
            continue
        c = atom if positive else atom.flip()
        t = c.lhs - c.rhs
        match c.op:
            case "<":
                rows.append(t + LinTerm.of_const(1))
            case "<=":
                rows.append(t)
            case ">":
                rows.append(t.scale(-1) + LinTerm.of_const(1))
            case ">=":
                rows.append(t.scale(-1))
            case "=":
                rows.append(t)
                rows.append(t.scale(-1))
            case "!=":
                neqs.append(t)
    return _split_neqs(rows, neqs)


def _split_neqs(rows: list[LinTerm], neqs: list[LinTerm]) -> bool:
    if not neqs:
        return _fm_rows_unsat(rows)
    t, rest = neqs[0], neqs[1:]
    # t != 0 over the integers: t <= -1 or -t <= -1
    low = rows + [t + LinTerm.of_const(1)]
    high = rows + [t.scale(-1) + LinTerm.of_const(1)]
    return _split_neqs(low, rest) and _split_neqs(high, rest)


def _fm_rows_unsat(rows: list[LinTerm]) -> bool:
    rows = list(rows)
    while True:
        pending: list[LinTerm] = []
        names: set[str] = set()
        for r in rows:
            if r.is_const():
                if r.const > 0:
                    return True
            else:
                pending.append(r)
                names.update(r.names())
        if not pending:
            return False
        # Eliminate the variable producing the fewest combinations.
        best, best_cost = None, None
        for x in sorted(names):
            pos = sum(1 for r in pending if dict(r.coeffs).get(x, 0) > 0)
            neg = sum(1 for r in pending if dict(r.coeffs).get(x, 0) < 0)
            cost = pos * neg
            if best_cost is None or cost < best_cost:
                best, best_cost = x, cost
        x = best
        pos = [r for r in pending if dict(r.coeffs).get(x, 0) > 0]
        neg = [r for r in pending if dict(r.coeffs).get(x, 0) < 0]
        rest = [r for r in pending if dict(r.coeffs).get(x, 0) == 0]
        if not pos or not neg:
            # x is unbounded on one side; its rows are always satisfiable.
            rows = rest
            continue
        new_rows = list(rest)
        for rp, rn in itertools.product(pos, neg):
            a = dict(rp.coeffs)[x]
            b = -dict(rn.coeffs)[x]
            new_rows.append(rp.scale(b) + rn.scale(a))
        rows = new_rows


# ---------------------------------------------------------------------------
# Validity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    kind: str  # "valid" | "invalid" | "unknown"
    counter_cube: str | None = None
    model: dict[str, object] | None = None

    @property
    def is_valid(self) -> bool:
        return self.kind == "valid"

    def render(self) -> str:
        if self.kind == "valid":
            return "valid"
        if self.kind == "invalid":
            extra = f" model {self.model}" if self.model else ""
            return f"invalid (cube: {self.counter_cube}){extra}"
        return "unknown"


VALID = Verdict("valid")


def _eval_term(t: LinTerm, env: dict[str, int]) -> int:
    return t.const + sum(c * env.get(n, 0) for n, c in t.coeffs)


def eval_atom(atom: Atom, env: dict[str, object]) -> bool:
    if isinstance(atom, BVar):
        return bool(env.get(atom.name, False))
    ienv = {n: v for n, v in env.items() if isinstance(v, int) and not isinstance(v, bool)}
    a, b = _eval_term(atom.lhs, ienv), _eval_term(atom.rhs, ienv)
    match atom.op:
        case "<":
            return a < b
        case "<=":
            return a <= b
        case "=":
            return a == b
        case "!=":
            return a != b
        case ">=":
            return a >= b
        case ">":
            return a > b
    raise ValueError(atom.op)


def eval_pred(p: Pred, env: dict[str, object]) -> bool:
    match p:
        case PBool(b):
            return b
        case PAtom(a):
            return eval_atom(a, env)
        case PNot(inner):
            return not eval_pred(inner, env)
        case PAnd(parts):
            return all(eval_pred(q, env) for q in parts)
        case POr(parts):
            return any(eval_pred(q, env) for q in parts)
        case PImp(a, b):
            return (not eval_pred(a, env)) or eval_pred(b, env)
        case PIff(a, b):
            return eval_pred(a, env) == eval_pred(b, env)
        case PKappa():
            raise ValueError("kappa variable in evaluated predicate")
    raise TypeError(f"not a predicate: {p!r}")


def _cube_model(cube, bound: int = 8) -> dict[str, object] | None:
    int_names: set[str] = set()
    bool_env: dict[str, object] = {}
    for atom, positive in cube:
        if isinstance(atom, BVar):
            bool_env[atom.name] = positive
        else:
            int_names.update(atom.lhs.names() | atom.rhs.names())
    names = sorted(int_names)
    if len(names) > 3:
        return None
    cmps = [a for a, _ in cube if isinstance(a, Cmp)]
    for combo in itertools.product(range(-bound, bound + 1), repeat=len(names)):
        env: dict[str, object] = dict(bool_env)
        env.update(zip(names, combo))
        if all(eval_atom(a, env) for a in cmps):
            return env
    return None


def valid(vc: VC, clause_budget: int = 10000) -> Verdict:
    """Check a VC by refuting its negation cube by cube."""
    formula = vc.negated()
    if contains_kappa(formula):
        raise ValueError("cannot decide validity of a VC with unsolved kappa variables")
    cubes = dnf_cubes(formula, clause_budget)
    for cube in cubes:
        if not fm_unsat(cube):
            rendered = " && ".join(
                (a.render() if pos else f"!{a.render()}") for a, pos in sorted(cube, key=repr)
            )
            return Verdict("invalid", rendered or "true", _cube_model(cube))
    return VALID


# ---------------------------------------------------------------------------
# SMT-LIB2 emission
# ---------------------------------------------------------------------------


def _collect_sorts(p: Pred, order: list[tuple[str, str]], seen: set[str]) -> None:
    def add(name: str, sort: str) -> None:
        if name not in seen:
            seen.add(name)
            order.append((name, sort))

    match p:
        case PBool():
            pass
        case PAtom(Cmp(lhs, _, rhs)):
            for t in (lhs, rhs):
                for n, _ in t.coeffs:
                    add(n, "Int")
        case PAtom(BVar(n)):
            add(n, "Bool")
        case PNot(inner):
            _collect_sorts(inner, order, seen)
        case PAnd(parts) | POr(parts):
            for q in parts:
                _collect_sorts(q, order, seen)
        case PImp(a, b) | PIff(a, b):
            _collect_sorts(a, order, seen)
            _collect_sorts(b, order, seen)
        case PKappa():
            raise ValueError("kappa variable in SMT-LIB emission")


def _sexp_term(t: LinTerm) -> str:
    def lit(k: int) -> str:
        return str(k) if k >= 0 else f"(- {-k})"

    parts = []
    for n, c in t.coeffs:
        if c == 1:
            parts.append(n)
        else:
            parts.append(f"(* {lit(c)} {n})")
    if t.const != 0 or not parts:
        parts.append(lit(t.const))
    if len(parts) == 1:
        return parts[0]
    return f"(+ {' '.join(parts)})"


def _sexp_pred(p: Pred) -> str:
    match p:
        case PBool(b):
            return "true" if b else "false"
        case PAtom(Cmp(lhs, op, rhs)):
            a, b = _sexp_term(lhs), _sexp_term(rhs)
            if op == "!=":
                return f"(not (= {a} {b}))"
            return f"({op} {a} {b})"
        case PAtom(BVar(n)):
            return n
        case PNot(inner):
            return f"(not {_sexp_pred(inner)})"
        case PAnd(parts):
            return f"(and {' '.join(_sexp_pred(q) for q in parts)})" if parts else "true"
        case POr(parts):
            return f"(or {' '.join(_sexp_pred(q) for q in parts)})" if parts else "false"
        case PImp(a, b):
            return f"(=> {_sexp_pred(a)} {_sexp_pred(b)})"
        case PIff(a, b):
            return f"(= {_sexp_pred(a)} {_sexp_pred(b)})"
        case PKappa():
            raise ValueError("kappa variable in SMT-LIB emission")
    raise TypeError(f"not a predicate: {p!r}")


def to_smtlib(vc: VC) -> str:
    """Emit the VC as an SMT-LIB2 refutation query (unsat means valid)."""
    order: list[tuple[str, str]] = []
    seen: set[str] = set()
    for h in vc.hyps:
        _collect_sorts(h, order, seen)
    _collect_sorts(vc.antecedent, order, seen)
    _collect_sorts(vc.consequent, order, seen)
    lines = ["(set-logic QF_LIA)"]
    for name, sort in order:
        lines.append(f"(declare-const {name} {sort})")
    hyp = _sexp_pred(pand(vc.hyps)) if vc.hyps else "true"
    body = f"(=> {hyp} (=> {_sexp_pred(vc.antecedent)} {_sexp_pred(vc.consequent)}))"
    lines.append(f"(assert (not {body}))")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"
