import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from l2.logic import (
    BVar,
    Cmp,
    LinTerm,
    PAtom,
    PBool,
    PKappa,
    ResourceLimit,
    TRUE,
    VC,
    cmp_pred,
    dnf_cubes,
    eval_pred,
    fm_unsat,
    instantiate_kappas,
    is_tautology,
    pand,
    pimp,
    pnot,
    por,
    pred_key,
    render_pred,
    subst_pred,
    to_smtlib,
    valid,
)

x = LinTerm.of_var("x")
y = LinTerm.of_var("y")
z = LinTerm.of_var("z")
nu = LinTerm.of_var("v")


def const(k):
    return LinTerm.of_const(k)


class TestLinTerm:
    def test_arith(self):
        t = x + y.scale(2) - const(3)
        assert t.coeffs == (("x", 1), ("y", 2))
        assert t.const == -3

    def test_cancellation(self):
        assert (x - x).coeffs == ()

    def test_subst(self):
        t = x.scale(2) + y
        assert t.subst_var("x", y + const(1)) == y.scale(3) + const(2)

    def test_render(self):
        assert (x.scale(2) - y + const(5)).render() == "2*x - y + 5"
        assert const(-7).render() == "-7"


class TestFmUnsat:
    def test_empty_interval(self):
        assert fm_unsat([(Cmp(x, ">=", const(1)), True), (Cmp(x, "<=", const(0)), True)])

    def test_complementary(self):
        assert fm_unsat([(Cmp(x, "!=", const(0)), True), (Cmp(x, "=", const(0)), True)])

    def test_satisfiable(self):
        assert not fm_unsat([(Cmp(x, ">=", const(1)), True), (Cmp(x, "<=", const(5)), True)])

    def test_bool_conflict(self):
        assert fm_unsat([(BVar("b"), True), (BVar("b"), False)])

    def test_integer_tightening(self):
        # 0 < x < 1 has rational solutions but no integer ones
        assert fm_unsat([(Cmp(const(0), "<", x), True), (Cmp(x, "<", const(1)), True)])

    def test_three_variable_chain(self):
        lits = [
            (Cmp(x, "<", y), True),
            (Cmp(y, "<", z), True),
            (Cmp(z, "<", x), True),
        ]
        assert fm_unsat(lits)

    def test_random_systems_against_enumeration(self):
        # fm_unsat may only claim unsat when brute force finds no model
        rng = random.Random(7)
        names = ["x", "y", "z"]
        for _ in range(300):
            lits = []
            for _ in range(rng.randint(1, 4)):
                lhs = LinTerm(
                    tuple(
                        (n, c)
                        for n, c in zip(names, (rng.randint(-2, 2) for _ in names))
                        if c != 0
                    ),
                    rng.randint(-4, 4),
                )
                op = rng.choice(["<", "<=", "=", "!=", ">=", ">"])
                lits.append((Cmp(lhs, op, const(rng.randint(-3, 3))), True))
            if not fm_unsat(lits):
                continue
            for combo in itertools.product(range(-8, 9), repeat=3):
                env = dict(zip(names, combo))
                assert not all(eval_pred(PAtom(a), env) for a, _ in lits), (lits, combo)


def _vc(hyps, p, q):
    return VC(tuple(hyps), p, q, "test")


class TestValid:
    def test_inconsistent_hypotheses(self):
        # guard refinements contradict, so the dead obligation holds
        vc = _vc(
            [cmp_pred(LinTerm.of_var("flag"), "!=", const(0)), TRUE,
             cmp_pred(LinTerm.of_var("flag"), "=", const(0))],
            cmp_pred(nu, "=", x),
            PBool(False),
        )
        assert valid(vc).is_valid

    def test_nonzero_literal(self):
        vc = _vc([TRUE], cmp_pred(nu, "=", const(1)), cmp_pred(nu, "!=", const(0)))
        assert valid(vc).is_valid

    def test_rejecting_vc(self):
        vc = _vc([TRUE], cmp_pred(nu, "=", const(0)), cmp_pred(nu, "!=", const(0)))
        verdict = valid(vc)
        assert not verdict.is_valid
        assert verdict.model is not None and verdict.model.get("v") == 0

    def test_double_negation_invariance(self):
        vc = _vc([cmp_pred(x, ">=", const(0))], cmp_pred(nu, "=", x), cmp_pred(nu, ">=", const(0)))
        doubled = VC(vc.hyps, pnot(pnot(vc.antecedent)), pnot(pnot(vc.consequent)), "t")
        assert valid(vc).kind == valid(doubled).kind == "valid"

    def test_boolean_structure(self):
        p = por([cmp_pred(x, "=", const(1)), cmp_pred(x, "=", const(2))])
        q = cmp_pred(x, ">=", const(1))
        assert valid(_vc([], p, q)).is_valid
        assert not valid(_vc([], q, p)).is_valid

    def test_iff_expansion(self):
        from l2.logic import piff

        b = PAtom(BVar("b"))
        vc = _vc([piff(b, cmp_pred(x, "=", const(0))), b], TRUE, cmp_pred(x, "=", const(0)))
        assert valid(vc).is_valid

    def test_kappa_rejected(self):
        with pytest.raises(ValueError):
            valid(_vc([], PKappa("k1"), PBool(False)))

    def test_clause_budget(self):
        parts = [por([cmp_pred(x, "=", const(i)), cmp_pred(y, "=", const(i))]) for i in range(20)]
        vc = _vc(parts, TRUE, PBool(False))
        with pytest.raises(ResourceLimit):
            valid(vc, clause_budget=16)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3))
    def test_valid_never_has_small_counterexample(self, a, b, c, d):
        hyp = cmp_pred(x.scale(a) + y.scale(b), "<=", const(c))
        con = cmp_pred(x.scale(a) + y.scale(b), "<=", const(c + max(d, 0)))
        vc = _vc([hyp], TRUE, con)
        if valid(vc).is_valid:
            for vx in range(-8, 9):
                for vy in range(-8, 9):
                    env = {"x": vx, "y": vy}
                    assert not (eval_pred(hyp, env) and not eval_pred(con, env))


class TestTautologyFilter:
    def test_true_consequent(self):
        assert is_tautology(_vc([], cmp_pred(nu, "=", const(1)), TRUE))

    def test_false_hypothesis(self):
        assert is_tautology(_vc([PBool(False)], TRUE, PBool(False)))

    def test_false_antecedent(self):
        assert is_tautology(_vc([], PBool(False), cmp_pred(nu, "=", const(1))))

    def test_concrete_reflexive_is_kept(self):
        p = cmp_pred(nu, "=", const(0))
        assert not is_tautology(_vc([], p, p))

    def test_kappa_reflexive_is_dropped(self):
        k = PKappa("k2")
        assert is_tautology(_vc([], k, k))


class TestSubstAndKappa:
    def test_subst_linear(self):
        p = cmp_pred(nu, "=", x)
        assert subst_pred(p, "x", const(3)) == cmp_pred(nu, "=", const(3))

    def test_subst_records_on_kappa(self):
        p = PKappa("k1")
        out = subst_pred(p, "v", LinTerm.of_var("flag"))
        assert out == PKappa("k1", (("v", LinTerm.of_var("flag")),))

    def test_reserved_names_not_recorded(self):
        out = subst_pred(PKappa("k1"), "$d1", const(3))
        assert out == PKappa("k1")

    def test_instantiate(self):
        app = subst_pred(PKappa("k1"), "v", LinTerm.of_var("flag"))
        got = instantiate_kappas(app, {"k1": cmp_pred(nu, "!=", const(0))})
        assert got == cmp_pred(LinTerm.of_var("flag"), "!=", const(0))

    def test_instantiate_is_simultaneous(self):
        # swap v and w through the recorded substitution
        body = cmp_pred(nu, "=", LinTerm.of_var("w"))
        app = PKappa("k", (("v", LinTerm.of_var("w")), ("w", LinTerm.of_var("v"))))
        got = instantiate_kappas(app, {"k": body})
        assert got == cmp_pred(LinTerm.of_var("w"), "=", nu)


class TestCanonicalKeys:
    def test_conjunct_order_ignored(self):
        a, b = cmp_pred(x, "=", const(1)), cmp_pred(y, "<=", const(2))
        assert pred_key(pand([a, b])) == pred_key(pand([b, a]))

    def test_true_conjuncts_dropped(self):
        a = cmp_pred(x, "=", const(1))
        assert pred_key(pand([a, TRUE])) == pred_key(a)

    def test_negated_comparison_folds(self):
        assert pred_key(pnot(cmp_pred(x, "=", const(0)))) == pred_key(
            cmp_pred(x, "!=", const(0))
        )

    def test_scaled_equalities_identified(self):
        assert pred_key(cmp_pred(x.scale(2), "=", const(4))) == pred_key(
            cmp_pred(x, "=", const(2))
        )


class TestSmtlib:
    def test_shape(self):
        vc = _vc(
            [cmp_pred(LinTerm.of_var("flag"), "!=", const(0))],
            cmp_pred(nu, "=", x),
            PBool(False),
        )
        text = to_smtlib(vc)
        assert text.startswith("(set-logic QF_LIA)\n")
        assert "(declare-const flag Int)" in text
        assert "(declare-const v Int)" in text
        assert "(declare-const x Int)" in text
        assert text.rstrip().endswith("(check-sat)")
        assert "(assert (not (=>" in text

    def test_bool_sorts(self):
        vc = _vc([PAtom(BVar("b"))], TRUE, PAtom(BVar("b")))
        assert "(declare-const b Bool)" in to_smtlib(vc)

    def test_byte_stable(self):
        vc = _vc([cmp_pred(x + y, "<=", const(1))], TRUE, cmp_pred(x, "<=", const(1)))
        assert to_smtlib(vc) == to_smtlib(vc)

    def test_declaration_order_is_first_occurrence(self):
        vc = _vc([cmp_pred(y, "=", const(0))], cmp_pred(x, "=", const(0)), TRUE)
        text = to_smtlib(vc)
        assert text.index("declare-const y") < text.index("declare-const x")


class TestRender:
    def test_vc_render(self):
        vc = _vc([TRUE], cmp_pred(nu, "=", const(0)), cmp_pred(nu, "!=", const(0)))
        assert vc.render() == "(true) => (v = 0 => v != 0)"

    def test_kappa_render(self):
        app = subst_pred(PKappa("k1"), "v", LinTerm.of_var("flag"))
        assert render_pred(app) == "k1[flag/v]"

    def test_dnf_budget_boundary(self):
        p = pand([por([PAtom(BVar(f"a{i}")), PAtom(BVar(f"b{i}"))]) for i in range(3)])
        assert len(dnf_cubes(p, budget=8)) == 8
