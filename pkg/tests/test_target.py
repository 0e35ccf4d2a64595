import random

import pytest

from l2 import constants, parser
from l2.logic import FALSE, LinTerm, PBool, TRUE, cmp_pred, pnot
from l2.syntax import AndType, BOOL, FunType, NUM, OrType, PrimType
from l2.target import (
    EFun,
    EPrim,
    EProd,
    ESum,
    IllTyped,
    RBase,
    RFun,
    RProd,
    RSum,
    TApp,
    TConst,
    TDead,
    TInj,
    TLam,
    TPair,
    TProj,
    TVar,
    elab_type,
    erase_src,
    fbot,
    ftx,
    print_target,
    simple_typecheck,
    strip,
    subst_target,
    unelab_type,
)

TT = PrimType("number", cmp_pred(LinTerm.of_var("v"), "!=", LinTerm.of_const(0)))


def num(k):
    return TConst(constants.int_const(k))


class TestElabType:
    def test_union_to_sum(self):
        t = elab_type(OrType(NUM, BOOL))
        assert t == RSum(RBase("number"), RBase("boolean"))

    def test_intersection_to_product_with_refinements(self):
        src = AndType(FunType(TT, FunType(NUM, NUM)), FunType(TT, FunType(BOOL, BOOL)))
        t = elab_type(src)
        assert isinstance(t, RProd)
        assert isinstance(t.left, RFun)
        assert t.left.dom == RBase("number", TT.refinement)

    def test_base(self):
        assert elab_type(NUM) == RBase("number", TRUE)

    def test_fresh_binders_reserved(self):
        t = elab_type(FunType(NUM, FunType(BOOL, NUM)))
        assert isinstance(t, RFun) and t.binder.startswith("$d")
        assert isinstance(t.cod, RFun) and t.cod.binder != t.binder


def _random_type(rng, depth):
    if depth == 0:
        return rng.choice([NUM, BOOL, TT])
    kind = rng.randrange(4)
    if kind == 0:
        return _random_type(rng, 0)
    if kind == 1:
        return FunType(_random_type(rng, depth - 1), _random_type(rng, depth - 1))
    if kind == 2:
        arrow = FunType(_random_type(rng, depth - 1), _random_type(rng, depth - 1))
        return AndType(arrow, FunType(NUM, BOOL))
    return OrType(rng.choice([NUM, TT]), BOOL)


class TestStrip:
    def test_erase_refinement(self):
        assert strip(RBase("number", cmp_pred(LinTerm.of_var("v"), "!=", LinTerm.of_const(0)))) \
            == EPrim("number")

    def test_erase_binders(self):
        t = RFun("x", RBase("number", FALSE), RBase("number", FALSE))
        assert strip(t) == EFun(EPrim("number"), EPrim("number"))

    def test_strip_of_elab_matches_direct_erasure(self):
        # oracle: an independent structural recursion from source types
        rng = random.Random(11)
        for _ in range(200):
            t = _random_type(rng, 3)
            assert strip(elab_type(t)) == erase_src(t)

    def test_unelab_inverts_elab_up_to_binders(self):
        rng = random.Random(12)
        for _ in range(100):
            t = _random_type(rng, 3)
            assert unelab_type(elab_type(t)) == t


class TestFtx:
    def test_base(self):
        assert fbot(RBase("number", TRUE)) == RBase("number", FALSE)

    def test_arrow_contravariant(self):
        t = elab_type(FunType(NUM, NUM))
        out = fbot(t)
        assert out.dom.refinement == pnot(FALSE)
        assert out.cod.refinement == FALSE

    def test_sum_componentwise(self):
        t = elab_type(OrType(NUM, BOOL))
        out = fbot(t)
        assert out == RSum(RBase("number", FALSE), RBase("boolean", FALSE))

    def test_replaces_existing_refinements(self):
        t = RBase("number", cmp_pred(LinTerm.of_var("v"), "!=", LinTerm.of_const(0)))
        assert ftx(t, TRUE) == RBase("number", TRUE)

    def test_strip_invariant(self):
        rng = random.Random(13)
        for _ in range(100):
            t = elab_type(_random_type(rng, 3))
            assert strip(ftx(t, FALSE)) == strip(t)
            assert strip(ftx(t, TRUE)) == strip(t)


class TestSimpleTypecheck:
    def test_pair(self):
        w = TPair(num(1), TConst(constants.TRUE_CONST))
        assert simple_typecheck({}, w) == EProd(EPrim("number"), EPrim("boolean"))

    def test_dead_changes_type(self):
        w = TDead(NUM, FunType(NUM, NUM), num(0))
        assert simple_typecheck({}, w) == EFun(EPrim("number"), EPrim("number"))

    def test_projection_of_sum_ill_typed(self):
        w = TProj(1, TInj(1, num(1), OrType(NUM, BOOL)))
        with pytest.raises(IllTyped):
            simple_typecheck({}, w)

    def test_lambda_needs_annotation(self):
        with pytest.raises(IllTyped):
            simple_typecheck({}, TLam("x", TVar("x")))

    def test_application(self):
        lam = TLam("x", TVar("x"), FunType(NUM, NUM), elab_type(FunType(NUM, NUM)))
        assert simple_typecheck({}, TApp(lam, num(1))) == EPrim("number")

    def test_argument_mismatch(self):
        lam = TLam("x", TVar("x"), FunType(NUM, NUM), elab_type(FunType(NUM, NUM)))
        with pytest.raises(IllTyped):
            simple_typecheck({}, TApp(lam, TConst(constants.TRUE_CONST)))

    def test_case_branches_must_agree(self):
        scrut = TInj(1, num(1), OrType(NUM, BOOL))
        from l2.target import TCase

        bad = TCase(scrut, "a", num(1), "b", TConst(constants.TRUE_CONST))
        with pytest.raises(IllTyped):
            simple_typecheck({}, bad)

    def test_dead_checks_inner_at_from_type(self):
        with pytest.raises(IllTyped):
            simple_typecheck({}, TDead(BOOL, NUM, num(0)))


class TestTargetSyntax:
    def test_print_forms(self):
        w = TPair(num(1), TDead(NUM, BOOL, num(2)))
        assert print_target(w) == "(1, DEAD[number => boolean](2))"

    def test_subst_shadowing(self):
        lam = TLam("x", TVar("x"), FunType(NUM, NUM), elab_type(FunType(NUM, NUM)))
        assert subst_target(lam, "x", num(1)) == lam

    def test_subst_in_case_branches(self):
        from l2.target import TCase

        w = TCase(TVar("s"), "a", TVar("z"), "b", TVar("b"))
        got = subst_target(w, "z", num(7))
        assert got.branch1 == num(7)
        got2 = subst_target(w, "b", num(7))
        assert got2.branch2 == TVar("b")  # binder shadows


class TestConstantTable:
    def test_source_types_are_refinement_erasures(self):
        # each constant's source type is exactly its refined type's skeleton
        table = list(constants.NAMED_CONSTANTS.values()) + [
            constants.int_const(5),
            constants.int_const(-2),
            constants.arith_stage2("add", 3),
            constants.arith_stage2("mul", -4),
            constants.cmp_stage2("lt", 2),
        ]
        for con in table:
            assert strip(con.refined_type) == erase_src(con.source_type), con.name

    def test_delta_defined_exactly_on_the_domain(self):
        from l2.syntax import Const as SConst

        n, b = SConst(constants.int_const(1)), SConst(constants.TRUE_CONST)
        assert constants.delta_apply(constants.ADD, n) is not None
        assert constants.delta_apply(constants.ADD, b) is None
        assert constants.delta_apply(constants.NOT, b) is not None
        assert constants.delta_apply(constants.NOT, n) is None
        assert constants.delta_apply(constants.int_const(0), n) is None
