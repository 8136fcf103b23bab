"""Semantic oracle: satisfaction, bases, bad models, bounded entailment.

Model counts and counter-models asserted here were produced by this oracle
and frozen; they pin the enumeration order and the canonical location
naming, so regressions in either show up as count or witness drift.
"""

import pytest

from sepent.oracle import (
    Bound,
    Cell,
    HeapModel,
    OracleError,
    bad_model,
    base_of,
    confirm_countermodel,
    holds,
    models_of,
    oracle_entails,
)
from sepent.syntax import (
    ArithLeq,
    Entailment,
    IntLit,
    NULL,
    PointsTo,
    PredOcc,
    PtrNeq,
    SymbolicHeap,
    Var,
)

x, y, B, mi, ma, b = Var("x"), Var("y"), Var("B"), Var("mi"), Var("ma"), Var("b")


def heap(spatial, pure=()):
    return SymbolicHeap(tuple(spatial), tuple(pure))


def ent(lhs, rhs):
    return Entailment(lhs, rhs)


# ----------------------------------------------------------------- satisfaction


def test_one_cell_list(registry):
    m = HeapModel({"x": 1}, {1: Cell("c1", (0,))}, frozenset({"x"}))
    assert holds(m, heap([PredOcc("ll", (x, NULL))]), registry)


def test_empty_heap_base_branch(registry):
    m = HeapModel({"x": 1}, {}, frozenset({"x"}))
    assert holds(m, heap([PredOcc("ll", (x, x))]), registry)
    assert not holds(m, heap([PredOcc("ll", (x, NULL))], [PtrNeq(x, NULL)]), registry)


def test_exact_cover_rejects_leftover_cells(registry):
    m = HeapModel(
        {"x": 1}, {1: Cell("c1", (0,)), 2: Cell("c1", (0,))}, frozenset({"x"})
    )
    assert not holds(m, heap([PredOcc("ll", (x, NULL))]), registry)


def test_sorted_list_needs_ascending_values(registry):
    cells = {1: Cell("c4", (2, 5)), 2: Cell("c4", (0, 3))}
    m = HeapModel({"x": 1, "mi": 0, "ma": 3}, cells, frozenset({"x"}))
    assert not holds(m, heap([PredOcc("lls", (x, NULL, mi, ma))]), registry)
    cells = {1: Cell("c4", (2, 3)), 2: Cell("c4", (0, 5))}
    m = HeapModel({"x": 1, "mi": 0, "ma": 5}, cells, frozenset({"x"}))
    assert holds(m, heap([PredOcc("lls", (x, NULL, mi, ma))]), registry)


def test_tree_satisfaction(registry):
    cells = {
        1: Cell("ct", (2, 3)),
        2: Cell("ct", (0, 0)),
        3: Cell("ct", (0, 0)),
    }
    m = HeapModel({"x": 1}, cells, frozenset({"x"}))
    assert holds(m, heap([PredOcc("tree", (x, NULL))]), registry)


def test_unfold_annotation_is_ignored(registry):
    m = HeapModel({"x": 1}, {1: Cell("c1", (0,))}, frozenset({"x"}))
    assert holds(m, heap([PredOcc("ll", (x, NULL), unfold=7)]), registry)


# ------------------------------------------------------------------ base_of


def test_base_of_plain_list(registry):
    out = base_of(heap([PredOcc("ll", (x, y))]), registry)
    assert out.pretty() == "x->c1(y) /\\ x!=y"


def test_base_of_keeps_cells(registry):
    cell = PointsTo(x, "c1", (y,))
    out = base_of(heap([cell]), registry)
    assert out.spatial == (cell,)


def test_base_of_nested_list_materializes_matrix(registry):
    out = base_of(heap([PredOcc("nll", (x, y, B))]), registry)
    assert out.pretty() == "x->c3(y, Z#1) * Z#1->c1(B) /\\ x!=y /\\ Z#1!=B"


def test_base_of_tree_closes_self_matrix_empty(registry):
    out = base_of(heap([PredOcc("tree", (x, y))]), registry)
    assert out.pretty() == "x->ct(y, y) /\\ x!=y"


def test_base_of_sorted_list_rewires_order_target(registry):
    out = base_of(heap([PredOcc("lls", (x, NULL, mi, ma))], [PtrNeq(x, NULL)]), registry)
    assert out.pretty() == "x->c4(null, ma) /\\ x!=null /\\ mi<=ma"


def test_base_of_skiplist_three_levels(registry):
    out = base_of(heap([PredOcc("skl3", (x, y))]), registry)
    assert len(out.spatial) == 4  # one node per level plus the level-1 hop
    assert all(a.sort == "c5" for a in out.spatial)


@pytest.mark.parametrize(
    "occ",
    [
        PredOcc("ll", (x, NULL)),
        PredOcc("lla", (x, NULL, Var("u"))),
        PredOcc("lls", (x, NULL, mi, ma)),
        PredOcc("llb", (x, NULL, b)),
        PredOcc("nll", (x, NULL, B)),
        PredOcc("skl1", (x, NULL)),
        PredOcc("skl2", (x, NULL)),
        PredOcc("skl3", (x, NULL)),
        PredOcc("tree", (x, NULL)),
    ],
    ids=lambda o: o.pred,
)
def test_base_underapproximates(registry, occ):
    # base(kappa) /\ pi entails kappa, checked semantically at depth 3
    lhs = base_of(heap([occ], [PtrNeq(x, NULL)]), registry)
    verdict = oracle_entails(
        ent(lhs, heap([occ], [PtrNeq(x, NULL)])), registry, Bound(max_unfold=3)
    )
    assert verdict.bounded_valid


# ------------------------------------------------------------------ bad_model


def test_bad_model_single_cell(registry):
    m = bad_model(heap([PointsTo(x, "c1", (NULL,))], [PtrNeq(x, NULL)]), registry)
    assert m.stack == {"x": 1}
    assert m.heap == {1: Cell("c1", (0,))}


def test_bad_model_golden_base(registry):
    base = base_of(heap([PredOcc("lls", (x, NULL, mi, ma))], [PtrNeq(x, NULL)]), registry)
    m = bad_model(base, registry)
    assert m.stack["mi"] == 0 and m.stack["ma"] == 0
    assert m.heap == {1: Cell("c4", (0, 0))}


def test_bad_model_distinct_locations(registry):
    h = heap(
        [PointsTo(x, "c1", (y,)), PointsTo(y, "c1", (NULL,))],
        [PtrNeq(x, y), PtrNeq(x, NULL), PtrNeq(y, NULL)],
    )
    m = bad_model(h, registry)
    assert m.stack["x"] != m.stack["y"]
    assert len(m.heap) == 2


def test_bad_model_rejects_occurrences(registry):
    with pytest.raises(OracleError):
        bad_model(heap([PredOcc("ll", (x, NULL))]), registry)


def test_bad_model_satisfies_input(registry):
    base = base_of(heap([PredOcc("nll", (x, NULL, B))], [PtrNeq(x, NULL)]), registry)
    m = bad_model(base, registry)
    assert holds(m, base, registry)


# ----------------------------------------------------------- model enumeration


@pytest.mark.parametrize(
    "spatial,count",
    [
        ([PredOcc("ll", (x, NULL))], 5),
        ([PredOcc("ll", (x, y)), PredOcc("ll", (y, NULL))], 22),
        ([PredOcc("lla", (x, NULL, Var("u")))], 42),
        ([PredOcc("tree", (x, NULL))], 189),
        ([PredOcc("nll", (x, NULL, B))], 242),
        ([PredOcc("skl3", (x, NULL))], 351),
    ],
    ids=["ll", "ll-concat", "lla", "tree", "nll", "skl3"],
)
def test_model_counts_at_default_bound(registry, spatial, count):
    assert sum(1 for _ in models_of(heap(spatial), registry)) == count


def test_models_pass_self_check(registry):
    n = sum(
        1
        for _ in models_of(
            heap([PredOcc("lls", (x, NULL, mi, ma))]),
            registry,
            Bound(max_unfold=3),
            self_check=True,
        )
    )
    assert n == 1000


def test_enumeration_is_deterministic(registry):
    h = heap([PredOcc("nll", (x, NULL, B))])
    first = [m.key() for m in models_of(h, registry)]
    second = [m.key() for m in models_of(h, registry)]
    assert first == second


# ------------------------------------------------------------------ entailment


def test_base_case_countermodel(registry):
    v = oracle_entails(
        ent(heap([PredOcc("ll", (x, NULL))]), heap([PredOcc("ll", (x, NULL))], [PtrNeq(x, NULL)])),
        registry,
    )
    assert not v.bounded_valid
    assert v.counter.stack == {"x": 0} and v.counter.heap == {}


def test_golden_entailment_bounded_valid(registry):
    v = oracle_entails(
        ent(
            heap([PredOcc("lls", (x, NULL, mi, ma))], [PtrNeq(x, NULL)]),
            heap([PredOcc("llb", (x, NULL, mi))]),
        ),
        registry,
    )
    assert v.bounded_valid


def test_sorted_to_border_wrong_end_invalid(registry):
    v = oracle_entails(
        ent(
            heap([PredOcc("lls", (x, NULL, mi, ma))]),
            heap([PredOcc("llb", (x, NULL, ma))]),
        ),
        registry,
    )
    assert not v.bounded_valid
    # first counter found: two cells, head value strictly below the target
    assert v.counter.stack == {"ma": -2, "mi": -3, "x": 1}
    assert v.counter.heap == {1: Cell("c4", (2, -3)), 2: Cell("c4", (0, -2))}
    assert confirm_countermodel(
        v.counter,
        ent(
            heap([PredOcc("lls", (x, NULL, mi, ma))]),
            heap([PredOcc("llb", (x, NULL, ma))]),
        ),
        registry,
    )


def test_border_weakening_direction(registry):
    strong = heap([PredOcc("llb", (x, NULL, IntLit(2)))])
    weak = heap([PredOcc("llb", (x, NULL, IntLit(0)))])
    assert oracle_entails(ent(strong, weak), registry).bounded_valid
    v = oracle_entails(ent(weak, strong), registry)
    assert not v.bounded_valid


def test_invalidity_persists_at_larger_bound(registry):
    e = ent(
        heap([PredOcc("lls", (x, NULL, mi, ma))]),
        heap([PredOcc("llb", (x, NULL, ma))]),
    )
    small = oracle_entails(e, registry, Bound(max_unfold=2, max_locs=3))
    large = oracle_entails(e, registry, Bound(max_unfold=5, max_locs=6))
    assert not small.bounded_valid and not large.bounded_valid
    assert confirm_countermodel(small.counter, e, registry)
