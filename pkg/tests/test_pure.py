"""Pure-fragment solver: satisfiability, entailment, and model extraction."""

from hypothesis import given, strategies as st

from sepent.oracle import eval_pure_atom
from sepent.pure import (
    arith_model,
    entails,
    entails_all,
    pointer_model,
    satisfiable,
    status_of_pair,
)
from sepent.syntax import ArithEq, ArithLeq, IntLit, NULL, PtrEq, PtrNeq, Var

x, y, z = Var("x"), Var("y"), Var("z")
a, b, c = Var("a"), Var("b"), Var("c")


def test_empty_is_satisfiable():
    assert satisfiable(())


def test_eq_neq_clash_unsat():
    assert not satisfiable((PtrEq(x, y), PtrNeq(y, x)))


def test_self_diseq_unsat():
    assert not satisfiable((PtrNeq(x, x),))
    assert not satisfiable((PtrNeq(NULL, NULL),))


def test_transitive_eq_chain():
    atoms = (PtrEq(x, y), PtrEq(y, z))
    assert entails(atoms, PtrEq(x, z))
    assert not satisfiable(atoms + (PtrNeq(x, z),))


def test_leq_antisymmetry_gives_eq():
    assert entails((ArithLeq(a, b), ArithLeq(b, a)), ArithEq(a, b))
    assert not entails((ArithLeq(a, b),), ArithEq(a, b))


def test_literal_bounds():
    assert entails((), ArithLeq(IntLit(1), IntLit(2)))
    assert not entails((), ArithLeq(IntLit(2), IntLit(1)))
    assert not satisfiable((ArithLeq(a, IntLit(0)), ArithLeq(IntLit(1), a)))


def test_strict_window_forces_value():
    atoms = (ArithLeq(IntLit(3), a), ArithLeq(a, IntLit(3)))
    assert entails(atoms, ArithEq(a, IntLit(3)))


def test_unsat_context_entails_anything():
    atoms = (PtrNeq(x, x),)
    assert entails_all(atoms, [PtrEq(x, y), ArithLeq(b, a)])


def test_status_of_pair():
    assert status_of_pair((PtrEq(x, y),), x, y) == "eq"
    assert status_of_pair((PtrNeq(x, y),), x, y) == "neq"
    assert status_of_pair((), x, y) == "unknown"
    assert status_of_pair((PtrNeq(x, NULL),), x, NULL) == "neq"


def test_pointer_model_respects_classes():
    m = pointer_model((PtrEq(x, y), PtrNeq(x, z)), ("x", "y", "z"))
    assert m["x"] == m["y"] != m["z"]
    assert m["x"] != 0  # nothing ties x to null


def test_pointer_model_null_class_is_zero():
    m = pointer_model((PtrEq(x, NULL),), ("x", "y"))
    assert m["x"] == 0 and m["y"] != 0


def test_arith_model_meets_bounds():
    m = arith_model((ArithLeq(IntLit(2), a), ArithLeq(a, b)), ("a", "b"))
    assert 2 <= m["a"] <= m["b"]


_PTR_TERMS = st.sampled_from([x, y, z, NULL])
_ARITH_TERMS = st.sampled_from([a, b, c, IntLit(-1), IntLit(0), IntLit(2)])


@st.composite
def _atoms(draw):
    kind = draw(st.integers(0, 3))
    if kind == 0:
        return PtrEq(draw(_PTR_TERMS), draw(_PTR_TERMS))
    if kind == 1:
        return PtrNeq(draw(_PTR_TERMS), draw(_PTR_TERMS))
    if kind == 2:
        return ArithEq(draw(_ARITH_TERMS), draw(_ARITH_TERMS))
    return ArithLeq(draw(_ARITH_TERMS), draw(_ARITH_TERMS))


@given(st.lists(_atoms(), max_size=8).map(tuple))
def test_models_satisfy_their_atoms(atoms):
    if not satisfiable(atoms):
        return
    env = dict(pointer_model(atoms, ("x", "y", "z")))
    env.update(arith_model(atoms, ("a", "b", "c")))
    assert all(eval_pure_atom(at, env) for at in atoms)


@given(st.lists(_atoms(), max_size=6).map(tuple), _atoms())
def test_entailment_is_extension_stable(atoms, goal):
    # adding the goal to a context that entails it must stay satisfiable
    if satisfiable(atoms) and entails(atoms, goal):
        assert satisfiable(atoms + (goal,))
