"""Left-side normalization: six rewriting rules and the normal-form check.

A symbolic heap is in normal form when every occurrence's guard is spelled
out, every allocated root is known non-null and pairwise distinct, no
equalities remain, no atom denies itself, and the arithmetic part has a
model. Normalization applies the rules in a fixed order: drop reflexive
equalities, substitute equalities away, collapse occurrences whose root
meets their segment, materialize non-null and pairwise disequalities, and
finally split undecided pairs (the only branching rule).

Each applier performs a single step so the proof engine can record one rule
per tree edge; normalize() drives them to a fixpoint. Outputs either pass
is_nf or have an unsatisfiable left side (closed by Inconsistency later).
"""

from __future__ import annotations

from typing import Callable, Optional

from . import pure as pure_solver
from .defs import Registry, Role, guard_of
from .syntax import (
    ArithEq,
    Entailment,
    Expr,
    IntLit,
    Null,
    NULL,
    PredOcc,
    PtrEq,
    PtrNeq,
    SymbolicHeap,
    Var,
    atom_root,
    is_fresh_name,
)

Step = tuple[str, tuple[Entailment, ...]]


# ---------------------------------------------------------------- normal form


def nf_failures(heap: SymbolicHeap, reg: Registry) -> tuple[int, ...]:
    """Failed clause numbers of the normal-form definition (empty when NF)."""
    pi = heap.pure
    fails: set[int] = set()
    for a in heap.spatial:
        if isinstance(a, PredOcc):
            g = guard_of(a, reg)
            if g is not None and g not in pi:
                fails.add(1)
        if PtrNeq(atom_root(a), NULL) not in pi:
            fails.add(2)
    roots = [atom_root(a) for a in heap.spatial]
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if PtrNeq(roots[i], roots[j]) not in pi:
                fails.add(3)
    for p in pi:
        if isinstance(p, PtrEq):
            fails.add(4)
        elif isinstance(p, ArithEq) and (
            isinstance(p.lhs, Var) or isinstance(p.rhs, Var)
        ):
            fails.add(4)
        elif isinstance(p, PtrNeq) and p.lhs == p.rhs:
            fails.add(5)
    if not pure_solver.satisfiable(pi):
        fails.add(6)
    return tuple(sorted(fails))


def is_nf(heap: SymbolicHeap, reg: Registry) -> bool:
    return not nf_failures(heap, reg)


def is_nf_entailment(ent: Entailment, reg: Registry) -> bool:
    """An entailment is in NF exactly when its LHS is."""
    return is_nf(ent.lhs, reg)


# -------------------------------------------------------------- rule appliers


def _with_lhs(ent: Entailment, lhs: SymbolicHeap) -> Entailment:
    return Entailment(lhs, ent.rhs, ent.frame)


def apply_eq_l(ent: Entailment, reg: Registry) -> Optional[Step]:
    for i, a in enumerate(ent.lhs.pure):
        if isinstance(a, (PtrEq, ArithEq)) and a.lhs == a.rhs:
            return "=L", (_with_lhs(ent, ent.lhs.drop_pure_at(i)),)
    return None


def _orient(lhs: Expr, rhs: Expr) -> Optional[tuple[str, Expr]]:
    """Pick the variable to eliminate: null and literals win, then fresh
    names lose to input names, then the lexicographically larger name goes."""
    if isinstance(lhs, (Null, IntLit)):
        lhs, rhs = rhs, lhs
    if isinstance(rhs, (Null, IntLit)):
        return (lhs.name, rhs) if isinstance(lhs, Var) else None
    assert isinstance(lhs, Var) and isinstance(rhs, Var)
    lf, rf = is_fresh_name(lhs.name), is_fresh_name(rhs.name)
    if lf != rf:
        return (lhs.name, rhs) if lf else (rhs.name, lhs)
    return (lhs.name, rhs) if lhs.name > rhs.name else (rhs.name, lhs)


def subst_site(ent: Entailment) -> Optional[tuple[int, str, Expr]]:
    """Index of the equality Subst would consume plus the oriented binding."""
    for i, a in enumerate(ent.lhs.pure):
        if isinstance(a, (PtrEq, ArithEq)) and a.lhs != a.rhs:
            oriented = _orient(a.lhs, a.rhs)
            if oriented is None:
                continue  # literal-vs-literal clash, left for the sat check
            name, repl = oriented
            return i, name, repl
    return None


def apply_subst(ent: Entailment, reg: Registry) -> Optional[Step]:
    site = subst_site(ent)
    if site is None:
        return None
    i, name, repl = site
    stripped = _with_lhs(ent, ent.lhs.drop_pure_at(i))
    return "Subst", (stripped.subst({name: repl}),)


def lbase_site(
    ent: Entailment, reg: Registry
) -> Optional[tuple[int, Optional[tuple[str, Expr]]]]:
    """Index of the collapsed occurrence and the source-target binding, if
    the order pair exists and orients to a substitution."""
    for i, a in enumerate(ent.lhs.spatial):
        if not isinstance(a, PredOcc):
            continue
        d = reg.pred(a.pred)
        if a.root != a.args[d.seg_index]:
            continue
        if d.has_order_pair():
            sc = a.args[d.index_of_role(Role.SRC)]
            tg = a.args[d.index_of_role(Role.TGT)]
            if sc != tg:
                return i, _orient(sc, tg)
        return i, None
    return None


def apply_lbase(ent: Entailment, reg: Registry) -> Optional[Step]:
    site = lbase_site(ent, reg)
    if site is None:
        return None
    i, oriented = site
    a = ent.lhs.spatial[i]
    assert isinstance(a, PredOcc)
    d = reg.pred(a.pred)
    out = _with_lhs(ent, ent.lhs.replace_spatial(i, ()))
    if d.has_order_pair():
        sc = a.args[d.index_of_role(Role.SRC)]
        tg = a.args[d.index_of_role(Role.TGT)]
        if sc != tg:
            if oriented is None:
                out = _with_lhs(out, out.lhs.add_pure([ArithEq(sc, tg)]))
            else:
                name, repl = oriented
                out = out.subst({name: repl})
    return "LBase", (out,)


def apply_neq_null(ent: Entailment, reg: Registry) -> Optional[Step]:
    pi = ent.lhs.pure
    for a in ent.lhs.spatial:
        if isinstance(a, PredOcc):
            g = guard_of(a, reg)
            if g is None or g not in pi:
                continue  # nonemptiness not yet established
        need = PtrNeq(atom_root(a), NULL)
        if need not in pi:
            return "NeqNull", (_with_lhs(ent, ent.lhs.add_pure([need])),)
    return None


def apply_neq_star(ent: Entailment, reg: Registry) -> Optional[Step]:
    pi = ent.lhs.pure
    atoms = ent.lhs.spatial
    present = [
        not isinstance(a, PredOcc) or guard_of(a, reg) in pi for a in atoms
    ]
    for i in range(len(atoms)):
        for j in range(i + 1, len(atoms)):
            if not (present[i] and present[j]):
                continue
            need = PtrNeq(atom_root(atoms[i]), atom_root(atoms[j]))
            if need not in pi:
                return "NeqStar", (_with_lhs(ent, ent.lhs.add_pure([need])),)
    return None


def _exm_pairs(heap: SymbolicHeap, reg: Registry) -> list[tuple[Expr, Expr]]:
    pairs: list[tuple[Expr, Expr]] = []
    for a in heap.spatial:
        if isinstance(a, PredOcc):
            pairs.append((a.root, a.args[reg.pred(a.pred).seg_index]))
    roots = [atom_root(a) for a in heap.spatial]
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            pairs.append((roots[i], roots[j]))
    return pairs


def apply_exm(ent: Entailment, reg: Registry) -> Optional[Step]:
    pi = ent.lhs.pure
    for e1, e2 in _exm_pairs(ent.lhs, reg):
        if e1 == e2 or PtrNeq(e1, e2) in pi or PtrEq(e1, e2) in pi:
            continue
        if pure_solver.status_of_pair(pi, e1, e2) == "unknown":
            eq = _with_lhs(ent, ent.lhs.add_pure([PtrEq(e1, e2)]))
            ne = _with_lhs(ent, ent.lhs.add_pure([PtrNeq(e1, e2)]))
            return "ExM", (eq, ne)
    return None


_APPLIERS: tuple[Callable[[Entailment, Registry], Optional[Step]], ...] = (
    apply_eq_l,
    apply_subst,
    apply_lbase,
    apply_neq_null,
    apply_neq_star,
    apply_exm,
)


def normalize_step(ent: Entailment, reg: Registry) -> Optional[Step]:
    """First applicable rule in the pinned order, or None when settled."""
    for applier in _APPLIERS:
        step = applier(ent, reg)
        if step is not None:
            return step
    return None


def normalize(
    ent: Entailment, reg: Registry
) -> list[tuple[Entailment, tuple[str, ...]]]:
    """Close the entailment under all six rules; one output per ExM branch,
    each paired with the rule labels applied on its path."""
    out: list[tuple[Entailment, tuple[str, ...]]] = []
    stack: list[tuple[Entailment, tuple[str, ...]]] = [(ent, ())]
    while stack:
        e, trace = stack.pop()
        step = normalize_step(e, reg)
        if step is None:
            out.append((e, trace))
            continue
        label, premises = step
        for p in reversed(premises):
            stack.append((p, trace + (label,)))
    return out
