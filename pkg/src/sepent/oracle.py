"""Bounded semantic oracle: explicit models, satisfaction, entailment by search.

This is the ground-truth side of the tool. It evaluates symbolic heaps
against finite stack/heap models and decides entailments by enumerating all
models of the left side up to a bound, checking the right side on each. It
shares nothing with proof search beyond the formula types, so the two can
cross-check one another.

Satisfaction of a predicate occurrence needs no quantifier search: in a
nonempty segment the head cell's fields determine the values of every
head-field existential, so the only choice point is empty versus nonempty,
and the heap shrinks on each nonempty step. A non-head-field existential
(only the inner order source can be one) falls back to enumerating the data
interval.

Model enumeration is canonical: allocated cells take locations 1..n in
expansion order and dangling values use fresh locations in first-use order,
which quotients away isomorphic duplicates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional

from .defs import (
    InductiveDef,
    Kind,
    Registry,
    Role,
    base_instance,
    existential_kinds,
    rec_instance,
)
from . import pure as pure_solver
from .syntax import (
    ArithEq,
    ArithLeq,
    Entailment,
    Expr,
    FreshNames,
    IntLit,
    Null,
    PointsTo,
    PredOcc,
    PtrEq,
    PtrNeq,
    PureAtom,
    SymbolicHeap,
    Var,
    subst_atom,
    subst_expr,
)


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class Bound:
    max_unfold: int = 4
    max_locs: int = 6
    data_min: int = -3
    data_max: int = 6

    def data_range(self) -> range:
        return range(self.data_min, self.data_max + 1)


DEFAULT_BOUND = Bound()


@dataclass(frozen=True)
class Cell:
    sort: str
    values: tuple[int, ...]


@dataclass
class HeapModel:
    """Stack maps every variable to an int: a location for pointer variables
    (0 is null), a plain integer for data variables."""

    stack: dict[str, int]
    heap: dict[int, Cell]
    ptr_vars: frozenset[str]

    def key(self) -> tuple:
        return (
            tuple(sorted(self.stack.items())),
            tuple(sorted((l, c.sort, c.values) for l, c in self.heap.items())),
        )

    def pretty(self, reg: Registry) -> str:
        def loc(v: int) -> str:
            return "null" if v == 0 else f"ℓ{v}"

        parts = []
        for n in sorted(self.stack):
            v = self.stack[n]
            parts.append(f"{n}={loc(v)}" if n in self.ptr_vars else f"{n}={v}")
        lines = ["stack: " + (", ".join(parts) if parts else "(empty)")]
        if not self.heap:
            lines.append("heap:  (empty)")
        for l in sorted(self.heap):
            cell = self.heap[l]
            decl = reg.sort_of(cell.sort)
            vals = [
                str(v) if ftype == "int" else loc(v)
                for (_, ftype), v in zip(decl.fields, cell.values)
            ]
            lines.append(f"heap:  {loc(l)} -> {cell.sort}({', '.join(vals)})")
        return "\n".join(lines)


Env = dict[str, int]


def _ptr_val(e: Expr, env: Env) -> int:
    if isinstance(e, Null):
        return 0
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise OracleError(f"unbound variable {e.name}") from None
    raise OracleError(f"integer literal {e} in pointer position")


def _data_val(e: Expr, env: Env) -> int:
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise OracleError(f"unbound variable {e.name}") from None
    raise OracleError("null in arithmetic position")


def _field_val(e: Expr, ftype: str, env: Env) -> int:
    return _data_val(e, env) if ftype == "int" else _ptr_val(e, env)


def eval_pure_atom(a: PureAtom, env: Env) -> bool:
    if isinstance(a, PtrEq):
        return _ptr_val(a.lhs, env) == _ptr_val(a.rhs, env)
    if isinstance(a, PtrNeq):
        return _ptr_val(a.lhs, env) != _ptr_val(a.rhs, env)
    if isinstance(a, ArithEq):
        return _data_val(a.lhs, env) == _data_val(a.rhs, env)
    if isinstance(a, ArithLeq):
        return _data_val(a.lhs, env) <= _data_val(a.rhs, env)
    raise TypeError(a)


# ------------------------------------------------------------------ satisfaction


def holds(
    model: HeapModel, heap: SymbolicHeap, reg: Registry, bound: Bound = DEFAULT_BOUND
) -> bool:
    """Does the model satisfy the symbolic heap (exact heap cover)?"""
    env = model.stack
    if not all(eval_pure_atom(a, env) for a in heap.pure):
        return False
    hint = _data_hint(model, bound)
    pending = [(a, env) for a in heap.spatial]
    return _covers(dict(model.heap), pending, reg, hint)


def _data_hint(model: HeapModel, bound: Bound) -> tuple[int, ...]:
    vals = set(bound.data_range())
    vals.update(model.stack.values())
    for c in model.heap.values():
        vals.update(c.values)
    return tuple(sorted(vals))


def _covers(
    cells: dict[int, Cell],
    pending: list[tuple[PointsTo | PredOcc, Env]],
    reg: Registry,
    hint: tuple[int, ...],
) -> bool:
    if not pending:
        return not cells
    atom, env = pending[0]
    rest = pending[1:]
    if isinstance(atom, PointsTo):
        loc = _ptr_val(atom.root, env)
        cell = cells.get(loc)
        if loc == 0 or cell is None or cell.sort != atom.sort:
            return False
        decl = reg.sort_of(atom.sort)
        for (_, ftype), e, v in zip(decl.fields, atom.fields, cell.values):
            if _field_val(e, ftype, env) != v:
                return False
        return _covers({l: c for l, c in cells.items() if l != loc}, rest, reg, hint)

    d = reg.pred(atom.pred)
    rootv = _ptr_val(atom.root, env)
    segv = _ptr_val(atom.args[d.seg_index], env)
    if rootv == segv:
        empty_ok = True
        if d.has_order_pair():
            si, ti = d.index_of_role(Role.SRC), d.index_of_role(Role.TGT)
            empty_ok = _data_val(atom.args[si], env) == _data_val(atom.args[ti], env)
        if empty_ok and _covers(cells, rest, reg, hint):
            return True
    cell = cells.get(rootv)
    if (
        rootv != segv
        and rootv != 0
        and cell is not None
        and cell.sort == d.rec.head.sort
    ):
        benv: Env = {}
        for p, a in zip(d.params, atom.args):
            benv[p.name] = _ptr_val(a, env) if p.kind == "ptr" else _data_val(a, env)
        decl = reg.sort_of(cell.sort)
        ex = set(d.rec.exists)
        ok = True
        for (_, ftype), e, v in zip(decl.fields, d.rec.head.fields, cell.values):
            if isinstance(e, Var) and e.name in ex and e.name not in benv:
                benv[e.name] = v
            elif _field_val(e, ftype, benv) != v:
                ok = False
                break
        if ok:
            for ext in _ex_choices(d, reg, benv, hint):
                env2 = benv | ext
                side = ([] if d.rec.order is None else [d.rec.order]) + list(d.rec.arith)
                if not all(eval_pure_atom(a, env2) for a in side):
                    continue
                sub = [(m, env2) for m in d.rec.matrix] + [(d.rec.rec, env2)]
                cells2 = {l: c for l, c in cells.items() if l != rootv}
                if _covers(cells2, sub + rest, reg, hint):
                    return True
    return False


def _ex_choices(
    d: InductiveDef, reg: Registry, benv: Env, hint: tuple[int, ...]
) -> Iterator[Env]:
    unbound = [w for w in d.rec.exists if w not in benv]
    if not unbound:
        yield {}
        return
    kinds = existential_kinds(d, reg)
    for w in unbound:
        if kinds.get(w, "int") != "int":
            raise OracleError(f"{d.name}: existential {w} not determined by head cell")
    for combo in itertools.product(hint, repeat=len(unbound)):
        yield dict(zip(unbound, combo))


# -------------------------------------------------------------- one-step bases


def base_of(
    heap: SymbolicHeap, reg: Registry, fresh: Optional[FreshNames] = None
) -> SymbolicHeap:
    """Replace each occurrence by its minimal nonempty materialization.

    The head cell is emitted with the recursive root replaced by the segment
    argument and the inner order source by the target; matrix occurrences are
    materialized the same way, except that a matrix occurrence of a predicate
    already being materialized takes its empty branch (its root collapses to
    its own segment argument), which keeps the construction finite.
    """
    fresh = fresh or FreshNames()
    spatial: list[PointsTo] = []
    extra: list[PureAtom] = []
    for atom in heap.spatial:
        if isinstance(atom, PointsTo):
            spatial.append(atom)
        else:
            _materialize(atom, reg, fresh, spatial, extra, frozenset())
    out = SymbolicHeap(tuple(spatial), heap.pure)
    return out.add_pure(extra)


def _materialize(
    occ: PredOcc,
    reg: Registry,
    fresh: FreshNames,
    spatial: list[PointsTo],
    pure: list[PureAtom],
    active: frozenset[str],
) -> None:
    d = reg.pred(occ.pred)
    sub: dict[str, Expr] = dict(zip(d.param_names(), occ.args))
    rec_root = d.rec.rec.root
    assert isinstance(rec_root, Var)
    src_ex = d.src_existential()
    matrix_roots = {m.root.name for m in d.rec.matrix if isinstance(m.root, Var)}
    sub[rec_root.name] = occ.args[d.seg_index]
    if src_ex is not None:
        ti = d.index_of_role(Role.TGT)
        sub[src_ex] = occ.args[ti]
    for w in d.rec.exists:
        if w not in sub and w not in matrix_roots:
            sub[w] = Var(fresh.make(w))
    cyclic = [m for m in d.rec.matrix if m.pred in active or m.pred == d.name]
    for m in d.rec.matrix:
        root = m.root
        assert isinstance(root, Var)
        if root.name in sub:
            continue
        if m in cyclic:
            target = reg.pred(m.pred)
            seg_arg = m.args[target.seg_index]
            if isinstance(seg_arg, Var) and seg_arg.name in matrix_roots:
                seg_arg = Var(fresh.make(root.name))  # unresolvable chain
            sub[root.name] = subst_expr(seg_arg, sub)
        else:
            sub[root.name] = Var(fresh.make(root.name))

    spatial.append(d.rec.head.subst(sub))
    pure.append(PtrNeq(occ.root, occ.args[d.seg_index]))
    if d.rec.order is not None:
        pure.append(subst_atom(d.rec.order, sub))
    pure.extend(subst_atom(a, sub) for a in d.rec.arith)
    for m in d.rec.matrix:
        mi = m.subst(sub)
        target = reg.pred(m.pred)
        if m in cyclic:
            if target.has_order_pair():
                si, ti = target.index_of_role(Role.SRC), target.index_of_role(Role.TGT)
                pure.append(ArithEq(mi.args[si], mi.args[ti]))
        else:
            _materialize(mi, reg, fresh, spatial, pure, active | {d.name})


def bad_model(heap: SymbolicHeap, reg: Registry) -> HeapModel:
    """A concrete model of a base formula in normal form: pointer variables
    get pairwise-distinct non-null locations (modulo nothing: NF has no
    equalities), data variables get a satisfying assignment."""
    if any(isinstance(a, PredOcc) for a in heap.spatial):
        raise OracleError("bad_model needs a base formula")
    kinds = _kind_walk(heap, reg)
    ptr_names = tuple(sorted(n for n, k in kinds.items() if k == "ptr"))
    int_names = tuple(sorted(n for n, k in kinds.items() if k == "int"))
    ptr_atoms = tuple(a for a in heap.pure if isinstance(a, (PtrEq, PtrNeq)))
    arith_atoms = tuple(a for a in heap.pure if isinstance(a, (ArithEq, ArithLeq)))
    env: Env = dict(pure_solver.pointer_model(ptr_atoms, ptr_names))
    env.update(pure_solver.arith_model(arith_atoms, int_names))
    cells: dict[int, Cell] = {}
    for atom in heap.spatial:
        assert isinstance(atom, PointsTo)
        loc = _ptr_val(atom.root, env)
        decl = reg.sort_of(atom.sort)
        if loc == 0 or loc in cells:
            raise OracleError("input is not a separated base formula in NF")
        cells[loc] = Cell(
            atom.sort,
            tuple(
                _field_val(e, ftype, env)
                for (_, ftype), e in zip(decl.fields, atom.fields)
            ),
        )
    model = HeapModel(env, cells, frozenset(ptr_names))
    if not holds(model, heap, reg):
        raise OracleError("bad_model construction failed its own check")
    return model


def kinds_of(heap: SymbolicHeap, reg: Registry) -> dict[str, Kind]:
    """Variable kinds inferred from use sites; raises on conflicting use."""
    return _kind_walk(heap, reg)


def _kind_walk(heap: SymbolicHeap, reg: Registry) -> dict[str, Kind]:
    kinds: dict[str, Kind] = {}

    def note(e: Expr, k: Kind) -> None:
        if not isinstance(e, Var):
            return
        old = kinds.setdefault(e.name, k)
        if old != k:
            raise OracleError(f"variable {e.name} used at both sorts")

    for atom in heap.spatial:
        if isinstance(atom, PointsTo):
            note(atom.root, "ptr")
            decl = reg.sort_of(atom.sort)
            for (_, ftype), e in zip(decl.fields, atom.fields):
                note(e, "int" if ftype == "int" else "ptr")
        else:
            d = reg.pred(atom.pred)
            for p, a in zip(d.params, atom.args):
                note(a, p.kind)
    for a in heap.pure:
        k: Kind = "ptr" if isinstance(a, (PtrEq, PtrNeq)) else "int"
        note(a.lhs, k)
        note(a.rhs, k)
    return kinds


# ----------------------------------------------------------- model enumeration


def models_of(
    heap: SymbolicHeap,
    reg: Registry,
    bound: Bound = DEFAULT_BOUND,
    self_check: bool = False,
) -> Iterator[HeapModel]:
    """All models of the heap up to the bound, canonically enumerated."""
    fresh = FreshNames()
    stack_names = tuple(sorted(heap.fv()))
    seen: set[tuple] = set()
    for cells, pure_atoms in _expand(heap, reg, bound, fresh):
        variant = SymbolicHeap(cells, pure_atoms)
        kinds = _kind_walk(variant, reg)
        for env in _assignments(cells, pure_atoms, stack_names, kinds, bound):
            hp: dict[int, Cell] = {}
            for i, c in enumerate(cells):
                decl = reg.sort_of(c.sort)
                hp[i + 1] = Cell(
                    c.sort,
                    tuple(
                        _field_val(e, ftype, env)
                        for (_, ftype), e in zip(decl.fields, c.fields)
                    ),
                )
            stack = {n: env[n] for n in stack_names}
            ptr_vars = frozenset(n for n in stack_names if kinds.get(n) == "ptr")
            model = HeapModel(stack, hp, ptr_vars)
            key = model.key()
            if key in seen:
                continue
            seen.add(key)
            if self_check and not holds(model, heap, reg, bound):
                raise OracleError("enumerator produced a non-model")
            yield model


def _expand(
    heap: SymbolicHeap, reg: Registry, bound: Bound, fresh: FreshNames
) -> Iterator[tuple[tuple[PointsTo, ...], tuple[PureAtom, ...]]]:
    """Unfold occurrences every way: per-chain depth budget, global cell cap."""

    def go(
        pending: list[tuple[PointsTo | PredOcc, int]],
        cells: tuple[PointsTo, ...],
        pure: tuple[PureAtom, ...],
    ) -> Iterator[tuple[tuple[PointsTo, ...], tuple[PureAtom, ...]]]:
        if not pending:
            yield cells, pure
            return
        atom, budget = pending[0]
        rest = pending[1:]
        if isinstance(atom, PointsTo):
            if len(cells) >= bound.max_locs:
                return
            yield from go(rest, cells + (atom,), pure)
            return
        d = reg.pred(atom.pred)
        yield from go(rest, cells, pure + base_instance(atom, d))
        if budget > 0 and len(cells) < bound.max_locs:
            spatial, rpure, _ = rec_instance(atom, d, fresh)
            head, mats, rec = spatial[0], spatial[1:-1], spatial[-1]
            new = [(head, 0)]
            new += [(m, bound.max_unfold) for m in mats]
            new.append((rec, budget - 1))
            yield from go(new + rest, cells, pure + rpure)

    start = [(a, bound.max_unfold) for a in heap.spatial]
    yield from go(start, (), heap.pure)


def _assignments(
    cells: tuple[PointsTo, ...],
    pure_atoms: tuple[PureAtom, ...],
    stack_names: tuple[str, ...],
    kinds: dict[str, Kind],
    bound: Bound,
) -> Iterator[Env]:
    env: Env = {}
    n = len(cells)
    for i, c in enumerate(cells):
        if not isinstance(c.root, Var) or c.root.name in env:
            return
        env[c.root.name] = i + 1

    order: list[str] = []
    placed = set(env)

    def add(e: Expr) -> None:
        if isinstance(e, Var) and e.name not in placed:
            placed.add(e.name)
            order.append(e.name)

    for c in cells:
        for e in c.fields:
            add(e)
    for a in pure_atoms:
        add(a.lhs)
        add(a.rhs)
    for nm in stack_names:
        if nm not in placed:
            placed.add(nm)
            order.append(nm)

    pos = {nm: i for i, nm in enumerate(order)}
    ready: list[list[PureAtom]] = [[] for _ in range(len(order) + 1)]
    for a in pure_atoms:
        slot = 0
        for e in (a.lhs, a.rhs):
            if isinstance(e, Var) and e.name in pos:
                slot = max(slot, pos[e.name] + 1)
        ready[slot].append(a)
    if not all(eval_pure_atom(a, env) for a in ready[0]):
        return

    data_domain = tuple(bound.data_range())

    def bt(i: int, used_fresh: int) -> Iterator[Env]:
        if i == len(order):
            yield dict(env)
            return
        name = order[i]
        if kinds.get(name, "ptr") == "int":
            domain: tuple[int, ...] = data_domain
        else:
            dom = list(range(n + 1))
            top = min(n + used_fresh + 1, bound.max_locs)
            dom.extend(range(n + 1, top + 1))
            domain = tuple(dom)
        for v in domain:
            env[name] = v
            uf = used_fresh + (1 if v == n + used_fresh + 1 else 0)
            if all(eval_pure_atom(a, env) for a in ready[i + 1]):
                yield from bt(i + 1, uf)
        del env[name]

    yield from bt(0, 0)


# -------------------------------------------------------------------- verdicts


class OracleVerdict(NamedTuple):
    bounded_valid: bool
    counter: Optional[HeapModel]


def oracle_entails(
    ent: Entailment, reg: Registry, bound: Bound = DEFAULT_BOUND
) -> OracleVerdict:
    """Search for a countermodel; absence only rules out models within bound."""
    for m in models_of(ent.lhs, reg, bound):
        if not holds(m, ent.rhs, reg, bound):
            return OracleVerdict(False, m)
    return OracleVerdict(True, None)


def confirm_countermodel(
    model: HeapModel, ent: Entailment, reg: Registry, bound: Bound = DEFAULT_BOUND
) -> bool:
    return holds(model, ent.lhs, reg, bound) and not holds(model, ent.rhs, reg, bound)
