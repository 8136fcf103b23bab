r"""Inductive definitions: the compositional template, wellformedness, unfolding.

A definition has one implicit base branch (emp /\ root=seg [/\ src=tgt]) and one
recursive branch consisting of a head cell at the root, a matrix of nested
occurrences rooted at head fields, a single designated recursive occurrence
continuing the segment, and a pure side (guard, optional order atom over the
source pair, extra arithmetic atoms).

Wellformedness enforces the template shape plus:
  C1  every existential other than the inner order source is a head field value;
  C2  matrix occurrences are rooted at head-field existentials and their other
      arguments avoid matrix roots unless they are head fields themselves;
  C3  no mutual recursion between distinct predicates (self-recursion is the
      template, including self occurrences in the matrix).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Literal, Optional

from .syntax import (
    ArithEq,
    Expr,
    FreshNames,
    PointsTo,
    PredOcc,
    PtrEq,
    PtrNeq,
    PureAtom,
    Var,
    subst_atom,
)


class Role(str, Enum):
    ROOT = "root"
    SEG = "seg"
    BORDER = "border"
    TRANS = "trans"
    SRC = "src"
    TGT = "tgt"


Kind = Literal["ptr", "int"]


@dataclass(frozen=True)
class Param:
    name: str
    role: Role
    kind: Kind = "ptr"


@dataclass(frozen=True)
class SortDecl:
    """A record sort; each field is (name, target) with target a sort or "int"."""

    name: str
    fields: tuple[tuple[str, str], ...]

    def field_index(self, fname: str) -> int:
        for i, (n, _) in enumerate(self.fields):
            if n == fname:
                return i
        raise KeyError(fname)


@dataclass(frozen=True)
class RecBranch:
    exists: tuple[str, ...]
    head: PointsTo
    matrix: tuple[PredOcc, ...]
    rec: PredOcc
    order: Optional[PureAtom]  # relates Var(src param) and Var(src existential)
    arith: tuple[PureAtom, ...]


@dataclass(frozen=True)
class InductiveDef:
    name: str
    params: tuple[Param, ...]
    rec: RecBranch

    def param_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.params)

    def index_of_role(self, role: Role) -> Optional[int]:
        for i, p in enumerate(self.params):
            if p.role == role:
                return i
        return None

    @property
    def root_index(self) -> int:
        i = self.index_of_role(Role.ROOT)
        assert i is not None
        return i

    @property
    def seg_index(self) -> int:
        i = self.index_of_role(Role.SEG)
        assert i is not None
        return i

    def has_order_pair(self) -> bool:
        return self.index_of_role(Role.SRC) is not None

    def src_existential(self) -> Optional[str]:
        """The inner order source: the recursive occurrence's src argument."""
        i = self.index_of_role(Role.SRC)
        if i is None:
            return None
        arg = self.rec.rec.args[i]
        return arg.name if isinstance(arg, Var) else None


@dataclass
class Registry:
    sorts: dict[str, SortDecl]
    preds: dict[str, InductiveDef]

    def sort_of(self, name: str) -> SortDecl:
        return self.sorts[name]

    def pred(self, name: str) -> InductiveDef:
        return self.preds[name]


class WellformednessError(ValueError):
    pass


def _expr_name(e: Expr) -> Optional[str]:
    return e.name if isinstance(e, Var) else None


def check_wellformed(reg: Registry) -> list[str]:
    """Return all template/C1/C2/C3 violations as human-readable diagnostics."""
    out: list[str] = []
    for d in reg.preds.values():
        out.extend(_check_def(reg, d))
    out.extend(_check_c3(reg))
    return out


def assert_wellformed(reg: Registry) -> None:
    problems = check_wellformed(reg)
    if problems:
        raise WellformednessError("; ".join(problems))


def _check_def(reg: Registry, d: InductiveDef) -> list[str]:
    out: list[str] = []
    roles = [p.role for p in d.params]
    if roles.count(Role.ROOT) != 1 or roles.count(Role.SEG) != 1:
        out.append(f"{d.name}: needs exactly one root and one seg parameter")
        return out
    if roles.count(Role.SRC) != roles.count(Role.TGT) or roles.count(Role.SRC) > 1:
        out.append(f"{d.name}: src/tgt must appear as a pair, at most once")
        return out
    names = d.param_names()
    if len(set(names)) != len(names):
        out.append(f"{d.name}: duplicate parameter names")
        return out

    for p in d.params:
        if p.role in (Role.ROOT, Role.SEG) and p.kind != "ptr":
            out.append(f"{d.name}: {p.name} must be pointer-sorted")
        if p.role in (Role.SRC, Role.TGT) and p.kind != "int":
            out.append(f"{d.name}: {p.name} must be integer-sorted")

    rb = d.rec
    root = Var(names[d.root_index])
    if rb.head.root != root:
        out.append(f"{d.name}: head cell must be rooted at the root parameter")
    if rb.head.sort not in reg.sorts:
        out.append(f"{d.name}: unknown sort {rb.head.sort}")
    else:
        decl = reg.sorts[rb.head.sort]
        if len(decl.fields) != len(rb.head.fields):
            out.append(f"{d.name}: head cell arity differs from sort {decl.name}")

    ex = set(rb.exists)
    if len(rb.exists) != len(ex):
        out.append(f"{d.name}: duplicate existentials")
    head_ex = [n for f in rb.head.fields if (n := _expr_name(f)) in ex]
    if len(head_ex) != len(set(head_ex)):
        out.append(f"{d.name}: an existential occurs twice among head fields")
    head_ex_set = set(head_ex)

    # C1: every existential except the inner order source is a head field.
    src_ex = d.src_existential()
    for w in rb.exists:
        if w != src_ex and w not in head_ex_set:
            out.append(f"{d.name}: C1 violated, existential {w} is not a head field")

    # Recursive occurrence shape: P(X, F, borders.., u, src', tgt).
    if rb.rec.pred != d.name:
        out.append(f"{d.name}: recursive occurrence must be {d.name} itself")
    elif len(rb.rec.args) != len(d.params):
        out.append(f"{d.name}: recursive occurrence arity mismatch")
    else:
        for i, p in enumerate(d.params):
            arg = rb.rec.args[i]
            if p.role == Role.ROOT:
                n = _expr_name(arg)
                if n not in head_ex_set:
                    out.append(
                        f"{d.name}: recursive root must be a head-field existential"
                    )
            elif p.role == Role.SRC:
                n = _expr_name(arg)
                if n not in ex:
                    out.append(f"{d.name}: recursive src must be an existential")
            else:
                if arg != Var(p.name):
                    out.append(
                        f"{d.name}: recursive occurrence must pass {p.name} unchanged"
                    )

    # C2: matrix occurrences sit at head-field existentials.
    matrix_roots = {_expr_name(m.root) for m in rb.matrix}
    for m in rb.matrix:
        if m.pred not in reg.preds:
            out.append(f"{d.name}: unknown predicate {m.pred} in matrix")
            continue
        target = reg.preds[m.pred]
        if len(m.args) != len(target.params):
            out.append(f"{d.name}: matrix occurrence {m.pred} arity mismatch")
            continue
        rname = _expr_name(m.root)
        if rname not in head_ex_set:
            out.append(
                f"{d.name}: C2 violated, matrix root {m.root} is not a head field"
            )
        for a in m.args[1:]:
            n = _expr_name(a)
            if n is not None and n in ex and n not in head_ex_set:
                out.append(f"{d.name}: C2 violated, matrix argument {n} not a head field")
            if n is not None and n not in head_ex_set and n in matrix_roots:
                out.append(f"{d.name}: C2 violated, matrix argument {n} is a matrix root")

    # Order atom must relate the src parameter and the src existential.
    if d.has_order_pair():
        if rb.order is None:
            out.append(f"{d.name}: src/tgt pair requires an order atom")
        else:
            sc = Var(names[d.index_of_role(Role.SRC)])  # type: ignore[arg-type]
            ops = {rb.order.lhs, rb.order.rhs}
            if sc not in ops or (src_ex is None or Var(src_ex) not in ops):
                out.append(f"{d.name}: order atom must relate src and its existential")
    elif rb.order is not None:
        out.append(f"{d.name}: order atom without a src/tgt pair")

    return out


def _check_c3(reg: Registry) -> list[str]:
    # Cycle over distinct names: edge P -> Q for matrix occurrences with Q != P.
    edges: dict[str, set[str]] = {
        n: {m.pred for m in d.rec.matrix if m.pred != n} for n, d in reg.preds.items()
    }
    state: dict[str, int] = {}
    out: list[str] = []

    def visit(n: str) -> bool:
        if state.get(n) == 1:
            return True
        if state.get(n) == 2:
            return False
        state[n] = 1
        hit = any(visit(m) for m in sorted(edges.get(n, ())) if m in edges)
        state[n] = 2
        return hit

    for n in sorted(edges):
        state.clear()
        if visit(n):
            out.append(f"C3 violated: {n} participates in mutual recursion")
            break
    return out


def existential_kinds(d: InductiveDef, reg: Registry) -> dict[str, Kind]:
    """Sort of each existential, read off the head cell (src existential is int)."""
    kinds: dict[str, Kind] = {}
    decl = reg.sorts[d.rec.head.sort]
    ex = set(d.rec.exists)
    for (_, ftype), e in zip(decl.fields, d.rec.head.fields):
        if isinstance(e, Var) and e.name in ex:
            kinds[e.name] = "int" if ftype == "int" else "ptr"
    src_ex = d.src_existential()
    if src_ex is not None:
        kinds.setdefault(src_ex, "int")
    return kinds


# -------------------------------------------------------------------- unfolding


def base_instance(occ: PredOcc, d: InductiveDef) -> tuple[PureAtom, ...]:
    """Pure atoms of the base branch instantiated at this occurrence."""
    atoms: list[PureAtom] = [PtrEq(occ.root, occ.args[d.seg_index])]
    if d.has_order_pair():
        si = d.index_of_role(Role.SRC)
        ti = d.index_of_role(Role.TGT)
        assert si is not None and ti is not None
        atoms.append(ArithEq(occ.args[si], occ.args[ti]))
    return tuple(atoms)


def rec_instance(
    occ: PredOcc, d: InductiveDef, fresh: FreshNames
) -> tuple[tuple[SpatialAtom, ...], tuple[PureAtom, ...], dict[str, Expr]]:
    """Recursive branch at this occurrence with fresh existentials.

    Returns (spatial atoms, pure atoms, substitution used). The recursive
    occurrence carries occ.unfold + 1 and matrix occurrences carry 0.
    """
    sub: dict[str, Expr] = dict(zip(d.param_names(), occ.args))
    for w in d.rec.exists:
        sub[w] = Var(fresh.make(w))
    head = d.rec.head.subst(sub)
    matrix = tuple(m.subst(sub).with_unfold(0) for m in d.rec.matrix)
    rec = d.rec.rec.subst(sub).with_unfold(occ.unfold + 1)
    pure: list[PureAtom] = [PtrNeq(occ.root, occ.args[d.seg_index])]
    if d.rec.order is not None:
        pure.append(subst_atom(d.rec.order, sub))
    pure.extend(subst_atom(a, sub) for a in d.rec.arith)
    return (head, *matrix, rec), tuple(pure), sub


SpatialAtom = PointsTo | PredOcc


def unfold(
    occ: PredOcc, reg: Registry, fresh: FreshNames
) -> tuple[tuple[PureAtom, ...], tuple[tuple[SpatialAtom, ...], tuple[PureAtom, ...]]]:
    """Both branches of an occurrence: (base pure, (rec spatial, rec pure))."""
    d = reg.pred(occ.pred)
    spatial, pure, _ = rec_instance(occ, d, fresh)
    return base_instance(occ, d), (spatial, pure)


def guard_of(atom: SpatialAtom, reg: Registry) -> Optional[PureAtom]:
    """Guard formula: true (None) for cells, root != seg for occurrences."""
    if isinstance(atom, PointsTo):
        return None
    d = reg.pred(atom.pred)
    return PtrNeq(atom.root, atom.args[d.seg_index])
