"""Cyclic entailment prover.

The search keeps a single proof tree and repeatedly inspects its leftmost
open leaf.  A leaf is first rewritten towards normal form one step at a
time, then closed by an axiom, reported stuck through one of the four
invalidity cases, or expanded by a reduction.  Before a selected rule is
applied the engine tries to link the leaf back to a structurally identical
ancestor under a renaming of proof-fresh variables; the resulting cyclic
structure is re-verified by an independent pass that follows one predicate
occurrence along every cycle and demands that it was unfolded on the way.

Invalid verdicts at stuck leaves come with a concrete countermodel whenever
the leaf shape guarantees one; the model is rebuilt bottom-up through the
branch (undoing substitutions, dropping unfolding freshness, re-adding
heap parts split off by Star) and confirmed against the input before it is
reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Literal, Optional, Union

from . import pure as pure_solver
from .defs import (
    Registry,
    Role,
    check_wellformed,
    guard_of,
    rec_instance,
)
from .normalize import lbase_site, normalize_step, subst_site
from .oracle import Cell, HeapModel, bad_model, base_of, holds
from .syntax import (
    ArithEq,
    Entailment,
    Expr,
    FreshNames,
    IntLit,
    Null,
    PointsTo,
    PredOcc,
    PtrEq,
    PtrNeq,
    SpatialAtom,
    SymbolicHeap,
    Var,
    is_fresh_name,
    same_atom_mod_unfold,
    subst_atom,
)

DEFAULT_NODE_BUDGET = 100000


class UnsupportedFragment(ValueError):
    """Input outside the decidable fragment the prover handles."""


class ResourceLimit(RuntimeError):
    """Search exceeded its node budget."""


class SideConditionFailed(ValueError):
    """A rule was applied where its side conditions do not hold."""


# ----------------------------------------------------------------- proof tree


@dataclass(frozen=True)
class Edge:
    """Annotations on a parent-to-child step.

    fwd maps each parent LHS spatial index to its surviving child index
    (None when the atom was consumed); progressed holds parent indices whose
    occurrence was unfolded with an incremented annotation on this step; sub
    records a variable binding eliminated by Subst or LBase; peeled holds
    the LHS atoms this premise of Star does not keep.
    """

    rule: str
    fwd: tuple[Optional[int], ...]
    progressed: frozenset[int] = frozenset()
    sub: Optional[tuple[str, Expr]] = None
    peeled: tuple[SpatialAtom, ...] = ()


@dataclass(frozen=True)
class RuleChoice:
    """A selected rule instance: label, premises, and edge annotations.

    Axioms have no premises; applying them closes the leaf.
    """

    label: str
    premises: tuple[Entailment, ...]
    edges: tuple[Edge, ...]

    def __str__(self) -> str:
        return self.label


Status = Literal["open", "valid", "invalid", "bud"]


@dataclass
class ProofNode:
    id: int
    ent: Entailment
    parent: Optional[int]
    edge: Optional[Edge]
    children: list[int] = field(default_factory=list)
    status: Status = "open"
    axiom: Optional[str] = None
    case: Optional[str] = None
    counter: Optional[HeapModel] = None
    companion: Optional[int] = None
    sigma: Optional[dict[str, str]] = None
    match: Optional[dict[int, int]] = None

    def is_leaf(self) -> bool:
        return not self.children


@dataclass
class ProofTree:
    nodes: dict[int, ProofNode]
    root: int = 0
    fresh: FreshNames = field(default_factory=FreshNames)

    @classmethod
    def new(cls, root_ent: Entailment) -> "ProofTree":
        return cls({0: ProofNode(0, root_ent, None, None)})

    def node(self, nid: int) -> ProofNode:
        return self.nodes[nid]

    def add(self, ent: Entailment, parent: int, edge: Edge) -> ProofNode:
        nid = len(self.nodes)
        node = ProofNode(nid, ent, parent, edge)
        self.nodes[nid] = node
        self.nodes[parent].children.append(nid)
        return node

    def edges(self) -> Iterator[tuple[int, str, int]]:
        for nid in sorted(self.nodes):
            n = self.nodes[nid]
            if n.parent is not None:
                assert n.edge is not None
                yield n.parent, n.edge.rule, nid

    def backlinks(self) -> list[tuple[int, int, dict[str, str]]]:
        return [
            (n.companion, n.id, dict(n.sigma or {}))
            for n in (self.nodes[i] for i in sorted(self.nodes))
            if n.status == "bud" and n.companion is not None
        ]

    def ancestors(self, nid: int) -> Iterator[ProofNode]:
        cur = self.nodes[nid]
        while cur.parent is not None:
            cur = self.nodes[cur.parent]
            yield cur

    def path_down(self, anc: int, desc: int) -> list[ProofNode]:
        """Nodes strictly below anc on the branch to desc, top to bottom."""
        out = []
        cur = self.nodes[desc]
        while cur.id != anc:
            out.append(cur)
            if cur.parent is None:
                raise KeyError(f"{anc} is not an ancestor of {desc}")
            cur = self.nodes[cur.parent]
        return list(reversed(out))

    def open_leaf(self) -> Optional[ProofNode]:
        """Leftmost deepest open leaf in child order."""
        stack = [self.root]
        while stack:
            n = self.nodes[stack.pop()]
            if n.status == "open" and n.is_leaf():
                return n
            stack.extend(reversed(n.children))
        return None

    def is_preproof(self) -> bool:
        return all(
            not n.is_leaf() or n.status in ("valid", "bud")
            for n in self.nodes.values()
        )


@dataclass(frozen=True)
class Verdict:
    valid: bool
    tree: ProofTree
    node: Optional[int] = None
    case: Optional[str] = None
    counter: Optional[HeapModel] = None


# -------------------------------------------------------------------- helpers


def _ident_edge(label: str, ent: Entailment) -> Edge:
    return Edge(label, tuple(range(len(ent.lhs.spatial))))


def _match_identical(
    lhs: tuple[SpatialAtom, ...], rhs: tuple[SpatialAtom, ...]
) -> dict[int, int]:
    """Injective map of RHS indices to structurally identical LHS atoms,
    unfolding annotations ignored.  Greedy is enough: separated atoms with
    equal roots cannot coexist, so candidates are unique."""
    used: set[int] = set()
    out: dict[int, int] = {}
    for j, b in enumerate(rhs):
        for i, a in enumerate(lhs):
            if i not in used and same_atom_mod_unfold(a, b):
                used.add(i)
                out[j] = i
                break
    return out


def _reaches(atom: SpatialAtom, e: Expr, reg: Registry) -> bool:
    """Whether the atom connects to e: the segment argument of an
    occurrence, or any pointer field of a cell."""
    if isinstance(atom, PredOcc):
        return atom.args[reg.pred(atom.pred).seg_index] == e
    decl = reg.sort_of(atom.sort)
    return any(
        f == e for (_, ft), f in zip(decl.fields, atom.fields) if ft != "int"
    )


def _occ_at(heap: SymbolicHeap, root: Expr) -> Optional[tuple[int, PredOcc]]:
    for i, a in heap.pred_occs():
        if a.root == root:
            return i, a
    return None


# --------------------------------------------------------------------- axioms


def _axiom(ent: Entailment, reg: Registry) -> Optional[RuleChoice]:
    # Unsatisfiable left side: everything follows.  The pure part of the
    # one-step materialization carries the constraints the occurrences force
    # (nonemptiness plus instantiated ordering), so its inconsistency decides
    # left-side unsatisfiability on normalized leaves.
    if not pure_solver.satisfiable(base_of(ent.lhs, reg).pure):
        return RuleChoice("Inconsistency", (), ())
    if not ent.lhs.spatial and not ent.rhs.spatial and not ent.rhs.pure:
        return RuleChoice("Emp", (), ())
    m = _match_identical(ent.lhs.spatial, ent.rhs.spatial)
    if (
        len(m) == len(ent.lhs.spatial) == len(ent.rhs.spatial)
        and pure_solver.entails_all(ent.lhs.pure, ent.rhs.pure)
    ):
        return RuleChoice("Id", (), ())
    return None


# ----------------------------------------------------------- invalidity cases


def _stuck_case(ent: Entailment, reg: Registry) -> Optional[str]:
    """Shapes that make a satisfiable normalized leaf refutable.

    2b: some left atom owns a subheap at E but no right atom is rooted
        there, and either both sides reach E from elsewhere or the left
        does not reach it at all.
    2c: a right atom at E is forced nonempty by the left pure part, but
        the left has no atom at E to supply it.
    2d: cells at the same root disagree on sort or fields.
    """
    lhs, rhs = ent.lhs, ent.rhs
    for a in lhs.spatial:
        e = a.root
        if rhs.atom_at_root(e) is not None:
            continue
        lhs_reach = any(o is not a and _reaches(o, e, reg) for o in lhs.spatial)
        rhs_reach = any(_reaches(o, e, reg) for o in rhs.spatial)
        if (lhs_reach and rhs_reach) or not lhs_reach:
            return "2b"
    for b in rhs.spatial:
        g = guard_of(b, reg)
        if g is not None and not lhs.has_pure(g):
            continue
        if lhs.atom_at_root(b.root) is None:
            return "2c"
    for _, c2 in rhs.points_tos():
        a = lhs.atom_at_root(c2.root)
        if isinstance(a, PointsTo) and (
            a.sort != c2.sort or a.fields != c2.fields
        ):
            return "2d"
    return None


# ----------------------------------------------------------------- reductions


def _eq_r(ent: Entailment, reg: Registry, fresh: FreshNames) -> Optional[RuleChoice]:
    for i, a in enumerate(ent.rhs.pure):
        if isinstance(a, (PtrEq, ArithEq)) and a.lhs == a.rhs:
            prem = replace(ent, rhs=ent.rhs.drop_pure_at(i))
            return RuleChoice("=R", (prem,), (_ident_edge("=R", ent),))
    return None


def _rbase(ent: Entailment, reg: Registry, fresh: FreshNames) -> Optional[RuleChoice]:
    for j, occ in ent.rhs.pred_occs():
        d = reg.pred(occ.pred)
        if occ.root != occ.args[d.seg_index]:
            continue
        rhs = ent.rhs.replace_spatial(j, ())
        if d.has_order_pair():
            si, ti = d.index_of_role(Role.SRC), d.index_of_role(Role.TGT)
            assert si is not None and ti is not None
            rhs = rhs.add_pure([ArithEq(occ.args[ti], occ.args[si])])
        prem = replace(ent, rhs=rhs)
        return RuleChoice("RBase", (prem,), (_ident_edge("RBase", ent),))
    return None


def _hypothesis(
    ent: Entailment, reg: Registry, fresh: FreshNames
) -> Optional[RuleChoice]:
    drop = {
        i
        for i, a in enumerate(ent.rhs.pure)
        if pure_solver.entails(ent.lhs.pure, a)
    }
    if not drop:
        return None
    keep = tuple(a for i, a in enumerate(ent.rhs.pure) if i not in drop)
    prem = replace(ent, rhs=SymbolicHeap(ent.rhs.spatial, keep))
    return RuleChoice("Hypothesis", (prem,), (_ident_edge("Hypothesis", ent),))


def _rind(ent: Entailment, reg: Registry, fresh: FreshNames) -> Optional[RuleChoice]:
    """Unfold a right occurrence whose root cell is on the left.  The head
    existentials are bound to that cell's actual fields, so the premise
    stays quantifier-free; a disagreeing field surfaces as a cell mismatch
    in the premise rather than blocking the rule."""
    for j, occ in ent.rhs.pred_occs():
        x = occ.root
        cell = ent.lhs.atom_at_root(x)
        if not isinstance(cell, PointsTo):
            continue
        d = reg.pred(occ.pred)
        if cell.sort != d.rec.head.sort:
            continue
        if not pure_solver.entails(
            ent.lhs.pure, PtrNeq(x, occ.args[d.seg_index])
        ):
            continue
        if any(isinstance(b, PointsTo) and b.root == x for b in ent.rhs.spatial):
            continue
        atoms, pure, sub = rec_instance(occ.with_unfold(0), d, fresh)
        head = atoms[0]
        assert isinstance(head, PointsTo)
        smap: dict[str, Expr] = {}
        for fe, actual in zip(head.fields, cell.fields):
            if isinstance(fe, Var) and is_fresh_name(fe.name):
                smap[fe.name] = actual
        inst = tuple(
            a.subst(smap).with_unfold(0) if isinstance(a, PredOcc) else a.subst(smap)
            for a in atoms
        )
        rhs = ent.rhs.replace_spatial(j, inst).add_pure(
            subst_atom(p, smap) for p in pure
        )
        prem = replace(ent, rhs=rhs)
        return RuleChoice("RInd", (prem,), (_ident_edge("RInd", ent),))
    return None


def _unfold_choice(
    label: str, ent: Entailment, i: int, occ: PredOcc, reg: Registry, fresh: FreshNames
) -> RuleChoice:
    atoms, pure, _ = rec_instance(occ, reg.pred(occ.pred), fresh)
    lhs = ent.lhs.replace_spatial(i, atoms).add_pure(pure)
    prem = replace(ent, lhs=lhs)
    n, grown = len(ent.lhs.spatial), len(atoms) - 1
    fwd = tuple(
        j if j < i else (i + grown if j == i else j + grown) for j in range(n)
    )
    edge = Edge(label, fwd, progressed=frozenset((i,)))
    return RuleChoice(label, (prem,), (edge,))


def _frame(ent: Entailment, reg: Registry, fresh: FreshNames) -> Optional[RuleChoice]:
    """Left unfold triggered by a right cell rooted at a left occurrence."""
    for j, c2 in ent.rhs.points_tos():
        x = c2.root
        if sum(1 for _, b in ent.rhs.points_tos() if b.root == x) > 1:
            continue
        at = _occ_at(ent.lhs, x)
        if at is None:
            continue
        return _unfold_choice("Frame", ent, at[0], at[1], reg, fresh)
    return None


def _star(ent: Entailment, reg: Registry, fresh: FreshNames) -> Optional[RuleChoice]:
    """Split off the pairs of structurally identical atoms.  The first
    premise proves the matched parts against each other; the second keeps
    everything else, including the whole pure context."""
    m = _match_identical(ent.lhs.spatial, ent.rhs.spatial)
    if not m:
        return None
    if len(m) == len(ent.lhs.spatial) == len(ent.rhs.spatial) and not ent.rhs.pure:
        return None  # identity is an axiom, not a split
    li = sorted(m.values())
    ri = sorted(m)
    k1 = tuple(ent.lhs.spatial[i] for i in li)
    k = tuple(a for i, a in enumerate(ent.lhs.spatial) if i not in set(li))
    k2 = tuple(ent.rhs.spatial[j] for j in ri)
    kp = tuple(b for j, b in enumerate(ent.rhs.spatial) if j not in set(ri))
    pi_fv = SymbolicHeap((), ent.lhs.pure).fv()
    fv_k1 = SymbolicHeap(k1).fv() | pi_fv
    fv_k = SymbolicHeap(k).fv() | pi_fv
    if not SymbolicHeap(k2).fv() <= fv_k1:
        return None
    if not SymbolicHeap(kp, ent.rhs.pure).fv() <= fv_k:
        return None
    p1 = Entailment(SymbolicHeap(k1, ent.lhs.pure), SymbolicHeap(k2), k)
    p2 = Entailment(
        SymbolicHeap(k, ent.lhs.pure), SymbolicHeap(kp, ent.rhs.pure), k1
    )
    n = len(ent.lhs.spatial)
    fwd1: list[Optional[int]] = [None] * n
    for rank, i in enumerate(li):
        fwd1[i] = rank
    fwd2: list[Optional[int]] = [None] * n
    for rank, i in enumerate(j for j in range(n) if j not in set(li)):
        fwd2[i] = rank
    e1 = Edge("Star", tuple(fwd1), peeled=k)
    e2 = Edge("Star", tuple(fwd2), peeled=k1)
    return RuleChoice("Star", (p1, p2), (e1, e2))


def _lind(ent: Entailment, reg: Registry, fresh: FreshNames) -> Optional[RuleChoice]:
    """Unfold the left occurrence standing at the root of a right
    occurrence.  Among several candidates the most-unfolded one is taken,
    keeping the search depth-first along the branch already being traced."""
    cands: list[tuple[int, PredOcc]] = []
    for j, occ in ent.rhs.pred_occs():
        at = _occ_at(ent.lhs, occ.root)
        if at is None:
            continue
        f3 = occ.args[reg.pred(occ.pred).seg_index]
        if not pure_solver.entails(ent.lhs.pure, PtrNeq(occ.root, f3)):
            continue
        i, a = at
        rest = [b for t, b in enumerate(ent.rhs.spatial) if t != j]
        if any(same_atom_mod_unfold(a, b) for b in rest):
            continue
        cands.append((i, a))
    if not cands:
        return None
    i, a = max(cands, key=lambda t: t[1].unfold)
    return _unfold_choice("LInd", ent, i, a, reg, fresh)


def _rhs_exm(ent: Entailment, reg: Registry, fresh: FreshNames) -> Optional[RuleChoice]:
    """Case split on an undecided root/segment pair of a right occurrence;
    the equal branch lets the base case fire, the other one the unfolds."""
    for _, occ in ent.rhs.pred_occs():
        e1, e2 = occ.root, occ.args[reg.pred(occ.pred).seg_index]
        if e1 == e2:
            continue
        if pure_solver.status_of_pair(ent.lhs.pure, e1, e2) != "unknown":
            continue
        eq = replace(ent, lhs=ent.lhs.add_pure([PtrEq(e1, e2)]))
        ne = replace(ent, lhs=ent.lhs.add_pure([PtrNeq(e1, e2)]))
        ident = _ident_edge("ExM", ent)
        return RuleChoice("ExM", (eq, ne), (ident, ident))
    return None


_REDUCTIONS = (_eq_r, _rbase, _hypothesis, _rind, _frame, _star, _lind)


def _norm_choice(ent: Entailment, reg: Registry) -> Optional[RuleChoice]:
    step = normalize_step(ent, reg)
    if step is None:
        return None
    label, premises = step
    n = len(ent.lhs.spatial)
    ident = tuple(range(n))
    if label == "Subst":
        site = subst_site(ent)
        assert site is not None
        edges: tuple[Edge, ...] = (Edge(label, ident, sub=(site[1], site[2])),)
    elif label == "LBase":
        lsite = lbase_site(ent, reg)
        assert lsite is not None
        i, oriented = lsite
        fwd = tuple(
            j if j < i else (None if j == i else j - 1) for j in range(n)
        )
        edges = (Edge(label, fwd, sub=oriented),)
    else:
        edges = tuple(Edge(label, ident) for _ in premises)
    return RuleChoice(label, tuple(premises), edges)


def _choose(ent: Entailment, reg: Registry, fresh: FreshNames) -> Optional[RuleChoice]:
    """Rule selection order: normalization, axioms, reductions, and a final
    case split enabling the right-side base cases."""
    choice = _norm_choice(ent, reg)
    if choice is not None:
        return choice
    choice = _axiom(ent, reg)
    if choice is not None:
        return choice
    for fn in _REDUCTIONS:
        choice = fn(ent, reg, fresh)
        if choice is not None:
            return choice
    return _rhs_exm(ent, reg, fresh)


# ------------------------------------------------------------------ is_closed

IsClosedResult = tuple[
    str, Union[None, tuple[int, str], tuple[int, RuleChoice]]
]


def is_closed(tree: ProofTree, reg: Registry) -> IsClosedResult:
    """Classify the tree: ("valid", None) when no open leaf remains,
    ("invalid", (leaf, case)) when the leftmost open leaf is stuck, and
    ("unknown", (leaf, choice)) with the rule to apply otherwise."""
    leaf = tree.open_leaf()
    if leaf is None:
        return "valid", None
    ent = leaf.ent
    choice = _norm_choice(ent, reg)
    if choice is not None:
        return "unknown", (leaf.id, choice)
    choice = _axiom(ent, reg)
    if choice is not None:
        return "unknown", (leaf.id, choice)
    case = _stuck_case(ent, reg)
    if case is not None:
        return "invalid", (leaf.id, case)
    for fn in _REDUCTIONS:
        choice = fn(ent, reg, tree.fresh)
        if choice is not None:
            return "unknown", (leaf.id, choice)
    choice = _rhs_exm(ent, reg, tree.fresh)
    if choice is not None:
        return "unknown", (leaf.id, choice)
    return "invalid", (leaf.id, "2a")


# ------------------------------------------------------------------ expansion


def _expand(tree: ProofTree, leaf_id: int, choice: RuleChoice) -> list[int]:
    node = tree.node(leaf_id)
    if not choice.premises:
        node.status = "valid"
        node.axiom = choice.label
        return []
    out = []
    for prem, edge in zip(choice.premises, choice.edges):
        extra = prem.rhs.fv() - prem.lhs.fv()
        assert all(is_fresh_name(n) for n in extra), choice.label
        out.append(tree.add(prem, leaf_id, edge).id)
    return out


def apply_rule(
    tree: ProofTree, leaf_id: int, rule: Union[str, RuleChoice], reg: Registry
) -> list[Entailment]:
    """Apply the named rule at an open leaf, growing the tree in place.

    The rule must be the one the selection strategy picks there; anything
    else fails its side conditions by definition of the strategy.
    """
    node = tree.node(leaf_id)
    if node.status != "open" or not node.is_leaf():
        raise SideConditionFailed(f"node {leaf_id} is not an open leaf")
    label = rule.label if isinstance(rule, RuleChoice) else str(rule)
    choice = _choose(node.ent, reg, tree.fresh)
    if choice is None:
        raise SideConditionFailed(f"no rule applies at node {leaf_id}")
    if choice.label != label:
        raise SideConditionFailed(
            f"{label} does not apply at node {leaf_id}; selection is {choice.label}"
        )
    _expand(tree, leaf_id, choice)
    return list(choice.premises)


# ----------------------------------------------------------------- back-links


def _unify_atom(
    a: SpatialAtom, b: SpatialAtom, sigma: dict[str, str]
) -> Optional[dict[str, str]]:
    """Extend sigma so that a maps onto b; only proof-fresh variables of a
    may be renamed, everything else must match exactly."""
    if isinstance(a, PredOcc) != isinstance(b, PredOcc):
        return None
    if isinstance(a, PredOcc) and isinstance(b, PredOcc):
        if a.pred != b.pred:
            return None
        pairs = list(zip(a.args, b.args))
    else:
        assert isinstance(a, PointsTo) and isinstance(b, PointsTo)
        if a.sort != b.sort:
            return None
        pairs = list(zip((a.root, *a.fields), (b.root, *b.fields)))
    out = dict(sigma)
    for ea, eb in pairs:
        if isinstance(ea, Var) and is_fresh_name(ea.name):
            if not isinstance(eb, Var):
                return None
            if out.setdefault(ea.name, eb.name) != eb.name:
                return None
        elif ea != eb:
            return None
    return out


def _spatial_unifiers(
    bud: tuple[SpatialAtom, ...], comp: tuple[SpatialAtom, ...]
) -> Iterator[tuple[dict[str, str], dict[int, int]]]:
    if len(bud) != len(comp):
        return

    def go(
        i: int, used: frozenset[int], sigma: dict[str, str], match: dict[int, int]
    ) -> Iterator[tuple[dict[str, str], dict[int, int]]]:
        if i == len(bud):
            yield sigma, match
            return
        for j in range(len(comp)):
            if j in used:
                continue
            ext = _unify_atom(bud[i], comp[j], sigma)
            if ext is not None:
                yield from go(i + 1, used | {j}, ext, {**match, i: j})

    yield from go(0, frozenset(), {}, {})


def _link_conditions(
    bud: Entailment, comp: Entailment, sigma: dict[str, str]
) -> bool:
    smap: dict[str, Expr] = {n: Var(t) for n, t in sigma.items()}
    img = bud.rhs.subst(smap)
    m = _match_identical(comp.rhs.spatial, img.spatial)
    if len(m) != len(img.spatial) or len(m) != len(comp.rhs.spatial):
        return False
    if frozenset(img.pure) != frozenset(comp.rhs.pure):
        return False
    # weakening: the renamed bud may know more pure facts, never fewer
    have = frozenset(subst_atom(a, smap) for a in bud.lhs.pure)
    return all(a in have for a in comp.lhs.pure)


def link_back(
    tree: ProofTree, leaf_id: int, reg: Registry
) -> Optional[tuple[int, dict[str, str], dict[int, int]]]:
    """Find the nearest strict ancestor the leaf folds onto: same shape up
    to a renaming of proof-fresh variables and discarded pure conjuncts,
    with at least one matched occurrence unfolded strictly more often."""
    ent = tree.node(leaf_id).ent
    if not any(a.unfold > 0 for _, a in ent.lhs.pred_occs()):
        return None
    for anc in tree.ancestors(leaf_id):
        for sigma, match in _spatial_unifiers(
            ent.lhs.spatial, anc.ent.lhs.spatial
        ):
            if not _link_conditions(ent, anc.ent, sigma):
                continue
            progress = any(
                isinstance(a, PredOcc)
                and isinstance(b, PredOcc)
                and a.unfold > b.unfold
                for a, b in (
                    (ent.lhs.spatial[i], anc.ent.lhs.spatial[j])
                    for i, j in match.items()
                )
            )
            if progress:
                return anc.id, sigma, match
    return None


# ------------------------------------------------------------ cycle soundness


def _trace_ok(tree: ProofTree, bud: ProofNode, start: int, goal: int) -> bool:
    """Follow one occurrence from the companion down to the bud; the walk
    must survive every step, land on the matched bud atom, and pass at
    least one incrementing unfold."""
    assert bud.companion is not None
    j: Optional[int] = start
    progressed = False
    for node in tree.path_down(bud.companion, bud.id):
        edge = node.edge
        assert edge is not None
        if j is None or j >= len(edge.fwd):
            return False
        if j in edge.progressed:
            progressed = True
        j = edge.fwd[j]
    return j == goal and progressed


def check_cyclic_soundness(tree: ProofTree, reg: Registry) -> list[str]:
    """Re-verify every back-link from scratch; an empty report means the
    pre-proof is a sound cyclic proof.  Nothing is trusted from the search:
    ancestry, the renaming, the pure weakening, and the existence of a
    progressing trace along the cycle are all established again."""
    problems = []
    for nid in sorted(tree.nodes):
        bud = tree.nodes[nid]
        if bud.status != "bud":
            continue

        def bad(msg: str) -> None:
            problems.append(f"bud {bud.id}: {msg}")

        if bud.companion is None or bud.sigma is None or bud.match is None:
            bad("missing companion, renaming, or atom map")
            continue
        if bud.companion not in {a.id for a in tree.ancestors(bud.id)}:
            bad(f"companion {bud.companion} is not a strict ancestor")
            continue
        comp = tree.node(bud.companion)
        if not all(is_fresh_name(n) for n in bud.sigma):
            bad("renaming touches an input variable")
            continue
        smap: dict[str, Expr] = {n: Var(t) for n, t in bud.sigma.items()}
        bl, cl = bud.ent.lhs.spatial, comp.ent.lhs.spatial
        if sorted(bud.match) != list(range(len(bl))) or sorted(
            bud.match.values()
        ) != list(range(len(cl))):
            bad("atom map is not a bijection")
            continue
        if not all(
            same_atom_mod_unfold(bl[i].subst(smap), cl[j])
            for i, j in bud.match.items()
        ):
            bad("left spatial parts differ under the renaming")
            continue
        if not _link_conditions(bud.ent, comp.ent, bud.sigma):
            bad("right side or pure weakening condition fails")
            continue
        prog = [
            i
            for i, j in sorted(bud.match.items())
            if isinstance(bl[i], PredOcc)
            and isinstance(cl[j], PredOcc)
            and bl[i].unfold > cl[j].unfold
        ]
        if not prog:
            bad("no occurrence is unfolded strictly more than its image")
            continue
        if not any(_trace_ok(tree, bud, bud.match[i], i) for i in prog):
            bad("no progressing trace follows the cycle")
    return problems


# ------------------------------------------------------- countermodel lifting


def _fresh_values(
    needed: list[tuple[str, str]], model: HeapModel
) -> tuple[dict[str, int], set[str]]:
    """Distinct values for variables absent from the stack: new locations
    for pointers, large pairwise-distinct integers for data."""
    stack = dict(model.stack)
    ptrs = set(model.ptr_vars)
    loc = max((0, *model.heap, *(stack[n] for n in ptrs if n in stack))) + 1
    big = 1000003
    for name, kind in needed:
        if name in stack:
            continue
        if kind == "ptr":
            stack[name] = loc
            ptrs.add(name)
            loc += 1
        else:
            stack[name] = big
            big += 1
    return stack, ptrs


def _add_peeled(
    model: HeapModel, peeled: tuple[SpatialAtom, ...], reg: Registry
) -> Optional[HeapModel]:
    """Extend the model with a minimal subheap for the atoms Star split
    off, so it satisfies the conclusion again.  Roots acquire fresh
    locations, so the added cells collide with nothing that matters."""
    cells = base_of(SymbolicHeap(peeled), reg).spatial
    needed: list[tuple[str, str]] = []
    for atom in cells:
        assert isinstance(atom, PointsTo)
        decl = reg.sort_of(atom.sort)
        if isinstance(atom.root, Var):
            needed.append((atom.root.name, "ptr"))
        for (_, ft), f in zip(decl.fields, atom.fields):
            if isinstance(f, Var):
                needed.append((f.name, "int" if ft == "int" else "ptr"))
    stack, ptrs = _fresh_values(needed, model)

    def val(e: Expr) -> int:
        if isinstance(e, Null):
            return 0
        if isinstance(e, IntLit):
            return e.value
        return stack[e.name]

    heap = dict(model.heap)
    for atom in cells:
        assert isinstance(atom, PointsTo)
        loc = val(atom.root)
        if loc == 0 or loc in heap:
            return None
        heap[loc] = Cell(atom.sort, tuple(val(f) for f in atom.fields))
    return HeapModel(stack, heap, frozenset(ptrs))


def _lift_counter(
    tree: ProofTree, leaf_id: int, model: HeapModel, reg: Registry
) -> Optional[HeapModel]:
    """Rebuild a countermodel of the root from one of a stuck leaf by
    replaying the branch upwards, then confirm it by evaluation."""
    m: Optional[HeapModel] = model
    cur = tree.node(leaf_id)
    while cur.parent is not None and m is not None:
        edge = cur.edge
        assert edge is not None
        if edge.sub is not None:
            name, repl = edge.sub
            if isinstance(repl, Null):
                v, is_ptr = 0, True
            elif isinstance(repl, IntLit):
                v, is_ptr = repl.value, False
            elif repl.name in m.stack:
                v, is_ptr = m.stack[repl.name], repl.name in m.ptr_vars
            else:
                return None
            stack = dict(m.stack)
            stack[name] = v
            ptrs = set(m.ptr_vars) | ({name} if is_ptr else set())
            m = HeapModel(stack, m.heap, frozenset(ptrs))
        if edge.peeled:
            m = _add_peeled(m, edge.peeled, reg)
        cur = tree.node(cur.parent)
    if m is None:
        return None
    root = tree.node(tree.root).ent
    names = root.fv()
    m = HeapModel(
        {n: v for n, v in m.stack.items() if n in names},
        m.heap,
        frozenset(n for n in m.ptr_vars if n in names),
    )
    if holds(m, root.lhs, reg) and not holds(m, root.rhs, reg):
        return m
    return None


def _leaf_witness(
    tree: ProofTree, leaf_id: int, reg: Registry
) -> Optional[HeapModel]:
    ent = tree.node(leaf_id).ent
    try:
        bad = bad_model(base_of(ent.lhs, reg), reg)
    except ValueError:
        return None
    if holds(bad, ent.rhs, reg):
        return None  # leaf shape promised refutation but the model agrees
    return _lift_counter(tree, leaf_id, bad, reg)


# ----------------------------------------------------------------- the prover


def _reset_unfolds(heap: SymbolicHeap) -> SymbolicHeap:
    spatial = tuple(
        a.with_unfold(0) if isinstance(a, PredOcc) else a for a in heap.spatial
    )
    return SymbolicHeap(spatial, heap.pure)


def _validate_input(ent: Entailment, reg: Registry) -> None:
    problems = check_wellformed(reg)
    if problems:
        raise UnsupportedFragment("; ".join(problems))
    marked = sorted(n for n in ent.fv() if is_fresh_name(n))
    if marked:
        raise UnsupportedFragment(
            f"reserved variable names in input: {', '.join(marked)}"
        )
    extra = sorted(ent.rhs.fv() - ent.lhs.fv())
    if extra:
        raise UnsupportedFragment(
            f"conclusion variables missing from the premise: {', '.join(extra)}"
        )
    for heap in (ent.lhs, ent.rhs):
        for _, occ in heap.pred_occs():
            d = reg.pred(occ.pred)  # raises KeyError on unknown predicates
            if len(occ.args) != len(d.params):
                raise UnsupportedFragment(
                    f"{occ.pred} expects {len(d.params)} arguments"
                )


def prove(
    ent: Entailment, reg: Registry, node_budget: int = DEFAULT_NODE_BUDGET
) -> Verdict:
    """Decide the entailment by cyclic proof search.

    Returns Valid with a closed proof tree whose back-links pass the
    soundness re-check, or Invalid with the stuck node, its case tag, and a
    confirmed countermodel when the stuck shape yields one.
    """
    _validate_input(ent, reg)
    root = Entailment(_reset_unfolds(ent.lhs), _reset_unfolds(ent.rhs))
    tree = ProofTree.new(root)
    while True:
        status, data = is_closed(tree, reg)
        if status == "valid":
            report = check_cyclic_soundness(tree, reg)
            assert not report, report
            return Verdict(True, tree)
        if status == "invalid":
            assert data is not None
            leaf_id, case = data
            assert isinstance(case, str)
            node = tree.node(leaf_id)
            node.status = "invalid"
            node.case = case
            witness = None
            if case in ("2b", "2c", "2d"):
                witness = _leaf_witness(tree, leaf_id, reg)
            node.counter = witness
            return Verdict(False, tree, node=leaf_id, case=case, counter=witness)
        assert data is not None
        leaf_id, choice = data
        assert isinstance(choice, RuleChoice)
        linked = link_back(tree, leaf_id, reg)
        if linked is not None:
            cid, sigma, match = linked
            node = tree.node(leaf_id)
            node.status = "bud"
            node.companion = cid
            node.sigma = sigma
            node.match = match
            continue
        _expand(tree, leaf_id, choice)
        if len(tree.nodes) > node_budget:
            raise ResourceLimit(
                f"proof search exceeded the {node_budget}-node budget"
            )
