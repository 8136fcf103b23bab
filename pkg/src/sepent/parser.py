r"""Native problem format.

A problem file declares record sorts, inductive definitions in the
compositional template shape, exactly one entailment query, and an
optional expected status:

    data c4 { c4 next; int val; }

    pred lls(root r, seg F, src mi, tgt ma) :=
         emp /\ r=F /\ mi=ma
      \/ exists X, m1. r->c4(X, m1) * lls(X, F, m1, ma) /\ r!=F /\ mi<=m1;

    check lls(x, null, mi, ma) /\ x!=null |- llb(x, null, mi)
    expect valid

Comments run from // to end of line.  Every name must be declared before
use; a definition body must consist of the base branch followed by one
recursive branch.  Pointer and integer uses are kept disjoint: variable
kinds are inferred from field sorts, parameter roles, and literals, and
any mixed use is reported with its position.  Disequality is pointer-only.
Cells may list fields positionally, r->c4(X, m1), or by name,
r->c4{val: m1, next: X}; named input is normalized to declaration order.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable, Optional

from .defs import (
    InductiveDef,
    Param,
    RecBranch,
    Registry,
    Role,
    SortDecl,
    check_wellformed,
)
from .syntax import (
    NULL,
    ArithEq,
    ArithLeq,
    Entailment,
    Expr,
    IntLit,
    Null,
    PointsTo,
    PredOcc,
    PtrEq,
    PtrNeq,
    PureAtom,
    SpatialAtom,
    SymbolicHeap,
    Var,
)

RESERVED = frozenset({"data", "pred", "check", "expect", "exists", "emp", "null"})
ROLE_WORDS = {r.value: r for r in Role}


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {msg}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class ProblemFile:
    registry: Registry
    query: Entailment
    expect: Optional[str] = None  # "valid" | "invalid"


# ------------------------------------------------------------------- lexing


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "punct" | "eof"
    text: str
    line: int
    col: int


_PUNCT = (":=", "|-", "->", "/\\", "\\/", "!=", "<=", ">=",
          "=", "(", ")", "{", "}", ",", ";", ".", "*", ":")


def _lex(text: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1

    def err(msg: str) -> ParseError:
        return ParseError(msg, line, col)

    while i < len(text):
        c = text[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c in " \t\r":
            i, col = i + 1, col + 1
            continue
        if text.startswith("//", i):
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            while j < len(text) and text[j] == "'":
                j += 1
            toks.append(Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isdigit() or (c == "-" and i + 1 < len(text) and text[i + 1].isdigit()):
            j = i + 1
            while j < len(text) and text[j].isdigit():
                j += 1
            toks.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(Token("punct", p, line, col))
                col += len(p)
                i += len(p)
                break
        else:
            raise err(f"unexpected character {c!r}")
    toks.append(Token("eof", "", line, col))
    return toks


# ------------------------------------------------------------ raw formulas

# Pure atoms are read uncommitted first; pointer-vs-integer classification
# happens once every kind constraint of the enclosing scope is known.


@dataclass(frozen=True)
class RawPure:
    op: str  # "=" | "!=" | "<=" | ">="
    lhs: Expr
    rhs: Expr
    line: int
    col: int


class Kinds:
    """Variable kind table with conflict positions."""

    def __init__(self) -> None:
        self.kind: dict[str, str] = {}

    def set(self, name: str, kind: str, line: int, col: int) -> None:
        old = self.kind.setdefault(name, kind)
        if old != kind:
            raise ParseError(
                f"mixed pointer/integer use of '{name}'", line, col
            )

    def expr(self, e: Expr, kind: str, line: int, col: int) -> None:
        if isinstance(e, Var):
            self.set(e.name, kind, line, col)
        elif isinstance(e, Null) and kind != "ptr":
            raise ParseError("null used as an integer", line, col)
        elif isinstance(e, IntLit) and kind != "int":
            raise ParseError("integer literal used as a pointer", line, col)

    def of(self, e: Expr) -> Optional[str]:
        if isinstance(e, Null):
            return "ptr"
        if isinstance(e, IntLit):
            return "int"
        return self.kind.get(e.name)


def _constrain_spatial(
    atoms: list[tuple[SpatialAtom, int, int]], kinds: Kinds, reg: Registry
) -> None:
    for a, line, col in atoms:
        if isinstance(a, PointsTo):
            kinds.expr(a.root, "ptr", line, col)
            decl = reg.sorts[a.sort]
            for (_, ft), f in zip(decl.fields, a.fields):
                kinds.expr(f, "int" if ft == "int" else "ptr", line, col)
        else:
            d = reg.preds[a.pred]
            for p, f in zip(d.params, a.args):
                kinds.expr(f, p.kind, line, col)


def _classify_pures(raw: list[RawPure], kinds: Kinds) -> list[PureAtom]:
    for r in raw:
        if r.op in ("<=", ">="):
            kinds.expr(r.lhs, "int", r.line, r.col)
            kinds.expr(r.rhs, "int", r.line, r.col)
        elif r.op == "!=":
            kinds.expr(r.lhs, "ptr", r.line, r.col)
            kinds.expr(r.rhs, "ptr", r.line, r.col)
    # equalities relate kinds across their operands; propagate to fixpoint
    changed = True
    while changed:
        changed = False
        for r in raw:
            if r.op != "=":
                continue
            kl, kr = kinds.of(r.lhs), kinds.of(r.rhs)
            if kl is not None and kr is None:
                kinds.expr(r.rhs, kl, r.line, r.col)
                changed = True
            elif kr is not None and kl is None:
                kinds.expr(r.lhs, kr, r.line, r.col)
                changed = True
            elif kl is not None and kr is not None and kl != kr:
                raise ParseError(
                    "equality mixes pointer and integer operands", r.line, r.col
                )
    out: list[PureAtom] = []
    for r in raw:
        if r.op == "<=":
            out.append(ArithLeq(r.lhs, r.rhs))
        elif r.op == ">=":
            out.append(ArithLeq(r.rhs, r.lhs))
        elif r.op == "!=":
            out.append(PtrNeq(r.lhs, r.rhs))
        else:
            kl = kinds.of(r.lhs) or kinds.of(r.rhs) or "ptr"
            kinds.expr(r.lhs, kl, r.line, r.col)
            kinds.expr(r.rhs, kl, r.line, r.col)
            out.append(PtrEq(r.lhs, r.rhs) if kl == "ptr" else ArithEq(r.lhs, r.rhs))
    return out


# --------------------------------------------------- template decomposition


def assemble_base(
    name: str,
    params: tuple[Param, ...],
    satoms: list[SpatialAtom],
    pures: list[PureAtom],
    err: Callable[[str], Exception],
) -> None:
    r"""Check the base branch is exactly emp /\ root=seg [/\ src=tgt]."""
    if satoms:
        raise err(f"{name}: base branch must be spatially empty")
    d = InductiveDef(name, params, None)  # role lookups only
    root = Var(params[d.root_index].name)
    seg = Var(params[d.seg_index].name)
    want: list[PureAtom] = [PtrEq(root, seg)]
    si, ti = d.index_of_role(Role.SRC), d.index_of_role(Role.TGT)
    if si is not None:
        assert ti is not None
        want.append(ArithEq(Var(params[si].name), Var(params[ti].name)))
    if Counter(pures) != Counter(want):
        raise err(
            f"{name}: base branch must be emp /\\ "
            + " /\\ ".join(map(str, want))
        )


def assemble_rec(
    name: str,
    params: tuple[Param, ...],
    exists: tuple[str, ...],
    satoms: list[SpatialAtom],
    pures: list[PureAtom],
    err: Callable[[str], Exception],
) -> RecBranch:
    """Split a recursive branch body into head cell, matrix, designated
    recursive occurrence, guard, order atom, and arithmetic side."""
    d = InductiveDef(name, params, None)
    root = Var(params[d.root_index].name)
    seg = Var(params[d.seg_index].name)

    cells = [a for a in satoms if isinstance(a, PointsTo)]
    if len(cells) != 1 or cells[0].root != root:
        raise err(f"{name}: recursive branch needs one cell at the root")
    head = cells[0]
    occs = [a for a in satoms if isinstance(a, PredOcc)]
    self_occs = [a for a in occs if a.pred == name]
    if not self_occs:
        raise err(f"{name}: recursive branch must continue {name}")
    rec = self_occs[-1]  # earlier self occurrences belong to the matrix
    matrix = tuple(a for a in occs if a is not rec)

    guard = PtrNeq(root, seg)
    if guard not in pures:
        raise err(f"{name}: recursive branch must require {root}!={seg}")
    rest = [a for a in pures if a != guard]

    order: Optional[PureAtom] = None
    si = d.index_of_role(Role.SRC)
    if si is not None:
        src = Var(params[si].name)
        inner = rec.args[si]
        hits = [
            a
            for a in rest
            if isinstance(a, (ArithEq, ArithLeq))
            and {a.lhs, a.rhs} == {src, inner}
        ]
        if len(hits) != 1:
            raise err(f"{name}: need one order atom relating {src} and {inner}")
        order = hits[0]
        rest.remove(order)
    for a in rest:
        if not isinstance(a, (ArithEq, ArithLeq)):
            raise err(f"{name}: unexpected pointer atom {a} in recursive branch")
    return RecBranch(exists, head, matrix, rec, order, tuple(rest))


# ------------------------------------------------------------------ parser


class _Parser:
    def __init__(self, text: str):
        self.toks = _lex(text)
        self.pos = 0

    # token plumbing

    def peek(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind != "eof"

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.text != text or t.kind == "eof":
            raise self.err(f"expected {text!r}, found {t.text!r}" if t.kind != "eof"
                           else f"expected {text!r}, found end of input")
        return self.next()

    def ident(self, what: str) -> Token:
        t = self.peek()
        if t.kind != "ident":
            raise self.err(f"expected {what}, found {t.text!r}")
        if t.text in RESERVED:
            raise self.err(f"{t.text!r} is a reserved word")
        return self.next()

    def err(self, msg: str) -> ParseError:
        t = self.peek()
        return ParseError(msg, t.line, t.col)

    # file structure

    def file(self) -> ProblemFile:
        reg = Registry(sorts={}, preds={})
        pred_pos: dict[str, Token] = {}
        query: Optional[Entailment] = None
        expect: Optional[str] = None
        while self.peek().kind != "eof":
            t = self.peek()
            if t.text == "data":
                self.sort_decl(reg)
            elif t.text == "pred":
                pred_pos[self.pred_def(reg)] = t
            elif t.text == "check":
                if query is not None:
                    raise self.err("a file holds exactly one check query")
                self.next()
                query = self.query(reg)
            elif t.text == "expect":
                self.next()
                w = self.next()
                if w.text not in ("valid", "invalid"):
                    raise ParseError(
                        "expect takes 'valid' or 'invalid'", w.line, w.col
                    )
                expect = w.text
            else:
                raise self.err(
                    f"expected 'data', 'pred', 'check' or 'expect', found {t.text!r}"
                )
        if query is None:
            t = self.peek()
            raise ParseError("missing check query", t.line, t.col)
        for problem in check_wellformed(reg):
            pname = problem.split(":", 1)[0]
            at = pred_pos.get(pname, self.peek())
            raise ParseError(problem, at.line, at.col)
        return ProblemFile(reg, query, expect)

    def sort_decl(self, reg: Registry) -> None:
        self.expect("data")
        name = self.ident("sort name")
        if name.text in reg.sorts:
            raise ParseError(f"sort {name.text} redeclared", name.line, name.col)
        self.expect("{")
        fields: list[tuple[str, str]] = []
        while not self.accept("}"):
            target = self.peek()
            if target.text == "int":
                self.next()
            else:
                target = self.ident("field sort")
                if target.text not in reg.sorts and target.text != name.text:
                    raise ParseError(
                        f"unknown sort {target.text!r}", target.line, target.col
                    )
            fname = self.ident("field name")
            if any(fname.text == n for n, _ in fields):
                raise ParseError(
                    f"duplicate field {fname.text!r}", fname.line, fname.col
                )
            fields.append((fname.text, target.text))
            self.expect(";")
        reg.sorts[name.text] = SortDecl(name.text, tuple(fields))

    def pred_def(self, reg: Registry) -> str:
        self.expect("pred")
        name = self.ident("predicate name")
        if name.text in reg.preds:
            raise ParseError(
                f"predicate {name.text} redeclared", name.line, name.col
            )
        self.expect("(")
        raw_params: list[tuple[Role, Token]] = []
        while True:
            role_tok = self.next()
            role = ROLE_WORDS.get(role_tok.text)
            if role is None:
                raise ParseError(
                    f"expected a role keyword, found {role_tok.text!r}",
                    role_tok.line,
                    role_tok.col,
                )
            raw_params.append((role, self.ident("parameter name")))
            if not self.accept(","):
                break
        self.expect(")")
        self.expect(":=")

        branches = [self.branch(reg)]
        while self.accept("\\/"):
            branches.append(self.branch(reg))
        semi = self.expect(";")
        if len(branches) != 2:
            raise ParseError(
                f"{name.text}: need the base branch and one recursive branch",
                semi.line,
                semi.col,
            )

        def fail(msg: str) -> Exception:
            return ParseError(msg, name.line, name.col)

        roles = [r for r, _ in raw_params]
        if roles.count(Role.ROOT) != 1 or roles.count(Role.SEG) != 1:
            raise fail(f"{name.text}: needs exactly one root and one seg parameter")
        if roles.count(Role.SRC) != roles.count(Role.TGT) or roles.count(Role.SRC) > 1:
            raise fail(f"{name.text}: src/tgt must appear as a pair, at most once")

        params = self.infer_params(name, raw_params, branches, reg)
        # the registry entry must exist while classifying self-occurrences,
        # so install a stub carrying the params first

        reg.preds[name.text] = InductiveDef(name.text, params, None)
        try:
            (b_ex, b_sp, b_raw), (r_ex, r_sp, r_raw) = branches
            if b_ex:
                raise fail(f"{name.text}: base branch takes no existentials")
            kinds = self.seed_kinds(params)
            _constrain_spatial(b_sp + r_sp, kinds, reg)
            base_pure = _classify_pures(b_raw, kinds)
            rec_pure = _classify_pures(r_raw, kinds)
            assemble_base(
                name.text, params, [a for a, _, _ in b_sp], base_pure, fail
            )
            rec = assemble_rec(
                name.text,
                params,
                r_ex,
                [a for a, _, _ in r_sp],
                rec_pure,
                fail,
            )
        except Exception:
            del reg.preds[name.text]
            raise
        reg.preds[name.text] = InductiveDef(name.text, params, rec)
        return name.text

    def seed_kinds(self, params: tuple[Param, ...]) -> Kinds:
        kinds = Kinds()
        for p in params:
            kinds.kind[p.name] = p.kind
        return kinds

    def infer_params(
        self,
        name: Token,
        raw_params: list[tuple[Role, Token]],
        branches: list,
        reg: Registry,
    ) -> tuple[Param, ...]:
        """Fix parameter kinds: roles force root/seg/src/tgt; border and
        trans parameters take their kind from use in the branch bodies."""
        kinds = Kinds()
        for role, tok in raw_params:
            if role in (Role.ROOT, Role.SEG):
                kinds.set(tok.text, "ptr", tok.line, tok.col)
            elif role in (Role.SRC, Role.TGT):
                kinds.set(tok.text, "int", tok.line, tok.col)
        for _, satoms, raw in branches:
            for a, line, col in satoms:
                if isinstance(a, PointsTo):
                    if a.sort not in reg.sorts:
                        raise ParseError(f"unknown sort {a.sort!r}", line, col)
                    decl = reg.sorts[a.sort]
                    if len(a.fields) != len(decl.fields):
                        raise ParseError(
                            f"{a.sort} has {len(decl.fields)} fields", line, col
                        )
                    kinds.expr(a.root, "ptr", line, col)
                    for (_, ft), f in zip(decl.fields, a.fields):
                        kinds.expr(f, "int" if ft == "int" else "ptr", line, col)
                elif a.pred != name.text:
                    if a.pred not in reg.preds:
                        raise ParseError(
                            f"unknown predicate {a.pred!r}", line, col
                        )
                    d = reg.preds[a.pred]
                    if len(a.args) != len(d.params):
                        raise ParseError(
                            f"{a.pred} expects {len(d.params)} arguments",
                            line,
                            col,
                        )
                    for p, f in zip(d.params, a.args):
                        kinds.expr(f, p.kind, line, col)
                else:
                    if len(a.args) != len(raw_params):
                        raise ParseError(
                            f"{name.text} expects {len(raw_params)} arguments",
                            line,
                            col,
                        )
            for r in raw:
                if r.op in ("<=", ">="):
                    kinds.expr(r.lhs, "int", r.line, r.col)
                    kinds.expr(r.rhs, "int", r.line, r.col)
                elif r.op == "!=":
                    kinds.expr(r.lhs, "ptr", r.line, r.col)
                    kinds.expr(r.rhs, "ptr", r.line, r.col)
        return tuple(
            Param(tok.text, role, kinds.kind.get(tok.text, "ptr"))
            for role, tok in raw_params
        )

    # formulas

    def branch(self, reg: Registry):
        exists: tuple[str, ...] = ()
        if self.accept("exists"):
            names = [self.ident("existential name").text]
            while self.accept(","):
                names.append(self.ident("existential name").text)
            self.expect(".")
            exists = tuple(names)
        satoms, raw = self.heap_body()
        self.resolve_cells(satoms, reg)
        return exists, satoms, raw

    def heap_body(self):
        r"""spatial part, then /\-separated pure atoms.  Spatial atoms carry
        their positions for kind diagnostics."""
        satoms: list[tuple[SpatialAtom, int, int]] = []
        if not self.accept("emp"):
            satoms.append(self.spatial_atom())
            while self.accept("*"):
                satoms.append(self.spatial_atom())
        raw: list[RawPure] = []
        while self.accept("/\\"):
            raw.append(self.pure_atom())
        return satoms, raw

    def spatial_atom(self) -> tuple[SpatialAtom, int, int]:
        t = self.peek()
        root = self.term()
        if self.accept("->"):
            sort = self.ident("sort name")
            fields = self.cell_fields(sort)
            if not isinstance(root, (Var, Null)):
                raise ParseError("cell root must be a pointer", t.line, t.col)
            return PointsTo(root, sort.text, fields), t.line, t.col
        if self.at("("):
            if not isinstance(root, Var):
                raise ParseError("predicate name expected", t.line, t.col)
            self.expect("(")
            args = [self.term()]
            while self.accept(","):
                args.append(self.term())
            self.expect(")")
            return PredOcc(root.name, tuple(args)), t.line, t.col
        raise ParseError(
            "expected a cell, a predicate occurrence, or emp", t.line, t.col
        )

    def cell_fields(self, sort: Token) -> tuple[Expr, ...]:
        if self.accept("("):
            fields = [self.term()]
            while self.accept(","):
                fields.append(self.term())
            self.expect(")")
            return tuple(fields)
        self.expect("{")
        named: dict[str, Expr] = {}
        order: list[Token] = []
        while True:
            f = self.ident("field name")
            self.expect(":")
            if f.text in named:
                raise ParseError(
                    f"duplicate field {f.text!r}", f.line, f.col
                )
            named[f.text] = self.term()
            order.append(f)
            if not self.accept(","):
                break
        self.expect("}")
        return named, order  # resolved against the declaration by the caller

    def pure_atom(self) -> RawPure:
        t = self.peek()
        lhs = self.term()
        op = self.peek()
        if op.text not in ("=", "!=", "<=", ">="):
            raise self.err(f"expected a comparison, found {op.text!r}")
        self.next()
        return RawPure(op.text, lhs, self.term(), t.line, t.col)

    def term(self) -> Expr:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return IntLit(int(t.text))
        if t.text == "null":
            self.next()
            return NULL
        name = self.ident("a term")
        return Var(name.text)

    # the query

    def query(self, reg: Registry) -> Entailment:
        lt = self.peek()
        l_satoms, l_raw = self.heap_body()
        self.expect("|-")
        r_satoms, r_raw = self.heap_body()
        for satoms in (l_satoms, r_satoms):
            self.resolve_cells(satoms, reg)
            for a, line, col in satoms:
                if isinstance(a, PredOcc):
                    if a.pred not in reg.preds:
                        raise ParseError(
                            f"unknown predicate {a.pred!r}", line, col
                        )
                    if len(a.args) != len(reg.preds[a.pred].params):
                        raise ParseError(
                            f"{a.pred} expects "
                            f"{len(reg.preds[a.pred].params)} arguments",
                            line,
                            col,
                        )
        kinds = Kinds()
        _constrain_spatial(l_satoms + r_satoms, kinds, reg)
        pure = _classify_pures(l_raw + r_raw, kinds)
        lhs = SymbolicHeap(
            tuple(a for a, _, _ in l_satoms), tuple(pure[: len(l_raw)])
        )
        rhs = SymbolicHeap(
            tuple(a for a, _, _ in r_satoms), tuple(pure[len(l_raw):])
        )
        extra = sorted(rhs.fv() - lhs.fv())
        if extra:
            raise ParseError(
                "conclusion variables missing from the premise: "
                + ", ".join(extra),
                lt.line,
                lt.col,
            )
        return Entailment(lhs, rhs)

    def resolve_cells(self, satoms: list, reg: Registry) -> None:
        """Materialize named-field cells into declaration order."""
        for i, (a, line, col) in enumerate(satoms):
            if not isinstance(a, PointsTo):
                continue
            if a.sort not in reg.sorts:
                raise ParseError(f"unknown sort {a.sort!r}", line, col)
            decl = reg.sorts[a.sort]
            fields = a.fields
            if isinstance(fields, tuple) and fields and isinstance(
                fields[0], dict
            ):
                named, order = fields
                unknown = [f for f in order if f.text not in dict(decl.fields)]
                if unknown:
                    raise ParseError(
                        f"{a.sort} has no field {unknown[0].text!r}",
                        unknown[0].line,
                        unknown[0].col,
                    )
                if len(named) != len(decl.fields):
                    raise ParseError(
                        f"{a.sort} needs all of: "
                        + ", ".join(n for n, _ in decl.fields),
                        line,
                        col,
                    )
                fields = tuple(named[n] for n, _ in decl.fields)
            elif len(fields) != len(decl.fields):
                raise ParseError(
                    f"{a.sort} has {len(decl.fields)} fields", line, col
                )
            satoms[i] = (PointsTo(a.root, a.sort, fields), line, col)


def parse_native(text: str) -> ProblemFile:
    return _Parser(text).file()


# ---------------------------------------------------------- pretty printing


def _branch_text(d: InductiveDef) -> str:
    root = Var(d.params[d.root_index].name)
    seg = Var(d.params[d.seg_index].name)
    base = [f"{root}={seg}"]
    si, ti = d.index_of_role(Role.SRC), d.index_of_role(Role.TGT)
    if si is not None:
        base.append(f"{d.params[si].name}={d.params[ti].name}")
    rb = d.rec
    spatial = " * ".join(str(a) for a in (rb.head, *rb.matrix, rb.rec))
    pure = [f"{root}!={seg}"]
    if rb.order is not None:
        pure.append(str(rb.order))
    pure.extend(str(a) for a in rb.arith)
    ex = f"exists {', '.join(rb.exists)}. " if rb.exists else ""
    return (
        "     emp /\\ " + " /\\ ".join(base)
        + "\n  \\/ " + ex + spatial + " /\\ " + " /\\ ".join(pure) + ";"
    )


def problem_text(pf: ProblemFile) -> str:
    """Render a problem back to native syntax; parsing the result yields an
    equal ProblemFile."""
    out: list[str] = []
    for s in pf.registry.sorts.values():
        fields = " ".join(f"{t} {n};" for n, t in s.fields)
        out.append(f"data {s.name} {{ {fields} }}")
    out.append("")
    for d in pf.registry.preds.values():
        params = ", ".join(f"{p.role.value} {p.name}" for p in d.params)
        out.append(f"pred {d.name}({params}) :=")
        out.append(_branch_text(d))
        out.append("")
    out.append(
        f"check {pf.query.lhs.pretty(False)} |- {pf.query.rhs.pretty(False)}"
    )
    if pf.expect is not None:
        out.append(f"expect {pf.expect}")
    return "\n".join(out) + "\n"
