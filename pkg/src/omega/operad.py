"""Globular operads presented by their fibre over the terminal globular set.

An operad is stored as a finite globular set ``total`` of operations, a
map ``over`` sending each ``n``-operation to a tree of height at most ``n``
(a cell of the tree classifier), unit operations over the linear trees and
a composition table.  A composition key is ``(a, labels)`` where ``labels``
is a globular map ``over(a) -> total`` listed in the canonical cell order of
``over(a)``.  Everything is truncated in dimension and in tree size.
"""
from __future__ import annotations

from collections import defaultdict
from collections.abc import Mapping
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Iterator, Sequence

from .freecat import FreeCell, TreeOfTrees, face, graft, multiply, unit as free_unit
from .globset import Cell, GlobularSet, OmegaError, Report, hom_enumerate, labellings, validate
from .tree import Tree, enumerate_trees, face_tree, linear_tree, planar_json, tree


class IncompleteFibersError(OmegaError):
    pass


# -- collections ------------------------------------------------------------------

@lru_cache(maxsize=None)
def classifier_id(n: int, t: Tree) -> str:
    return f"{n}:{planar_json(t.planar)}"


def tree_classifier(d: int, tree_bound: int) -> GlobularSet:
    """Cells of the free omega-category on a point: ``n``-cells are trees of height <= ``n``."""
    cells = []
    for n in range(d + 1):
        for t in enumerate_trees(tree_bound, max_height=n):
            if n == 0:
                cells.append(Cell(classifier_id(0, t), 0))
            else:
                low = face_tree(t, n)[0]
                cells.append(Cell(classifier_id(n, t), n, classifier_id(n - 1, low), classifier_id(n - 1, low)))
    return GlobularSet(cells)


@dataclass
class Collection:
    total: GlobularSet
    over: dict[str, Tree]
    trunc_dim: int
    tree_bound: int

    def fibre(self, n: int, t: Tree) -> list[str]:
        return [a for a in self.total.cells_of_dim(n) if self.over[a] == t]


@dataclass
class OperadData:
    coll: Collection
    unit: dict[int, str]
    mult: Mapping
    complete_fibers: bool = True
    lifts: Mapping | None = None
    name: str = ""

    @property
    def total(self) -> GlobularSet:
        return self.coll.total

    def over(self, a: str) -> Tree:
        return self.coll.over[a]

    def dim(self, a: str) -> int:
        return self.total.dim(a)

    def compose(self, a: str, labels: Sequence[str]) -> str | None:
        """Composite of ``a`` with ``labels``, or ``None`` outside the truncation."""
        try:
            return self.mult[(a, tuple(labels))]
        except KeyError:
            return None

    def unit_labels(self, a: str) -> tuple[str, ...]:
        """The labelling of ``over(a)`` by unit operations."""
        t = self.over(a)
        return tuple(self.unit[c.dim] for c in t.underlying.cells)

    def globe_labels(self, a: str) -> tuple[str, ...]:
        """The labelling of the ``n``-globe by ``a`` and its iterated faces."""
        return free_unit(self.total, a).label

    def composable_pairs(self) -> Iterator[tuple[str, tuple[str, ...]]]:
        for a in self.total.ids:
            for f in hom_enumerate(self.over(a).underlying, self.total):
                yield a, f.key()


def _check_labels(o: OperadData, a: str, labels: Sequence[str]) -> bool:
    t = o.over(a)
    if len(labels) != t.size:
        return False
    g, total = t.underlying, o.total
    lab = dict(zip(g.ids, labels))
    for c in g:
        if lab[c.id] not in total or total.dim(lab[c.id]) != c.dim:
            return False
        if c.dim and (total.src(lab[c.id]) != lab[c.src] or total.tgt(lab[c.id]) != lab[c.tgt]):
            return False
    return True


def composite_tree(o: OperadData, a: str, labels: Sequence[str]) -> Tree:
    t = o.over(a)
    return graft(TreeOfTrees(t, tuple(o.over(l) for l in labels), o.dim(a)))


# -- built-in operads ---------------------------------------------------------------

class _TerminalMult(Mapping):
    """Composition in the terminal operad: grafting of trees."""

    def __init__(self, op: "OperadData"):
        self.op = op

    def __getitem__(self, key):
        a, labels = key
        o = self.op
        if a not in o.total or not _check_labels(o, a, labels):
            raise KeyError(key)
        t = composite_tree(o, a, labels)
        if t.size > o.coll.tree_bound:
            raise KeyError(key)
        return classifier_id(o.dim(a), t)

    def __iter__(self):
        for key in self.op.composable_pairs():
            if key in self:
                yield key

    def __len__(self):
        return sum(1 for _ in self)


class _InitialMult(Mapping):
    """Composition in the initial operad: only the identity operations."""

    def __init__(self, op: "OperadData"):
        self.op = op

    def __getitem__(self, key):
        a, labels = key
        o = self.op
        if a not in o.total or not _check_labels(o, a, labels):
            raise KeyError(key)
        return a

    def __iter__(self):
        return self.op.composable_pairs()

    def __len__(self):
        return sum(1 for _ in self)


def builtin(tag: str, d: int, tree_bound: int) -> OperadData:
    """The terminal operad (free strict omega-categories) or the initial one (the identity monad)."""
    if tag == "terminal":
        total = tree_classifier(d, tree_bound)
        over = {c.id: tree(c.id.split(":", 1)[1]) for c in total}
        units = {n: classifier_id(n, linear_tree(n)) for n in range(d + 1)}
        o = OperadData(Collection(total, over, d, tree_bound), units, {}, True, name="terminal")
        o.mult = _TerminalMult(o)
        return o
    if tag == "initial":
        cells = [Cell("e0", 0)] + [Cell(f"e{n}", n, f"e{n-1}", f"e{n-1}") for n in range(1, d + 1)]
        total = GlobularSet(cells)
        over = {f"e{n}": linear_tree(n) for n in range(d + 1)}
        o = OperadData(Collection(total, over, d, tree_bound), {n: f"e{n}" for n in range(d + 1)}, {}, True, name="initial")
        o.mult = _InitialMult(o)
        return o
    raise OmegaError(f"unknown builtin operad {tag!r}")


# -- algebras over operads ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ACell:
    """A cell of ``A(X)``: an operation and a labelling of its tree in ``X``."""

    op: str
    cell: FreeCell

    @cached_property
    def _hash(self) -> int:
        return hash((self.op, self.cell))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return self is other or (
            isinstance(other, ACell) and self._hash == other._hash
            and self.op == other.op and self.cell == other.cell
        )

    @property
    def dim(self) -> int:
        return self.cell.dim

    def sort_key(self) -> tuple:
        return (self.cell.dim, self.op, self.cell.sort_key())


def acell_face(o: OperadData, c: ACell, side: str) -> ACell:
    total = o.total
    op = total.src(c.op) if side in ("source", "src") else total.tgt(c.op)
    return ACell(op, face(c.cell, side))


def collection_apply(o: OperadData, x: GlobularSet, n: int, bound: int | None = None) -> list[ACell]:
    """``n``-cells of ``A(x)``: pairs ``(a, f: over(a) -> x)`` as the fibre product over trees."""
    if n > o.coll.trunc_dim:
        raise OmegaError(f"dimension {n} exceeds the truncation dimension {o.coll.trunc_dim}")
    bound = o.coll.tree_bound if bound is None else bound
    out = []
    for a in o.total.cells_of_dim(n):
        t = o.over(a)
        if t.size > bound:
            continue
        for f in hom_enumerate(t.underlying, x):
            out.append(ACell(a, FreeCell(t, f.key(), n)))
    return out


class AIndex:
    """Bounded cells of ``A(x)`` indexed by (op, source, target)."""

    def __init__(self, o: OperadData, cells):
        self.o = o
        self.by_key: dict[tuple, list[ACell]] = defaultdict(list)
        self.by_boundary: dict[tuple, list[ACell]] = defaultdict(list)
        for c in cells:
            s = t = None
            if c.dim:
                s, t = acell_face(o, c, "source"), acell_face(o, c, "target")
            self.by_key[(c.op, s, t)].append(c)
            self.by_boundary[(c.dim, s, t)].append(c)


def a_index(o: OperadData, x: GlobularSet, d: int, bound: int | None = None) -> AIndex:
    return AIndex(o, (c for n in range(d + 1) for c in collection_apply(o, x, n, bound)))


def a_multiply(o: OperadData, a: str, inner: Sequence[ACell]) -> ACell | None:
    """Multiplication ``A(A(x)) -> A(x)``; ``None`` when the composite leaves the truncation."""
    op = o.compose(a, [c.op for c in inner])
    if op is None:
        return None
    pasted = multiply(FreeCell(o.over(a), tuple(c.cell for c in inner), o.dim(a)))
    return ACell(op, pasted)


def a_unit(o: OperadData, x: GlobularSet, cid: str) -> ACell:
    return ACell(o.unit[x.dim(cid)], free_unit(x, cid))


def _lookup(act, c: ACell):
    return act(c) if callable(act) else act.get(c)


def algebra_check(o: OperadData, x: GlobularSet, act, d: int | None = None, bound: int | None = None) -> Report:
    """Eilenberg-Moore axioms for ``act: A(x) -> x`` within the truncation."""
    rep = Report()
    d = o.coll.trunc_dim if d is None else min(d, o.coll.trunc_dim)
    index = a_index(o, x, d, bound)
    # act is a globular map
    for cells in index.by_key.values():
        for c in cells:
            v = _lookup(act, c)
            if v is None or v not in x or x.dim(v) != c.dim:
                rep.add(f"{c.op}: action undefined or of the wrong dimension")
                continue
            if c.dim:
                s = _lookup(act, acell_face(o, c, "source"))
                t = _lookup(act, acell_face(o, c, "target"))
                if (s, t) != (x.src(v), x.tgt(v)):
                    rep.add(f"{c.op}: action does not commute with faces")
    if not rep.ok:
        return rep
    for cid in x.ids:
        if x.dim(cid) > d:
            continue
        if _lookup(act, a_unit(o, x, cid)) != cid:
            rep.add(f"unit axiom fails at {cid}")
    # multiplication axiom on A(A(x))
    for n in range(d + 1):
        for a in o.total.cells_of_dim(n):
            t = o.over(a)
            cand = lambda cell, s, tg: index.by_boundary.get((cell.dim, s, tg), [])
            for lab in labellings(t.underlying, cand):
                inner = [lab[c.id] for c in t.underlying.cells]
                top = a_multiply(o, a, inner)
                if top is None:
                    continue
                lhs = _lookup(act, top)
                acted = tuple(_lookup(act, c) for c in inner)
                rhs = _lookup(act, ACell(a, FreeCell(t, acted, n)))
                if lhs != rhs:
                    rep.add(f"multiplication axiom fails at {a} with {[c.op for c in inner]}")
    return rep


# -- operad laws ----------------------------------------------------------------------

def check_collection(o: OperadData) -> Report:
    rep = Report()
    total, over = o.total, o.coll.over
    rep.extend(validate(total), "total: ")
    for c in total:
        t = over.get(c.id)
        if t is None:
            rep.add(f"{c.id}: no tree assigned")
            continue
        if t.height > c.dim:
            rep.add(f"{c.id}: tree of height {t.height} in dimension {c.dim}")
            continue
        if c.dim:
            low = face_tree(t, c.dim)[0]
            if over.get(c.src) != low or over.get(c.tgt) != low:
                rep.add(f"{c.id}: over is not a globular map")
    for n, u in o.unit.items():
        if u not in total or total.dim(u) != n or over.get(u) != linear_tree(n):
            rep.add(f"unit {n}: not an {n}-operation over the linear tree")
        elif n and (total.src(u) != o.unit.get(n - 1) or total.tgt(u) != o.unit.get(n - 1)):
            rep.add(f"unit {n}: faces are not the unit {n - 1}")
    return rep


def check_operad(o: OperadData, max_dim: int | None = None) -> Report:
    """Monoid laws within the truncation: unit laws, associativity and ``over(mult) = graft``."""
    rep = check_collection(o)
    if not rep.ok:
        return rep
    total = o.total
    d = o.coll.trunc_dim if max_dim is None else max_dim
    keys = [k for k in o.mult if o.dim(k[0]) <= d]
    for a, labels in keys:
        r = o.mult[(a, labels)]
        where = f"mult({a}; {', '.join(labels)})"
        if not _check_labels(o, a, labels):
            rep.add(f"{where}: labels are not a globular map")
            continue
        if r not in total or total.dim(r) != o.dim(a):
            rep.add(f"{where}: result has the wrong dimension")
            continue
        if o.over(r) != composite_tree(o, a, labels):
            rep.add(f"{where}: result does not lie over the grafted tree")
            continue
        if o.dim(a):
            t = o.over(a)
            _, sigma, tau = face_tree(t, o.dim(a))
            for side, emb, face_of in (("source", sigma, total.src), ("target", tau, total.tgt)):
                low_a = face_of(a)
                low_lab = tuple(dict(zip(t.underlying.ids, labels))[emb(c.id)] for c in emb.source.cells)
                expect = o.compose(low_a, low_lab)
                if expect is not None and expect != face_of(r):
                    rep.add(f"{where}: composition does not commute with the {side}")
    for a in total.ids:
        if o.dim(a) > d:
            continue
        n = o.dim(a)
        left = o.compose(o.unit[n], o.globe_labels(a))
        if left is not None and left != a:
            rep.add(f"left unit law fails at {a}")
        right = o.compose(a, o.unit_labels(a))
        if right is not None and right != a:
            rep.add(f"right unit law fails at {a}")
    rep.extend(check_associativity(o, keys))
    return rep


def check_associativity(o: OperadData, keys) -> Report:
    rep = Report()
    total = o.total
    keys = list(keys)
    # only the operations that occur as labels need their A(total) cells indexed
    used = sorted({b for _, labels in keys for b in labels})
    by_op: dict[str, list[tuple[str, ...]]] = defaultdict(list)
    for b in used:
        for f in hom_enumerate(o.over(b).underlying, total):
            by_op[b].append(f.key())
    index = AIndex(o, (ACell(b, FreeCell(o.over(b), lab, o.dim(b))) for b in used for lab in by_op[b]))
    for a, labels in keys:
        t = o.over(a)
        lab = dict(zip(t.underlying.ids, labels))
        cand = lambda cell, s, tg: index.by_key.get((lab[cell.id], s, tg), [])
        for inner_map in labellings(t.underlying, cand):
            inner = [inner_map[c.id] for c in t.underlying.cells]
            mids = [o.compose(c.op, c.cell.label) for c in inner]
            if None in mids:
                continue
            lhs = o.compose(a, mids)
            first = o.compose(a, labels)
            outer = a_multiply(o, a, inner)
            if lhs is None or first is None or outer is None:
                continue
            rhs = o.compose(first, outer.cell.label)
            if rhs is not None and lhs != rhs:
                rep.add(f"associativity fails at mult({a}; {', '.join(labels)})")
    return rep


# -- contractibility ----------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Square:
    """A lifting problem in dimension ``dim``: parallel faces ``src``/``tgt`` and a tree."""

    dim: int
    src: str | None
    tgt: str | None
    tree: Tree = field(compare=False)
    tree_key: tuple = ()

    @classmethod
    def make(cls, dim, src, tgt, t: Tree) -> "Square":
        return cls(dim, src, tgt, t, (t.size, t.planar))

    def describe(self) -> str:
        faces = "" if self.dim == 0 else f" with faces {self.src} -> {self.tgt}"
        return f"dimension {self.dim}, tree {planar_json(self.tree.planar)}{faces}"


@dataclass
class DimensionVerdict:
    dim: int
    holds: bool
    exact: bool
    squares: int
    witnesses: list[Square]

    @property
    def status(self) -> str:
        if not self.holds:
            return "fails"
        return "holds" if self.exact else "holds within bound"


def squares(o: OperadData, n: int) -> Iterator[Square]:
    """All lifting problems in dimension ``n`` with tree within the operad's tree bound."""
    total = o.total
    trees = enumerate_trees(o.coll.tree_bound, max_height=n)
    if n == 0:
        for t in trees:
            yield Square.make(0, None, None, t)
        return
    by_low: dict[Tree, list[Tree]] = defaultdict(list)
    for t in trees:
        by_low[face_tree(t, n)[0]].append(t)
    # parallel pairs share faces and tree, so group the lower cells first
    groups: dict[tuple, list[str]] = defaultdict(list)
    for a in total.cells_of_dim(n - 1):
        key = (o.over(a),) if n == 1 else (o.over(a), total.src(a), total.tgt(a))
        groups[key].append(a)
    for key, members in groups.items():
        taus = by_low.get(key[0], [])
        for a in members:
            for b in members:
                for t in taus:
                    yield Square.make(n, a, b, t)


def fillers(o: OperadData, sq: Square) -> list[str]:
    total = o.total
    return [
        c for c in total.with_boundary(sq.dim, sq.src, sq.tgt)
        if o.over(c) == sq.tree
    ]


def _witness_key(sq: Square):
    # squares over trees of full height first, degenerate ones after
    return (sq.tree.height != sq.dim, sq.tree_key, sq.src or "", sq.tgt or "")


def is_contractible(o: OperadData, max_dim: int, require_complete: bool = False) -> list[DimensionVerdict]:
    """Right lifting property of ``A(e) -> omega(e)`` against sphere inclusions, per dimension."""
    if max_dim > o.coll.trunc_dim:
        raise OmegaError("max_dim exceeds the truncation dimension")
    if require_complete and not o.complete_fibers:
        raise IncompleteFibersError("operad fibres are not flagged complete")
    total = o.total
    out = []
    for n in range(max_dim + 1):
        filled = {(total.src(c), total.tgt(c), o.over(c)) for c in total.cells_of_dim(n)}
        count, missing = 0, []
        for sq in squares(o, n):
            count += 1
            if (sq.src, sq.tgt, sq.tree) not in filled:
                missing.append(sq)
        missing.sort(key=_witness_key)
        out.append(DimensionVerdict(n, not missing, o.complete_fibers, count, missing))
    return out


# -- morphisms ------------------------------------------------------------------------

def operad_morphism_check(phi: Mapping[str, str], a: OperadData, b: OperadData, max_dim: int | None = None) -> Report:
    rep = Report()
    d = min(a.coll.trunc_dim, b.coll.trunc_dim) if max_dim is None else max_dim
    ta, tb = a.total, b.total
    for c in ta:
        if c.dim > d:
            continue
        v = phi.get(c.id)
        if v is None or v not in tb:
            rep.add(f"{c.id}: not mapped")
            continue
        if tb.dim(v) != c.dim:
            rep.add(f"{c.id}: dimension not preserved")
            continue
        if c.dim and (phi.get(c.src) != tb.src(v) or phi.get(c.tgt) != tb.tgt(v)):
            rep.add(f"{c.id}: not a globular map")
        if b.over(v) != a.over(c.id):
            rep.add(f"{c.id}: over not preserved")
    if not rep.ok:
        return rep
    for n, u in a.unit.items():
        if n <= d and phi[u] != b.unit[n]:
            rep.add(f"unit {n} not preserved")
    for (x, labels), r in a.mult.items():
        if a.dim(x) > d:
            continue
        lhs = phi[r]
        rhs = b.compose(phi[x], [phi[l] for l in labels])
        if rhs is not None and lhs != rhs:
            rep.add(f"composition not preserved at mult({x}; {', '.join(labels)})")
    return rep


def compose_morphisms(phi: Mapping[str, str], psi: Mapping[str, str]) -> dict[str, str]:
    return {k: psi[v] for k, v in phi.items()}


def initial_to_terminal(init: OperadData, term: OperadData) -> dict[str, str]:
    return {a: term.unit[init.dim(a)] for a in init.total.ids}


def relabel(o: OperadData, rename: Callable[[str], str]) -> OperadData:
    """An isomorphic copy of ``o`` with every operation renamed."""
    total = GlobularSet(
        Cell(rename(c.id), c.dim, c.src and rename(c.src), c.tgt and rename(c.tgt)) for c in o.total
    )
    over = {rename(k): v for k, v in o.coll.over.items()}
    mult = {(rename(a), tuple(map(rename, ls))): rename(r) for (a, ls), r in o.mult.items()}
    return OperadData(
        Collection(total, over, o.coll.trunc_dim, o.coll.tree_bound),
        {n: rename(u) for n, u in o.unit.items()},
        mult, o.complete_fibers, name=o.name,
    )


def tabulate(o: OperadData) -> OperadData:
    """Materialise a lazily computed composition table."""
    return OperadData(o.coll, dict(o.unit), dict(o.mult.items()), o.complete_fibers, o.lifts, o.name)


# -- decorated operads ---------------------------------------------------------------

class _DecoratedMult(Mapping):
    def __init__(self, op: "OperadData", base: OperadData, top: int, modulus: int):
        self.op, self.base, self.top, self.modulus = op, base, top, modulus

    def _split(self, a: str) -> tuple[str, int]:
        if "#" in a:
            b, m = a.rsplit("#", 1)
            return b, int(m)
        return a, 0

    def __getitem__(self, key):
        a, labels = key
        o = self.op
        if a not in o.total or not _check_labels(o, a, labels):
            raise KeyError(key)
        base_a, m = self._split(a)
        base_labels = [self._split(l)[0] for l in labels]
        r = self.base.compose(base_a, base_labels)
        if r is None:
            raise KeyError(key)
        if o.dim(a) < self.top:
            return r
        t = o.over(a)
        for c, l in zip(t.underlying.cells, labels):
            if c.dim == self.top:
                m += self._split(l)[1]
        return f"{r}#{m % self.modulus}"

    def __iter__(self):
        for key in self.op.composable_pairs():
            if key in self:
                yield key

    def __len__(self):
        return sum(1 for _ in self)


def decorated_terminal(d: int, tree_bound: int, modulus: int = 2) -> OperadData:
    """Terminal operad with every top-dimensional operation doubled by a Z/m decoration.

    Decorations add up over the top-dimensional cells of a composite, so the
    result is an operad which is contractible with ``modulus`` parallel
    fillers for every top-dimensional square.
    """
    base = builtin("terminal", d, tree_bound)
    cells, over = [], {}
    for c in base.total:
        if c.dim < d:
            cells.append(c)
            over[c.id] = base.over(c.id)
        else:
            for m in range(modulus):
                cid = f"{c.id}#{m}"
                cells.append(Cell(cid, c.dim, c.src, c.tgt))
                over[cid] = base.over(c.id)
    units = dict(base.unit)
    units[d] = f"{base.unit[d]}#0"
    o = OperadData(Collection(GlobularSet(cells), over, d, tree_bound), units, {}, True, name=f"terminal-z{modulus}")
    o.mult = _DecoratedMult(o, base, d, modulus)
    return o
