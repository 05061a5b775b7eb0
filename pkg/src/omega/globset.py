"""Finite globular sets (omega-graphs), their maps, colimits and preorders.

A cell is a record ``(id, dim, src, tgt)``; ``src``/``tgt`` are ``None`` in
dimension 0.  Cells are kept in canonical order ``(dim, insertion index)``,
which fixes the order of every enumeration below.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Sequence


class OmegaError(Exception):
    """Base class for errors raised by this package."""


class UnboundedTargetError(OmegaError):
    """The target of a hom computation is not known to be complete in a needed dimension."""


@dataclass(frozen=True, slots=True)
class Cell:
    id: str
    dim: int
    src: str | None = None
    tgt: str | None = None


@dataclass
class Report:
    """Outcome of a check: ``ok`` plus human-readable violations."""

    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def add(self, msg: str) -> None:
        self.violations.append(msg)

    def extend(self, other: "Report", prefix: str = "") -> None:
        self.violations.extend(prefix + v for v in other.violations)


class GlobularSet:
    """An immutable finite globular set.

    ``complete_dim`` records the highest dimension in which the cell list is
    known to be exhaustive (``None`` means every dimension).  It only matters
    for truncated presentations of infinite objects.
    """

    __slots__ = ("cells", "complete_dim", "_by_id", "_by_dim", "_by_boundary")

    def __init__(self, cells: Iterable[Cell] = (), complete_dim: int | None = None):
        cells = list(cells)
        order = sorted(range(len(cells)), key=lambda i: (cells[i].dim, i))
        self.cells: tuple[Cell, ...] = tuple(cells[i] for i in order)
        self.complete_dim = complete_dim
        self._by_id = {c.id: c for c in self.cells}
        self._by_dim: dict[int, list[str]] = {}
        self._by_boundary: dict[tuple, list[str]] = {}
        for c in self.cells:
            self._by_dim.setdefault(c.dim, []).append(c.id)
            self._by_boundary.setdefault((c.dim, c.src, c.tgt), []).append(c.id)

    @classmethod
    def from_records(cls, records: Iterable[Mapping], complete_dim: int | None = None) -> "GlobularSet":
        return cls(
            (Cell(str(r["id"]), int(r["dim"]), r.get("src"), r.get("tgt")) for r in records),
            complete_dim,
        )

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self) -> Iterator[Cell]:
        return iter(self.cells)

    def __contains__(self, cid: object) -> bool:
        return cid in self._by_id

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GlobularSet) and self.cells == other.cells

    def __hash__(self) -> int:
        return hash(self.cells)

    def __repr__(self) -> str:
        counts = [len(self._by_dim.get(n, ())) for n in range(self.max_dim + 1)]
        return f"GlobularSet(cells per dim={counts})"

    @property
    def ids(self) -> list[str]:
        return [c.id for c in self.cells]

    @property
    def max_dim(self) -> int:
        return self.cells[-1].dim if self.cells else -1

    def cell(self, cid: str) -> Cell:
        return self._by_id[cid]

    def dim(self, cid: str) -> int:
        return self._by_id[cid].dim

    def src(self, cid: str) -> str | None:
        return self._by_id[cid].src

    def tgt(self, cid: str) -> str | None:
        return self._by_id[cid].tgt

    def cells_of_dim(self, n: int) -> list[str]:
        return list(self._by_dim.get(n, ()))

    def with_boundary(self, dim: int, src: str | None, tgt: str | None) -> list[str]:
        return list(self._by_boundary.get((dim, src, tgt), ()))

    def restrict(self, ids: Iterable[str]) -> "GlobularSet":
        keep = set(ids)
        return GlobularSet(c for c in self.cells if c.id in keep)

    def is_closed(self, ids: Iterable[str]) -> bool:
        keep = set(ids)
        return all(
            c.dim == 0 or (c.src in keep and c.tgt in keep)
            for c in self.cells if c.id in keep
        )


@dataclass(frozen=True)
class GlobularMap:
    source: GlobularSet
    target: GlobularSet
    assignment: Mapping[str, str]

    def __call__(self, cid: str) -> str:
        return self.assignment[cid]

    def key(self) -> tuple[str, ...]:
        return tuple(self.assignment[c.id] for c in self.source.cells)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, GlobularMap)
            and self.source == other.source
            and self.target == other.target
            and self.key() == other.key()
        )

    def __hash__(self) -> int:
        return hash(self.key())

    def then(self, other: "GlobularMap") -> "GlobularMap":
        """Diagrammatic composite: first ``self``, then ``other``."""
        return GlobularMap(
            self.source, other.target, {k: other.assignment[v] for k, v in self.assignment.items()}
        )

    def image(self) -> set[str]:
        return set(self.assignment.values())

    def is_mono(self) -> bool:
        return len(self.image()) == len(self.assignment)

    def is_iso(self) -> bool:
        return self.is_mono() and len(self.assignment) == len(self.target)

    def inverse(self) -> "GlobularMap":
        if not self.is_iso():
            raise OmegaError("map is not invertible")
        return GlobularMap(self.target, self.source, {v: k for k, v in self.assignment.items()})

    def validate(self) -> Report:
        rep = Report()
        x, y = self.source, self.target
        for c in x:
            if c.id not in self.assignment:
                rep.add(f"{c.id}: unassigned")
                continue
            d = self.assignment[c.id]
            if d not in y:
                rep.add(f"{c.id}: image {d!r} is not a target cell")
                continue
            if y.dim(d) != c.dim:
                rep.add(f"{c.id}: dimension {c.dim} sent to dimension {y.dim(d)}")
            elif c.dim > 0 and (
                self.assignment.get(c.src) != y.src(d) or self.assignment.get(c.tgt) != y.tgt(d)
            ):
                rep.add(f"{c.id}: does not commute with src/tgt")
        return rep


def identity(x: GlobularSet) -> GlobularMap:
    return GlobularMap(x, x, {c.id: c.id for c in x})


# -- validation ---------------------------------------------------------------

def validate(g: GlobularSet) -> Report:
    rep = Report()
    seen: set[str] = set()
    for c in g:
        if c.id in seen:
            rep.add(f"{c.id}: duplicate id")
        seen.add(c.id)
    for c in g:
        if c.dim < 0:
            rep.add(f"{c.id}: negative dimension")
            continue
        if c.dim == 0:
            if c.src is not None or c.tgt is not None:
                rep.add(f"{c.id}: 0-cell with a source or target")
            continue
        if c.src not in g or c.tgt not in g:
            rep.add(f"{c.id}: missing source or target cell")
            continue
        if g.dim(c.src) != c.dim - 1 or g.dim(c.tgt) != c.dim - 1:
            rep.add(f"{c.id}: faces are not of dimension {c.dim - 1}")
            continue
        if c.dim >= 2:
            s, t = g.cell(c.src), g.cell(c.tgt)
            if s.src != t.src:
                rep.add(f"{c.id}: src(src) != src(tgt)")
            if s.tgt != t.tgt:
                rep.add(f"{c.id}: tgt(tgt) != tgt(src)")
    return rep


# -- constructors -------------------------------------------------------------

def _sector_id(path: Sequence[int], i: int) -> str:
    return ".".join(map(str, (*path, i)))


def globe(n: int) -> GlobularSet:
    """The representable globe: two cells in each dimension below ``n`` and one on top.

    Ids follow the planar-tree naming used by :mod:`omega.tree`: the source
    ``k``-cell is ``"0." * k + "0"``, the target ``"0." * k + "1"``.
    """
    cells = []
    for k in range(n + 1):
        path = (0,) * k
        faces = (None, None) if k == 0 else (_sector_id(path[:-1], 0), _sector_id(path[:-1], 1))
        cells.append(Cell(_sector_id(path, 0), k, *faces))
        if k < n:
            cells.append(Cell(_sector_id(path, 1), k, *faces))
    return GlobularSet(cells)


def sphere(n: int) -> tuple[GlobularSet, GlobularMap]:
    g = globe(n)
    top = g.cells_of_dim(n)[0]
    s = g.restrict(i for i in g.ids if i != top)
    return s, GlobularMap(s, g, {i: i for i in s.ids})


def star(k: int) -> GlobularSet:
    """Path of ``k`` consecutive edges; as a tree, a root with ``k`` leaves."""
    cells = [Cell(str(i), 0) for i in range(k + 1)]
    cells += [Cell(f"{j}.0", 1, str(j), str(j + 1)) for j in range(k)]
    return GlobularSet(cells)


def terminal(d: int) -> GlobularSet:
    """The terminal globular set truncated above dimension ``d``."""
    cells = [Cell("e0", 0)]
    cells += [Cell(f"e{n}", n, f"e{n-1}", f"e{n-1}") for n in range(1, d + 1)]
    return GlobularSet(cells, complete_dim=d)


def loop() -> GlobularSet:
    return GlobularSet([Cell("v", 0), Cell("l", 1, "v", "v")])


def disjoint_union(parts: Sequence[GlobularSet]) -> tuple[GlobularSet, list[GlobularMap]]:
    cells, injections = [], []
    for i, p in enumerate(parts):
        tag = lambda cid, i=i: f"{i}/{cid}"
        cells += [Cell(tag(c.id), c.dim, c.src and tag(c.src), c.tgt and tag(c.tgt)) for c in p]
        injections.append({c.id: tag(c.id) for c in p})
    u = GlobularSet(cells)
    return u, [GlobularMap(p, u, inj) for p, inj in zip(parts, injections)]


# -- hom-sets -----------------------------------------------------------------

def labellings(
    x: GlobularSet,
    candidates: Callable[[Cell, Hashable, Hashable], Iterable[Hashable]],
) -> Iterator[dict[str, Hashable]]:
    """Backtracking search for globular maps out of ``x``.

    ``candidates(cell, src_image, tgt_image)`` lists admissible images of a
    cell given the images of its faces (both ``None`` in dimension 0), so the
    target may be any lazily presented globular set.  Assignments come out in
    lexicographic order of the candidate sequences.
    """
    order = x.cells
    assign: dict[str, Hashable] = {}

    def go(i: int) -> Iterator[dict[str, Hashable]]:
        if i == len(order):
            yield dict(assign)
            return
        c = order[i]
        opts = candidates(c, None, None) if c.dim == 0 else candidates(c, assign[c.src], assign[c.tgt])
        for d in opts:
            assign[c.id] = d
            yield from go(i + 1)
        assign.pop(c.id, None)

    yield from go(0)


def hom_enumerate(x: GlobularSet, y: GlobularSet) -> list[GlobularMap]:
    if y.complete_dim is not None and x.max_dim > y.complete_dim:
        raise UnboundedTargetError(
            f"target is only complete up to dimension {y.complete_dim}, source needs {x.max_dim}"
        )
    cands = lambda c, s, t: y.with_boundary(c.dim, s, t)
    return [GlobularMap(x, y, a) for a in labellings(x, cands)]


def is_isomorphic(x: GlobularSet, y: GlobularSet) -> bool:
    if len(x) != len(y):
        return False
    return any(f.is_iso() for f in hom_enumerate(x, y))


# -- colimits -----------------------------------------------------------------

class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, a):
        self.parent.setdefault(a, a)
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the earlier element as representative for determinism
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def colimit(
    objects: Sequence[GlobularSet],
    arrows: Iterable[tuple[int, int, Mapping[str, str]]],
) -> tuple[GlobularSet, list[GlobularMap]]:
    """Levelwise colimit of a finite diagram of globular sets.

    ``arrows`` are triples ``(i, j, assignment)`` for maps ``objects[i] ->
    objects[j]``.  The result is the disjoint union modulo the equivalence
    generated by ``x ~ f(x)``; each class is named after its earliest member,
    keeping raw ids when they are unambiguous.
    """
    uf = _UnionFind()
    position = {}
    for i, obj in enumerate(objects):
        for k, c in enumerate(obj.cells):
            position[(i, c.id)] = (i, k)
            uf.find((i, k))
    for i, j, assign in arrows:
        for a, b in assign.items():
            uf.union(position[(i, a)], position[(j, b)])

    reps = {}
    for i, obj in enumerate(objects):
        for k, c in enumerate(obj.cells):
            reps.setdefault(uf.find((i, k)), (i, c))
    raw = [c.id for _, c in reps.values()]
    unambiguous = len(set(raw)) == len(raw)

    def name(root) -> str:
        i, c = reps[root]
        return c.id if unambiguous else f"{i}/{c.id}"

    def cls(i: int, cid: str) -> str:
        return name(uf.find(position[(i, cid)]))

    cells = []
    for root, (i, c) in reps.items():
        if c.dim == 0:
            cells.append(Cell(name(root), 0))
        else:
            cells.append(Cell(name(root), c.dim, cls(i, c.src), cls(i, c.tgt)))
    out = GlobularSet(cells)
    cocone = [GlobularMap(obj, out, {c.id: cls(i, c.id) for c in obj}) for i, obj in enumerate(objects)]
    return out, cocone


# -- the generated preorder ---------------------------------------------------

@dataclass(frozen=True)
class Preorder:
    carrier: tuple[str, ...]
    relation: frozenset[tuple[str, str]]

    def leq(self, a: str, b: str) -> bool:
        return (a, b) in self.relation

    def is_antisymmetric(self) -> bool:
        return all(a == b or (b, a) not in self.relation for a, b in self.relation)

    def is_total(self) -> bool:
        if not self.is_antisymmetric():
            return False
        return all(
            (a, b) in self.relation or (b, a) in self.relation
            for a in self.carrier for b in self.carrier
        )

    def linear_order(self) -> list[str]:
        """Elements sorted by the number of elements below them (a total order's listing)."""
        below = {a: 0 for a in self.carrier}
        for a, b in self.relation:
            below[b] += 1
        return sorted(self.carrier, key=lambda a: below[a])


def preorder_closure(g: GlobularSet) -> tuple[Preorder, bool]:
    succ: dict[str, list[str]] = {c.id: [] for c in g}
    for c in g:
        if c.dim > 0:
            succ[c.src].append(c.id)
            succ[c.id].append(c.tgt)
    rel = set()
    for a in succ:
        stack, seen = [a], {a}
        while stack:
            u = stack.pop()
            for v in succ[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        rel.update((a, b) for b in seen)
    p = Preorder(tuple(g.ids), frozenset(rel))
    return p, p.is_total()
