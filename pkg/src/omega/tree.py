"""Trees: finite non-empty globular sets whose generated preorder is total.

Every tree is stored in its canonical form, built from a planar level tree
given as nested tuples (``()`` is the point, ``((), ())`` the two-edge star,
``(((),),)`` the 2-globe).  A node at level ``k`` with ``m`` children carries
``m + 1`` cells of dimension ``k`` (its sectors); sector ``i`` of the node at
``path`` has id ``".".join(path + (i,))``.  Trees have no non-trivial
automorphisms, so the planar encoding is a canonical key for the
isomorphism class.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Any, Iterable, Sequence

from .globset import (
    Cell,
    GlobularMap,
    GlobularSet,
    OmegaError,
    colimit,
    globe,
    hom_enumerate,
    preorder_closure,
)

Planar = tuple  # nested tuples of children


class NotATreeError(OmegaError):
    pass


class MalformedPlanarError(OmegaError):
    pass


def planar(obj: Any) -> Planar:
    """Normalise nested lists (e.g. parsed ptree-json) to nested tuples."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, (list, tuple)):
        raise MalformedPlanarError(f"expected a nested array, got {obj!r}")
    return tuple(planar(ch) for ch in obj)


def planar_json(p: Planar) -> str:
    return json.dumps(p, separators=(",", ":"))


def node_count(p: Planar) -> int:
    return 1 + sum(node_count(ch) for ch in p)


def cell_count(p: Planar) -> int:
    return 2 * node_count(p) - 1


def planar_height(p: Planar) -> int:
    return 1 + max(planar_height(ch) for ch in p) if p else 0


def chain(n: int) -> Planar:
    p: Planar = ()
    for _ in range(n):
        p = (p,)
    return p


def star_planar(k: int) -> Planar:
    return ((),) * k


def sector_id(path: Sequence[int], i: int) -> str:
    return ".".join(map(str, (*path, i)))


def _planar_cells(p: Planar) -> list[Cell]:
    cells: list[Cell] = []

    def walk(node: Planar, path: tuple[int, ...]) -> None:
        k = len(path)
        if k == 0:
            faces = [(None, None)] * (len(node) + 1)
        else:
            faces = [(sector_id(path[:-1], path[-1]), sector_id(path[:-1], path[-1] + 1))] * (len(node) + 1)
        for i in range(len(node) + 1):
            cells.append(Cell(sector_id(path, i), k, *faces[i]))
        for j, ch in enumerate(node):
            walk(ch, path + (j,))

    walk(p, ())
    return cells


@dataclass(frozen=True, eq=False)
class Tree:
    """A tree in canonical form; equality and hashing go through ``planar``."""

    planar: Planar

    @cached_property
    def underlying(self) -> GlobularSet:
        return GlobularSet(_planar_cells(self.planar))

    @cached_property
    def height(self) -> int:
        return planar_height(self.planar)

    @cached_property
    def linear(self) -> bool:
        return self.planar == chain(self.height)

    @cached_property
    def size(self) -> int:
        return cell_count(self.planar)

    @cached_property
    def children_count(self) -> dict[tuple[int, ...], int]:
        out = {}

        def walk(node, path):
            out[path] = len(node)
            for j, ch in enumerate(node):
                walk(ch, path + (j,))

        walk(self.planar, ())
        return out

    @cached_property
    def peaks(self) -> list[str]:
        """Top cells of leaves, in the tree's total order."""
        return [c for c in self.order if self.children_count[_path_of(c)] == 0]

    @cached_property
    def index(self) -> dict[str, int]:
        return {c.id: i for i, c in enumerate(self.underlying.cells)}

    @cached_property
    def order(self) -> list[str]:
        """Cells listed in the total order generated by ``s(x) <= x <= t(x)``."""
        out: list[str] = []

        def walk(node, path):
            for i in range(len(node) + 1):
                out.append(sector_id(path, i))
                if i < len(node):
                    walk(node[i], path + (i,))

        walk(self.planar, ())
        return out

    @cached_property
    def _hash(self) -> int:
        return hash(self.planar)

    def __eq__(self, other: object) -> bool:
        return self is other or (isinstance(other, Tree) and self.planar == other.planar)

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Tree") -> bool:
        return (self.size, self.planar) < (other.size, other.planar)

    def __repr__(self) -> str:
        return f"Tree({planar_json(self.planar)})"


def _path_of(cid: str) -> tuple[int, ...]:
    return tuple(int(p) for p in cid.split(".")[:-1])


def tree(p: Any) -> Tree:
    """Canonical tree for a planar encoding (nested tuples, lists, or a JSON string)."""
    return _tree(planar(p))


@lru_cache(maxsize=None)
def _tree(p: Planar) -> Tree:
    return Tree(p)


def point() -> Tree:
    return tree(())


@lru_cache(maxsize=None)
def linear_tree(n: int) -> Tree:
    return tree(chain(n))


def star_tree(k: int) -> Tree:
    return tree(star_planar(k))


# -- recognition and conversion -----------------------------------------------

def is_tree(g: GlobularSet) -> bool:
    if len(g) == 0:
        return False
    return preorder_closure(g)[1]


def convert_back(p: Any) -> Tree:
    return tree(p)


def convert(g: GlobularSet | Tree) -> tuple[Planar, GlobularMap]:
    """Planar encoding of a tree-shaped globular set, plus the isomorphism onto the canonical tree."""
    if isinstance(g, Tree):
        return g.planar, GlobularMap(g.underlying, g.underlying, {i: i for i in g.underlying.ids})
    pre, total = preorder_closure(g) if len(g) else (None, False)
    if not total:
        raise NotATreeError("globular set is empty or its preorder is not total")
    pos = {c: i for i, c in enumerate(pre.linear_order())}
    iso: dict[str, str] = {}

    def build(sectors: list[str], path: tuple[int, ...]) -> Planar:
        for i, c in enumerate(sectors):
            iso[c] = sector_id(path, i)
        dim = g.dim(sectors[0])
        kids = []
        for j, (a, b) in enumerate(zip(sectors, sectors[1:])):
            ups = sorted(g.with_boundary(dim + 1, a, b), key=pos.__getitem__)
            if not ups:
                raise NotATreeError(f"no cells between consecutive sectors {a!r}, {b!r}")
            kids.append(build(ups, path + (j,)))
        return tuple(kids)

    p = build(sorted(g.cells_of_dim(0), key=pos.__getitem__), ())
    if len(iso) != len(g):
        raise NotATreeError("cells not reachable from the planar decomposition")
    t = tree(p)
    return p, GlobularMap(g, t.underlying, iso)


def classify(t: Tree) -> tuple[int, bool]:
    return t.height, t.linear


# -- enumeration ----------------------------------------------------------------

@lru_cache(maxsize=None)
def _forests(nodes: int) -> tuple[Planar, ...]:
    if nodes == 0:
        return ((),)
    out = []
    for first in range(1, nodes + 1):
        for head in _trees_with_nodes(first):
            for rest in _forests(nodes - first):
                out.append((head,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def _trees_with_nodes(nodes: int) -> tuple[Planar, ...]:
    return _forests(nodes - 1)


def enumerate_trees(max_cells: int, max_height: int | None = None) -> list[Tree]:
    """One tree per isomorphism class with at most ``max_cells`` cells, in canonical order."""
    out = []
    for n in range(1, (max_cells + 1) // 2 + 1):
        out += [tree(p) for p in _trees_with_nodes(n)]
    if max_height is not None:
        out = [t for t in out if t.height <= max_height]
    return sorted(out)


# -- subtrees, boundaries, covers ---------------------------------------------

def hom(s: Tree, t: Tree) -> list[GlobularMap]:
    return hom_enumerate(s.underlying, t.underlying)


def subtrees(t: Tree, proper_only: bool = True) -> list[tuple[Tree, GlobularMap]]:
    """All subtrees of ``t`` with their inclusions, as images of tree morphisms."""
    seen: set[frozenset[str]] = set()
    out = []
    for s in enumerate_trees(t.size, max_height=t.height):
        if proper_only and s == t:
            continue
        for f in hom(s, t):
            img = frozenset(f.image())
            if img not in seen:
                seen.add(img)
                out.append((s, f))
    return out


def boundary_union(t: Tree) -> tuple[GlobularSet, GlobularMap]:
    covered: set[str] = set()
    for _, f in subtrees(t, proper_only=True):
        covered |= f.image()
    sub = t.underlying.restrict(covered)
    return sub, GlobularMap(sub, t.underlying, {i: i for i in sub.ids})


def is_cover(family: Iterable[GlobularMap], t: Tree) -> bool:
    covered: set[str] = set()
    for f in family:
        if f.target != t.underlying:
            raise OmegaError("family member does not target the tree")
        covered |= f.image()
    return covered == set(t.underlying.ids)


# -- coglobular structure -----------------------------------------------------

def _chop(p: Planar, k: int) -> Planar:
    if k == 0:
        return ()
    return tuple(_chop(ch, k - 1) for ch in p)


@lru_cache(maxsize=None)
def truncate(t: Tree, k: int) -> tuple[Tree, GlobularMap, GlobularMap]:
    """Truncation of ``t`` to height ``k`` with its source and target embeddings.

    Cells below level ``k`` are kept; each level-``k`` node is sent to its
    first sector by the source embedding and to its last by the target one.
    """
    if k < 0 or k > t.height:
        raise OmegaError(f"cannot truncate a tree of height {t.height} at {k}")
    low = tree(_chop(t.planar, k))
    sigma, tau = {}, {}
    for c in low.underlying:
        path = _path_of(c.id)
        if len(path) < k:
            sigma[c.id] = tau[c.id] = c.id
        else:
            sigma[c.id] = sector_id(path, 0)
            tau[c.id] = sector_id(path, t.children_count[path])
    return (
        low,
        GlobularMap(low.underlying, t.underlying, sigma),
        GlobularMap(low.underlying, t.underlying, tau),
    )


def face_tree(t: Tree, n: int) -> tuple[Tree, GlobularMap, GlobularMap]:
    """Faces of ``t`` viewed as an ``n``-cell of the tree classifier (identity when degenerate)."""
    if t.height <= n - 1:
        ident = GlobularMap(t.underlying, t.underlying, {i: i for i in t.underlying.ids})
        return t, ident, ident
    return truncate(t, n - 1)


# -- the globe decomposition --------------------------------------------------

def globe_cover_check(t: Tree) -> tuple[bool, GlobularMap | None]:
    """Compute colim over all globes-over-``t`` and test the comparison map for invertibility."""
    elems: list[tuple[int, GlobularMap]] = []
    for n in range(t.height + 1):
        for f in hom_enumerate(globe(n), t.underlying):
            elems.append((n, f))
    objects = [f.source for _, f in elems]
    arrows = []
    for i, (m, f_small) in enumerate(elems):
        for j, (n, f_big) in enumerate(elems):
            if m > n:
                continue
            for g in hom_enumerate(globe(m), globe(n)):
                if g.then(f_big) == f_small:
                    arrows.append((i, j, g.assignment))
    out, cocone = colimit(objects, arrows)
    induced: dict[str, str] = {}
    for (_, f), leg in zip(elems, cocone):
        for c, cls in leg.assignment.items():
            if induced.setdefault(cls, f(c)) != f(c):
                return False, None
    comparison = GlobularMap(out, t.underlying, induced)
    if len(induced) != len(out) or not comparison.validate().ok:
        return False, None
    return comparison.is_iso(), comparison


__all__ = [
    "Tree", "Planar", "NotATreeError", "MalformedPlanarError", "planar", "planar_json", "tree",
    "point", "linear_tree", "star_tree", "chain", "star_planar", "is_tree", "convert",
    "convert_back", "classify", "enumerate_trees", "subtrees", "boundary_union", "is_cover",
    "truncate", "face_tree", "globe_cover_check", "hom", "cell_count", "node_count", "sector_id",
]
