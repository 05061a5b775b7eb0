"""The free strict omega-category monad on finite globular sets.

An ``n``-cell of the free omega-category on ``X`` is a pair ``(T, f)`` with
``T`` a tree of height at most ``n`` and ``f: T -> X`` a globular map.
Multiplication pastes a tree of such cells by gluing their shapes along
the truncation embeddings (a finite colimit of globular sets), and strict
``k``-composition is derived from it.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Hashable, Iterable, Sequence

from .globset import GlobularMap, GlobularSet, OmegaError, Report, colimit, hom_enumerate, labellings
from .tree import Tree, chain, convert, enumerate_trees, face_tree, linear_tree, sector_id, tree


class TruncationOverflow(OmegaError):
    """A pasted shape exceeds the requested tree-size bound."""


class IncompatibleLabels(OmegaError):
    pass


class BoundaryMismatch(OmegaError):
    pass


def _label_key(v) -> tuple:
    return (0, v) if isinstance(v, str) else (1, v.sort_key())


@dataclass(frozen=True, eq=False)
class FreeCell:
    """A cell ``(shape, label)`` of dimension ``dim``.

    ``label`` lists the images of the shape's cells in the shape's canonical
    cell order; images are cell ids of ``X`` or, one level up, ``FreeCell`` s.
    """

    shape: Tree
    label: tuple
    dim: int

    def __post_init__(self):
        if self.shape.height > self.dim:
            raise OmegaError(f"shape of height {self.shape.height} in dimension {self.dim}")
        if len(self.label) != self.shape.size:
            raise OmegaError("label length does not match the shape")

    @cached_property
    def _hash(self) -> int:
        return hash((self.shape, self.label, self.dim))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        return (
            isinstance(other, FreeCell)
            and self._hash == other._hash
            and (self.dim, self.shape, self.label) == (other.dim, other.shape, other.label)
        )

    def at(self, cid: str):
        return self.label[self.shape.index[cid]]

    def label_map(self) -> dict:
        return {c.id: v for c, v in zip(self.shape.underlying.cells, self.label)}

    @cached_property
    def _sort_key(self) -> tuple:
        return (self.dim, self.shape.size, self.shape.planar, tuple(_label_key(v) for v in self.label))

    def sort_key(self) -> tuple:
        return self._sort_key

    def __lt__(self, other: "FreeCell") -> bool:
        return self.sort_key() < other.sort_key()

    def as_record(self) -> dict:
        """Serialisable form: ``{"tree": ptree, "label": {cell: image}, "dim": n}``."""
        return {
            "tree": _jsonable(self.shape.planar),
            "label": {k: (v if isinstance(v, str) else v.as_record()) for k, v in self.label_map().items()},
            "dim": self.dim,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "FreeCell":
        shape = tree(rec["tree"])
        lab = rec["label"]
        vals = tuple(
            lab[c.id] if isinstance(lab[c.id], str) else cls.from_record(lab[c.id])
            for c in shape.underlying.cells
        )
        return cls(shape, vals, int(rec["dim"]))

    def token(self) -> str:
        """A compact string id, used when free cells become cells of a globular set."""
        from .tree import planar_json
        inner = ",".join(v if isinstance(v, str) else "{" + v.token() + "}" for v in self.label)
        return f"{self.dim}|{planar_json(self.shape.planar)}|{inner}"


def _jsonable(p):
    return [_jsonable(ch) for ch in p]


# -- faces and units ------------------------------------------------------------

def face(c: FreeCell, side: str) -> FreeCell:
    if c.dim == 0:
        raise OmegaError("0-cells have no faces")
    low, sigma, tau = face_tree(c.shape, c.dim)
    emb = {"source": sigma, "src": sigma, "target": tau, "tgt": tau}[side]
    return FreeCell(low, tuple(c.at(emb(x.id)) for x in low.underlying.cells), c.dim - 1)


def globe_labels(top, n: int, src: Callable, tgt: Callable) -> dict[str, Hashable]:
    """Label the canonical ``n``-globe by a cell and its iterated faces."""
    out = {sector_id((0,) * n, 0): top}
    s = t = top
    for k in range(n - 1, -1, -1):
        s, t = src(s), tgt(s)
        out[sector_id((0,) * k, 0)] = s
        out[sector_id((0,) * k, 1)] = t
    return out


def _unit(top, n: int, src: Callable, tgt: Callable) -> FreeCell:
    shape = linear_tree(n)
    lab = globe_labels(top, n, src, tgt)
    return FreeCell(shape, tuple(lab[c.id] for c in shape.underlying.cells), n)


def unit(x: GlobularSet, cid: str) -> FreeCell:
    return _unit(cid, x.dim(cid), x.src, x.tgt)


def unit_free(c: FreeCell) -> FreeCell:
    """Unit of the monad at ``omega(X)``: wraps a free cell as a cell of ``omega(omega(X))``."""
    return _unit(c, c.dim, lambda v: face(v, "source"), lambda v: face(v, "target"))


def degenerate(c: FreeCell, n: int) -> FreeCell:
    """The identity ``n``-cell on ``c`` (same shape and labels, higher dimension)."""
    if n < c.dim:
        raise OmegaError("cannot lower the dimension of a cell")
    return FreeCell(c.shape, c.label, n)


# -- enumeration ------------------------------------------------------------------

@dataclass
class FreeCells:
    cells: list[FreeCell]
    truncated: bool

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self):
        return iter(self.cells)


def _maps_from(t: Tree, x: GlobularSet) -> list[GlobularMap]:
    return hom_enumerate(t.underlying, x)


def free_cells(x: GlobularSet, n: int, max_tree_cells: int) -> FreeCells:
    """All ``n``-cells of the free omega-category on ``x`` whose shape has at most ``max_tree_cells`` cells.

    ``truncated`` is set when some shape just beyond the bound also maps into
    ``x``; every tree has a subtree with one node fewer, so otherwise the
    listing is complete.
    """
    cells = []
    for t in enumerate_trees(max_tree_cells, max_height=n):
        for f in _maps_from(t, x):
            cells.append(FreeCell(t, f.key(), n))
    nxt = max_tree_cells + 1 if max_tree_cells % 2 == 0 else max_tree_cells + 2
    truncated = any(
        _maps_from(t, x) for t in enumerate_trees(nxt, max_height=n) if t.size > max_tree_cells
    )
    return FreeCells(cells, truncated)


class FreeIndex:
    """Cells of a bounded free omega-category indexed by (dim, source face, target face)."""

    def __init__(self, cells: Iterable[FreeCell]):
        self.by_boundary: dict[tuple, list[FreeCell]] = defaultdict(list)
        for c in cells:
            key = (c.dim, None, None) if c.dim == 0 else (c.dim, face(c, "source"), face(c, "target"))
            self.by_boundary[key].append(c)

    def candidates(self, cell, s, t) -> list[FreeCell]:
        return self.by_boundary.get((cell.dim, s, t), [])


def free_index(x: GlobularSet, n: int, max_tree_cells: int) -> FreeIndex:
    return FreeIndex(c for k in range(n + 1) for c in free_cells(x, k, max_tree_cells).cells)


def cells_over(shape: Tree, index: FreeIndex) -> list[tuple]:
    """Globular maps ``shape -> omega(X)`` with values drawn from ``index``, as label tuples."""
    order = shape.underlying.cells
    return [tuple(a[c.id] for c in order) for a in labellings(shape.underlying, index.candidates)]


# -- pasting ----------------------------------------------------------------------

@lru_cache(maxsize=None)
def paste_shape(shape: Tree, inner: tuple) -> tuple[Tree, tuple]:
    """Graft the trees ``inner`` (one per cell of ``shape``) into a single tree.

    Returns the pasted tree and, for each cell of ``shape``, the cocone leg as
    a tuple sending each cell index of the inner tree to a cell index of the
    result.
    """
    cells = shape.underlying.cells
    objects = [t.underlying for t in inner]
    arrows = []
    for i, c in enumerate(cells):
        if c.dim == 0:
            continue
        low, sigma, tau = face_tree(inner[i], c.dim)
        for j, emb in ((shape.index[c.src], sigma), (shape.index[c.tgt], tau)):
            if inner[j] != low:
                raise IncompatibleLabels(f"label of {c.id} does not restrict to the label of its face")
            arrows.append((j, i, emb.assignment))
    glued, cocone = colimit(objects, arrows)
    p, iso = convert(glued)
    result = tree(p)
    legs = tuple(
        tuple(result.index[iso(leg(x.id))] for x in t.underlying.cells)
        for leg, t in zip(cocone, inner)
    )
    return result, legs


def _paste(shape: Tree, inner: Sequence[FreeCell], with_labels: bool = True) -> tuple[Tree, tuple | None]:
    result, legs = paste_shape(shape, tuple(c.shape for c in inner))
    if not with_labels:
        return result, None
    values: list = [None] * result.size
    for leg, fc in zip(legs, inner):
        for r, v in zip(leg, fc.label):
            if values[r] is None:
                values[r] = v
            elif values[r] != v:
                raise IncompatibleLabels(f"conflicting labels glued at cell {r}")
    return result, tuple(values)


def check_labelling(c: FreeCell) -> Report:
    """Check that the labels of a cell of ``omega(omega(X))`` form a globular map."""
    rep = Report()
    for cell, v in zip(c.shape.underlying.cells, c.label):
        if not isinstance(v, FreeCell):
            rep.add(f"{cell.id}: label is not a free cell")
            continue
        if v.dim != cell.dim:
            rep.add(f"{cell.id}: label has dimension {v.dim}, expected {cell.dim}")
        elif cell.dim > 0:
            if face(v, "source") != c.at(cell.src) or face(v, "target") != c.at(cell.tgt):
                rep.add(f"{cell.id}: label faces disagree with the labels of its faces")
    return rep


def multiply(c: FreeCell, bound: int | None = None) -> FreeCell:
    """Monad multiplication: paste a free cell whose labels are free cells."""
    shape, label = _paste(c.shape, c.label)
    if bound is not None and shape.size > bound:
        raise TruncationOverflow(f"pasted shape has {shape.size} cells, bound is {bound}")
    return FreeCell(shape, label, c.dim)


def fmap(c: FreeCell, f: Callable) -> FreeCell:
    """Functorial action of omega on a map of labels."""
    return FreeCell(c.shape, tuple(f(v) for v in c.label), c.dim)


# -- trees of trees ---------------------------------------------------------------

@dataclass(frozen=True)
class TreeOfTrees:
    """A cell of ``omega(omega(e))``: an outer tree with a tree on each of its cells."""

    outer: Tree
    inner: tuple[Tree, ...]
    dim: int | None = None

    @classmethod
    def from_peaks(cls, outer: Tree, peak_trees: Sequence[Tree], dim: int | None = None) -> "TreeOfTrees":
        """Extend an assignment on the peaks of ``outer`` to all of its cells by truncation."""
        g = outer.underlying
        val: dict[str, Tree] = dict(zip(outer.peaks, peak_trees))
        for c in reversed(g.cells):
            if c.id not in val:
                raise IncompatibleLabels(f"cell {c.id} is not below any peak")
            if c.dim == 0:
                continue
            low = face_tree(val[c.id], c.dim)[0]
            for f in (c.src, c.tgt):
                if val.setdefault(f, low) != low:
                    raise IncompatibleLabels(f"peaks disagree on the tree at {f}")
        return cls(outer, tuple(val[c.id] for c in g.cells), dim)

    def as_free_cell(self) -> FreeCell:
        g = self.outer.underlying
        n = self.outer.height if self.dim is None else self.dim
        inner = tuple(
            FreeCell(t, ("e",) * t.size, c.dim) for c, t in zip(g.cells, self.inner)
        )
        return FreeCell(self.outer, inner, n)


def graft(tt: TreeOfTrees) -> Tree:
    return _graft(tt.outer, tt.inner, tt.dim)


@lru_cache(maxsize=None)
def _graft(outer: Tree, inner: tuple, dim) -> Tree:
    fc = TreeOfTrees(outer, inner, dim).as_free_cell()
    rep = check_labelling(fc)
    if not rep.ok:
        raise IncompatibleLabels("; ".join(rep.violations))
    return _paste(fc.shape, fc.label, with_labels=False)[0]


# -- composition ------------------------------------------------------------------

def composition_tree(n: int, k: int) -> Tree:
    """Shape of two ``n``-globes glued along a common ``k``-face."""
    arm = chain(n - k - 1)
    p = (arm, arm)
    for _ in range(k):
        p = (p,)
    return tree(p)


def compose_along(a: FreeCell, b: FreeCell, k: int) -> FreeCell:
    """``a`` then ``b`` along dimension ``k``: the ``k``-target of ``a`` must be the ``k``-source of ``b``."""
    n = a.dim
    if b.dim != n or not 0 <= k < n:
        raise OmegaError("compose_along needs two n-cells and 0 <= k < n")
    w = composition_tree(n, k)
    left = sector_id((0,) * k + (0,) + (0,) * (n - k - 1), 0)
    right = sector_id((0,) * k + (1,) + (0,) * (n - k - 1), 0)
    top = sector_id((0,) * n, 0)
    lab: dict[str, FreeCell] = {}
    for f in hom_enumerate(linear_tree(n).underlying, w.underlying):
        which = {left: a, right: b}.get(f(top))
        if which is None:
            continue
        faces = globe_labels(which, n, lambda v: face(v, "source"), lambda v: face(v, "target"))
        for g_cell, w_cell in f.assignment.items():
            if lab.setdefault(w_cell, faces[g_cell]) != faces[g_cell]:
                raise BoundaryMismatch(f"target {k}-face of the first cell differs from the source of the second")
    return multiply(FreeCell(w, tuple(lab[c.id] for c in w.underlying.cells), n))


# -- Kleisli hom-sets between trees -----------------------------------------------

@dataclass(frozen=True)
class KleisliMap:
    """A globular map ``source -> omega(target)``, i.e. a morphism of Theta_omega."""

    source: Tree
    target: Tree
    images: tuple[FreeCell, ...]

    def at(self, cid: str) -> FreeCell:
        return self.images[self.source.index[cid]]

    def then(self, other: "KleisliMap") -> "KleisliMap":
        if self.target != other.source:
            raise OmegaError("maps are not composable")
        return KleisliMap(
            self.source, other.target,
            tuple(multiply(fmap(c, other.at)) for c in self.images),
        )

    def key(self) -> tuple:
        return tuple(c.sort_key() for c in self.images)


def kleisli_identity(t: Tree) -> KleisliMap:
    g = t.underlying
    return KleisliMap(t, t, tuple(unit(g, c) for c in g.ids))


def kleisli_of(f: GlobularMap, s: Tree, t: Tree) -> KleisliMap:
    """Image of a tree morphism under Theta_0 -> Theta_omega."""
    return KleisliMap(s, t, tuple(unit(t.underlying, f(c.id)) for c in s.underlying.cells))


def theta_hom(operad_tag: str, s: Tree, t: Tree) -> list:
    """Morphisms ``s -> t`` in Theta_0 (``"initial"``) or Theta_omega (``"terminal"``).

    Labels of free cells over a tree are monomorphisms, so ``omega(t)`` only
    involves shapes with at most ``|t|`` cells and the computation is exact.
    """
    if operad_tag == "initial":
        return hom_enumerate(s.underlying, t.underlying)
    if operad_tag != "terminal":
        raise OmegaError(f"unknown operad tag {operad_tag!r}")
    index = free_index(t.underlying, s.height, t.size)
    return [KleisliMap(s, t, lab) for lab in cells_over(s, index)]


# -- cartesianness of the multiplication -------------------------------------------

@lru_cache(maxsize=64)
def _bounded_double(x: GlobularSet, n: int, outer_bound: int, inner_bound: int) -> tuple[FreeCell, ...]:
    index = free_index(x, n, inner_bound)
    out = []
    for t in enumerate_trees(outer_bound, max_height=n):
        out += [FreeCell(t, lab, n) for lab in cells_over(t, index)]
    return tuple(out)


@lru_cache(maxsize=1024)
def _shape_maps(t: Tree, x: GlobularSet) -> tuple[tuple, ...]:
    return tuple(f.key() for f in hom_enumerate(t.underlying, x))


def cartesian_square_check(h: GlobularMap, n: int, outer_bound: int = 5, inner_bound: int = 5) -> Report:
    """Check elementwise that the naturality square of ``multiply`` along ``h`` is a pullback.

    Works in dimension ``n`` on the bounded parts of ``omega(omega(-))``; the
    bounds are shape bounds, which ``omega(omega(h))`` preserves, so each
    fibre is computed completely.
    """
    x, y = h.source, h.target
    rep = Report()
    omega_h = lambda c: fmap(c, h)
    fibres: dict[FreeCell, list[FreeCell]] = defaultdict(list)
    for d in _bounded_double(x, n, outer_bound, inner_bound):
        fibres[fmap(d, omega_h)].append(multiply(d))
    for d in _bounded_double(y, n, outer_bound, inner_bound):
        m = multiply(d)
        expected = {
            FreeCell(m.shape, key, n)
            for key in _shape_maps(m.shape, x)
            if tuple(h(v) for v in key) == m.label
        }
        got = fibres.get(d, [])
        if len(set(got)) != len(got):
            rep.add(f"{d.token()}: two cells of omega(omega(x)) over the same pair")
        if set(got) != expected:
            rep.add(f"{d.token()}: fibre has {len(set(got))} lifts, pullback has {len(expected)}")
    return rep


def free_algebra(t: Tree | GlobularSet, d: int, bound: int | None = None) -> tuple[GlobularSet, dict[str, FreeCell]]:
    """The free strict omega-category on ``t`` as a globular set, truncated above dimension ``d``."""
    from .globset import Cell

    g = t.underlying if isinstance(t, Tree) else t
    bound = len(g) if bound is None else bound
    by_token: dict[str, FreeCell] = {}
    cells = []
    for n in range(d + 1):
        for c in free_cells(g, n, bound).cells:
            tok = c.token()
            by_token[tok] = c
            if n == 0:
                cells.append(Cell(tok, 0))
            else:
                cells.append(Cell(tok, n, face(c, "source").token(), face(c, "target").token()))
    return GlobularSet(cells, complete_dim=d), by_token
