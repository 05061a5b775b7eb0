"""A bounded construction of the initial operad with contractions.

Operations are normal-form terms: a unit, a contraction generator (a chosen
lift for one lifting square), or a composite whose outer operation is a
generator and whose labels are normal terms, not all units.  Composition of
normal forms pushes labels down into the leaves, which is associativity and
the unit laws at once.

The size of a term is its number of generator nodes: a generator counts one
(its faces are not children), a composite counts its outer generator plus
the sizes of the labels on the peaks of its tree, and units count zero.
"""
from __future__ import annotations

from collections import Counter, defaultdict
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

from .freecat import paste_shape
from .globset import Cell, GlobularSet, OmegaError, Report, validate
from .operad import Collection, OperadData, Square, fillers
from .tree import Tree, enumerate_trees, face_tree, linear_tree, planar_json


class MalformedTermError(OmegaError):
    pass


class NonParallelError(OmegaError):
    pass


class FillerNotFound(OmegaError):
    pass


# -- terms ----------------------------------------------------------------------------

class KTerm:
    __slots__ = ("_h",)

    dim: int

    def __hash__(self) -> int:
        return self._h

    def __lt__(self, other: "KTerm") -> bool:
        return sort_key(self) < sort_key(other)


class Unit(KTerm):
    __slots__ = ("dim",)

    def __init__(self, dim: int):
        self.dim = dim
        self._h = hash(("u", dim))

    def __eq__(self, other):
        return isinstance(other, Unit) and other.dim == self.dim

    __hash__ = KTerm.__hash__

    def __repr__(self):
        return f"Unit({self.dim})"


class Contraction(KTerm):
    """The chosen lift of the square with faces ``src``, ``tgt`` over ``tree``."""

    __slots__ = ("dim", "tree", "src", "tgt")

    def __init__(self, tree: Tree, src: KTerm, tgt: KTerm):
        self.dim = src.dim + 1
        self.tree, self.src, self.tgt = tree, src, tgt
        self._h = hash(("c", tree, src, tgt))

    def __eq__(self, other):
        return self is other or (
            isinstance(other, Contraction) and self._h == other._h
            and self.tree == other.tree and self.src == other.src and self.tgt == other.tgt
        )

    __hash__ = KTerm.__hash__

    def __repr__(self):
        return f"Contraction({planar_json(self.tree.planar)}, {self.src!r}, {self.tgt!r})"


class Composite(KTerm):
    """``outer`` composed with ``inner``, one term per cell of ``over(outer)`` in canonical order."""

    __slots__ = ("outer", "inner", "dim", "_over")

    def __init__(self, outer: KTerm, inner: Sequence[KTerm]):
        self.outer, self.inner, self.dim = outer, tuple(inner), outer.dim
        self._over = None
        self._h = hash(("m", outer, self.inner))

    def __eq__(self, other):
        return self is other or (
            isinstance(other, Composite) and self._h == other._h
            and self.outer == other.outer and self.inner == other.inner
        )

    __hash__ = KTerm.__hash__

    def __repr__(self):
        return f"Composite({self.outer!r}, {list(self.inner)!r})"


def unit(n: int) -> Unit:
    return Unit(n)


def over(t: KTerm) -> Tree:
    if isinstance(t, Unit):
        return linear_tree(t.dim)
    if isinstance(t, Contraction):
        return t.tree
    if t._over is None:
        shape = over(t.outer)
        t._over = paste_shape(shape, tuple(over(x) for x in t.inner))[0]
    return t._over


def face(t: KTerm, side: str) -> KTerm:
    if t.dim == 0:
        raise OmegaError("0-dimensional terms have no faces")
    if isinstance(t, Unit):
        return Unit(t.dim - 1)
    if isinstance(t, Contraction):
        return t.src if side in ("source", "src") else t.tgt
    shape = over(t.outer)
    low, sigma, tau = face_tree(shape, t.dim)
    emb = sigma if side in ("source", "src") else tau
    labels = tuple(t.inner[shape.index[emb(c.id)]] for c in low.underlying.cells)
    return compose(face(t.outer, side), labels)


def size(t: KTerm) -> int:
    if isinstance(t, Unit):
        return 0
    if isinstance(t, Contraction):
        return 1
    shape = over(t.outer)
    peaks = shape.peaks
    return size(t.outer) + sum(size(t.inner[shape.index[p]]) for p in peaks)


def sort_key(t: KTerm) -> tuple:
    return (t.dim, size(t), over(t).size, over(t).planar, encode(t))


def encode(t: KTerm) -> str:
    """A readable, unambiguous string form of a term."""
    if isinstance(t, Unit):
        return f"u{t.dim}"
    if isinstance(t, Contraction):
        return f"k{t.dim}{planar_json(t.tree.planar)}({encode(t.src)},{encode(t.tgt)})"
    return f"{encode(t.outer)}<{','.join(encode(x) for x in t.inner)}>"


def is_normal(t: KTerm) -> bool:
    if isinstance(t, Unit):
        return True
    if isinstance(t, Contraction):
        return is_normal(t.src) and is_normal(t.tgt)
    return (
        isinstance(t.outer, Contraction)
        and is_normal(t.outer)
        and all(is_normal(x) for x in t.inner)
        and not all(isinstance(x, Unit) for x in t.inner)
    )


# -- composition and normal forms ------------------------------------------------------

def compose(x: KTerm, ys: Sequence[KTerm]) -> KTerm:
    """Composite of the normal term ``x`` with normal labels ``ys`` on the cells of ``over(x)``."""
    ys = tuple(ys)
    if isinstance(x, Unit):
        return ys[-1]
    if isinstance(x, Contraction):
        if all(isinstance(y, Unit) for y in ys):
            return x
        return Composite(x, ys)
    if not isinstance(x, Composite):
        raise MalformedTermError(f"not a term: {x!r}")
    shape = over(x.outer)
    _, legs = paste_shape(shape, tuple(over(l) for l in x.inner))
    inner = tuple(compose(l, tuple(ys[r] for r in leg)) for l, leg in zip(x.inner, legs))
    return compose(x.outer, inner)


def _check_composite(t: Composite) -> None:
    shape = over(t.outer)
    if len(t.inner) != shape.size:
        raise MalformedTermError(f"{len(t.inner)} labels for a tree with {shape.size} cells")
    for c, x in zip(shape.underlying.cells, t.inner):
        if x.dim != c.dim:
            raise MalformedTermError(f"label of dimension {x.dim} on a cell of dimension {c.dim}")
        if c.dim:
            lab = dict(zip(shape.underlying.ids, t.inner))
            if normalize(face(x, "source")) != normalize(lab[c.src]) or normalize(face(x, "target")) != normalize(lab[c.tgt]):
                raise MalformedTermError("labels do not form a globular map")


def normalize(t: KTerm) -> KTerm:
    """Flatten nested composites and absorb unit labels."""
    if isinstance(t, Unit):
        return t
    if isinstance(t, Contraction):
        s, g = normalize(t.src), normalize(t.tgt)
        return t if (s is t.src and g is t.tgt) else Contraction(t.tree, s, g)
    if not isinstance(t, Composite):
        raise MalformedTermError(f"not a term: {t!r}")
    outer = normalize(t.outer)
    inner = tuple(normalize(x) for x in t.inner)
    _check_composite(Composite(outer, inner))
    return compose(outer, inner)


def contract_pair(a: KTerm, b: KTerm, tau: Tree) -> Contraction:
    """The generator filling the square with faces ``a``, ``b`` over ``tau``."""
    if a.dim != b.dim:
        raise NonParallelError("faces of different dimensions")
    if a.dim and (face(a, "source") != face(b, "source") or face(a, "target") != face(b, "target")):
        raise NonParallelError("faces are not parallel")
    n = a.dim + 1
    if tau.height > n:
        raise NonParallelError(f"tree of height {tau.height} in dimension {n}")
    low = face_tree(tau, n)[0]
    if over(a) != low or over(b) != low:
        raise NonParallelError("faces do not lie over the truncation of the tree")
    return Contraction(tau, a, b)


# -- the bounded construction ----------------------------------------------------------

@dataclass
class KBuild:
    operad: OperadData
    max_dim: int
    max_tree_cells: int
    max_term_size: int
    ids: dict[KTerm, str]
    inventory: dict[int, dict[str, Counter]]
    frontier: list[tuple[int, str, int]] = field(default_factory=list)

    def term(self, cid: str) -> KTerm:
        if cid.startswith("u"):
            return Unit(int(cid[1:]))
        if cid in self._terms:
            return self._terms[cid]
        # generators of the top dimension are rebuilt from their cell
        total = self.operad.total
        return Contraction(self.operad.over(cid), self.term(total.src(cid)), self.term(total.tgt(cid)))

    def id_of(self, t: KTerm) -> str | None:
        if isinstance(t, Unit):
            return f"u{t.dim}" if t.dim <= self.max_dim else None
        hit = self.ids.get(t)
        if hit is not None or not isinstance(t, Contraction) or t.dim != self.max_dim:
            return hit
        a, b = self.ids.get(t.src), self.ids.get(t.tgt)
        if a is None or b is None:
            return None
        found = [
            c for c in self.operad.total.with_boundary(t.dim, a, b)
            if c.startswith("g") and self.operad.over(c) == t.tree
        ]
        return found[0] if found else None

    _terms: dict[str, KTerm] = field(default_factory=dict)


def _bounded_labellings(shape: Tree, index, budget: int, exact: bool) -> Iterator[tuple]:
    """Labellings of ``shape`` by terms drawn from ``index[(dim, src, tgt)]``.

    Sizes on the peaks add up to ``budget`` (or at most ``budget``).
    """
    cells = shape.underlying.cells
    peaks = set(shape.peaks)
    pos = shape.index
    lab: list = [None] * len(cells)

    def go(i: int, used: int):
        if i == len(cells):
            if not exact or used == budget:
                yield tuple(lab)
            return
        c = cells[i]
        key = (c.dim, None, None) if c.dim == 0 else (c.dim, lab[pos[c.src]], lab[pos[c.tgt]])
        for t, s in index.get(key, ()):
            if c.id in peaks:
                if used + s > budget:
                    break
                lab[i] = t
                yield from go(i + 1, used + s)
            else:
                lab[i] = t
                yield from go(i + 1, used)
        lab[i] = None

    yield from go(0, 0)


class _Index:
    """Terms keyed by (dim, source, target), each list sorted by size."""

    def __init__(self):
        self.data: dict[tuple, list[tuple[KTerm, int]]] = defaultdict(list)

    def add(self, t: KTerm) -> None:
        key = (t.dim, None, None) if t.dim == 0 else (t.dim, face(t, "source"), face(t, "target"))
        self.data[key].append((t, size(t)))
        self.data[key].sort(key=lambda p: p[1])

    def get(self, key, default=()):
        return self.data.get(key, default)


def build_K(max_dim: int, max_tree_cells: int, max_term_size: int) -> KBuild:
    """Cells of the initial operad with contractions, bounded in dimension, tree size and term size.

    Dimension by dimension: the cells of dimension ``n - 1`` are closed under
    composition within the bounds, then every parallel pair of them gets a
    fresh generator over every admissible tree.  The top dimension holds its
    unit and its generators only.
    """
    if min(max_dim, max_tree_cells, max_term_size) < 1:
        raise OmegaError("bounds must be at least 1")
    terms: dict[int, list[KTerm]] = {0: [Unit(0)]}
    index = _Index()
    index.add(Unit(0))
    ids: dict[KTerm, str] = {Unit(0): "u0"}
    inventory: dict[int, dict[str, Counter]] = defaultdict(lambda: defaultdict(Counter))
    inventory[0][planar_json(())]["terms"] += 1
    frontier: list[tuple[int, str, int]] = []
    cells = [Cell("u0", 0)]
    over_of: dict[str, Tree] = {"u0": linear_tree(0)}
    stored: dict[str, KTerm] = {}
    top_gens = 0

    for n in range(1, max_dim + 1):
        trees = enumerate_trees(max_tree_cells, max_height=n)
        by_low: dict[Tree, list[Tree]] = defaultdict(list)
        for t in trees:
            by_low[face_tree(t, n)[0]].append(t)
        groups: dict[tuple, list[KTerm]] = defaultdict(list)
        for a in terms[n - 1]:
            key = (over(a),) if n == 1 else (over(a), face(a, "source"), face(a, "target"))
            groups[key].append(a)

        top = n == max_dim
        layer: list[KTerm] = [Unit(n)]
        gens: list[Contraction] = []
        cells.append(Cell(f"u{n}", n, f"u{n - 1}", f"u{n - 1}"))
        over_of[f"u{n}"] = linear_tree(n)
        ids[Unit(n)] = f"u{n}"
        inventory[n][planar_json(linear_tree(n).planar)]["terms"] += 1
        for key, members in groups.items():
            for tau in by_low.get(key[0], []):
                tj = planar_json(tau.planar)
                for a in members:
                    ia = ids[a]
                    for b in members:
                        gid = f"g{n}.{len(gens) if not top else top_gens}"
                        cells.append(Cell(gid, n, ia, ids[b]))
                        over_of[gid] = tau
                        inventory[n][tj]["generators"] += 1
                        inventory[n][tj]["terms"] += 1
                        if top:
                            top_gens += 1
                        else:
                            g = Contraction(tau, a, b)
                            gens.append(g)
                            ids[g] = gid
                            stored[gid] = g
        if top:
            break
        layer += gens
        index.add(Unit(n))
        for g in gens:
            index.add(g)
        # close dimension n under composition, stratified by size
        count = 0
        for s in range(2, max_term_size + 1):
            fresh = []
            for g in gens:
                shape = g.tree
                for lab in _bounded_labellings(shape, index, s - 1, exact=True):
                    t = Composite(g, lab)
                    result = over(t)
                    if result.size > max_tree_cells:
                        frontier.append((n, planar_json(result.planar), s))
                        continue
                    fresh.append(t)
            for t in fresh:
                tid = f"t{n}.{count}"
                count += 1
                ids[t] = tid
                stored[tid] = t
                cells.append(Cell(tid, n, ids[face(t, "source")], ids[face(t, "target")]))
                over_of[tid] = over(t)
                inventory[n][planar_json(over(t).planar)]["terms"] += 1
                index.add(t)
            layer += fresh
        terms[n] = layer

    total = GlobularSet(cells)
    coll = Collection(total, over_of, max_dim, max_tree_cells)
    op = OperadData(coll, {n: f"u{n}" for n in range(max_dim + 1)}, {}, False, name="K")
    kb = KBuild(op, max_dim, max_tree_cells, max_term_size, ids,
                {n: dict(v) for n, v in inventory.items()}, _frontier_summary(frontier))
    kb._terms = stored
    op.mult = _KMult(kb)
    op.lifts = _KLifts(kb)
    return kb


def _frontier_summary(frontier) -> list[tuple[int, str, int]]:
    """Candidates discarded by the tree bound, as (dim, tree, count) sorted."""
    c = Counter((n, t) for n, t, _ in frontier)
    return sorted((n, t, k) for (n, t), k in c.items())


class _KMult(Mapping):
    """Composition in K, defined whenever the normal form lies in the truncation."""

    def __init__(self, kb: KBuild):
        self.kb = kb

    def __getitem__(self, key):
        a, labels = key
        kb = self.kb
        total = kb.operad.total
        if a not in total or any(l not in total for l in labels):
            raise KeyError(key)
        x = kb.term(a)
        shape = over(x)
        if len(labels) != shape.size:
            raise KeyError(key)
        ys = tuple(kb.term(l) for l in labels)
        lab = dict(zip(shape.underlying.ids, labels))
        for c, l in zip(shape.underlying.cells, labels):
            if total.dim(l) != c.dim or (c.dim and (total.src(l), total.tgt(l)) != (lab[c.src], lab[c.tgt])):
                raise KeyError(key)
        r = kb.id_of(compose(x, ys))
        if r is None:
            raise KeyError(key)
        return r

    def __iter__(self) -> Iterator[tuple[str, tuple[str, ...]]]:
        for key, _ in self.items():
            yield key

    def items(self) -> Iterator[tuple[tuple[str, tuple[str, ...]], str]]:
        """Every composable key whose composite lies in the truncation, with its composite."""
        kb = self.kb
        op = kb.operad
        total = op.total
        index = _Index()
        for cid in total.ids:
            if total.dim(cid) < kb.max_dim:
                index.add(kb.term(cid))
        for cid in total.ids:
            n = total.dim(cid)
            if n == kb.max_dim:
                # the top dimension is not closed under composition
                if cid.startswith("u"):
                    for r in total.cells_of_dim(n):
                        yield (cid, tuple(op.globe_labels(r))), r
                else:
                    shape = op.over(cid)
                    yield (cid, tuple(f"u{c.dim}" for c in shape.underlying.cells)), cid
                continue
            x = kb.term(cid)
            budget = kb.max_term_size - size(x)
            for lab in _bounded_labellings(over(x), index, budget, exact=False):
                r = kb.id_of(compose(x, lab))
                if r is not None:
                    yield (cid, tuple(kb.ids[t] for t in lab)), r

    def __contains__(self, key) -> bool:
        try:
            self[key]
        except KeyError:
            return False
        return True

    def __len__(self) -> int:
        return sum(1 for _ in self)


class _KLifts(Mapping):
    """The chosen lift of each square, keyed by ``(dim, src, tgt, tree)``."""

    def __init__(self, kb: KBuild):
        self.kb = kb

    def __getitem__(self, key):
        n, a, b, tau = key
        kb = self.kb
        if n == 0:
            return "u0"
        try:
            gen = Contraction(tau, kb.term(a), kb.term(b))
        except KeyError:
            raise KeyError(key) from None
        r = kb.id_of(gen)
        if r is None:
            raise KeyError(key)
        return r

    def __iter__(self):
        total = self.kb.operad.total
        for c in total:
            if c.id.startswith("g"):
                yield (c.dim, c.src, c.tgt, self.kb.operad.over(c.id))

    def __len__(self):
        return sum(1 for _ in self)


# -- weak initiality ---------------------------------------------------------------------

def least_filler(o: OperadData, sq: Square) -> str | None:
    found = sorted(fillers(o, sq))
    return found[0] if found else None


def weak_initial_map(
    kb: KBuild,
    o: OperadData,
    choose: Callable[[OperadData, Square], str | None] = least_filler,
) -> tuple[dict[str, str], Report]:
    """A morphism from the K truncation to the contractible operad ``o``.

    Units go to units, every generator to a filler of the image of its
    square (by ``choose``), composites to composites of the images.
    """
    rep = Report()
    if o.coll.trunc_dim < kb.max_dim:
        rep.add(f"target is truncated at dimension {o.coll.trunc_dim}")
        return {}, rep
    phi: dict[str, str] = {}
    total = kb.operad.total
    for c in total:
        if c.id.startswith("u"):
            phi[c.id] = o.unit[c.dim]
            continue
        t = kb.term(c.id)
        if isinstance(t, Contraction):
            sq = Square.make(c.dim, phi[c.src], phi[c.tgt], t.tree)
            v = choose(o, sq)
            if v is None:
                raise FillerNotFound(f"no filler for the image square: {sq.describe()}")
            phi[c.id] = v
        else:
            v = o.compose(phi[kb.ids[t.outer]], [phi[kb.ids[x]] for x in t.inner])
            if v is None:
                rep.add(f"{c.id}: composite of images lies outside the target's truncation")
                continue
            phi[c.id] = v
    return phi, rep


def census(kb: KBuild, n: int) -> dict[str, tuple[int, int]]:
    """Per tree: (generators, terms) in dimension ``n``."""
    return {t: (c.get("generators", 0), c.get("terms", 0)) for t, c in sorted(kb.inventory.get(n, {}).items())}


def inclusion(small: KBuild, big: KBuild) -> dict[str, str] | None:
    """The inclusion of a smaller truncation of K into a larger one, if every term is present."""
    out = {}
    for cid in small.operad.total.ids:
        r = big.id_of(small.term(cid))
        if r is None:
            return None
        out[cid] = r
    return out
