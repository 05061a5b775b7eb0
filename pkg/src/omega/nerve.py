"""Cellular sets over an operad, nerves of algebras, and categories of elements.

Morphisms ``S -> T`` of Theta_A are globular maps ``S -> A(T)``.  Because
tree morphisms are monic, ``A(T)`` only involves operations over trees no
larger than ``T``, so every hom-set here is computed exactly.  Cellular sets
are presheaves on the full subcategory of trees up to a size bound.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Iterator

from .freecat import FreeCell, fmap
from .globset import Cell, GlobularMap, GlobularSet, OmegaError, Report, globe, hom_enumerate, labellings
from .operad import ACell, AIndex, OperadData, a_multiply, a_unit, acell_face, collection_apply
from .tree import Tree, enumerate_trees, linear_tree, planar_json, subtrees


class NotEvaluated(OmegaError):
    """The requested tree lies outside the bound of the cellular set."""


# -- the category Theta_A ----------------------------------------------------------------

@dataclass(frozen=True)
class ThetaMap:
    """A morphism ``source -> target`` of Theta_A: one cell of ``A(target)`` per cell of ``source``."""

    source: Tree
    target: Tree
    images: tuple

    def at(self, cid: str) -> ACell:
        return self.images[self.source.index[cid]]

    def key(self) -> tuple:
        return (self.source.planar, self.target.planar, tuple(c.sort_key() for c in self.images))


class Theta:
    """Theta_A restricted to trees with at most ``bound`` cells and height within the truncation."""

    def __init__(self, o: OperadData, bound: int):
        self.o = o
        self.bound = bound
        self.trees = enumerate_trees(bound, max_height=o.coll.trunc_dim)
        self._index: dict[Tree, AIndex] = {}
        self._hom: dict[tuple[Tree, Tree], list[ThetaMap]] = {}

    def cells(self, t: Tree) -> AIndex:
        """Cells of ``A(t)``, indexed by boundary."""
        if t not in self._index:
            d = self.o.coll.trunc_dim
            cells = [c for n in range(d + 1) for c in collection_apply(self.o, t.underlying, n, t.size)]
            self._index[t] = AIndex(self.o, cells)
        return self._index[t]

    def hom(self, s: Tree, t: Tree) -> list[ThetaMap]:
        key = (s, t)
        if key not in self._hom:
            index = self.cells(t)
            cand = lambda c, a, b: index.by_boundary.get((c.dim, a, b), [])
            self._hom[key] = [
                ThetaMap(s, t, tuple(lab[c.id] for c in s.underlying.cells))
                for lab in labellings(s.underlying, cand)
            ]
        return self._hom[key]

    def compose(self, f: ThetaMap, g: ThetaMap) -> ThetaMap:
        """``f`` followed by ``g`` (Kleisli composition)."""
        if f.target != g.source:
            raise OmegaError("maps are not composable")
        out = []
        for c in f.images:
            inner = [g.at(x) for x in c.cell.label]
            m = a_multiply(self.o, c.op, inner)
            if m is None:
                raise OmegaError("composite leaves the operad's truncation")
            out.append(m)
        return ThetaMap(f.source, g.target, tuple(out))

    def identity(self, t: Tree) -> ThetaMap:
        g = t.underlying
        return ThetaMap(t, t, tuple(a_unit(self.o, g, c.id) for c in g.cells))

    def from_tree_map(self, f: GlobularMap, s: Tree, t: Tree) -> ThetaMap:
        """Image of a tree morphism under Theta_0 -> Theta_A."""
        return ThetaMap(s, t, tuple(a_unit(self.o, t.underlying, f(c.id)) for c in s.underlying.cells))

    def operation_map(self, a: str) -> ThetaMap:
        """The morphism ``globe(n) -> over(a)`` picking the operation ``a`` with the identity labelling."""
        t = self.o.over(a)
        n = self.o.dim(a)
        top = ACell(a, FreeCell(t, tuple(t.underlying.ids), n))
        g = linear_tree(n)
        images = {g.underlying.cells[-1].id: top}
        cur_s = cur_t = top
        for k in range(n - 1, -1, -1):
            cur_s, cur_t = acell_face(self.o, cur_s, "source"), acell_face(self.o, cur_s, "target")
            images[f"{'0.' * k}0"] = cur_s
            images[f"{'0.' * k}1"] = cur_t
        return ThetaMap(g, t, tuple(images[c.id] for c in g.underlying.cells))


# -- cellular sets ----------------------------------------------------------------------

@dataclass
class CellularSet:
    """A presheaf on ``theta``: a finite set per tree and a contravariant action."""

    theta: Theta
    values: dict[Tree, list]
    action: Callable[[ThetaMap, Hashable], Hashable]
    name: str = ""

    def at(self, t: Tree) -> list:
        if t not in self.values:
            raise NotEvaluated(f"tree {planar_json(t.planar)} is outside the bound")
        return self.values[t]

    def restrict(self, f: ThetaMap, y):
        return self.action(f, y)


def representable(theta: Theta, t: Tree) -> CellularSet:
    values = {r: theta.hom(r, t) for r in theta.trees}
    return CellularSet(theta, values, theta.compose, name=f"Theta[{planar_json(t.planar)}]")


def nerve_of_algebra(theta: Theta, x: GlobularSet, act: Callable[[ACell], str]) -> CellularSet:
    """``T -> Hom(T, x)``, acting by Kleisli maps followed by the algebra structure."""
    values = {r: [f.key() for f in hom_enumerate(r.underlying, x)] for r in theta.trees}

    def action(f: ThetaMap, y: tuple) -> tuple:
        lab = dict(zip(f.target.underlying.ids, y))
        return tuple(act(ACell(c.op, fmap(c.cell, lab.__getitem__))) for c in f.images)

    return CellularSet(theta, values, action, name="nerve")


def free_algebra(theta: Theta, t: Tree) -> tuple[GlobularSet, Callable[[ACell], str], dict[str, ACell]]:
    """The free algebra ``A(t)`` with its structure map, cells named by tokens."""
    o = theta.o
    index = theta.cells(t)
    by_token: dict[str, ACell] = {}
    cells = []
    for group in index.by_key.values():
        for c in group:
            by_token[token(c)] = c
    for tok, c in sorted(by_token.items(), key=lambda p: p[1].sort_key()):
        if c.dim == 0:
            cells.append(Cell(tok, 0))
        else:
            cells.append(Cell(tok, c.dim, token(acell_face(o, c, "source")), token(acell_face(o, c, "target"))))
    g = GlobularSet(cells)

    def act(c: ACell) -> str:
        inner = [by_token[v] for v in c.cell.label]
        m = a_multiply(o, c.op, inner)
        if m is None:
            raise OmegaError("structure map leaves the operad's truncation")
        return token(m)

    return g, act, by_token


def token(c: ACell) -> str:
    return f"{c.op}@{c.cell.token()}"


def functoriality_check(x: CellularSet) -> Report:
    rep = Report()
    th = x.theta
    for t in th.trees:
        ident = th.identity(t)
        for y in x.at(t):
            if x.restrict(ident, y) != y:
                rep.add(f"identity acts non-trivially at {planar_json(t.planar)}")
    for r in th.trees:
        for s in th.trees:
            fs = th.hom(r, s)
            if not fs:
                continue
            for t in th.trees:
                for g in th.hom(s, t):
                    for f in fs:
                        fg = th.compose(f, g)
                        for y in x.at(t):
                            if x.restrict(fg, y) != x.restrict(f, x.restrict(g, y)):
                                rep.add(
                                    f"action not functorial on {planar_json(r.planar)} -> "
                                    f"{planar_json(s.planar)} -> {planar_json(t.planar)}"
                                )
                                return rep
    return rep


# -- limits ----------------------------------------------------------------------------

def _compatible_families(
    x: CellularSet, index: list[tuple[Tree, ThetaMap]], arrows: list[tuple[int, int, ThetaMap]]
) -> Iterator[tuple]:
    """Families ``(y_i in x(index[i].tree))`` with ``restrict(h, y_j) = y_i`` for every arrow ``(i, j, h)``."""
    into: dict[int, list[tuple[int, ThetaMap]]] = defaultdict(list)
    for i, j, h in arrows:
        into[j].append((i, h))
    order = sorted(range(len(index)), key=lambda i: index[i][0])
    pos = {i: k for k, i in enumerate(order)}
    for i, j, _ in arrows:
        if pos[i] > pos[j]:
            raise OmegaError("diagram arrows must go from smaller to larger trees")
    chosen: dict[int, Hashable] = {}

    def go(k: int):
        if k == len(order):
            yield tuple(chosen[i] for i in range(len(index)))
            return
        j = order[k]
        for y in x.at(index[j][0]):
            if all(x.restrict(h, y) == chosen[i] for i, h in into[j]):
                chosen[j] = y
                yield from go(k + 1)
        chosen.pop(j, None)

    yield from go(0)


@dataclass(frozen=True)
class LimitMismatch:
    """Why ``x(t) -> lim`` is not bijective: two elements with one family, or a family with no element."""

    tree: Tree
    kind: str  # "not injective" | "not surjective"
    elements: tuple
    family: tuple
    legs: tuple  # the trees indexing the family

    def describe(self) -> str:
        legs = ", ".join(f"{planar_json(t.planar)}={_short(y)}" for t, y in zip(self.legs, self.family))
        head = f"at {planar_json(self.tree.planar)}: {self.kind}"
        if self.kind == "not injective":
            return f"{head}; elements {' and '.join(_short(y) for y in self.elements)} share the family ({legs})"
        return f"{head}; compatible family ({legs}) has no element"


def _comparison(x: CellularSet, t: Tree, index, arrows) -> tuple[bool, LimitMismatch | None]:
    """Test bijectivity of ``x(t) -> lim``; returns the least offending element or family."""
    legs = tuple(s for s, _ in index)
    image: dict[tuple, Hashable] = {}
    for y in x.at(t):
        fam = tuple(x.restrict(f, y) for _, f in index)
        if fam in image:
            return False, LimitMismatch(t, "not injective", (image[fam], y), fam, legs)
        image[fam] = y
    for fam in _compatible_families(x, index, arrows):
        if fam not in image:
            return False, LimitMismatch(t, "not surjective", (), fam, legs)
    return True, None


def globe_diagram(theta: Theta, t: Tree) -> tuple[list, list]:
    """All globes over ``t`` and all factorizations between them, as Theta_A morphisms."""
    elems: list[tuple[int, GlobularMap]] = []
    for n in range(t.height + 1):
        for f in hom_enumerate(globe(n), t.underlying):
            elems.append((n, f))
    index, arrows = [], []
    for n, f in elems:
        g = linear_tree(n)
        index.append((g, theta.from_tree_map(_retarget(f, g, t), g, t)))
    for i, (m, fi) in enumerate(elems):
        for j, (n, fj) in enumerate(elems):
            if m > n or i == j:
                continue
            for h in hom_enumerate(globe(m), globe(n)):
                if h.then(fj) == fi:
                    gm, gn = linear_tree(m), linear_tree(n)
                    arrows.append((i, j, theta.from_tree_map(_retarget(h, gm, gn), gm, gn)))
    return index, arrows


def _retarget(f: GlobularMap, s: Tree, t: Tree) -> GlobularMap:
    """Reinterpret a map between globes/trees as a map between canonical trees (same ids)."""
    return GlobularMap(s.underlying, t.underlying, dict(f.assignment))


def segal_check(x: CellularSet, t: Tree) -> tuple[bool, LimitMismatch | None]:
    """Is ``x(t)`` the limit of the values of ``x`` on the globes over ``t``?"""
    x.at(t)
    index, arrows = globe_diagram(x.theta, t)
    return _comparison(x, t, index, arrows)


def boundary_diagram(theta: Theta, t: Tree) -> tuple[list, list]:
    subs = subtrees(t, proper_only=True)
    index = [(s, theta.from_tree_map(f, s, t)) for s, f in subs]
    arrows = []
    for i, (si, fi) in enumerate(subs):
        for j, (sj, fj) in enumerate(subs):
            if i == j or not fi.image() <= fj.image():
                continue
            inv = {v: k for k, v in fj.assignment.items()}
            h = GlobularMap(si.underlying, sj.underlying, {c: inv[fi(c)] for c in si.underlying.ids})
            arrows.append((i, j, theta.from_tree_map(h, si, sj)))
    return index, arrows


def boundary_extension_check(x: CellularSet, t: Tree) -> tuple[bool, LimitMismatch | None]:
    """Do maps out of the boundary of ``t`` extend uniquely to ``t``?  Only for non-linear ``t``."""
    if t.linear:
        raise OmegaError("boundary extension is only asserted for non-linear trees")
    x.at(t)
    index, arrows = boundary_diagram(x.theta, t)
    return _comparison(x, t, index, arrows)


# -- reconstruction from globe values ----------------------------------------------------

def underlying_graph(x: CellularSet) -> GlobularSet:
    """The globular set of values on globes, faces by restriction."""
    th = x.theta
    cells = []
    names: dict[tuple[int, Hashable], str] = {}
    for n in range(th.o.coll.trunc_dim + 1):
        g = linear_tree(n)
        if g not in x.values:
            break
        for k, y in enumerate(x.at(g)):
            names[(n, y)] = f"{n}.{k}"
    for n in range(th.o.coll.trunc_dim + 1):
        g = linear_tree(n)
        if g not in x.values:
            break
        for y in x.at(g):
            if n == 0:
                cells.append(Cell(names[(0, y)], 0))
                continue
            low = linear_tree(n - 1)
            s = x.restrict(th.from_tree_map(_face_map(n, 0), low, g), y)
            t = x.restrict(th.from_tree_map(_face_map(n, 1), low, g), y)
            cells.append(Cell(names[(n, y)], n, names[(n - 1, s)], names[(n - 1, t)]))
    return GlobularSet(cells)


def _face_map(n: int, side: int) -> GlobularMap:
    low, g = linear_tree(n - 1), linear_tree(n)
    top = low.underlying.cells[-1].id if n > 1 else "0"
    a = {c.id: c.id for c in low.underlying.cells if c.id != top}
    a[top] = f"{'0.' * (n - 1)}{side}"
    return GlobularMap(low.underlying, g.underlying, a)


def reconstruct_algebra(x: CellularSet) -> tuple[GlobularSet, Callable[[ACell], str]]:
    """An algebra whose nerve is ``x``, assuming ``x`` satisfies the Segal condition.

    The action of an operation ``a`` on a labelling of ``over(a)`` is the
    restriction, along the morphism picking ``a``, of the unique element of
    ``x(over(a))`` with those globe values.
    """
    th = x.theta
    g = underlying_graph(x)
    names = {}
    for n in range(th.o.coll.trunc_dim + 1):
        lt = linear_tree(n)
        if lt in x.values:
            for k, y in enumerate(x.at(lt)):
                names[(n, y)] = f"{n}.{k}"
    lookup: dict[Tree, dict[tuple, Hashable]] = {}

    def element(t: Tree, labels: tuple) -> Hashable:
        if t not in lookup:
            table = {}
            for y in x.at(t):
                vals = []
                for c in t.underlying.cells:
                    f = _cell_map(th, t, c)
                    vals.append(names[(c.dim, x.restrict(f, y))])
                table[tuple(vals)] = y
            lookup[t] = table
        return lookup[t][labels]

    def act(c: ACell) -> str:
        t = c.cell.shape
        y = element(t, tuple(c.cell.label))
        z = x.restrict(th.operation_map(c.op), y)
        return names[(c.dim, z)]

    return g, act


def _cell_map(th: Theta, t: Tree, c) -> ThetaMap:
    """The Theta_0 map from the globe of ``c``'s dimension onto the cell ``c`` of ``t``."""
    n = c.dim
    gl = linear_tree(n)
    assign = {}
    cur = c.id
    assign[gl.underlying.cells[-1].id] = cur
    s = tg = cur
    for k in range(n - 1, -1, -1):
        s, tg = t.underlying.src(s), t.underlying.tgt(s)
        assign[f"{'0.' * k}0"] = s
        assign[f"{'0.' * k}1"] = tg
    return th.from_tree_map(GlobularMap(gl.underlying, t.underlying, assign), gl, t)


# -- natural transformations --------------------------------------------------------------

def natural_transformations(x: CellularSet, y: CellularSet, limit: int | None = None) -> list[dict]:
    """All natural transformations ``x -> y``, by propagated backtracking over elements of ``x``."""
    th = x.theta
    trees = sorted(th.trees, reverse=True)
    elems = [(t, v) for t in trees for v in x.at(t)]
    into: dict[Tree, list[ThetaMap]] = {t: [f for s in th.trees for f in th.hom(s, t)] for t in th.trees}
    out: list[dict] = []

    def propagate(eta: dict, t: Tree, v, w) -> bool:
        stack = [(t, v, w)]
        while stack:
            t, v, w = stack.pop()
            if (t, v) in eta:
                if eta[(t, v)] != w:
                    return False
                continue
            eta[(t, v)] = w
            for f in into[t]:
                stack.append((f.source, x.restrict(f, v), y.restrict(f, w)))
        return True

    def go(k: int, eta: dict):
        if limit is not None and len(out) >= limit:
            return
        while k < len(elems) and elems[k] in eta:
            k += 1
        if k == len(elems):
            out.append(dict(eta))
            return
        t, v = elems[k]
        for w in y.at(t):
            trial = dict(eta)
            if propagate(trial, t, v, w):
                go(k + 1, trial)

    go(0, {})
    return out


def nerve_fullness(theta: Theta, s: Tree, t: Tree) -> tuple[bool, int, int]:
    """Compare algebra maps ``A(s) -> A(t)`` with maps of their nerves.

    Returns (bijective, number of algebra maps, number of natural transformations).
    """
    xs, act_s, tok_s = free_algebra(theta, s)
    xt, act_t, tok_t = free_algebra(theta, t)
    ns, nt = nerve_of_algebra(theta, xs, act_s), nerve_of_algebra(theta, xt, act_t)
    maps = theta.hom(s, t)
    nats = natural_transformations(ns, nt)
    induced = set()
    for f in maps:
        # the algebra map A(s) -> A(t) extending f, applied to every nerve element
        def alg(cell_tok: str, f=f) -> str:
            c = tok_s[cell_tok]
            return act_t(ACell(c.op, fmap(c.cell, lambda v: token(f.at(v)))))

        eta = tuple(
            (r.planar, v, tuple(alg(z) for z in v)) for r in theta.trees for v in ns.at(r)
        )
        induced.add(eta)
    nat_keys = {
        tuple((r.planar, v, eta[(r, v)]) for r in theta.trees for v in ns.at(r)) for eta in nats
    }
    return induced == nat_keys and len(induced) == len(maps), len(maps), len(nats)


# -- categories of elements ---------------------------------------------------------------

@dataclass
class SmallCategory:
    objects: list
    morphisms: list[tuple[Hashable, Hashable, Hashable]]  # (id, source, target)
    compose: dict[tuple[Hashable, Hashable], Hashable]  # (f, g) -> f then g
    identities: dict[Hashable, Hashable]
    labels: dict[Hashable, str] = field(default_factory=dict)

    def source(self, m) -> Hashable:
        return self._ends[m][0]

    def target(self, m) -> Hashable:
        return self._ends[m][1]

    @property
    def _ends(self) -> dict:
        return {m: (s, t) for m, s, t in self.morphisms}

    def check(self) -> Report:
        rep = Report()
        ends = self._ends
        out_of: dict = defaultdict(list)
        for m, s, t in self.morphisms:
            out_of[s].append(m)
        for o in self.objects:
            i = self.identities.get(o)
            if i is None or ends.get(i) != (o, o):
                rep.add(f"object {o!r} has no identity")
        for f, (s, t) in ends.items():
            for g in out_of[t]:
                h = self.compose.get((f, g))
                if h is None or ends.get(h) != (s, ends[g][1]):
                    rep.add(f"composite of {f!r} and {g!r} missing or misplaced")
                    continue
            if self.compose.get((self.identities[s], f)) != f or self.compose.get((f, self.identities[t])) != f:
                rep.add(f"unit law fails at {f!r}")
        for f, (s, t) in ends.items():
            for g in out_of[t]:
                for h in out_of[ends[g][1]]:
                    if self.compose[(self.compose[(f, g)], h)] != self.compose[(f, self.compose[(g, h)])]:
                        rep.add(f"associativity fails at {f!r}, {g!r}, {h!r}")
        return rep


def category_of_elements(x: CellularSet) -> tuple[SmallCategory, dict]:
    """Objects ``(t, y)``, morphisms ``f: (s, x(f)(y)) -> (t, y)``; also returns the projection to Theta."""
    th = x.theta
    objects = [(t, y) for t in th.trees for y in x.at(t)]
    morphisms = []
    by_key: dict[tuple, int] = {}
    out_of: dict = defaultdict(list)
    projection: dict[int, ThetaMap] = {}
    for t, y in objects:
        for s in th.trees:
            for f in th.hom(s, t):
                src = (s, x.restrict(f, y))
                mid = len(morphisms)
                morphisms.append((mid, src, (t, y)))
                by_key[(f.key(), (t, y))] = mid
                projection[mid] = f
                out_of[src].append(mid)
    identities = {(t, y): by_key[(th.identity(t).key(), (t, y))] for t, y in objects}
    compose = {}
    for f_id, src, mid in morphisms:
        for g_id in out_of[mid]:
            g = projection[g_id]
            h = th.compose(projection[f_id], g)
            compose[(f_id, g_id)] = by_key[(h.key(), morphisms[g_id][2])]
    labels = {o: f"{planar_json(o[0].planar)}:{_short(o[1])}" for o in objects}
    return SmallCategory(objects, morphisms, compose, identities, labels), projection


def _short(y) -> str:
    if isinstance(y, ThetaMap):
        return ",".join(c.cell.token() if c.cell.shape.size > 1 else str(c.cell.label[-1]) for c in y.images)
    if isinstance(y, tuple):
        return "(" + ",".join(_short(v) for v in y) + ")"
    return str(y)


@dataclass
class ComplexStats:
    counts: list[int]
    euler: int
    partial: bool
    has_terminal: bool
    terminal: Hashable | None


def nerve_complex_stats(c: SmallCategory, max_simplex_dim: int = 8) -> ComplexStats:
    """Non-degenerate simplices of the nerve (chains of non-identity arrows) and their Euler characteristic."""
    ident = set(c.identities.values())
    arrows_into: dict = defaultdict(list)
    for m, s, t in c.morphisms:
        if m not in ident:
            arrows_into[t].append(s)
    # chains of length k ending at each object
    ending = {o: 1 for o in c.objects}
    counts = [len(c.objects)]
    for _ in range(max_simplex_dim + 1):
        ending = {o: sum(ending[s] for s in arrows_into[o]) for o in c.objects}
        counts.append(sum(ending.values()))
    partial = counts[-1] != 0
    counts = counts[:-1]
    while len(counts) > 1 and counts[-1] == 0:
        counts.pop()
    euler = sum((-1) ** k * n for k, n in enumerate(counts))
    terminal = _terminal_object(c)
    return ComplexStats(counts, euler, partial, terminal is not None, terminal)


def _terminal_object(c: SmallCategory):
    into: dict = defaultdict(lambda: defaultdict(int))
    for _, s, t in c.morphisms:
        into[t][s] += 1
    for o in c.objects:
        if all(into[o][s] == 1 for s in c.objects):
            return o
    return None


def to_dot(c: SmallCategory, name: str = "elements") -> str:
    """DOT rendering: one node per object, one edge per non-identity morphism."""
    ident = set(c.identities.values())
    ids = {o: f"n{i}" for i, o in enumerate(c.objects)}
    lines = [f"digraph {name} {{"]
    for o in c.objects:
        label = c.labels.get(o, str(o)).replace('"', "'")
        lines.append(f'  {ids[o]} [label="{label}"];')
    for m, s, t in c.morphisms:
        if m not in ident:
            lines.append(f"  {ids[s]} -> {ids[t]};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def discrete_category(n: int) -> SmallCategory:
    objs = list(range(n))
    return SmallCategory(objs, [(("id", o), o, o) for o in objs],
                         {(("id", o), ("id", o)): ("id", o) for o in objs}, {o: ("id", o) for o in objs})
