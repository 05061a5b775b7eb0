"""Exhaustive law checks for the free strict omega-category monad, shared by unit and acceptance tests."""
from __future__ import annotations

from collections import defaultdict

from omega.freecat import (
    FreeCell, FreeIndex, cells_over, compose_along, face, fmap, free_cells, multiply, unit, unit_free,
)
from omega.globset import GlobularSet
from omega.tree import enumerate_trees


def all_free_cells(x: GlobularSet, bound: int, max_dim: int) -> list[FreeCell]:
    return [c for n in range(max_dim + 1) for c in free_cells(x, n, bound).cells]


def unit_law_failures(x: GlobularSet, cells) -> list[str]:
    bad = []
    for c in cells:
        if multiply(unit_free(c)) != c:
            bad.append(f"left unit at {c.token()}")
        if multiply(fmap(c, lambda v: unit(x, v))) != c:
            bad.append(f"right unit at {c.token()}")
    return bad


def globularity_failures(cells) -> list[str]:
    bad = []
    for c in cells:
        if c.dim < 2:
            continue
        s, t = face(c, "source"), face(c, "target")
        if face(s, "source") != face(t, "source") or face(s, "target") != face(t, "target"):
            bad.append(f"faces of {c.token()}")
    return bad


def doubles(x: GlobularSet, max_dim: int, outer: int, inner: int) -> list[FreeCell]:
    """Cells of omega(omega(x)) with bounded outer and inner shapes, dimensions up to ``max_dim``."""
    index = FreeIndex(all_free_cells(x, inner, max_dim))
    return [
        FreeCell(t, lab, n)
        for n in range(max_dim + 1)
        for t in enumerate_trees(outer, max_height=n)
        for lab in cells_over(t, index)
    ]


def associativity_failures(x: GlobularSet, max_dim: int, bounds=(3, 3, 5)) -> tuple[int, list[str]]:
    """multiply . omega(multiply) = multiply . multiply on bounded cells of omega^3(x)."""
    o3, o2, o1 = bounds
    index = FreeIndex(doubles(x, max_dim, o2, o1))
    checked, bad = 0, []
    for n in range(max_dim + 1):
        for t in enumerate_trees(o3, max_height=n):
            for lab in cells_over(t, index):
                d = FreeCell(t, lab, n)
                checked += 1
                if multiply(fmap(d, multiply)) != multiply(multiply(d)):
                    bad.append(d.token())
    return checked, bad


def interchange_failures(cells) -> tuple[int, list[str]]:
    """(a *1 b) *0 (c *1 d) = (a *0 c) *1 (b *0 d), plus associativity and units of each composition."""
    two = [c for c in cells if c.dim == 2]
    by_src1, by_src0 = defaultdict(list), defaultdict(list)
    for c in two:
        by_src1[face(c, "source")].append(c)
        by_src0[face(face(c, "source"), "source")].append(c)
    checked, bad = 0, []
    for a in two:
        for b in by_src1[face(a, "target")]:
            ab = compose_along(a, b, 1)
            t0 = face(face(a, "target"), "target")
            for c in by_src0[t0]:
                for d in by_src1[face(c, "target")]:
                    checked += 1
                    lhs = compose_along(ab, compose_along(c, d, 1), 0)
                    rhs = compose_along(compose_along(a, c, 0), compose_along(b, d, 0), 1)
                    if lhs != rhs:
                        bad.append(f"{a.token()} {b.token()} {c.token()} {d.token()}")
    return checked, bad


def composition_associativity_failures(cells) -> tuple[int, list[str]]:
    checked, bad = 0, []
    by_src = defaultdict(list)
    for c in cells:
        if c.dim >= 1:
            by_src[(c.dim, face(c, "source"))].append(c)
    for a in cells:
        if a.dim != 1:
            continue
        for b in by_src[(1, face(a, "target"))]:
            for c in by_src[(1, face(b, "target"))]:
                checked += 1
                if compose_along(compose_along(a, b, 0), c, 0) != compose_along(a, compose_along(b, c, 0), 0):
                    bad.append(f"{a.token()} {b.token()} {c.token()}")
            ident_s = compose_along(FreeCell(face(a, "source").shape, face(a, "source").label, 1), a, 0)
            if ident_s != a:
                bad.append(f"left identity at {a.token()}")
    return checked, bad
