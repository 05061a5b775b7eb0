import pytest
from hypothesis import given, settings, strategies as st

from omega.globset import (
    Cell, GlobularMap, GlobularSet, colimit, disjoint_union, globe, hom_enumerate, identity,
    is_isomorphic, loop, preorder_closure, sphere, star, terminal, validate,
)
from oracles import all_functions_maps, globular_sets, iso_classes

SMALL = list(globular_sets(4, max_dim=2))


def test_globe_shape():
    g = globe(2)
    assert [len(g.cells_of_dim(n)) for n in range(3)] == [2, 2, 1]
    assert validate(g).ok
    top = g.cell("0.0.0")
    assert (top.src, top.tgt) == ("0.0", "0.1")


def test_sphere_is_globe_minus_top():
    s, inc = sphere(2)
    assert len(s) == 4 and inc.is_mono() and not inc.is_iso()


def test_validate_catches_bad_faces():
    bad = GlobularSet([Cell("a", 0), Cell("b", 0), Cell("f", 1, "a", "b"), Cell("g", 1, "b", "a"),
                       Cell("x", 2, "f", "g")])
    rep = validate(bad)
    assert not rep.ok
    assert any("x:" in v for v in rep.violations)
    assert not validate(GlobularSet([Cell("f", 1, "a", "a")])).ok


@pytest.mark.parametrize("i", range(0, len(SMALL), 7))
def test_hom_enumerate_matches_brute_force(i):
    x = SMALL[i]
    for y in (star(2), loop(), terminal(2), globe(1)):
        got = sorted(tuple(sorted(f.assignment.items())) for f in hom_enumerate(x, y))
        want = sorted(tuple(sorted(f.items())) for f in all_functions_maps(x, y))
        assert got == want


def test_maps_compose_and_validate():
    x, y = globe(1), star(2)
    for f in hom_enumerate(x, y):
        assert f.validate().ok
        assert identity(x).then(f) == f == f.then(identity(y))


def test_isomorphism_classes_of_small_sets():
    # globular sets with at most 3 cells, counted by brute-force relabelling
    sets = list(globular_sets(3, max_dim=2))
    reps = iso_classes(sets)
    for a in reps:
        for b in reps:
            if a is not b:
                assert not is_isomorphic(a, b)


def test_colimit_glues_a_pushout():
    # two edges glued along a point: the path star(2)
    e = globe(1)
    p = GlobularSet([Cell("p", 0)])
    out, legs = colimit([e, p, e], [(1, 0, {"p": "1"}), (1, 2, {"p": "0"})])
    assert [len(out.cells_of_dim(n)) for n in range(2)] == [3, 2]
    assert is_isomorphic(out, star(2))
    assert all(leg.validate().ok for leg in legs)


def test_disjoint_union_injections():
    u, inj = disjoint_union([globe(1), loop()])
    assert len(u) == 5 and all(f.is_mono() for f in inj)


def test_preorder_of_star_is_total():
    _, total = preorder_closure(star(3))
    assert total
    _, total = preorder_closure(loop())
    assert not total


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(SMALL), st.sampled_from(SMALL))
def test_hom_counts_multiply_over_disjoint_union(x, y):
    # Hom(x + y, z) = Hom(x, z) * Hom(y, z)
    z = star(2)
    u, _ = disjoint_union([x, y])
    assert len(hom_enumerate(u, z)) == len(hom_enumerate(x, z)) * len(hom_enumerate(y, z))


def test_map_inverse():
    f = GlobularMap(globe(1), globe(1), {"0": "0", "1": "1", "0.0": "0.0"})
    assert f.is_iso() and f.inverse().then(f) == identity(globe(1))
