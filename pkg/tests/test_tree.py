import pytest
from hypothesis import given, settings, strategies as st

from omega.globset import globe, loop, star
from omega.tree import (
    MalformedPlanarError, NotATreeError, boundary_union, classify, convert, enumerate_trees, face_tree,
    globe_cover_check, hom, is_cover, is_tree, linear_tree, planar_json, star_tree, subtrees, tree, truncate,
)
from oracles import chop, globular_sets, is_tree_by_order, iso_classes, subtrees_by_powerset

TREES9 = enumerate_trees(9)


def test_enumeration_counts_follow_catalan():
    # trees with k nodes are counted by the Catalan number C(k-1)
    assert [len(enumerate_trees(c)) for c in (1, 3, 5, 7, 9)] == [1, 2, 4, 9, 23]
    assert len(set(TREES9)) == 23


def test_enumeration_matches_exhaustive_oracle():
    raw = [g for g in globular_sets(5, max_dim=2) if is_tree_by_order(g)]
    classes = iso_classes(raw)
    assert len(classes) == len(enumerate_trees(5)) == 4
    planars = sorted(planar_json(convert(g)[0]) for g in classes)
    assert planars == sorted(planar_json(t.planar) for t in enumerate_trees(5))


def test_is_tree_agrees_with_oracle():
    for g in globular_sets(4, max_dim=2):
        assert is_tree(g) == is_tree_by_order(g)


def test_named_trees():
    assert linear_tree(2).planar == (((),),)
    assert star_tree(2).planar == ((), ())
    assert classify(star_tree(3)) == (1, False)
    assert classify(linear_tree(3)) == (3, True)
    assert tree("[[[]],[]]").peaks == ["0.0.0", "1.0"]


def test_bad_planar_rejected():
    with pytest.raises(MalformedPlanarError):
        tree("[1]")


def test_convert_round_trip():
    p, iso = convert(star(2))
    assert p == ((), ()) and iso.is_iso()
    p, iso = convert(globe(2))
    assert tree(p) == linear_tree(2)


def test_convert_rejects_non_trees():
    with pytest.raises(NotATreeError):
        convert(loop())


@pytest.mark.parametrize("t", enumerate_trees(7), ids=lambda t: planar_json(t.planar))
def test_subtrees_match_powerset_oracle(t):
    got = {frozenset(f.image()) for _, f in subtrees(t, proper_only=False)}
    assert got == set(subtrees_by_powerset(t.underlying))


@pytest.mark.parametrize("t", TREES9, ids=lambda t: planar_json(t.planar))
def test_boundary_and_cover(t):
    sub, _ = boundary_union(t)
    whole = len(sub) == t.size
    assert whole == (not t.linear)
    assert is_cover([f for _, f in subtrees(t)], t) == (not t.linear)


@pytest.mark.parametrize("t", TREES9, ids=lambda t: planar_json(t.planar))
def test_truncation_agrees_with_planar_chop(t):
    for k in range(t.height + 1):
        low, sigma, tau = truncate(t, k)
        assert low.planar == chop(t.planar, k)
        assert sigma.validate().ok and tau.validate().ok
        assert sigma.is_mono() and tau.is_mono()


def test_face_tree_of_degenerate_cell_is_identity():
    t = star_tree(2)
    low, s, _ = face_tree(t, 3)
    assert low == t and s.is_iso()


def test_globe_cover_small():
    for t in enumerate_trees(7):
        ok, cmp = globe_cover_check(t)
        assert ok and cmp.is_iso()


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(enumerate_trees(7)), st.sampled_from(enumerate_trees(7)))
def test_tree_morphisms_are_monic(s, t):
    for f in hom(s, t):
        assert f.is_mono()


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(TREES9))
def test_order_is_total_listing(t):
    assert sorted(t.order) == sorted(t.underlying.ids)
    assert len(t.peaks) == max(1, sum(1 for c in t.children_count.values() if c == 0))
