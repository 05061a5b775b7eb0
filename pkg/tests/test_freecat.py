import pytest
from hypothesis import given, settings, strategies as st

from omega.freecat import (
    FreeCell, IncompatibleLabels, TreeOfTrees, TruncationOverflow, cartesian_square_check,
    compose_along, composition_tree, degenerate, face, free_algebra, free_cells, graft, kleisli_identity,
    kleisli_of, multiply, paste_shape, theta_hom, unit,
)
from omega.globset import globe, hom_enumerate, loop, star, terminal, validate
from omega.tree import enumerate_trees, linear_tree, star_tree, tree
from laws import (
    all_free_cells, associativity_failures, composition_associativity_failures, globularity_failures,
    interchange_failures, unit_law_failures,
)
from oracles import graft_planar, path_count

GRAPHS = {"globe2": globe(2), "star2": star(2), "loop": loop(), "terminal2": terminal(2)}


def test_free_one_cells_on_a_path_are_paths():
    assert len(free_cells(star(2), 1, 5)) == path_count(star(2)) == 6
    assert len(free_cells(star(3), 1, 7)) == path_count(star(3)) == 10


def test_theta_hom_counts():
    assert len(theta_hom("terminal", linear_tree(1), star_tree(2))) == path_count(star(2))
    assert len(theta_hom("initial", linear_tree(1), star_tree(2))) == 2


def test_truncation_flag():
    assert free_cells(loop(), 1, 5).truncated
    assert not free_cells(star(2), 1, 5).truncated


def test_face_of_composite_edge():
    c = free_cells(star(2), 1, 5).cells[-1]
    assert c.shape == star_tree(2)
    assert face(c, "source").label == ("0",) and face(c, "target").label == ("2",)


def test_record_round_trip():
    for c in all_free_cells(globe(2), 5, 2):
        assert FreeCell.from_record(c.as_record()) == c


def test_multiply_respects_bound():
    c = free_cells(loop(), 1, 5).cells[-1]
    d = FreeCell(star_tree(2), (unit(loop(), "v"),) * 3 + (c, c), 1)
    assert multiply(d).shape.size == 9
    with pytest.raises(TruncationOverflow):
        multiply(d, bound=7)


def test_degenerate_cell():
    c = unit(star(2), "0.0")
    d = degenerate(c, 2)
    assert face(d, "source") == c == face(d, "target")


def test_incompatible_tree_of_trees():
    with pytest.raises(IncompatibleLabels):
        # the two 1-cells of the 2-globe carry different trees
        graft(TreeOfTrees(linear_tree(2), (tree("[]"), tree("[]"), star_tree(1), star_tree(2), linear_tree(2)), 2))


def _peak_trees(outer):
    # every tree on a peak of height h must be a tree of height <= h; pick from small ones
    return st.tuples(*[st.sampled_from(enumerate_trees(5, max_height=int(outer.underlying.dim(p))))
                       for p in outer.peaks])


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(enumerate_trees(5)).flatmap(lambda o: st.tuples(st.just(o), _peak_trees(o))))
def test_graft_matches_planar_oracle(data):
    outer, peaks = data
    # peaks of equal height sharing a face must agree on it; skip incompatible draws
    try:
        tt = TreeOfTrees.from_peaks(outer, peaks, outer.height)
    except IncompatibleLabels:
        return
    got = graft(tt)
    labels = {c.id: t.planar for c, t in zip(outer.underlying.cells, tt.inner)}
    assert got.planar == graft_planar(outer.planar, labels)


@pytest.mark.parametrize("name", GRAPHS)
def test_monad_laws(name):
    x = GRAPHS[name]
    cells = all_free_cells(x, 7, 2)
    assert not unit_law_failures(x, cells)
    assert not globularity_failures(cells)
    n, bad = associativity_failures(x, 2, (5, 5, 5))
    assert n > 0 and not bad


@pytest.mark.parametrize("name", ["globe2", "star2", "loop"])
def test_interchange_and_composition(name):
    cells = all_free_cells(GRAPHS[name], 9, 2)
    assert not interchange_failures(cells)[1]
    assert not composition_associativity_failures(cells)[1]


def test_composition_tree_shapes():
    assert composition_tree(1, 0) == star_tree(2)
    assert composition_tree(2, 1) == tree("[[[],[]]]")
    assert composition_tree(2, 0) == tree("[[[]],[[]]]")


def test_compose_along_boundary_mismatch():
    a = unit(star(2), "0.0")
    with pytest.raises(Exception):
        compose_along(a, a, 0)


def test_paste_shape_legs_are_embeddings():
    result, legs = paste_shape(star_tree(2), (tree("[]"), tree("[]"), tree("[]"), star_tree(2), star_tree(1)))
    assert result == star_tree(3)
    assert all(len(set(leg)) == len(leg) for leg in legs)


def test_kleisli_category_laws():
    s, t = linear_tree(1), star_tree(2)
    for f in theta_hom("terminal", s, t):
        assert kleisli_identity(s).then(f) == f == f.then(kleisli_identity(t))
    for g in hom_enumerate(s.underlying, t.underlying):
        assert kleisli_of(g, s, t) in theta_hom("terminal", s, t)


@pytest.mark.parametrize("h", hom_enumerate(globe(1), star(2)) + hom_enumerate(star(2), loop()),
                         ids=lambda h: ",".join(h.key()))
def test_multiplication_is_cartesian(h):
    for n in range(2):
        assert cartesian_square_check(h, n).ok


def test_free_algebra_is_a_globular_set():
    g, by_token = free_algebra(star_tree(2), 2)
    assert validate(g).ok
    assert len(g) == 15
    x = star(2)
    for c in by_token.values():
        lab = dict(zip(c.shape.underlying.ids, c.label))
        assert all(x.dim(lab[k.id]) == k.dim for k in c.shape.underlying)
        assert all(k.dim == 0 or (x.src(lab[k.id]) == lab[k.src] and x.tgt(lab[k.id]) == lab[k.tgt])
                   for k in c.shape.underlying)
