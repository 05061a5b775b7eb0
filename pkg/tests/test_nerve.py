import pytest
from hypothesis import given, settings, strategies as st

from omega.globset import OmegaError, globe
from omega.nerve import (
    CellularSet, NotEvaluated, SmallCategory, Theta, boundary_extension_check, category_of_elements,
    discrete_category, free_algebra, functoriality_check, natural_transformations, nerve_complex_stats,
    nerve_fullness, nerve_of_algebra, reconstruct_algebra, representable, segal_check, to_dot,
    underlying_graph,
)
from omega.operad import algebra_check, builtin
from omega.tree import enumerate_trees, linear_tree, planar_json, star_tree, tree
from oracles import all_functions_maps, simplex_counts

TERM = Theta(builtin("terminal", 2, 5), 5)
INIT = Theta(builtin("initial", 2, 5), 5)
ids = lambda t: planar_json(t.planar)


def test_theta_trees_and_homs():
    assert [ids(t) for t in TERM.trees] == ["[]", "[[]]", "[[],[]]", "[[[]]]"]
    assert len(TERM.hom(linear_tree(1), star_tree(2))) == 6
    assert len(INIT.hom(linear_tree(1), star_tree(2))) == 2


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(TERM.trees), st.sampled_from(TERM.trees), st.sampled_from(TERM.trees))
def test_theta_is_a_category(r, s, t):
    for f in TERM.hom(r, s):
        assert TERM.compose(TERM.identity(r), f) == f == TERM.compose(f, TERM.identity(s))
        for g in TERM.hom(s, t):
            fg = TERM.compose(f, g)
            assert fg in TERM.hom(r, t)
            for h in TERM.hom(t, t):
                assert TERM.compose(fg, h) == TERM.compose(f, TERM.compose(g, h))


def _nerve(th, t):
    x, act, _ = free_algebra(th, t)
    return x, act, nerve_of_algebra(th, x, act)


@pytest.mark.parametrize("t", TERM.trees, ids=ids)
def test_nerves_are_segal_and_functorial(t):
    x, act, n = _nerve(TERM, t)
    assert algebra_check(TERM.o, x, act).ok
    assert functoriality_check(n).ok
    for r in TERM.trees:
        assert segal_check(n, r) == (True, None)
        if not r.linear:
            assert boundary_extension_check(n, r)[0]


@pytest.mark.parametrize("th", [TERM, INIT], ids=["terminal", "initial"])
def test_representables_are_segal(th):
    for t in th.trees:
        x = representable(th, t)
        assert all(segal_check(x, r)[0] for r in th.trees)


def test_corrupted_presheaf_fails_with_witness():
    _, _, n = _nerve(TERM, star_tree(2))
    values = dict(n.values)
    values[star_tree(2)] = list(values[star_tree(2)]) + ["ghost"]
    first = values[star_tree(2)][0]

    def action(f, y):
        return n.action(f, first if y == "ghost" else y)

    bad = CellularSet(TERM, values, action)
    ok, witness = segal_check(bad, star_tree(2))
    assert not ok and witness.kind == "not injective"
    assert "ghost" in witness.describe()

    dropped = dict(n.values)
    dropped[star_tree(2)] = values[star_tree(2)][1:-1]
    ok, witness = segal_check(CellularSet(TERM, dropped, n.action), star_tree(2))
    assert not ok and witness.kind == "not surjective"


def test_boundary_check_refuses_linear_trees():
    _, _, n = _nerve(TERM, star_tree(2))
    with pytest.raises(OmegaError):
        boundary_extension_check(n, linear_tree(1))


def test_out_of_bound_tree():
    _, _, n = _nerve(TERM, star_tree(2))
    with pytest.raises(NotEvaluated):
        n.at(tree("[[],[],[]]"))


def test_reconstruction_from_globe_values():
    x, _, n = _nerve(TERM, star_tree(2))
    g, act = reconstruct_algebra(n)
    assert len(g) == len(x) == len(underlying_graph(n))
    assert algebra_check(TERM.o, g, act).ok


@pytest.mark.parametrize("pair", [(linear_tree(1), star_tree(2)), (linear_tree(0), linear_tree(1)),
                                  (star_tree(2), star_tree(2))], ids=lambda p: f"{ids(p[0])}->{ids(p[1])}")
def test_nerve_fullness(pair):
    ok, maps, nats = nerve_fullness(TERM, *pair)
    assert ok and maps == nats


def test_natural_transformations_of_representables():
    # Yoneda: nat(Theta[s], Theta[t]) = hom(s, t)
    s, t = linear_tree(1), star_tree(2)
    assert len(natural_transformations(representable(TERM, s), representable(TERM, t))) == 6


@pytest.mark.parametrize("t", INIT.trees, ids=ids)
def test_elements_of_representables(t):
    c, proj = category_of_elements(representable(INIT, t))
    assert c.check().ok
    st_ = nerve_complex_stats(c)
    assert st_.euler == 1 and st_.has_terminal and not st_.partial
    assert st_.counts == simplex_counts(c.objects, c.morphisms, c.identities, c.compose, len(st_.counts) - 1)
    assert st_.terminal[0] == t


def test_dot_export_of_slice_over_edge():
    c, _ = category_of_elements(representable(INIT, linear_tree(1)))
    expected = sum(len(all_functions_maps(s.underlying, globe(1))) for s in INIT.trees)
    dot = to_dot(c)
    assert dot.count("[label=") == len(c.objects) == expected == 3


def test_discrete_and_looping_categories():
    s = nerve_complex_stats(discrete_category(3))
    assert s.euler == 3 and not s.has_terminal
    idem = SmallCategory(["a"], [("1", "a", "a"), ("e", "a", "a")],
                         {("1", "1"): "1", ("1", "e"): "e", ("e", "1"): "e", ("e", "e"): "e"}, {"a": "1"})
    assert idem.check().ok
    st_ = nerve_complex_stats(idem, max_simplex_dim=4)
    assert st_.partial and st_.counts == [1, 1, 1, 1, 1]
