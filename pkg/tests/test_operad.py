import pytest
from hypothesis import given, settings, strategies as st

from omega.freecat import free_algebra
from omega.globset import GlobularSet, OmegaError, globe, hom_enumerate, loop, star
from omega.kontraction import build_K
from omega.operad import (
    IncompleteFibersError, Square, a_unit, algebra_check, builtin, check_collection, check_operad,
    collection_apply, composite_tree, decorated_terminal, fillers, initial_to_terminal, is_contractible,
    operad_morphism_check, relabel, squares, tabulate, tree_classifier,
)
from omega.tree import enumerate_trees, linear_tree, star_tree, tree
from oracles import globular_sets, graft_planar, pullback_count

TERMINAL = builtin("terminal", 2, 7)
INITIAL = builtin("initial", 2, 7)


def test_tree_classifier_counts():
    g = tree_classifier(2, 7)
    assert [len(g.cells_of_dim(n)) for n in range(3)] == [1, 4, 8]


def test_builtins_are_operads():
    assert check_operad(TERMINAL).ok
    assert check_operad(INITIAL).ok
    assert check_operad(decorated_terminal(2, 5)).ok


def test_initial_operad_has_one_operation_per_dimension():
    assert INITIAL.total.ids == ["e0", "e1", "e2"]
    assert all(INITIAL.over(a).linear for a in INITIAL.total.ids)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_terminal_composition_is_grafting(data):
    keys = list(builtin("terminal", 2, 7).mult)
    a, labels = data.draw(st.sampled_from(keys))
    t = TERMINAL.over(a)
    planar_labels = {c.id: TERMINAL.over(l).planar for c, l in zip(t.underlying.cells, labels)}
    assert TERMINAL.over(TERMINAL.compose(a, labels)).planar == graft_planar(t.planar, planar_labels)


SMALL = [g for g in globular_sets(3, max_dim=2) if len(g)]


@pytest.mark.parametrize("i", range(0, len(SMALL), 3))
def test_collection_apply_is_a_pullback(i):
    x = SMALL[i]
    for o in (builtin("terminal", 2, 5), builtin("initial", 2, 5)):
        for n in range(3):
            assert len(collection_apply(o, x, n)) == pullback_count(o, x, n)


def test_collection_apply_examples():
    assert len(collection_apply(builtin("terminal", 2, 5), star(2), 1)) == 6
    assert len(collection_apply(builtin("initial", 2, 5), star(2), 1)) == 2
    with pytest.raises(OmegaError):
        collection_apply(builtin("initial", 1, 5), star(2), 2)


def test_contractibility_verdicts():
    v = is_contractible(builtin("terminal", 3, 7), 3)
    assert [x.holds for x in v] == [True] * 4
    assert [x.squares for x in v] == [1, 4, 8, 9]
    v = is_contractible(INITIAL, 2)
    assert [x.status for x in v] == ["holds", "fails", "fails"]
    w = v[1].witnesses[0]
    assert w.tree == star_tree(2) and (w.src, w.tgt) == ("e0", "e0")
    assert w.describe() == "dimension 1, tree [[],[]] with faces e0 -> e0"


def test_verdicts_stable_under_renaming():
    for o in (TERMINAL, INITIAL):
        r = relabel(o, lambda s: f"op:{s}")
        assert check_operad(r).ok
        a, b = is_contractible(o, 2), is_contractible(r, 2)
        assert [x.status for x in a] == [x.status for x in b]
        assert [(w.tree, len(x.witnesses)) for x in a for w in x.witnesses[:1]] == \
               [(w.tree, len(x.witnesses)) for x in b for w in x.witnesses[:1]]


def test_decorated_operad_has_two_fillers():
    o = decorated_terminal(2, 5)
    assert all(v.holds for v in is_contractible(o, 2))
    for sq in squares(o, 2):
        assert len(fillers(o, sq)) == 2


def test_require_complete():
    kb = build_K(1, 3, 1)
    with pytest.raises(IncompleteFibersError):
        is_contractible(kb.operad, 1, require_complete=True)


def test_morphisms():
    phi = initial_to_terminal(INITIAL, TERMINAL)
    assert operad_morphism_check(phi, INITIAL, TERMINAL).ok
    bad = dict(phi)
    bad["e1"] = "1:[[],[]]"
    assert not operad_morphism_check(bad, INITIAL, TERMINAL).ok


def test_tabulate_preserves_composition():
    o = builtin("terminal", 1, 5)
    t = tabulate(o)
    assert dict(t.mult) == dict(o.mult.items())
    assert check_operad(t).ok


def test_broken_collection_reported():
    o = tabulate(builtin("terminal", 1, 5))
    o.coll.over["1:[[]]"] = star_tree(2)
    assert not check_collection(o).ok


def test_broken_multiplication_reported():
    o = tabulate(builtin("terminal", 1, 5))
    key = next(k for k in o.mult if o.over(k[0]) == star_tree(2) and o.mult[k] != "1:[[],[]]")
    o.mult[key] = "1:[[],[]]"
    assert not check_operad(o).ok


def test_composite_tree():
    labels = ("0:[]", "0:[]", "0:[]", "1:[[],[]]", "1:[[]]")
    assert composite_tree(TERMINAL, "1:[[],[]]", labels) == star_tree(3)


def test_free_algebra_over_terminal_satisfies_axioms():
    g, by_token = free_algebra(star_tree(2), 2)
    o = builtin("terminal", 2, 5)

    from omega.freecat import multiply, FreeCell
    from omega.operad import ACell

    def act(c: ACell):
        inner = tuple(by_token[v] for v in c.cell.label)
        return multiply(FreeCell(c.cell.shape, inner, c.cell.dim)).token()

    assert algebra_check(o, g, act).ok
    assert act(a_unit(o, g, g.ids[0])) == g.ids[0]
