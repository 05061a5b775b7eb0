import pytest
from hypothesis import given, settings, strategies as st

from omega.globset import OmegaError
from omega.kontraction import (
    Composite, Contraction, MalformedTermError, NonParallelError, Unit, build_K, census, compose,
    contract_pair, encode, face, inclusion, is_normal, normalize, over, size, weak_initial_map,
)
from omega.operad import (
    builtin, check_operad, decorated_terminal, fillers, is_contractible, operad_morphism_check,
)
from omega.tree import enumerate_trees, linear_tree, planar_json, star_tree, tree
from oracles import k_dim1_terms, k_generator_census

K = build_K(2, 5, 2)
U0, U1 = Unit(0), Unit(1)


def kappa(k):
    return Contraction(star_tree(k), U0, U0)


def test_bounds_must_be_positive():
    with pytest.raises(OmegaError):
        build_K(0, 5, 2)


def test_dimension_zero_fibre():
    kb = build_K(2, 7, 3)
    assert kb.operad.total.cells_of_dim(0) == ["u0"]
    assert census(kb, 0) == {"[]": (0, 1)}


def test_dimension_one_census_matches_oracles():
    kb = build_K(2, 7, 3)
    gens = k_generator_census({}, 7, [t.planar for t in enumerate_trees(7, max_height=1)])[1]
    terms = k_dim1_terms(7, 3)
    got = census(kb, 1)
    for p, n in gens.items():
        key = planar_json(p)
        assert got[key][0] == n == 1
        assert got[key][1] == sum(terms[len(p)].values())
    assert sum(terms[0].values()) == got["[]"][1] == 4


def test_dimension_two_generators_by_pair_enumeration():
    terms = k_dim1_terms(5, 2)
    per_arity = {a: sum(v.values()) for a, v in terms.items()}
    want = k_generator_census(per_arity, 5, [t.planar for t in enumerate_trees(5, max_height=2)])[2]
    got = census(K, 2)
    for p, n in want.items():
        assert got[planar_json(p)][0] == n


def test_contract_pair_examples():
    kb = build_K(2, 7, 3)
    k2 = contract_pair(U0, U0, star_tree(2))
    assert kb.id_of(k2).startswith("g1.")
    fresh = contract_pair(U0, U0, linear_tree(1))
    assert fresh != U1 and over(fresh) == over(U1)
    assert face(fresh, "source") == U0
    with pytest.raises(NonParallelError):
        contract_pair(U0, U1, star_tree(2))
    with pytest.raises(NonParallelError):
        contract_pair(kappa(2), kappa(1), tree("[[[]],[[]]]"))
    with pytest.raises(NonParallelError):
        contract_pair(kappa(2), kappa(2), tree("[[[]]]"))


def test_unit_and_flattening_laws():
    x = kappa(2)
    units = (U0, U0, U0, U1, U1)
    assert normalize(Composite(x, units)) == x
    inner = Composite(x, (U0, U0, U0, kappa(1), U1))
    nested = Composite(inner, (U0, U0, U0, kappa(0), U1))
    flat = normalize(nested)
    expected = Composite(x, (U0, U0, U0, Composite(kappa(1), (U0, U0, kappa(0))), U1))
    assert is_normal(flat) and flat == expected
    assert over(flat) == over(nested) == star_tree(1)
    assert size(flat) == 3


def test_ill_formed_composite():
    with pytest.raises(MalformedTermError):
        normalize(Composite(kappa(2), (U0, U0, U0)))
    with pytest.raises(MalformedTermError):
        normalize(Composite(kappa(1), (U0, U0, U0)))


@st.composite
def raw_terms(draw, depth=3):
    """Possibly non-normal 1-terms: units, generators, nested composites with unit labels."""
    choice = draw(st.integers(0, 3 if depth > 0 else 1))
    if choice == 0:
        return U1
    if choice == 1:
        return kappa(draw(st.integers(0, 3)))
    outer = draw(raw_terms(depth - 1))
    k = len(over(outer).planar)
    if k > 4:
        return outer
    labels = [draw(raw_terms(depth - 1)) for _ in range(k)]
    return Composite(outer, (U0,) * (k + 1) + tuple(labels))


@settings(max_examples=500, deadline=None)
@given(raw_terms())
def test_normalize_is_idempotent(t):
    n = normalize(t)
    assert normalize(n) == n and is_normal(n)
    assert over(n) == over(t)
    assert face(n, "source") == U0 == face(n, "target")


@settings(max_examples=100, deadline=None)
@given(raw_terms(depth=2), st.data())
def test_normal_forms_are_a_congruence(x, data):
    k = len(over(x).planar)
    ys = [data.draw(raw_terms(depth=1)) for _ in range(k)]
    labels = (U0,) * (k + 1) + tuple(ys)
    direct = normalize(Composite(x, labels))
    assert direct == compose(normalize(x), tuple(normalize(y) for y in labels))


def test_builder_output_is_a_contractible_operad():
    o = K.operad
    assert check_operad(o).ok
    verdicts = is_contractible(o, 2)
    assert all(v.holds for v in verdicts)
    assert [v.status for v in verdicts] == ["holds within bound"] * 3


def test_every_linear_fibre_has_the_unit():
    for n in range(3):
        assert K.operad.over(f"u{n}") == linear_tree(n)


def test_terms_round_trip_through_ids():
    total = K.operad.total
    for cid in total.ids:
        t = K.term(cid)
        assert K.id_of(t) == cid
        assert over(t) == K.operad.over(cid)
        if t.dim:
            assert K.id_of(face(t, "source")) == total.src(cid)
    assert encode(K.term("u1")) == "u1"


def test_weak_initial_maps():
    T = builtin("terminal", 2, 5)
    phi, rep = weak_initial_map(K, T)
    assert rep.ok and operad_morphism_check(phi, K.operad, T).ok
    ident, rep = weak_initial_map(K, K.operad)
    assert rep.ok and all(ident[c] == c for c in K.operad.total.ids if c.startswith(("g", "u")))
    assert operad_morphism_check(ident, K.operad, K.operad).ok


def test_weak_initial_map_into_operad_with_two_fillers():
    D = decorated_terminal(2, 5)
    largest = lambda o, sq: max(fillers(o, sq), default=None)
    maps = []
    for choose in (None, largest):
        phi, rep = weak_initial_map(K, D) if choose is None else weak_initial_map(K, D, choose)
        assert rep.ok and operad_morphism_check(phi, K.operad, D).ok
        maps.append(phi)
    assert maps[0] != maps[1]


def test_monotone_in_the_bounds():
    small, big = build_K(2, 3, 2), build_K(2, 5, 2)
    inc = inclusion(small, big)
    assert inc is not None and len(set(inc.values())) == len(inc)
    assert operad_morphism_check(inc, small.operad, big.operad).ok
