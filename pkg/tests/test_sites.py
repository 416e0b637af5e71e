# test_sites.py
import pytest
from hypothesis import given, settings, strategies as st

from sites import (FiniteSite, Sieve, all_sieves, generated_sieve, group_category, poset_category, pullback_sieve,
                   saturate_topology, sierpinski_site, slice_site, terminal_site, trivial_site, two_point_site,
                   validate_site)

SITES = [terminal_site(), two_point_site(), sierpinski_site()]


def _chain():
    return poset_category(["0", "1"], [("0", "1")])


def test_example_sites_are_valid():
    for site in SITES:
        assert validate_site(site) == []


def test_two_point_site_covers_empty_by_empty_sieve(two_point):
    assert two_point.is_covering("empty", [])
    assert not two_point.is_covering("ab", [])
    assert two_point.is_covering("ab", ["a->ab", "b->ab", "empty->ab"])


def test_broken_composition_is_reported():
    cat = _chain()
    composition = dict(cat.composition)
    composition[("0->1", "0->0")] = "1->1"
    broken = type(cat)(cat.objects, cat.morphisms, cat.identities, composition)
    assert [v.axiom for v in broken.validate()] == ["composition-entry"]


def test_unstable_topology_names_the_pullback():
    cat = _chain()
    covering = {
        "0": frozenset([frozenset(["0->0"])]),
        "1": frozenset([frozenset(), frozenset(["0->1"]), frozenset(["0->1", "1->1"])]),
    }
    violations = validate_site(FiniteSite(cat, covering))
    assert [v.axiom for v in violations] == ["stability"]
    assert violations[0].witness["phi"] == "0->1"


def test_missing_maximal_sieve():
    cat = _chain()
    covering = {"0": frozenset([frozenset(["0->0"])]), "1": frozenset()}
    assert "maximal-sieve" in {v.axiom for v in validate_site(FiniteSite(cat, covering))}


def test_pullback_of_generated_sieve_is_maximal(two_point):
    R = generated_sieve(two_point.category, "ab", ["a->ab", "b->ab"])
    pulled = pullback_sieve(two_point, R, "a->ab")
    assert pulled == two_point.maximal_sieve("a")


def test_pullback_rejects_a_foreign_morphism(two_point):
    R = two_point.maximal_sieve("ab")
    with pytest.raises(ValueError):
        pullback_sieve(two_point, R, "empty->a")
    with pytest.raises(ValueError):
        pullback_sieve(two_point, R, "nope")


def test_pullback_along_identity_and_of_maximal():
    for site in SITES:
        cat = site.category
        for U in site.objects:
            for R in site.covering_sieves(U):
                assert pullback_sieve(site, R, cat.identity(U)) == R
            for phi in cat.into(U):
                assert pullback_sieve(site, site.maximal_sieve(U), phi) == site.maximal_sieve(cat.source(phi))


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_pullback_composes(data):
    site = data.draw(st.sampled_from(SITES))
    cat = site.category
    U = data.draw(st.sampled_from(site.objects))
    members = data.draw(st.sampled_from(all_sieves(cat, U)))
    R = Sieve(U, members)
    phi = data.draw(st.sampled_from(cat.into(U)))
    psi = data.draw(st.sampled_from(cat.into(cat.source(phi))))
    twice = pullback_sieve(site, pullback_sieve(site, R, phi), psi)
    assert twice == pullback_sieve(site, R, cat.compose(phi, psi))


def test_all_sieves_on_a_chain():
    cat = _chain()
    assert len(all_sieves(cat, "1")) == 3
    assert len(all_sieves(cat, "0")) == 2


def test_slices_are_sites():
    for site in SITES:
        for U in site.objects:
            assert validate_site(slice_site(site, U)) == []


def test_slice_over_the_top_has_the_shape_of_the_base(two_point):
    S = slice_site(two_point, "ab")
    assert len(S.objects) == len(two_point.objects)
    assert len(S.category.morphisms) == len(two_point.category.morphisms)
    assert S.category.identity("a->ab") == ("a->a", "a->ab")


def test_slice_of_a_group_category():
    cat = group_category(["e", "g"], lambda x, y: "e" if x == y else "g")
    site = trivial_site(cat, name="BZ2")
    assert validate_site(site) == []
    S = slice_site(site, "*")
    assert sorted(S.objects) == ["e", "g"]
    assert validate_site(S) == []


def test_generated_topology():
    cat = two_point_site().category
    site = FiniteSite(cat, saturate_topology(cat, {"ab": [["a->ab", "b->ab"]]}), name="generated")
    assert validate_site(site) == []
    assert site.is_covering("ab", ["a->ab", "b->ab", "empty->ab"])
    assert not site.is_covering("a", ["empty->a"])
