# test_presheaf.py
from hypothesis import given, settings, strategies as st

from presheaf import (constant_presheaf, coproduct, empty_presheaf, fold_map, identity_map, is_bijective,
                      is_local_epi, is_local_iso, is_local_mono, is_sheaf, map_to_terminal, plus, representable,
                      sheafify, terminal_presheaf)
from sites import terminal_site, two_point_site


def test_constant_presheaf_is_not_a_sheaf(two_point):
    X = constant_presheaf(two_point, [0, 1])
    assert X.validate() == []
    verdict = is_sheaf(X)
    assert not verdict
    assert "object" in verdict.witness


def test_plus_of_constant_presheaf(two_point):
    first = plus(constant_presheaf(two_point, [0, 1]))
    sizes = first.result.size()
    assert sizes["ab"] == 4
    assert sizes["empty"] == 1


def test_sheafification_of_constant_presheaf(two_point):
    S = sheafify(constant_presheaf(two_point, [0, 1]))
    assert S.result.size() == {"empty": 1, "a": 2, "b": 2, "ab": 4}
    assert S.result.validate() == []
    assert is_sheaf(S.result)


@settings(max_examples=10, deadline=None)
@given(st.sets(st.integers(0, 9), max_size=3))
def test_locally_constant_sections(elements):
    n = len(elements)
    S = sheafify(constant_presheaf(two_point_site(), elements))
    assert S.result.size() == {"empty": 1, "a": n, "b": n, "ab": n * n}


def test_sheafification_is_idempotent(two_point):
    once = sheafify(constant_presheaf(two_point, [0, 1])).result
    assert is_bijective(sheafify(once).unit)


def test_unit_is_a_local_isomorphism(two_point):
    unit = sheafify(constant_presheaf(two_point, ["x", "y", "z"])).unit
    assert unit.validate() == []
    assert is_local_epi(unit)
    assert is_local_mono(unit)
    assert is_local_iso(unit)


def test_identity_is_a_local_isomorphism(two_point):
    X = representable(two_point, "a")
    assert is_local_iso(identity_map(X))


def test_on_the_terminal_site_every_presheaf_is_a_sheaf():
    site = terminal_site()
    X = constant_presheaf(site, "abc")
    assert is_sheaf(X)
    assert is_bijective(sheafify(X).unit)


def test_empty_presheaf_is_not_locally_nonempty(two_point):
    verdict = is_local_epi(map_to_terminal(empty_presheaf(two_point)))
    assert not verdict
    assert verdict.witness["object"] in ("a", "ab", "b")


def test_fold_map_is_not_a_local_mono_for_the_trivial_topology(terminal):
    p = fold_map(terminal_presheaf(terminal))
    assert p.validate() == []
    assert is_local_epi(p)
    assert not is_local_mono(p)
    assert not is_local_iso(p)


def test_two_points_are_not_locally_equal(two_point):
    p = map_to_terminal(constant_presheaf(two_point, [0, 1]))
    assert is_local_epi(p)
    assert not is_local_mono(p)


def test_covering_family_maps_epimorphically_to_the_point(two_point):
    p = map_to_terminal(coproduct(representable(two_point, "a"), representable(two_point, "b")))
    assert is_local_epi(p)
    assert is_local_iso(p)


def test_local_iso_agrees_with_epi_and_mono_under_debug_checks(two_point, monkeypatch):
    monkeypatch.setenv("GERBEKIT_DEBUG_CHECKS", "1")
    X = constant_presheaf(two_point, [0, 1])
    assert not is_local_iso(map_to_terminal(X))
    assert is_local_iso(sheafify(X).unit)


def test_memoized_constructions_are_bounded(two_point):
    from config import cache_size
    from gpd import automorphism_sheaves
    from groups import sheafify_group
    from sites import slice_site
    from two_gpd import aut_sheaf_two_groupoid, path_components

    for fn in (plus, sheafify, sheafify_group, slice_site, automorphism_sheaves, aut_sheaf_two_groupoid,
               path_components):
        assert fn.cache_info().maxsize == cache_size(), fn.__name__
    sheafify(constant_presheaf(two_point, [0, 1]))
    assert 0 < sheafify.cache_info().currsize <= cache_size()
