# test_gpd.py
import pytest

from gpd import (aut_groupoid_inclusion, aut_sheaf, cech_comparison, cech_groupoid, components_map,
                 constant_groupoid_presheaf, discrete_presheaf, functors, group_groupoid, hom_presheaf,
                 identity_groupoid_map, is_cech, is_gerbe, is_lwe, local_trivialization, pi0, standard_groupoid)
from groups import constant_group_presheaf, cyclic_group, trivial_group
from presheaf import constant_presheaf, coproduct, identity_map, map_from_function, map_to_terminal, representable
from sites import slice_site


def test_standard_groupoid_is_valid(z2, s3):
    G = standard_groupoid([(["x", "y"], z2), (["z"], s3)])
    assert G.validate() == []
    assert len(G.arrows) == 4 * 2 + 6
    assert G.components() == ("x", "z")
    assert G.automorphism_group("z").order == 6


def test_functor_counts(z2, z3):
    assert len(functors(group_groupoid(z2), group_groupoid(z2))) == 2
    assert len(functors(group_groupoid(z3), group_groupoid(z2))) == 1
    assert len(functors(standard_groupoid([(["x", "y"], trivial_group())]), group_groupoid(z2))) == 2


def test_groupoid_presheaf_validation(terminal, bz2, two_object_z2):
    assert bz2.validate() == []
    assert two_object_z2.validate() == []
    assert identity_groupoid_map(bz2).validate() == []


def test_discrete_presheaf_has_itself_as_components(two_point):
    X = constant_presheaf(two_point, [0, 1])
    P = pi0(discrete_presheaf(X))
    assert P.size() == X.size()
    assert is_cech(discrete_presheaf(X))


def test_cech_groupoid_of_a_surjection(terminal):
    X = constant_presheaf(terminal, [0, 1, 2])
    Y = constant_presheaf(terminal, ["x", "y"])
    p = map_from_function(X, Y, lambda U, v: "x" if v < 2 else "y")
    C = cech_groupoid(p)
    assert C.validate() == []
    assert len(C.sections["*"].arrows) == 5
    assert pi0(C).size() == {"*": 2}
    assert is_cech(C)
    m = cech_comparison(p)
    assert m.validate() == []
    assert is_lwe(m)


def test_cech_groupoid_of_identity_and_of_a_constant_map(terminal):
    X = constant_presheaf(terminal, [0, 1, 2])
    assert len(cech_groupoid(identity_map(X)).sections["*"].arrows) == 3
    assert len(cech_groupoid(map_to_terminal(X)).sections["*"].arrows) == 9


def test_cech_resolution_of_a_cover(two_point):
    p = map_to_terminal(coproduct(representable(two_point, "a"), representable(two_point, "b")))
    m = cech_comparison(p)
    assert m.validate() == []
    assert is_cech(m.source)
    assert is_lwe(m)


def test_group_presheaf_groupoid_is_not_cech(bz2):
    verdict = is_cech(bz2)
    assert not verdict
    assert verdict.witness["object"] == "*"


def test_components_map_detects_cech(bz2, two_point):
    assert not is_lwe(components_map(bz2))
    assert is_lwe(components_map(discrete_presheaf(constant_presheaf(two_point, [0, 1]))))


def test_hom_presheaf(two_object_z2):
    P = hom_presheaf(two_object_z2, "*", "x", "y")
    assert P.size() == {"*->*": 2}
    assert P.validate() == []
    with pytest.raises(ValueError):
        hom_presheaf(two_object_z2, "*", "x", "w")
    with pytest.raises(ValueError):
        hom_presheaf(two_object_z2, "nowhere", "x", "y")


def test_gerbes(terminal, bz2, two_object_z2, z2):
    assert is_gerbe(bz2)
    assert is_gerbe(two_object_z2)
    apart = constant_groupoid_presheaf(terminal, standard_groupoid([(["x"], z2), (["y"], z2)]))
    verdict = is_gerbe(apart)
    assert not verdict
    assert verdict.witness["objects"] == ["x", "y"]
    empty = constant_groupoid_presheaf(terminal, standard_groupoid([]))
    assert not is_gerbe(empty)


def test_constant_groupoid_is_not_a_gerbe_on_two_points(two_point, z2):
    apart = constant_groupoid_presheaf(two_point, standard_groupoid([(["x"], z2), (["y"], z2)]))
    assert not is_gerbe(apart)


def test_automorphism_inclusion_is_a_local_weak_equivalence(two_object_z2):
    f = aut_groupoid_inclusion(two_object_z2, "*", "x")
    assert f.validate() == []
    assert is_lwe(f)


def test_local_trivialization(bz2):
    verdict = local_trivialization(bz2)
    assert verdict
    assert verdict.witness["family"] == {"*": "*"}


def test_aut_sheaf_of_a_group_presheaf_is_the_group_sheaf(terminal, bz2, z2):
    P = aut_sheaf(bz2, "*", "*")
    assert P.key == constant_group_presheaf(slice_site(terminal, "*"), z2).key
    with pytest.raises(ValueError):
        aut_sheaf(bz2, "*", "missing")


def test_aut_sheaf_sheafifies_on_two_points(two_point, z2):
    G = constant_groupoid_presheaf(two_point, group_groupoid(cyclic_group(2)))
    P = aut_sheaf(G, "ab", "*")
    assert P.groups["ab->ab"].order == 4
    assert P.groups["empty->ab"].order == 1
