# test_groth.py
import pytest

from errors import PreconditionError
from gpd import (components_map, constant_groupoid_presheaf, groupoid_of_group_presheaf, identity_groupoid_map, is_gerbe,
                 is_lwe, standard_groupoid)
from groth import (Cocycle, CocycleMorphism, check_composite_iso, check_fibre_inclusion, check_fibres_in_atlas,
                   check_grothendieck_gerbe, check_induced_lwe, composition_well_defined, conjugation_grothendieck,
                   fibre_inclusion, gerbe_cocycle, gerbe_comparison, grothendieck, homotopy_path, inverse_law,
                   lwe_homotopy, resolution_comparison)
from groups import constant_group_presheaf, sheafify_group
from sites import sierpinski_site, two_point_site
from two_gpd import aut_sheaf_two_groupoid, identity_two_map


@pytest.fixture
def cocycle(bz2):
    return gerbe_cocycle(bz2)


def test_gerbe_cocycle(cocycle, bz2):
    assert cocycle.name == f"F({bz2.name})"
    assert cocycle.validate() == []
    assert cocycle.is_cocycle()


def test_grothendieck_construction_of_a_cocycle(cocycle):
    E = grothendieck(cocycle)
    assert E.groupoid.validate() == []
    assert len(E.groupoid.sections["*"].arrows) == 2
    assert composition_well_defined(E)
    assert inverse_law(E)
    assert E.projection.validate() == []
    assert check_grothendieck_gerbe(cocycle)
    assert check_fibre_inclusion(cocycle)
    assert check_fibre_inclusion(cocycle, ("*", "*"))
    assert check_fibres_in_atlas(cocycle)


def test_fibre_inclusion(cocycle):
    p = fibre_inclusion(cocycle, "*", "*")
    assert p.validate() == []
    with pytest.raises(ValueError):
        fibre_inclusion(cocycle, "*", "missing")


@pytest.mark.parametrize("which", ["bz2", "two_object_z2"])
def test_conjugation_construction_recovers_the_gerbe(which, request):
    G = request.getfixturevalue(which)
    E = conjugation_grothendieck(G)
    assert E.groupoid.validate() == []
    assert composition_well_defined(E)
    assert inverse_law(E)
    assert check_composite_iso(G)


def test_composite_iso_needs_a_gerbe(terminal, z2):
    apart = constant_groupoid_presheaf(terminal, standard_groupoid([(["x"], z2), (["y"], z2)]))
    with pytest.raises(PreconditionError):
        check_composite_iso(apart)


def test_gerbe_is_equivalent_to_its_construction(two_object_z2):
    E = grothendieck(gerbe_cocycle(two_object_z2))
    assert is_gerbe(E.groupoid)
    f = gerbe_comparison(two_object_z2, E)
    assert f.validate() == []
    assert is_lwe(f)


def test_identity_cocycle_morphism(cocycle):
    m = CocycleMorphism(cocycle, cocycle, identity_two_map(cocycle.source))
    assert m.validate() == []
    assert check_induced_lwe(m)
    assert resolution_comparison(cocycle).validate() == []


def test_retarget_needs_the_sheaves(cocycle, terminal, z3, constant_atlas):
    other = constant_atlas(terminal, "*", z3)
    with pytest.raises(PreconditionError):
        cocycle.retarget(other)
    assert cocycle.retarget(cocycle.atlas) is cocycle


def _saturated(c):
    E = grothendieck(c).groupoid
    return c.atlas.saturated(aut_sheaf_two_groupoid(E).atlas.entries)


def test_homotopy_path_to_the_canonical_cocycle(cocycle):
    path = homotopy_path(cocycle, _saturated(cocycle))
    assert len(path.cocycles) == 4
    assert len(path.legs) == 3
    assert path.validate() == []


def test_homotopy_from_a_local_weak_equivalence(bz2, cocycle):
    path = lwe_homotopy(identity_groupoid_map(bz2), cocycle.atlas)
    assert path.validate() == []
    with pytest.raises(PreconditionError):
        lwe_homotopy(components_map(bz2), cocycle.atlas)


@pytest.mark.parametrize("make_site", [two_point_site, sierpinski_site])
def test_lwe_homotopy_on_sites_with_several_objects(make_site, z2):
    G = groupoid_of_group_presheaf(sheafify_group(constant_group_presheaf(make_site(), z2)).result)
    assert is_gerbe(G)
    path = lwe_homotopy(identity_groupoid_map(G), aut_sheaf_two_groupoid(G).atlas)
    assert path.validate() == []
    assert all(c.validate() == [] for c in path.cocycles)


def test_cocycle_type_checks_its_target(cocycle, terminal, z3, constant_atlas):
    wrong = Cocycle(constant_atlas(terminal, "*", z3), cocycle.coefficients, name="wrong")
    assert [v.axiom for v in wrong.validate()] == ["cocycle-target"]
