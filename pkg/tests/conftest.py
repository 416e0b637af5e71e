# conftest.py
import pytest

from gpd import constant_groupoid_presheaf, groupoid_of_group_presheaf, standard_groupoid
from groups import constant_group_presheaf, cyclic_group, group_from_table, symmetric_group
from sites import slice_site, terminal_site, two_point_site
from two_gpd import GroupSheafAtlas


@pytest.fixture
def terminal():
    return terminal_site()


@pytest.fixture
def two_point():
    return two_point_site()


@pytest.fixture
def z2():
    return cyclic_group(2)


@pytest.fixture
def z3():
    return cyclic_group(3)


@pytest.fixture
def s3():
    return symmetric_group(3)


@pytest.fixture
def constant_sheaf():
    """Constant group presheaf on the slice over an object."""
    def make(site, obj, G):
        return constant_group_presheaf(slice_site(site, obj), G)
    return make


@pytest.fixture
def constant_atlas(constant_sheaf):
    """Atlas of one constant sheaf on C/obj and its restrictions."""
    def make(site, obj, G, name="", declared=None):
        return GroupSheafAtlas(site, [(obj, constant_sheaf(site, obj, G))], name=name or G.name, declared=declared)
    return make


@pytest.fixture
def bz2(terminal, z2):
    return groupoid_of_group_presheaf(constant_group_presheaf(terminal, z2))


@pytest.fixture
def two_object_z2(terminal, z2):
    return constant_groupoid_presheaf(terminal, standard_groupoid([(["x", "y"], z2)]), name="Z2x2")


@pytest.fixture
def shifted_z2():
    """Z2 with the identity at index 1."""
    return group_from_table(["a", "e"], [[1, 0], [0, 1]], name="Z2'")


@pytest.fixture
def shifted_z3():
    """Z3 with the identity at index 1."""
    return group_from_table(["a", "e", "b"], [[2, 0, 1], [0, 1, 2], [1, 2, 0]], name="Z3'")
