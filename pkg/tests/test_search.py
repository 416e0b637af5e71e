# test_search.py
import pytest

from classify import gerbe_atlas
from errors import BudgetExceeded
from search import MapSearch, groupoid_maps, two_groupoid_maps
from two_gpd import groupoid_as_two, resolution


def test_maps_between_group_groupoids(bz2, two_object_z2):
    found = groupoid_maps(bz2, bz2)
    assert len(found) == 2
    assert all(f.validate() == [] for f in found)
    assert len(groupoid_maps(two_object_z2, bz2)) == 4


def test_cocycles_of_a_resolution(bz2):
    found = two_groupoid_maps(resolution(bz2), gerbe_atlas(bz2).presheaf)
    assert len(found) == 2
    assert all(f.validate() == [] for f in found)


def test_limit_and_allowed(bz2):
    H = groupoid_as_two(bz2)
    assert len(two_groupoid_maps(H, H, limit=1)) == 1
    fixed = two_groupoid_maps(H, H, allowed=lambda U, level, cell, value: level != 1 or value == cell)
    assert len(fixed) == 1


def test_budget_is_enforced(bz2):
    with pytest.raises(BudgetExceeded) as info:
        MapSearch(resolution(bz2), gerbe_atlas(bz2).presheaf, budget=1).run()
    assert isinstance(info.value.partial, list)
    assert info.value.exit_code == 2
