# test_union_find.py
from hypothesis import given, strategies as st

from union_find import DisjointSet


def test_classes_are_sorted_by_least_member():
    ds = DisjointSet()
    for e in (5, 3, 1, 4):
        ds.make_set(e)
    assert ds.union(5, 1)
    assert not ds.union(1, 5)
    assert ds.classes() == ((1, 5), (3,), (4,))
    assert ds.canonical(5) == 1


@given(st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9)), max_size=20))
def test_union_is_an_equivalence(pairs):
    ds = DisjointSet()
    for e in range(10):
        ds.make_set(e)
    for x, y in pairs:
        ds.union(x, y)
    for x, y in pairs:
        assert ds.same(x, y)
        assert ds.canonical(x) == ds.canonical(y)
    members = [e for c in ds.classes() for e in c]
    assert sorted(members) == list(range(10))
