# test_groups.py
from math import gcd

import numpy as np
from hypothesis import given, settings, strategies as st

from groups import (are_isomorphic, constant_group_presheaf, cyclic_group, direct_product, group_from_multiplication,
                    group_from_table, homomorphisms, is_group_sheaf, isomorphisms, sheafify_group, symmetric_group,
                    trivial_group)


def test_cyclic_group(z3):
    assert z3.order == 3
    assert z3.labels[z3.identity] == 0
    assert z3.is_abelian
    assert z3.inv(1) == 2
    assert z3.validate() == []


def test_symmetric_group(s3):
    assert s3.order == 6
    assert s3.labels[s3.identity] == "012"
    assert not s3.is_abelian
    assert len(s3.center) == 1
    assert sorted(s3.element_orders) == [1, 2, 2, 2, 3, 3]
    assert s3.validate() == []


def test_conjugation_tables_match_conjugate(s3):
    T = s3.conjugation_tables
    for k in range(s3.order):
        for i in range(s3.order):
            assert T[k, i] == s3.conjugate(k, i)


def test_invalid_tables():
    assert [v.axiom for v in group_from_table([0, 1], [[1, 0], [0, 0]]).validate()] == ["group-associativity"]
    assert [v.axiom for v in group_from_table([0, 1], [[0, 1], [1, 1]]).validate()] == ["group-inverse"]
    assert [v.axiom for v in group_from_table([0, 1], [[0, 2], [1, 0]]).validate()] == ["group-closure"]


def test_isomorphism_classes():
    z2 = cyclic_group(2)
    assert are_isomorphic(direct_product(z2, cyclic_group(3)), cyclic_group(6))
    assert not are_isomorphic(direct_product(z2, z2), cyclic_group(4))
    assert len(isomorphisms(symmetric_group(3), symmetric_group(3))) == 6
    assert len(homomorphisms(z2, cyclic_group(4))) == 2


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8))
def test_cyclic_homomorphisms_are_counted_by_gcd(n, m):
    G, H = cyclic_group(n), cyclic_group(m)
    found = homomorphisms(G, H)
    assert len(found) == gcd(n, m)
    for f in found:
        assert np.array_equal(H.table[f[:, None], f[None, :]], f[G.table])


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 6))
def test_direct_products_are_groups(n):
    G = direct_product(cyclic_group(n), symmetric_group(3))
    assert G.order == 6 * n
    assert G.validate() == []


def test_group_presheaf_keys_ignore_names(terminal, z2):
    P = constant_group_presheaf(terminal, z2)
    Q = constant_group_presheaf(terminal, cyclic_group(2))
    assert P.key == Q.key
    assert P.key != constant_group_presheaf(terminal, trivial_group()).key


def test_constant_group_presheaf_sheafifies_to_locally_constant_functions(two_point, z2):
    P = constant_group_presheaf(two_point, z2)
    assert P.validate() == []
    assert not is_group_sheaf(P)
    S = sheafify_group(P)
    assert {U: G.order for U, G in S.result.groups.items()} == {"empty": 1, "a": 2, "b": 2, "ab": 4}
    assert S.result.validate() == []
    assert is_group_sheaf(S.result)
    assert are_isomorphic(S.result.groups["ab"], direct_product(z2, z2))


def test_group_from_multiplication():
    G = group_from_multiplication(range(4), lambda a, b: (a + b) % 4, name="mod4")
    assert G.validate() == []
    assert G.key == cyclic_group(4).key
