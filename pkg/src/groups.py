# groups.py
import hashlib
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import permutations, product
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np

from config import cache_size
from presheaf import PlusConstruction, PresheafMap, SetPresheaf, is_sheaf, plus
from report import Verdict, Violation, ordered
from sites import FiniteSite, Mor, Obj

logger = logging.getLogger(__name__)

scalar = np.int64


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """
    A finite group as a Cayley table over element indices:
    `table[i, j]` is the index of labels[i] * labels[j].
    """
    labels: Tuple[Hashable, ...]
    table: np.ndarray
    name: str = ""

    @property
    def order(self) -> int:
        return len(self.labels)

    @cached_property
    def identity(self) -> int:
        n = self.order
        row = np.arange(n, dtype=scalar)
        for i in range(n):
            if np.array_equal(self.table[i], row) and np.array_equal(self.table[:, i], row):
                return i
        raise ValueError(f"Group {self.name!r} has no identity element")

    @cached_property
    def inverses(self) -> np.ndarray:
        # inverses[i] is the j with table[i, j] = identity
        return np.argmax(self.table == self.identity, axis=1).astype(scalar)

    @cached_property
    def _index(self) -> Dict[Hashable, int]:
        return {label: i for i, label in enumerate(self.labels)}

    def index(self, label: Hashable) -> int:
        return self._index[label]

    def mul(self, i: int, j: int) -> int:
        return int(self.table[i, j])

    def inv(self, i: int) -> int:
        return int(self.inverses[i])

    def conjugate(self, k: int, i: int) -> int:
        """k i k^-1"""
        return int(self.table[self.table[k, i], self.inverses[k]])

    @cached_property
    def conjugation_tables(self) -> np.ndarray:
        # row k is the permutation i -> k i k^-1
        return self.table[self.table, self.inverses[:, None]]

    @cached_property
    def element_orders(self) -> Tuple[int, ...]:
        orders = []
        for i in range(self.order):
            k, x = 1, i
            while x != self.identity:
                x = int(self.table[x, i])
                k += 1
            orders.append(k)
        return tuple(orders)

    def subgroup_generated(self, elements: Sequence[int]) -> frozenset:
        found = {self.identity}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for a in frontier:
                for s in elements:
                    b = int(self.table[a, s])
                    if b not in found:
                        found.add(b)
                        nxt.append(b)
            frontier = nxt
        return frozenset(found)

    @cached_property
    def generators(self) -> Tuple[int, ...]:
        """Greedy generating set: repeatedly add an element of largest order outside the span."""
        gens: List[int] = []
        span = frozenset([self.identity])
        by_order = sorted(range(self.order), key=lambda i: (-self.element_orders[i], i))
        while len(span) < self.order:
            s = next(i for i in by_order if i not in span)
            gens.append(s)
            span = self.subgroup_generated(gens)
        return tuple(gens)

    @cached_property
    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    @cached_property
    def center(self) -> Tuple[int, ...]:
        return tuple(i for i in range(self.order) if np.array_equal(self.table[i], self.table[:, i]))

    @cached_property
    def key(self) -> str:
        """Digest of the table; labels do not take part."""
        return hashlib.sha1(np.ascontiguousarray(self.table, dtype=scalar).tobytes()).hexdigest()

    def validate(self) -> List[Violation]:
        n = self.order
        t = self.table
        if t.shape != (n, n) or (n and (t.min() < 0 or t.max() >= n)):
            return [Violation("group-closure", f"table of {self.name!r} is not closed", {"shape": list(t.shape)})]
        if n == 0:
            return [Violation("group-identity", f"group {self.name!r} is empty", {})]
        idx = np.arange(n)
        left = t[t[:, :, None], idx[None, None, :]]
        right = t[idx[:, None, None], t[None, :, :]]
        bad = np.argwhere(left != right)
        if len(bad):
            a, b, c = (int(v) for v in bad[0])
            return [Violation("group-associativity", f"table of {self.name!r} is not associative",
                              {"triple": [self.labels[a], self.labels[b], self.labels[c]]})]
        try:
            e = self.identity
        except ValueError:
            return [Violation("group-identity", f"group {self.name!r} has no identity", {})]
        for i in range(n):
            if e not in t[i]:
                return [Violation("group-inverse", f"{self.labels[i]!r} has no inverse", {"element": self.labels[i]})]
        return []


# ----------------------------------------------------------------------------------
# constructors

def group_from_table(labels: Sequence[Hashable], table, name: str = "") -> FiniteGroup:
    return FiniteGroup(tuple(labels), np.asarray(table, dtype=scalar), name)


def group_from_multiplication(labels: Sequence[Hashable], multiply, name: str = "") -> FiniteGroup:
    labels = tuple(labels)
    index = {label: i for i, label in enumerate(labels)}
    table = np.array([[index[multiply(a, b)] for b in labels] for a in labels], dtype=scalar)
    return FiniteGroup(labels, table, name)


def cyclic_group(n: int) -> FiniteGroup:
    idx = np.arange(n, dtype=scalar)
    return FiniteGroup(tuple(range(n)), np.add.outer(idx, idx) % n, name=f"Z{n}")


def trivial_group() -> FiniteGroup:
    return cyclic_group(1)


def symmetric_group(n: int) -> FiniteGroup:
    """Permutations of range(n); the product p*q applies q first."""
    perms = [np.array(p, dtype=scalar) for p in permutations(range(n))]
    index = {p.tobytes(): i for i, p in enumerate(perms)}
    table = np.array([[index[p[q].tobytes()] for q in perms] for p in perms], dtype=scalar)
    labels = tuple("".join(str(int(v)) for v in p) for p in perms)
    return FiniteGroup(labels, table, name=f"S{n}")


def direct_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    n, m = G.order, H.order
    labels = tuple((a, b) for a in G.labels for b in H.labels)
    gi = np.repeat(np.arange(n), m)
    hi = np.tile(np.arange(m), n)
    table = G.table[gi[:, None], gi[None, :]] * m + H.table[hi[:, None], hi[None, :]]
    return FiniteGroup(labels, table.astype(scalar), name=f"{G.name}x{H.name}")


# ----------------------------------------------------------------------------------
# homomorphisms

def homomorphisms(G: FiniteGroup, H: FiniteGroup, bijective: bool = False) -> List[np.ndarray]:
    """
    All homomorphisms G -> H as index arrays, found by choosing generator images
    (orders must divide) and extending; each candidate is checked on the whole table.
    """
    gens = G.generators
    choices = []
    for s in gens:
        o = G.element_orders[s]
        choices.append([h for h in range(H.order) if o % H.element_orders[h] == 0
                        and (not bijective or H.element_orders[h] == o)])
    if bijective and G.order != H.order:
        return []
    found = []
    for images in product(*choices):
        m = _extend(G, H, gens, images)
        if m is None:
            continue
        if not np.array_equal(H.table[m[:, None], m[None, :]], m[G.table]):
            continue
        if bijective and len(set(m.tolist())) != H.order:
            continue
        found.append(m)
    return found


def _extend(G: FiniteGroup, H: FiniteGroup, gens: Sequence[int], images: Sequence[int]) -> Optional[np.ndarray]:
    m = np.full(G.order, -1, dtype=scalar)
    m[G.identity] = H.identity
    frontier = [G.identity]
    while frontier:
        nxt = []
        for a in frontier:
            for s, t in zip(gens, images):
                b = int(G.table[a, s])
                image = int(H.table[m[a], t])
                if m[b] < 0:
                    m[b] = image
                    nxt.append(b)
                elif m[b] != image:
                    return None
        frontier = nxt
    if (m < 0).any():
        return None
    return m


def isomorphisms(G: FiniteGroup, H: FiniteGroup) -> List[np.ndarray]:
    return homomorphisms(G, H, bijective=True)


def are_isomorphic(G: FiniteGroup, H: FiniteGroup) -> bool:
    if G.order != H.order or sorted(G.element_orders) != sorted(H.element_orders):
        return False
    return bool(isomorphisms(G, H))


# ----------------------------------------------------------------------------------
# presheaves of groups

@dataclass(frozen=True, eq=False)
class GroupPresheaf:
    """
    Groups P(U) with restriction homomorphisms; `restrict[phi]` for phi: V -> U is an
    index array from P(U) into P(V).
    """
    site: FiniteSite
    groups: Dict[Obj, FiniteGroup]
    restrict: Dict[Mor, np.ndarray]
    name: str = ""

    def apply(self, phi: Mor, i: int) -> int:
        return int(self.restrict[phi][i])

    @cached_property
    def underlying(self) -> SetPresheaf:
        """The presheaf of element indices."""
        sections = {U: tuple(range(self.groups[U].order)) for U in self.site.objects}
        restrict = {phi: {i: int(v) for i, v in enumerate(arr)} for phi, arr in self.restrict.items()}
        return SetPresheaf(self.site, sections, restrict, name=self.name)

    @cached_property
    def key(self) -> str:
        """Digest over group tables and restriction arrays in id order."""
        digest = hashlib.sha1()
        for U in ordered(self.site.objects):
            digest.update(repr(U).encode())
            digest.update(np.ascontiguousarray(self.groups[U].table, dtype=scalar).tobytes())
        for phi in ordered(self.restrict):
            digest.update(repr(phi).encode())
            digest.update(np.ascontiguousarray(self.restrict[phi], dtype=scalar).tobytes())
        return digest.hexdigest()

    def validate(self) -> List[Violation]:
        violations: List[Violation] = []
        for U in ordered(self.site.objects):
            if U not in self.groups:
                violations.append(Violation("group-section", f"no group at {U!r}", {"object": U}))
                continue
            violations.extend(self.groups[U].validate())
        if violations:
            return violations
        cat = self.site.category
        for phi in ordered(cat.morphisms):
            V, U = cat.morphisms[phi]
            arr = self.restrict.get(phi)
            GU, GV = self.groups[U], self.groups[V]
            if arr is None or arr.shape != (GU.order,) or (GU.order and (arr.min() < 0 or arr.max() >= GV.order)):
                violations.append(Violation("restriction-total", f"bad restriction array along {phi!r}", {"phi": phi}))
                continue
            if not np.array_equal(GV.table[arr[:, None], arr[None, :]], arr[GU.table]):
                violations.append(Violation("restriction-homomorphism",
                                            f"restriction along {phi!r} is not a homomorphism", {"phi": phi}))
        if violations:
            return violations
        violations.extend(self.underlying.validate())
        return violations


@dataclass(frozen=True, eq=False)
class GroupPresheafMap:
    source: GroupPresheaf
    target: GroupPresheaf
    components: Dict[Obj, np.ndarray]

    @cached_property
    def underlying(self) -> PresheafMap:
        return PresheafMap(self.source.underlying, self.target.underlying,
                           {U: {i: int(v) for i, v in enumerate(arr)} for U, arr in self.components.items()})


def constant_group_presheaf(site: FiniteSite, G: FiniteGroup) -> GroupPresheaf:
    ident = np.arange(G.order, dtype=scalar)
    return GroupPresheaf(site, {U: G for U in site.objects},
                         {phi: ident.copy() for phi in site.category.morphisms}, name=f"const{G.name}")


def is_group_sheaf(P: GroupPresheaf) -> Verdict:
    return is_sheaf(P.underlying)


def _plus_group(P: GroupPresheaf) -> Tuple[GroupPresheaf, Dict[Obj, np.ndarray]]:
    stage = plus(P.underlying)
    site = P.site
    cat = site.category
    groups: Dict[Obj, FiniteGroup] = {}
    index: Dict[Obj, Dict] = {}
    for U in site.objects:
        elements = stage.result.at(U)
        index[U] = {fam: i for i, fam in enumerate(elements)}
        table = np.zeros((len(elements), len(elements)), dtype=scalar)
        for i, a in enumerate(elements):
            av = dict(a)
            for j, b in enumerate(elements):
                prod = tuple((f, P.groups[cat.source(f)].mul(av[f], v)) for f, v in b if f in av)
                table[i, j] = index[U][stage.canonicalize(U, prod)]
        groups[U] = FiniteGroup(tuple(range(len(elements))), table, name=f"{P.groups[U].name}+")
    restrict = {}
    for phi, mapping in stage.result.restrict.items():
        V, U = cat.morphisms[phi]
        restrict[phi] = np.array([index[V][mapping[a]] for a in stage.result.at(U)], dtype=scalar)
    unit = {U: np.array([index[U][stage.unit.apply(U, i)] for i in range(P.groups[U].order)], dtype=scalar)
            for U in site.objects}
    return GroupPresheaf(site, groups, restrict, name=f"{P.name}+"), unit


@dataclass(frozen=True, eq=False)
class GroupSheafification:
    """
    Element i of stage k at U is the i-th canonical family of `stages[k].result.at(U)`;
    `first` is the intermediate group presheaf.
    """
    source: GroupPresheaf
    result: GroupPresheaf
    unit: GroupPresheafMap
    first: GroupPresheaf
    stages: Tuple[PlusConstruction, PlusConstruction]


@lru_cache(maxsize=cache_size())
def sheafify_group(P: GroupPresheaf) -> GroupSheafification:
    """
    Two plus stages with the pointwise product on the intersection of the two
    families' sieves.
    """
    first, u1 = _plus_group(P)
    second, u2 = _plus_group(first)
    unit = {U: u2[U][u1[U]] for U in P.site.objects}
    result = GroupPresheaf(P.site, second.groups, second.restrict, name=f"~{P.name}")
    logger.debug(f"Sheafified group presheaf {P.name}: orders {[g.order for g in result.groups.values()]}")
    stages = (plus(P.underlying), plus(first.underlying))
    return GroupSheafification(P, result, GroupPresheafMap(P, result, unit), first, stages)
