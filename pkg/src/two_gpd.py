# two_gpd.py
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import product
from typing import Any, Callable, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from config import cache_size, debug_checks_enabled
from errors import ConsistencyError, PreconditionError
from gpd import (
    Functor, Groupoid, GroupoidPresheaf, aut_sheaf, automorphism_sheaves, discrete_groupoid, discrete_presheaf, is_cech,
    is_gerbe,
)
from groups import (
    FiniteGroup, GroupPresheaf, GroupSheafification, is_group_sheaf, isomorphisms as group_isomorphisms,
    scalar, sheafify_group,
)
from presheaf import PresheafMap, SetPresheaf, Sheafification, is_local_iso, sheafify
from report import PASS, Verdict, Violation, fail, ordered, sort_key
from sites import FiniteSite, Mor, Obj, slice_site
from union_find import DisjointSet

logger = logging.getLogger(__name__)

Cell = Hashable


class TwoGroupoid(ABC):
    """
    A strict 2-groupoid: a groupoid enriched in groupoids. `compose(b, a)` is b∘a,
    `vcompose(t, s)` is s followed by t, and `hcompose(t, s)` for s: a => a2 and
    t: b => b2 is the 2-cell b∘a => b2∘a2.
    """

    @abstractmethod
    def objects(self) -> Tuple[Hashable, ...]: ...

    @abstractmethod
    def hom(self, x: Hashable, y: Hashable) -> Tuple[Cell, ...]: ...

    @abstractmethod
    def cells(self, a: Cell, b: Cell) -> Tuple[Cell, ...]: ...

    @abstractmethod
    def ends(self, a: Cell) -> Tuple[Hashable, Hashable]: ...

    @abstractmethod
    def ends2(self, t: Cell) -> Tuple[Cell, Cell]: ...

    @abstractmethod
    def identity(self, x: Hashable) -> Cell: ...

    @abstractmethod
    def compose(self, b: Cell, a: Cell) -> Cell: ...

    @abstractmethod
    def inverse(self, a: Cell) -> Cell: ...

    @abstractmethod
    def identity2(self, a: Cell) -> Cell: ...

    @abstractmethod
    def vcompose(self, t: Cell, s: Cell) -> Cell: ...

    @abstractmethod
    def vinverse(self, s: Cell) -> Cell: ...

    @abstractmethod
    def hcompose(self, t: Cell, s: Cell) -> Cell: ...

    @cached_property
    def one_cells(self) -> Tuple[Cell, ...]:
        objs = self.objects()
        return tuple(a for x in objs for y in objs for a in self.hom(x, y))

    def two_cells_from(self, a: Cell) -> Tuple[Cell, ...]:
        x, y = self.ends(a)
        return tuple(t for b in self.hom(x, y) for t in self.cells(a, b))

    @cached_property
    def two_cells(self) -> Tuple[Cell, ...]:
        return tuple(t for a in self.one_cells for t in self.two_cells_from(a))

    def validate(self) -> List[Violation]:
        """Groupoid axioms on both levels, compatibility of ends, interchange."""
        violations: List[Violation] = []
        objs = self.objects()
        for x in objs:
            if self.ends(self.identity(x)) != (x, x):
                violations.append(Violation("identity", f"identity of {x!r} has the wrong ends", {"object": x}))
        for x, y in product(objs, objs):
            for a in self.hom(x, y):
                if self.ends(a) != (x, y):
                    violations.append(Violation("one-cell-ends", f"1-cell {a!r} is listed under the wrong pair",
                                                {"cell": a}))
        if violations:
            return violations
        for a in self.one_cells:
            x, y = self.ends(a)
            if self.compose(a, self.identity(x)) != a or self.compose(self.identity(y), a) != a:
                violations.append(Violation("unit", f"identities are not units for {a!r}", {"cell": a}))
            inv = self.inverse(a)
            if self.compose(inv, a) != self.identity(x) or self.compose(a, inv) != self.identity(y):
                violations.append(Violation("inverse", f"1-cell {a!r} has no inverse", {"cell": a}))
            for z in objs:
                for b in self.hom(y, z):
                    ba = self.compose(b, a)
                    if self.ends(ba) != (x, z):
                        violations.append(Violation("composition", "composite has the wrong ends", {"pair": [b, a]}))
                        continue
                    for w in objs:
                        for c in self.hom(z, w):
                            if self.compose(c, ba) != self.compose(self.compose(c, b), a):
                                violations.append(Violation("associativity", "1-cell composition is not associative",
                                                            {"triple": [c, b, a]}))
        if violations:
            return violations
        for t in self.two_cells:
            a, b = self.ends2(t)
            if self.vcompose(t, self.identity2(a)) != t or self.vcompose(self.identity2(b), t) != t:
                violations.append(Violation("unit2", f"identity 2-cells are not units for {t!r}", {"cell": t}))
            inv = self.vinverse(t)
            if self.vcompose(inv, t) != self.identity2(a) or self.vcompose(t, inv) != self.identity2(b):
                violations.append(Violation("inverse2", f"2-cell {t!r} has no inverse", {"cell": t}))
            for c in self.hom(*self.ends(a)):
                for t2 in self.cells(b, c):
                    if self.ends2(self.vcompose(t2, t)) != (a, c):
                        violations.append(Violation("vertical", "vertical composite has the wrong ends",
                                                    {"pair": [t2, t]}))
        if violations:
            return violations
        for s in self.two_cells:
            a, a2 = self.ends2(s)
            x, y = self.ends(a)
            for z in objs:
                for b in self.hom(y, z):
                    for b2 in self.hom(y, z):
                        for t in self.cells(b, b2):
                            ts = self.hcompose(t, s)
                            if self.ends2(ts) != (self.compose(b, a), self.compose(b2, a2)):
                                violations.append(Violation("horizontal", "horizontal composite has the wrong ends",
                                                            {"pair": [t, s]}))
                                continue
                            for a3 in self.hom(x, y):
                                for s2 in self.cells(a2, a3):
                                    for b3 in self.hom(y, z):
                                        for t2 in self.cells(b2, b3):
                                            left = self.hcompose(self.vcompose(t2, t), self.vcompose(s2, s))
                                            right = self.vcompose(self.hcompose(t2, s2), ts)
                                            if left != right:
                                                violations.append(Violation(
                                                    "interchange", "interchange law fails",
                                                    {"cells": [t2, t, s2, s]}))
        return violations


# ----------------------------------------------------------------------------------
# concrete 2-groupoids

@dataclass(frozen=True, eq=False)
class TableTwoGroupoid(TwoGroupoid):
    """A 2-groupoid given by explicit composition tables."""
    objs: Tuple[Hashable, ...]
    one: Dict[Cell, Tuple[Hashable, Hashable]]
    identities: Dict[Hashable, Cell]
    composition: Dict[Tuple[Cell, Cell], Cell]
    inverses: Dict[Cell, Cell]
    two: Dict[Cell, Tuple[Cell, Cell]]
    identities2: Dict[Cell, Cell]
    vcomposition: Dict[Tuple[Cell, Cell], Cell]
    vinverses: Dict[Cell, Cell]
    hcomposition: Dict[Tuple[Cell, Cell], Cell]

    @cached_property
    def _hom(self):
        hom: Dict = {}
        for a, ends in self.one.items():
            hom.setdefault(ends, []).append(a)
        return {k: ordered(v) for k, v in hom.items()}

    @cached_property
    def _cells(self):
        cells: Dict = {}
        for t, ends in self.two.items():
            cells.setdefault(ends, []).append(t)
        return {k: ordered(v) for k, v in cells.items()}

    def objects(self):
        return ordered(self.objs)

    def hom(self, x, y):
        return self._hom.get((x, y), ())

    def cells(self, a, b):
        return self._cells.get((a, b), ())

    def ends(self, a):
        return self.one[a]

    def ends2(self, t):
        return self.two[t]

    def identity(self, x):
        return self.identities[x]

    def compose(self, b, a):
        return self.composition[(b, a)]

    def inverse(self, a):
        return self.inverses[a]

    def identity2(self, a):
        return self.identities2[a]

    def vcompose(self, t, s):
        return self.vcomposition[(t, s)]

    def vinverse(self, s):
        return self.vinverses[s]

    def hcompose(self, t, s):
        return self.hcomposition[(t, s)]


def tabulate(H: TwoGroupoid) -> TableTwoGroupoid:
    """Materialize every table of a 2-groupoid."""
    objs = H.objects()
    one = {a: H.ends(a) for a in H.one_cells}
    composition = {}
    for a in H.one_cells:
        y = H.ends(a)[1]
        for z in objs:
            for b in H.hom(y, z):
                composition[(b, a)] = H.compose(b, a)
    two = {t: H.ends2(t) for t in H.two_cells}
    vcomposition, hcomposition = {}, {}
    for t, (a, b) in two.items():
        for s in H.two_cells_from(b):
            vcomposition[(s, t)] = H.vcompose(s, t)
        y = H.ends(a)[1]
        for z in objs:
            for c in H.hom(y, z):
                for u in H.two_cells_from(c):
                    hcomposition[(u, t)] = H.hcompose(u, t)
    return TableTwoGroupoid(
        objs, one, {x: H.identity(x) for x in objs}, composition, {a: H.inverse(a) for a in one},
        two, {a: H.identity2(a) for a in one}, vcomposition, {t: H.vinverse(t) for t in two}, hcomposition,
    )


@dataclass(frozen=True, eq=False)
class GroupoidTwo(TwoGroupoid):
    """A groupoid with identity 2-cells only; the identity 2-cell on a is ("=", a)."""
    groupoid: Groupoid

    def objects(self):
        return ordered(self.groupoid.objects)

    def hom(self, x, y):
        return self.groupoid.hom(x, y)

    def cells(self, a, b):
        return (("=", a),) if a == b else ()

    def ends(self, a):
        return self.groupoid.arrows[a]

    def ends2(self, t):
        return (t[1], t[1])

    def identity(self, x):
        return self.groupoid.identity(x)

    def compose(self, b, a):
        return self.groupoid.compose(b, a)

    def inverse(self, a):
        return self.groupoid.inverse(a)

    def identity2(self, a):
        return ("=", a)

    def vcompose(self, t, s):
        return t

    def vinverse(self, s):
        return s

    def hcompose(self, t, s):
        return ("=", self.groupoid.compose(t[1], s[1]))


@dataclass(frozen=True, eq=False)
class ResolutionSection(TwoGroupoid):
    """Arrows of a groupoid as 1-cells with exactly one 2-cell (a, b) between parallel a, b."""
    groupoid: Groupoid

    def objects(self):
        return ordered(self.groupoid.objects)

    def hom(self, x, y):
        return self.groupoid.hom(x, y)

    def cells(self, a, b):
        return ((a, b),) if self.groupoid.arrows[a] == self.groupoid.arrows[b] else ()

    def ends(self, a):
        return self.groupoid.arrows[a]

    def ends2(self, t):
        return t

    def identity(self, x):
        return self.groupoid.identity(x)

    def compose(self, b, a):
        return self.groupoid.compose(b, a)

    def inverse(self, a):
        return self.groupoid.inverse(a)

    def identity2(self, a):
        return (a, a)

    def vcompose(self, t, s):
        return (s[0], t[1])

    def vinverse(self, s):
        return (s[1], s[0])

    def hcompose(self, t, s):
        return (self.groupoid.compose(t[0], s[0]), self.groupoid.compose(t[1], s[1]))


@dataclass(frozen=True, eq=False)
class CrossedModuleTwoGroupoid(TwoGroupoid):
    """
    One object; 1-cells are elements q of Q and 2-cells are (q, a): q => boundary(a)*q
    for a in A. `action[q]` is the automorphism of A by which q acts.
    """
    Q: FiniteGroup
    A: FiniteGroup
    boundary: np.ndarray
    action: np.ndarray
    obj: Hashable = "*"

    def objects(self):
        return (self.obj,)

    def hom(self, x, y):
        return tuple(range(self.Q.order)) if x == y == self.obj else ()

    def _target(self, q, a):
        return self.Q.mul(int(self.boundary[a]), q)

    def cells(self, a, b):
        return tuple((a, k) for k in range(self.A.order) if self._target(a, k) == b)

    def ends(self, a):
        return (self.obj, self.obj)

    def ends2(self, t):
        return (t[0], self._target(*t))

    def identity(self, x):
        return self.Q.identity

    def compose(self, b, a):
        return self.Q.mul(b, a)

    def inverse(self, a):
        return self.Q.inv(a)

    def identity2(self, a):
        return (a, self.A.identity)

    def vcompose(self, t, s):
        return (s[0], self.A.mul(t[1], s[1]))

    def vinverse(self, s):
        return (self._target(*s), self.A.inv(s[1]))

    def hcompose(self, t, s):
        return (self.Q.mul(t[0], s[0]), self.A.mul(t[1], int(self.action[t[0]][s[1]])))


def subgroup(Q: FiniteGroup, elements: Sequence[int]) -> FiniteGroup:
    elements = sorted(elements)
    pos = {e: i for i, e in enumerate(elements)}
    table = np.array([[pos[Q.mul(a, b)] for b in elements] for a in elements], dtype=scalar)
    return FiniteGroup(tuple(Q.labels[e] for e in elements), table, name=f"sub({Q.name})")


def normal_subgroup_two_groupoid(Q: FiniteGroup, normal: Sequence[int]) -> CrossedModuleTwoGroupoid:
    """2-cells q => n*q for n in a normal subgroup, acting by conjugation."""
    normal = sorted(normal)
    N = subgroup(Q, normal)
    pos = {e: i for i, e in enumerate(normal)}
    boundary = np.array(normal, dtype=scalar)
    action = np.array([[pos[Q.conjugate(q, n)] for n in normal] for q in range(Q.order)], dtype=scalar)
    return CrossedModuleTwoGroupoid(Q, N, boundary, action)


def two_group(Q: FiniteGroup, A: FiniteGroup) -> CrossedModuleTwoGroupoid:
    """Abelian A of 2-cells on every 1-cell, trivial boundary and action."""
    if not A.is_abelian:
        raise ValueError(f"2-cell group {A.name!r} must be abelian")
    boundary = np.full(A.order, Q.identity, dtype=scalar)
    action = np.tile(np.arange(A.order, dtype=scalar), (Q.order, 1))
    return CrossedModuleTwoGroupoid(Q, A, boundary, action)


def discrete_two_groupoid(objects: Iterable[Hashable]) -> GroupoidTwo:
    return GroupoidTwo(discrete_groupoid(objects))


@dataclass(frozen=True, eq=False)
class IntervalProduct(TwoGroupoid):
    """A x 1 where 1 has objects 0, 1 and one arrow between any two of them."""
    base: TwoGroupoid

    def objects(self):
        return tuple((x, b) for x in self.base.objects() for b in (0, 1))

    def hom(self, x, y):
        return tuple((a, (x[1], y[1])) for a in self.base.hom(x[0], y[0]))

    def cells(self, a, b):
        if a[1] != b[1]:
            return ()
        return tuple((t, a[1]) for t in self.base.cells(a[0], b[0]))

    def ends(self, a):
        x, y = self.base.ends(a[0])
        return ((x, a[1][0]), (y, a[1][1]))

    def ends2(self, t):
        a, b = self.base.ends2(t[0])
        return ((a, t[1]), (b, t[1]))

    def identity(self, x):
        return (self.base.identity(x[0]), (x[1], x[1]))

    def compose(self, b, a):
        return (self.base.compose(b[0], a[0]), (a[1][0], b[1][1]))

    def inverse(self, a):
        return (self.base.inverse(a[0]), (a[1][1], a[1][0]))

    def identity2(self, a):
        return (self.base.identity2(a[0]), a[1])

    def vcompose(self, t, s):
        return (self.base.vcompose(t[0], s[0]), s[1])

    def vinverse(self, s):
        return (self.base.vinverse(s[0]), s[1])

    def hcompose(self, t, s):
        return (self.base.hcompose(t[0], s[0]), (s[1][0], t[1][1]))


# ----------------------------------------------------------------------------------
# presheaves and maps

@dataclass(frozen=True, eq=False)
class TwoFunctor:
    """Strict 2-functor given by its action on objects, 1-cells and 2-cells."""
    obj: Callable[[Hashable], Hashable]
    one: Callable[[Cell], Cell]
    two: Callable[[Cell], Cell]

    @classmethod
    def from_tables(cls, objects: Mapping, one_cells: Mapping, two_cells: Mapping) -> "TwoFunctor":
        return cls(objects.__getitem__, one_cells.__getitem__, two_cells.__getitem__)

    @classmethod
    def identity(cls) -> "TwoFunctor":
        return cls(_same, _same, _same)

    def then(self, other: "TwoFunctor") -> "TwoFunctor":
        """other∘self"""
        return TwoFunctor(lambda x: other.obj(self.obj(x)), lambda a: other.one(self.one(a)),
                          lambda t: other.two(self.two(t)))


def _same(x):
    return x


def two_functor_violations(F: TwoFunctor, S: TwoGroupoid, T: TwoGroupoid, where: Dict) -> List[Violation]:
    """
    Strictness of F: ends, identities, inverses and composites on both levels are
    preserved. Horizontal composites are checked through whiskering.
    """
    violations: List[Violation] = []
    tobjs = set(T.objects())
    for x in S.objects():
        if F.obj(x) not in tobjs:
            violations.append(Violation("functor-objects", f"object {x!r} is not sent to an object", dict(where, object=x)))
        elif F.one(S.identity(x)) != T.identity(F.obj(x)):
            violations.append(Violation("functor-identity", f"identity of {x!r} is not preserved", dict(where, object=x)))
    if violations:
        return violations
    for a in S.one_cells:
        x, y = S.ends(a)
        image = F.one(a)
        if image not in T.hom(F.obj(x), F.obj(y)):
            violations.append(Violation("functor-one-cells", f"1-cell {a!r} is not sent to a 1-cell between the images",
                                        dict(where, cell=a)))
            continue
        if F.two(S.identity2(a)) != T.identity2(image):
            violations.append(Violation("functor-identity2", f"identity 2-cell of {a!r} is not preserved",
                                        dict(where, cell=a)))
        for z in S.objects():
            for b in S.hom(y, z):
                if F.one(S.compose(b, a)) != T.compose(F.one(b), image):
                    violations.append(Violation("functor-composition", "1-cell composition is not preserved",
                                                dict(where, pair=[b, a])))
    if violations:
        return violations
    for t in S.two_cells:
        a, b = S.ends2(t)
        image = F.two(t)
        if image not in T.cells(F.one(a), F.one(b)):
            violations.append(Violation("functor-two-cells", f"2-cell {t!r} is not sent to a 2-cell between the images",
                                        dict(where, cell=t)))
            continue
        for u in S.two_cells_from(b):
            if F.two(S.vcompose(u, t)) != T.vcompose(F.two(u), image):
                violations.append(Violation("functor-vertical", "vertical composition is not preserved",
                                            dict(where, pair=[u, t])))
        x, y = S.ends(a)
        for z in S.objects():
            for c in S.hom(y, z):
                if F.two(S.hcompose(S.identity2(c), t)) != T.hcompose(T.identity2(F.one(c)), image):
                    violations.append(Violation("functor-whisker", "left whiskering is not preserved",
                                                dict(where, cell=t, by=c)))
            for c in S.hom(z, x):
                if F.two(S.hcompose(t, S.identity2(c))) != T.hcompose(image, T.identity2(F.one(c))):
                    violations.append(Violation("functor-whisker", "right whiskering is not preserved",
                                                dict(where, cell=t, by=c)))
    return violations


@dataclass(frozen=True, eq=False)
class TwoGroupoidPresheaf:
    """2-groupoids H(U) with strict restriction 2-functors H(U) -> H(V) for phi: V -> U."""
    site: FiniteSite
    sections: Dict[Obj, TwoGroupoid]
    restrict: Dict[Mor, TwoFunctor]
    name: str = ""

    def validate(self) -> List[Violation]:
        cat = self.site.category
        violations: List[Violation] = []
        for U in ordered(cat.objects):
            violations.extend(self.sections[U].validate())
        if violations:
            return violations
        for phi in ordered(cat.morphisms):
            V, U = cat.morphisms[phi]
            violations.extend(two_functor_violations(self.restrict[phi], self.sections[U], self.sections[V],
                                                     {"phi": phi}))
        if violations:
            return violations
        for U in ordered(cat.objects):
            H = self.sections[U]
            ident = self.restrict[cat.identity(U)]
            if any(ident.obj(x) != x for x in H.objects()) or any(ident.one(a) != a for a in H.one_cells) \
                    or any(ident.two(t) != t for t in H.two_cells):
                violations.append(Violation("identity", f"restriction along the identity of {U!r} moves a cell",
                                            {"object": U}))
        for (g, f), gf in sorted(cat.composition.items(), key=lambda kv: sort_key(kv[0])):
            H = self.sections[cat.target(g)]
            R, Rg, Rf = self.restrict[gf], self.restrict[g], self.restrict[f]
            if any(R.obj(x) != Rf.obj(Rg.obj(x)) for x in H.objects()) \
                    or any(R.one(a) != Rf.one(Rg.one(a)) for a in H.one_cells) \
                    or any(R.two(t) != Rf.two(Rg.two(t)) for t in H.two_cells):
                violations.append(Violation("functoriality", f"restriction along {gf!r} is not the composite",
                                            {"pair": [g, f]}))
        return violations


@dataclass(frozen=True, eq=False)
class TwoGroupoidMap:
    source: TwoGroupoidPresheaf
    target: TwoGroupoidPresheaf
    components: Dict[Obj, TwoFunctor]

    def validate(self) -> List[Violation]:
        cat = self.source.site.category
        violations: List[Violation] = []
        for U in ordered(cat.objects):
            violations.extend(two_functor_violations(self.components[U], self.source.sections[U],
                                                     self.target.sections[U], {"object": U}))
        if violations:
            return violations
        for phi in ordered(cat.morphisms):
            V, U = cat.morphisms[phi]
            H = self.source.sections[U]
            F_U, F_V = self.components[U], self.components[V]
            Rs, Rt = self.source.restrict[phi], self.target.restrict[phi]
            for x in H.objects():
                if F_V.obj(Rs.obj(x)) != Rt.obj(F_U.obj(x)):
                    violations.append(Violation("naturality", f"objects not natural along {phi!r}", {"phi": phi, "cell": x}))
            for a in H.one_cells:
                if F_V.one(Rs.one(a)) != Rt.one(F_U.one(a)):
                    violations.append(Violation("naturality", f"1-cells not natural along {phi!r}", {"phi": phi, "cell": a}))
            for t in H.two_cells:
                if F_V.two(Rs.two(t)) != Rt.two(F_U.two(t)):
                    violations.append(Violation("naturality", f"2-cells not natural along {phi!r}", {"phi": phi, "cell": t}))
        return violations


def identity_two_map(H: TwoGroupoidPresheaf) -> TwoGroupoidMap:
    ident = TwoFunctor.identity()
    return TwoGroupoidMap(H, H, {U: ident for U in H.site.objects})


def compose_two_maps(g: TwoGroupoidMap, f: TwoGroupoidMap) -> TwoGroupoidMap:
    """g∘f"""
    return TwoGroupoidMap(f.source, g.target, {U: F.then(g.components[U]) for U, F in f.components.items()})


def maps_agree(f: TwoGroupoidMap, g: TwoGroupoidMap) -> Verdict:
    """Equality of two maps with the same source, cell by cell."""
    for U in ordered(f.source.site.objects):
        H = f.source.sections[U]
        F, G = f.components[U], g.components[U]
        for x in H.objects():
            if F.obj(x) != G.obj(x):
                return fail(object=U, cell=x, level=0)
        for a in H.one_cells:
            if F.one(a) != G.one(a):
                return fail(object=U, cell=a, level=1)
        for t in H.two_cells:
            if F.two(t) != G.two(t):
                return fail(object=U, cell=t, level=2)
    return PASS


def groupoid_as_two(G: GroupoidPresheaf) -> TwoGroupoidPresheaf:
    sections = {U: GroupoidTwo(S) for U, S in G.sections.items()}
    restrict = {}
    for phi, F in G.restrict.items():
        restrict[phi] = TwoFunctor(F.objects.__getitem__, F.arrows.__getitem__,
                                   lambda t, F=F: ("=", F.arrows[t[1]]))
    return TwoGroupoidPresheaf(G.site, sections, restrict, name=G.name)


def constant_two_groupoid_presheaf(site: FiniteSite, H: TwoGroupoid, name: str = "") -> TwoGroupoidPresheaf:
    ident = TwoFunctor.identity()
    return TwoGroupoidPresheaf(site, {U: H for U in site.objects}, {phi: ident for phi in site.category.morphisms},
                               name=name)


def terminal_two_groupoid_presheaf(site: FiniteSite) -> TwoGroupoidPresheaf:
    return constant_two_groupoid_presheaf(site, discrete_two_groupoid(["*"]), name="*")


def map_to_terminal2(H: TwoGroupoidPresheaf) -> TwoGroupoidMap:
    point = terminal_two_groupoid_presheaf(H.site)
    to_point = TwoFunctor(lambda x: "*", lambda a: ("*", "*"), lambda t: ("=", ("*", "*")))
    return TwoGroupoidMap(H, point, {U: to_point for U in H.site.objects})


# ----------------------------------------------------------------------------------
# resolution

def resolution(G: GroupoidPresheaf) -> TwoGroupoidPresheaf:
    """Same objects and 1-cells as G, one 2-cell between any two parallel 1-cells."""
    sections = {U: ResolutionSection(S) for U, S in G.sections.items()}
    restrict = {}
    for phi, F in G.restrict.items():
        restrict[phi] = TwoFunctor(F.objects.__getitem__, F.arrows.__getitem__,
                                   lambda t, F=F: (F.arrows[t[0]], F.arrows[t[1]]))
    return TwoGroupoidPresheaf(G.site, sections, restrict, name=f"R({G.name})")


def resolution_map(f) -> TwoGroupoidMap:
    """R(f) for a map of groupoid presheaves."""
    comps = {U: TwoFunctor(F.objects.__getitem__, F.arrows.__getitem__,
                           lambda t, F=F: (F.arrows[t[0]], F.arrows[t[1]]))
             for U, F in f.components.items()}
    return TwoGroupoidMap(resolution(f.source), resolution(f.target), comps)


def interval_product(H: TwoGroupoidPresheaf) -> TwoGroupoidPresheaf:
    sections = {U: IntervalProduct(S) for U, S in H.sections.items()}
    restrict = {}
    for phi, F in H.restrict.items():
        restrict[phi] = TwoFunctor(lambda x, F=F: (F.obj(x[0]), x[1]), lambda a, F=F: (F.one(a[0]), a[1]),
                                   lambda t, F=F: (F.two(t[0]), t[1]))
    return TwoGroupoidPresheaf(H.site, sections, restrict, name=f"{H.name}x1")


def interval_end(H: TwoGroupoidPresheaf, end: int, product_presheaf: Optional[TwoGroupoidPresheaf] = None) -> TwoGroupoidMap:
    """The inclusion of H as the `end` face of H x 1."""
    target = product_presheaf or interval_product(H)
    comp = TwoFunctor(lambda x: (x, end), lambda a: (a, (end, end)), lambda t: (t, (end, end)))
    return TwoGroupoidMap(H, target, {U: comp for U in H.site.objects})


# ----------------------------------------------------------------------------------
# sheaves of groups, isomorphisms and homotopies

@dataclass(frozen=True)
class Iso:
    """An isomorphism of group sheaves on C/U: one index permutation per slice object."""
    source: str
    target: str
    components: Tuple[Tuple[Mor, Tuple[int, ...]], ...]

    @cached_property
    def _at(self) -> Dict[Mor, Tuple[int, ...]]:
        return dict(self.components)

    def at(self, psi: Mor) -> Tuple[int, ...]:
        return self._at[psi]

    def __repr__(self):
        return f"Iso({self.source[:8]}->{self.target[:8]}, {[c for _, c in self.components]})"


@dataclass(frozen=True)
class Homotopy:
    """The 2-cell f => c_k∘f given by a global section k of the target sheaf."""
    source: Iso
    target: Iso
    conjugator: int

    def __repr__(self):
        return f"Homotopy({self.source!r}, k={self.conjugator})"


def compose_isos(g: Iso, f: Iso) -> Iso:
    if f.target != g.source:
        raise ValueError("Isomorphisms are not composable")
    return Iso(f.source, g.target, tuple((psi, tuple(g.at(psi)[i] for i in comp)) for psi, comp in f.components))


def invert_iso(f: Iso) -> Iso:
    return Iso(f.target, f.source, tuple((psi, tuple(int(i) for i in np.argsort(comp))) for psi, comp in f.components))


def identity_iso(P: GroupPresheaf) -> Iso:
    return Iso(P.key, P.key, tuple((psi, tuple(range(P.groups[psi].order))) for psi in ordered(P.groups)))


@lru_cache(maxsize=cache_size())
def _slice_terminal(S: FiniteSite) -> Mor:
    cat = S.category
    for psi in S.objects:
        if cat.identity(psi) == (psi, psi):
            return psi
    raise ValueError(f"Site {S.name!r} has no terminal object")


def conjugate_iso(Q: GroupPresheaf, f: Iso, k: int) -> Iso:
    """c_k∘f for a global section k of the target Q of f."""
    comps = []
    for psi, comp in f.components:
        kp = int(Q.restrict[(psi, _slice_terminal(Q.site))][k])
        conj = Q.groups[psi].conjugation_tables[kp]
        comps.append((psi, tuple(int(conj[i]) for i in comp)))
    return Iso(f.source, f.target, tuple(comps))


def iso_is_natural(P: GroupPresheaf, Q: GroupPresheaf, f: Iso) -> bool:
    for m, (chi, psi) in P.site.category.morphisms.items():
        fp, fc = np.asarray(f.at(psi)), np.asarray(f.at(chi))
        if not np.array_equal(Q.restrict[m][fp], fc[P.restrict[m]]):
            return False
    return True


def sheaf_isomorphisms(P: GroupPresheaf, Q: GroupPresheaf, limit: Optional[int] = None) -> List[Iso]:
    """
    All isomorphisms P -> Q of group presheaves on the same slice site, by
    backtracking over slice objects with naturality checked against assigned ones.
    """
    S = P.site
    cat = S.category
    order = list(S.objects_by_height)
    candidates = {}
    for psi in order:
        candidates[psi] = [tuple(int(v) for v in m) for m in group_isomorphisms(P.groups[psi], Q.groups[psi])]
        if not candidates[psi]:
            return []
    constraints = {psi: [] for psi in order}
    position = {psi: i for i, psi in enumerate(order)}
    for m, (chi, psi) in cat.morphisms.items():
        later = chi if position[chi] >= position[psi] else psi
        constraints[later].append((m, chi, psi))
    found: List[Iso] = []
    assigned: Dict[Mor, Tuple[int, ...]] = {}

    def consistent(psi) -> bool:
        for m, chi, tgt in constraints[psi]:
            fp, fc = np.asarray(assigned[tgt]), np.asarray(assigned[chi])
            if not np.array_equal(Q.restrict[m][fp], fc[P.restrict[m]]):
                return False
        return True

    def extend(i: int) -> bool:
        if i == len(order):
            found.append(Iso(P.key, Q.key, tuple((psi, assigned[psi]) for psi in ordered(order))))
            return limit is not None and len(found) >= limit
        psi = order[i]
        for cand in candidates[psi]:
            assigned[psi] = cand
            if consistent(psi) and extend(i + 1):
                return True
        assigned.pop(psi, None)
        return False

    extend(0)
    return sorted(found, key=sort_key)


def restrict_sheaf(site: FiniteSite, P: GroupPresheaf, phi: Mor) -> GroupPresheaf:
    """phi*P on C/V for a sheaf P on C/U and phi: V -> U."""
    cat = site.category
    V = cat.source(phi)
    S = slice_site(site, V)
    groups = {psi: P.groups[cat.compose(phi, psi)] for psi in S.objects}
    restrict = {(g, psi): P.restrict[(g, cat.compose(phi, psi))] for (g, psi) in S.category.morphisms}
    return GroupPresheaf(S, groups, restrict, name=P.name)


class GroupSheafAtlas:
    """
    A restriction-closed family of group sheaves on slices, with all isomorphisms
    between them as 1-cells and all conjugation homotopies as 2-cells.
    """

    def __init__(self, site: FiniteSite, entries: Iterable[Tuple[Obj, GroupPresheaf]], name: str = "",
                 declared: Optional[Dict[Tuple[str, str], Iterable[Iso]]] = None):
        self.site = site
        self.name = name
        self.declared = {k: frozenset(v) for k, v in (declared or {}).items()}
        self._sheaves: Dict[str, GroupPresheaf] = {}
        self._base: Dict[str, Obj] = {}
        self._by_object: Dict[Obj, List[str]] = {U: [] for U in site.objects}
        self._restriction: Dict[Tuple[str, Mor], str] = {}
        self._isos: Dict[Tuple[str, str], Tuple[Iso, ...]] = {}
        self._seeds: List[Tuple[Obj, GroupPresheaf]] = []
        for U, P in entries:
            self.add(U, P)

    def add(self, obj: Obj, P: GroupPresheaf) -> str:
        """Register P and all its restrictions; returns the key of P."""
        self._seeds.append((obj, P))
        cat = self.site.category
        queue = [(obj, P)]
        while queue:
            U, Q = queue.pop()
            if Q.key in self._sheaves:
                continue
            self._sheaves[Q.key] = Q
            self._base[Q.key] = U
            self._by_object[U].append(Q.key)
            for phi in cat.into(U):
                R = Q if phi == cat.identity(U) else restrict_sheaf(self.site, Q, phi)
                self._restriction[(Q.key, phi)] = R.key
                queue.append((cat.source(phi), R))
        return P.key

    @property
    def entries(self) -> Tuple[Tuple[Obj, GroupPresheaf], ...]:
        return tuple(self._seeds)

    def keys(self) -> Tuple[str, ...]:
        return tuple(sorted(self._sheaves))

    def objects_at(self, obj: Obj) -> Tuple[str, ...]:
        return tuple(sorted(self._by_object.get(obj, ())))

    def __contains__(self, key: str) -> bool:
        return key in self._sheaves

    def sheaf(self, key: str) -> GroupPresheaf:
        return self._sheaves[key]

    def base(self, key: str) -> Obj:
        return self._base[key]

    def restrict_key(self, key: str, phi: Mor) -> str:
        return self._restriction[(key, phi)]

    def isomorphisms(self, source: str, target: str) -> Tuple[Iso, ...]:
        pair = (source, target)
        if pair not in self._isos:
            if self._base[source] != self._base[target]:
                self._isos[pair] = ()
            else:
                self._isos[pair] = tuple(sheaf_isomorphisms(self._sheaves[source], self._sheaves[target]))
        return self._isos[pair]

    def homotopies(self, f: Iso, g: Iso) -> Tuple[Homotopy, ...]:
        if (f.source, f.target) != (g.source, g.target):
            return ()
        Q = self._sheaves[f.target]
        top = _slice_terminal(Q.site)
        return tuple(Homotopy(f, g, k) for k in range(Q.groups[top].order) if conjugate_iso(Q, f, k) == g)

    def restrict_iso(self, f: Iso, phi: Mor) -> Iso:
        cat = self.site.category
        V = cat.source(phi)
        comps = tuple((psi, f.at(cat.compose(phi, psi))) for psi in ordered(cat.into(V)))
        return Iso(self.restrict_key(f.source, phi), self.restrict_key(f.target, phi), comps)

    def restrict_homotopy(self, h: Homotopy, phi: Mor) -> Homotopy:
        Q = self._sheaves[h.source.target]
        k = int(Q.restrict[(phi, _slice_terminal(Q.site))][h.conjugator])
        return Homotopy(self.restrict_iso(h.source, phi), self.restrict_iso(h.target, phi), k)

    def section(self, obj: Obj) -> "AtlasSection":
        return AtlasSection(self, obj)

    @cached_property
    def presheaf(self) -> TwoGroupoidPresheaf:
        sections = {U: AtlasSection(self, U) for U in self.site.objects}
        restrict = {phi: TwoFunctor(lambda k, phi=phi: self.restrict_key(k, phi),
                                    lambda f, phi=phi: self.restrict_iso(f, phi),
                                    lambda h, phi=phi: self.restrict_homotopy(h, phi))
                    for phi in self.site.category.morphisms}
        return TwoGroupoidPresheaf(self.site, sections, restrict, name=self.name or "atlas")

    def isomorphic(self, P: GroupPresheaf, Q: GroupPresheaf) -> bool:
        return bool(sheaf_isomorphisms(P, Q, limit=1))

    def locally_isomorphic(self, obj: Obj, P: GroupPresheaf) -> Verdict:
        """The sieve of phi for which phi*P is isomorphic to an atlas object is covering."""
        cat = self.site.category
        members = []
        for phi in cat.into(obj):
            R = restrict_sheaf(self.site, P, phi)
            if any(self.isomorphic(R, self._sheaves[k]) for k in self.objects_at(cat.source(phi))):
                members.append(phi)
        if self.site.is_covering(obj, members):
            return PASS
        return fail(object=obj, sheaf=P.name, sieve=ordered(members))

    def saturated(self, extra: Iterable[Tuple[Obj, GroupPresheaf]] = (), name: str = "") -> "GroupSheafAtlas":
        """The atlas on the current objects together with `extra` and all their restrictions."""
        atlas = GroupSheafAtlas(self.site, list(self._seeds) + list(extra), name=name or self.name,
                                declared=self.declared)
        atlas._isos.update(self._isos)
        return atlas

    def inclusion(self, bigger: "GroupSheafAtlas") -> TwoGroupoidMap:
        missing = [k for k in self.keys() if k not in bigger]
        if missing:
            raise PreconditionError("Atlas is not contained in the larger atlas", {"missing": missing})
        return identity_map_between(self.presheaf, bigger.presheaf)

    def validate(self) -> List[Violation]:
        violations: List[Violation] = []
        for key in self.keys():
            P = self._sheaves[key]
            for v in P.validate():
                violations.append(Violation(v.axiom, v.detail, dict(v.witness, sheaf=P.name)))
            verdict = is_group_sheaf(P)
            if not verdict:
                violations.append(Violation("sheaf-condition", f"{P.name!r} is not a sheaf",
                                            dict(verdict.witness, sheaf=P.name)))
        for (src, tgt), declared in sorted(self.declared.items()):
            if src not in self or tgt not in self:
                violations.append(Violation("declared-cells", "declared isomorphisms name an unknown sheaf",
                                            {"source": src, "target": tgt}))
                continue
            actual = frozenset(self.isomorphisms(src, tgt))
            if declared != actual:
                violations.append(Violation("fullness", "declared isomorphisms are not all isomorphisms",
                                            {"source": src, "target": tgt, "declared": len(declared),
                                             "actual": len(actual)}))
        return violations


def identity_map_between(source: TwoGroupoidPresheaf, target: TwoGroupoidPresheaf) -> TwoGroupoidMap:
    ident = TwoFunctor.identity()
    return TwoGroupoidMap(source, target, {U: ident for U in source.site.objects})


@dataclass(frozen=True, eq=False)
class AtlasSection(TwoGroupoid):
    atlas: GroupSheafAtlas
    obj: Obj

    def objects(self):
        return self.atlas.objects_at(self.obj)

    def hom(self, x, y):
        return self.atlas.isomorphisms(x, y)

    def cells(self, a, b):
        return self.atlas.homotopies(a, b)

    def ends(self, a):
        return (a.source, a.target)

    def ends2(self, t):
        return (t.source, t.target)

    def identity(self, x):
        return identity_iso(self.atlas.sheaf(x))

    def compose(self, b, a):
        return compose_isos(b, a)

    def inverse(self, a):
        return invert_iso(a)

    def identity2(self, a):
        Q = self.atlas.sheaf(a.target)
        return Homotopy(a, a, Q.groups[_slice_terminal(Q.site)].identity)

    def vcompose(self, t, s):
        Q = self.atlas.sheaf(s.source.target)
        return Homotopy(s.source, t.target, Q.groups[_slice_terminal(Q.site)].mul(t.conjugator, s.conjugator))

    def vinverse(self, s):
        Q = self.atlas.sheaf(s.source.target)
        return Homotopy(s.target, s.source, Q.groups[_slice_terminal(Q.site)].inv(s.conjugator))

    def hcompose(self, t, s):
        R = self.atlas.sheaf(t.source.target)
        top = _slice_terminal(R.site)
        moved = t.source.at(top)[s.conjugator]
        k = R.groups[top].mul(t.conjugator, moved)
        return Homotopy(compose_isos(t.source, s.source), compose_isos(t.target, s.target), k)


# ----------------------------------------------------------------------------------
# the automorphism-sheaf 2-groupoid and the canonical cocycle

@dataclass(frozen=True, eq=False)
class AutSheafSection(TwoGroupoid):
    """Objects of G(U); 1-cells (x, y, f) for isomorphisms f of automorphism sheaves."""
    atlas: GroupSheafAtlas
    nu: Mapping[Hashable, str]

    def objects(self):
        return ordered(self.nu)

    def hom(self, x, y):
        return tuple((x, y, f) for f in self.atlas.isomorphisms(self.nu[x], self.nu[y]))

    def cells(self, a, b):
        if a[:2] != b[:2]:
            return ()
        return tuple((a[0], a[1], h) for h in self.atlas.homotopies(a[2], b[2]))

    def ends(self, a):
        return (a[0], a[1])

    def ends2(self, t):
        return ((t[0], t[1], t[2].source), (t[0], t[1], t[2].target))

    def identity(self, x):
        return (x, x, identity_iso(self.atlas.sheaf(self.nu[x])))

    def compose(self, b, a):
        return (a[0], b[1], compose_isos(b[2], a[2]))

    def inverse(self, a):
        return (a[1], a[0], invert_iso(a[2]))

    def identity2(self, a):
        return (a[0], a[1], AtlasSection(self.atlas, None).identity2(a[2]))

    def vcompose(self, t, s):
        return (s[0], s[1], AtlasSection(self.atlas, None).vcompose(t[2], s[2]))

    def vinverse(self, s):
        return (s[0], s[1], AtlasSection(self.atlas, None).vinverse(s[2]))

    def hcompose(self, t, s):
        return (s[0], t[1], AtlasSection(self.atlas, None).hcompose(t[2], s[2]))


@dataclass(frozen=True, eq=False)
class AutSheafTwoGroupoid:
    """G_* together with the atlas of automorphism sheaves and the labelling nu: x -> key."""
    gerbe: GroupoidPresheaf
    atlas: GroupSheafAtlas
    nu: Dict[Obj, Dict[Hashable, str]]
    presheaf: TwoGroupoidPresheaf

    def nu_map(self, target: Optional[GroupSheafAtlas] = None) -> TwoGroupoidMap:
        """G_* -> atlas presheaf; the target must contain every automorphism sheaf."""
        target = target or self.atlas
        missing = [k for comps in self.nu.values() for k in comps.values() if k not in target]
        if missing:
            raise PreconditionError("Atlas does not contain the automorphism sheaves of the gerbe",
                                    {"missing": ordered(missing)})
        comps = {U: TwoFunctor(lambda x, U=U: self.nu[U][x], lambda a: a[2], lambda t: t[2])
                 for U in self.gerbe.site.objects}
        return TwoGroupoidMap(self.presheaf, target.presheaf, comps)


@lru_cache(maxsize=cache_size())
def aut_sheaf_two_groupoid(G: GroupoidPresheaf) -> AutSheafTwoGroupoid:
    site = G.site
    cat = site.category
    entries, nu = [], {}
    for U in site.objects:
        nu[U] = {}
        for x in G.sections[U].objects:
            P = aut_sheaf(G, U, x)
            entries.append((U, P))
            nu[U][x] = P.key
    atlas = GroupSheafAtlas(site, entries, name=f"Aut({G.name})")
    sections = {U: AutSheafSection(atlas, nu[U]) for U in site.objects}
    restrict = {}
    for phi in cat.morphisms:
        F = G.restrict[phi]
        restrict[phi] = TwoFunctor(
            F.objects.__getitem__,
            lambda a, F=F, phi=phi: (F.objects[a[0]], F.objects[a[1]], atlas.restrict_iso(a[2], phi)),
            lambda t, F=F, phi=phi: (F.objects[t[0]], F.objects[t[1]], atlas.restrict_homotopy(t[2], phi)),
        )
    presheaf = TwoGroupoidPresheaf(site, sections, restrict, name=f"{G.name}_*")
    logger.debug(f"Automorphism-sheaf 2-groupoid of {G.name}: {len(atlas.keys())} sheaves")
    return AutSheafTwoGroupoid(G, atlas, nu, presheaf)


def conjugation_iso(G: GroupoidPresheaf, obj: Obj, a) -> Iso:
    """c_a: the sheafified conjugation by an arrow a: x -> y of G(U), as an isomorphism on C/U."""
    A = automorphism_sheaves(G)
    cat = G.site.category
    S = G.sections[obj]
    x, y = S.source(a), S.target(a)
    comps = []
    for psi in ordered(cat.into(obj)):
        arr = A.conjugation(cat.source(psi), G.apply_arrow(psi, a))
        comps.append((psi, tuple(int(v) for v in arr)))
    return Iso(aut_sheaf(G, obj, x).key, aut_sheaf(G, obj, y).key, tuple(comps))


def canonical_cocycle(G: GroupoidPresheaf) -> TwoGroupoidMap:
    """
    R(G) -> G_*: an arrow a: x -> y goes to (x, y, c_a); the 2-cell (a, b) goes to the
    homotopy given by the image of b∘a^-1 in the sheafified automorphisms of y.
    """
    verdict = is_gerbe(G)
    if not verdict:
        raise PreconditionError(f"{G.name!r} is not a gerbe", verdict.witness)
    star = aut_sheaf_two_groupoid(G)
    A = automorphism_sheaves(G)
    comps = {}
    for U in G.site.objects:
        S = G.sections[U]

        def one(a, U=U, S=S):
            return (S.source(a), S.target(a), conjugation_iso(G, U, a))

        def two(t, U=U, S=S):
            a, b = t
            x, y = S.source(a), S.target(a)
            k = A.unit(U, y, S.compose(b, S.inverse(a)))
            f, g = conjugation_iso(G, U, a), conjugation_iso(G, U, b)
            return (x, y, Homotopy(f, g, k))

        comps[U] = TwoFunctor(_same, one, two)
    return TwoGroupoidMap(resolution(G), star.presheaf, comps)


# ----------------------------------------------------------------------------------
# path components and homotopy sheaves

class PathComponents:
    """Path components of the hom groupoids of every section of H, memoized."""

    def __init__(self, H: TwoGroupoidPresheaf):
        self.H = H
        self._classes: Dict[Tuple[Obj, Hashable, Hashable], Dict[Cell, Cell]] = {}
        self._objects: Dict[Obj, Dict[Hashable, Hashable]] = {}

    def canonical(self, obj: Obj, a: Cell) -> Cell:
        S = self.H.sections[obj]
        x, y = S.ends(a)
        key = (obj, x, y)
        if key not in self._classes:
            classes: DisjointSet = DisjointSet()
            for b in S.hom(x, y):
                classes.make_set(b)
                for t in S.two_cells_from(b):
                    classes.union(b, S.ends2(t)[1])
            self._classes[key] = {b: group[0] for group in classes.classes() for b in group}
        return self._classes[key][a]

    def component_of(self, obj: Obj) -> Dict[Hashable, Hashable]:
        if obj not in self._objects:
            S = self.H.sections[obj]
            classes: DisjointSet = DisjointSet()
            objs = S.objects()
            for x in objs:
                classes.make_set(x)
            for x, y in product(objs, objs):
                if S.hom(x, y):
                    classes.union(x, y)
            self._objects[obj] = {x: group[0] for group in classes.classes() for x in group}
        return self._objects[obj]


@lru_cache(maxsize=cache_size())
def path_components(H: TwoGroupoidPresheaf) -> PathComponents:
    return PathComponents(H)


def pi0_two(H: TwoGroupoidPresheaf) -> SetPresheaf:
    pc = path_components(H)
    cat = H.site.category
    sections = {U: ordered(pc.component_of(U).values()) for U in H.site.objects}
    restrict = {phi: {c: pc.component_of(cat.source(phi))[H.restrict[phi].obj(c)]
                      for c in sections[cat.target(phi)]}
                for phi in cat.morphisms}
    return SetPresheaf(H.site, sections, restrict, name=f"pi0({H.name})")


def path_component_groupoid(H: TwoGroupoidPresheaf) -> Tuple[GroupoidPresheaf, TwoGroupoidMap]:
    """
    πH: same objects, arrows are 2-cell-connectivity classes of 1-cells, each named by
    its least 1-cell. Returned with eta: H -> πH.
    """
    pc = path_components(H)
    sections = {}
    for U, S in H.sections.items():
        objs = S.objects()
        arrows, composition, inverses = {}, {}, {}
        for x, y in product(objs, objs):
            for a in S.hom(x, y):
                arrows[pc.canonical(U, a)] = (x, y)
        for a, (x, y) in arrows.items():
            inverses[a] = pc.canonical(U, S.inverse(a))
            for z in objs:
                for b in {pc.canonical(U, c) for c in S.hom(y, z)}:
                    composition[(b, a)] = pc.canonical(U, S.compose(b, a))
        identities = {x: pc.canonical(U, S.identity(x)) for x in objs}
        sections[U] = Groupoid(objs, arrows, identities, composition, inverses)
    restrict = {}
    cat = H.site.category
    for phi, F in H.restrict.items():
        V, U = cat.morphisms[phi]
        restrict[phi] = Functor({x: F.obj(x) for x in sections[U].objects},
                                {a: pc.canonical(V, F.one(a)) for a in sections[U].arrows})
    pi = GroupoidPresheaf(H.site, sections, restrict, name=f"pi({H.name})")
    target = groupoid_as_two(pi)
    comps = {U: TwoFunctor(_same, lambda a, U=U: pc.canonical(U, a), lambda t, U=U, S=S: ("=", pc.canonical(U, S.ends2(t)[0])))
             for U, S in H.sections.items()}
    return pi, TwoGroupoidMap(H, target, comps)


def _loop_presheaf(H: TwoGroupoidPresheaf, obj: Obj, x: Hashable, level: int) -> GroupPresheaf:
    """π1 (level 1) or π2 (level 2) of H at x as a presheaf of groups on C/U."""
    pc = path_components(H)
    site = H.site
    cat = site.category
    S = slice_site(site, obj)
    groups, index = {}, {}
    for psi in S.objects:
        V = cat.source(psi)
        T = H.sections[V]
        y = H.restrict[psi].obj(x)
        if level == 1:
            elements = ordered({pc.canonical(V, a) for a in T.hom(y, y)})
            pos = {e: i for i, e in enumerate(elements)}
            table = [[pos[pc.canonical(V, T.compose(a, b))] for b in elements] for a in elements]
        else:
            one = T.identity(y)
            elements = ordered(T.cells(one, one))
            pos = {e: i for i, e in enumerate(elements)}
            table = [[pos[T.vcompose(a, b)] for b in elements] for a in elements]
            if debug_checks_enabled():
                for a, b in product(elements, elements):
                    if T.vcompose(a, b) != T.vcompose(b, a) or T.hcompose(a, b) != T.vcompose(a, b):
                        raise ConsistencyError("2-cells on an identity do not satisfy Eckmann-Hilton",
                                               {"object": V, "cells": [repr(a), repr(b)]})
        groups[psi] = FiniteGroup(elements, np.array(table, dtype=scalar).reshape(len(elements), len(elements)),
                                  name=f"pi{level}")
        index[psi] = pos
    restrict = {}
    for (g, psi), (chi, _) in S.category.morphisms.items():
        F = H.restrict[g]
        W = cat.source(chi)
        if level == 1:
            restrict[(g, psi)] = np.array([index[chi][pc.canonical(W, F.one(a))] for a in groups[psi].labels],
                                          dtype=scalar)
        else:
            restrict[(g, psi)] = np.array([index[chi][F.two(t)] for t in groups[psi].labels], dtype=scalar)
    return GroupPresheaf(S, groups, restrict, name=f"pi{level}({H.name},{x!r})")


def _loop_map(f: TwoGroupoidMap, obj: Obj, x: Hashable, level: int) -> PresheafMap:
    source = _loop_presheaf(f.source, obj, x, level)
    target = _loop_presheaf(f.target, obj, f.components[obj].obj(x), level)
    pc = path_components(f.target)
    cat = f.source.site.category
    comps = {}
    for psi in source.site.objects:
        V = cat.source(psi)
        F = f.components[V]
        G_t = target.groups[psi]
        if level == 1:
            comps[psi] = {i: G_t.index(pc.canonical(V, F.one(a))) for i, a in enumerate(source.groups[psi].labels)}
        else:
            comps[psi] = {i: G_t.index(F.two(t)) for i, t in enumerate(source.groups[psi].labels)}
    return PresheafMap(source.underlying, target.underlying, comps)


@dataclass(frozen=True, eq=False)
class HomotopySheaves:
    pi0: Sheafification
    pi1: Dict[Tuple[Obj, Hashable], GroupSheafification]
    pi2: Dict[Tuple[Obj, Hashable], GroupSheafification]


def homotopy_sheaves(H: TwoGroupoidPresheaf,
                     basepoints: Optional[Iterable[Tuple[Obj, Hashable]]] = None) -> HomotopySheaves:
    """Sheafified path components, and sheafified π1 and π2 at each basepoint (U, x)."""
    if basepoints is None:
        basepoints = [(U, x) for U in ordered(H.site.objects) for x in H.sections[U].objects()]
    pi1, pi2 = {}, {}
    for U, x in basepoints:
        pi1[(U, x)] = sheafify_group(_loop_presheaf(H, U, x, 1))
        pi2[(U, x)] = sheafify_group(_loop_presheaf(H, U, x, 2))
    return HomotopySheaves(sheafify(pi0_two(H)), pi1, pi2)


def pi0_two_map(f: TwoGroupoidMap) -> PresheafMap:
    source, target = pi0_two(f.source), pi0_two(f.target)
    pc = path_components(f.target)
    comps = {U: {c: pc.component_of(U)[f.components[U].obj(c)] for c in source.at(U)} for U in f.source.site.objects}
    return PresheafMap(source, target, comps)


def is_lwe2(f: TwoGroupoidMap) -> Verdict:
    """Local weak equivalence: π0, and π1 and π2 at every basepoint, are local isomorphisms."""
    verdict = is_local_iso(pi0_two_map(f))
    if not verdict:
        return fail(stage="pi0", **verdict.witness)
    for U in ordered(f.source.site.objects):
        for x in f.source.sections[U].objects():
            for level in (1, 2):
                verdict = is_local_iso(_loop_map(f, U, x, level))
                if not verdict:
                    return fail(stage=f"pi{level}", object=U, basepoint=x, detail=verdict.witness)
    return PASS


# ----------------------------------------------------------------------------------
# hom groupoids and the two equivalence checks

def hom_groupoid_presheaf(H: TwoGroupoidPresheaf, obj: Obj, x: Hashable, y: Hashable) -> GroupoidPresheaf:
    """H(x, y) on C/U: 1-cells psi*x -> psi*y as objects, 2-cells as arrows."""
    site = H.site
    cat = site.category
    S = slice_site(site, obj)
    sections = {}
    for psi in S.objects:
        T = H.sections[cat.source(psi)]
        F = H.restrict[psi]
        objs = T.hom(F.obj(x), F.obj(y))
        arrows = {t: T.ends2(t) for a in objs for t in T.two_cells_from(a)}
        composition = {(t, s): T.vcompose(t, s) for s in arrows for t in T.two_cells_from(arrows[s][1])}
        sections[psi] = Groupoid(objs, arrows, {a: T.identity2(a) for a in objs}, composition,
                                 {t: T.vinverse(t) for t in arrows})
    restrict = {}
    for (g, psi), (chi, _) in S.category.morphisms.items():
        F = H.restrict[g]
        restrict[(g, psi)] = Functor({a: F.one(a) for a in sections[psi].objects},
                                     {t: F.two(t) for t in sections[psi].arrows})
    return GroupoidPresheaf(S, sections, restrict, name=f"{H.name}({x!r},{y!r})")


@dataclass(frozen=True)
class EquivalenceCheck:
    """Both sides of an if-and-only-if, evaluated independently."""
    left: Verdict
    right: Verdict

    @property
    def agree(self) -> bool:
        return self.left.holds == self.right.holds

    def as_dict(self) -> Dict[str, Any]:
        return {"left": self.left.as_dict(), "right": self.right.as_dict(), "agree": self.agree}


def _all_homs_cech(H: TwoGroupoidPresheaf) -> Verdict:
    for U in ordered(H.site.objects):
        objs = H.sections[U].objects()
        for x, y in product(objs, objs):
            verdict = is_cech(hom_groupoid_presheaf(H, U, x, y))
            if not verdict:
                return fail(object=U, pair=[x, y], detail=verdict.witness)
    return PASS


def check_eta_equivalence(H: TwoGroupoidPresheaf) -> EquivalenceCheck:
    """eta: H -> πH is a local weak equivalence iff every hom groupoid presheaf is Čech."""
    _, eta = path_component_groupoid(H)
    return EquivalenceCheck(is_lwe2(eta), _all_homs_cech(H))


def components_map2(H: TwoGroupoidPresheaf) -> TwoGroupoidMap:
    """H -> π0H as a discrete 2-groupoid presheaf."""
    target = groupoid_as_two(discrete_presheaf(pi0_two(H)))
    pc = path_components(H)
    comps = {}
    for U, S in H.sections.items():
        comp = pc.component_of(U)
        comps[U] = TwoFunctor(lambda x, comp=comp: comp[x],
                              lambda a, comp=comp, S=S: (comp[S.ends(a)[0]],) * 2,
                              lambda t, comp=comp, S=S: ("=", (comp[S.ends(S.ends2(t)[0])[0]],) * 2))
    return TwoGroupoidMap(H, target, comps)


def check_components_equivalence(H: TwoGroupoidPresheaf) -> EquivalenceCheck:
    """H -> π0H is a local weak equivalence iff every H(x, y) and πH are Čech."""
    pi, _ = path_component_groupoid(H)
    right = _all_homs_cech(H)
    if right:
        verdict = is_cech(pi)
        right = PASS if verdict else fail(stage="path components", detail=verdict.witness)
    return EquivalenceCheck(is_lwe2(components_map2(H)), right)
