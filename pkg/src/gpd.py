# gpd.py
import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import product
from typing import Dict, Hashable, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from config import cache_size, debug_checks_enabled
from errors import ConsistencyError
from groups import FiniteGroup, GroupPresheaf, GroupSheafification, homomorphisms, scalar, sheafify_group
from presheaf import (
    PresheafMap, SetPresheaf, element_site, image_presheaf, is_local_epi, is_local_iso, map_to_terminal,
)
from report import PASS, Verdict, Violation, fail, ordered, sort_key
from sites import FiniteSite, Mor, Obj, slice_site
from union_find import DisjointSet

logger = logging.getLogger(__name__)

Arrow = Hashable


@dataclass(frozen=True, eq=False)
class Groupoid:
    """A finite groupoid; `composition[(g, f)]` is g∘f."""
    objects: Tuple[Hashable, ...]
    arrows: Dict[Arrow, Tuple[Hashable, Hashable]]
    identities: Dict[Hashable, Arrow]
    composition: Dict[Tuple[Arrow, Arrow], Arrow]
    inverses: Dict[Arrow, Arrow]

    def source(self, a: Arrow) -> Hashable:
        return self.arrows[a][0]

    def target(self, a: Arrow) -> Hashable:
        return self.arrows[a][1]

    def identity(self, x: Hashable) -> Arrow:
        return self.identities[x]

    def compose(self, g: Arrow, f: Arrow) -> Arrow:
        try:
            return self.composition[(g, f)]
        except KeyError:
            raise ValueError(f"Arrows {g!r} and {f!r} are not composable")

    def inverse(self, a: Arrow) -> Arrow:
        return self.inverses[a]

    def conjugate(self, a: Arrow, s: Arrow) -> Arrow:
        """a∘s∘a^-1"""
        return self.compose(self.compose(a, s), self.inverse(a))

    @cached_property
    def _hom(self) -> Dict[Tuple[Hashable, Hashable], Tuple[Arrow, ...]]:
        hom: Dict[Tuple[Hashable, Hashable], List[Arrow]] = {}
        for a, ends in self.arrows.items():
            hom.setdefault(ends, []).append(a)
        return {ends: ordered(arrs) for ends, arrs in hom.items()}

    def hom(self, x: Hashable, y: Hashable) -> Tuple[Arrow, ...]:
        return self._hom.get((x, y), ())

    @cached_property
    def component_of(self) -> Dict[Hashable, Hashable]:
        """Each object to the least object of its component."""
        classes: DisjointSet = DisjointSet()
        for x in self.objects:
            classes.make_set(x)
        for src, tgt in self.arrows.values():
            classes.union(src, tgt)
        return {x: group[0] for group in classes.classes() for x in group}

    def components(self) -> Tuple[Hashable, ...]:
        return ordered(self.component_of.values())

    def automorphism_group(self, x: Hashable) -> FiniteGroup:
        arrows = self.hom(x, x)
        index = {a: i for i, a in enumerate(arrows)}
        table = np.array([[index[self.compose(a, b)] for b in arrows] for a in arrows], dtype=scalar)
        return FiniteGroup(arrows, table.reshape(len(arrows), len(arrows)), name=f"Aut({x!r})")

    def validate(self) -> List[Violation]:
        violations: List[Violation] = []
        objects = set(self.objects)
        for a, (s, t) in sorted(self.arrows.items(), key=lambda kv: sort_key(kv[0])):
            if s not in objects or t not in objects:
                violations.append(Violation("arrow-endpoints", f"arrow {a!r} has an unknown endpoint", {"arrow": a}))
        for x in self.objects:
            ident = self.identities.get(x)
            if ident is None or self.arrows.get(ident) != (x, x):
                violations.append(Violation("identity", f"object {x!r} has no identity", {"object": x}))
        if violations:
            return violations
        arrows = ordered(self.arrows)
        for g, f in product(arrows, arrows):
            if self.target(f) != self.source(g):
                continue
            gf = self.composition.get((g, f))
            if gf is None or self.arrows.get(gf) != (self.source(f), self.target(g)):
                violations.append(Violation("composition", "missing or ill-typed composite", {"pair": [g, f]}))
        if violations:
            return violations
        for a in arrows:
            s, t = self.arrows[a]
            if self.composition[(a, self.identities[s])] != a or self.composition[(self.identities[t], a)] != a:
                violations.append(Violation("unit", f"identities are not units for {a!r}", {"arrow": a}))
            inv = self.inverses.get(a)
            if inv is None or self.arrows.get(inv) != (t, s) \
                    or self.composition[(inv, a)] != self.identities[s] or self.composition[(a, inv)] != self.identities[t]:
                violations.append(Violation("inverse", f"arrow {a!r} has no two-sided inverse", {"arrow": a}))
        for h, g, f in product(arrows, arrows, arrows):
            if self.target(f) == self.source(g) and self.target(g) == self.source(h):
                if self.composition[(h, self.composition[(g, f)])] != self.composition[(self.composition[(h, g)], f)]:
                    violations.append(Violation("associativity", "composition is not associative",
                                                {"triple": [h, g, f]}))
        return violations


@dataclass(frozen=True, eq=False)
class Functor:
    """Object and arrow assignments of a functor between finite groupoids."""
    objects: Mapping[Hashable, Hashable]
    arrows: Mapping[Arrow, Arrow]


def functor_violations(F: Functor, source: Groupoid, target: Groupoid, where: Dict) -> List[Violation]:
    violations = []
    tobj = set(target.objects)
    for x in source.objects:
        if F.objects.get(x) not in tobj:
            violations.append(Violation("functor-objects", f"object {x!r} is not sent to an object", dict(where, object=x)))
    if violations:
        return violations
    for a in ordered(source.arrows):
        image = F.arrows.get(a)
        if image not in target.arrows:
            violations.append(Violation("functor-arrows", f"arrow {a!r} is not sent to an arrow", dict(where, arrow=a)))
        elif target.arrows[image] != (F.objects[source.source(a)], F.objects[source.target(a)]):
            violations.append(Violation("functor-ends", f"arrow {a!r} is sent to an arrow with other ends",
                                        dict(where, arrow=a)))
    if violations:
        return violations
    for x in source.objects:
        if F.arrows[source.identity(x)] != target.identity(F.objects[x]):
            violations.append(Violation("functor-identity", f"identity of {x!r} is not preserved", dict(where, object=x)))
    for (g, f), gf in sorted(source.composition.items(), key=lambda kv: sort_key(kv[0])):
        if F.arrows[gf] != target.compose(F.arrows[g], F.arrows[f]):
            violations.append(Violation("functor-composition", "composition is not preserved",
                                        dict(where, pair=[g, f])))
            break
    return violations


@dataclass(frozen=True, eq=False)
class GroupoidPresheaf:
    """Groupoids G(U) with restriction functors; `restrict[phi]` for phi: V -> U goes G(U) -> G(V)."""
    site: FiniteSite
    sections: Dict[Obj, Groupoid]
    restrict: Dict[Mor, Functor]
    name: str = ""

    def apply_object(self, phi: Mor, x: Hashable) -> Hashable:
        return self.restrict[phi].objects[x]

    def apply_arrow(self, phi: Mor, a: Arrow) -> Arrow:
        return self.restrict[phi].arrows[a]

    @cached_property
    def objects_presheaf(self) -> SetPresheaf:
        return SetPresheaf(self.site, {U: ordered(G.objects) for U, G in self.sections.items()},
                           {phi: dict(F.objects) for phi, F in self.restrict.items()}, name=f"Ob({self.name})")

    @cached_property
    def arrows_presheaf(self) -> SetPresheaf:
        return SetPresheaf(self.site, {U: ordered(G.arrows) for U, G in self.sections.items()},
                           {phi: dict(F.arrows) for phi, F in self.restrict.items()}, name=f"Mor({self.name})")

    def validate(self) -> List[Violation]:
        cat = self.site.category
        violations: List[Violation] = []
        for U in ordered(cat.objects):
            if U not in self.sections:
                violations.append(Violation("section", f"no groupoid at {U!r}", {"object": U}))
                continue
            violations.extend(self.sections[U].validate())
        if violations:
            return violations
        for phi in ordered(cat.morphisms):
            V, U = cat.morphisms[phi]
            if phi not in self.restrict:
                violations.append(Violation("restriction-total", f"no restriction along {phi!r}", {"phi": phi}))
                continue
            violations.extend(functor_violations(self.restrict[phi], self.sections[U], self.sections[V], {"phi": phi}))
        if violations:
            return violations
        violations.extend(self.objects_presheaf.validate())
        violations.extend(self.arrows_presheaf.validate())
        return violations


@dataclass(frozen=True, eq=False)
class GroupoidMap:
    source: GroupoidPresheaf
    target: GroupoidPresheaf
    components: Dict[Obj, Functor]

    def apply_object(self, obj: Obj, x: Hashable) -> Hashable:
        return self.components[obj].objects[x]

    def apply_arrow(self, obj: Obj, a: Arrow) -> Arrow:
        return self.components[obj].arrows[a]

    def validate(self) -> List[Violation]:
        cat = self.source.site.category
        violations: List[Violation] = []
        for U in ordered(cat.objects):
            violations.extend(functor_violations(self.components[U], self.source.sections[U],
                                                 self.target.sections[U], {"object": U}))
        if violations:
            return violations
        for phi in ordered(cat.morphisms):
            V, U = cat.morphisms[phi]
            for x in self.source.sections[U].objects:
                if self.apply_object(V, self.source.apply_object(phi, x)) != \
                        self.target.apply_object(phi, self.apply_object(U, x)):
                    violations.append(Violation("naturality-objects", f"not natural along {phi!r}",
                                                {"phi": phi, "object": x}))
            for a in ordered(self.source.sections[U].arrows):
                if self.apply_arrow(V, self.source.apply_arrow(phi, a)) != \
                        self.target.apply_arrow(phi, self.apply_arrow(U, a)):
                    violations.append(Violation("naturality-arrows", f"not natural along {phi!r}",
                                                {"phi": phi, "arrow": a}))
        return violations


# ----------------------------------------------------------------------------------
# builders

def standard_groupoid(components: Sequence[Tuple[Sequence[Hashable], FiniteGroup]]) -> Groupoid:
    """
    Disjoint union of connected groupoids, each given by its objects and vertex group.
    Arrows are (x, y, h); (y, z, k)∘(x, y, h) = (x, z, k*h).
    """
    objects, arrows, identities, composition, inverses = [], {}, {}, {}, {}
    for objs, H in components:
        objects.extend(objs)
        for x, y in product(objs, objs):
            for h in H.labels:
                arrows[(x, y, h)] = (x, y)
        e = H.labels[H.identity]
        for x in objs:
            identities[x] = (x, x, e)
        for x, y, z in product(objs, objs, objs):
            for i, j in product(range(H.order), range(H.order)):
                composition[((y, z, H.labels[j]), (x, y, H.labels[i]))] = (x, z, H.labels[H.mul(j, i)])
        for x, y in product(objs, objs):
            for i in range(H.order):
                inverses[(x, y, H.labels[i])] = (y, x, H.labels[H.inv(i)])
    return Groupoid(tuple(objects), arrows, identities, composition, inverses)


def group_groupoid(G: FiniteGroup, obj: Hashable = "*") -> Groupoid:
    return standard_groupoid([([obj], G)])


def discrete_groupoid(objects: Iterable[Hashable]) -> Groupoid:
    """Identities only; the identity of x is (x, x)."""
    objects = ordered(objects)
    arrows = {(x, x): (x, x) for x in objects}
    return Groupoid(objects, arrows, {x: (x, x) for x in objects},
                    {((x, x), (x, x)): (x, x) for x in objects}, {(x, x): (x, x) for x in objects})


def relation_groupoid(objects: Iterable[Hashable], related) -> Groupoid:
    """At most one arrow (x, y), present iff related(x, y); `related` must be an equivalence."""
    objects = ordered(objects)
    arrows = {(x, y): (x, y) for x in objects for y in objects if related(x, y)}
    composition = {((y, z), (x, y2)): (x, z) for (y, z) in arrows for (x, y2) in arrows if y2 == y}
    return Groupoid(objects, arrows, {x: (x, x) for x in objects}, composition, {(x, y): (y, x) for x, y in arrows})


def constant_groupoid_presheaf(site: FiniteSite, G: Groupoid, name: str = "") -> GroupoidPresheaf:
    ident = Functor({x: x for x in G.objects}, {a: a for a in G.arrows})
    return GroupoidPresheaf(site, {U: G for U in site.objects}, {phi: ident for phi in site.category.morphisms},
                            name=name)


def groupoid_of_group_presheaf(P: GroupPresheaf, obj: Hashable = "*") -> GroupoidPresheaf:
    """One object per section; arrows are (obj, obj, i) for element indices i."""
    sections = {U: standard_groupoid([([obj], FiniteGroup(tuple(range(G.order)), G.table, G.name))])
                for U, G in P.groups.items()}
    restrict = {}
    for phi, arr in P.restrict.items():
        restrict[phi] = Functor({obj: obj}, {(obj, obj, i): (obj, obj, int(v)) for i, v in enumerate(arr)})
    return GroupoidPresheaf(P.site, sections, restrict, name=f"B{P.name}")


def discrete_presheaf(X: SetPresheaf) -> GroupoidPresheaf:
    sections = {U: discrete_groupoid(X.at(U)) for U in X.site.objects}
    restrict = {phi: Functor(dict(m), {(x, x): (y, y) for x, y in m.items()}) for phi, m in X.restrict.items()}
    return GroupoidPresheaf(X.site, sections, restrict, name=f"disc({X.name})")


def identity_groupoid_map(G: GroupoidPresheaf) -> GroupoidMap:
    return GroupoidMap(G, G, {U: Functor({x: x for x in S.objects}, {a: a for a in S.arrows})
                              for U, S in G.sections.items()})


def functors(S: Groupoid, T: Groupoid) -> List[Functor]:
    """
    Every functor S -> T. On each component of S a functor is fixed by the image of the
    least object, the images of the other objects, the images of chosen arrows from
    the least object, and a homomorphism of vertex groups.
    """
    per_component = []
    for x0 in S.components():
        members = [x for x in S.objects if S.component_of[x] == x0]
        spanning = {x: S.hom(x0, x)[0] for x in members}
        spanning[x0] = S.identity(x0)
        loops = S.automorphism_group(x0)
        others = [x for x in members if x != x0]
        options = []
        for y0 in T.objects:
            reachable = [y for y in T.objects if T.component_of[y] == T.component_of[y0]]
            aut = T.automorphism_group(y0)
            homs = homomorphisms(loops, aut)
            for targets in product(reachable, repeat=len(others)):
                obj_map = dict(zip(others, targets))
                obj_map[x0] = y0
                for chosen in product(*(T.hom(y0, obj_map[x]) for x in others)):
                    images = dict(zip(others, chosen))
                    images[x0] = T.identity(y0)
                    for rho in homs:
                        arrow_map = {}
                        for x in members:
                            for y in members:
                                for a in S.hom(x, y):
                                    loop = S.compose(S.inverse(spanning[y]), S.compose(a, spanning[x]))
                                    inner = aut.labels[rho[loops.index(loop)]]
                                    arrow_map[a] = T.compose(images[y], T.compose(inner, T.inverse(images[x])))
                        options.append((obj_map, arrow_map))
        per_component.append(options)
    found = []
    for choice in product(*per_component):
        objects, arrows = {}, {}
        for obj_map, arrow_map in choice:
            objects.update(obj_map)
            arrows.update(arrow_map)
        found.append(Functor(objects, arrows))
    return found


# ----------------------------------------------------------------------------------
# path components and Čech groupoids

def pi0(G: GroupoidPresheaf) -> SetPresheaf:
    """Path components; each component is named by its least object."""
    cat = G.site.category
    sections = {U: G.sections[U].components() for U in G.site.objects}
    restrict = {}
    for phi in cat.morphisms:
        V, U = cat.morphisms[phi]
        comp_V = G.sections[V].component_of
        restrict[phi] = {c: comp_V[G.apply_object(phi, c)] for c in sections[U]}
    return SetPresheaf(G.site, sections, restrict, name=f"pi0({G.name})")


def pi0_map(f: GroupoidMap) -> PresheafMap:
    source, target = pi0(f.source), pi0(f.target)
    comps = {}
    for U in f.source.site.objects:
        comp_T = f.target.sections[U].component_of
        comps[U] = {c: comp_T[f.apply_object(U, c)] for c in source.at(U)}
    return PresheafMap(source, target, comps)


def components_map(G: GroupoidPresheaf) -> GroupoidMap:
    """G -> pi0(G) viewed as a discrete groupoid presheaf."""
    target = discrete_presheaf(pi0(G))
    comps = {}
    for U, S in G.sections.items():
        comp = S.component_of
        comps[U] = Functor({x: comp[x] for x in S.objects}, {a: (comp[S.source(a)],) * 2 for a in S.arrows})
    return GroupoidMap(G, target, comps)


def cech_groupoid(p: PresheafMap) -> GroupoidPresheaf:
    """Objects X(U); one arrow (x, y) exactly when p(x) = p(y)."""
    X = p.source
    sections = {U: relation_groupoid(X.at(U), lambda x, y, U=U: p.apply(U, x) == p.apply(U, y))
                for U in X.site.objects}
    restrict = {}
    for phi, m in X.restrict.items():
        V, U = X.site.category.morphisms[phi]
        restrict[phi] = Functor(dict(m), {(x, y): (m[x], m[y]) for x, y in sections[U].arrows})
    return GroupoidPresheaf(X.site, sections, restrict, name=f"C({X.name})")


def cech_comparison(p: PresheafMap) -> GroupoidMap:
    """C(p) -> image of p as a discrete groupoid presheaf."""
    C = cech_groupoid(p)
    target = discrete_presheaf(image_presheaf(p))
    comps = {U: Functor({x: p.apply(U, x) for x in S.objects},
                        {(x, y): (p.apply(U, x), p.apply(U, x)) for x, y in S.arrows})
             for U, S in C.sections.items()}
    return GroupoidMap(C, target, comps)


# ----------------------------------------------------------------------------------
# hom and automorphism presheaves on slices

def _check_object(G: GroupoidPresheaf, obj: Obj, x: Hashable) -> None:
    if obj not in G.sections:
        raise ValueError(f"Unknown object {obj!r} of the site")
    if x not in G.sections[obj].objects:
        raise ValueError(f"{x!r} is not an object of G({obj!r})")


def hom_presheaf(G: GroupoidPresheaf, obj: Obj, x: Hashable, y: Hashable) -> SetPresheaf:
    """
    G(x, y) on C/U: the section at psi: V -> U is the set of arrows psi*x -> psi*y in G(V).
    """
    _check_object(G, obj, x)
    _check_object(G, obj, y)
    site = G.site
    cat = site.category
    S = slice_site(site, obj)
    ends = {psi: (G.apply_object(psi, x), G.apply_object(psi, y)) for psi in S.objects}
    sections = {psi: G.sections[cat.source(psi)].hom(*ends[psi]) for psi in S.objects}
    restrict = {}
    for (g, psi) in S.category.morphisms:
        restrict[(g, psi)] = {a: G.apply_arrow(g, a) for a in sections[psi]}
    return SetPresheaf(S, sections, restrict, name=f"{G.name}({x!r},{y!r})")


def aut_presheaf(G: GroupoidPresheaf, obj: Obj, x: Hashable) -> SetPresheaf:
    return hom_presheaf(G, obj, x, x)


def aut_map(f: GroupoidMap, obj: Obj, x: Hashable) -> PresheafMap:
    """G_x -> H_{f(x)} on C/U."""
    source = aut_presheaf(f.source, obj, x)
    target = aut_presheaf(f.target, obj, f.apply_object(obj, x))
    cat = f.source.site.category
    comps = {psi: {a: f.apply_arrow(cat.source(psi), a) for a in source.at(psi)} for psi in source.site.objects}
    return PresheafMap(source, target, comps)


def restrict_to_slice(G: GroupoidPresheaf, obj: Obj) -> GroupoidPresheaf:
    """G|_U on C/U: the section at psi: V -> U is G(V)."""
    site = G.site
    cat = site.category
    S = slice_site(site, obj)
    sections = {psi: G.sections[cat.source(psi)] for psi in S.objects}
    restrict = {(g, psi): G.restrict[g] for (g, psi) in S.category.morphisms}
    return GroupoidPresheaf(S, sections, restrict, name=f"{G.name}|{obj}")


def aut_groupoid_inclusion(G: GroupoidPresheaf, obj: Obj, x: Hashable) -> GroupoidMap:
    """
    The one-object groupoid presheaf of automorphisms of psi*x, included into G|_U.
    """
    _check_object(G, obj, x)
    target = restrict_to_slice(G, obj)
    S = target.site
    cat = G.site.category
    sections, restrict, comps = {}, {}, {}
    for psi in S.objects:
        whole = G.sections[cat.source(psi)]
        y = G.apply_object(psi, x)
        auts = whole.hom(y, y)
        sections[psi] = Groupoid((y,), {a: (y, y) for a in auts}, {y: whole.identity(y)},
                                 {(a, b): whole.compose(a, b) for a in auts for b in auts},
                                 {a: whole.inverse(a) for a in auts})
        comps[psi] = Functor({y: y}, {a: a for a in auts})
    for (g, psi), (src, tgt) in S.category.morphisms.items():
        F = G.restrict[g]
        restrict[(g, psi)] = Functor({y: F.objects[y] for y in sections[tgt].objects},
                                     {a: F.arrows[a] for a in sections[tgt].arrows})
    source = GroupoidPresheaf(S, sections, restrict, name=f"{G.name}_{x!r}")
    return GroupoidMap(source, target, comps)


# ----------------------------------------------------------------------------------
# predicates

def is_cech(G: GroupoidPresheaf) -> Verdict:
    """Parallel arrows agree on a covering sieve."""
    site = G.site
    cat = site.category
    verdict = PASS
    for U in ordered(site.objects):
        S = G.sections[U]
        for x, y in product(ordered(S.objects), ordered(S.objects)):
            arrows = S.hom(x, y)
            for i, f in enumerate(arrows):
                for g in arrows[i + 1:]:
                    sieve = frozenset(phi for phi in cat.into(U) if G.apply_arrow(phi, f) == G.apply_arrow(phi, g))
                    if not site.is_covering(U, sieve):
                        verdict = fail(object=U, arrows=[f, g], sieve=ordered(sieve))
                        break
                if not verdict:
                    break
            if not verdict:
                break
        if not verdict:
            break
    if debug_checks_enabled():
        other = is_lwe(components_map(G))
        if other.holds != verdict.holds:
            raise ConsistencyError("Agreement-sieve test disagrees with the components comparison",
                                   {"agreement": verdict.holds, "components": other.holds})
    return verdict


def connecting_sieve(G: GroupoidPresheaf, obj: Obj, x: Hashable, y: Hashable) -> frozenset:
    cat = G.site.category
    return frozenset(phi for phi in cat.into(obj)
                     if G.sections[cat.source(phi)].hom(G.apply_object(phi, x), G.apply_object(phi, y)))


def is_gerbe(G: GroupoidPresheaf) -> Verdict:
    """Locally connected and locally nonempty."""
    site = G.site
    for U in ordered(site.objects):
        objs = ordered(G.sections[U].objects)
        for i, x in enumerate(objs):
            for y in objs[i + 1:]:
                sieve = connecting_sieve(G, U, x, y)
                if not site.is_covering(U, sieve):
                    return fail(object=U, objects=[x, y], sieve=ordered(sieve))
    nonempty = is_local_epi(map_to_terminal(G.objects_presheaf))
    if not nonempty:
        return fail(reason="not locally nonempty", **nonempty.witness)
    return PASS


def is_lwe(f: GroupoidMap) -> Verdict:
    """
    Local weak equivalence: the path-component map and every automorphism map are
    local isomorphisms.
    """
    components = is_local_iso(pi0_map(f))
    if not components:
        return fail(stage="pi0", **components.witness)
    for U in ordered(f.source.site.objects):
        for x in ordered(f.source.sections[U].objects):
            auts = is_local_iso(aut_map(f, U, x))
            if not auts:
                return fail(stage="automorphisms", object=U, basepoint=x, detail=auts.witness)
    return PASS


def local_trivialization(G: GroupoidPresheaf) -> Verdict:
    """
    Find objects x_U over a family of site objects covering the terminal presheaf such
    that G_{x_U} -> G|_U is a local weak equivalence. The witness of a passing verdict
    is the family.
    """
    site = G.site
    cat = site.category
    family = {}
    for U in ordered(site.objects):
        for x in ordered(G.sections[U].objects):
            if is_lwe(aut_groupoid_inclusion(G, U, x)):
                family[U] = x
                break
    for W in ordered(site.objects):
        sieve = frozenset(phi for phi in cat.into(W) if cat.source(phi) in family)
        if not site.is_covering(W, sieve):
            return fail(uncovered=W, sieve=ordered(sieve), family=family)
    return Verdict(True, {"family": family})


# ----------------------------------------------------------------------------------
# automorphism sheaves

@dataclass(eq=False)
class AutomorphismSheaves:
    """
    The automorphism presheaf of G on the category of elements of Ob(G), sheafified once.
    Its section at (V, y) is the sheafified automorphism group of y restricted to C/V.
    """
    gerbe: GroupoidPresheaf
    elements: FiniteSite
    presheaf: GroupPresheaf
    sheaf: GroupSheafification
    _conjugations: Dict = field(default_factory=dict, repr=False)

    def group(self, obj: Obj, x: Hashable) -> FiniteGroup:
        return self.sheaf.result.groups[(obj, x)]

    def unit(self, obj: Obj, x: Hashable, a: Arrow) -> int:
        """Image of an automorphism a of x in the sheafified group."""
        return int(self.sheaf.unit.components[(obj, x)][self.presheaf.groups[(obj, x)].index(a)])

    def conjugation(self, obj: Obj, a: Arrow) -> np.ndarray:
        """
        The sheafified conjugation by a: x -> y as an index array from the sheafified
        group at (obj, x) to the one at (obj, y).
        """
        return self._transport(2, obj, a)

    def _transport(self, level: int, obj: Obj, a: Arrow) -> np.ndarray:
        key = (level, obj, a)
        if key in self._conjugations:
            return self._conjugations[key]
        G = self.gerbe
        S = G.sections[obj]
        x, y = S.source(a), S.target(a)
        if level == 0:
            source = self.presheaf.groups[(obj, x)]
            target = self.presheaf.groups[(obj, y)]
            result = np.array([target.index(S.conjugate(a, s)) for s in source.labels], dtype=scalar)
        else:
            stage = self.sheaf.stages[level - 1]
            cat = G.site.category
            targets = {fam: i for i, fam in enumerate(stage.result.at((obj, y)))}
            images = []
            for fam in stage.result.at((obj, x)):
                moved = []
                for (g, _), v in fam:
                    inner = self._transport(level - 1, cat.source(g), G.apply_arrow(g, a))
                    moved.append(((g, y), int(inner[v])))
                images.append(targets[stage.canonicalize((obj, y), tuple(moved))])
            result = np.array(images, dtype=scalar)
        self._conjugations[key] = result
        return result


@lru_cache(maxsize=cache_size())
def automorphism_sheaves(G: GroupoidPresheaf) -> AutomorphismSheaves:
    X = G.objects_presheaf
    E = element_site(X)
    groups, restrict = {}, {}
    for V, y in E.objects:
        groups[(V, y)] = G.sections[V].automorphism_group(y)
    for (g, y), ((W, z), _) in E.category.morphisms.items():
        source = groups[(E.category.target((g, y)))]
        target = groups[(W, z)]
        restrict[(g, y)] = np.array([target.index(G.apply_arrow(g, a)) for a in source.labels], dtype=scalar)
    presheaf = GroupPresheaf(E, groups, restrict, name=f"Aut({G.name})")
    sheaf = sheafify_group(presheaf)
    logger.debug(f"Automorphism sheaves of {G.name}: {len(E.objects)} elements")
    return AutomorphismSheaves(G, E, presheaf, sheaf)


def aut_sheaf(G: GroupoidPresheaf, obj: Obj, x: Hashable) -> GroupPresheaf:
    """
    The sheafified automorphism group of x on C/U; its section at psi is the sheafified
    group at (source psi, psi*x).
    """
    _check_object(G, obj, x)
    return _aut_sheaf(G, obj, x)


@lru_cache(maxsize=cache_size())
def _aut_sheaf(G: GroupoidPresheaf, obj: Obj, x: Hashable) -> GroupPresheaf:
    A = automorphism_sheaves(G)
    site = G.site
    cat = site.category
    S = slice_site(site, obj)
    point = {psi: (cat.source(psi), G.apply_object(psi, x)) for psi in S.objects}
    groups = {psi: A.sheaf.result.groups[point[psi]] for psi in S.objects}
    restrict = {(g, psi): A.sheaf.result.restrict[(g, point[psi][1])] for (g, psi) in S.category.morphisms}
    return GroupPresheaf(S, groups, restrict, name=f"~{G.name}_{x!r}")


class _AutMapTransport:
    """Level-by-level image of plus-construction families under a map of groupoid presheaves."""

    def __init__(self, f: GroupoidMap):
        self.f = f
        self.source = automorphism_sheaves(f.source)
        self.target = automorphism_sheaves(f.target)
        self._cache: Dict[Tuple[int, Obj, Hashable], np.ndarray] = {}

    def at(self, level: int, obj: Obj, y: Hashable) -> np.ndarray:
        key = (level, obj, y)
        if key in self._cache:
            return self._cache[key]
        fy = self.f.apply_object(obj, y)
        if level == 0:
            target = self.target.presheaf.groups[(obj, fy)]
            result = np.array([target.index(self.f.apply_arrow(obj, s))
                               for s in self.source.presheaf.groups[(obj, y)].labels], dtype=scalar)
        else:
            stage_s = self.source.sheaf.stages[level - 1]
            stage_t = self.target.sheaf.stages[level - 1]
            cat = self.f.source.site.category
            targets = {fam: i for i, fam in enumerate(stage_t.result.at((obj, fy)))}
            images = []
            for fam in stage_s.result.at((obj, y)):
                moved = []
                for (g, _), v in fam:
                    inner = self.at(level - 1, cat.source(g), self.f.source.apply_object(g, y))
                    moved.append(((g, fy), int(inner[v])))
                images.append(targets[stage_t.canonicalize((obj, fy), tuple(moved))])
            result = np.array(images, dtype=scalar)
        self._cache[key] = result
        return result


@lru_cache(maxsize=cache_size())
def _aut_transport(f: GroupoidMap) -> _AutMapTransport:
    return _AutMapTransport(f)


def sheafified_aut_map(f: GroupoidMap, obj: Obj, x: Hashable) -> Dict[Mor, np.ndarray]:
    """
    The map of automorphism sheaves of x and f(x) on C/U induced by f, as one index
    array per slice object.
    """
    _check_object(f.source, obj, x)
    T = _aut_transport(f)
    cat = f.source.site.category
    return {psi: T.at(2, cat.source(psi), f.source.apply_object(psi, x)) for psi in ordered(cat.into(obj))}
