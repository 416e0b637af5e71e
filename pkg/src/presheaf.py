# presheaf.py
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Hashable, Iterable, List, Optional, Tuple

from config import cache_size, debug_checks_enabled
from errors import ConsistencyError
from report import PASS, Verdict, Violation, fail, ordered, sort_key
from sites import FiniteCategory, FiniteSite, Mor, Obj, Sieve
from union_find import DisjointSet

logger = logging.getLogger(__name__)

Elem = Hashable
# A matching family: (member, value) pairs sorted by member
Family = Tuple[Tuple[Mor, Elem], ...]


@dataclass(frozen=True, eq=False)
class SetPresheaf:
    """
    Finite sets X(U) with restriction maps. For phi: V -> U, `restrict[phi]`
    sends elements of X(U) to elements of X(V).
    """
    site: FiniteSite
    sections: Dict[Obj, Tuple[Elem, ...]]
    restrict: Dict[Mor, Dict[Elem, Elem]]
    name: str = ""

    def at(self, obj: Obj) -> Tuple[Elem, ...]:
        return self.sections.get(obj, ())

    def apply(self, phi: Mor, x: Elem) -> Elem:
        return self.restrict[phi][x]

    def size(self) -> Dict[Obj, int]:
        return {U: len(self.at(U)) for U in self.site.objects}

    def validate(self) -> List[Violation]:
        """Totality, well-typedness and functoriality of the restriction maps."""
        cat = self.site.category
        violations: List[Violation] = []
        for phi in ordered(cat.morphisms):
            src, tgt = cat.morphisms[phi]
            table = self.restrict.get(phi)
            if table is None:
                violations.append(Violation("restriction-total", f"no restriction along {phi!r}", {"phi": phi}))
                continue
            allowed = set(self.at(src))
            for x in self.at(tgt):
                if x not in table:
                    violations.append(Violation("restriction-total", f"restriction along {phi!r} undefined on {x!r}",
                                                {"phi": phi, "element": x}))
                elif table[x] not in allowed:
                    violations.append(Violation("restriction-typed", f"restriction along {phi!r} leaves {src!r}",
                                                {"phi": phi, "element": x, "image": table[x]}))
        if violations:
            return violations
        for U in ordered(cat.objects):
            ident = cat.identity(U)
            for x in self.at(U):
                if self.apply(ident, x) != x:
                    violations.append(Violation("identity", f"restriction along {ident!r} moves {x!r}",
                                                {"object": U, "element": x}))
        for (g, f), gf in sorted(cat.composition.items(), key=lambda kv: sort_key(kv[0])):
            for x in self.at(cat.target(g)):
                if self.apply(gf, x) != self.apply(f, self.apply(g, x)):
                    violations.append(Violation("functoriality", f"restriction along {gf!r} is not the composite",
                                                {"pair": [g, f], "element": x}))
        return violations


@dataclass(frozen=True, eq=False)
class PresheafMap:
    source: SetPresheaf
    target: SetPresheaf
    components: Dict[Obj, Dict[Elem, Elem]]

    def apply(self, obj: Obj, x: Elem) -> Elem:
        return self.components[obj][x]

    def image(self, obj: Obj) -> frozenset:
        return frozenset(self.components[obj][x] for x in self.source.at(obj))

    def validate(self) -> List[Violation]:
        cat = self.source.site.category
        violations: List[Violation] = []
        for U in ordered(cat.objects):
            comp = self.components.get(U, {})
            allowed = set(self.target.at(U))
            for x in self.source.at(U):
                if x not in comp or comp[x] not in allowed:
                    violations.append(Violation("component", f"component at {U!r} is not a function into the target",
                                                {"object": U, "element": x}))
        if violations:
            return violations
        for phi in ordered(cat.morphisms):
            src, tgt = cat.morphisms[phi]
            for x in self.source.at(tgt):
                if self.apply(src, self.source.apply(phi, x)) != self.target.apply(phi, self.apply(tgt, x)):
                    violations.append(Violation("naturality", f"map does not commute with restriction along {phi!r}",
                                                {"phi": phi, "element": x}))
        return violations


# ----------------------------------------------------------------------------------
# builders

def constant_presheaf(site: FiniteSite, elements: Iterable[Elem], name: str = "") -> SetPresheaf:
    elements = ordered(elements)
    return SetPresheaf(
        site,
        {U: elements for U in site.objects},
        {phi: {x: x for x in elements} for phi in site.category.morphisms},
        name or f"const{list(elements)}",
    )


def terminal_presheaf(site: FiniteSite) -> SetPresheaf:
    return constant_presheaf(site, ["*"], name="*")


def empty_presheaf(site: FiniteSite) -> SetPresheaf:
    return constant_presheaf(site, [], name="empty")


def representable(site: FiniteSite, obj: Obj) -> SetPresheaf:
    """hom(-, U): sections at V are the morphisms V -> U, restriction is precomposition."""
    cat = site.category
    sections = {V: cat.hom(V, obj) for V in site.objects}
    restrict = {phi: {f: cat.compose(f, phi) for f in sections[cat.target(phi)]} for phi in cat.morphisms}
    return SetPresheaf(site, sections, restrict, name=f"h{obj}")


def coproduct(*presheaves: SetPresheaf) -> SetPresheaf:
    """Disjoint union; elements are tagged (index, element)."""
    site = presheaves[0].site
    sections = {U: tuple((i, x) for i, X in enumerate(presheaves) for x in X.at(U)) for U in site.objects}
    restrict = {phi: {(i, x): (i, X.apply(phi, x)) for i, X in enumerate(presheaves)
                      for x in X.at(site.category.target(phi))}
                for phi in site.category.morphisms}
    return SetPresheaf(site, sections, restrict, name="+".join(X.name for X in presheaves))


def identity_map(X: SetPresheaf) -> PresheafMap:
    return PresheafMap(X, X, {U: {x: x for x in X.at(U)} for U in X.site.objects})


def compose_maps(q: PresheafMap, p: PresheafMap) -> PresheafMap:
    """q∘p"""
    return PresheafMap(p.source, q.target,
                       {U: {x: q.apply(U, p.apply(U, x)) for x in p.source.at(U)} for U in p.source.site.objects})


def map_to_terminal(X: SetPresheaf, terminal: Optional[SetPresheaf] = None) -> PresheafMap:
    terminal = terminal or terminal_presheaf(X.site)
    return PresheafMap(X, terminal, {U: {x: "*" for x in X.at(U)} for U in X.site.objects})


def fold_map(X: SetPresheaf) -> PresheafMap:
    """X + X -> X"""
    doubled = coproduct(X, X)
    return PresheafMap(doubled, X, {U: {(i, x): x for i, x in doubled.at(U)} for U in X.site.objects})


def map_from_function(source: SetPresheaf, target: SetPresheaf, fn: Callable[[Obj, Elem], Elem]) -> PresheafMap:
    return PresheafMap(source, target, {U: {x: fn(U, x) for x in source.at(U)} for U in source.site.objects})


def image_presheaf(p: PresheafMap) -> SetPresheaf:
    """The subpresheaf of the target spanned by the image of p."""
    site = p.target.site
    sections = {U: ordered(p.image(U)) for U in site.objects}
    restrict = {phi: {y: p.target.apply(phi, y) for y in sections[site.category.target(phi)]}
                for phi in site.category.morphisms}
    return SetPresheaf(site, sections, restrict, name=f"im({p.source.name})")


def element_site(X: SetPresheaf) -> FiniteSite:
    """
    The category of elements of X with the induced topology. Objects are (V, x);
    the morphism (g, x) goes from (source g, X(g)(x)) to (target g, x).
    """
    site = X.site
    cat = site.category
    objects = tuple((V, x) for V in site.objects for x in X.at(V))
    morphisms = {}
    for g in ordered(cat.morphisms):
        src, tgt = cat.morphisms[g]
        for x in X.at(tgt):
            morphisms[(g, x)] = ((src, X.apply(g, x)), (tgt, x))
    identities = {(V, x): (cat.identity(V), x) for V, x in objects}
    composition = {}
    for (g, f), gf in cat.composition.items():
        for x in X.at(cat.target(g)):
            composition[((g, x), (f, X.apply(g, x)))] = (gf, x)
    covering = {(V, x): frozenset(frozenset((g, x) for g in members) for members in site.covering.get(V, frozenset()))
                for V, x in objects}
    return FiniteSite(FiniteCategory(objects, morphisms, identities, composition), covering, name=f"el({X.name})")


# ----------------------------------------------------------------------------------
# plus construction

def matching_families(X: SetPresheaf, sieve: Sieve) -> List[Family]:
    """
    All families (a_f) indexed by the members of `sieve` with X(h)(a_f) = a_{f∘h}.
    Members with many precompositions are assigned first so their restrictions are forced.
    """
    cat = X.site.category
    members = sorted(sieve.members, key=lambda m: (-len(cat.precompositions.get(m, ())), sort_key(m)))
    results: List[Family] = []

    def assign(values: Dict[Mor, Elem], f: Mor, x: Elem) -> Optional[Dict[Mor, Elem]]:
        values = dict(values)
        stack = [(f, x)]
        while stack:
            m, v = stack.pop()
            if m in values:
                if values[m] != v:
                    return None
                continue
            values[m] = v
            for h, mh in cat.precompositions.get(m, ()):
                stack.append((mh, X.apply(h, v)))
        return values

    def extend(i: int, values: Dict[Mor, Elem]) -> None:
        if i == len(members):
            results.append(tuple(sorted(values.items(), key=lambda kv: sort_key(kv[0]))))
            return
        f = members[i]
        if f in values:
            extend(i + 1, values)
            return
        for x in X.at(cat.source(f)):
            extended = assign(values, f, x)
            if extended is not None:
                extend(i + 1, extended)

    extend(0, {})
    return results


def agreement_sieve(a: Family, b: Family) -> frozenset:
    """Members on which two families are both defined and equal."""
    bd = dict(b)
    return frozenset(f for f, v in a if f in bd and bd[f] == v)


@dataclass(frozen=True, eq=False)
class PlusConstruction:
    """
    X+ with its unit X -> X+. Elements of X+(U) are canonical matching families; `classes`
    maps every matching family over a covering sieve of U to its canonical representative.
    """
    source: SetPresheaf
    result: SetPresheaf
    unit: PresheafMap
    classes: Dict[Obj, Dict[Family, Family]] = field(repr=False)

    def canonicalize(self, obj: Obj, family: Family) -> Family:
        return self.classes[obj][tuple(sorted(family, key=lambda kv: sort_key(kv[0])))]


def _classes_at(X: SetPresheaf, obj: Obj) -> Dict[Family, Family]:
    site = X.site
    families: List[Family] = []
    for sieve in site.covering_sieves(obj):
        families.extend(matching_families(X, sieve))
    families = list(dict.fromkeys(families))
    classes: DisjointSet = DisjointSet()
    for fam in families:
        classes.make_set(fam)
    for i, a in enumerate(families):
        for b in families[i + 1:]:
            if classes.same(a, b):
                continue
            if site.is_covering(obj, agreement_sieve(a, b)):
                classes.union(a, b)
    canonical = {}
    for group in classes.classes():
        rep = group[0]
        for fam in group:
            canonical[fam] = rep
    return canonical


@lru_cache(maxsize=cache_size())
def plus(X: SetPresheaf) -> PlusConstruction:
    """
    One plus stage: matching families over covering sieves modulo agreement on a
    covering sieve, each class stored as its least family.
    """
    site = X.site
    cat = site.category
    classes = {U: _classes_at(X, U) for U in site.objects}
    sections = {U: ordered(classes[U].values()) for U in site.objects}
    restrict: Dict[Mor, Dict[Family, Family]] = {}
    for phi in cat.morphisms:
        V, U = cat.morphisms[phi]
        table = {}
        for a in sections[U]:
            values = dict(a)
            pulled = tuple((g, values[cat.compose(phi, g)]) for g in ordered(cat.into(V))
                           if cat.compose(phi, g) in values)
            table[a] = classes[V][pulled]
        restrict[phi] = table
    result = SetPresheaf(site, sections, restrict, name=f"{X.name}+")
    unit_components = {}
    for U in site.objects:
        into = ordered(cat.into(U))
        unit_components[U] = {x: classes[U][tuple((f, X.apply(f, x)) for f in into)] for x in X.at(U)}
    unit = PresheafMap(X, result, unit_components)
    logger.debug(f"Plus of {X.name}: sizes {result.size()}")
    return PlusConstruction(X, result, unit, classes)


def plus_map(p: PresheafMap, source_plus: Optional[PlusConstruction] = None,
             target_plus: Optional[PlusConstruction] = None) -> PresheafMap:
    """p+: X+ -> Y+, applying p memberwise and canonicalizing."""
    source_plus = source_plus or plus(p.source)
    target_plus = target_plus or plus(p.target)
    cat = p.source.site.category
    components = {}
    for U in p.source.site.objects:
        components[U] = {
            a: target_plus.canonicalize(U, tuple((f, p.apply(cat.source(f), v)) for f, v in a))
            for a in source_plus.result.at(U)
        }
    return PresheafMap(source_plus.result, target_plus.result, components)


@dataclass(frozen=True, eq=False)
class Sheafification:
    """X -> X+ -> X++ with the composite unit."""
    source: SetPresheaf
    first: PlusConstruction
    second: PlusConstruction
    result: SetPresheaf
    unit: PresheafMap


@lru_cache(maxsize=cache_size())
def sheafify(X: SetPresheaf) -> Sheafification:
    first = plus(X)
    second = plus(first.result)
    unit = compose_maps(second.unit, first.unit)
    if debug_checks_enabled():
        verdict = is_sheaf(second.result)
        if not verdict:
            raise ConsistencyError(f"Sheafification of {X.name} is not a sheaf", verdict.witness)
    logger.debug(f"Sheafified {X.name}: sizes {second.result.size()}")
    return Sheafification(X, first, second, second.result, unit)


def sheafify_map(p: PresheafMap) -> PresheafMap:
    source, target = sheafify(p.source), sheafify(p.target)
    first = plus_map(p, source.first, target.first)
    return plus_map(first, source.second, target.second)


# ----------------------------------------------------------------------------------
# predicates

def is_sheaf(X: SetPresheaf) -> Verdict:
    """Every matching family on every covering sieve has exactly one amalgamation."""
    site = X.site
    for U in ordered(site.objects):
        for sieve in site.covering_sieves(U):
            for family in matching_families(X, sieve):
                glued = [x for x in X.at(U) if all(X.apply(f, x) == v for f, v in family)]
                if len(glued) != 1:
                    return fail(object=U, sieve=sieve.sorted_members(), family=family, amalgamations=len(glued))
    return PASS


def is_local_epi(p: PresheafMap) -> Verdict:
    """Every section of the target is locally in the image."""
    site = p.target.site
    cat = site.category
    images = {V: p.image(V) for V in site.objects}
    for U in ordered(site.objects):
        for y in ordered(p.target.at(U)):
            sieve = frozenset(phi for phi in cat.into(U) if p.target.apply(phi, y) in images[cat.source(phi)])
            if not site.is_covering(U, sieve):
                return fail(object=U, element=y, sieve=ordered(sieve))
    return PASS


def is_local_mono(p: PresheafMap) -> Verdict:
    """Sections with equal images agree on a covering sieve."""
    site = p.source.site
    cat = site.category
    for U in ordered(site.objects):
        xs = ordered(p.source.at(U))
        for i, x in enumerate(xs):
            for x2 in xs[i + 1:]:
                if p.apply(U, x) != p.apply(U, x2):
                    continue
                sieve = frozenset(phi for phi in cat.into(U)
                                  if p.source.apply(phi, x) == p.source.apply(phi, x2))
                if not site.is_covering(U, sieve):
                    return fail(object=U, elements=[x, x2], sieve=ordered(sieve))
    return PASS


def is_bijective(p: PresheafMap) -> Verdict:
    for U in ordered(p.source.site.objects):
        image = [p.apply(U, x) for x in p.source.at(U)]
        if len(set(image)) != len(image) or set(image) != set(p.target.at(U)):
            return fail(object=U, source_size=len(p.source.at(U)), target_size=len(p.target.at(U)),
                        image_size=len(set(image)))
    return PASS


def is_local_iso(p: PresheafMap) -> Verdict:
    """
    The sheafified map is a bijection in every section. With debug checks on, the
    answer is compared against local epi and local mono.
    """
    verdict = is_bijective(sheafify_map(p))
    if debug_checks_enabled():
        other = bool(is_local_epi(p)) and bool(is_local_mono(p))
        if other != verdict.holds:
            raise ConsistencyError("Local iso disagrees with local epi and local mono",
                                   {"sheafified": verdict.holds, "epi_and_mono": other})
    return verdict
