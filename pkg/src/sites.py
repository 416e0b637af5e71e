# sites.py
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import product
from typing import Dict, FrozenSet, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from config import cache_size
from report import Violation, ordered, sort_key

logger = logging.getLogger(__name__)

Obj = Hashable
Mor = Hashable


@dataclass(frozen=True, eq=False)
class FiniteCategory:
    """
    A finite category given by explicit tables.

    `composition[(g, f)]` is g∘f and is defined exactly when target(f) = source(g).
    """
    objects: Tuple[Obj, ...]
    morphisms: Dict[Mor, Tuple[Obj, Obj]]
    identities: Dict[Obj, Mor]
    composition: Dict[Tuple[Mor, Mor], Mor]

    def source(self, m: Mor) -> Obj:
        return self.morphisms[m][0]

    def target(self, m: Mor) -> Obj:
        return self.morphisms[m][1]

    def identity(self, obj: Obj) -> Mor:
        return self.identities[obj]

    def compose(self, g: Mor, f: Mor) -> Mor:
        """g∘f; raises ValueError when the pair is not composable."""
        try:
            return self.composition[(g, f)]
        except KeyError:
            raise ValueError(f"Morphisms {g!r} and {f!r} are not composable")

    @cached_property
    def _into(self) -> Dict[Obj, Tuple[Mor, ...]]:
        into: Dict[Obj, List[Mor]] = {obj: [] for obj in self.objects}
        for m, (_, tgt) in self.morphisms.items():
            into.setdefault(tgt, []).append(m)
        return {obj: ordered(ms) for obj, ms in into.items()}

    def into(self, obj: Obj) -> Tuple[Mor, ...]:
        """All morphisms with target `obj`, in id order."""
        return self._into.get(obj, ())

    def hom(self, src: Obj, tgt: Obj) -> Tuple[Mor, ...]:
        return tuple(m for m in self.into(tgt) if self.source(m) == src)

    @cached_property
    def precompositions(self) -> Dict[Mor, Tuple[Tuple[Mor, Mor], ...]]:
        """For each f, the pairs (h, f∘h) over all h composable on the right."""
        pre: Dict[Mor, List[Tuple[Mor, Mor]]] = {m: [] for m in self.morphisms}
        for (g, f), gf in self.composition.items():
            pre.setdefault(g, []).append((f, gf))
        return {m: tuple(sorted(pairs, key=sort_key)) for m, pairs in pre.items()}

    def principal_sieve(self, m: Mor) -> FrozenSet[Mor]:
        """The sieve generated by a single morphism."""
        return frozenset([m] + [fh for _, fh in self.precompositions.get(m, ())])

    def validate(self) -> List[Violation]:
        """Category axioms; composition must be total on composable pairs."""
        violations: List[Violation] = []
        objects = set(self.objects)
        if len(objects) != len(self.objects):
            violations.append(Violation("objects", "duplicate object ids", {"objects": list(self.objects)}))
        for m, (src, tgt) in sorted(self.morphisms.items(), key=lambda kv: sort_key(kv[0])):
            if src not in objects or tgt not in objects:
                violations.append(Violation("morphism-endpoints", f"morphism {m!r} has an unknown endpoint",
                                            {"morphism": m, "source": src, "target": tgt}))
        for obj in self.objects:
            ident = self.identities.get(obj)
            if ident is None or self.morphisms.get(ident) != (obj, obj):
                violations.append(Violation("identity", f"object {obj!r} has no identity morphism",
                                            {"object": obj, "identity": ident}))
        if violations:
            return violations

        for (g, f), gf in sorted(self.composition.items(), key=lambda kv: sort_key(kv[0])):
            if g not in self.morphisms or f not in self.morphisms or gf not in self.morphisms:
                violations.append(Violation("composition-entry", "composition mentions an unknown morphism",
                                            {"entry": [g, f, gf]}))
                continue
            if self.target(f) != self.source(g):
                violations.append(Violation("composition-entry", "entry for a non-composable pair",
                                            {"entry": [g, f, gf]}))
            elif self.morphisms[gf] != (self.source(f), self.target(g)):
                violations.append(Violation("composition-entry", "composite has the wrong endpoints",
                                            {"entry": [g, f, gf]}))
        if violations:
            return violations

        ms = ordered(self.morphisms)
        for g, f in product(ms, ms):
            if self.target(f) == self.source(g) and (g, f) not in self.composition:
                violations.append(Violation("composition-total", "missing composition entry",
                                            {"pair": [g, f]}))
        if violations:
            return violations

        for m in ms:
            src, tgt = self.morphisms[m]
            if self.composition[(m, self.identities[src])] != m or self.composition[(self.identities[tgt], m)] != m:
                violations.append(Violation("unit", f"identities are not units for {m!r}", {"morphism": m}))
        for h, g, f in product(ms, ms, ms):
            if self.target(f) == self.source(g) and self.target(g) == self.source(h):
                left = self.composition[(h, self.composition[(g, f)])]
                right = self.composition[(self.composition[(h, g)], f)]
                if left != right:
                    violations.append(Violation("associativity", "composition is not associative",
                                                {"triple": [h, g, f], "h(gf)": left, "(hg)f": right}))
        return violations


@dataclass(frozen=True, order=False)
class Sieve:
    """A set of morphisms into `on`, closed under precomposition."""
    on: Obj
    members: FrozenSet[Mor]

    def sorted_members(self) -> Tuple[Mor, ...]:
        return ordered(self.members)


@dataclass(frozen=True, eq=False)
class FiniteSite:
    """A finite category with a Grothendieck topology given by explicit covering sieves."""
    category: FiniteCategory
    covering: Dict[Obj, FrozenSet[FrozenSet[Mor]]]
    name: str = ""

    @property
    def objects(self) -> Tuple[Obj, ...]:
        return self.category.objects

    def is_covering(self, obj: Obj, members: Iterable[Mor]) -> bool:
        return frozenset(members) in self.covering.get(obj, frozenset())

    def covering_sieves(self, obj: Obj) -> Tuple[Sieve, ...]:
        sieves = [Sieve(obj, s) for s in self.covering.get(obj, frozenset())]
        return tuple(sorted(sieves, key=lambda s: (len(s.members), sort_key(s.sorted_members()))))

    def maximal_sieve(self, obj: Obj) -> Sieve:
        return Sieve(obj, frozenset(self.category.into(obj)))

    @cached_property
    def objects_by_height(self) -> Tuple[Obj, ...]:
        """Objects ordered so that those with more incoming morphisms come first."""
        return tuple(sorted(self.objects, key=lambda u: (-len(self.category.into(u)), sort_key(u))))


# ----------------------------------------------------------------------------------
# sieves

def all_sieves(category: FiniteCategory, obj: Obj) -> Tuple[FrozenSet[Mor], ...]:
    """Every sieve on `obj`, found as unions of principal sieves."""
    found = {frozenset()}
    frontier = [frozenset()]
    into = category.into(obj)
    while frontier:
        nxt = []
        for s in frontier:
            for m in into:
                if m in s:
                    continue
                bigger = s | category.principal_sieve(m)
                if bigger not in found:
                    found.add(bigger)
                    nxt.append(bigger)
        frontier = nxt
    return tuple(sorted(found, key=lambda s: (len(s), sort_key(ordered(s)))))


def generated_sieve(category: FiniteCategory, obj: Obj, generators: Iterable[Mor]) -> Sieve:
    members = set()
    for m in generators:
        if category.target(m) != obj:
            raise ValueError(f"Generator {m!r} does not have target {obj!r}")
        members |= category.principal_sieve(m)
    return Sieve(obj, frozenset(members))


def is_sieve(category: FiniteCategory, obj: Obj, members: Iterable[Mor]) -> Optional[Tuple[Mor, Mor]]:
    """None if `members` is a sieve on obj, else a (member, composite) pair escaping it."""
    members = frozenset(members)
    for f in ordered(members):
        if category.target(f) != obj:
            return (f, f)
        for _, fh in category.precompositions.get(f, ()):
            if fh not in members:
                return (f, fh)
    return None


def pullback_sieve(site: FiniteSite, sieve: Sieve, phi: Mor) -> Sieve:
    """
    Pull a sieve back along phi: V -> U.

    Args:
        site: ambient site
        sieve: sieve on U
        phi: morphism with target U

    Returns:
        the sieve { g: W -> V | phi∘g in sieve } on V
    """
    cat = site.category
    if phi not in cat.morphisms:
        raise ValueError(f"Unknown morphism {phi!r}")
    if cat.target(phi) != sieve.on:
        raise ValueError(f"Morphism {phi!r} does not have target {sieve.on!r}")
    V = cat.source(phi)
    return Sieve(V, frozenset(g for g in cat.into(V) if cat.compose(phi, g) in sieve.members))


def _pullback_members(cat: FiniteCategory, members: FrozenSet[Mor], phi: Mor) -> FrozenSet[Mor]:
    V = cat.source(phi)
    return frozenset(g for g in cat.into(V) if cat.compose(phi, g) in members)


# ----------------------------------------------------------------------------------
# validation

def validate_site(site: FiniteSite) -> List[Violation]:
    """
    Check the category axioms and the Grothendieck topology axioms.

    Returns:
        violations, each naming the axiom and a witness; empty when the site is valid
    """
    cat = site.category
    violations = cat.validate()
    if violations:
        return violations

    for U in cat.objects:
        sieves = site.covering.get(U, frozenset())
        for members in sorted(sieves, key=lambda s: sort_key(ordered(s))):
            escape = is_sieve(cat, U, members)
            if escape is not None:
                violations.append(Violation("sieve-closure", f"covering family on {U!r} is not a sieve",
                                            {"object": U, "member": escape[0], "escapes": escape[1]}))
    if violations:
        return violations

    for U in cat.objects:
        covering = site.covering.get(U, frozenset())
        maximal = frozenset(cat.into(U))
        if maximal not in covering:
            violations.append(Violation("maximal-sieve", f"the maximal sieve on {U!r} is not covering",
                                        {"object": U}))
        sieves_on_U = all_sieves(cat, U)
        for members in sorted(covering, key=lambda s: sort_key(ordered(s))):
            for bigger in sieves_on_U:
                if members < bigger and bigger not in covering:
                    violations.append(Violation("upward-closure", f"sieve on {U!r} contains a covering sieve but is not covering",
                                                {"object": U, "covering": ordered(members), "sieve": ordered(bigger)}))
                    break
            for phi in cat.into(U):
                V = cat.source(phi)
                pulled = _pullback_members(cat, members, phi)
                if pulled not in site.covering.get(V, frozenset()):
                    violations.append(Violation("stability", f"pullback of a covering sieve on {U!r} is not covering",
                                                {"object": U, "sieve": ordered(members), "phi": phi,
                                                 "pullback": ordered(pulled)}))
        for candidate in sieves_on_U:
            if candidate in covering:
                continue
            for members in sorted(covering, key=lambda s: sort_key(ordered(s))):
                if all(_pullback_members(cat, candidate, phi) in site.covering.get(cat.source(phi), frozenset())
                       for phi in members):
                    violations.append(Violation("transitivity", f"sieve on {U!r} is locally covering but not covering",
                                                {"object": U, "sieve": ordered(candidate), "via": ordered(members)}))
                    break
    return violations


# ----------------------------------------------------------------------------------
# builders

def poset_category(elements: Sequence[str], relations: Iterable[Tuple[str, str]]) -> FiniteCategory:
    """
    Category of a finite preorder. A pair (V, U) means V <= U; the reflexive
    transitive closure is taken. The morphism V -> U is named "V->U".
    """
    elements = list(elements)
    le = {(x, x) for x in elements} | set(relations)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in product(list(le), list(le)):
            if b == c and (a, d) not in le:
                le.add((a, d))
                changed = True

    def name(v: str, u: str) -> str:
        return f"{v}->{u}"

    morphisms = {name(v, u): (v, u) for v, u in le}
    identities = {x: name(x, x) for x in elements}
    composition = {}
    for (v, u), (w, v2) in product(le, le):
        if v2 == v:
            composition[(name(v, u), name(w, v))] = name(w, u)
    return FiniteCategory(tuple(elements), morphisms, identities, composition)


def group_category(labels: Sequence[str], multiply) -> FiniteCategory:
    """One-object category whose morphisms are the elements of a finite group."""
    labels = list(labels)
    identity = next(e for e in labels if all(multiply(e, x) == x for x in labels))
    morphisms = {x: ("*", "*") for x in labels}
    composition = {(g, f): multiply(g, f) for g in labels for f in labels}
    return FiniteCategory(("*",), morphisms, {"*": identity}, composition)


def trivial_topology(category: FiniteCategory) -> Dict[Obj, FrozenSet[FrozenSet[Mor]]]:
    """Only maximal sieves cover."""
    return {U: frozenset([frozenset(category.into(U))]) for U in category.objects}


def saturate_topology(category: FiniteCategory,
                      generators: Mapping[Obj, Iterable[Iterable[Mor]]]) -> Dict[Obj, FrozenSet[FrozenSet[Mor]]]:
    """
    The smallest Grothendieck topology in which the given sieves (or the sieves they
    generate) cover.
    """
    sieves = {U: all_sieves(category, U) for U in category.objects}
    covering: Dict[Obj, set] = {U: {frozenset(category.into(U))} for U in category.objects}
    for U, families in generators.items():
        for family in families:
            covering[U].add(generated_sieve(category, U, family).members)

    changed = True
    rounds = 0
    while changed:
        changed = False
        rounds += 1
        for U in category.objects:
            for members in list(covering[U]):
                for bigger in sieves[U]:
                    if members <= bigger and bigger not in covering[U]:
                        covering[U].add(bigger)
                        changed = True
                for phi in category.into(U):
                    pulled = _pullback_members(category, members, phi)
                    V = category.source(phi)
                    if pulled not in covering[V]:
                        covering[V].add(pulled)
                        changed = True
            for candidate in sieves[U]:
                if candidate in covering[U]:
                    continue
                for members in list(covering[U]):
                    if all(_pullback_members(category, candidate, phi) in covering[category.source(phi)]
                           for phi in members):
                        covering[U].add(candidate)
                        changed = True
                        break
    logger.debug(f"Topology saturated after {rounds} rounds")
    return {U: frozenset(c) for U, c in covering.items()}


def trivial_site(category: FiniteCategory, name: str = "") -> FiniteSite:
    return FiniteSite(category, trivial_topology(category), name)


def terminal_site(obj: str = "*") -> FiniteSite:
    """One object, one morphism, maximal sieve only."""
    return trivial_site(poset_category([obj], []), name="terminal")


def open_cover_site(opens: Mapping[str, Iterable[str]], name: str = "") -> FiniteSite:
    """
    Poset of open sets ordered by inclusion, with the open-cover topology: a sieve on U
    covers iff the sources of its members have union U.
    """
    sets = {k: frozenset(v) for k, v in opens.items()}
    names = sorted(sets, key=lambda k: (len(sets[k]), k))
    relations = [(v, u) for v in names for u in names if v != u and sets[v] <= sets[u]]
    category = poset_category(names, relations)
    covering = {}
    for U in names:
        good = set()
        for members in all_sieves(category, U):
            union = frozenset().union(*[sets[category.source(m)] for m in members]) if members else frozenset()
            if union == sets[U]:
                good.add(members)
        covering[U] = frozenset(good)
    return FiniteSite(category, covering, name)


def two_point_site() -> FiniteSite:
    """Opens of the two-point discrete space: empty, {a}, {b}, {a,b}."""
    return open_cover_site({"empty": [], "a": ["a"], "b": ["b"], "ab": ["a", "b"]}, name="two-point")


def sierpinski_site() -> FiniteSite:
    """Opens of the Sierpinski space: empty, {1}, {0,1}; a three-object chain."""
    return open_cover_site({"empty": [], "1": ["1"], "01": ["0", "1"]}, name="sierpinski")


# ----------------------------------------------------------------------------------
# slices

@lru_cache(maxsize=cache_size())
def slice_site(site: FiniteSite, obj: Obj) -> FiniteSite:
    """
    The slice site C/U. Objects are the morphisms psi: V -> U; the morphism
    (g, psi): psi∘g -> psi is a commuting triangle. A sieve on psi covers iff its
    image under the forgetful functor covers V.
    """
    cat = site.category
    if obj not in cat.identities:
        raise ValueError(f"Unknown object {obj!r}")
    objects = cat.into(obj)
    morphisms: Dict[Mor, Tuple[Obj, Obj]] = {}
    identities: Dict[Obj, Mor] = {}
    composition: Dict[Tuple[Mor, Mor], Mor] = {}
    for psi in objects:
        V = cat.source(psi)
        identities[psi] = (cat.identity(V), psi)
        for g in cat.into(V):
            morphisms[(g, psi)] = (cat.compose(psi, g), psi)
    for (g, psi) in list(morphisms):
        chi = cat.compose(psi, g)
        for h in cat.into(cat.source(g)):
            composition[((g, psi), (h, chi))] = (cat.compose(g, h), psi)
    slice_cat = FiniteCategory(objects, morphisms, identities, composition)
    covering = {psi: frozenset(frozenset((g, psi) for g in members)
                               for members in site.covering.get(cat.source(psi), frozenset()))
                for psi in objects}
    return FiniteSite(slice_cat, covering, name=f"{site.name}/{obj}")
