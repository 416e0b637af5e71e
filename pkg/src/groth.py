# groth.py
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

from config import debug_checks_enabled
from errors import ConsistencyError, PreconditionError
from gpd import (
    Functor, Groupoid, GroupoidMap, GroupoidPresheaf, aut_sheaf, automorphism_sheaves, hom_presheaf, is_gerbe, is_lwe,
    sheafified_aut_map,
)
from groups import FiniteGroup
from presheaf import PresheafMap, is_local_iso
from report import PASS, Verdict, Violation, fail, ordered, sort_key
from sites import Mor, Obj
from two_gpd import (
    GroupSheafAtlas, Homotopy, Iso, TwoFunctor, TwoGroupoidMap, TwoGroupoidPresheaf, aut_sheaf_two_groupoid,
    canonical_cocycle, compose_isos, compose_two_maps, identity_iso, interval_end, interval_product,
    invert_iso, is_lwe2, map_to_terminal2, maps_agree, path_component_groupoid, path_components, resolution,
    resolution_map,
)

logger = logging.getLogger(__name__)


# ----------------------------------------------------------------------------------
# cocycles

@dataclass(frozen=True, eq=False)
class Cocycle:
    """A span * <- A -> F: a 2-groupoid presheaf A and a strict map K into an atlas presheaf."""
    atlas: GroupSheafAtlas
    coefficients: TwoGroupoidMap
    name: str = ""

    @property
    def source(self) -> TwoGroupoidPresheaf:
        return self.coefficients.source

    def validate(self) -> List[Violation]:
        if self.coefficients.target is not self.atlas.presheaf:
            return [Violation("cocycle-target", "coefficients do not land in the atlas presheaf", {"cocycle": self.name})]
        return self.coefficients.validate()

    def is_cocycle(self) -> Verdict:
        """The leg A -> * is a local weak equivalence."""
        return is_lwe2(map_to_terminal2(self.source))

    def retarget(self, atlas: GroupSheafAtlas) -> "Cocycle":
        """The same cocycle with values in a larger atlas."""
        if atlas is self.atlas:
            return self
        K = self.coefficients
        missing = ordered(k for k in self.atlas.keys() if k not in atlas)
        if missing:
            raise PreconditionError("Atlas does not contain the cocycle's sheaves", {"missing": list(missing)})
        return Cocycle(atlas, TwoGroupoidMap(K.source, atlas.presheaf, K.components), name=self.name)


@dataclass(frozen=True, eq=False)
class CocycleMorphism:
    """theta: A -> B with L∘theta = K on the nose."""
    source: Cocycle
    target: Cocycle
    theta: TwoGroupoidMap

    def validate(self) -> List[Violation]:
        violations = self.theta.validate()
        if violations:
            return violations
        agree = maps_agree(compose_two_maps(self.target.coefficients, self.theta), self.source.coefficients)
        if not agree:
            violations.append(Violation("cocycle-triangle", "coefficients do not commute with the morphism",
                                        agree.witness))
        return violations


# ----------------------------------------------------------------------------------
# coefficient data for the construction

class Coefficients(ABC):
    """
    Sectionwise data of a cocycle: the group of global sections at each object, the
    action of 1-cells, the conjugator of each 2-cell, and restriction of global sections.
    """

    @abstractmethod
    def group(self, obj: Obj, i: Hashable) -> FiniteGroup: ...

    @abstractmethod
    def act(self, obj: Obj, alpha: Hashable) -> Sequence[int]: ...

    @abstractmethod
    def conjugator(self, obj: Obj, h: Hashable) -> int: ...

    @abstractmethod
    def restrict(self, phi: Mor, i: Hashable, f: int) -> int: ...


class AtlasCoefficients(Coefficients):
    """Global sections over U of the sheaves K(i)."""

    def __init__(self, cocycle: Cocycle):
        self.cocycle = cocycle
        self.site = cocycle.source.site

    def _sheaf(self, obj, i):
        return self.cocycle.atlas.sheaf(self.cocycle.coefficients.components[obj].obj(i))

    def group(self, obj, i):
        return self._sheaf(obj, i).groups[self.site.category.identity(obj)]

    def act(self, obj, alpha):
        return self.cocycle.coefficients.components[obj].one(alpha).at(self.site.category.identity(obj))

    def conjugator(self, obj, h):
        return self.cocycle.coefficients.components[obj].two(h).conjugator

    def restrict(self, phi, i, f):
        cat = self.site.category
        U = cat.target(phi)
        return int(self._sheaf(U, i).restrict[(phi, cat.identity(U))][f])


class ConjugationCoefficients(Coefficients):
    """Automorphism groups of a groupoid presheaf, acted on by conjugation; base R(G)."""

    def __init__(self, G: GroupoidPresheaf):
        self.G = G
        self._groups: Dict = {}

    def group(self, obj, x):
        if (obj, x) not in self._groups:
            self._groups[(obj, x)] = self.G.sections[obj].automorphism_group(x)
        return self._groups[(obj, x)]

    def act(self, obj, alpha):
        S = self.G.sections[obj]
        source = self.group(obj, S.source(alpha))
        target = self.group(obj, S.target(alpha))
        return [target.index(S.conjugate(alpha, s)) for s in source.labels]

    def conjugator(self, obj, h):
        S = self.G.sections[obj]
        a, b = h
        return self.group(obj, S.target(a)).index(S.compose(b, S.inverse(a)))

    def restrict(self, phi, x, f):
        V = self.G.site.category.source(phi)
        s = self.group(self.G.site.category.target(phi), x).labels[f]
        return self.group(V, self.G.apply_object(phi, x)).index(self.G.apply_arrow(phi, s))


# ----------------------------------------------------------------------------------
# the construction

@dataclass(frozen=True, eq=False)
class GrothendieckConstruction:
    """
    E_A K: objects of A; arrows i -> j are classes of pairs (f, alpha) with alpha: i -> j
    and f a global section of K(j), where (f, alpha) ~ (f*k_h^-1, beta) for h: alpha => beta.
    Each class is named by its least pair.
    """
    base: TwoGroupoidPresheaf
    coefficients: Coefficients
    groupoid: GroupoidPresheaf

    def canonical(self, obj: Obj, f: int, alpha: Hashable) -> Tuple[int, Hashable]:
        A = self.base.sections[obj]
        K = self.coefficients
        group = K.group(obj, A.ends(alpha)[1])
        members = [(group.mul(f, group.inv(K.conjugator(obj, h))), A.ends2(h)[1]) for h in A.two_cells_from(alpha)]
        return min(members, key=sort_key)

    def unit_arrow(self, obj: Obj, alpha: Hashable) -> Tuple[int, Hashable]:
        """[(e, alpha)]"""
        A = self.base.sections[obj]
        return self.canonical(obj, self.coefficients.group(obj, A.ends(alpha)[1]).identity, alpha)

    @cached_property
    def projection(self) -> GroupoidMap:
        """p: E_A K -> πA, [(f, alpha)] to the path class of alpha."""
        pi, _ = path_component_groupoid(self.base)
        pc = path_components(self.base)
        comps = {}
        for U, S in self.groupoid.sections.items():
            comps[U] = Functor({x: x for x in S.objects}, {a: pc.canonical(U, a[1]) for a in S.arrows})
        return GroupoidMap(self.groupoid, pi, comps)


def _section(A, K: Coefficients, obj: Obj, canonical: Callable) -> Groupoid:
    objs = A.objects()
    arrows: Dict = {}
    for i in objs:
        for j in objs:
            order = K.group(obj, j).order
            for alpha in A.hom(i, j):
                for f in range(order):
                    arrows[canonical(obj, f, alpha)] = (i, j)
    composition, inverses = {}, {}
    for (f, alpha), (i, j) in arrows.items():
        Gj = K.group(obj, j)
        inv_alpha = A.inverse(alpha)
        inverses[(f, alpha)] = canonical(obj, K.act(obj, inv_alpha)[Gj.inv(f)], inv_alpha)
        for k in objs:
            Gk = K.group(obj, k)
            for beta in A.hom(j, k):
                moved = K.act(obj, beta)[f]
                for g in range(Gk.order):
                    if canonical(obj, g, beta) != (g, beta):
                        continue
                    composition[((g, beta), (f, alpha))] = canonical(obj, Gk.mul(g, moved), A.compose(beta, alpha))
    identities = {i: canonical(obj, K.group(obj, i).identity, A.identity(i)) for i in objs}
    return Groupoid(objs, arrows, identities, composition, inverses)


def build_grothendieck(A: TwoGroupoidPresheaf, K: Coefficients, name: str = "") -> GrothendieckConstruction:
    """Sectionwise classes, composition [(g,b)][(f,a)] = [(g*K(b)(f), b∘a)], induced restrictions."""
    site = A.site
    cat = site.category
    shell = GrothendieckConstruction(A, K, None)
    canonical = shell.canonical
    sections = {U: _section(A.sections[U], K, U, canonical) for U in site.objects}
    restrict = {}
    for phi in cat.morphisms:
        V, U = cat.morphisms[phi]
        R = A.restrict[phi]
        S = A.sections[U]
        restrict[phi] = Functor(
            {x: R.obj(x) for x in sections[U].objects},
            {(f, alpha): canonical(V, K.restrict(phi, S.ends(alpha)[1], f), R.one(alpha))
             for (f, alpha) in sections[U].arrows},
        )
    groupoid = GroupoidPresheaf(site, sections, restrict, name=name or f"E({A.name})")
    if debug_checks_enabled():
        violations = groupoid.validate()
        if violations:
            raise ConsistencyError("Grothendieck construction is not a groupoid presheaf",
                                   {"violations": [v.as_dict() for v in violations[:5]]})
    logger.debug(f"Grothendieck construction {groupoid.name}: "
                 f"{sum(len(s.arrows) for s in sections.values())} arrows")
    return GrothendieckConstruction(A, K, groupoid)


def grothendieck(c: Cocycle) -> GrothendieckConstruction:
    return build_grothendieck(c.source, AtlasCoefficients(c), name=f"E({c.name or c.source.name})")


def conjugation_grothendieck(G: GroupoidPresheaf) -> GrothendieckConstruction:
    """E over R(G) with the automorphism presheaves of G as coefficients, unsheafified."""
    return build_grothendieck(resolution(G), ConjugationCoefficients(G), name=f"E0({G.name})")


def composition_well_defined(E: GrothendieckConstruction) -> Verdict:
    """Composites computed from every pair of representatives agree."""
    K = E.coefficients
    for U in ordered(E.base.site.objects):
        A = E.base.sections[U]
        S = E.groupoid.sections[U]
        for (f, alpha), (i, j) in sorted(S.arrows.items(), key=lambda kv: sort_key(kv[0])):
            reps_a = [(K.group(U, j).mul(f, K.group(U, j).inv(K.conjugator(U, h))), A.ends2(h)[1])
                      for h in A.two_cells_from(alpha)]
            for (g, beta) in S.arrows:
                if S.source((g, beta)) != j:
                    continue
                k = S.target((g, beta))
                Gk = K.group(U, k)
                expected = S.compose((g, beta), (f, alpha))
                reps_b = [(Gk.mul(g, Gk.inv(K.conjugator(U, h))), A.ends2(h)[1]) for h in A.two_cells_from(beta)]
                for f2, a2 in reps_a:
                    for g2, b2 in reps_b:
                        got = E.canonical(U, Gk.mul(g2, K.act(U, b2)[f2]), A.compose(b2, a2))
                        if got != expected:
                            return fail(object=U, pair=[(g, beta), (f, alpha)], representatives=[(g2, b2), (f2, a2)])
    return PASS


def inverse_law(E: GrothendieckConstruction) -> Verdict:
    """[(K(a^-1)(f^-1), a^-1)] is a two-sided inverse of [(f, a)]."""
    for U in ordered(E.base.site.objects):
        S = E.groupoid.sections[U]
        for a in ordered(S.arrows):
            inv = S.inverse(a)
            x, y = S.arrows[a]
            if S.compose(inv, a) != S.identity(x) or S.compose(a, inv) != S.identity(y):
                return fail(object=U, arrow=a, inverse=inv)
    return PASS


# ----------------------------------------------------------------------------------
# comparisons

def composite_iso(G: GroupoidPresheaf) -> GroupoidMap:
    """E0(G) -> G, [(f, alpha)] to f∘alpha."""
    E = conjugation_grothendieck(G)
    K = E.coefficients
    comps = {}
    for U, S in E.groupoid.sections.items():
        T = G.sections[U]
        comps[U] = Functor({x: x for x in S.objects},
                           {(f, alpha): T.compose(K.group(U, T.target(alpha)).labels[f], alpha)
                            for (f, alpha) in S.arrows})
    return GroupoidMap(E.groupoid, G, comps)


def check_composite_iso(G: GroupoidPresheaf) -> Verdict:
    """The composite map is a natural, sectionwise bijective functor over the path classes of R(G)."""
    verdict = is_gerbe(G)
    if not verdict:
        raise PreconditionError(f"{G.name!r} is not a gerbe", verdict.witness)
    m = composite_iso(G)
    violations = m.validate()
    if violations:
        return fail(stage="functor", violation=violations[0].as_dict())
    E = m.source
    pc = path_components(resolution(G))
    for U in ordered(G.site.objects):
        F = m.components[U]
        images = list(F.arrows.values())
        if len(set(images)) != len(images) or set(images) != set(G.sections[U].arrows):
            return fail(stage="bijective", object=U)
        for a, b in F.arrows.items():
            if pc.canonical(U, a[1]) != pc.canonical(U, b):
                return fail(stage="projection", object=U, arrow=a)
    return PASS


def gerbe_cocycle(G: GroupoidPresheaf, atlas: Optional[GroupSheafAtlas] = None) -> Cocycle:
    """(R(G), nu∘F(G)) with values in `atlas` (default: the automorphism sheaves of G)."""
    star = aut_sheaf_two_groupoid(G)
    atlas = atlas or star.atlas
    K = compose_two_maps(star.nu_map(atlas), canonical_cocycle(G))
    return Cocycle(atlas, K, name=f"F({G.name})")


def gerbe_comparison(G: GroupoidPresheaf, E: GrothendieckConstruction) -> GroupoidMap:
    """G -> E over R(G): identity on objects, alpha to [(e, alpha)]."""
    comps = {U: Functor({x: x for x in S.objects}, {a: E.unit_arrow(U, a) for a in S.arrows})
             for U, S in G.sections.items()}
    return GroupoidMap(G, E.groupoid, comps)


def fibre_inclusion(c: Cocycle, obj: Obj, i: Hashable) -> PresheafMap:
    """K(i) -> hom(i, i) of E on C/U, f to [(f, 1_i)]."""
    E = grothendieck(c)
    return _fibre_inclusion(c, E, obj, i)


def _fibre_inclusion(c: Cocycle, E: GrothendieckConstruction, obj: Obj, i: Hashable) -> PresheafMap:
    if i not in c.source.sections[obj].objects():
        raise ValueError(f"{i!r} is not an object of the base at {obj!r}")
    cat = c.source.site.category
    P = c.atlas.sheaf(c.coefficients.components[obj].obj(i))
    target = hom_presheaf(E.groupoid, obj, i, i)
    comps = {}
    for psi in P.site.objects:
        V = cat.source(psi)
        y = c.source.restrict[psi].obj(i)
        ident = c.source.sections[V].identity(y)
        comps[psi] = {f: E.canonical(V, f, ident) for f in range(P.groups[psi].order)}
    return PresheafMap(P.underlying, target, comps)


def check_fibre_inclusion(c: Cocycle, at: Optional[Tuple[Obj, Hashable]] = None) -> Verdict:
    """Each fibre inclusion is a local isomorphism."""
    E = grothendieck(c)
    points = [at] if at else [(U, i) for U in ordered(c.source.site.objects) for i in c.source.sections[U].objects()]
    for U, i in points:
        verdict = is_local_iso(_fibre_inclusion(c, E, U, i))
        if not verdict:
            return fail(object=U, base_object=i, detail=verdict.witness)
    return PASS


def check_grothendieck_gerbe(c: Cocycle) -> Verdict:
    return is_gerbe(grothendieck(c).groupoid)


def check_fibres_in_atlas(c: Cocycle) -> Verdict:
    """Every automorphism sheaf of E is locally isomorphic to an atlas sheaf."""
    E = grothendieck(c).groupoid
    for U in ordered(E.site.objects):
        for i in E.sections[U].objects:
            verdict = c.atlas.locally_isomorphic(U, aut_sheaf(E, U, i))
            if not verdict:
                return fail(object=U, base_object=i, detail=verdict.witness)
    return PASS


def induced_map(m: CocycleMorphism, source: Optional[GrothendieckConstruction] = None,
                target: Optional[GrothendieckConstruction] = None) -> GroupoidMap:
    """E_A K -> E_B L: i to theta(i), [(f, alpha)] to [(f, theta(alpha))]."""
    source = source or grothendieck(m.source)
    target = target or grothendieck(m.target)
    comps = {}
    for U, S in source.groupoid.sections.items():
        theta = m.theta.components[U]
        comps[U] = Functor({x: theta.obj(x) for x in S.objects},
                           {(f, alpha): target.canonical(U, f, theta.one(alpha)) for (f, alpha) in S.arrows})
    return GroupoidMap(source.groupoid, target.groupoid, comps)


def check_induced_lwe(m: CocycleMorphism) -> Verdict:
    violations = m.validate()
    if violations:
        raise PreconditionError("Not a cocycle morphism", {"violation": violations[0].as_dict()})
    f = induced_map(m)
    violations = f.validate()
    if violations:
        return fail(stage="functor", violation=violations[0].as_dict())
    return is_lwe(f)


def resolution_comparison(c: Cocycle, E: Optional[GrothendieckConstruction] = None) -> TwoGroupoidMap:
    """A -> R(E): identity on objects, alpha to [(e, alpha)], h: alpha => beta to the unique 2-cell."""
    E = E or grothendieck(c)
    comps = {}
    for U in c.source.site.objects:
        comps[U] = TwoFunctor(
            lambda x: x,
            lambda a, U=U: E.unit_arrow(U, a),
            lambda t, U=U, S=c.source.sections[U]: tuple(E.unit_arrow(U, a) for a in S.ends2(t)),
        )
    return TwoGroupoidMap(c.source, resolution(E.groupoid), comps)


# ----------------------------------------------------------------------------------
# homotopies over A x 1 and the homotopy path

def interval_cocycle(c: Cocycle, transport: Callable[[Obj, Hashable], Iso], name: str = "") -> Cocycle:
    """
    The cocycle on A x 1 which is K on the 0 end and T K T^-1 on the 1 end, for a
    natural family of sheaf isomorphisms T(U, i): K(i) -> L_i in the atlas.
    """
    atlas = c.atlas
    A = c.source
    K = c.coefficients
    base = interval_product(A)
    cat = A.site.category

    def end_iso(U, i, b):
        return identity_iso(atlas.sheaf(K.components[U].obj(i))) if b == 0 else transport(U, i)

    comps = {}
    for U in A.site.objects:
        S = A.sections[U]
        KU = K.components[U]
        top = cat.identity(U)

        def one(a, U=U, S=S, KU=KU):
            alpha, (b0, b1) = a
            i, j = S.ends(alpha)
            return compose_isos(end_iso(U, j, b1), compose_isos(KU.one(alpha), invert_iso(end_iso(U, i, b0))))

        def two(t, U=U, S=S, KU=KU, top=top, one=one):
            h, (b0, b1) = t
            alpha, beta = S.ends2(h)
            j = S.ends(alpha)[1]
            k = KU.two(h).conjugator
            moved = end_iso(U, j, b1).at(top)[k]
            return Homotopy(one((alpha, (b0, b1))), one((beta, (b0, b1))), moved)

        def obj(x, U=U, KU=KU):
            i, b = x
            return KU.obj(i) if b == 0 else transport(U, i).target

        comps[U] = TwoFunctor(obj, one, two)
    return Cocycle(atlas, TwoGroupoidMap(base, atlas.presheaf, comps), name=name or f"{c.name}x1")


@dataclass(frozen=True, eq=False)
class HomotopyPath:
    """Cocycles joined by morphisms; each leg is (source index, target index, morphism)."""
    cocycles: Tuple[Cocycle, ...]
    legs: Tuple[Tuple[int, int, CocycleMorphism], ...]

    def validate(self) -> List[Violation]:
        violations: List[Violation] = []
        for n, (s, t, m) in enumerate(self.legs):
            if m.source is not self.cocycles[s] or m.target is not self.cocycles[t]:
                violations.append(Violation("path-leg", f"leg {n} does not join cocycles {s} and {t}", {"leg": n}))
                continue
            for v in m.validate():
                violations.append(Violation(v.axiom, v.detail, dict(v.witness, leg=n)))
        return violations


def _sheafified_fibre(c: Cocycle, E: GrothendieckConstruction, obj: Obj, i: Hashable, key: str) -> Iso:
    """K(i) -> the automorphism sheaf of i in E: the fibre inclusion followed by the unit."""
    A_E = automorphism_sheaves(E.groupoid)
    cat = c.source.site.category
    P = c.atlas.sheaf(c.coefficients.components[obj].obj(i))
    comps = []
    for psi in ordered(P.site.objects):
        V = cat.source(psi)
        y = c.source.restrict[psi].obj(i)
        ident = c.source.sections[V].identity(y)
        images = tuple(A_E.unit(V, y, E.canonical(V, f, ident)) for f in range(P.groups[psi].order))
        if len(set(images)) != len(images) or len(images) != A_E.group(V, y).order:
            raise ConsistencyError("Fibre inclusion does not sheafify to an isomorphism",
                                   {"object": obj, "base_object": i, "slice_object": psi})
        comps.append((psi, images))
    return Iso(P.key, key, tuple(comps))


def homotopy_path(c: Cocycle, atlas: Optional[GroupSheafAtlas] = None) -> HomotopyPath:
    """
    c -> c_gamma <- c_omega -> Phi(E) for E the Grothendieck construction of c, with
    c_omega = Phi(E)∘omega and c_gamma the homotopy over A x 1 built from the fibre
    inclusions. The atlas must contain every automorphism sheaf of E.
    """
    atlas = atlas or c.atlas
    E = grothendieck(c)
    verdict = is_gerbe(E.groupoid)
    if not verdict:
        raise ConsistencyError("Grothendieck construction of a cocycle is not a gerbe", verdict.witness)
    star = aut_sheaf_two_groupoid(E.groupoid)
    missing = ordered(k for comps in star.nu.values() for k in comps.values() if k not in atlas)
    if missing:
        raise PreconditionError("Atlas is not saturated with the automorphism sheaves of the Grothendieck "
                                "construction", {"missing": list(missing)})
    start = c.retarget(atlas)
    end = gerbe_cocycle(E.groupoid, atlas)
    omega = resolution_comparison(start, E)
    omega = TwoGroupoidMap(start.source, end.source, omega.components)
    middle = Cocycle(atlas, compose_two_maps(end.coefficients, omega), name=f"{c.name}.omega")
    transports: Dict = {}

    def transport(U, i):
        if (U, i) not in transports:
            transports[(U, i)] = _sheafified_fibre(start, E, U, i, star.nu[U][i])
        return transports[(U, i)]

    gamma = interval_cocycle(start, transport, name=f"{c.name}.gamma")
    legs = (
        (0, 1, CocycleMorphism(start, gamma, interval_end(start.source, 0, gamma.source))),
        (2, 1, CocycleMorphism(middle, gamma, interval_end(start.source, 1, gamma.source))),
        (2, 3, CocycleMorphism(middle, end, omega)),
    )
    logger.debug(f"Homotopy path from {c.name!r} through {len(E.groupoid.sections)} sections")
    return HomotopyPath((start, gamma, middle, end), legs)


def lwe_homotopy(f: GroupoidMap, atlas: GroupSheafAtlas) -> HomotopyPath:
    """
    For a local weak equivalence f: G -> H of gerbes,
    F(G) -> gamma <- F(H)∘R(f) -> F(H), the homotopy given by the induced
    isomorphisms of automorphism sheaves.
    """
    verdict = is_lwe(f)
    if not verdict:
        raise PreconditionError("Map is not a local weak equivalence", verdict.witness)
    G, H = f.source, f.target
    start = gerbe_cocycle(G, atlas)
    end = gerbe_cocycle(H, atlas)
    Rf = resolution_map(f)
    Rf = TwoGroupoidMap(start.source, end.source, Rf.components)
    middle = Cocycle(atlas, compose_two_maps(end.coefficients, Rf), name=f"F({H.name})R(f)")
    star_G, star_H = aut_sheaf_two_groupoid(G), aut_sheaf_two_groupoid(H)
    transports: Dict = {}

    def transport(U, x):
        if (U, x) not in transports:
            arrays = sheafified_aut_map(f, U, x)
            ordered_arrays = sorted(arrays.items(), key=lambda kv: sort_key(kv[0]))
            comps = tuple((psi, tuple(int(v) for v in arr)) for psi, arr in ordered_arrays)
            transports[(U, x)] = Iso(star_G.nu[U][x], star_H.nu[U][f.apply_object(U, x)], comps)
        return transports[(U, x)]

    gamma = interval_cocycle(start, transport, name=f"F({G.name})x1")
    legs = (
        (0, 1, CocycleMorphism(start, gamma, interval_end(start.source, 0, gamma.source))),
        (2, 1, CocycleMorphism(middle, gamma, interval_end(start.source, 1, gamma.source))),
        (2, 3, CocycleMorphism(middle, end, Rf)),
    )
    return HomotopyPath((start, gamma, middle, end), legs)
