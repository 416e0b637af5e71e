# classify.py
import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, islice, product
from typing import Any, Dict, List, Optional, Sequence, Tuple

from errors import BudgetExceeded, ConsistencyError, PreconditionError
from gpd import (
    Functor, GroupoidMap, GroupoidPresheaf, aut_sheaf, functors, is_gerbe, is_lwe, restrict_to_slice,
    standard_groupoid,
)
from groth import (
    Cocycle, CocycleMorphism, HomotopyPath, check_composite_iso, gerbe_cocycle, gerbe_comparison, grothendieck,
    homotopy_path, lwe_homotopy,
)
from groups import FiniteGroup, are_isomorphic, trivial_group
from report import PASS, Verdict, fail, plain, sort_key
from search import MapSearch, groupoid_maps
from sites import FiniteSite
from two_gpd import (
    GroupSheafAtlas, TwoGroupoidPresheaf, aut_sheaf_two_groupoid, interval_end, interval_product, is_lwe2,
    map_to_terminal2, maps_agree, resolution,
)
from union_find import DisjointSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Bounds:
    """Largest section (number of objects) and largest vertex group order enumerated."""
    objects: int
    order: int

    @classmethod
    def parse(cls, text: str) -> "Bounds":
        try:
            objects, order = (int(part) for part in text.split(","))
        except ValueError:
            raise ValueError(f"Bounds must look like 'objects,order', got {text!r}")
        if objects < 0 or order < 0:
            raise ValueError(f"Bounds must be nonnegative, got {text!r}")
        return cls(objects, order)

    def __str__(self):
        return f"{self.objects},{self.order}"


@dataclass
class EnumerationFrontier:
    """
    How far a presheaf enumeration got. Every choice of section shapes before `choice`
    is done; `found` holds, in order, the shape choice and the index of each
    restriction functor of every presheaf found so far.
    """
    choice: int
    steps: int
    shapes: int
    found: List[Tuple[Tuple[int, ...], Tuple[int, ...]]] = field(default_factory=list)
    complete: bool = False


@dataclass(frozen=True, eq=False)
class Corpus:
    site: FiniteSite
    bounds: Bounds
    atlas: GroupSheafAtlas
    budget: Optional[int] = None
    jobs: int = 1
    seed: Optional[int] = None
    sample: int = 8
    sources: Tuple[TwoGroupoidPresheaf, ...] = ()
    frontier: Optional[EnumerationFrontier] = None


# ----------------------------------------------------------------------------------
# gerbe enumeration

def group_catalog(corpus: Corpus) -> List[FiniteGroup]:
    """Vertex groups: the sections of atlas sheaves and the trivial group, up to isomorphism."""
    found: List[FiniteGroup] = [trivial_group()]
    for key in corpus.atlas.keys():
        for G in corpus.atlas.sheaf(key).groups.values():
            if G.order <= corpus.bounds.order and not any(are_isomorphic(G, H) for H in found):
                found.append(G)
    return sorted((G for G in found if G.order <= corpus.bounds.order), key=lambda G: (G.order, G.key))


def section_shapes(catalog: Sequence[FiniteGroup], max_objects: int) -> List:
    """Standard groupoids with at most `max_objects` objects, one per multiset of components."""
    kinds = [(k, g) for k in range(1, max_objects + 1) for g in range(len(catalog))]
    shapes = []
    for count in range(0, max_objects + 1):
        for combo in combinations_with_replacement(kinds, count):
            if sum(k for k, _ in combo) > max_objects:
                continue
            components, start = [], 0
            for k, g in combo:
                components.append((list(range(start, start + k)), catalog[g]))
                start += k
            shapes.append(standard_groupoid(components))
    return shapes


class _Budget:
    def __init__(self, limit: Optional[int], what: str, steps: int = 0):
        self.limit = limit or None
        self.steps = steps
        self.what = what

    def step(self, partial: Any = None) -> None:
        self.steps += 1
        if self.limit is not None and self.steps > self.limit:
            raise BudgetExceeded(f"{self.what} ran past {self.limit} steps", partial=partial,
                                 details={"steps": self.steps})


def _functorial(site: FiniteSite, restrict: Dict, sections: Dict) -> bool:
    cat = site.category
    for (g, f), gf in cat.composition.items():
        if g not in restrict or f not in restrict or gf not in restrict:
            continue
        Rg, Rf, Rgf = restrict[g], restrict[f], restrict[gf]
        S = sections[cat.target(g)]
        if any(Rgf.objects[x] != Rf.objects[Rg.objects[x]] for x in S.objects):
            return False
        if any(Rgf.arrows[a] != Rf.arrows[Rg.arrows[a]] for a in S.arrows):
            return False
    return True


def _check_frontier(frontier: EnumerationFrontier, shapes: int, objects: int, moving: int) -> None:
    if frontier.shapes != shapes:
        raise PreconditionError("Checkpoint was taken over other section shapes",
                                {"checkpoint": frontier.shapes, "shapes": shapes})
    for choice, picks in frontier.found:
        if len(choice) != objects or len(picks) != moving or not all(0 <= i < shapes for i in choice):
            raise PreconditionError("Checkpoint does not fit this site", {"choice": list(choice)})


def _enumerate(site: FiniteSite, shapes: Sequence, budget: _Budget,
               frontier: Optional[EnumerationFrontier] = None) -> Tuple[List[GroupoidPresheaf], EnumerationFrontier]:
    cat = site.category
    objects = list(site.objects_by_height)
    position = {U: n for n, U in enumerate(objects)}
    moving = sorted((phi for phi in cat.morphisms if phi != cat.identity(cat.source(phi))), key=sort_key)
    cache: Dict[Tuple[int, int], List[Functor]] = {}

    def options(choice, phi) -> List[Functor]:
        V, U = cat.morphisms[phi]
        key = (choice[position[U]], choice[position[V]])
        if key not in cache:
            cache[key] = functors(shapes[key[0]], shapes[key[1]])
        return cache[key]

    def start(choice):
        sections = {U: shapes[i] for U, i in zip(objects, choice)}
        restrict = {cat.identity(U): Functor({x: x for x in S.objects}, {a: a for a in S.arrows})
                    for U, S in sections.items()}
        return sections, restrict

    found: List[GroupoidPresheaf] = []
    trail: List[Tuple[Tuple[int, ...], Tuple[int, ...]]] = []
    first = 0
    if frontier is not None:
        _check_frontier(frontier, len(shapes), len(objects), len(moving))
        for choice, picks in frontier.found:
            sections, restrict = start(choice)
            for phi, k in zip(moving, picks):
                if not 0 <= k < len(options(choice, phi)):
                    raise PreconditionError("Checkpoint names a restriction that does not exist",
                                            {"choice": list(choice), "morphism": phi})
                restrict[phi] = options(choice, phi)[k]
            found.append(GroupoidPresheaf(site, sections, restrict, name=f"G{len(found)}"))
            trail.append((tuple(choice), tuple(picks)))
        first = frontier.choice
        logger.info(f"Resuming enumeration at shape choice {first} with {len(found)} presheaves")

    choices = islice(product(range(len(shapes)), repeat=len(objects)), first, None)
    for n, choice in enumerate(choices, first):
        sections, restrict = start(choice)
        picks: List[int] = []
        mark, spent = len(found), budget.steps

        def extend(m: int) -> None:
            if m == len(moving):
                found.append(GroupoidPresheaf(site, dict(sections), dict(restrict), name=f"G{len(found)}"))
                trail.append((choice, tuple(picks)))
                return
            phi = moving[m]
            for k, F in enumerate(options(choice, phi)):
                budget.step()
                restrict[phi] = F
                if _functorial(site, restrict, sections):
                    picks.append(k)
                    extend(m + 1)
                    picks.pop()
            restrict.pop(phi, None)

        try:
            budget.step()
            extend(0)
        except BudgetExceeded as e:
            del found[mark:], trail[mark:]
            raise BudgetExceeded(str(e), partial=EnumerationFrontier(n, spent, len(shapes), list(trail)),
                                 details=dict(e.details, choice=n)) from None
    total = len(shapes) ** len(objects)
    return found, EnumerationFrontier(max(first, total), budget.steps, len(shapes), trail, complete=True)


def enumerate_presheaves(site: FiniteSite, shapes: Sequence, budget: _Budget,
                         frontier: Optional[EnumerationFrontier] = None) -> List[GroupoidPresheaf]:
    """
    Every groupoid presheaf with the given section shapes, by backtracking over
    restriction functors. On an exhausted budget the BudgetExceeded carries an
    EnumerationFrontier to continue from.
    """
    return _enumerate(site, shapes, budget, frontier)[0]


def is_atlas_gerbe(G: GroupoidPresheaf, atlas: GroupSheafAtlas) -> Verdict:
    """A gerbe whose automorphism sheaves are locally isomorphic to atlas sheaves."""
    verdict = is_gerbe(G)
    if not verdict:
        return verdict
    for U in sorted(G.site.objects, key=sort_key):
        for x in G.sections[U].objects:
            verdict = atlas.locally_isomorphic(U, aut_sheaf(G, U, x))
            if not verdict:
                return fail(object=U, base_object=x, detail=verdict.witness)
    return PASS


def enumerate_candidates(corpus: Corpus) -> Tuple[List[GroupoidPresheaf], EnumerationFrontier]:
    """All groupoid presheaves within the bounds, continuing from `corpus.frontier` if set."""
    shapes = section_shapes(group_catalog(corpus), corpus.bounds.objects)
    steps = corpus.frontier.steps if corpus.frontier is not None else 0
    return _enumerate(corpus.site, shapes, _Budget(corpus.budget, "Gerbe enumeration", steps), corpus.frontier)


def _atlas_gerbes(corpus: Corpus, candidates: List[GroupoidPresheaf],
                  atlas: GroupSheafAtlas) -> List[GroupoidPresheaf]:
    gerbes = [G for G in candidates if is_atlas_gerbe(G, atlas)]
    if corpus.seed is not None and len(gerbes) > corpus.sample:
        rng = random.Random(corpus.seed)
        keep = sorted(rng.sample(range(len(gerbes)), corpus.sample))
        gerbes = [gerbes[i] for i in keep]
    logger.info(f"Enumerated {len(candidates)} groupoid presheaves, {len(gerbes)} atlas gerbes")
    return gerbes


def enumerate_gerbes(corpus: Corpus, atlas: Optional[GroupSheafAtlas] = None) -> List[GroupoidPresheaf]:
    return _atlas_gerbes(corpus, enumerate_candidates(corpus)[0], atlas or corpus.atlas)


# ----------------------------------------------------------------------------------
# classes

def find_lwe(G: GroupoidPresheaf, H: GroupoidPresheaf, budget: Optional[int] = None) -> Optional[GroupoidMap]:
    """The first map G -> H (in search order) which is a local weak equivalence."""
    for f in groupoid_maps(G, H, budget=budget):
        if is_lwe(f):
            return f
    return None


def find_lwe_step(G: GroupoidPresheaf, H: GroupoidPresheaf, budget: Optional[int] = None) -> Optional[GroupoidMap]:
    """A local weak equivalence in either direction."""
    return find_lwe(G, H, budget) or find_lwe(H, G, budget)


@dataclass
class GerbeClasses:
    gerbes: List[GroupoidPresheaf]
    classes: Tuple[Tuple[int, ...], ...]
    edges: List[Tuple[int, int, GroupoidMap]] = field(default_factory=list)

    def class_of(self, i: int) -> int:
        for n, members in enumerate(self.classes):
            if i in members:
                return n
        raise ValueError(f"Unknown gerbe index {i}")


def _directed_lwe(gerbes, pair, budget):
    i, j = pair
    f = find_lwe(gerbes[i], gerbes[j], budget)
    if f is not None:
        return (i, j, f)
    f = find_lwe(gerbes[j], gerbes[i], budget)
    if f is not None:
        return (j, i, f)
    return None


# worker process state, set once per process by _init_worker
_worker_gerbes: List[GroupoidPresheaf] = []
_worker_budget: Optional[int] = None


def _init_worker(gerbes: List[GroupoidPresheaf], budget: Optional[int]) -> None:
    global _worker_gerbes, _worker_budget
    _worker_gerbes, _worker_budget = gerbes, budget


def _worker_step(pair: Tuple[int, int]):
    """A directed lwe as plain functor tables, rebuilt over the parent's gerbes."""
    try:
        step = _directed_lwe(_worker_gerbes, pair, _worker_budget)
    except BudgetExceeded as e:
        raise BudgetExceeded(str(e), details=e.details) from None
    if step is None:
        return pair, None
    s, t, f = step
    return pair, (s, t, {U: (dict(F.objects), dict(F.arrows)) for U, F in f.components.items()})


def _parallel_steps(gerbes: List[GroupoidPresheaf], pairs: List[Tuple[int, int]], jobs: int,
                    budget: Optional[int]) -> List:
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(gerbes, budget)) as pool:
        results = list(pool.map(_worker_step, pairs))
    found = []
    for pair, step in results:
        if step is not None:
            s, t, tables = step
            comps = {U: Functor(objects, arrows) for U, (objects, arrows) in tables.items()}
            step = (s, t, GroupoidMap(gerbes[s], gerbes[t], comps))
        found.append((pair, step))
    return found


def gerbe_classes(corpus: Corpus, gerbes: Optional[List[GroupoidPresheaf]] = None) -> GerbeClasses:
    """Union-find over single local weak equivalences, in either direction."""
    gerbes = enumerate_gerbes(corpus) if gerbes is None else gerbes
    classes: DisjointSet = DisjointSet()
    for i in range(len(gerbes)):
        classes.make_set(i)
    edges = []
    pairs = [(i, j) for i in range(len(gerbes)) for j in range(i + 1, len(gerbes))]
    if corpus.jobs > 1 and pairs:
        results = _parallel_steps(gerbes, pairs, corpus.jobs, corpus.budget)
    else:
        results = []
        for p in pairs:
            if not classes.same(*p):
                results.append((p, _directed_lwe(gerbes, p, corpus.budget)))
    for (i, j), step in results:
        if step is not None:
            edges.append(step)
            classes.union(i, j)
    found = GerbeClasses(gerbes, classes.classes(), edges)
    logger.info(f"{len(gerbes)} gerbes in {len(found.classes)} classes")
    return found


@dataclass(frozen=True, eq=False)
class CocycleRecord:
    """A cocycle and the corpus gerbe whose resolution is its source (None for extra sources)."""
    gerbe: Optional[int]
    cocycle: Cocycle


def enumerate_cocycles(gerbes: Sequence[GroupoidPresheaf], atlas: GroupSheafAtlas, budget: Optional[int] = None,
                       sources: Sequence[TwoGroupoidPresheaf] = ()) -> List[CocycleRecord]:
    """Every strict map R(S) -> atlas for S in the corpus, and A -> atlas for each extra source A."""
    records = []
    for n, S in enumerate(gerbes):
        A = resolution(S)
        verdict = is_lwe2(map_to_terminal2(A))
        if not verdict:
            raise ConsistencyError(f"Resolution of gerbe {S.name!r} is not locally contractible", verdict.witness)
        for m, K in enumerate(MapSearch(A, atlas.presheaf, budget=budget).run()):
            records.append(CocycleRecord(n, Cocycle(atlas, K, name=f"{S.name}.K{m}")))
    for n, A in enumerate(sources):
        verdict = is_lwe2(map_to_terminal2(A))
        if not verdict:
            raise PreconditionError(f"Cocycle source {A.name!r} is not locally contractible", verdict.witness)
        name = A.name or f"A{n}"
        for m, K in enumerate(MapSearch(A, atlas.presheaf, budget=budget).run()):
            records.append(CocycleRecord(None, Cocycle(atlas, K, name=f"{name}.K{m}")))
    logger.info(f"Enumerated {len(records)} cocycles over {len(gerbes)} resolutions and {len(sources)} other sources")
    return records


def find_cocycle_morphism(c: Cocycle, d: Cocycle, budget: Optional[int] = None) -> Optional[CocycleMorphism]:
    K, L = c.coefficients, d.coefficients

    def commutes(U, level, cell, value):
        if level == 0:
            return L.components[U].obj(value) == K.components[U].obj(cell)
        if level == 1:
            return L.components[U].one(value) == K.components[U].one(cell)
        return L.components[U].two(value) == K.components[U].two(cell)

    found = MapSearch(c.source, d.source, allowed=commutes, budget=budget).run(limit=1)
    return CocycleMorphism(c, d, found[0]) if found else None


def find_cocycle_homotopy(c: Cocycle, d: Cocycle, budget: Optional[int] = None) -> Optional[HomotopyPath]:
    """
    c -> gamma <- d for cocycles on one source A: gamma on A x 1 is K on the 0 end
    and L on the 1 end, so its 1-cells between the ends are sheaf isomorphisms that
    may join different atlas sheaves.
    """
    if c.source is not d.source:
        return None
    A = c.source
    base = interval_product(A)
    ends = {0: c.coefficients, 1: d.coefficients}

    def pinned(U, level, cell, value):
        if level == 0:
            x, b = cell
            return value == ends[b].components[U].obj(x)
        inner, (b0, b1) = cell
        if b0 != b1:
            return True
        F = ends[b0].components[U]
        return value == (F.one(inner) if level == 1 else F.two(inner))

    found = MapSearch(base, d.atlas.presheaf, allowed=pinned, budget=budget).run(limit=1)
    if not found:
        return None
    gamma = Cocycle(d.atlas, found[0], name=f"{c.name}~{d.name}")
    legs = (
        (0, 1, CocycleMorphism(c, gamma, interval_end(A, 0, base))),
        (2, 1, CocycleMorphism(d, gamma, interval_end(A, 1, base))),
    )
    return HomotopyPath((c, gamma, d), legs)


@dataclass
class CocycleClasses:
    records: List[CocycleRecord]
    union: DisjointSet
    edges: List[Tuple[int, int, str]] = field(default_factory=list)

    @property
    def classes(self) -> Tuple[Tuple[int, ...], ...]:
        return self.union.classes()

    def class_of(self, i: int) -> int:
        for n, members in enumerate(self.classes):
            if i in members:
                return n
        raise ValueError(f"Unknown cocycle index {i}")

    def merge(self, i: int, j: int, kind: str) -> None:
        self.edges.append((i, j, kind))
        self.union.union(i, j)


def cocycle_classes(records: List[CocycleRecord], budget: Optional[int] = None) -> CocycleClasses:
    """Union-find over single cocycle morphisms in either direction and homotopies over A x 1."""
    union: DisjointSet = DisjointSet()
    for i in range(len(records)):
        union.make_set(i)
    found = CocycleClasses(records, union)
    for i in range(len(records)):
        for j in range(i + 1, len(records)):
            if union.same(i, j):
                continue
            c, d = records[i].cocycle, records[j].cocycle
            if find_cocycle_morphism(c, d, budget) is not None or find_cocycle_morphism(d, c, budget) is not None:
                found.merge(i, j, "morphism")
                continue
            path = find_cocycle_homotopy(c, d, budget)
            if path is not None:
                _check_path(path, f"Homotopy between {c.name} and {d.name}")
                found.merge(i, j, "homotopy")
    logger.info(f"{len(records)} cocycles in {len(found.classes)} classes")
    return found


# ----------------------------------------------------------------------------------
# Phi and Psi

def gerbe_to_cocycle(G: GroupoidPresheaf, atlas: GroupSheafAtlas) -> Cocycle:
    """The canonical cocycle of a gerbe with values in `atlas`."""
    return gerbe_cocycle(G, atlas)


def cocycle_to_gerbe(c: Cocycle) -> GroupoidPresheaf:
    """The Grothendieck construction of a cocycle, certified to be a gerbe."""
    E = grothendieck(c).groupoid
    verdict = is_gerbe(E)
    if not verdict:
        raise ConsistencyError(f"Grothendieck construction of {c.name!r} is not a gerbe", verdict.witness)
    return E


def gerbe_atlas(G: GroupoidPresheaf) -> GroupSheafAtlas:
    """The atlas of automorphism sheaves of G and their restrictions."""
    return aut_sheaf_two_groupoid(G).atlas


def locate_gerbe(E: GroupoidPresheaf, found: GerbeClasses, budget: Optional[int] = None) -> Optional[int]:
    """The class joined to E by a single local weak equivalence, if any within bounds."""
    for n, members in enumerate(found.classes):
        for i in members:
            if find_lwe_step(E, found.gerbes[i], budget) is not None:
                return n
    return None


def _locate_cocycle(c: Cocycle, gerbe: Optional[int], records: Sequence[CocycleRecord]) -> Optional[int]:
    for n, r in enumerate(records):
        same_source = r.gerbe == gerbe if gerbe is not None else r.cocycle.source is c.source
        if same_source and maps_agree(c.coefficients, r.cocycle.coefficients):
            return n
    return None


def _saturate(atlas: GroupSheafAtlas, gerbes: Sequence[GroupoidPresheaf]) -> GroupSheafAtlas:
    extra = [entry for G in gerbes for entry in gerbe_atlas(G).entries]
    return atlas.saturated(extra)


def _ends_agree(path: HomotopyPath, first: Cocycle, last: Cocycle) -> bool:
    """The path starts at `first` and ends at `last`, cell by cell."""
    return bool(maps_agree(path.cocycles[0].coefficients, first.coefficients)) and \
        bool(maps_agree(path.cocycles[-1].coefficients, last.coefficients))


@dataclass
class Pi0Report:
    """Both sets of classes, the class maps and the verdict, scoped by the bounds."""
    site: str
    bounds: Bounds
    atlas_size: int
    gerbe_classes: List[Dict[str, Any]]
    cocycle_classes: List[Dict[str, Any]]
    phi: Dict[int, Optional[int]]
    psi: Dict[int, Optional[int]]
    verdict: Verdict
    witnesses: List[Dict[str, Any]] = field(default_factory=list)
    not_connected: List[str] = field(default_factory=list)
    seed: Optional[int] = None

    def as_dict(self) -> Dict[str, Any]:
        return plain({
            "site": self.site,
            "bounds": str(self.bounds),
            "atlas_size": self.atlas_size,
            "gerbe_classes": self.gerbe_classes,
            "cocycle_classes": self.cocycle_classes,
            "phi": {str(k): v for k, v in sorted(self.phi.items())},
            "psi": {str(k): v for k, v in sorted(self.psi.items())},
            "verdict": self.verdict.as_dict(),
            "witnesses": self.witnesses,
            "not_connected_within_bounds": self.not_connected,
            "seed": self.seed,
        })


@dataclass
class Classification:
    report: Pi0Report
    gerbes: GerbeClasses
    cocycles: CocycleClasses
    atlas: GroupSheafAtlas


def _require_valid_atlas(atlas: GroupSheafAtlas) -> None:
    violations = atlas.validate()
    if violations:
        raise PreconditionError("Atlas is not valid", {"violations": [v.as_dict() for v in violations[:5]]})


def _check_path(path: HomotopyPath, what: str) -> None:
    violations = path.validate()
    if violations:
        raise ConsistencyError(f"{what} has an invalid leg", {"violation": violations[0].as_dict()})



def _lwe_joins(gerbes: GerbeClasses, records: List[CocycleRecord], phi_of: Dict[int, Optional[int]],
               atlas: GroupSheafAtlas, witnesses: List[Dict[str, Any]]) -> List[Tuple[int, int, str]]:
    """Phi(G) ~ Phi(H) along each lwe G -> H joining two corpus gerbes."""
    joins = []
    for s, t, f in gerbes.edges:
        if phi_of.get(s) is None or phi_of.get(t) is None:
            continue
        path = lwe_homotopy(f, atlas)
        _check_path(path, f"Homotopy for {f.source.name} -> {f.target.name}")
        if _ends_agree(path, records[phi_of[s]].cocycle, records[phi_of[t]].cocycle):
            joins.append((phi_of[s], phi_of[t], "lwe-homotopy"))
        else:
            witnesses.append({"kind": "lwe-homotopy-ends", "gerbes": [gerbes.gerbes[s].name, gerbes.gerbes[t].name]})
    return joins


def _round_trip(record: CocycleRecord, E: GroupoidPresheaf, members: Sequence[int], gerbes: GerbeClasses,
                records: List[CocycleRecord], phi_of: Dict[int, Optional[int]], atlas: GroupSheafAtlas,
                budget: Optional[int]) -> Optional[int]:
    """
    The record of Phi(G) for a corpus gerbe G in `members`, when c ~ Phi(E) by the
    homotopy path and Phi(E) ~ Phi(G) along an lwe between E and G both certify with
    matching ends; E is the Grothendieck construction of c.
    """
    path = homotopy_path(record.cocycle, atlas)
    _check_path(path, f"Homotopy path of {record.cocycle.name}")
    middle = path.cocycles[-1]
    for i in members:
        if phi_of.get(i) is None:
            continue
        target = records[phi_of[i]].cocycle
        f = find_lwe(E, gerbes.gerbes[i], budget)
        first, last = middle, target
        if f is None:
            f = find_lwe(gerbes.gerbes[i], E, budget)
            first, last = target, middle
        if f is None:
            continue
        step = lwe_homotopy(f, atlas)
        _check_path(step, f"Homotopy for {f.source.name} -> {f.target.name}")
        if _ends_agree(step, first, last):
            return phi_of[i]
    return None


def classify(corpus: Corpus, atlas: Optional[GroupSheafAtlas] = None, saturate: bool = True) -> Classification:
    """
    Gerbe classes and cocycle classes with the class maps between them. With
    `saturate`, cocycles take values in the atlas enlarged by the automorphism
    sheaves of the corpus gerbes, and Phi(Psi(c)) ~ c is certified for every
    enumerated cocycle before the certified zig-zags are merged into the cocycle classes.

    A BudgetExceeded raised here carries the EnumerationFrontier to resume from.
    """
    atlas = atlas or corpus.atlas
    _require_valid_atlas(atlas)
    candidates, frontier = enumerate_candidates(corpus)
    try:
        return _classify(corpus, atlas, _atlas_gerbes(corpus, candidates, atlas), saturate)
    except BudgetExceeded as e:
        raise BudgetExceeded(str(e), partial=frontier, details=dict(e.details, stage="classes")) from e


def _classify(corpus: Corpus, atlas: GroupSheafAtlas, enumerated: List[GroupoidPresheaf],
              saturate: bool) -> Classification:
    gerbes = gerbe_classes(corpus, enumerated)
    values = _saturate(atlas, gerbes.gerbes) if saturate else atlas
    records = enumerate_cocycles(gerbes.gerbes, values, corpus.budget, corpus.sources)
    cocycles = cocycle_classes(records, corpus.budget)
    witnesses: List[Dict[str, Any]] = []
    not_connected: List[str] = []

    # Psi on cocycles
    located: Dict[int, Optional[int]] = {}
    constructions = {}
    for n, r in enumerate(records):
        E = cocycle_to_gerbe(r.cocycle)
        constructions[n] = E
        located[n] = locate_gerbe(E, gerbes, corpus.budget)
        if located[n] is None:
            not_connected.append(r.cocycle.name)
            logger.warning(f"Grothendieck construction of {r.cocycle.name} is not connected to a corpus gerbe "
                           f"within bounds {corpus.bounds}")

    # Phi on gerbes
    phi_of: Dict[int, Optional[int]] = {}
    for i, G in enumerate(gerbes.gerbes):
        try:
            c = gerbe_to_cocycle(G, values)
        except PreconditionError:
            phi_of[i] = None
            continue
        phi_of[i] = _locate_cocycle(c, i, records)

    if saturate:
        paths_atlas = values.saturated([entry for E in constructions.values() for entry in gerbe_atlas(E).entries])
        joins = _lwe_joins(gerbes, records, phi_of, paths_atlas, witnesses)
        # Phi(Psi(c)) ~ c on each record, decided before any zig-zag is merged
        for n, r in enumerate(records):
            if located[n] is None:
                continue
            members = gerbes.classes[located[n]]
            m = _round_trip(r, constructions[n], members, gerbes, records, phi_of, paths_atlas, corpus.budget)
            if m is None:
                witnesses.append({"kind": "phi-psi-not-identity", "cocycle": r.cocycle.name,
                                  "gerbe_class": located[n]})
            elif m != n:
                joins.append((n, m, "homotopy-path"))
        for i, j, kind in joins:
            cocycles.merge(i, j, kind)

    gclasses, kclasses = gerbes.classes, cocycles.classes
    phi: Dict[int, Optional[int]] = {}
    for g, members in enumerate(gclasses):
        images = {cocycles.class_of(phi_of[i]) for i in members if phi_of.get(i) is not None}
        if len(images) > 1:
            witnesses.append({"kind": "phi-not-well-defined", "gerbe_class": g, "images": sorted(images)})
        phi[g] = min(images) if images else None
    psi: Dict[int, Optional[int]] = {}
    for k, members in enumerate(kclasses):
        images = {located[n] for n in members if located[n] is not None}
        if len(images) > 1:
            witnesses.append({"kind": "psi-not-well-defined", "cocycle_class": k, "images": sorted(images)})
        psi[k] = min(images) if images else None

    if saturate:
        for g, members in enumerate(gclasses):
            G = gerbes.gerbes[members[0]]
            E = grothendieck(gerbe_to_cocycle(G, values))
            if not check_composite_iso(G) or not is_lwe(gerbe_comparison(G, E)):
                witnesses.append({"kind": "psi-phi-comparison", "gerbe_class": g})
            if phi[g] is None or psi.get(phi[g]) != g:
                witnesses.append({"kind": "psi-phi-not-identity", "gerbe_class": g, "phi": phi[g],
                                  "psi": psi.get(phi[g]) if phi[g] is not None else None})
        for k in range(len(kclasses)):
            if psi[k] is None or phi.get(psi[k]) != k:
                witnesses.append({"kind": "phi-psi-not-identity", "cocycle_class": k, "psi": psi[k],
                                  "phi": phi.get(psi[k]) if psi[k] is not None else None})
    else:
        hit = [g for g in psi.values() if g is not None]
        if len(set(hit)) != len(hit) or None in psi.values():
            witnesses.append({"kind": "psi-not-injective", "psi": psi})
        missing = sorted(set(range(len(gclasses))) - set(hit))
        if missing:
            witnesses.append({"kind": "psi-not-surjective", "gerbe_classes": missing})

    verdict = PASS if not witnesses else fail(count=len(witnesses))
    report = Pi0Report(
        site=corpus.site.name,
        bounds=corpus.bounds,
        atlas_size=len(values.keys()),
        gerbe_classes=[{"representative": gerbes.gerbes[m[0]].name, "size": len(m)} for m in gclasses],
        cocycle_classes=[{"representative": records[m[0]].cocycle.name, "size": len(m)} for m in kclasses],
        phi=phi,
        psi=psi,
        verdict=verdict,
        witnesses=witnesses,
        not_connected=not_connected,
        seed=corpus.seed,
    )
    logger.info(f"Classification on {corpus.site.name}: {len(gclasses)} gerbe classes, "
                f"{len(kclasses)} cocycle classes, verdict {'PASS' if verdict else 'FAIL'}")
    return Classification(report, gerbes, cocycles, values)



def verify_classification(corpus: Corpus) -> Pi0Report:
    """Phi and Psi are mutually inverse bijections on the enumerated classes."""
    return classify(corpus).report


@dataclass
class EnlargementReport:
    inclusion: Verdict
    cocycle_comparison: Verdict
    gerbe_comparison: Verdict
    smaller: Pi0Report
    larger: Pi0Report

    @property
    def holds(self) -> bool:
        return bool(self.inclusion and self.cocycle_comparison and self.gerbe_comparison)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "inclusion_lwe": self.inclusion.as_dict(),
            "cocycle_comparison": self.cocycle_comparison.as_dict(),
            "gerbe_comparison": self.gerbe_comparison.as_dict(),
            "smaller": self.smaller.as_dict(),
            "larger": self.larger.as_dict(),
            "holds": self.holds,
        }


def verify_enlargement(corpus: Corpus, larger: GroupSheafAtlas) -> EnlargementReport:
    """
    For F = corpus.atlas contained in F' = `larger` with every F' sheaf locally
    isomorphic to an F sheaf: the inclusion is a local weak equivalence, cocycle classes
    with values in F and in F' correspond, and cocycle classes with values in F
    correspond to gerbe classes.
    """
    smaller = corpus.atlas
    missing = [k for k in smaller.keys() if k not in larger]
    if missing:
        raise PreconditionError("Atlas is not contained in the larger atlas", {"missing": missing})
    for key in larger.keys():
        verdict = smaller.locally_isomorphic(larger.base(key), larger.sheaf(key))
        if not verdict:
            raise PreconditionError("A sheaf of the larger atlas is not locally isomorphic to the smaller atlas",
                                    {"sheaf": key, "witness": verdict.witness})
    inclusion = is_lwe2(smaller.inclusion(larger))
    small = classify(corpus, smaller, saturate=False)
    large = classify(corpus, larger, saturate=False)
    mapping: Dict[int, set] = {}
    comparison = PASS
    for n, r in enumerate(small.cocycles.records):
        moved = r.cocycle.retarget(larger)
        m = _locate_cocycle(moved, r.gerbe, large.cocycles.records)
        if m is None:
            comparison = fail(cocycle=r.cocycle.name, reason="not enumerated with values in the larger atlas")
            break
        mapping.setdefault(small.cocycles.class_of(n), set()).add(large.cocycles.class_of(m))
    if comparison:
        images = [next(iter(v)) for v in mapping.values()]
        if any(len(v) != 1 for v in mapping.values()):
            comparison = fail(reason="not well defined")
        elif len(set(images)) != len(images):
            comparison = fail(reason="not injective")
        elif set(images) != set(range(len(large.cocycles.classes))):
            comparison = fail(reason="not surjective")
    return EnlargementReport(inclusion, comparison, small.report.verdict, small.report, large.report)


# ----------------------------------------------------------------------------------
# local equivalence

@dataclass(frozen=True)
class LocalEquivalence:
    """Whether G and H are locally equivalent, and whether a single global lwe joins them."""
    local: Verdict
    direct: bool

    def as_dict(self) -> Dict[str, Any]:
        return {"local": self.local.as_dict(), "direct": self.direct}


def locally_equivalent(G: GroupoidPresheaf, H: GroupoidPresheaf, budget: Optional[int] = None) -> LocalEquivalence:
    """
    There is a covering family of objects U over which the restrictions of G and H to
    C/U are joined by a local weak equivalence.
    """
    site = G.site
    cat = site.category
    good = [U for U in sorted(site.objects, key=sort_key)
            if find_lwe_step(restrict_to_slice(G, U), restrict_to_slice(H, U), budget) is not None]
    for W in sorted(site.objects, key=sort_key):
        members = [phi for phi in cat.into(W) if any(cat.hom(cat.source(phi), U) for U in good)]
        if not site.is_covering(W, members):
            return LocalEquivalence(fail(object=W, good=good), False)
    return LocalEquivalence(PASS, find_lwe_step(G, H, budget) is not None)
