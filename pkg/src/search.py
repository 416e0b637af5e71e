# search.py
import logging
from typing import Callable, Dict, Hashable, List, Optional, Tuple

from errors import BudgetExceeded
from gpd import Functor, GroupoidMap, GroupoidPresheaf
from report import ordered
from sites import Obj
from two_gpd import TwoFunctor, TwoGroupoidMap, TwoGroupoidPresheaf, groupoid_as_two

logger = logging.getLogger(__name__)

# (object of the site, level 0/1/2, source cell)
Slot = Tuple[Obj, int, Hashable]
Allowed = Callable[[Obj, int, Hashable, Hashable], bool]


class _SectionTables:
    """Composition incidences of one source section, precomputed for propagation."""

    def __init__(self, H):
        self.objects = H.objects()
        self.one = H.one_cells
        self.two = H.two_cells
        self.ends = {a: H.ends(a) for a in self.one}
        self.ends2 = {t: H.ends2(t) for t in self.two}
        self.identity = {x: H.identity(x) for x in self.objects}
        self.inverse = {a: H.inverse(a) for a in self.one}
        self.identity2 = {a: H.identity2(a) for a in self.one}
        self.vinverse = {t: H.vinverse(t) for t in self.two}
        self.after: Dict[Hashable, List] = {a: [] for a in self.one}
        self.before: Dict[Hashable, List] = {a: [] for a in self.one}
        for a in self.one:
            y = self.ends[a][1]
            for z in self.objects:
                for b in H.hom(y, z):
                    ba = H.compose(b, a)
                    self.after[a].append((b, ba))
                    self.before[b].append((a, ba))
        self.vafter: Dict[Hashable, List] = {t: [] for t in self.two}
        self.vbefore: Dict[Hashable, List] = {t: [] for t in self.two}
        for t in self.two:
            for s in H.two_cells_from(self.ends2[t][1]):
                st = H.vcompose(s, t)
                self.vafter[t].append((s, st))
                self.vbefore[s].append((t, st))


class MapSearch:
    """
    Backtracking search for strict maps of 2-groupoid presheaves. Site objects are
    visited by height; inside a section objects come before 1-cells before 2-cells.
    Every assignment forces restrictions, identities, inverses and composites of
    already-assigned cells; horizontal composition is checked on complete maps.
    """

    def __init__(self, source: TwoGroupoidPresheaf, target: TwoGroupoidPresheaf,
                 allowed: Optional[Allowed] = None, budget: Optional[int] = None):
        self.source = source
        self.target = target
        self.allowed = allowed
        self.budget = budget or None
        self.steps = 0
        cat = source.site.category
        self.tables = {U: _SectionTables(source.sections[U]) for U in source.site.objects}
        self.restrictions = {U: [phi for phi in cat.into(U) if phi != cat.identity(U)] for U in source.site.objects}
        self.order: List[Slot] = []
        for U in source.site.objects_by_height:
            T = self.tables[U]
            self.order.extend((U, 0, x) for x in T.objects)
            self.order.extend((U, 1, a) for a in T.one)
            self.order.extend((U, 2, t) for t in T.two)
        self.value: Dict[Slot, Hashable] = {}
        self.trail: List[Slot] = []
        self.found: List[TwoGroupoidMap] = []

    # -- assignment and propagation

    def _undo(self, mark: int) -> None:
        while len(self.trail) > mark:
            del self.value[self.trail.pop()]

    def _assign(self, slot: Slot, v: Hashable) -> bool:
        """Assign and propagate; False on any conflict (caller undoes)."""
        queue = [(slot, v)]
        while queue:
            slot, v = queue.pop()
            if slot in self.value:
                if self.value[slot] != v:
                    return False
                continue
            U, level, c = slot
            if self.allowed is not None and not self.allowed(U, level, c, v):
                return False
            self.value[slot] = v
            self.trail.append(slot)
            if not self._propagate(U, level, c, v, queue):
                return False
        return True

    def _propagate(self, U: Obj, level: int, c: Hashable, v: Hashable, queue: List) -> bool:
        S = self.tables[U]
        T = self.target.sections[U]
        value = self.value
        if level == 0:
            queue.append(((U, 1, S.identity[c]), T.identity(v)))
        elif level == 1:
            x, y = S.ends[c]
            tx, ty = T.ends(v)
            for slot, w in (((U, 0, x), tx), ((U, 0, y), ty)):
                if slot in value and value[slot] != w:
                    return False
                queue.append((slot, w))
            queue.append(((U, 1, S.inverse[c]), T.inverse(v)))
            queue.append(((U, 2, S.identity2[c]), T.identity2(v)))
            for b, ba in S.after[c]:
                mb = value.get((U, 1, b))
                if mb is not None:
                    if T.ends(mb)[0] != ty:
                        return False
                    queue.append(((U, 1, ba), T.compose(mb, v)))
            for d, cd in S.before[c]:
                md = value.get((U, 1, d))
                if md is not None:
                    if T.ends(md)[1] != tx:
                        return False
                    queue.append(((U, 1, cd), T.compose(v, md)))
        else:
            a, b = S.ends2[c]
            ta, tb = T.ends2(v)
            for slot, w in (((U, 1, a), ta), ((U, 1, b), tb)):
                if slot in value and value[slot] != w:
                    return False
                queue.append((slot, w))
            queue.append(((U, 2, S.vinverse[c]), T.vinverse(v)))
            for s, sc in S.vafter[c]:
                ms = value.get((U, 2, s))
                if ms is not None:
                    if T.ends2(ms)[0] != tb:
                        return False
                    queue.append(((U, 2, sc), T.vcompose(ms, v)))
            for r, cr in S.vbefore[c]:
                mr = value.get((U, 2, r))
                if mr is not None:
                    if T.ends2(mr)[1] != ta:
                        return False
                    queue.append(((U, 2, cr), T.vcompose(v, mr)))
        for phi in self.restrictions[U]:
            V = self.source.site.category.source(phi)
            Rs, Rt = self.source.restrict[phi], self.target.restrict[phi]
            if level == 0:
                queue.append(((V, 0, Rs.obj(c)), Rt.obj(v)))
            elif level == 1:
                queue.append(((V, 1, Rs.one(c)), Rt.one(v)))
            else:
                queue.append(((V, 2, Rs.two(c)), Rt.two(v)))
        return True

    # -- search

    def _candidates(self, slot: Slot) -> Tuple[Hashable, ...]:
        U, level, c = slot
        T = self.target.sections[U]
        if level == 0:
            return T.objects()
        if level == 1:
            x, y = self.tables[U].ends[c]
            return T.hom(self.value[(U, 0, x)], self.value[(U, 0, y)])
        a, b = self.tables[U].ends2[c]
        return T.cells(self.value[(U, 1, a)], self.value[(U, 1, b)])

    def _whiskering_holds(self) -> bool:
        for U in self.source.site.objects:
            S = self.source.sections[U]
            T = self.target.sections[U]
            tab = self.tables[U]
            m = lambda level, c: self.value[(U, level, c)]
            for t in tab.two:
                x, y = tab.ends[tab.ends2[t][0]]
                mt = m(2, t)
                for z in tab.objects:
                    for c in S.hom(y, z):
                        if m(2, S.hcompose(tab.identity2[c], t)) != T.hcompose(T.identity2(m(1, c)), mt):
                            return False
                    for c in S.hom(z, x):
                        if m(2, S.hcompose(t, tab.identity2[c])) != T.hcompose(mt, T.identity2(m(1, c))):
                            return False
        return True

    def _record(self) -> None:
        comps = {}
        for U in self.source.site.objects:
            tab = self.tables[U]
            comps[U] = TwoFunctor.from_tables({x: self.value[(U, 0, x)] for x in tab.objects},
                                              {a: self.value[(U, 1, a)] for a in tab.one},
                                              {t: self.value[(U, 2, t)] for t in tab.two})
        self.found.append(TwoGroupoidMap(self.source, self.target, comps))

    def _extend(self, i: int, limit: Optional[int]) -> bool:
        while i < len(self.order) and self.order[i] in self.value:
            i += 1
        if i == len(self.order):
            if self._whiskering_holds():
                self._record()
            return limit is not None and len(self.found) >= limit
        slot = self.order[i]
        for v in self._candidates(slot):
            self.steps += 1
            if self.budget is not None and self.steps > self.budget:
                raise BudgetExceeded(f"Map search from {self.source.name!r} to {self.target.name!r} ran past "
                                     f"{self.budget} steps", partial=list(self.found),
                                     details={"steps": self.steps, "found": len(self.found)})
            mark = len(self.trail)
            if self._assign(slot, v) and self._extend(i + 1, limit):
                return True
            self._undo(mark)
        return False

    def run(self, limit: Optional[int] = None) -> List[TwoGroupoidMap]:
        """All maps (or the first `limit`), in search order."""
        self.found = []
        self._extend(0, limit)
        logger.debug(f"Map search {self.source.name!r} -> {self.target.name!r}: {len(self.found)} maps "
                     f"in {self.steps} steps")
        return self.found


def two_groupoid_maps(source: TwoGroupoidPresheaf, target: TwoGroupoidPresheaf, allowed: Optional[Allowed] = None,
                      limit: Optional[int] = None, budget: Optional[int] = None) -> List[TwoGroupoidMap]:
    return MapSearch(source, target, allowed, budget).run(limit)


def groupoid_maps(source: GroupoidPresheaf, target: GroupoidPresheaf, limit: Optional[int] = None,
                  budget: Optional[int] = None) -> List[GroupoidMap]:
    """Maps of groupoid presheaves, found as maps of 2-groupoid presheaves with identity 2-cells."""
    found = two_groupoid_maps(groupoid_as_two(source), groupoid_as_two(target), limit=limit, budget=budget)
    maps = []
    for m in found:
        comps = {}
        for U, S in source.sections.items():
            F = m.components[U]
            comps[U] = Functor({x: F.obj(x) for x in S.objects}, {a: F.one(a) for a in ordered(S.arrows)})
        maps.append(GroupoidMap(source, target, comps))
    return maps
