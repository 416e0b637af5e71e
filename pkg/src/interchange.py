# interchange.py
import json
import logging
from typing import Any, Callable, Dict, Hashable, Iterator, List, Optional, Tuple

import numpy as np

from classify import Bounds, Corpus, EnumerationFrontier, Pi0Report
from errors import InterchangeError, PreconditionError
from gpd import Functor, Groupoid, GroupoidPresheaf, standard_groupoid
from groth import Cocycle
from groups import FiniteGroup, GroupPresheaf, scalar
from presheaf import SetPresheaf
from report import ordered, plain, sort_key
from sites import FiniteCategory, FiniteSite, slice_site
from two_gpd import (
    GroupSheafAtlas, Homotopy, Iso, TableTwoGroupoid, TwoFunctor, TwoGroupoidMap, TwoGroupoidPresheaf, tabulate,
)

logger = logging.getLogger(__name__)

FORMAT = "gerbekit"
VERSION = 1
KINDS = ("site", "presheaf", "group-presheaf", "groupoid-presheaf", "two-groupoid-presheaf", "atlas", "cocycle",
         "corpus", "report")


# ----------------------------------------------------------------------------------
# documents

def dumps(kind: str, body: Dict[str, Any]) -> str:
    """Canonical text: sorted keys, two-space indent, trailing newline."""
    if kind not in KINDS:
        raise ValueError(f"Unknown document kind {kind!r}")
    document = dict(body, format=f"{FORMAT}/{kind}", version=VERSION)
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def cell(value: Any) -> Hashable:
    """JSON value to id: lists become tuples, recursively."""
    if isinstance(value, list):
        return tuple(cell(v) for v in value)
    return value


class Cursor:
    """A position in a parsed document that knows its field path for error reports."""

    def __init__(self, value: Any, path: str = ""):
        self.value = value
        self.path = path

    def _child_path(self, key) -> str:
        if isinstance(key, int):
            return f"{self.path}[{key}]"
        return f"{self.path}.{key}" if self.path else str(key)

    def error(self, message: str) -> InterchangeError:
        return InterchangeError(message, location=self.path or "document")

    def __getitem__(self, key) -> "Cursor":
        if isinstance(key, int):
            if not isinstance(self.value, list):
                raise self.error("expected a list")
            if key >= len(self.value):
                raise InterchangeError("index out of range", location=self._child_path(key))
            return Cursor(self.value[key], self._child_path(key))
        if not isinstance(self.value, dict):
            raise self.error("expected an object")
        if key not in self.value:
            raise InterchangeError("missing field", location=self._child_path(key))
        return Cursor(self.value[key], self._child_path(key))

    def get(self, key: str, default: Any = None) -> Optional["Cursor"]:
        if not isinstance(self.value, dict):
            raise self.error("expected an object")
        if key not in self.value:
            return None if default is None else Cursor(default, self._child_path(key))
        return Cursor(self.value[key], self._child_path(key))

    def has(self, key: str) -> bool:
        return isinstance(self.value, dict) and key in self.value

    def __iter__(self) -> Iterator["Cursor"]:
        if not isinstance(self.value, list):
            raise self.error("expected a list")
        return (Cursor(v, self._child_path(i)) for i, v in enumerate(self.value))

    def __len__(self) -> int:
        if not isinstance(self.value, list):
            raise self.error("expected a list")
        return len(self.value)

    def id(self) -> Hashable:
        if isinstance(self.value, (dict, float)) or self.value is None:
            raise self.error("expected an id (string, integer or list)")
        return cell(self.value)

    def int(self) -> int:
        if not isinstance(self.value, int) or isinstance(self.value, bool):
            raise self.error("expected an integer")
        return self.value

    def str(self) -> str:
        if not isinstance(self.value, str):
            raise self.error("expected a string")
        return self.value

    def pairs(self) -> List[Tuple[Hashable, Hashable]]:
        """A list of [x, y] pairs."""
        found = []
        for item in self:
            if len(item) != 2:
                raise item.error("expected a pair")
            found.append((item[0].id(), item[1].id()))
        return found

    def known(self, value: Hashable, universe, what: str) -> Hashable:
        if value not in universe:
            raise self.error(f"unknown {what} {value!r}")
        return value


def parse(text: str, kind: Optional[str] = None) -> Cursor:
    """Parse a document; syntax errors carry line/column, header errors the field."""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise InterchangeError(e.msg, location=f"line {e.lineno}, column {e.colno}")
    root = Cursor(document)
    if not isinstance(document, dict):
        raise root.error("a document must be a JSON object")
    fmt = root["format"].str()
    if not fmt.startswith(f"{FORMAT}/") or fmt.split("/", 1)[1] not in KINDS:
        raise root["format"].error(f"unknown format {fmt!r}")
    if kind is not None and fmt != f"{FORMAT}/{kind}":
        raise root["format"].error(f"expected a {kind} document, found {fmt!r}")
    if root["version"].int() != VERSION:
        raise root["version"].error(f"unsupported version {document['version']!r}")
    return root


def document_kind(text: str) -> str:
    return parse(text)["format"].str().split("/", 1)[1]


def read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise InterchangeError(f"cannot read file: {e.strerror}", location=path)


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def _by_id(items, key=lambda kv: kv[0]):
    return sorted(items, key=lambda kv: sort_key(key(kv)))


# ----------------------------------------------------------------------------------
# sites

def site_to_dict(site: FiniteSite) -> Dict[str, Any]:
    cat = site.category
    return {
        "name": site.name,
        "objects": plain(list(cat.objects)),
        "morphisms": [{"id": plain(m), "src": plain(s), "tgt": plain(t)} for m, (s, t) in _by_id(cat.morphisms.items())],
        "identities": [{"object": plain(x), "morphism": plain(cat.identities[x])} for x in cat.objects],
        "compose": [{"g": plain(g), "f": plain(f), "gf": plain(gf)} for (g, f), gf in _by_id(cat.composition.items())],
        "covering": [{"object": plain(U), "sieves": [plain(list(ordered(s)))
                                                     for s in sorted(site.covering.get(U, ()),
                                                                     key=lambda s: sort_key(ordered(s)))]}
                     for U in cat.objects],
    }


def site_from_cursor(c: Cursor) -> FiniteSite:
    objects = [o.id() for o in c["objects"]]
    if len(set(objects)) != len(objects):
        raise c["objects"].error("duplicate object id")
    morphisms: Dict = {}
    for m in c["morphisms"]:
        mid = m["id"].id()
        if mid in morphisms:
            raise m["id"].error(f"duplicate morphism id {mid!r}")
        morphisms[mid] = (m["src"].known(m["src"].id(), objects, "object"),
                          m["tgt"].known(m["tgt"].id(), objects, "object"))
    identities = {}
    for entry in c["identities"]:
        x = entry["object"].known(entry["object"].id(), objects, "object")
        identities[x] = entry["morphism"].known(entry["morphism"].id(), morphisms, "morphism")
    composition = {}
    for entry in c["compose"]:
        g = entry["g"].known(entry["g"].id(), morphisms, "morphism")
        f = entry["f"].known(entry["f"].id(), morphisms, "morphism")
        composition[(g, f)] = entry["gf"].known(entry["gf"].id(), morphisms, "morphism")
    covering = {}
    for entry in c["covering"]:
        U = entry["object"].known(entry["object"].id(), objects, "object")
        sieves = set()
        for s in entry["sieves"]:
            sieves.add(frozenset(m.known(m.id(), morphisms, "morphism") for m in s))
        covering[U] = frozenset(sieves)
    name = c["name"].str() if c.has("name") else ""
    return FiniteSite(FiniteCategory(tuple(objects), morphisms, identities, composition), covering, name)


def dump_site(site: FiniteSite) -> str:
    return dumps("site", site_to_dict(site))


def load_site(text: str) -> FiniteSite:
    return site_from_cursor(parse(text, "site"))


def _site_of(c: Cursor, site: Optional[FiniteSite]) -> FiniteSite:
    embedded = site_from_cursor(c["site"])
    if site is None:
        return embedded
    if site_to_dict(embedded) != site_to_dict(site):
        raise c["site"].error("document is over a different site")
    return site


# ----------------------------------------------------------------------------------
# presheaves of sets and groups

def presheaf_to_dict(X: SetPresheaf) -> Dict[str, Any]:
    return {
        "name": X.name,
        "sections": [{"object": plain(U), "elements": plain(list(ordered(xs)))} for U, xs in _by_id(X.sections.items())],
        "restrict": [{"morphism": plain(phi), "map": plain(_by_id(m.items()))} for phi, m in _by_id(X.restrict.items())],
    }


def presheaf_from_cursor(c: Cursor, site: FiniteSite) -> SetPresheaf:
    cat = site.category
    sections = {}
    for entry in c["sections"]:
        U = entry["object"].known(entry["object"].id(), cat.objects, "object")
        sections[U] = tuple(x.id() for x in entry["elements"])
    restrict = {}
    for entry in c["restrict"]:
        phi = entry["morphism"].known(entry["morphism"].id(), cat.morphisms, "morphism")
        restrict[phi] = dict(entry["map"].pairs())
    return SetPresheaf(site, sections, restrict, name=c["name"].str() if c.has("name") else "")


def dump_presheaf(X: SetPresheaf) -> str:
    return dumps("presheaf", dict(presheaf_to_dict(X), site=site_to_dict(X.site)))


def load_presheaf(text: str, site: Optional[FiniteSite] = None) -> SetPresheaf:
    c = parse(text, "presheaf")
    return presheaf_from_cursor(c, _site_of(c, site))


def group_to_dict(G: FiniteGroup) -> Dict[str, Any]:
    return {"labels": plain(list(G.labels)), "table": np.asarray(G.table).tolist()}


def group_from_cursor(c: Cursor) -> FiniteGroup:
    labels = tuple(x.id() for x in c["labels"])
    rows = [[v.int() for v in row] for row in c["table"]]
    if len(rows) != len(labels) or any(len(r) != len(labels) for r in rows):
        raise c["table"].error(f"table must be {len(labels)}x{len(labels)}")
    return FiniteGroup(labels, np.asarray(rows, dtype=scalar).reshape(len(labels), len(labels)),
                       name=c["name"].str() if c.has("name") else "")


def group_presheaf_to_dict(P: GroupPresheaf, base: Optional[Hashable] = None) -> Dict[str, Any]:
    body = {
        "name": P.name,
        "groups": [dict(group_to_dict(G), object=plain(U)) for U, G in _by_id(P.groups.items())],
        "restrict": [{"morphism": plain(phi), "images": [int(v) for v in arr]} for phi, arr in _by_id(P.restrict.items())],
    }
    if base is not None:
        body["base"] = plain(base)
    return body


def group_presheaf_from_cursor(c: Cursor, site: FiniteSite) -> Tuple[Optional[Hashable], GroupPresheaf]:
    """A group presheaf on the site, or on the slice C/base when `base` is present."""
    base = None
    if c.has("base"):
        base = c["base"].known(c["base"].id(), site.objects, "object")
        site = slice_site(site, base)
    cat = site.category
    groups = {}
    for entry in c["groups"]:
        U = entry["object"].known(entry["object"].id(), cat.objects, "object")
        groups[U] = group_from_cursor(entry)
    restrict = {}
    for entry in c["restrict"]:
        phi = entry["morphism"].known(entry["morphism"].id(), cat.morphisms, "morphism")
        restrict[phi] = np.asarray([v.int() for v in entry["images"]], dtype=scalar)
    return base, GroupPresheaf(site, groups, restrict, name=c["name"].str() if c.has("name") else "")


def dump_group_presheaf(P: GroupPresheaf, site: Optional[FiniteSite] = None, base: Optional[Hashable] = None) -> str:
    """`site` and `base` are required for a presheaf on a slice C/base."""
    return dumps("group-presheaf", dict(group_presheaf_to_dict(P, base), site=site_to_dict(site or P.site)))


def load_group_presheaf(text: str, site: Optional[FiniteSite] = None) -> GroupPresheaf:
    c = parse(text, "group-presheaf")
    return group_presheaf_from_cursor(c, _site_of(c, site))[1]


# ----------------------------------------------------------------------------------
# groupoid presheaves

def _groupoid_to_dict(G: Groupoid) -> Dict[str, Any]:
    return {
        "objects": plain(list(G.objects)),
        "arrows": [{"id": plain(a), "src": plain(s), "tgt": plain(t)} for a, (s, t) in _by_id(G.arrows.items())],
        "identities": [{"object": plain(x), "arrow": plain(G.identities[x])} for x in G.objects],
        "compose": [{"g": plain(g), "f": plain(f), "gf": plain(gf)} for (g, f), gf in _by_id(G.composition.items())],
        "inverse": [{"arrow": plain(a), "inverse": plain(b)} for a, b in _by_id(G.inverses.items())],
    }


def _groupoid_from_cursor(c: Cursor) -> Groupoid:
    if c.has("components"):
        components = []
        for comp in c["components"]:
            components.append(([x.id() for x in comp["objects"]], group_from_cursor(comp["group"])))
        return standard_groupoid(components)
    objects = tuple(x.id() for x in c["objects"])
    arrows = {}
    for a in c["arrows"]:
        arrows[a["id"].id()] = (a["src"].known(a["src"].id(), objects, "object"),
                                a["tgt"].known(a["tgt"].id(), objects, "object"))
    identities = {}
    for entry in c["identities"]:
        identities[entry["object"].known(entry["object"].id(), objects, "object")] = \
            entry["arrow"].known(entry["arrow"].id(), arrows, "arrow")
    composition = {}
    for entry in c["compose"]:
        composition[(entry["g"].known(entry["g"].id(), arrows, "arrow"),
                     entry["f"].known(entry["f"].id(), arrows, "arrow"))] = \
            entry["gf"].known(entry["gf"].id(), arrows, "arrow")
    inverses = {}
    for entry in c["inverse"]:
        inverses[entry["arrow"].known(entry["arrow"].id(), arrows, "arrow")] = \
            entry["inverse"].known(entry["inverse"].id(), arrows, "arrow")
    return Groupoid(objects, arrows, identities, composition, inverses)


def groupoid_presheaf_to_dict(G: GroupoidPresheaf) -> Dict[str, Any]:
    return {
        "name": G.name,
        "sections": [dict(_groupoid_to_dict(S), object=plain(U)) for U, S in _by_id(G.sections.items())],
        "restrict": [{"morphism": plain(phi), "objects": plain(_by_id(F.objects.items())),
                      "arrows": plain(_by_id(F.arrows.items()))} for phi, F in _by_id(G.restrict.items())],
    }


def groupoid_presheaf_from_cursor(c: Cursor, site: FiniteSite) -> GroupoidPresheaf:
    cat = site.category
    sections = {}
    for entry in c["sections"]:
        U = entry["object"].known(entry["object"].id(), cat.objects, "object")
        sections[U] = _groupoid_from_cursor(entry)
    restrict = {}
    for entry in c["restrict"]:
        phi = entry["morphism"].known(entry["morphism"].id(), cat.morphisms, "morphism")
        restrict[phi] = Functor(dict(entry["objects"].pairs()), dict(entry["arrows"].pairs()))
    for phi in cat.morphisms:
        if phi not in restrict and phi == cat.identity(cat.source(phi)) and cat.source(phi) in sections:
            S = sections[cat.source(phi)]
            restrict[phi] = Functor({x: x for x in S.objects}, {a: a for a in S.arrows})
    return GroupoidPresheaf(site, sections, restrict, name=c["name"].str() if c.has("name") else "")


def dump_groupoid_presheaf(G: GroupoidPresheaf) -> str:
    return dumps("groupoid-presheaf", dict(groupoid_presheaf_to_dict(G), site=site_to_dict(G.site)))


def load_groupoid_presheaf(text: str, site: Optional[FiniteSite] = None) -> GroupoidPresheaf:
    c = parse(text, "groupoid-presheaf")
    return groupoid_presheaf_from_cursor(c, _site_of(c, site))


# ----------------------------------------------------------------------------------
# 2-groupoid presheaves

def _two_groupoid_to_dict(H) -> Dict[str, Any]:
    T = tabulate(H)

    def table(d, a, b, c):
        return [{a: plain(x), b: plain(y), c: plain(z)} for (x, y), z in _by_id(d.items())]

    return {
        "objects": plain(list(T.objs)),
        "one": [{"id": plain(a), "src": plain(s), "tgt": plain(t)} for a, (s, t) in _by_id(T.one.items())],
        "identities": [{"object": plain(x), "cell": plain(T.identities[x])} for x in T.objs],
        "compose": table(T.composition, "g", "f", "gf"),
        "inverse": [{"cell": plain(a), "inverse": plain(b)} for a, b in _by_id(T.inverses.items())],
        "two": [{"id": plain(t), "src": plain(a), "tgt": plain(b)} for t, (a, b) in _by_id(T.two.items())],
        "identities2": [{"cell": plain(a), "identity": plain(t)} for a, t in _by_id(T.identities2.items())],
        "vcompose": table(T.vcomposition, "s", "t", "st"),
        "vinverse": [{"cell": plain(t), "inverse": plain(s)} for t, s in _by_id(T.vinverses.items())],
        "hcompose": table(T.hcomposition, "s", "t", "st"),
    }


def _two_groupoid_from_cursor(c: Cursor) -> TableTwoGroupoid:
    objects = tuple(x.id() for x in c["objects"])
    one = {a["id"].id(): (a["src"].known(a["src"].id(), objects, "object"),
                          a["tgt"].known(a["tgt"].id(), objects, "object")) for a in c["one"]}
    two = {t["id"].id(): (t["src"].known(t["src"].id(), one, "1-cell"),
                          t["tgt"].known(t["tgt"].id(), one, "1-cell")) for t in c["two"]}

    def table(name, a, b, r, universe, what):
        return {(e[a].known(e[a].id(), universe, what), e[b].known(e[b].id(), universe, what)):
                e[r].known(e[r].id(), universe, what) for e in c[name]}

    def mapping(name, a, b, universe, what, domain=None):
        domain = universe if domain is None else domain
        return {e[a].known(e[a].id(), domain, what): e[b].known(e[b].id(), universe, what) for e in c[name]}

    return TableTwoGroupoid(
        objects, one,
        {e["object"].known(e["object"].id(), objects, "object"): e["cell"].known(e["cell"].id(), one, "1-cell")
         for e in c["identities"]},
        table("compose", "g", "f", "gf", one, "1-cell"),
        mapping("inverse", "cell", "inverse", one, "1-cell"),
        two,
        mapping("identities2", "cell", "identity", two, "2-cell", domain=one),
        table("vcompose", "s", "t", "st", two, "2-cell"),
        mapping("vinverse", "cell", "inverse", two, "2-cell"),
        table("hcompose", "s", "t", "st", two, "2-cell"),
    )


def two_groupoid_presheaf_to_dict(H: TwoGroupoidPresheaf) -> Dict[str, Any]:
    restrict = []
    for phi, F in _by_id(H.restrict.items()):
        S = H.sections[H.site.category.target(phi)]
        restrict.append({
            "morphism": plain(phi),
            "objects": plain(_by_id((x, F.obj(x)) for x in S.objects())),
            "one": plain(_by_id((a, F.one(a)) for a in S.one_cells)),
            "two": plain(_by_id((t, F.two(t)) for t in S.two_cells)),
        })
    return {
        "name": H.name,
        "sections": [dict(_two_groupoid_to_dict(S), object=plain(U)) for U, S in _by_id(H.sections.items())],
        "restrict": restrict,
    }


def two_groupoid_presheaf_from_cursor(c: Cursor, site: FiniteSite) -> TwoGroupoidPresheaf:
    cat = site.category
    sections = {}
    for entry in c["sections"]:
        U = entry["object"].known(entry["object"].id(), cat.objects, "object")
        sections[U] = _two_groupoid_from_cursor(entry)
    restrict = {}
    for entry in c["restrict"]:
        phi = entry["morphism"].known(entry["morphism"].id(), cat.morphisms, "morphism")
        restrict[phi] = TwoFunctor.from_tables(dict(entry["objects"].pairs()), dict(entry["one"].pairs()),
                                               dict(entry["two"].pairs()))
    for phi in cat.morphisms:
        if phi not in restrict and phi == cat.identity(cat.source(phi)):
            restrict[phi] = TwoFunctor.identity()
    return TwoGroupoidPresheaf(site, sections, restrict, name=c["name"].str() if c.has("name") else "")


def dump_two_groupoid_presheaf(H: TwoGroupoidPresheaf) -> str:
    return dumps("two-groupoid-presheaf", dict(two_groupoid_presheaf_to_dict(H), site=site_to_dict(H.site)))


def load_two_groupoid_presheaf(text: str, site: Optional[FiniteSite] = None) -> TwoGroupoidPresheaf:
    c = parse(text, "two-groupoid-presheaf")
    return two_groupoid_presheaf_from_cursor(c, _site_of(c, site))


# ----------------------------------------------------------------------------------
# atlases and cocycles

def _iso_to_dict(f: Iso, name: Callable[[str], Any]) -> Dict[str, Any]:
    return {"source": name(f.source), "target": name(f.target),
            "components": [{"object": plain(psi), "permutation": list(p)} for psi, p in f.components]}


def _iso_from_cursor(c: Cursor, key: Callable[[Cursor], str]) -> Iso:
    comps = [(e["object"].id(), tuple(v.int() for v in e["permutation"])) for e in c["components"]]
    return Iso(key(c["source"]), key(c["target"]), tuple(sorted(comps, key=lambda kv: sort_key(kv[0]))))


def atlas_to_dict(atlas: GroupSheafAtlas) -> Dict[str, Any]:
    seeds = [P.key for _, P in atlas.entries]

    def name(key):
        return seeds.index(key) if key in seeds else key

    declared = []
    for (src, tgt), isos in sorted(atlas.declared.items()):
        declared.append({"source": name(src), "target": name(tgt),
                         "isomorphisms": [_iso_to_dict(f, name)["components"] for f in sorted(isos, key=sort_key)]})
    return {
        "name": atlas.name,
        "sheaves": [group_presheaf_to_dict(P, base=U) for U, P in atlas.entries],
        "declared": declared,
    }


def atlas_from_cursor(c: Cursor, site: FiniteSite) -> GroupSheafAtlas:
    entries = []
    for entry in c["sheaves"]:
        if not entry.has("base"):
            raise InterchangeError("missing field", location=f"{entry.path}.base")
        entries.append(group_presheaf_from_cursor(entry, site))
    keys = [P.key for _, P in entries]

    def key(ref: Cursor) -> str:
        if isinstance(ref.value, int) and not isinstance(ref.value, bool):
            if not 0 <= ref.value < len(keys):
                raise ref.error(f"no sheaf with index {ref.value}")
            return keys[ref.value]
        return ref.str()

    declared = {}
    if c.has("declared"):
        for entry in c["declared"]:
            src, tgt = key(entry["source"]), key(entry["target"])
            isos = []
            for comps in entry["isomorphisms"]:
                isos.append(_iso_from_cursor(Cursor({"source": src, "target": tgt, "components": comps.value},
                                                    comps.path), lambda ref: ref.value))
            declared[(src, tgt)] = isos
    return GroupSheafAtlas(site, entries, name=c["name"].str() if c.has("name") else "", declared=declared)


def dump_atlas(atlas: GroupSheafAtlas) -> str:
    return dumps("atlas", dict(atlas_to_dict(atlas), site=site_to_dict(atlas.site)))


def load_atlas(text: str, site: Optional[FiniteSite] = None) -> GroupSheafAtlas:
    c = parse(text, "atlas")
    return atlas_from_cursor(c, _site_of(c, site))


def cocycle_to_dict(c: Cocycle) -> Dict[str, Any]:
    A, K = c.source, c.coefficients
    coefficients = []
    for U in ordered(A.site.objects):
        S, F = A.sections[U], K.components[U]
        coefficients.append({
            "object": plain(U),
            "objects": [[plain(x), F.obj(x)] for x in S.objects()],
            "one": [[plain(a), _iso_to_dict(F.one(a), str)] for a in S.one_cells],
            "two": [[plain(t), {"source": _iso_to_dict(F.two(t).source, str),
                                "target": _iso_to_dict(F.two(t).target, str),
                                "conjugator": F.two(t).conjugator}] for t in S.two_cells],
        })
    return {
        "name": c.name,
        "base": two_groupoid_presheaf_to_dict(A),
        "atlas": atlas_to_dict(c.atlas),
        "coefficients": coefficients,
    }


def cocycle_from_cursor(c: Cursor, site: FiniteSite) -> Cocycle:
    A = two_groupoid_presheaf_from_cursor(c["base"], site)
    atlas = atlas_from_cursor(c["atlas"], site)

    def key(ref: Cursor) -> str:
        return ref.known(ref.str(), atlas, "atlas sheaf")

    comps = {}
    for entry in c["coefficients"]:
        U = entry["object"].known(entry["object"].id(), site.objects, "object")
        objects = {e[0].id(): key(e[1]) for e in entry["objects"]}
        one = {e[0].id(): _iso_from_cursor(e[1], key) for e in entry["one"]}
        two = {}
        for e in entry["two"]:
            h = e[1]
            two[e[0].id()] = Homotopy(_iso_from_cursor(h["source"], key), _iso_from_cursor(h["target"], key),
                                      h["conjugator"].int())
        comps[U] = TwoFunctor.from_tables(objects, one, two)
    for U in site.objects:
        if U not in comps:
            raise c["coefficients"].error(f"no coefficients at {U!r}")
    name = c["name"].str() if c.has("name") else ""
    return Cocycle(atlas, TwoGroupoidMap(A, atlas.presheaf, comps), name=name)


def dump_cocycle(c: Cocycle) -> str:
    return dumps("cocycle", dict(cocycle_to_dict(c), site=site_to_dict(c.atlas.site)))


def load_cocycle(text: str, site: Optional[FiniteSite] = None) -> Cocycle:
    c = parse(text, "cocycle")
    return cocycle_from_cursor(c, _site_of(c, site))


# ----------------------------------------------------------------------------------
# corpora and reports

def dump_corpus(corpus: Corpus) -> str:
    return dumps("corpus", {
        "site": site_to_dict(corpus.site),
        "bounds": str(corpus.bounds),
        "atlas": atlas_to_dict(corpus.atlas),
        "budget": corpus.budget,
        "jobs": corpus.jobs,
        "seed": corpus.seed,
        "sample": corpus.sample,
    })


def load_corpus(text: str) -> Corpus:
    c = parse(text, "corpus")
    site = site_from_cursor(c["site"])
    try:
        bounds = Bounds.parse(c["bounds"].str())
    except ValueError as e:
        raise c["bounds"].error(str(e))

    def optional_int(name: str) -> Optional[int]:
        return None if not c.has(name) or c[name].value is None else c[name].int()

    return Corpus(site, bounds, atlas_from_cursor(c["atlas"], site), budget=optional_int("budget"),
                  jobs=optional_int("jobs") or 1, seed=optional_int("seed"), sample=optional_int("sample") or 8)


def dump_report(report: Pi0Report) -> str:
    return dumps("report", report.as_dict())


def dump_result(body: Dict[str, Any]) -> str:
    """Any other machine-readable verdict, as a report document."""
    return dumps("report", plain(body))


def frontier_to_dict(frontier: EnumerationFrontier) -> Dict[str, Any]:
    return {
        "choice": frontier.choice,
        "steps": frontier.steps,
        "shapes": frontier.shapes,
        "complete": frontier.complete,
        "found": [{"choice": list(choice), "picks": list(picks)} for choice, picks in frontier.found],
    }


def frontier_from_cursor(c: Cursor) -> EnumerationFrontier:
    found = []
    for entry in c["found"]:
        found.append((tuple(x.int() for x in entry["choice"]), tuple(x.int() for x in entry["picks"])))
    complete = c.get("complete")
    return EnumerationFrontier(c["choice"].int(), c["steps"].int(), c["shapes"].int(), found,
                               complete=complete is not None and complete.value is True)


def load_frontier(text: str, bounds: Optional[Bounds] = None) -> EnumerationFrontier:
    """The enumeration frontier of a partial report written when a budget ran out."""
    c = parse(text, "report")
    if not c.has("frontier"):
        raise c.error("not a partial report: no frontier")
    if bounds is not None and c["bounds"].str() != str(bounds):
        raise PreconditionError("Partial report was written with other bounds",
                                {"report": c["bounds"].value, "bounds": str(bounds)})
    return frontier_from_cursor(c["frontier"])
