# test_interchange.py
import json

import pytest

from classify import Bounds, Corpus
from errors import InterchangeError
from groth import gerbe_cocycle
from groups import constant_group_presheaf
from interchange import (document_kind, dump_atlas, dump_cocycle, dump_corpus, dump_group_presheaf,
                         dump_groupoid_presheaf, dump_presheaf, dump_site, dump_two_groupoid_presheaf, load_atlas,
                         load_cocycle, load_corpus, load_group_presheaf, load_groupoid_presheaf, load_presheaf, load_site,
                         load_two_groupoid_presheaf, parse, read_text, site_to_dict)
from presheaf import constant_presheaf
from two_gpd import resolution


def _edited(text, edit):
    document = json.loads(text)
    edit(document)
    return json.dumps(document)


def test_site_documents(two_point):
    text = dump_site(two_point)
    assert text.endswith("\n")
    assert document_kind(text) == "site"
    loaded = load_site(text)
    assert site_to_dict(loaded) == site_to_dict(two_point)
    assert loaded.validate() == []
    assert dump_site(loaded) == text


def test_syntax_errors_carry_line_and_column():
    with pytest.raises(InterchangeError) as info:
        parse('{\n  "format": ')
    assert info.value.location.startswith("line 2, column")
    assert info.value.exit_code == 4


@pytest.mark.parametrize("edit, location", [
    (lambda d: d.update(format="other/site"), "format"),
    (lambda d: d.update(version=2), "version"),
    (lambda d: d.pop("objects"), "objects"),
    (lambda d: d["compose"][0].update(gf="nope"), "compose[0].gf"),
    (lambda d: d["morphisms"][0].update(src="nowhere"), "morphisms[0].src"),
])
def test_errors_name_the_field(terminal, edit, location):
    with pytest.raises(InterchangeError) as info:
        load_site(_edited(dump_site(terminal), edit))
    assert info.value.location == location


def test_kind_must_match(terminal):
    with pytest.raises(InterchangeError) as info:
        parse(dump_site(terminal), "atlas")
    assert info.value.location == "format"


def test_documents_over_another_site(terminal, two_point, z2):
    text = dump_group_presheaf(constant_group_presheaf(terminal, z2))
    assert load_group_presheaf(text, terminal).key == constant_group_presheaf(terminal, z2).key
    with pytest.raises(InterchangeError) as info:
        load_group_presheaf(text, two_point)
    assert info.value.location == "site"


def test_groupoid_presheaf_documents(two_object_z2):
    loaded = load_groupoid_presheaf(dump_groupoid_presheaf(two_object_z2))
    assert loaded.validate() == []
    assert loaded.name == "Z2x2"
    assert len(loaded.sections["*"].arrows) == len(two_object_z2.sections["*"].arrows)


def test_atlas_documents(terminal, z2, constant_atlas):
    atlas = constant_atlas(terminal, "*", z2)
    loaded = load_atlas(dump_atlas(atlas))
    assert loaded.keys() == atlas.keys()
    assert loaded.validate() == []


def test_atlas_sheaves_need_a_base(terminal, z2, constant_atlas):
    text = _edited(dump_atlas(constant_atlas(terminal, "*", z2)), lambda d: d["sheaves"][0].pop("base"))
    with pytest.raises(InterchangeError) as info:
        load_atlas(text)
    assert info.value.location == "sheaves[0].base"


def test_corpus_documents(terminal, z2, constant_atlas):
    corpus = Corpus(terminal, Bounds(2, 2), constant_atlas(terminal, "*", z2), budget=500, seed=7)
    loaded = load_corpus(dump_corpus(corpus))
    assert loaded.bounds == Bounds(2, 2)
    assert (loaded.budget, loaded.jobs, loaded.seed, loaded.sample) == (500, 1, 7, 8)
    assert loaded.atlas.keys() == corpus.atlas.keys()


def test_corpus_bounds_are_checked(terminal, z2, constant_atlas):
    text = _edited(dump_corpus(Corpus(terminal, Bounds(1, 1), constant_atlas(terminal, "*", z2))),
                   lambda d: d.update(bounds="1"))
    with pytest.raises(InterchangeError) as info:
        load_corpus(text)
    assert info.value.location == "bounds"


def test_missing_file(tmp_path):
    path = str(tmp_path / "absent.json")
    with pytest.raises(InterchangeError) as info:
        read_text(path)
    assert info.value.location == path


def test_presheaf_documents(two_point):
    X = constant_presheaf(two_point, ["0", "1"], name="two")
    loaded = load_presheaf(dump_presheaf(X))
    assert loaded.validate() == []
    assert loaded.size() == X.size()


def test_two_groupoid_presheaf_documents(bz2):
    loaded = load_two_groupoid_presheaf(dump_two_groupoid_presheaf(resolution(bz2)))
    assert loaded.validate() == []
    assert len(loaded.sections["*"].one_cells) == 2
    assert len(loaded.sections["*"].two_cells) == 4


def test_cocycle_documents(bz2):
    c = gerbe_cocycle(bz2)
    loaded = load_cocycle(dump_cocycle(c))
    assert loaded.name == c.name
    assert loaded.validate() == []
    assert loaded.is_cocycle()
