# test_classify.py
from dataclasses import replace

import pytest

from classify import (Bounds, Corpus, EnumerationFrontier, _Budget, classify, cocycle_classes, enumerate_cocycles,
                      enumerate_gerbes, enumerate_presheaves, find_cocycle_homotopy, find_cocycle_morphism,
                      gerbe_classes, group_catalog, is_atlas_gerbe, locally_equivalent, section_shapes,
                      verify_classification, verify_enlargement)
from errors import BudgetExceeded, PreconditionError
from gpd import components_map, constant_groupoid_presheaf, is_cech, is_lwe, standard_groupoid
from groth import check_composite_iso, check_grothendieck_gerbe, gerbe_cocycle
from groups import constant_group_presheaf, cyclic_group, sheafify_group, symmetric_group, trivial_group
from interchange import dump_report
from sites import sierpinski_site, slice_site, terminal_site, two_point_site
from two_gpd import (GroupSheafAtlas, check_components_equivalence, check_eta_equivalence,
                     constant_two_groupoid_presheaf, groupoid_as_two, normal_subgroup_two_groupoid, resolution,
                     two_group)


@pytest.fixture
def z2_atlas(terminal, z2, constant_atlas):
    return constant_atlas(terminal, "*", z2)


@pytest.fixture
def corpus(terminal, z2_atlas):
    return Corpus(terminal, Bounds(2, 2), z2_atlas)


def test_bounds_parse():
    assert Bounds.parse("2,3") == Bounds(2, 3)
    assert str(Bounds(2, 3)) == "2,3"
    with pytest.raises(ValueError):
        Bounds.parse("two")
    with pytest.raises(ValueError):
        Bounds.parse("1,-1")


def test_catalog_and_shapes(corpus):
    catalog = group_catalog(corpus)
    assert [G.order for G in catalog] == [1, 2]
    assert len(section_shapes(catalog, 2)) == 8


def test_atlas_gerbes(corpus, bz2, two_object_z2, terminal, z3):
    gerbes = enumerate_gerbes(corpus)
    assert len(gerbes) == 2
    assert is_atlas_gerbe(bz2, corpus.atlas)
    assert is_atlas_gerbe(two_object_z2, corpus.atlas)
    bz3 = constant_groupoid_presheaf(terminal, standard_groupoid([(["*"], z3)]))
    assert not is_atlas_gerbe(bz3, corpus.atlas)


def test_classification_on_the_terminal_site(corpus):
    result = classify(corpus)
    report = result.report
    assert len(result.gerbes.classes) == 1
    assert len(result.cocycles.classes) == 1
    assert report.verdict
    assert report.phi == {0: 0}
    assert report.psi == {0: 0}
    body = report.as_dict()
    assert body["verdict"]["holds"] is True
    assert body["bounds"] == "2,2"


def test_empty_bounds(terminal, z2_atlas):
    report = verify_classification(Corpus(terminal, Bounds(0, 0), z2_atlas))
    assert report.verdict
    assert report.gerbe_classes == []
    assert report.cocycle_classes == []


def test_invalid_atlas_is_rejected(corpus, terminal, z2, constant_sheaf, constant_atlas):
    P = constant_sheaf(terminal, "*", z2)
    broken = constant_atlas(terminal, "*", z2, declared={(P.key, P.key): []})
    assert [v.axiom for v in broken.validate()] == ["fullness"]
    with pytest.raises(PreconditionError):
        classify(corpus, broken)


def test_budget(terminal, z2_atlas):
    with pytest.raises(BudgetExceeded) as info:
        classify(Corpus(terminal, Bounds(2, 2), z2_atlas, budget=1))
    assert info.value.exit_code == 2
    assert isinstance(info.value.partial, EnumerationFrontier)
    assert info.value.partial.choice == 1
    assert not info.value.partial.complete


def test_enlargement_preconditions(corpus, terminal, z3, constant_sheaf, constant_atlas):
    with pytest.raises(PreconditionError):
        verify_enlargement(corpus, constant_atlas(terminal, "*", z3))
    larger = corpus.atlas.saturated([("*", constant_sheaf(terminal, "*", z3))])
    with pytest.raises(PreconditionError):
        verify_enlargement(corpus, larger)


def test_enlargement_by_itself(corpus):
    found = verify_enlargement(corpus, corpus.atlas)
    assert found.inclusion
    assert set(found.as_dict()) >= {"inclusion_lwe", "cocycle_comparison", "gerbe_comparison", "holds"}


def test_locally_equivalent(bz2, two_object_z2, terminal, z3):
    found = locally_equivalent(bz2, two_object_z2)
    assert found.local
    assert found.direct
    bz3 = constant_groupoid_presheaf(terminal, standard_groupoid([(["*"], z3)]))
    assert not locally_equivalent(bz2, bz3).local


@pytest.mark.parametrize("make_site, bounds", [(terminal_site, Bounds(2, 2)), (sierpinski_site, Bounds(1, 2))])
def test_cech_test_agrees_with_components(make_site, bounds, z2_atlas):
    site = make_site()
    corpus = Corpus(site, bounds, z2_atlas)
    shapes = section_shapes(group_catalog(corpus), bounds.objects)
    presheaves = enumerate_presheaves(site, shapes, _Budget(None, "test"))
    assert presheaves
    for G in presheaves:
        assert is_cech(G).holds == is_lwe(components_map(G)).holds, G.name


def test_every_enumerated_gerbe(corpus):
    for G in enumerate_gerbes(corpus):
        assert check_composite_iso(G), G.name
        assert check_grothendieck_gerbe(gerbe_cocycle(G)), G.name


def test_reports_are_byte_identical_across_runs(corpus):
    runs = [dump_report(classify(corpus).report) for _ in range(3)]
    assert runs[0] == runs[1] == runs[2]
    assert runs[0].endswith("\n")


def test_class_counts_ignore_object_names(corpus, z2, constant_atlas):
    renamed = terminal_site("pt")
    other = Corpus(renamed, Bounds(2, 2), constant_atlas(renamed, "pt", z2))
    first, second = classify(corpus), classify(other)
    assert len(second.gerbes.classes) == len(first.gerbes.classes)
    assert len(second.cocycles.classes) == len(first.cocycles.classes)
    assert second.report.verdict


def _sheafified_atlas(site, top, G):
    """The constant G on C/top, sheafified unless the site is a point, and its restrictions."""
    P = constant_group_presheaf(slice_site(site, top), G)
    if len(site.objects) > 1:
        P = sheafify_group(P).result
    return GroupSheafAtlas(site, [(top, P)], name=G.name)


def _corpus(name):
    if name == "terminal-z3":
        site = terminal_site()
        return Corpus(site, Bounds(1, 3), _sheafified_atlas(site, "*", cyclic_group(3)))
    if name == "terminal-s3":
        site = terminal_site()
        return Corpus(site, Bounds(1, 6), _sheafified_atlas(site, "*", symmetric_group(3)))
    if name == "two-point-z2":
        site = two_point_site()
        return Corpus(site, Bounds(1, 2), _sheafified_atlas(site, "ab", cyclic_group(2)))
    site = sierpinski_site()
    return Corpus(site, Bounds(1, 2), _sheafified_atlas(site, "01", cyclic_group(2)))


@pytest.mark.parametrize("name", ["terminal-z3", "terminal-s3", "two-point-z2", "sierpinski-z2"])
def test_classification_holds_across_sites(name):
    corpus = _corpus(name)
    assert corpus.atlas.validate() == []
    result = classify(corpus)
    assert result.gerbes.classes
    assert result.report.verdict, result.report.witnesses
    assert len(result.cocycles.classes) == len(result.gerbes.classes)
    assert sorted(result.report.psi.values()) == list(range(len(result.gerbes.classes)))


def test_lwe_edges_between_gerbes_on_a_poset_site():
    corpus = _corpus("sierpinski-z2")
    found = gerbe_classes(corpus, enumerate_gerbes(corpus))
    for s, t, f in found.edges:
        assert f.source is found.gerbes[s] and f.target is found.gerbes[t]
        assert f.validate() == []
        assert is_lwe(f)


@pytest.mark.parametrize("group, shifted, bounds", [("z3", "shifted_z3", Bounds(1, 3)),
                                                    ("z2", "shifted_z2", Bounds(1, 2))])
def test_enlargement_by_a_relabelled_sheaf(request, terminal, constant_sheaf, constant_atlas, group, shifted,
                                           bounds):
    G, H = request.getfixturevalue(group), request.getfixturevalue(shifted)
    small = constant_atlas(terminal, "*", G)
    larger = small.saturated([("*", constant_sheaf(terminal, "*", H))])
    assert len(larger.keys()) == 2
    found = verify_enlargement(Corpus(terminal, bounds, small), larger)
    assert found.inclusion
    assert found.cocycle_comparison, found.cocycle_comparison.witness
    assert found.gerbe_comparison
    assert found.holds
    assert len(found.larger.cocycle_classes) == len(found.smaller.cocycle_classes) == 1
    assert found.larger.verdict


def test_homotopy_joins_cocycles_in_different_sheaves(terminal, z3, shifted_z3, constant_sheaf, constant_atlas):
    small = constant_atlas(terminal, "*", z3)
    larger = small.saturated([("*", constant_sheaf(terminal, "*", shifted_z3))])
    bz3 = constant_groupoid_presheaf(terminal, standard_groupoid([(["*"], z3)]))
    records = enumerate_cocycles([bz3], larger)
    by_sheaf = {}
    for r in records:
        by_sheaf.setdefault(r.cocycle.coefficients.components["*"].obj("*"), []).append(r.cocycle)
    assert len(by_sheaf) == 2
    first, second = (cocycles for _, cocycles in sorted(by_sheaf.items()))
    assert all(find_cocycle_morphism(c, d) is None for c in first for d in second)
    paths = [(c, d, find_cocycle_homotopy(c, d)) for c in first for d in second]
    paths = [(c, d, p) for c, d, p in paths if p is not None]
    assert paths
    for c, d, path in paths:
        assert path.validate() == []
        assert path.cocycles[0] is c and path.cocycles[-1] is d
    found = cocycle_classes(records)
    assert len(found.classes) == 1
    assert "homotopy" in {kind for _, _, kind in found.edges}


def test_cocycles_from_other_locally_contractible_sources(terminal, z2, z2_atlas, bz2):
    contractible = constant_two_groupoid_presheaf(terminal, normal_subgroup_two_groupoid(z2, [0, 1]), name="N")
    records = enumerate_cocycles([bz2], z2_atlas, sources=[contractible])
    extra = [r for r in records if r.gerbe is None]
    assert extra
    assert len(records) > len(extra)
    for r in extra:
        assert r.cocycle.source is contractible
        assert r.cocycle.validate() == []
        assert r.cocycle.is_cocycle()
    not_contractible = constant_two_groupoid_presheaf(terminal, two_group(trivial_group(), z2), name="B2Z2")
    with pytest.raises(PreconditionError):
        enumerate_cocycles([bz2], z2_atlas, sources=[not_contractible])


def test_classification_with_other_sources(corpus, terminal, z2):
    contractible = constant_two_groupoid_presheaf(terminal, normal_subgroup_two_groupoid(z2, [0, 1]), name="N")
    plain_run = classify(corpus)
    result = classify(replace(corpus, sources=(contractible,)))
    assert len(result.cocycles.records) > len(plain_run.cocycles.records)
    assert len(result.gerbes.classes) == len(plain_run.gerbes.classes)
    assert result.report.verdict, result.report.witnesses


def test_resuming_an_interrupted_enumeration(corpus):
    with pytest.raises(BudgetExceeded) as info:
        classify(replace(corpus, budget=3))
    frontier = info.value.partial
    assert frontier.choice == 3
    assert len(frontier.found) == 3
    assert frontier.steps == 3
    resumed = classify(replace(corpus, frontier=frontier))
    assert dump_report(resumed.report) == dump_report(classify(corpus).report)


def test_resuming_checks_the_frontier(corpus):
    with pytest.raises(PreconditionError):
        classify(replace(corpus, frontier=EnumerationFrontier(0, 0, shapes=99)))
    with pytest.raises(PreconditionError):
        classify(replace(corpus, frontier=EnumerationFrontier(1, 1, shapes=8, found=[((0, 1), ())])))


def test_gerbe_classes_in_worker_processes(corpus):
    gerbes = enumerate_gerbes(corpus)
    serial = gerbe_classes(corpus, gerbes)
    parallel = gerbe_classes(replace(corpus, jobs=2), gerbes)
    assert parallel.classes == serial.classes
    assert parallel.edges
    for s, t, f in parallel.edges:
        assert f.source is gerbes[s] and f.target is gerbes[t]
        assert f.validate() == []
        assert is_lwe(f)


@pytest.mark.parametrize("make_site, bounds", [(terminal_site, Bounds(2, 2)), (sierpinski_site, Bounds(1, 2))])
def test_two_groupoid_equivalences_on_enumerated_gerbes(make_site, bounds):
    site = make_site()
    top = "*" if make_site is terminal_site else "01"
    corpus = Corpus(site, bounds, _sheafified_atlas(site, top, cyclic_group(2)))
    gerbes = enumerate_gerbes(corpus)
    assert gerbes
    for G in gerbes:
        for H in (resolution(G), groupoid_as_two(G)):
            assert check_eta_equivalence(H).agree, H.name
            assert check_components_equivalence(H).agree, H.name
