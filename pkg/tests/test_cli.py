# test_cli.py
import json

import pytest
from click.testing import CliRunner

from cli import cli
from groups import constant_group_presheaf
from interchange import dump_atlas, dump_group_presheaf, dump_groupoid_presheaf, dump_site


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def files(tmp_path, terminal, two_point, z2, bz2, two_object_z2, constant_sheaf, constant_atlas):
    P = constant_sheaf(terminal, "*", z2)
    documents = {
        "site.json": dump_site(terminal),
        "two_point.json": dump_site(two_point),
        "bz2.json": dump_group_presheaf(constant_group_presheaf(terminal, z2)),
        "z2x2.json": dump_groupoid_presheaf(two_object_z2),
        "atlas.json": dump_atlas(constant_atlas(terminal, "*", z2)),
        "broken_atlas.json": dump_atlas(constant_atlas(terminal, "*", z2, declared={(P.key, P.key): []})),
        "bad.json": '{"format": "gerbekit/site",',
    }
    paths = {}
    for name, text in documents.items():
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        paths[name] = str(path)
    paths["out"] = str(tmp_path / "out.json")
    return paths


def _written(files):
    with open(files["out"], encoding="utf-8") as f:
        return json.load(f)


def test_validate(runner, files):
    result = runner.invoke(cli, ["validate", files["site.json"], files["bz2.json"], files["atlas.json"],
                                 "--out", files["out"]])
    assert result.exit_code == 0
    body = _written(files)
    assert body["format"] == "gerbekit/report"
    assert body["holds"] is True
    assert [f["kind"] for f in body["files"]] == ["site", "group-presheaf", "atlas"]


def test_validate_reports_violations(runner, files):
    result = runner.invoke(cli, ["validate", files["broken_atlas.json"], "--out", files["out"]])
    assert result.exit_code == 1
    body = _written(files)
    assert body["holds"] is False
    assert body["files"][0]["violations"][0]["axiom"] == "fullness"


def test_syntax_error_exit_status(runner, files):
    result = runner.invoke(cli, ["validate", files["bad.json"]])
    assert result.exit_code == 4


def test_classify_from_a_gerbe(runner, files):
    result = runner.invoke(cli, ["classify", "--gerbe", files["bz2.json"], "--out", files["out"]])
    assert result.exit_code == 0
    body = _written(files)
    assert body["verdict"]["holds"] is True
    assert body["bounds"] == "2,2"
    assert len(body["gerbe_classes"]) == 1


def test_classify_resumes_from_a_partial_report(runner, files, tmp_path):
    partial = str(tmp_path / "partial.json")
    result = runner.invoke(cli, ["classify", "--gerbe", files["bz2.json"], "--budget", "3", "--out", partial])
    assert result.exit_code == 2
    with open(partial, encoding="utf-8") as f:
        body = json.load(f)
    assert body["bounds"] == "2,2"
    assert "frontier" in body

    result = runner.invoke(cli, ["classify", "--gerbe", files["bz2.json"], "--resume", partial, "--budget", "0",
                                 "--out", files["out"]])
    assert result.exit_code == 0
    assert _written(files)["verdict"]["holds"] is True

    result = runner.invoke(cli, ["classify", "--gerbe", files["bz2.json"], "--resume", partial, "--bounds", "1,2"])
    assert result.exit_code == 3


def test_classify_resume_needs_a_partial_report(runner, files):
    runner.invoke(cli, ["classify", "--gerbe", files["bz2.json"], "--out", files["out"]])
    result = runner.invoke(cli, ["classify", "--gerbe", files["bz2.json"], "--resume", files["out"]])
    assert result.exit_code == 4


def test_classify_rejects_an_invalid_atlas(runner, files):
    result = runner.invoke(cli, ["classify", "--atlas", files["broken_atlas.json"]])
    assert result.exit_code == 3


def test_classify_needs_an_atlas(runner, files):
    result = runner.invoke(cli, ["classify"])
    assert result.exit_code == 3


def test_classify_bad_bounds(runner, files):
    result = runner.invoke(cli, ["classify", "--atlas", files["atlas.json"], "--bounds", "x"])
    assert result.exit_code == 4


def test_documents_share_one_site(runner, files):
    result = runner.invoke(cli, ["classify", "--site", files["two_point.json"], "--gerbe", files["bz2.json"]])
    assert result.exit_code == 4


@pytest.mark.parametrize("args", [
    ["composite-iso", "--gerbe", "bz2.json"],
    ["grothendieck-gerbe", "--gerbe", "bz2.json"],
    ["inverse-law", "--gerbe", "z2x2.json"],
    ["fibre-inclusion", "--gerbe", "bz2.json", "--at", "*,*"],
    ["induced-lwe", "--gerbe", "bz2.json"],
    ["local-equivalence", "--gerbe", "bz2.json", "--groupoid", "z2x2.json"],
])
def test_checks_that_hold(runner, files, args):
    args = [files.get(a, a) for a in args]
    result = runner.invoke(cli, ["check", *args, "--out", files["out"]])
    assert result.exit_code == 0
    body = _written(files)
    assert body["holds"] is True
    assert body["check"] == args[0]


def test_failed_check(runner, files):
    result = runner.invoke(cli, ["check", "cech", "--gerbe", files["bz2.json"], "--out", files["out"]])
    assert result.exit_code == 1
    assert _written(files)["holds"] is False


def test_check_usage(runner, files):
    assert runner.invoke(cli, ["check", "eta-equivalence"]).exit_code == 3
    assert runner.invoke(cli, ["check", "fibre-inclusion", "--gerbe", files["bz2.json"], "--at", "x"]).exit_code == 4


@pytest.mark.parametrize("args, status", [
    (["check", "no-such-check"], 4),
    (["--no-such-option", "classify"], 4),
    (["classify", "--atlas", "missing.json"], 4),
    (["classify", "--budget", "many"], 4),
    (["validate"], 3),
    (["check"], 3),
])
def test_usage_errors_keep_budget_status_free(runner, args, status):
    result = runner.invoke(cli, args)
    assert result.exit_code == status
    assert result.exit_code != 2
