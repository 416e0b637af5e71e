# cli.py
import json
import logging
from dataclasses import replace
from typing import Any, Dict, List, Optional, Tuple

import click

from classify import (
    Bounds, Corpus, EnumerationFrontier, find_cocycle_morphism, gerbe_atlas, locally_equivalent, verify_classification,
    verify_enlargement,
)
from config import load_settings
from errors import (
    BudgetExceeded, ConsistencyError, GerbeKitError, InterchangeError, PreconditionError, ValidationFailure,
)
from gpd import GroupoidPresheaf, components_map, groupoid_of_group_presheaf, is_cech, is_lwe
from groth import (
    Cocycle, CocycleMorphism, check_composite_iso, check_fibre_inclusion, check_grothendieck_gerbe,
    check_induced_lwe, composition_well_defined, gerbe_cocycle, grothendieck, inverse_law,
)
from interchange import (
    Cursor, atlas_from_cursor, cell, cocycle_from_cursor, document_kind, dump_report, dump_result, frontier_to_dict,
    group_presheaf_from_cursor, groupoid_presheaf_from_cursor, load_corpus, load_frontier, parse, presheaf_from_cursor,
    read_text, site_from_cursor, site_to_dict, two_groupoid_presheaf_from_cursor, write_text,
)
from report import PASS, plain
from sites import FiniteSite, validate_site
from two_gpd import check_components_equivalence, check_eta_equivalence, identity_map_between

logger = logging.getLogger(__name__)

CHECKS = ("eta-equivalence", "cech", "components-equivalence", "inverse-law", "composite-iso",
          "grothendieck-gerbe", "fibre-inclusion", "induced-lwe", "local-equivalence")


def usage_exit_code(e: click.UsageError) -> int:
    """Missing input is a precondition failure, a malformed value a parse failure."""
    if isinstance(e, click.MissingParameter):
        return PreconditionError.exit_code
    if isinstance(e, (click.BadParameter, click.NoSuchOption, click.BadOptionUsage, click.BadArgumentUsage)):
        return InterchangeError.exit_code
    return PreconditionError.exit_code


class ErrorHandlingGroup(click.Group):
    """Turns library errors into a message on stderr and their exit status."""

    def parse_args(self, ctx, args):
        try:
            return super().parse_args(ctx, args)
        except click.UsageError as e:
            e.exit_code = usage_exit_code(e)
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = usage_exit_code(e)
            raise
        except GerbeKitError as e:
            logger.error(f"{type(e).__name__}: {e}")
            click.ClickException(str(e)).show()
            if e.details:
                click.echo(json.dumps(plain(e.details), sort_keys=True), err=True)
            ctx.exit(e.exit_code)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        write_text(out, text)
        logger.info(f"Wrote {out}")
    else:
        click.echo(text, nl=False)


def _parse_id(text: str):
    try:
        return cell(json.loads(text))
    except ValueError:
        return text


def _parse_at(text: Optional[str]) -> Optional[Tuple[Any, Any]]:
    if text is None:
        return None
    if "," not in text:
        raise click.BadParameter("expected U,i", param_hint="--at")
    U, i = text.split(",", 1)
    return _parse_id(U), _parse_id(i)


def _document(path: str, kinds: Tuple[str, ...]) -> Tuple[str, Cursor]:
    text = read_text(path)
    root = parse(text)
    kind = root["format"].str().split("/", 1)[1]
    if kind not in kinds:
        raise InterchangeError(f"expected one of {', '.join(kinds)}, found {kind}", location=f"{path}: format")
    return kind, root


class Loader:
    """Loads documents over a single shared site."""

    def __init__(self, site_path: Optional[str] = None):
        self.site: Optional[FiniteSite] = None
        if site_path:
            self.site = site_from_cursor(_document(site_path, ("site",))[1])

    def _site(self, root: Cursor) -> FiniteSite:
        embedded = site_from_cursor(root["site"])
        if self.site is None:
            self.site = embedded
            return embedded
        if site_to_dict(embedded) != site_to_dict(self.site):
            raise root["site"].error("document is over a different site")
        return self.site

    def gerbe(self, path: str) -> GroupoidPresheaf:
        """A groupoid presheaf, or the one-object groupoid presheaf of a group presheaf."""
        kind, root = _document(path, ("groupoid-presheaf", "group-presheaf"))
        site = self._site(root)
        if kind == "group-presheaf":
            base, P = group_presheaf_from_cursor(root, site)
            if base is not None:
                raise root["base"].error("expected a group presheaf on the site itself")
            return groupoid_of_group_presheaf(P)
        return groupoid_presheaf_from_cursor(root, site)

    def two_groupoid(self, path: str):
        _, root = _document(path, ("two-groupoid-presheaf",))
        return two_groupoid_presheaf_from_cursor(root, self._site(root))

    def atlas(self, path: str):
        _, root = _document(path, ("atlas",))
        return atlas_from_cursor(root, self._site(root))

    def cocycle(self, path: str) -> Cocycle:
        _, root = _document(path, ("cocycle",))
        return cocycle_from_cursor(root, self._site(root))


@click.group(cls=ErrorHandlingGroup)
@click.option("--verbose", "-v", is_flag=True, help="Log per-candidate detail")
@click.pass_context
def cli(ctx, verbose):
    """Finite sites, gerbes and their cocycles."""
    settings = load_settings()
    logging.basicConfig(level=logging.DEBUG if verbose else getattr(logging, settings.log_level, logging.INFO))
    ctx.obj = settings


# ----------------------------------------------------------------------------------
# validate

def _validate_document(path: str) -> Dict[str, Any]:
    text = read_text(path)
    kind = document_kind(text)
    root = parse(text, kind)
    if kind == "report":
        raise InterchangeError("reports are not validated", location=f"{path}: format")
    site_cursor = root if kind == "site" else root["site"]
    site = site_from_cursor(site_cursor)
    violations = validate_site(site)
    if not violations:
        if kind == "presheaf":
            violations = presheaf_from_cursor(root, site).validate()
        elif kind == "group-presheaf":
            violations = group_presheaf_from_cursor(root, site)[1].validate()
        elif kind == "groupoid-presheaf":
            violations = groupoid_presheaf_from_cursor(root, site).validate()
        elif kind == "two-groupoid-presheaf":
            violations = two_groupoid_presheaf_from_cursor(root, site).validate()
        elif kind == "atlas":
            violations = atlas_from_cursor(root, site).validate()
        elif kind == "cocycle":
            violations = cocycle_from_cursor(root, site).validate()
        elif kind == "corpus":
            violations = atlas_from_cursor(root["atlas"], site).validate()
    logger.info(f"{path}: {kind}, {len(violations)} violations")
    return {"path": path, "kind": kind, "violations": [v.as_dict() for v in violations]}


@cli.command()
@click.argument("paths", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), help="Write the report here instead of stdout")
def validate(paths, out):
    """Check the axioms of every document in PATHS."""
    results = [_validate_document(p) for p in paths]
    bad = [r for r in results if r["violations"]]
    _emit(dump_result({"files": results, "holds": not bad}), out)
    if bad:
        first = bad[0]["violations"][0]
        raise ValidationFailure(f"{bad[0]['path']}: {first['axiom']}: {first['detail']}", first["witness"])


# ----------------------------------------------------------------------------------
# classify

@cli.command()
@click.option("--site", "site_path", type=click.Path(exists=True, dir_okay=False), help="Site document")
@click.option("--atlas", "atlas_path", type=click.Path(exists=True, dir_okay=False), help="Atlas document")
@click.option("--gerbe", "gerbe_path", type=click.Path(exists=True, dir_okay=False),
              help="Classify gerbes locally equivalent to this one")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False), help="Corpus document")
@click.option("--enlarge", "larger_path", type=click.Path(exists=True, dir_okay=False),
              help="A larger atlas to compare against")
@click.option("--resume", "resume_path", type=click.Path(exists=True, dir_okay=False),
              help="Partial report of an earlier run whose budget ran out")
@click.option("--bounds", default="2,2", show_default=True, help="Largest section size and vertex group order")
@click.option("--budget", type=int, help="Search step budget (0 for none)")
@click.option("--seed", type=int, help="Sample the enumerated gerbes with this seed")
@click.option("--sample", type=int, default=8, show_default=True, help="Sample size when --seed is given")
@click.option("--jobs", type=int, help="Worker processes for the pairwise gerbe searches")
@click.option("--out", type=click.Path(dir_okay=False), help="Write the report here instead of stdout")
@click.pass_obj
def classify(settings, site_path, atlas_path, gerbe_path, corpus_path, larger_path, resume_path, bounds, budget, seed,
             sample, jobs, out):
    """Compare gerbe classes with cocycle classes on a bounded corpus."""
    loader = Loader(site_path)
    if corpus_path:
        corpus = load_corpus(read_text(corpus_path))
        loader.site = corpus.site
    else:
        if gerbe_path:
            atlas = gerbe_atlas(loader.gerbe(gerbe_path))
        elif atlas_path:
            atlas = loader.atlas(atlas_path)
        else:
            raise click.UsageError("one of --atlas, --gerbe or --corpus is required")
        try:
            parsed = Bounds.parse(bounds)
        except ValueError as e:
            raise click.BadParameter(str(e), param_hint="--bounds")
        corpus = Corpus(loader.site, parsed, atlas, budget=settings.budget, jobs=settings.jobs, seed=seed,
                        sample=sample)
    corpus = replace(corpus,
                     budget=corpus.budget if budget is None else budget,
                     jobs=corpus.jobs if jobs is None else max(1, jobs),
                     seed=corpus.seed if seed is None else seed)
    if resume_path:
        corpus = replace(corpus, frontier=load_frontier(read_text(resume_path), corpus.bounds))
    logger.info(f"Classifying on {corpus.site.name or 'site'} with bounds {corpus.bounds}")
    try:
        if larger_path:
            larger = loader.atlas(larger_path)
            result = verify_enlargement(corpus, larger)
            _emit(dump_result(result.as_dict()), out)
            holds = result.holds
        else:
            report = verify_classification(corpus)
            _emit(dump_report(report), out)
            holds = report.verdict.holds
    except BudgetExceeded as e:
        logger.warning(f"Budget exhausted: {e}")
        body = {"budget_exceeded": str(e), "details": e.details, "bounds": str(corpus.bounds)}
        if isinstance(e.partial, EnumerationFrontier):
            body["frontier"] = frontier_to_dict(e.partial)
        elif isinstance(e.partial, list):
            body["partial"] = len(e.partial)
        _emit(dump_result(body), out)
        raise
    if not holds:
        raise ValidationFailure("Classification verdict does not hold")


# ----------------------------------------------------------------------------------
# check

def _cocycle_input(loader: Loader, cocycles: List[str], gerbe_path: Optional[str]) -> List[Cocycle]:
    found = [loader.cocycle(p) for p in cocycles]
    if not found and gerbe_path:
        found = [gerbe_cocycle(loader.gerbe(gerbe_path))]
    if not found:
        raise click.UsageError("this check needs --cocycle (or --gerbe)")
    return found


def _run_check(name: str, loader: Loader, gerbe_path, groupoid_path, two_path, cocycles, at, budget):
    if name in ("eta-equivalence", "components-equivalence"):
        if not two_path:
            raise click.UsageError(f"{name} needs --two-groupoid")
        H = loader.two_groupoid(two_path)
        result = check_eta_equivalence(H) if name == "eta-equivalence" else check_components_equivalence(H)
        if not result.agree:
            raise ConsistencyError(f"Both sides of {name} disagree", result.as_dict())
        return result.left, result.as_dict()
    if name == "cech":
        path = groupoid_path or gerbe_path
        if not path:
            raise click.UsageError("cech needs --groupoid")
        G = loader.gerbe(path)
        verdict = is_cech(G)
        definitional = is_lwe(components_map(G))
        if verdict.holds != definitional.holds:
            raise ConsistencyError("Agreement-sieve test disagrees with the components comparison",
                                   {"agreement": verdict.holds, "components": definitional.holds})
        return verdict, {"agreement": verdict.as_dict(), "components": definitional.as_dict()}
    if name == "composite-iso":
        if not gerbe_path:
            raise click.UsageError("composite-iso needs --gerbe")
        verdict = check_composite_iso(loader.gerbe(gerbe_path))
        return verdict, {"verdict": verdict.as_dict()}
    if name == "local-equivalence":
        if not gerbe_path or not groupoid_path:
            raise click.UsageError("local-equivalence needs --gerbe and --groupoid")
        result = locally_equivalent(loader.gerbe(gerbe_path), loader.gerbe(groupoid_path), budget)
        return result.local, result.as_dict()
    found = _cocycle_input(loader, cocycles, gerbe_path)
    c = found[0]
    if name == "inverse-law":
        E = grothendieck(c)
        composition, inverses = composition_well_defined(E), inverse_law(E)
        verdict = PASS if composition and inverses else (composition if not composition else inverses)
        return verdict, {"composition": composition.as_dict(), "inverses": inverses.as_dict()}
    if name == "grothendieck-gerbe":
        verdict = check_grothendieck_gerbe(c)
        return verdict, {"verdict": verdict.as_dict()}
    if name == "fibre-inclusion":
        verdict = check_fibre_inclusion(c, at)
        return verdict, {"verdict": verdict.as_dict(), "at": plain(at)}
    # induced-lwe
    if len(found) == 1:
        m = CocycleMorphism(c, c, identity_map_between(c.source, c.source))
    else:
        m = find_cocycle_morphism(found[0], found[1], budget)
        if m is None:
            raise PreconditionError("No cocycle morphism between the two cocycles")
    verdict = check_induced_lwe(m)
    return verdict, {"verdict": verdict.as_dict()}


@cli.command()
@click.argument("name", type=click.Choice(CHECKS))
@click.option("--site", "site_path", type=click.Path(exists=True, dir_okay=False), help="Site document")
@click.option("--gerbe", "gerbe_path", type=click.Path(exists=True, dir_okay=False),
              help="Groupoid presheaf or group presheaf")
@click.option("--groupoid", "groupoid_path", type=click.Path(exists=True, dir_okay=False), help="Groupoid presheaf")
@click.option("--two-groupoid", "two_path", type=click.Path(exists=True, dir_okay=False),
              help="2-groupoid presheaf")
@click.option("--cocycle", "cocycles", multiple=True, type=click.Path(exists=True, dir_okay=False),
              help="Cocycle document; give two for induced-lwe")
@click.option("--at", "at_text", help="U,i: restrict fibre-inclusion to one object")
@click.option("--budget", type=int, help="Search step budget (0 for none)")
@click.option("--out", type=click.Path(dir_okay=False), help="Write the verdict here instead of stdout")
@click.pass_obj
def check(settings, name, site_path, gerbe_path, groupoid_path, two_path, cocycles, at_text, budget, out):
    """Run the check NAME on the given instance."""
    at = _parse_at(at_text)
    budget = settings.budget if budget is None else budget
    verdict, body = _run_check(name, Loader(site_path), gerbe_path, groupoid_path, two_path, list(cocycles), at,
                               budget)
    _emit(dump_result(dict(body, check=name, holds=verdict.holds)), out)
    logger.info(f"check {name}: {'PASS' if verdict else 'FAIL'}")
    if not verdict:
        raise ValidationFailure(f"check {name} failed", verdict.witness)


def main():
    cli()


if __name__ == "__main__":
    main()
