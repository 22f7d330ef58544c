"""CLI interface for hdx-verifier."""

import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import typer
from pydantic import BaseModel, Field, ValidationError

from hdx_verifier.core.cochains import CochainAlgebra, dump_operators, verify_operator_identities
from hdx_verifier.core.complex import PartiteStructure, SimplicialComplex, detect_partite
from hdx_verifier.core.config import Tolerances, load_config, tolerances_from_config
from hdx_verifier.core.errors import INPUT_ERRORS, HDXError, ParameterError
from hdx_verifier.core.formats import (
    format_complex,
    read_complex,
    read_point_map,
    read_vertex_sets,
)
from hdx_verifier.core.garland import (
    verify_garland_decomposition,
    verify_localization_identities,
    verify_orthogonal_bound,
    verify_partite_bound,
)
from hdx_verifier.core.generators import GeneratorSpec, generate
from hdx_verifier.core.mixing import (
    lambda_from_top_links,
    verify_exchange_lemmas,
    verify_mixing,
    verify_partite_mixing,
    verify_random_families,
)
from hdx_verifier.core.overlap import PointMap, overlap_exact_2d, overlap_sampled, with_bound
from hdx_verifier.core.report import IdentityReport, ReportGenerator
from hdx_verifier.core.spectral import (
    SpectralReport,
    link_spectral_report,
    verify_descent,
    verify_explicit_descent,
)
from hdx_verifier.core.weights import WeightFunction, verify_weight_identities

logger = logging.getLogger("hdx_verifier")

app = typer.Typer(help="Numerical verification for weighted high-dimensional expanders.")
verify_app = typer.Typer(help="Run identity suites on a complex.")
app.add_typer(verify_app, name="verify")

Reports = Sequence[Tuple[str, BaseModel]]


class RunConfig(BaseModel):
    """Flags shared by the subcommands, validated before any computation."""

    complex_path: Optional[Path] = None
    sets_path: Optional[Path] = None
    points_path: Optional[Path] = None
    lam: Optional[float] = Field(default=None, ge=0.0)
    pach: Optional[float] = Field(default=None, gt=0.0, le=1.0)
    trials: int = Field(default=100, ge=1)
    seeds: int = Field(default=1, ge=1)
    samples: int = Field(default=10000, ge=0)
    seed: int = 0
    k: Optional[int] = Field(default=None, ge=0)


class RunContext(BaseModel):
    """Global options collected by the callback."""

    tolerances: Tolerances
    machine: bool = False
    output_format: str = "markdown"
    save: bool = False
    max_workers: Optional[int] = None
    trials: int = 100
    seed: int = 0
    samples: int = 10000
    max_retries: int = 100


@contextmanager
def _exit_codes(action: str):
    """Map input problems to exit code 2 and other library failures to 1."""
    try:
        yield
    except (ValidationError, *INPUT_ERRORS) as e:
        typer.echo(f"Error {action}: {str(e)}", err=True)
        sys.exit(2)
    except HDXError as e:
        typer.echo(f"Error {action}: {str(e)}", err=True)
        sys.exit(1)


def _emit(ctx: typer.Context, reports: Reports) -> None:
    """Print every report and exit 1 if any of them failed."""
    state: RunContext = ctx.obj
    generator = ReportGenerator()
    if state.machine:
        pairs = {}
        for prefix, report in reports:
            pairs.update(generator.machine_items(report, prefix))
        text = "\n".join(f"{key}={pairs[key]}" for key in sorted(pairs))
        fmt = "machine"
    else:
        fmt = state.output_format
        text = "\n\n".join(generator.generate_report(r, fmt) for _, r in reports)
    typer.echo(text)
    if state.save:
        path = generator.save_report(text, fmt)
        typer.echo(f"Report saved to {path}", err=True)
    if not all(getattr(r, "passed", True) for _, r in reports):
        sys.exit(1)


def _load(path: Path) -> Tuple[SimplicialComplex, WeightFunction]:
    X, m = read_complex(path)
    logger.info("Loaded %s: n=%d, f=%s", path, X.n, X.f_vector())
    return X, m


def _partite(X: SimplicialComplex, required: bool) -> Optional[PartiteStructure]:
    partite = detect_partite(X)
    if partite is None and required:
        raise ParameterError("Complex is not partite")
    return partite


def _optional_partite(X: SimplicialComplex) -> Optional[PartiteStructure]:
    try:
        return detect_partite(X)
    except HDXError as e:
        logger.warning("Treating complex as non-partite: %s", e)
        return None


@app.callback()
def main_callback(
    ctx: typer.Context,
    tolerance: Optional[float] = typer.Option(
        None, "--tolerance", help="Override the identity and inequality tolerances."
    ),
    config: Optional[Path] = typer.Option(None, "--config", help="Path to a .hdxrc file."),
    verbose: int = typer.Option(0, "--verbose", "-v", count=True, help="Repeat for debug."),
    machine: bool = typer.Option(False, "--machine", help="One KEY=VALUE line per result."),
    output_format: str = typer.Option("markdown", "--format", help="markdown or json."),
    save: bool = typer.Option(False, "--save", help="Also write the report under reports/."),
    workers: Optional[int] = typer.Option(None, "--workers", help="Thread pool size."),
):
    """Numerical verification for weighted high-dimensional expanders."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    with _exit_codes("loading configuration"):
        if tolerance is not None and tolerance <= 0:
            raise ParameterError(f"--tolerance must be positive, got {tolerance}")
        if output_format not in ("markdown", "json"):
            raise ParameterError(f"Unsupported format: {output_format}")
        settings = load_config(str(config) if config else None)
        ctx.obj = RunContext(
            tolerances=tolerances_from_config(settings).with_override(tolerance),
            machine=machine,
            output_format=output_format,
            save=save,
            max_workers=workers or settings["parallel"]["max_workers"],
            trials=settings["verification"]["trials"],
            seed=settings["verification"]["seed"],
            samples=settings["overlap"]["samples"],
            max_retries=settings["generation"]["max_retries"],
        )


@app.command("generate")
def generate_command(
    ctx: typer.Context,
    family: str = typer.Option(..., "--family", help="complete, complete-partite, "
                               "single-simplex or random-pure."),
    N: Optional[int] = typer.Option(None, "--N", help="Number of vertices."),
    n: Optional[int] = typer.Option(None, "--n", help="Dimension."),
    sides: Optional[str] = typer.Option(None, "--sides", help="Side sizes, e.g. 2,2,2."),
    p: float = typer.Option(1.0, "--p", help="Keep probability for random-pure."),
    seed: int = typer.Option(0, "--seed"),
    max_retries: Optional[int] = typer.Option(None, "--max-retries"),
    out: Optional[Path] = typer.Option(None, "--out", help="Write here instead of stdout."),
):
    """Generate a complex in the complex file format."""
    with _exit_codes("generating complex"):
        try:
            side_sizes = [int(s) for s in sides.split(",")] if sides else None
        except ValueError as e:
            raise ParameterError(f"--sides must be comma-separated integers: {sides}") from e
        spec = GeneratorSpec(
            family=family, N=N, n=n, sides=side_sizes, p=p, seed=seed,
            max_retries=max_retries or ctx.obj.max_retries,
        )
        text = format_complex(generate(spec))
    if out:
        out.write_text(text)
        typer.echo(f"Wrote {out}", err=True)
    else:
        typer.echo(text, nl=False)


def _spectral(ctx: typer.Context, X: SimplicialComplex, m: WeightFunction,
              partite: Optional[PartiteStructure] = None) -> SpectralReport:
    state: RunContext = ctx.obj
    return link_spectral_report(X, m, partite, state.tolerances, state.max_workers)


@app.command("spectra")
def spectra_command(
    ctx: typer.Context,
    complex_path: Path = typer.Option(..., "--complex", help="Complex file."),
):
    """Spectra of the non-lazy upper walk in every link."""
    with _exit_codes("computing spectra"):
        RunConfig(complex_path=complex_path)
        X, m = _load(complex_path)
        report = _spectral(ctx, X, m)
    _emit(ctx, [("", report)])


@app.command("descent")
def descent_command(
    ctx: typer.Context,
    complex_path: Path = typer.Option(..., "--complex", help="Complex file."),
    lam: Optional[float] = typer.Option(None, "--lambda", help="Target lambda."),
):
    """Compare measured link spectra with the descent bounds."""
    with _exit_codes("checking spectral descent"):
        RunConfig(complex_path=complex_path, lam=lam)
        X, m = _load(complex_path)
        spectral = _spectral(ctx, X, m)
        reports: List[Tuple[str, BaseModel]] = [
            ("", verify_descent(spectral, ctx.obj.tolerances))
        ]
        if lam is not None:
            reports.append(("EXPLICIT.", verify_explicit_descent(spectral, lam,
                                                                 ctx.obj.tolerances)))
    _emit(ctx, reports)


def _weights_report(ctx, m, partite) -> IdentityReport:
    return verify_weight_identities(m, partite, ctx.obj.tolerances)


def _operators_report(ctx, m, partite, seed, dump_dir) -> IdentityReport:
    report = verify_operator_identities(m, partite, ctx.obj.tolerances, seed=seed)
    if dump_dir is not None:
        written = dump_operators(CochainAlgebra(m, partite), dump_dir)
        logger.info("Dumped %d operators to %s", len(written), dump_dir)
    return report


def _garland_report(ctx, m, partite, k, trials, seed, lam, spectral) -> IdentityReport:
    state: RunContext = ctx.obj
    X = m.complex
    levels = [k] if k is not None else list(range(X.n))
    report = IdentityReport(title="Garland identities")
    for level in levels:
        report.merge(verify_localization_identities(m, level, trials, seed, state.tolerances,
                                                    state.max_workers))
        report.merge(verify_garland_decomposition(m, level, trials, seed, state.tolerances,
                                                  state.max_workers))
        two_sided = lam if lam is not None else spectral.lambda_two_sided()
        report.merge(verify_orthogonal_bound(m, level, two_sided, trials, seed,
                                             state.tolerances, state.max_workers))
        if partite is not None:
            one_sided = (lam if lam is not None
                         else spectral.lambda_one_sided(partite_aware=True))
            A = list(range(level + 1))
            B = list(range(1, level + 2))
            report.merge(verify_partite_bound(m, level, A, B, one_sided, partite, trials, seed,
                                              state.tolerances, state.max_workers))
    return report


@verify_app.command("weights")
def verify_weights_command(
    ctx: typer.Context,
    complex_path: Path = typer.Option(..., "--complex", help="Complex file."),
):
    """Balance and coface-count identities of the weight function."""
    with _exit_codes("verifying weights"):
        X, m = _load(complex_path)
        report = _weights_report(ctx, m, _optional_partite(X))
    _emit(ctx, [("", report)])


@verify_app.command("operators")
def verify_operators_command(
    ctx: typer.Context,
    complex_path: Path = typer.Option(..., "--complex", help="Complex file."),
    seed: Optional[int] = typer.Option(None, "--seed"),
    dump_dir: Optional[Path] = typer.Option(None, "--dump-dir", help="Write matrices here."),
):
    """Walk, adjointness and composition identities."""
    with _exit_codes("verifying operators"):
        X, m = _load(complex_path)
        seed = ctx.obj.seed if seed is None else seed
        report = _operators_report(ctx, m, _optional_partite(X), seed, dump_dir)
    _emit(ctx, [("", report)])


@verify_app.command("garland")
def verify_garland_command(
    ctx: typer.Context,
    complex_path: Path = typer.Option(..., "--complex", help="Complex file."),
    k: Optional[int] = typer.Option(None, "--level", help="Level; all levels when omitted."),
    trials: Optional[int] = typer.Option(None, "--trials"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    lam: Optional[float] = typer.Option(None, "--lambda", help="Defaults to the measured one."),
):
    """Localization identities, the decomposition and the pair bounds."""
    with _exit_codes("verifying localization identities"):
        config = RunConfig(complex_path=complex_path, k=k, lam=lam,
                           trials=trials or ctx.obj.trials,
                           seed=ctx.obj.seed if seed is None else seed)
        X, m = _load(complex_path)
        partite = _optional_partite(X)
        spectral = _spectral(ctx, X, m, partite)
        report = _garland_report(ctx, m, partite, config.k, config.trials, config.seed,
                                 config.lam, spectral)
    _emit(ctx, [("", report)])


@verify_app.command("exchange")
def verify_exchange_command(
    ctx: typer.Context,
    complex_path: Path = typer.Option(..., "--complex", help="Complex file."),
    sets_path: Path = typer.Option(..., "--sets", help="Vertex-set file with n+1 sets."),
    k: Optional[int] = typer.Option(None, "--level", help="Level; all levels when omitted."),
):
    """Projection exchange identities and the product identity."""
    with _exit_codes("verifying exchange identities"):
        config = RunConfig(complex_path=complex_path, sets_path=sets_path, k=k)
        X, m = _load(complex_path)
        sets = read_vertex_sets(sets_path)
        report = IdentityReport(title="Exchange identities")
        for level in ([config.k] if config.k is not None else range(X.n)):
            report.merge(verify_exchange_lemmas(m, sets, level, ctx.obj.tolerances))
    _emit(ctx, [("", report)])


@verify_app.command("suite")
def verify_suite_command(
    ctx: typer.Context,
    complex_path: Path = typer.Option(..., "--complex", help="Complex file."),
    trials: Optional[int] = typer.Option(None, "--trials"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    dump_dir: Optional[Path] = typer.Option(None, "--dump-dir", help="Write matrices here."),
):
    """Weights, operators, spectra, descent and localization identities in one run."""
    with _exit_codes("running the identity suite"):
        config = RunConfig(complex_path=complex_path, trials=trials or ctx.obj.trials,
                           seed=ctx.obj.seed if seed is None else seed)
        X, m = _load(complex_path)
        partite = _optional_partite(X)
        spectral = _spectral(ctx, X, m, partite)
        reports = [
            ("WEIGHTS.", _weights_report(ctx, m, partite)),
            ("OPERATORS.", _operators_report(ctx, m, partite, config.seed, dump_dir)),
            ("SPECTRA.", spectral),
            ("DESCENT.", verify_descent(spectral, ctx.obj.tolerances)),
            ("GARLAND.", _garland_report(ctx, m, partite, None, config.trials, config.seed,
                                         None, spectral)),
        ]
    _emit(ctx, reports)


@app.command("mixing")
def mixing_command(
    ctx: typer.Context,
    complex_path: Path = typer.Option(..., "--complex", help="Complex file."),
    sets_path: Optional[Path] = typer.Option(None, "--sets", help="Vertex-set file."),
    lam: Optional[float] = typer.Option(None, "--lambda", help="Defaults to the measured one."),
    partite_mode: bool = typer.Option(False, "--partite", help="Use the partite theorem."),
    seeds: Optional[int] = typer.Option(None, "--seeds", help="Random set families to try."),
    seed: Optional[int] = typer.Option(None, "--seed"),
    from_top_links: bool = typer.Option(False, "--from-top-links",
                                        help="Derive lambda from the (n-2)-level links."),
    norms: bool = typer.Option(False, "--norms", help="Add restricted product norms."),
):
    """Check the mixing inequality on given or random vertex sets."""
    with _exit_codes("checking mixing"):
        config = RunConfig(complex_path=complex_path, sets_path=sets_path, lam=lam,
                           seeds=seeds or 1, seed=ctx.obj.seed if seed is None else seed)
        if lam is not None and from_top_links:
            raise ParameterError("--lambda and --from-top-links are mutually exclusive")
        if sets_path is None and seeds is None:
            raise ParameterError("Give --sets or --seeds")
        X, m = _load(complex_path)
        tolerances = ctx.obj.tolerances
        partite = _partite(X, required=True) if partite_mode else None
        spectral = _spectral(ctx, X, m, partite)
        source = None
        if from_top_links:
            lam = lambda_from_top_links(spectral, one_sided=partite_mode,
                                        partite_aware=partite_mode)
            source = "derived"

        reports: List[Tuple[str, BaseModel]] = []
        if sets_path is not None:
            sets = read_vertex_sets(sets_path)
            if partite is not None:
                report = verify_partite_mixing(m, sets, lam, partite, spectral, tolerances,
                                               source, norms)
            else:
                report = verify_mixing(m, sets, lam, spectral, tolerances, source, norms)
            reports.append(("", report))
        else:
            families = verify_random_families(m, config.seeds, config.seed, lam, partite,
                                              tolerances, ctx.obj.max_workers, source)
            reports.extend((f"FAMILY_{i}.", r) for i, r in enumerate(families))
    _emit(ctx, reports)


@app.command("overlap")
def overlap_command(
    ctx: typer.Context,
    complex_path: Path = typer.Option(..., "--complex", help="Complex file."),
    points_path: Path = typer.Option(..., "--points", help="Point-map file."),
    pach: float = typer.Option(..., "--pach", help="Selection constant P_n in (0, 1]."),
    method: str = typer.Option("exact2d", "--method", help="exact2d or sample."),
    samples: Optional[int] = typer.Option(None, "--samples"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    lam: Optional[float] = typer.Option(None, "--lambda", help="Defaults to the measured one."),
    partite_mode: bool = typer.Option(False, "--partite", help="Use the partite bound."),
    assert_bound: bool = typer.Option(False, "--assert-bound", help="Fail below the bound."),
):
    """Deepest point of the affine extension and the overlap lower bound."""
    with _exit_codes("computing overlap"):
        state: RunContext = ctx.obj
        config = RunConfig(complex_path=complex_path, points_path=points_path, pach=pach,
                           lam=lam, samples=state.samples if samples is None else samples,
                           seed=state.seed if seed is None else seed)
        if method not in ("exact2d", "sample"):
            raise ParameterError(f"Unknown method {method!r}, expected exact2d or sample")
        X, m = _load(complex_path)
        f = PointMap.for_complex(X, read_point_map(points_path, X.n))
        if method == "exact2d":
            report = overlap_exact_2d(X, f, state.tolerances, config.seed,
                                      max_workers=state.max_workers)
        else:
            report = overlap_sampled(X, f, config.samples, config.seed, state.tolerances,
                                     state.max_workers)
        if lam is None:
            partite = _partite(X, required=True) if partite_mode else None
            spectral = _spectral(ctx, X, m, partite)
            lam = (spectral.lambda_one_sided(partite_aware=True) if partite_mode
                   else spectral.lambda_two_sided())
        variant = "partite" if partite_mode else "nonpartite"
        report = with_bound(report, lam, config.pach, variant, assert_bound, X.n)
    _emit(ctx, [("", report)])


def main():
    """Main entry point for the CLI."""
    app()
