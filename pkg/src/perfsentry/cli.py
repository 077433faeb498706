"""Operator entry point.

Subcommands cover the whole workflow: import a commit log, ingest result
bundles and tickets, run recomputes, generate synthetic corpora, score the
detector, benchmark the kernels, and serve the HTTP API + web UI.

Exit codes: 0 success, 1 rejected input, 2 internal error.
"""

from __future__ import annotations

import json
import socket
import sys

import click

from perfsentry.bench import format_table, run_bench
from perfsentry.cpd import DivergenceParams, active_kernel
from perfsentry.errors import BundleRejectedError, InputError, PerfSentryError
from perfsentry.evaluate import evaluate_corpus
from perfsentry.pipeline import (
    PipelineConfig,
    WindowPolicy,
    recompute_after_ingest,
    recompute_all,
)
from perfsentry.store import Store, load_bundles, load_commit_lines, load_tickets
from perfsentry.synth import NOISE_KINDS, SynthSpec, build_corpus


def detection_options(f):
    """Detector/pipeline flags shared by recompute, evaluate, and serve."""
    for option in reversed(
        [
            click.option("--alpha", default=1.0, show_default=True,
                         help="Distance exponent, in (0, 2)."),
            click.option("--min-cluster", default=3, show_default=True,
                         help="Minimum observations on each side of a split."),
            click.option("--permutations", default=100, show_default=True,
                         help="Permutations per significance test."),
            click.option("--p-threshold", default=0.05, show_default=True,
                         help="Detection continues while p-value is below this."),
            click.option("--max-points", default=500, show_default=True,
                         help="Analysis window size in results."),
            click.option("--seed", default=0, show_default=True,
                         help="Pipeline seed; recomputes with the same seed are reproducible."),
            click.option("--jobs", default=None, type=int,
                         help="Worker threads for recompute (default: auto; 1 = sequential)."),
        ]
    ):
        f = option(f)
    return f


def build_config(alpha, min_cluster, permutations, p_threshold, max_points, seed, jobs):
    return PipelineConfig(
        params=DivergenceParams(
            alpha=alpha,
            min_cluster_size=min_cluster,
            permutation_count=permutations,
            p_threshold=p_threshold,
        ),
        window=WindowPolicy(max_points=max_points),
        seed=seed,
        max_workers=jobs,
    )


@click.group()
@click.option(
    "--db-path",
    default="perfsentry.db.json",
    show_default=True,
    help="Path of the embedded store file.",
)
@click.pass_context
def cli(ctx, db_path):
    """Performance-regression sentinel for CI benchmark results."""
    ctx.ensure_object(dict)
    ctx.obj["db_path"] = db_path


def _store(ctx) -> Store:
    return Store(ctx.obj["db_path"])


@cli.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--recompute", "run_detection", is_flag=True,
              help="Run detection on the touched series after ingesting.")
@detection_options
@click.pass_context
def ingest(ctx, path, run_detection, **flags):
    """Ingest a result bundle file (one bundle object or a list)."""
    store = _store(ctx)
    bundles = load_bundles(path)
    updated = sum(store.ingest_bundle(b) for b in bundles)
    click.echo(f"{updated} series updated across {len(bundles)} bundle(s)")
    if run_detection:
        config = build_config(**flags)
        for bundle in bundles:
            report = recompute_after_ingest(store, bundle, config)
            click.echo(
                f"recompute {report.scope}: {json.dumps(report.totals())} "
                f"(seed {report.seed})"
            )
    store.save()


@cli.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--project", required=True, help="Project the commit log belongs to.")
@click.pass_context
def commits(ctx, path, project):
    """Import a commit log: one revision per line, newest last."""
    store = _store(ctx)
    added = store.import_commit_log(project, load_commit_lines(path))
    store.save()
    click.echo(f"{added} revisions appended to {project}")


@cli.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def tickets(ctx, path):
    """Import tickets from a JSON array file."""
    store = _store(ctx)
    records = load_tickets(path)
    for record in records:
        store.upsert_ticket(record)
    store.save()
    click.echo(f"{len(records)} ticket(s) upserted")


@cli.command()
@click.argument("project", required=False)
@click.option("--all", "all_projects", is_flag=True, help="Recompute every project.")
@detection_options
@click.pass_context
def recompute(ctx, project, all_projects, **flags):
    """Recompute change points for a project (or --all)."""
    if project is None and not all_projects:
        raise click.UsageError("pass a PROJECT or --all")
    store = _store(ctx)
    config = build_config(**flags)
    report = recompute_all(store, None if all_projects else project, config)
    store.save()
    click.echo(f"scope: {report.scope}")
    click.echo(f"seed: {report.seed}")
    click.echo(f"totals: {json.dumps(report.totals())}")
    click.echo(f"wall time: {report.wall_time_s:.3f}s")
    for outcome in report.errors:
        click.echo(f"  failed {outcome.series_id}: {outcome.error}", err=True)
    click.echo(f"state hash: {store.state_hash()}")


@cli.command()
@click.option("--out", required=True, type=click.Path(file_okay=False),
              help="Directory the corpus is written to.")
@click.option("--length", default=100, show_default=True)
@click.option("--means", default="10,5", show_default=True,
              help="Comma-separated segment means.")
@click.option("--boundaries", default="50", show_default=True,
              help="Comma-separated change indices ('' for a flat series).")
@click.option("--sigma", default=0.1, show_default=True)
@click.option("--noise", type=click.Choice(NOISE_KINDS), default="iid-normal",
              show_default=True)
@click.option("--ar-coeff", default=0.7, show_default=True,
              help="Lag-1 coefficient for correlated noise.")
@click.option("--seed", default=0, show_default=True)
@click.option("--count", default=1, show_default=True, help="Series per corpus.")
@click.option("--project", default="synth", show_default=True)
def synth(out, length, means, boundaries, sigma, noise, ar_coeff, seed, count, project):
    """Generate a synthetic corpus with a ground-truth file."""
    try:
        mean_values = tuple(float(v) for v in means.split(",") if v.strip())
        boundary_values = tuple(int(v) for v in boundaries.split(",") if v.strip())
    except ValueError as exc:
        raise InputError(f"bad --means/--boundaries: {exc}") from None
    spec = SynthSpec(
        length=length,
        segment_means=mean_values,
        boundaries=boundary_values,
        sigma=sigma,
        noise=noise,
        ar_coeff=ar_coeff,
        seed=seed,
    )
    summary = build_corpus(out, spec, count=count, project=project)
    click.echo(json.dumps(summary, indent=1, sort_keys=True))


@cli.command()
@click.argument("corpus", type=click.Path(exists=True, file_okay=False))
@click.option("--tol", default=2, show_default=True,
              help="Index tolerance when matching detections to truth.")
@click.option("--no-delay", is_flag=True, help="Skip the prefix-replay delay measurement.")
@detection_options
def evaluate(corpus, tol, no_delay, **flags):
    """Score the detector against a corpus truth file."""
    config = build_config(**flags)
    metrics = evaluate_corpus(corpus, config, tolerance=tol, measure_delay=not no_delay)
    out = f"{corpus}/evaluation.json"
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(metrics, fh, indent=1, sort_keys=True)
    click.echo(json.dumps(metrics, indent=1, sort_keys=True))
    click.echo(f"written: {out}")


@cli.command()
@click.option("--lengths", default="50,100,173", show_default=True,
              help="Comma-separated series lengths.")
@click.option("--repeat", default=3, show_default=True)
@click.option("--seed", default=0, show_default=True)
def bench(lengths, repeat, seed):
    """Benchmark the naive vs incremental split-statistic implementations."""
    try:
        length_values = [int(v) for v in lengths.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"bad --lengths: {exc}") from None
    if not length_values:
        raise InputError("no lengths given")
    rows = run_bench(length_values, repeat=repeat, seed=seed)
    click.echo(f"active kernel: {active_kernel()}  (seed {seed}, best of {repeat})")
    click.echo(format_table(rows))
    if not all(r.outputs_equal for r in rows):
        raise PerfSentryError("kernel outputs disagree with the naive oracle")


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True)
@click.option("--ui-dir", type=click.Path(file_okay=False), default=None,
              help="Static directory with the built web UI.")
@detection_options
@click.pass_context
def serve(ctx, host, port, ui_dir, **flags):
    """Serve the triage HTTP API (and optionally the web UI)."""
    import uvicorn

    from perfsentry.api import create_app

    try:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        probe.bind((host, port))
        probe.close()
    except OSError as exc:
        raise InputError(f"cannot bind {host}:{port}: {exc}") from None

    store = _store(ctx)
    config = build_config(**flags)
    app = create_app(store, config, static_dir=ui_dir)
    click.echo(f"serving on http://{host}:{port} (db {ctx.obj['db_path']}, seed {config.seed})")
    uvicorn.run(app, host=host, port=port, log_level="warning")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, prog_name="perfsentry", standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return 1
    except BundleRejectedError as exc:
        click.echo(f"error: {exc.report()}", err=True)
        return 1
    except InputError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except KeyboardInterrupt:
        return 130
    except Exception as exc:
        click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
