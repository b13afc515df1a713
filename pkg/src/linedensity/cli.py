"""Command-line interface: generate, eval, dedup, serve."""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click

from .dedup import DEFAULT_THRESHOLD
from .kernels import KernelConfig
from .pipeline import (
    JobConfig,
    JobError,
    load_feature_dir,
    pyramids_from_image_dir,
    run_dedup,
    run_eval,
    run_generate,
)


def _kernel_options(fn):
    opts = [
        click.option("--sigma-basic", type=float, default=15.0, show_default=True,
                     help="Base kernel spread in pixels."),
        click.option("--a", "expand_factor", type=float, default=0.2, show_default=True,
                     help="Spread growth per sampling step along a segment."),
        click.option("--ar", "aspect_ratio", type=float, default=4.0, show_default=True,
                     help="Object length/width ratio fixing the minor-axis spread."),
        click.option("--alpha", type=float, default=4.0, show_default=True,
                     help="FWHM penalizer controlling the major-axis spread."),
        click.option("--fwhm", "fwhm_const", type=float, default=2.355, show_default=True,
                     help="Full width at half maximum of a unit-sigma Gaussian."),
        click.option("--trunc-mult", type=float, default=3.0, show_default=True,
                     help="Kernel window half-width in units of sigma."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _build_kernel_config(sigma_basic, expand_factor, aspect_ratio, alpha, fwhm_const,
                         trunc_mult) -> KernelConfig:
    try:
        return KernelConfig(
            sigma_basic=sigma_basic,
            expand_factor=expand_factor,
            aspect_ratio=aspect_ratio,
            alpha=alpha,
            fwhm_const=fwhm_const,
            trunc_mult=trunc_mult,
        )
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc


def _parse_mask(_ctx, _param, values) -> tuple[tuple[int, int, int, int], ...]:
    rects = []
    for value in values:
        parts = value.split(",")
        if len(parts) != 4:
            raise click.BadParameter(f"expected x,y,w,h, got {value!r}")
        try:
            x, y, w, h = (int(p) for p in parts)
        except ValueError:
            raise click.BadParameter(f"mask values must be integers: {value!r}") from None
        if w <= 0 or h <= 0:
            raise click.BadParameter(f"mask size must be positive: {value!r}")
        rects.append((x, y, w, h))
    return tuple(rects)


def _fmt_count(count: float, round_counts: bool) -> str:
    return str(round(count)) if round_counts else f"{count:.4f}"


@click.group()
@click.version_option(package_name="linedensity")
def main() -> None:
    """Density maps, counting metrics and dedup for line-labeled datasets."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.argument("annotations", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False, path_type=Path),
              help="Output directory for DMAP files.")
@click.option("--scheme", type=click.Choice(["dot", "line", "agk"]), default="agk",
              show_default=True, help="Labeling scheme for map generation.")
@_kernel_options
@click.option("--image-dir", type=click.Path(exists=True, file_okay=False, path_type=Path),
              default=None, help="Source images (needed for --mask).")
@click.option("--mask", multiple=True, callback=_parse_mask, metavar="X,Y,W,H",
              help="Fill this rectangle with black in image copies; repeatable.")
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True,
              help="Worker threads; output is identical for any value.")
@click.option("--round-counts", is_flag=True, help="Display integer counts in the summary.")
@click.option("--figures", is_flag=True, help="Also render a PNG heatmap per image.")
@click.option("--pgm", is_flag=True, help="Also export a 16-bit PGM per image.")
def generate(annotations, out_dir, scheme, sigma_basic, expand_factor, aspect_ratio,
             alpha, fwhm_const, trunc_mult, image_dir, mask, jobs, round_counts,
             figures, pgm) -> None:
    """Generate ground-truth density maps from annotation JSON files."""
    job = JobConfig(
        annotation_paths=tuple(annotations),
        out_dir=out_dir,
        scheme=scheme,
        kernel=_build_kernel_config(sigma_basic, expand_factor, aspect_ratio, alpha,
                                    fwhm_const, trunc_mult),
        image_dir=image_dir,
        masks=mask,
        jobs=jobs,
        write_figures=figures,
        write_pgm=pgm,
    )
    if mask and image_dir is None:
        raise click.UsageError("--mask requires --image-dir")
    try:
        summary = run_generate(job)
    except JobError as exc:
        for message in exc.errors:
            click.echo(f"error: {message}", err=True)
        sys.exit(1)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    for item in summary.items:
        click.echo(
            f"{item.image_id}: {item.n_labels} labels, "
            f"count {_fmt_count(item.count, round_counts)} -> {item.dmap_path}"
        )
    if summary.masked_images:
        click.echo(f"masked {len(summary.masked_images)} image(s) into {out_dir / 'images'}")
    click.echo(f"{len(summary.items)} map(s) in {summary.wall_time_s:.2f}s ({scheme} scheme)")


@main.command("eval")
@click.option("--gt", "gt_dir", required=True,
              type=click.Path(exists=True, file_okay=False, path_type=Path),
              help="Directory of ground-truth DMAP files.")
@click.option("--pred", "pred_dir", required=True,
              type=click.Path(exists=True, file_okay=False, path_type=Path),
              help="Directory of predicted DMAP files.")
@click.option("--out", "out_dir", required=True,
              type=click.Path(file_okay=False, path_type=Path),
              help="Where report.json, records.csv and figures go.")
@click.option("--figures/--no-figures", default=True, show_default=True,
              help="Render the report figures.")
@click.option("--round-counts", is_flag=True, help="Display integer counts in the summary.")
def eval_cmd(gt_dir, pred_dir, out_dir, figures, round_counts) -> None:
    """Score predicted density maps against ground truth."""
    try:
        report, records = run_eval(gt_dir, pred_dir, out_dir, figures=figures)
    except JobError as exc:
        for message in exc.errors:
            click.echo(f"error: {message}", err=True)
        sys.exit(1)
    except (OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    for rec in records:
        click.echo(
            f"{rec.image_id}: gt {_fmt_count(rec.gt_count, round_counts)} "
            f"pred {_fmt_count(rec.pred_count, round_counts)} [{rec.level.value}]"
        )
    overall = report.overall
    if overall.n_images:
        click.echo(f"overall: n={overall.n_images} MAE={overall.mae:.4f} RMSE={overall.rmse:.4f}")
    else:
        click.echo("overall: no images")
    click.echo(f"report written to {out_dir / 'report.json'}")


@main.command()
@click.option("--features", "features_dir",
              type=click.Path(exists=True, file_okay=False, path_type=Path), default=None,
              help="Directory of precomputed FST5 feature stacks.")
@click.option("--images", "images_dir",
              type=click.Path(exists=True, file_okay=False, path_type=Path), default=None,
              help="Build built-in pyramid features from these images instead.")
@click.option("--threshold", type=float, default=DEFAULT_THRESHOLD, show_default=True,
              help="Drop an image whose distance to a kept one is below this.")
@click.option("--report", "report_path", type=click.Path(dir_okay=False, path_type=Path),
              default=None, help="Write a JSON audit report here.")
def dedup(features_dir, images_dir, threshold, report_path) -> None:
    """Drop near-duplicate images by multi-scale feature distance."""
    if (features_dir is None) == (images_dir is None):
        raise click.UsageError("provide exactly one of --features or --images")
    try:
        if features_dir is not None:
            stacks = load_feature_dir(features_dir)
        else:
            stacks = pyramids_from_image_dir(images_dir)
            click.echo("note: using the built-in pyramid features, not a learned extractor")
        kept, dropped = run_dedup(stacks, threshold=threshold, report_path=report_path)
    except (OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    for event in dropped:
        click.echo(
            f"drop {event.dropped_id} (distance {event.distance:.4f} to kept {event.kept_id})"
        )
    click.echo(f"kept {len(kept)} of {len(stacks)} image(s)")
    if report_path is not None:
        click.echo(f"report written to {report_path}")


@main.command()
@click.option("--port", type=int, default=8765, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--image-dir", required=True,
              type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--annotation-dir", required=True,
              type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--ui-dir", type=click.Path(exists=True, file_okay=False, path_type=Path),
              default=None, help="Serve a static annotation UI from this directory.")
def serve(port, host, image_dir, annotation_dir, ui_dir) -> None:
    """Run the annotation/preview HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(image_dir, annotation_dir, ui_dir=ui_dir)
    try:
        uvicorn.run(app, host=host, port=port, log_level="info")
    except OSError as exc:
        raise click.ClickException(f"cannot bind {host}:{port}: {exc}") from exc


if __name__ == "__main__":
    main()
