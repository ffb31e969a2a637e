"""Command line entry point: ``sasakiverify <subcommand> [options]``."""

from __future__ import annotations

import sys

import click

from .algebraic_models import PROFILES
from .config import ConfigError, RunConfig, load_config
from .runner import emit, run


def _common(f):
    f = click.option("--out", "out", type=click.Path(dir_okay=False), default=None,
                     help="Write the report here instead of stdout.")(f)
    f = click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=None,
                     help="Report format (default from config, else json).")(f)
    f = click.option("--seed", type=int, default=None, help="Override the sample seed.")(f)
    f = click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                     help="JSON run configuration.")(f)
    return f


def _execute(config_path, suites, seed, fmt, out, **overrides) -> None:
    try:
        cfg = load_config(config_path) if config_path else RunConfig()
        if suites is not None:
            cfg = cfg.override(suites=suites)
        cfg = cfg.override(seed=seed, output_format=fmt, output_path=out, **overrides)
        report = run(cfg)
        text = emit(report, cfg.output_format, cfg.output_path)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(2)
    if cfg.output_path is None:
        click.echo(text, nl=False)
    s = report.summary()
    click.echo(
        f"pass={s['pass']} fail={s['fail']} skipped={s['skipped']} "
        f"paper_deviation={s['paper_deviation']} ({report.wall_time:.2f}s)",
        err=True,
    )
    sys.exit(report.exit_code)


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Residual verification of Sasakian hypersurface identities."""


@main.command("verify-ambient")
@_common
def verify_ambient(config_path, seed, fmt, out):
    """Contact metric and Sasakian axioms at sampled points."""
    _execute(config_path, ("verify-ambient",), seed, fmt, out)


@main.command("verify-hypersurface")
@_common
@click.option("--embedding", default=None, help="Embedding name (default from config, else plane-y0).")
def verify_hypersurface(config_path, seed, fmt, out, embedding):
    """Induced structure, Gauss-Weingarten identities and pointwise fits on an embedding."""
    if embedding is None and not config_path:
        embedding = "plane-y0"
    _execute(config_path, ("verify-hypersurface",), seed, fmt, out, embedding=embedding)


@main.command("verify-algebraic")
@_common
@click.option("--n", "n_values", type=int, multiple=True, help="Half dimension; repeatable.")
@click.option("--seeds", type=int, default=None, help="Number of seeded instances per profile and n.")
@click.option("--profile", type=click.Choice(PROFILES), multiple=True, help="Constraint profile; repeatable.")
def verify_algebraic(config_path, seed, fmt, out, n_values, seeds, profile):
    """Covariant almost analytic theorems on exact single-point models."""
    _execute(config_path, ("verify-algebraic",), seed, fmt, out,
             algebraic_n=tuple(n_values) or None, algebraic_seeds=seeds, profiles=tuple(profile) or None)


@main.command("fit-h")
@_common
@click.argument("matrices", required=False, type=click.Path(dir_okay=False))
def fit_h(config_path, seed, fmt, out, matrices):
    """Fit h = alpha g + beta q (x) q to a matrix pair read from JSON."""
    _execute(config_path, ("fit-h",), seed, fmt, out, fit_h_path=matrices)


@main.command("report")
@_common
def report(config_path, seed, fmt, out):
    """Run every suite listed in the configuration."""
    if not config_path:
        click.echo("configuration error: report needs --config", err=True)
        sys.exit(2)
    _execute(config_path, None, seed, fmt, out)


if __name__ == "__main__":
    main()
