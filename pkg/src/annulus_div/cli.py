"""Command line entry point: ``annulus-div solve | verify | identities``."""

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from .assembly import assemble_solution
from .config import load_config
from .exceptions import AnnulusDivError, ConfigurationError
from .identities import run_identities
from .verify import fd_divergence, interior_points, run_suite

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _fmt(v):
    return "%.17g" % v


def _load(path):
    try:
        return load_config(path)
    except ConfigurationError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


def _run(cfg):
    try:
        sol = assemble_solution(cfg.source_spec, cfg.domain, cfg.resolved)
    except AnnulusDivError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    return sol, run_suite(sol, cfg.source_spec, cfg.verify)


def write_field_csv(path, sol, source, radial, directions):
    dom = sol.domain
    step = sol.resolution.fd_step
    pts = interior_points(dom, radial, directions, 2.0 * step)
    u = sol(pts)
    f = source(pts)
    div = fd_divergence(sol, pts, step, dom)
    n = dom.n
    header = [f"x{i + 1}" for i in range(n)] + [f"U{i + 1}" for i in range(n)] + ["f", "divU_fd"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in np.column_stack([pts, u, f, div]):
            w.writerow([_fmt(v) for v in row])


def _echo_report(report):
    for line in report.lines():
        click.echo(line)
    click.echo("overall: " + ("PASS" if report.passed else "FAIL"))


@click.group()
def main():
    """Explicit solutions of div U = f on annuli, with verification."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False), help="JSON run config.")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False), help="Directory for CSV and report.")
def solve(config_path, out_dir):
    """Assemble U, sample it to CSV and write a verification report."""
    cfg = _load(config_path)
    sol, report = _run(cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_field_csv(
        out / cfg.output.field_csv, sol, cfg.source_spec, cfg.output.radial_samples, cfg.output.direction_samples
    )
    (out / cfg.output.report_json).write_text(report.to_json() + "\n", encoding="utf-8")
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2) + "\n", encoding="utf-8")
    _echo_report(report)
    sys.exit(EXIT_OK if report.passed else EXIT_FAILED)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False), help="JSON run config.")
def verify(config_path):
    """Re-run all checks for a config and print the results."""
    cfg = _load(config_path)
    _, report = _run(cfg)
    _echo_report(report)
    sys.exit(EXIT_OK if report.passed else EXIT_FAILED)


@main.command()
@click.option("--max-n", required=True, type=click.IntRange(min=2), help="Largest dimension to check (>= 2).")
def identities(max_n):
    """Exact-arithmetic identity suite for 2 <= n <= max-n."""
    results = run_identities(max_n)
    for r in results:
        click.echo(r.line())
    ok = all(r.passed for r in results)
    click.echo("overall: " + ("PASS" if ok else "FAIL"))
    sys.exit(EXIT_OK if ok else EXIT_FAILED)
