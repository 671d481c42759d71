"""Command-line entry points.

Exit codes: 0 ok, 2 config error, 3 target error (a flagged partial report is
still written), 4 io error. Set MANOBENCH_LOG=debug|info|warning for
verbosity.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from pathlib import Path

import click

from .campaign import load_campaign_config, run_campaign, build_sim_orchestrator
from .descriptors import builtin_vcpe, package_to_dict, nsd_to_dict
from .drivers import EndpointConfig, NbiClient, collect_metrics
from .errors import ManobenchError, UnreadableReport, SchemaVersionMismatch
from .nbi_server import nbi_serve
from .report import (
    compare_reports,
    emit_plot_data,
    load_report,
    write_comparison,
    write_report,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TARGET = 3
EXIT_IO = 4

log = logging.getLogger("manobench")


def _setup_logging() -> None:
    level = os.environ.get("MANOBENCH_LOG", "warning").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


@click.group()
def main():
    """Benchmark MANO targets and crunch the resulting KPI reports."""
    _setup_logging()


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True), help="Campaign config JSON.")
@click.option("--out", "out_dir", required=True, type=click.Path(),
              help="Output directory for report, metrics, and plot data.")
@click.option("--seed", type=int, default=None, help="Override campaign seed.")
@click.option("--repetitions", type=int, default=None,
              help="Override repetition count.")
def run(config_path, out_dir, seed, repetitions):
    """Run a campaign against the configured target."""
    try:
        config = load_campaign_config(config_path, seed_override=seed,
                                      repetitions_override=repetitions)
    except (ManobenchError, json.JSONDecodeError, TypeError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)

    try:
        report = run_campaign(config, out_dir)
        report_path = write_report(report, out_dir)
        emit_plot_data(report, Path(out_dir) / "plots")
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        sys.exit(EXIT_IO)
    except ManobenchError as exc:
        click.echo(f"target error: {exc}", err=True)
        sys.exit(EXIT_TARGET)

    click.echo(f"report written to {report_path}")
    if report.get("incomplete"):
        click.echo("campaign incomplete; report flagged", err=True)
        sys.exit(EXIT_TARGET)


@main.command()
@click.option("--a", "path_a", required=True, type=click.Path(exists=True))
@click.option("--b", "path_b", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
def compare(path_a, path_b, out_dir):
    """Compare two reports: capability matrix, footprint ratios, deltas."""
    try:
        report_a = load_report(path_a)
        report_b = load_report(path_b)
    except (UnreadableReport, SchemaVersionMismatch) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        comparison = compare_reports(report_a, report_b)
        written = write_comparison(comparison, out_dir)
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        sys.exit(EXIT_IO)
    for path in written:
        click.echo(str(path))
    for warning in comparison["warnings"]:
        click.echo(f"warning: {warning}", err=True)


@main.command("serve-sim")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True),
              help="Campaign config JSON (sim target section is used).")
@click.option("--port", type=int, required=True)
def serve_sim(config_path, port):
    """Serve the simulated MANO target over the wire protocol."""
    try:
        config = load_campaign_config(config_path)
        if config.target_kind != "sim":
            raise ManobenchError("serve-sim needs a sim target config")
        orchestrator = build_sim_orchestrator(config)
    except (ManobenchError, json.JSONDecodeError, TypeError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        server = nbi_serve(orchestrator, port)
    except ManobenchError as exc:
        click.echo(f"target error: {exc}", err=True)
        sys.exit(EXIT_TARGET)
    click.echo(f"serving simulated MANO on {server.base_url} (Ctrl-C to stop)")
    try:
        while True:
            import time

            time.sleep(3600)
    except KeyboardInterrupt:
        server.stop()


@main.command("collect-metrics")
@click.option("--endpoint", required=True, help="Target NBI base URL.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--token", default=None, help="Bearer token, if required.")
def collect_metrics_cmd(endpoint, out_dir, token):
    """Dump every instance-metric series from a target to CSV files."""
    driver = NbiClient(EndpointConfig(base_url=endpoint, auth_token=token))
    try:
        written = collect_metrics(driver, out_dir)
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        sys.exit(EXIT_IO)
    except ManobenchError as exc:
        click.echo(f"target error: {exc}", err=True)
        sys.exit(EXIT_TARGET)
    for path in written:
        click.echo(str(path))


@main.group()
def fixtures():
    """Built-in descriptor fixtures."""


@fixtures.command("vcpe")
@click.option("--out", "out_dir", required=True, type=click.Path())
def fixtures_vcpe(out_dir):
    """Dump the five-component vCPE fixture as descriptor files."""
    nsd, packages = builtin_vcpe()
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        nsd_path = out / "vcpe_nsd.json"
        nsd_path.write_text(json.dumps(nsd_to_dict(nsd), indent=2) + "\n")
        click.echo(str(nsd_path))
        for pkg in packages:
            path = out / f"{pkg.vnfd.name}_package.json"
            path.write_text(json.dumps(package_to_dict(pkg), indent=2) + "\n")
            click.echo(str(path))
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        sys.exit(EXIT_IO)


if __name__ == "__main__":
    main()
