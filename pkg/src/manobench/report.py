"""KPI report assembly, serialization, comparison, and plot-data emission.

A report is a single JSON document (schema version 1) with sections
{target, campaign, nsd, capability_manifest, samples, aggregates, qod,
utilization}. Durations are integer nanoseconds. Reports from simulated
targets are a pure function of (config, seed) and serialize byte-identically.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .capability import (
    CapabilityManifest,
    compare_capabilities,
    footprint_ratio,
    manifest_from_dict,
    manifest_to_dict,
)
from .errors import (
    DivisionByZeroDimension,
    MissingPhase,
    SchemaVersionMismatch,
    UnreadableReport,
)
from .kpi import AggregateMode, KpiKind, aggregate, dpd, opd, qod_score, rod

REPORT_VERSION = 1

_REPORT_FILENAME = "report.json"


def serialize_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_report(report: dict, out_dir) -> Path:
    path = Path(out_dir) / _REPORT_FILENAME
    path.write_text(serialize_report(report))
    return path


def load_report(path) -> dict:
    try:
        with Path(path).open() as fh:
            report = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UnreadableReport(f"{path}: {exc}") from exc
    if not isinstance(report, dict):
        raise UnreadableReport(f"{path}: report must be a JSON object")
    version = report.get("report_version")
    if version != REPORT_VERSION:
        raise SchemaVersionMismatch(version)
    return report


def _sample_to_dict(sample, repetition: int) -> dict:
    return {
        "kind": sample.kind.value,
        "vnf_name": sample.vnf_name,
        "instance_id": sample.instance_id,
        "duration_ns": sample.duration_ns,
        "action_kind": sample.action_kind.value if sample.action_kind else None,
        "action_id": sample.action_id,
        "repetition": repetition,
    }


def extract_samples(timeline, action_ids=()):
    """All delay samples a timeline supports: onboarding and deployment per
    instance (skipping instances whose boundary phases were never observed),
    plus one orchestration sample per action id."""
    samples = []
    skipped = []
    for instance_id in timeline.instances():
        for extractor in (opd, dpd):
            try:
                samples.append(extractor(timeline, instance_id))
            except MissingPhase as exc:
                skipped.append(str(exc))
    for action_id in action_ids:
        samples.append(rod(timeline, action_id))
    return samples, skipped


def build_report(
    *,
    campaign_name: str,
    target_kind: str,
    clock_domain: str,
    seed: int,
    config_digest: str,
    nsd,
    repetitions_data,
    aggregate_modes,
    qod_weights,
    qod_tau_ns: int,
    manifest: CapabilityManifest | None,
    incomplete: bool,
    warnings,
) -> dict:
    """Assemble the report dict from per-repetition run data.

    Each element of repetitions_data needs: timeline, actions (list of
    (action_id, kind_value, vnf_name, trace)), utilization rows, error.
    """
    warnings = list(warnings)
    all_samples = []
    per_rep_samples = []
    for rep_index, rep in enumerate(repetitions_data):
        action_ids = [a[0] for a in rep.actions]
        samples, skipped = extract_samples(rep.timeline, action_ids)
        warnings.extend(f"repetition {rep_index}: {s}" for s in skipped)
        per_rep_samples.append(samples)
        all_samples.extend(
            _sample_to_dict(s, rep_index) for s in samples
        )
        if rep.error:
            warnings.append(f"repetition {rep_index} incomplete: {rep.error}")

    aggregates = []
    for kind in KpiKind:
        kind_samples = [
            s
            for rep_samples in per_rep_samples
            for s in rep_samples
            if s.kind is kind
        ]
        if not kind_samples:
            continue
        for mode in aggregate_modes:
            if mode is AggregateMode.Makespan:
                # repetitions restart the clock, so makespans add up
                value = 0
                count = 0
                for rep, rep_samples in zip(repetitions_data, per_rep_samples):
                    rep_kind = [s for s in rep_samples if s.kind is kind]
                    if not rep_kind:
                        continue
                    stats = aggregate(rep_kind, mode, timeline=rep.timeline)
                    value += stats.value_ns
                    count += stats.sample_count
                aggregates.append(
                    {"kind": kind.value, "mode": mode.value,
                     "value_ns": value, "sample_count": count}
                )
            else:
                stats = aggregate(kind_samples, mode)
                aggregates.append(
                    {"kind": kind.value, "mode": mode.value,
                     "value_ns": stats.value_ns,
                     "sample_count": stats.sample_count}
                )

    qod_entries = []
    for rep_index, rep in enumerate(repetitions_data):
        for action_id, kind_value, vnf_name, trace in rep.actions:
            if trace is None:
                warnings.append(
                    f"repetition {rep_index}: action {action_id} has no "
                    "decision trace; decision quality not scored"
                )
                continue
            score = qod_score(trace.qod_inputs, qod_weights, qod_tau_ns)
            qod_entries.append(
                {
                    "action_id": action_id,
                    "action_kind": kind_value,
                    "vnf_name": vnf_name,
                    "repetition": rep_index,
                    "attempts": trace.attempts,
                    "chosen_node": trace.chosen_node,
                    "decision_latency_ns": trace.decision_latency_ns,
                    "components": {
                        "fulfillment_short": score.fulfillment_short,
                        "fulfillment_long": score.fulfillment_long,
                        "non_intrusiveness": score.non_intrusiveness,
                        "attempt_efficiency": score.attempt_efficiency,
                        "timeliness": score.timeliness,
                    },
                    "composite": score.composite,
                    "weights": list(score.weights),
                    "tau_ns": qod_tau_ns,
                }
            )

    utilization = _merge_utilization(repetitions_data)

    return {
        "report_version": REPORT_VERSION,
        "target": {"kind": target_kind},
        "campaign": {
            "name": campaign_name,
            "seed": seed,
            "clock_domain": clock_domain,
            "config_digest": config_digest,
            "repetitions": len(repetitions_data),
        },
        "nsd": {
            "id": nsd.id,
            "vnf_names": list(nsd.constituent_vnfds),
        },
        "capability_manifest": manifest_to_dict(manifest) if manifest else None,
        "samples": all_samples,
        "aggregates": aggregates,
        "qod": qod_entries,
        "utilization": utilization,
        "incomplete": incomplete,
        "warnings": warnings,
    }


def _merge_utilization(repetitions_data) -> list[dict]:
    merged: dict[tuple[str, str], list[float]] = {}
    for rep in repetitions_data:
        for (vnf_name, metric), values in rep.utilization.items():
            merged.setdefault((vnf_name, metric), []).extend(values)
    rows = []
    for (vnf_name, metric), values in merged.items():
        rows.append(
            {
                "vnf_name": vnf_name,
                "metric": metric,
                "mean": sum(values) / len(values) if values else 0.0,
                "max": max(values) if values else 0.0,
                "samples": len(values),
            }
        )
    return rows


# --- comparison ------------------------------------------------------------------


def _mean_duration_by_vnf(report: dict, kind: str) -> dict[str, float]:
    sums: dict[str, list[int]] = {}
    for sample in report.get("samples", []):
        if sample["kind"] != kind:
            continue
        sums.setdefault(sample["vnf_name"], []).append(sample["duration_ns"])
    return {name: sum(vals) / len(vals) for name, vals in sums.items()}


def compare_reports(report_a: dict, report_b: dict) -> dict:
    """Capability matrix, footprint ratios, and per-VNF delay deltas (a - b)."""
    warnings = []

    matrix_rows = []
    ratios = {}
    manifest_a = report_a.get("capability_manifest")
    manifest_b = report_b.get("capability_manifest")
    if manifest_a and manifest_b:
        a = manifest_from_dict(manifest_a)
        b = manifest_from_dict(manifest_b)
        matrix = compare_capabilities(a, b)
        matrix_rows = [
            {"criterion": r.key, "a": r.a_status.value, "b": r.b_status.value}
            for r in matrix.rows
        ]
        try:
            ratios = footprint_ratio(a, b)
        except DivisionByZeroDimension as exc:
            warnings.append(f"footprint ratios unavailable: {exc}")
    else:
        warnings.append("capability matrix skipped: manifest missing from a report")

    names_a = report_a.get("nsd", {}).get("vnf_names", [])
    names_b = set(report_b.get("nsd", {}).get("vnf_names", []))
    common = [n for n in names_a if n in names_b]
    if not common:
        warnings.append("per-VNF deltas skipped: no common VNF names")
    opd_a = _mean_duration_by_vnf(report_a, "OPD")
    opd_b = _mean_duration_by_vnf(report_b, "OPD")
    dpd_a = _mean_duration_by_vnf(report_a, "DPD")
    dpd_b = _mean_duration_by_vnf(report_b, "DPD")
    deltas = []
    for name in common:
        row = {"vnf_name": name}
        if name in opd_a and name in opd_b:
            row["opd_delta_ns"] = opd_a[name] - opd_b[name]
        if name in dpd_a and name in dpd_b:
            row["dpd_delta_ns"] = dpd_a[name] - dpd_b[name]
        deltas.append(row)

    return {
        "a": report_a.get("campaign", {}).get("name", "a"),
        "b": report_b.get("campaign", {}).get("name", "b"),
        "capability_matrix": matrix_rows,
        "footprint_ratios": ratios,
        "vnf_deltas": deltas,
        "warnings": warnings,
    }


def write_comparison(comparison: dict, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / "comparison_matrix.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["criterion", comparison["a"], comparison["b"]])
        for row in comparison["capability_matrix"]:
            writer.writerow([row["criterion"], row["a"], row["b"]])
    written.append(path)

    path = out / "footprint_ratios.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dimension", "ratio"])
        for dim, value in comparison["footprint_ratios"].items():
            writer.writerow([dim, repr(value)])
    written.append(path)

    path = out / "vnf_deltas.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["vnf_name", "opd_delta_ns", "dpd_delta_ns"])
        for row in comparison["vnf_deltas"]:
            writer.writerow(
                [row["vnf_name"], row.get("opd_delta_ns", ""),
                 row.get("dpd_delta_ns", "")]
            )
    written.append(path)

    path = out / "comparison.json"
    path.write_text(json.dumps(comparison, indent=2, sort_keys=True) + "\n")
    written.append(path)
    return written


# --- plot data ---------------------------------------------------------------------


def _vnf_order(report: dict) -> list[str]:
    order = list(report.get("nsd", {}).get("vnf_names", []))
    for sample in report.get("samples", []):
        if sample["vnf_name"] not in order:
            order.append(sample["vnf_name"])
    return order


def _write_rows(path: Path, value_column: str, rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", value_column])
        for label, value in rows:
            writer.writerow([label, value])


def emit_plot_data(report: dict, out_dir) -> list[Path]:
    """One CSV per figure analog (eight in total): per-VNF and aggregate
    delay totals, CPU, and memory.

    Per-VNF delay rows are totals over that VNF's samples, so their sum is
    exactly the Sum-mode aggregate; in a one-shot campaign they equal the
    single sample.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    order = _vnf_order(report)
    written = []

    for kind, stem in (("OPD", "opd"), ("DPD", "dpd")):
        totals = {name: 0 for name in order}
        for sample in report.get("samples", []):
            if sample["kind"] == kind:
                totals[sample["vnf_name"]] += sample["duration_ns"]
        path = out / f"{stem}_per_vnf.csv"
        _write_rows(path, "value_ns", [(n, totals[n]) for n in order])
        written.append(path)

        path = out / f"{stem}_aggregate.csv"
        rows = [
            (agg["mode"], agg["value_ns"])
            for agg in report.get("aggregates", [])
            if agg["kind"] == kind
        ]
        _write_rows(path, "value_ns", rows)
        written.append(path)

    util = {
        (u["vnf_name"], u["metric"]): u["mean"]
        for u in report.get("utilization", [])
    }
    cpu_rows = [(n, util.get((n, "cpu_util_pct"), 0.0)) for n in order]
    mem_rows = [(n, util.get((n, "memory_usage_mb"), 0.0)) for n in order]

    path = out / "cpu_per_vnf.csv"
    _write_rows(path, "value_pct", cpu_rows)
    written.append(path)
    path = out / "cpu_aggregate.csv"
    mean_cpu = sum(v for _, v in cpu_rows) / len(cpu_rows) if cpu_rows else 0.0
    _write_rows(path, "value_pct", [("Mean", mean_cpu)])
    written.append(path)

    path = out / "memory_per_vnf.csv"
    _write_rows(path, "value_mb", mem_rows)
    written.append(path)
    path = out / "memory_aggregate.csv"
    _write_rows(path, "value_mb", [("Sum", sum(v for _, v in mem_rows))])
    written.append(path)
    return written
