"""Result files: summary JSON, per-user sample table and CDF points."""

from __future__ import annotations

import csv
import json
from datetime import datetime, timezone
from pathlib import Path

from .campaign import MetricsReport

SAMPLE_COLUMNS = ("drop", "cell", "ue", "kind", "modulation", "sinr_db", "mi_bits", "rate_bps")
CDF_COLUMNS = ("rate_bps", "cumulative_fraction")

SUMMARY_FILE = "summary.json"
SAMPLES_FILE = "samples.csv"
CDF_FILE = "cdf.csv"


def summary_dict(report: MetricsReport) -> dict:
    cfg = report.config
    return {
        "scenario": cfg.scenario,
        "mode": cfg.mode,
        "seed": report.seed,
        "n_drops": cfg.mc.n_drops,
        "n_samples": len(report.samples),
        "metrics": report.metrics(),
        "ci95": {k: list(v) for k, v in report.ci.items()},
        "config": cfg.to_dict(),
        "build": report.build_tag,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def emit_report(report: MetricsReport, out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"summary": out / SUMMARY_FILE, "samples": out / SAMPLES_FILE, "cdf": out / CDF_FILE}

    paths["summary"].write_text(json.dumps(summary_dict(report), indent=2, sort_keys=True) + "\n",
                                encoding="utf-8")
    _write_csv(paths["samples"], SAMPLE_COLUMNS, (
        (s.drop, s.cell, s.ue_id, s.kind, s.modulation.value, repr(s.sinr_db), repr(s.mi_bits),
         repr(s.rate_bps))
        for s in report.samples
    ))
    _write_csv(paths["cdf"], CDF_COLUMNS, ((repr(r), repr(f)) for r, f in report.cdf))
    return paths


def comparison_dict(all_qam: MetricsReport, hybrid: MetricsReport) -> dict:
    """Absolute and relative hybrid-minus-all-QAM deltas for each headline metric."""
    delta = {}
    for key, base in all_qam.metrics().items():
        new = hybrid.metrics()[key]
        delta[key] = {
            "all_qam": base,
            "hybrid": new,
            "delta": new - base,
            "relative": (new - base) / base if base else None,
            "all_qam_ci95": list(all_qam.ci[key]),
            "hybrid_ci95": list(hybrid.ci[key]),
        }
    return {
        "scenario": all_qam.config.scenario,
        "seed": all_qam.seed,
        "n_drops": all_qam.config.mc.n_drops,
        "metrics": delta,
        "build": hybrid.build_tag,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
