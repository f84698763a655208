"""Command-line entry point: ``fqam-sim simulate`` and ``fqam-sim compare``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .harness.campaign import run_campaign
from .harness.config import SCENARIOS, SimConfig, from_dict, load_config
from .harness.report import comparison_dict, emit_report

log = logging.getLogger("fqamsim")


def _mode(text: str) -> str:
    mode = text.replace("-", "_")
    if mode not in ("all_qam", "hybrid"):
        raise argparse.ArgumentTypeError(f"mode must be all-qam or hybrid, got {text!r}")
    return mode


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="YAML config file (defaults if omitted)")
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--drops", type=int, help="number of Monte Carlo drops")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.add_argument("--out", type=Path, required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fqam-sim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    sim = sub.add_parser("simulate", help="run one campaign")
    _common(sim)
    sim.add_argument("--mode", type=_mode)
    cmp_ = sub.add_parser("compare", help="run all-QAM and hybrid on the same seed")
    _common(cmp_)
    return parser


def _resolve_config(args) -> SimConfig:
    cfg = load_config(args.config) if args.config else from_dict({})
    changes = {}
    if args.scenario:
        changes["scenario"] = args.scenario
    if getattr(args, "mode", None):
        changes["mode"] = args.mode
    if args.drops is not None:
        changes["mc.n_drops"] = args.drops
    if args.seed is not None:
        changes["mc.seed"] = args.seed
    return cfg.replace(**changes) if changes else cfg


def _print_metrics(label: str, report) -> None:
    m = report.metrics()
    print(f"{label:8s} p5={m['p5'] / 1e6:9.3f} Mbit/s  mean={m['mean'] / 1e6:9.3f} Mbit/s  "
          f"p95={m['p95'] / 1e6:9.3f} Mbit/s")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _resolve_config(args)
        if args.command == "simulate":
            report = run_campaign(cfg, workers=args.workers)
            emit_report(report, args.out)
            _print_metrics(cfg.mode, report)
        else:
            reports = {}
            for mode in ("all_qam", "hybrid"):
                log.info("running %s/%s with %d drops", cfg.scenario, mode, cfg.mc.n_drops)
                reports[mode] = run_campaign(cfg.replace(mode=mode), workers=args.workers)
                emit_report(reports[mode], args.out / mode)
                _print_metrics(mode, reports[mode])
            summary = comparison_dict(reports["all_qam"], reports["hybrid"])
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / "comparison.json").write_text(
                json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except Exception as exc:
        print(f"fqam-sim: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
