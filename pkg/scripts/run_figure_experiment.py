"""
Run the retention experiment across weighting and outcome-definition variants.

    python scripts/run_figure_experiment.py --config configs/default.yaml --out-dir results/

Writes metrics_<variant>.csv and report_<variant>.yaml per variant and prints
one summary line each.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from cli.io import emit_metrics_csv, emit_report
from optimizer.config import RunConfig, load_config
from optimizer.schemas.simulation import ComparisonReport, SimulationConfig
from sim.harness import run_variants
from sim.report import compare_mechanisms

logger = logging.getLogger("figure_experiment")

VARIANTS = [
    ("weighted_clicks", True, "click-sampled"),
    ("unweighted_clicks", False, "click-sampled"),
    ("weighted_slots", True, "slot-allocated"),
    ("unweighted_slots", False, "slot-allocated"),
]


def variant_configs(base: SimulationConfig) -> Dict[str, SimulationConfig]:
    return {
        name: base.model_copy(update={"weighting": weighting, "outcome": outcome})
        for name, weighting, outcome in VARIANTS
    }


def run_experiment(base: SimulationConfig, out_dir: Optional[Path] = None) -> Dict[str, ComparisonReport]:
    """Simulate every variant over shared seeds; write its metrics and report under out_dir when given."""
    reports: Dict[str, ComparisonReport] = {}
    for name, table in run_variants(variant_configs(base)).items():
        report = compare_mechanisms(table)
        reports[name] = report
        if out_dir is not None:
            emit_metrics_csv(table, out_dir / f"metrics_{name}.csv")
            emit_report(report, out_dir / f"report_{name}.yaml")
        logger.info("%s: overtakes=%s at round %s", name, report.coop_overtakes, report.overtaking_round)
    return reports


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Weighting x outcome-definition retention experiment")
    parser.add_argument("--config", help="YAML run configuration (defaults when omitted)")
    parser.add_argument("--out-dir", default="results", help="Directory for CSV and report files")
    parser.add_argument("--seeds", type=int, help="Override the seed count")
    parser.add_argument("--rounds", type=int, help="Override the round count")
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")

    config = load_config(args.config) if args.config else RunConfig()
    base = config.simulation_config()
    update = {"workers": args.workers}
    if args.seeds:
        update["seeds"] = args.seeds
    if args.rounds:
        update["rounds"] = args.rounds
    base = base.model_copy(update=update)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, report in run_experiment(base, out_dir).items():
        print(
            f"{name}: final revenue coop={report.final_cum_revenue['coop-optimizer']:.3f} "
            f"gsp={report.final_cum_revenue['gsp-truthful']:.3f}, "
            f"overtaking round={report.overtaking_round}, "
            f"coop retains no fewer={report.coop_retains_no_fewer}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
