"""Result emitters: metrics CSV, profile and report YAML, game and vector listings. Output is byte-deterministic."""

import csv
import io
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml

from optimizer.errors import OutputError
from optimizer.schemas.game import CharacteristicGame, UtilityVector, format_coalition
from optimizer.schemas.profile import DeviationReport, MappingResult
from optimizer.schemas.simulation import ComparisonReport, MetricsTable

METRICS_HEADER = ["round", "mechanism", "mean_cum_revenue", "mean_active_bidders", "mean_round_revenue"]
DOCUMENT_VERSION = 1

PathLike = Union[str, Path]


def fmt6(value: float) -> str:
    text = f"{value:.6f}"
    return "0.000000" if text == "-0.000000" else text


def _write(path: PathLike, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}") from e


def format_metrics_csv(table: MetricsTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(METRICS_HEADER)
    for r in table.rows:
        writer.writerow([
            r.round,
            r.mechanism,
            fmt6(r.mean_cum_revenue),
            fmt6(r.mean_active_bidders),
            fmt6(r.mean_round_revenue),
        ])
    return buf.getvalue()


def emit_metrics_csv(table: MetricsTable, path: PathLike) -> None:
    _write(path, format_metrics_csv(table))


def _report_document(report: DeviationReport) -> Dict[str, Any]:
    return {
        "grid": report.grid,
        "max_gain": report.max_gain,
        "expected_gain": report.expected_gain,
        "entries": [
            {
                "members": e.coalition,
                "probability": e.probability,
                "max_gain": e.max_gain,
                "deviator": e.deviator,
                "deviation_bid": e.deviation_bid,
            }
            for e in report.entries
        ],
    }


def profile_document(result: MappingResult, report: Optional[DeviationReport] = None) -> Dict[str, Any]:
    """Nucleolus, residuals, objective and entries by descending probability then winning set."""
    profile = result.profile
    doc: Dict[str, Any] = {
        "schema_version": DOCUMENT_VERSION,
        "players": list(result.player_ids),
        "nucleolus": list(result.x),
        "residuals": list(result.residuals),
        "objective": result.objective,
        "weighting": result.weighting,
        "expected_revenue": profile.expected_revenue,
        "expected_utility": {pid: profile.expected_utility[pid] for pid in sorted(profile.expected_utility)},
        "entries": [
            {
                "members": e.coalition,
                "probability": e.probability,
                "slot_order": e.lef.members,
                "bids": e.lef.bids,
                "payments": e.lef.payments,
            }
            for e in profile.sorted_entries()
        ],
    }
    if report is not None:
        doc["equilibrium_report"] = _report_document(report)
    return doc


def format_profile(result: MappingResult, report: Optional[DeviationReport] = None) -> str:
    return yaml.safe_dump(profile_document(result, report), sort_keys=False, default_flow_style=None)


def emit_profile(result: MappingResult, path: PathLike, report: Optional[DeviationReport] = None) -> None:
    _write(path, format_profile(result, report))


def format_report(report: ComparisonReport) -> str:
    return yaml.safe_dump(report.model_dump(mode="json"), sort_keys=False, default_flow_style=False)


def emit_report(report: ComparisonReport, path: PathLike) -> None:
    _write(path, format_report(report))


def format_vector(x: UtilityVector, labels: List[int]) -> str:
    """One `player value` line per player."""
    return "".join(f"{pid} {fmt6(v)}\n" for pid, v in zip(labels, x.x))


def format_game(game: CharacteristicGame) -> str:
    """One `{members} value` line per coalition, in bitmask order."""
    labels = game.labels
    return "".join(
        f"{format_coalition(mask, labels)} {fmt6(value)}\n" for mask, value in enumerate(game.values)
    )
