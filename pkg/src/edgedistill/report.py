"""Paradigm summaries, Table-style comparison text, and CSV/JSON emission."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

from .errors import EdgeDistillError, InvalidInputError
from .protocol import Paradigm, RoundReport, SimulationResult

ROUND_COLUMNS = (
    "paradigm", "tau", "round", "uploads", "stream_count", "global_loss",
    "framework_acc", "edge_acc", "rAcc", "avg_delay_ms", "upload_proportion_cumulative",
)


@dataclass(frozen=True)
class ParadigmSummary:
    paradigm: str
    tau: float | None
    upload_proportion: float
    accuracy: float
    avg_delay_s: float
    edge_accuracy: float
    racc: float
    annotation_queries: int
    rounds: int

    def __post_init__(self):
        if not 0.0 <= self.upload_proportion <= 1.0 or not 0.0 <= self.accuracy <= 1.0:
            raise InvalidInputError("proportions and accuracies must lie in [0, 1]")
        if self.paradigm == Paradigm.PURE_EDGE.value and self.upload_proportion != 0.0:
            raise InvalidInputError("pure edge run uploaded samples")
        if self.paradigm == Paradigm.PURE_CLOUD.value and self.upload_proportion != 1.0:
            raise InvalidInputError("pure cloud run kept samples at the edge")

    @classmethod
    def from_result(cls, result: SimulationResult) -> "ParadigmSummary":
        s = result.summary
        return cls(
            paradigm=s["paradigm"], tau=s["tau"], upload_proportion=s["upload_proportion"],
            accuracy=s["accuracy"], avg_delay_s=s["avg_delay_s"], edge_accuracy=s["edge_accuracy"],
            racc=s["racc"], annotation_queries=s["annotation_queries"], rounds=s["rounds"],
        )

    @property
    def label(self) -> str:
        return self.paradigm if self.tau is None else f"{self.paradigm}@{self.tau:g}"


def _fmt(v: float | None, digits: int = 6) -> str:
    return "" if v is None else f"{v:.{digits}f}"


def round_rows(paradigm: str, tau: float | None, reports: Sequence[RoundReport]) -> list[list[str]]:
    rows = []
    for r in reports:
        if r.uploads > r.stream_count:
            raise InvalidInputError(f"round {r.round}: uploads exceed stream count")
        rows.append([
            paradigm, "" if tau is None else f"{tau:g}", str(r.round), str(r.uploads), str(r.stream_count),
            _fmt(r.global_loss, 8), _fmt(r.test_accuracy_framework), _fmt(r.test_accuracy_edge_standalone),
            _fmt(r.racc), f"{r.avg_delay_s * 1e3:.3f}", _fmt(r.upload_proportion_cumulative),
        ])
    return rows


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def summary_document(results: Sequence[SimulationResult], config_echo: dict, seed: int) -> dict:
    return {
        "seed": seed,
        "paradigms": [asdict(ParadigmSummary.from_result(r)) for r in results],
        "config": config_echo,
    }


def emit(results: Sequence[SimulationResult], out_dir, config_echo: dict, seed: int) -> dict[str, Path]:
    """Write ``rounds.csv``, ``racc_trace.csv`` and ``summary.json`` into ``out_dir``."""
    if not results:
        raise InvalidInputError("nothing to emit")
    out = Path(out_dir)
    rows = []
    for res in results:
        rows.extend(round_rows(res.summary["paradigm"], res.summary["tau"], res.reports))

    labels = [ParadigmSummary.from_result(r).label for r in results]
    n_rounds = max(len(r.reports) for r in results)
    trace = []
    for i in range(n_rounds):
        trace.append([str(i + 1)] + [
            _fmt(res.reports[i].racc) if i < len(res.reports) else "" for res in results
        ])

    files = {
        "rounds.csv": _csv_text(ROUND_COLUMNS, rows),
        "racc_trace.csv": _csv_text(["round", *labels], trace),
        "summary.json": json.dumps(summary_document(results, config_echo, seed), indent=2) + "\n",
    }
    written = {}
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            path = out / name
            path.write_text(text)
            written[name] = path
    except OSError as exc:
        raise EdgeDistillError(f"cannot write results to {exc.filename or out}: {exc.strerror}") from exc
    return written


def load_summary(path) -> dict:
    return json.loads(Path(path).read_text())


def comparison_table(summaries: Sequence[ParadigmSummary]) -> str:
    """Plain-text table in the layout of a paradigm comparison."""
    lines = [f"{'Paradigm':<26}{'Upload':>9}{'Accuracy':>10}{'Delay (ms)':>12}"]
    for s in summaries:
        lines.append(f"{s.label:<26}{s.upload_proportion:>9.3f}{s.accuracy * 100:>9.1f}%{s.avg_delay_s * 1e3:>12.3f}")
    return "\n".join(lines)
