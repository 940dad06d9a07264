"""Corpus evaluation: score generated-vs-target pipeline pairs in bulk.

Input is a JSON list of {instruction, tag, target, generated} entries where
both graphs use the pipeline wire format. Output is a per-pair table plus
mean ± standard deviation of the interaction ratio per tag and overall.
"""

from __future__ import annotations

import csv
import json
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .graph import SerializedGraph, graph_from_dict
from .metric import interactions
from .prompts import PipelineTag
from .registry import Registry

TAG_ORDER = [t.value for t in PipelineTag]


@dataclass
class CorpusPair:
    instruction: str
    tag: str
    target: SerializedGraph
    generated: SerializedGraph


@dataclass
class PairResult:
    instruction: str
    tag: str
    count: int
    from_scratch: int
    ratio: float


@dataclass
class Aggregate:
    n: int
    mean: float
    std: float


@dataclass
class CorpusReport:
    pairs: list[PairResult]
    by_tag: dict[str, Aggregate]
    overall: Aggregate
    cascade: bool = True


def load_corpus(path: str | Path) -> list[CorpusPair]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, list):
        raise ValueError("corpus file must contain a JSON list")
    pairs = []
    for i, entry in enumerate(raw):
        try:
            pairs.append(
                CorpusPair(
                    instruction=entry["instruction"],
                    tag=entry["tag"],
                    target=graph_from_dict(entry["target"]),
                    generated=graph_from_dict(entry["generated"]),
                )
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"corpus entry {i} is malformed: {exc}") from exc
    return pairs


def _aggregate(ratios: list[float]) -> Aggregate:
    if not ratios:
        return Aggregate(n=0, mean=0.0, std=0.0)
    mean = statistics.fmean(ratios)
    std = statistics.pstdev(ratios) if len(ratios) > 1 else 0.0
    return Aggregate(n=len(ratios), mean=mean, std=std)


def evaluate_corpus(
    pairs: list[CorpusPair],
    *,
    registry: Registry | None = None,
    cascade: bool = True,
) -> CorpusReport:
    results = []
    for pair in pairs:
        report = interactions(
            pair.generated, pair.target, registry=registry, cascade=cascade
        )
        results.append(
            PairResult(
                instruction=pair.instruction,
                tag=pair.tag,
                count=report.count,
                from_scratch=report.from_scratch,
                ratio=report.ratio,
            )
        )

    by_tag = {}
    for tag in TAG_ORDER:
        ratios = [r.ratio for r in results if r.tag == tag]
        if ratios:
            by_tag[tag] = _aggregate(ratios)
    overall = _aggregate([r.ratio for r in results])
    return CorpusReport(pairs=results, by_tag=by_tag, overall=overall, cascade=cascade)


def report_to_dict(report: CorpusReport) -> dict[str, Any]:
    def agg(a: Aggregate) -> dict[str, Any]:
        return {"n": a.n, "meanRatio": a.mean, "stdRatio": a.std}

    return {
        "cascade": report.cascade,
        "pairs": [
            {
                "instruction": r.instruction,
                "tag": r.tag,
                "count": r.count,
                "fromScratch": r.from_scratch,
                "ratio": r.ratio,
            }
            for r in report.pairs
        ],
        "byTag": {tag: agg(a) for tag, a in report.by_tag.items()},
        "overall": agg(report.overall),
    }


def write_csv(report: CorpusReport, path: str | Path) -> None:
    """Per-pair rows followed by aggregate rows (overall first, then per tag)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instruction", "tag", "count", "from_scratch", "ratio"])
        for r in report.pairs:
            writer.writerow(
                [r.instruction, r.tag, r.count, r.from_scratch, f"{r.ratio:.4f}"]
            )
        writer.writerow([])
        writer.writerow(["scope", "n", "mean_ratio", "std_ratio", "mean_pm_std"])
        writer.writerow(
            [
                "overall",
                report.overall.n,
                f"{report.overall.mean:.4f}",
                f"{report.overall.std:.4f}",
                format_pm(report.overall),
            ]
        )
        for tag in TAG_ORDER:
            if tag in report.by_tag:
                a = report.by_tag[tag]
                writer.writerow(
                    [tag, a.n, f"{a.mean:.4f}", f"{a.std:.4f}", format_pm(a)]
                )


def format_pm(agg: Aggregate) -> str:
    return f"{agg.mean * 100:.1f} ± {agg.std * 100:.1f}%"


def format_table(report: CorpusReport) -> str:
    """Human summary: one aggregate column per scope, mean ± std."""
    scopes = [("Overall", report.overall)]
    scopes.extend(
        (tag.capitalize(), report.by_tag[tag])
        for tag in TAG_ORDER
        if tag in report.by_tag
    )
    header = "  ".join(f"{name:>14}" for name, _ in scopes)
    values = "  ".join(f"{format_pm(a):>14}" for _, a in scopes)
    return header + "\n" + values
