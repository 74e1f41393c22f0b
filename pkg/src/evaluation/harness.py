"""
Batch evaluation: one reasoning session per example, per-question rows,
accuracy and budget aggregates, JSON and plain-text reports.
"""

import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from rich.console import Console
from rich.table import Table
from rich.text import Text

from ..engine import answer_question
from ..errors import KGTrailError, MissingEntitiesError
from ..graph import KnowledgeGraph
from ..llm import LLMGateway
from ..memory import ExplorationPriors
from ..reasoning import EngineConfig, TraceLog, write_traces
from .dataset import QAExample
from .metrics import f1, hits_at_1

logger = logging.getLogger("kgtrail.eval")

TOPIC_MISSING_REASON = "topic not in graph"


@dataclass
class EvalRow:
    id: str
    question: str
    predicted: List[str] = field(default_factory=list)
    gold: List[str] = field(default_factory=list)
    relations: List[str] = field(default_factory=list)
    score: float = 0.0
    hits: int = 0
    f1: float = 0.0
    calls: int = 0
    tokens: int = 0
    error: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class EvalReport:
    config: Dict[str, Any]
    rows: List[EvalRow]
    aggregates: Dict[str, float]
    traces: List[TraceLog] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "rows": [r.to_dict() for r in self.rows],
            "aggregates": self.aggregates,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _mean(values: Sequence[float]) -> float:
    return float(np.mean(values)) if len(values) else 0.0


def aggregate(rows: Sequence[EvalRow]) -> Dict[str, float]:
    """Hits@1 and F1 in percent; calls and tokens as per-question means, worst case and failure case."""
    calls = [r.calls for r in rows]
    tokens = [r.tokens for r in rows]
    failed = [r for r in rows if r.hits == 0]
    return {
        "questions": len(rows),
        "errors": sum(1 for r in rows if r.error),
        "hits_at_1": round(100.0 * _mean([r.hits for r in rows]), 1),
        "f1": round(100.0 * _mean([r.f1 for r in rows]), 1),
        "mean_calls": round(_mean(calls), 1),
        "mean_tokens": round(_mean(tokens), 1),
        "worst_calls": max(calls, default=0),
        "worst_tokens": max(tokens, default=0),
        "failure_calls": round(_mean([r.calls for r in failed]), 1),
        "failure_tokens": round(_mean([r.tokens for r in failed]), 1),
    }


def evaluate_example(
    example: QAExample,
    graph: KnowledgeGraph,
    config: EngineConfig,
    gateway: LLMGateway,
    hits_mode: str = "top1",
    priors: Optional[ExplorationPriors] = None,
    run_config: Optional[Dict[str, Any]] = None,
) -> Tuple[EvalRow, TraceLog]:
    """Run one example on a fresh per-question gateway. Failures become zero-scored error rows."""
    question_gateway = gateway.for_question(example.id)
    trace = TraceLog(example.id)
    row = EvalRow(id=example.id, question=example.question, gold=list(example.gold_answers))
    try:
        result = answer_question(
            example.question, example.topic_entities, graph, config, question_gateway,
            priors=priors, question_id=example.id, trace=trace, run_config=run_config,
        )
    except MissingEntitiesError as e:
        logger.warning("[%s] %s", example.id, e)
        row.error = TOPIC_MISSING_REASON
    except KGTrailError as e:
        logger.error("[%s] evaluation failed: %s", example.id, e)
        row.error = str(e)
    else:
        answer = result.answer
        row.predicted = list(answer.entities)
        row.relations = list(answer.best_path.sequence.relations) if answer.best_path else []
        row.score = answer.score
        row.hits = hits_at_1(answer, example.gold_answers, hits_mode)
        row.f1 = f1(answer, example.gold_answers)
        if answer.is_empty and answer.diagnostic:
            row.error = answer.diagnostic
    row.calls = question_gateway.ledger.llm_calls
    row.tokens = question_gateway.ledger.total_tokens
    return row, trace


def run_eval(
    dataset: Sequence[QAExample],
    graph: KnowledgeGraph,
    config: EngineConfig,
    gateway: LLMGateway,
    hits_mode: str = "top1",
    parallel: int = 1,
    run_config: Optional[Dict[str, Any]] = None,
    priors: Optional[ExplorationPriors] = None,
) -> EvalReport:
    """
    Evaluate every example; sessions are independent, so `parallel` > 1 runs them on a thread pool.
    Rows and traces come back ordered by example id.
    """
    def work(example: QAExample) -> Tuple[EvalRow, TraceLog]:
        return evaluate_example(example, graph, config, gateway, hits_mode, priors, run_config)

    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel, thread_name_prefix="kgtrail-eval") as pool:
            results = list(pool.map(work, dataset))
    else:
        results = [work(example) for example in dataset]

    results.sort(key=lambda item: item[0].id)
    rows = [row for row, _ in results]
    report = EvalReport(
        config=run_config if run_config is not None else {"engine": config.to_dict(), "hits_mode": hits_mode},
        rows=rows,
        aggregates=aggregate(rows),
        traces=[trace for _, trace in results],
    )
    logger.info(
        "Evaluated %d questions: Hits@1 %.1f, F1 %.1f, %.1f calls/question",
        len(rows), report.aggregates["hits_at_1"], report.aggregates["f1"], report.aggregates["mean_calls"],
    )
    return report


def render_table(report: EvalReport, width: int = 120) -> str:
    """Fixed-width, colourless text rendering of the report."""
    table = Table(title="KGTrail evaluation", show_lines=False)
    for name, justify in (
        ("id", "left"), ("hits", "right"), ("f1", "right"), ("calls", "right"),
        ("tokens", "right"), ("prediction", "left"), ("error", "left"),
    ):
        table.add_column(name, justify=justify)
    for r in report.rows:
        cells = (
            r.id, str(r.hits), f"{r.f1:.3f}", str(r.calls), str(r.tokens),
            ", ".join(r.predicted) or "-", r.error or "",
        )
        table.add_row(*(Text(c) for c in cells))

    summary = Table(title="Aggregates", show_header=True)
    summary.add_column("metric")
    summary.add_column("value", justify="right")
    for key, value in report.aggregates.items():
        summary.add_row(Text(key), Text(str(value)))

    buffer = io.StringIO()
    console = Console(file=buffer, width=width, color_system=None, force_terminal=False, highlight=False, emoji=False)
    console.print(table)
    console.print(summary)
    return buffer.getvalue()


def write_report(
    report: EvalReport,
    json_path: Union[str, Path],
    text_path: Optional[Union[str, Path]] = None,
    trace_path: Optional[Union[str, Path]] = None,
) -> None:
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report.to_json())
    if text_path:
        with open(text_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_table(report))
    if trace_path:
        write_traces(report.traces, trace_path)
