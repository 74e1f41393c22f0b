"""Hyperparameter grid over (k, L, threshold) with one evaluation per point."""

import csv
import itertools
import json
import logging
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from ..graph import KnowledgeGraph
from ..llm import LLMGateway
from ..reasoning import EngineConfig
from .dataset import QAExample
from .harness import run_eval

logger = logging.getLogger("kgtrail.sweep")

SWEEP_COLUMNS = ["k", "max_depth", "threshold", "hits_at_1", "f1", "mean_calls", "mean_tokens"]

DEFAULT_KS = (2, 3, 4, 5)
DEFAULT_DEPTHS = (2, 3, 4, 5)
DEFAULT_THRESHOLDS = (0.4, 0.5, 0.6, 0.7)


def sweep_grid(
    ks: Optional[Sequence[int]] = None,
    depths: Optional[Sequence[int]] = None,
    thresholds: Optional[Sequence[float]] = None,
) -> Tuple[List[int], List[int], List[float]]:
    """Axis values actually swept; an empty or missing axis falls back to its default."""
    return (
        list(ks) if ks else list(DEFAULT_KS),
        list(depths) if depths else list(DEFAULT_DEPTHS),
        list(thresholds) if thresholds else list(DEFAULT_THRESHOLDS),
    )


def run_sweep(
    dataset: Sequence[QAExample],
    graph: KnowledgeGraph,
    base: EngineConfig,
    gateway: LLMGateway,
    ks: Optional[Sequence[int]] = None,
    depths: Optional[Sequence[int]] = None,
    thresholds: Optional[Sequence[float]] = None,
    hits_mode: str = "top1",
    parallel: int = 1,
) -> List[Dict[str, float]]:
    """
    One row per grid point, k outermost and threshold innermost.
    An axis left as None sweeps its default grid (k and L over 2..5, threshold over 0.4..0.7).
    """
    ks, depths, thresholds = sweep_grid(ks, depths, thresholds)

    rows: List[Dict[str, float]] = []
    for k, depth, threshold in itertools.product(ks, depths, thresholds):
        config = replace(base, candidates_k=k, max_depth=depth, threshold=threshold)
        report = run_eval(dataset, graph, config, gateway, hits_mode=hits_mode, parallel=parallel)
        agg = report.aggregates
        rows.append({
            "k": k,
            "max_depth": depth,
            "threshold": threshold,
            "hits_at_1": agg["hits_at_1"],
            "f1": agg["f1"],
            "mean_calls": agg["mean_calls"],
            "mean_tokens": agg["mean_tokens"],
        })
        logger.info("Sweep point k=%d L=%d zeta=%s: Hits@1 %.1f F1 %.1f", k, depth, threshold, agg["hits_at_1"], agg["f1"])
    return rows


def sweep_config_path(csv_path: Union[str, Path]) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.name + ".config.json")


def write_sweep_csv(
    rows: Sequence[Dict[str, float]],
    path: Union[str, Path],
    run_config: Optional[Dict[str, Any]] = None,
) -> None:
    """
    Write the grid rows as CSV. With `run_config`, the effective configuration
    goes to `<path>.config.json` alongside it.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    if run_config is not None:
        with open(sweep_config_path(path), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(run_config, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
