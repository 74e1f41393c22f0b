"""
QA datasets: JSON lines, one {"id", "question", "topic_entities", "answers"} object per line.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from ..errors import DatasetError

logger = logging.getLogger("kgtrail.dataset")

REQUIRED_FIELDS = ("id", "question", "topic_entities", "answers")


@dataclass(frozen=True)
class QAExample:
    id: str
    question: str
    topic_entities: Tuple[str, ...]
    gold_answers: Tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "question": self.question,
            "topic_entities": list(self.topic_entities),
            "answers": list(self.gold_answers),
        }


def _string_list(data: dict, key: str, line_number: int) -> Tuple[str, ...]:
    value = data[key]
    if isinstance(value, str):
        value = [value]
    if not isinstance(value, list) or not value or not all(isinstance(v, str) and v for v in value):
        raise DatasetError(f"'{key}' must be a non-empty list of strings", line_number)
    return tuple(dict.fromkeys(value))


def _parse_example(raw: str, line_number: int) -> QAExample:
    try:
        data = json.loads(raw)
    except ValueError as e:
        raise DatasetError(f"invalid JSON: {e}", line_number) from e
    if not isinstance(data, dict):
        raise DatasetError("expected a JSON object", line_number)
    for key in REQUIRED_FIELDS:
        if key not in data:
            raise DatasetError(f"missing field '{key}'", line_number)
    question = data["question"]
    if not isinstance(question, str) or not question.strip():
        raise DatasetError("'question' must be a non-empty string", line_number)
    return QAExample(
        id=str(data["id"]),
        question=question,
        topic_entities=_string_list(data, "topic_entities", line_number),
        gold_answers=_string_list(data, "answers", line_number),
    )


def sample_examples(examples: List[QAExample], size: int, seed: int = 0) -> List[QAExample]:
    """Seeded uniform sample without replacement, kept in file order."""
    if size >= len(examples):
        return list(examples)
    rng = np.random.default_rng(seed)
    picked = sorted(int(i) for i in rng.choice(len(examples), size=size, replace=False))
    return [examples[i] for i in picked]


def load_dataset(
    source: Union[str, Path],
    sample: Optional[int] = None,
    seed: int = 0,
) -> List[QAExample]:
    """
    Raises:
        DatasetError: malformed line, missing field or duplicate id (with line number).
    """
    examples: List[QAExample] = []
    seen = {}
    try:
        with open(source, encoding="utf-8") as fh:
            for line_number, raw in enumerate(fh, start=1):
                if not raw.strip():
                    continue
                example = _parse_example(raw, line_number)
                if example.id in seen:
                    raise DatasetError(
                        f"duplicate id {example.id!r} (first seen at line {seen[example.id]})", line_number
                    )
                seen[example.id] = line_number
                examples.append(example)
    except OSError as e:
        raise DatasetError(f"cannot read dataset {source}: {e}") from e
    if not examples:
        raise DatasetError(f"no examples in {source}")
    if sample is not None:
        if sample < 1:
            raise DatasetError(f"sample size must be positive, got {sample}")
        examples = sample_examples(examples, sample, seed)
    logger.info("Loaded %d examples from %s", len(examples), source)
    return examples
