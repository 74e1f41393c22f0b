"""Answer metrics: Hits@1 and set F1 over entity identifiers (NFC-normalized exact match)."""

import unicodedata
from typing import Iterable, List, Sequence, Set, Union

from ..errors import ContractViolation

HITS_MODES = ("top1", "any")


def normalize(entity: str) -> str:
    return unicodedata.normalize("NFC", entity)


def _entities(predicted) -> List[str]:
    # AnswerSet or a plain sequence of entity ids
    items = getattr(predicted, "entities", predicted)
    return [normalize(e) for e in items]


def _gold(gold: Iterable[str]) -> Set[str]:
    return {normalize(g) for g in gold}


def hits_at_1(predicted: Union[Sequence[str], object], gold: Iterable[str], mode: str = "top1") -> int:
    """1 if the top predicted entity is gold ('any': if any predicted entity is gold)."""
    entities = _entities(predicted)
    if not entities:
        return 0
    gold_set = _gold(gold)
    if mode == "any":
        return int(any(e in gold_set for e in entities))
    if mode != "top1":
        raise ContractViolation(f"unknown hits mode {mode!r}")
    return int(entities[0] in gold_set)


def f1(predicted: Union[Iterable[str], object], gold: Iterable[str]) -> float:
    gold_set = _gold(gold)
    if not gold_set:
        raise ContractViolation("f1 needs a non-empty gold set")
    pred_set = set(_entities(predicted))
    if not pred_set:
        return 0.0
    hit = len(pred_set & gold_set)
    precision = hit / len(pred_set)
    recall = hit / len(gold_set)
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)
