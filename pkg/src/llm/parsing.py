"""
Lenient parsing of structured model output.
Models wrap literals in prose, so we take the first bracketed list / brace map
that evaluates to the expected shape.
"""

import ast
import json
import logging
import math
import re
from typing import Dict, Iterable, List, Optional

from ..errors import ParseError

logger = logging.getLogger("kgtrail.parsing")

_LIST_RE = re.compile(r"\[[^\[\]]*\]")
_MAP_RE = re.compile(r"\{[^{}]*\}")


def _literal(text: str):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError, MemoryError, RecursionError):
        pass
    try:
        return json.loads(text)
    except ValueError:
        return None


def _first_string_list(text: str) -> Optional[List[str]]:
    for match in _LIST_RE.finditer(text):
        value = _literal(match.group(0))
        if isinstance(value, list) and all(isinstance(v, str) for v in value):
            return value
    return None


def parse_relation_list(text: str, allowed: Iterable[str], k: int) -> List[str]:
    """
    First list of quoted strings in `text`, restricted to `allowed`,
    deduplicated, in model order, truncated to k.

    Raises:
        ParseError: no bracketed list of strings found.
    """
    items = _first_string_list(text)
    if items is None:
        raise ParseError(f"no relation list found in model output: {text[:120]!r}")
    allowed_set = set(allowed)
    result: List[str] = []
    for item in items:
        relation = item.strip()
        if relation not in allowed_set:
            logger.warning("Dropping relation outside the neighborhood: %s", relation)
            continue
        if relation not in result:
            result.append(relation)
    return result[:k]


def _clamp(value: float) -> float:
    return min(1.0, max(0.0, value))


def parse_score_map(text: str, candidates: Iterable[str]) -> Dict[str, float]:
    """
    First brace-delimited map of quoted keys to numbers in `text`.
    Values are clamped into [0, 1]; keys outside `candidates` are dropped;
    candidates absent from the map score 0.0. Result follows `candidates` order.

    Raises:
        ParseError: no brace-delimited map found.
    """
    parsed = None
    for match in _MAP_RE.finditer(text):
        value = _literal(match.group(0))
        if isinstance(value, dict) and all(isinstance(key, str) for key in value):
            parsed = value
            break
    if parsed is None:
        raise ParseError(f"no score map found in model output: {text[:120]!r}")

    cleaned: Dict[str, float] = {}
    for key, value in parsed.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)) or math.isnan(value):
            logger.warning("Ignoring non-numeric score for %s: %r", key, value)
            continue
        cleaned[key.strip()] = _clamp(float(value))

    ordered = list(dict.fromkeys(candidates))
    dropped = set(cleaned) - set(ordered)
    if dropped:
        logger.warning("Dropping scores for relations that were not candidates: %s", sorted(dropped))
    return {c: cleaned.get(c, 0.0) for c in ordered}


def unwrap_text(text: str) -> str:
    """Strip whitespace, a surrounding code fence and one pair of matching quotes."""
    text = text.strip()
    if text.startswith("```"):
        lines = text.splitlines()
        if len(lines) >= 3 and lines[-1].strip().startswith("```"):
            text = "\n".join(lines[1:-1]).strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in ('"', "'"):
        text = text[1:-1].strip()
    return text
