"""
Trace log: ordered lifecycle events of one reasoning session, serialized as JSON lines.
Events carry a sequence number instead of wall-clock time, so identical runs give identical traces.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, List, Optional, Union

logger = logging.getLogger("kgtrail.trace")

EVENT_CONFIG = "config"
EVENT_CREATED = "created"
EVENT_EXPANDED = "expanded"
EVENT_TERMINATED = "terminated"
EVENT_SUMMARIZED = "summarized"
EVENT_CONSOLIDATED = "consolidated"
EVENT_DEGRADED = "degraded"
EVENT_ANSWER = "answer"


@dataclass
class TraceEvent:
    seq: int
    event: str
    question_id: str
    payload: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"seq": self.seq, "event": self.event, "question_id": self.question_id, **self.payload}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)


class TraceLog:
    """
    Collects events for one question; an optional sink receives each event as it is recorded.
    """

    def __init__(self, question_id: str = "", sink: Optional[Callable[[TraceEvent], None]] = None):
        self._question_id = question_id
        self._sink = sink
        self._events: List[TraceEvent] = []

    @property
    def events(self) -> List[TraceEvent]:
        return list(self._events)

    def record(self, event: str, **payload) -> TraceEvent:
        entry = TraceEvent(seq=len(self._events), event=event, question_id=self._question_id, payload=payload)
        self._events.append(entry)
        logger.debug("[%s] %s %s", self._question_id, event, payload)
        if self._sink:
            try:
                self._sink(entry)
            except Exception as e:
                logger.exception("Trace sink error: %s", e)
        return entry

    def of_kind(self, event: str) -> List[TraceEvent]:
        return [e for e in self._events if e.event == event]

    def to_lines(self) -> List[str]:
        return [e.to_json() for e in self._events]


def write_traces(traces: Iterable[TraceLog], path: Union[str, Path]) -> None:
    """Concatenate traces into one JSON-lines file, in the given order."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for trace in traces:
            for line in trace.to_lines():
                fh.write(line + "\n")
