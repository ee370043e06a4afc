"""Non-fatal event collection shared by all pipeline stages."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Event:
    stage: str
    kind: str
    detail: str


@dataclass
class Diagnostics:
    """Ordered log of skipped records, retries, quarantines and anomalies."""

    events: list[Event] = field(default_factory=list)

    def note(self, stage: str, kind: str, detail: str = "") -> None:
        logger.debug("%s/%s: %s", stage, kind, detail)
        self.events.append(Event(stage, kind, detail))

    def count(self, kind: str | None = None, stage: str | None = None) -> int:
        return sum(
            1
            for e in self.events
            if (kind is None or e.kind == kind) and (stage is None or e.stage == stage)
        )

    def counts(self) -> dict[str, int]:
        c = Counter(f"{e.stage}.{e.kind}" for e in self.events)
        return dict(sorted(c.items()))

    def extend(self, other: "Diagnostics") -> None:
        self.events.extend(other.events)

    def to_dict(self) -> dict:
        return {
            "counts": self.counts(),
            "events": [[e.stage, e.kind, e.detail] for e in self.events],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Diagnostics":
        return cls([Event(*e) for e in data.get("events", [])])

    def __len__(self) -> int:
        return len(self.events)
