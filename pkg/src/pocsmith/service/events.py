"""In-process event bus feeding the server-sent-events stream.

Every published event is also persisted by its producer (run records,
job files), so the stream is a convenience view, never the only copy.
"""

from __future__ import annotations

import json
import queue
import threading
from dataclasses import dataclass, field


@dataclass
class EventBus:
    _subscribers: list[queue.Queue] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def publish(self, event_type: str, payload: dict) -> None:
        with self._lock:
            targets = list(self._subscribers)
        for q in targets:
            q.put((event_type, payload))


def sse_format(event_type: str, payload: dict) -> str:
    return f"event: {event_type}\ndata: {json.dumps(payload)}\n\n"
