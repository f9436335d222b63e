"""
Structured event emitter.

Default: JSON lines to stderr, one per event, distinguishable from log lines
and never mixed into stdout artifacts. Extensible: add_handler() registers
further transports.

Event format:
    {"event_type": "...", "timestamp": "...", "source": {"tool": "..."}, "data": {...}}
"""

import json
import logging
import sys
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List, Optional

logger = logging.getLogger("sphere-multipliers.emit")

EventHandler = Callable[[dict], None]

EVENT_CATALOG = [
    {"event_type": "config.resolved", "data_fields": ["config_path", "command", "seed", "workers"]},
    {"event_type": "check.completed", "data_fields": ["check", "pass", "residual_or_margin"]},
    {"event_type": "artifact.written", "data_fields": ["path", "format", "rows"]},
    {"event_type": "run.failed", "data_fields": ["command", "error_type", "message", "exit_code"]},
]

_handlers: List[EventHandler] = []
_source: str = "sphere-multipliers"
_enabled: bool = True


def configure(source: str, enabled: bool = True) -> None:
    """Set the source name and whether stderr events are written. Call once at startup."""
    global _source, _enabled
    _source = source
    _enabled = enabled


def add_handler(handler: EventHandler) -> None:
    _handlers.append(handler)


def remove_handler(handler: EventHandler) -> None:
    if handler in _handlers:
        _handlers.remove(handler)


def emit(
    event_type: str,
    data: Dict[str, Any],
    source: Optional[str] = None,
) -> None:
    """
    Emit a structured event.

    Writes one JSON line to stderr unless disabled; registered handlers
    always receive the same event dict.
    """
    event = {
        "event_type": event_type,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "source": {
            "tool": source or _source,
        },
        "data": data,
    }

    if _enabled:
        try:
            print(json.dumps(event, default=str, sort_keys=True), file=sys.stderr, flush=True)
        except (TypeError, ValueError, OSError):
            pass

    for handler in _handlers:
        try:
            handler(event)
        except Exception as exc:
            logger.debug("Event handler error: %s", exc)
