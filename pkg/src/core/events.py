"""
Event System - Pub/Sub pattern for decoupled progress reporting.

The theory engine and the simulator announce what they are doing without
knowing who listens. The experiment runner subscribes a progress logger;
tests subscribe collectors.
"""

import logging
from enum import Enum, auto
from typing import Callable, Dict, List, Any
from dataclasses import dataclass

logger = logging.getLogger(__name__)


class RunEvent(Enum):
    """Enumeration of all run events."""

    # Run lifecycle
    RUN_STARTED = auto()
    RUN_COMPLETED = auto()

    # Measurements
    RECORD_TAKEN = auto()

    # Simulation trials
    TRIAL_STARTED = auto()
    TRIAL_COMPLETED = auto()

    # Numerical health
    FEASIBILITY_CLAMPED = auto()
    ORACLE_FALLBACK = auto()


@dataclass
class EventData:
    """Container for event data."""
    event_type: RunEvent
    data: Dict[str, Any]
    source: Any = None

    def get(self, key: str, default: Any = None) -> Any:
        """Get a value from the event data."""
        return self.data.get(key, default)


class EventSystem:
    """
    Global event bus using publish/subscribe.

    Usage:
        # Subscribe to an event
        EventSystem.subscribe(RunEvent.RECORD_TAKEN, my_callback)

        # Emit an event
        EventSystem.emit(RunEvent.RECORD_TAKEN, {"t": 0.5})

        # Unsubscribe
        EventSystem.unsubscribe(RunEvent.RECORD_TAKEN, my_callback)
    """

    _subscribers: Dict[RunEvent, List[Callable[[EventData], None]]] = {}
    _event_queue: List[EventData] = []
    _processing: bool = False

    @classmethod
    def subscribe(cls, event_type: RunEvent, callback: Callable[[EventData], None]) -> None:
        """
        Subscribe to an event type.

        Args:
            event_type: The type of event to subscribe to
            callback: Function to call when the event occurs. Receives EventData.
        """
        callbacks = cls._subscribers.setdefault(event_type, [])
        if callback not in callbacks:
            callbacks.append(callback)

    @classmethod
    def unsubscribe(cls, event_type: RunEvent, callback: Callable[[EventData], None]) -> None:
        """Remove a callback; unknown callbacks are ignored."""
        callbacks = cls._subscribers.get(event_type, [])
        if callback in callbacks:
            callbacks.remove(callback)

    @classmethod
    def emit(cls, event_type: RunEvent, data: Dict[str, Any] = None, source: Any = None) -> None:
        """
        Emit an event to all subscribers.

        Events emitted from inside a callback are queued and delivered
        after the current one, in order.

        Args:
            event_type: The type of event to emit
            data: Dictionary of event data
            source: The object that emitted the event
        """
        if event_type not in cls._subscribers and not cls._processing:
            return

        cls._event_queue.append(EventData(event_type=event_type, data=data or {}, source=source))

        if not cls._processing:
            cls._process_queue()

    @classmethod
    def _process_queue(cls) -> None:
        """Process all queued events."""
        cls._processing = True
        try:
            while cls._event_queue:
                event_data = cls._event_queue.pop(0)
                for callback in list(cls._subscribers.get(event_data.event_type, [])):
                    try:
                        callback(event_data)
                    except Exception:
                        logger.exception(f"Error in {event_data.event_type.name} callback")
        finally:
            cls._processing = False

    @classmethod
    def clear(cls) -> None:
        """Clear all subscribers and queued events."""
        cls._subscribers.clear()
        cls._event_queue.clear()
        cls._processing = False
