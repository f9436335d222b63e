"""
Insert-once memo tables.

Quadrature rules, harmonic bases and multiplier sequences are expensive to
build and immutable once built. Each lives in an InsertOnceTable: the first
caller for a key builds the value under the table lock, every later caller
gets the same object back.
"""

import logging
import threading
from typing import Any, Callable, Hashable, Optional

log = logging.getLogger("sphere-multipliers.cache")


class InsertOnceTable:
    """
    Thread-safe memo table where every key is written at most once.

    Usage:
        table = InsertOnceTable("gauss_legendre")
        rule = table.get_or_create(64, lambda: build_rule(64))
    """

    def __init__(self, name: str):
        self.name = name
        self._values: dict[Hashable, Any] = {}
        self._lock = threading.RLock()

    def get_or_create(self, key: Hashable, factory: Callable[[], Any]) -> Any:
        """Return the value for key, building it with factory on first use."""
        value = self._values.get(key, _MISSING)
        if value is not _MISSING:
            return value

        with self._lock:
            value = self._values.get(key, _MISSING)
            if value is _MISSING:
                value = factory()
                self._values[key] = value
                log.debug(f"{self.name}: cached {key!r}, total: {len(self._values)}")
        return value

    def __contains__(self, key: Hashable) -> bool:
        return key in self._values

    def __len__(self) -> int:
        return len(self._values)

    def clear(self) -> None:
        """Drop every entry (tests and long campaigns only)."""
        with self._lock:
            self._values.clear()


_MISSING = object()


class CacheRegistry:
    """
    Singleton registry of named tables so campaigns can report and clear them.
    """

    _instance = None
    _lock = threading.Lock()

    def __new__(cls):
        if cls._instance is None:
            with cls._lock:
                if cls._instance is None:
                    cls._instance = super().__new__(cls)
                    cls._instance._initialized = False
        return cls._instance

    def __init__(self):
        if self._initialized:
            return

        self._tables: dict[str, InsertOnceTable] = {}
        self._tables_lock = threading.Lock()
        self._initialized = True

    def table(self, name: str) -> InsertOnceTable:
        """Get (or create) the shared table with this name."""
        with self._tables_lock:
            if name not in self._tables:
                self._tables[name] = InsertOnceTable(name)
            return self._tables[name]

    def stats(self) -> dict[str, int]:
        with self._tables_lock:
            return {name: len(table) for name, table in sorted(self._tables.items())}

    def clear(self) -> None:
        with self._tables_lock:
            for table in self._tables.values():
                table.clear()


# Global instance
_registry: Optional[CacheRegistry] = None


def get_cache_registry() -> CacheRegistry:
    """Get the global CacheRegistry instance."""
    global _registry
    if _registry is None:
        _registry = CacheRegistry()
    return _registry


def shared_table(name: str) -> InsertOnceTable:
    return get_cache_registry().table(name)
