"""Frontier cache interface and in-memory implementation.

Frontiers are keyed by a SHA-256 fingerprint of the canonical JSON of the
instance and section documents, so identical requests share one envelope
computation.
"""

from __future__ import annotations

import hashlib
import json
import threading
from abc import ABC, abstractmethod
from collections import OrderedDict
from typing import Dict, Mapping

from pydantic import BaseModel

from isec.domain.constants import Frontier


def fingerprint(*documents: BaseModel) -> str:
    """SHA-256 of the documents' canonical JSON (sorted keys, no whitespace)."""
    payload = [doc.model_dump(mode="json") for doc in documents]
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class Cache(ABC):
    """Abstract cache of computed frontiers."""

    @abstractmethod
    def get(self, key: str) -> Frontier | None:
        """Return a cached frontier by key, or None if it doesn't exist."""

    @abstractmethod
    def set(self, key: str, value: Frontier) -> None:
        """Store a frontier."""

    @abstractmethod
    def exists(self, key: str) -> bool:
        """Return True if the key exists in the cache."""

    @abstractmethod
    def clear(self) -> None:
        """Clear all items from the cache."""

    @abstractmethod
    def get_all(self) -> Dict[str, Frontier]:
        """Return all cached items as a dict copy."""


class FrontierCache(Cache):
    """In-memory cache shared by the HTTP workers of one process.

    Holds at most ``max_entries`` frontiers and evicts the least recently used.
    """

    def __init__(
        self, initial: Mapping[str, Frontier] | None = None, max_entries: int = 1024
    ) -> None:
        if max_entries < 1:
            raise ValueError("max_entries must be at least 1")
        self._max_entries = max_entries
        self._store: OrderedDict[str, Frontier] = OrderedDict()
        self._lock = threading.Lock()
        for key, value in (initial or {}).items():
            self.set(key, value)

    def get(self, key: str) -> Frontier | None:
        with self._lock:
            value = self._store.get(key)
            if value is not None:
                self._store.move_to_end(key)
            return value

    def set(self, key: str, value: Frontier) -> None:
        with self._lock:
            self._store[key] = value
            self._store.move_to_end(key)
            while len(self._store) > self._max_entries:
                self._store.popitem(last=False)

    def exists(self, key: str) -> bool:
        with self._lock:
            return key in self._store

    def clear(self) -> None:
        with self._lock:
            self._store.clear()

    def get_all(self) -> Dict[str, Frontier]:
        with self._lock:
            return dict(self._store)
