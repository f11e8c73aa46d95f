# src/core/atomics.py
"""Word-sized shared cells for the level array, descriptors and batch counter.

Loads and stores of a single list slot are indivisible in CPython, so plain
loads never observe a torn value. CPython exposes no hardware
compare-and-swap, so conditional updates serialize on a small set of striped
locks. Every store that may race with a conditional update goes through the
same stripe, which keeps a conditional update from resurrecting a value that
was overwritten after it was compared.
"""

import threading
from collections.abc import Callable

_STRIPES = 64


class AtomicWordArray:
    """Fixed-length array of integer words with atomic load/store/CAS."""

    __slots__ = ("_locks", "_words")

    def __init__(self, length: int, initial: int = 0) -> None:
        self._words = [initial] * length
        self._locks = tuple(threading.Lock() for _ in range(_STRIPES))

    def __len__(self) -> int:
        return len(self._words)

    def load(self, index: int) -> int:
        return self._words[index]

    def store(self, index: int, value: int) -> None:
        with self._locks[index % _STRIPES]:
            self._words[index] = value

    def store_unguarded(self, index: int, value: int) -> None:
        """Store for slots that are never the target of compare_and_set."""
        self._words[index] = value

    def compare_and_set(self, index: int, expected: int, desired: int) -> bool:
        with self._locks[index % _STRIPES]:
            if self._words[index] != expected:
                return False
            self._words[index] = desired
            return True

    def try_compare_and_set(
        self,
        index: int,
        expected: int,
        desired: int,
        guard: Callable[[], bool] | None = None,
    ) -> bool:
        """Non-blocking variant: gives up if the stripe is busy.

        ``guard`` runs while the stripe is held; the update happens only if it
        returns true.
        """
        lock = self._locks[index % _STRIPES]
        if not lock.acquire(blocking=False):
            return False
        try:
            if self._words[index] != expected or (guard is not None and not guard()):
                return False
            self._words[index] = desired
            return True
        finally:
            lock.release()

    def snapshot(self) -> list[int]:
        return list(self._words)


class AtomicCounter:
    """Monotone counter with atomic increment and lock-free load."""

    __slots__ = ("_lock", "_value")

    def __init__(self, initial: int = 0) -> None:
        self._value = initial
        self._lock = threading.Lock()

    def load(self) -> int:
        return self._value

    def increment(self) -> int:
        with self._lock:
            self._value += 1
            return self._value
