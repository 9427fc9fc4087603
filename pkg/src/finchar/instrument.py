"""Per-solve multiplication counting.

The counter lives in a context variable so concurrent solves (threads or
asyncio tasks) each see their own count.
"""
from __future__ import annotations

from contextlib import contextmanager
from contextvars import ContextVar
from typing import Iterator, Optional


class MulCounter:
    __slots__ = ("count",)

    def __init__(self) -> None:
        self.count = 0

    def __repr__(self):
        return f"MulCounter({self.count})"


_active: ContextVar[Optional[MulCounter]] = ContextVar("finchar_mul_counter", default=None)


def note_mul(k: int = 1) -> None:
    c = _active.get()
    if c is not None:
        c.count += k


@contextmanager
def count_multiplications(counter: MulCounter | None = None) -> Iterator[MulCounter]:
    counter = counter if counter is not None else MulCounter()
    token = _active.set(counter)
    try:
        yield counter
    finally:
        _active.reset(token)
