"""Bulk-synchronous worklists and the in/out/retry pipe context."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from irgl.interp.values import SimError


class WorklistOverflow(SimError):
    pass


@dataclass
class Worklist:
    """Items are 64-bit ints. ``epoch`` is the last launch that pushed here;
    a pop during launch ``e`` is only legal when ``epoch < e``."""

    name: str
    capacity: Optional[int] = None
    items: list[int] = field(default_factory=list)
    epoch: int = 0

    def push(self, item: int, epoch: int) -> None:
        if self.capacity is not None and len(self.items) >= self.capacity:
            raise WorklistOverflow(f"worklist '{self.name}' is full (capacity {self.capacity})")
        self.items.append(int(item))
        self.epoch = epoch

    def pop(self, index: int) -> int:
        if not 0 <= index < len(self.items):
            raise SimError(f"pop index {index} out of range for worklist '{self.name}' "
                           f"of size {len(self.items)}")
        return self.items[index]

    def clear(self) -> None:
        self.items = []

    def __len__(self) -> int:
        return len(self.items)


@dataclass
class PipeState:
    wl_in: Worklist
    wl_out: Worklist
    wl_retry: Worklist

    @classmethod
    def fresh(cls, capacity: Optional[int] = None, initial=()) -> "PipeState":
        items = [int(x) for x in initial]
        if capacity is not None and len(items) > capacity:
            raise WorklistOverflow(f"initializer has {len(items)} items but the worklist size is {capacity}")
        return cls(Worklist("in", capacity, items), Worklist("out", capacity), Worklist("retry", capacity))

    def swap_in_out(self) -> None:
        """Items pushed during the last invocation become the next input."""
        self.wl_in, self.wl_out = self.wl_out, self.wl_in
        self.wl_in.name, self.wl_out.name = "in", "out"
        self.wl_out.clear()

    def swap_in_retry(self) -> None:
        """Retried items become the input of a rerun; ``out`` is untouched."""
        self.wl_in, self.wl_retry = self.wl_retry, self.wl_in
        self.wl_in.name, self.wl_retry.name = "in", "retry"
        self.wl_retry.clear()

    def sizes(self) -> str:
        return f"in={len(self.wl_in)} out={len(self.wl_out)} retry={len(self.wl_retry)}"
