"""
AccessLog: a recorder of buffer accesses made by kernels and the loop interpreter.
Fully JSON-serializable.
"""

import json
from collections import defaultdict
from contextlib import contextmanager
from typing import Any, Dict, Iterator, List, Mapping, Optional, Set

from .types import AccessEntry, AccessKind


class AccessLog:
    """
    Records loads and stores against named flat buffers, in program order.

    Usage example:
        log = AccessLog()
        gemm_moa(A, B, trace=log)
        log.offsets("B", AccessKind.READ, where={"i": 0, "k": 1})
    """

    def __init__(self) -> None:
        """Initialize an empty log."""
        self.entries: List[AccessEntry] = []

    def add(
        self,
        kind: AccessKind,
        buffer: str,
        offset: int,
        coords: Optional[Mapping[str, int]] = None,
    ) -> None:
        """
        Append one access.

        Args:
            kind (AccessKind): READ or WRITE.
            buffer (str): Buffer name.
            offset (int): Flat offset accessed.
            coords (Mapping[str, int], optional): Loop bindings at the access.
        """
        self.entries.append(
            AccessEntry(AccessKind(kind), buffer, int(offset), dict(coords or {}))
        )

    def offsets(
        self,
        buffer: str,
        kind: Optional[AccessKind] = None,
        where: Optional[Mapping[str, int]] = None,
    ) -> List[int]:
        """
        Offsets touched in `buffer`, in recording order.

        Args:
            buffer (str): Buffer name to filter on.
            kind (AccessKind, optional): Restrict to reads or writes.
            where (Mapping[str, int], optional): Keep only entries whose coords
                match every given binding.
        """
        return [
            entry.offset
            for entry in self.entries
            if entry.buffer == buffer
            and (kind is None or entry.kind == kind)
            and all(entry.coords.get(k) == v for k, v in (where or {}).items())
        ]

    def group_by(
        self, var: str, buffer: str, kind: Optional[AccessKind] = None
    ) -> Dict[int, Set[int]]:
        """Offset sets of `buffer` keyed by the value of loop variable `var`."""
        groups: Dict[int, Set[int]] = defaultdict(set)
        for entry in self.entries:
            if entry.buffer != buffer or (kind is not None and entry.kind != kind):
                continue
            if var in entry.coords:
                groups[entry.coords[var]].add(entry.offset)
        return dict(groups)

    def get_entries(self) -> List[Dict[str, Any]]:
        """
        Return entries in a generic, JSON-serializable format.

        Returns:
            List[Dict[str, Any]]: Each entry is a dict with keys: kind, buffer, offset, coords.
        """
        return [
            {
                "kind": entry.kind.value,
                "buffer": entry.buffer,
                "offset": entry.offset,
                "coords": dict(entry.coords),
            }
            for entry in self.entries
        ]

    def to_json(self, indent: int = 2) -> str:
        """Return the entries as a JSON string."""
        return json.dumps(self.get_entries(), indent=indent)

    @contextmanager
    def capture(self) -> Iterator["AccessLog"]:
        """
        Yield this log for one traced run. If the run raises, the entries it
        recorded are dropped, so the log only ever holds complete runs.

        Example:
            >>> with log.capture():
            ...     eval_nest(nest, a, b, c, trace=log)
        """
        mark = len(self.entries)
        try:
            yield self
        except BaseException:
            del self.entries[mark:]
            raise

    def reset(self) -> None:
        """Clear all recorded entries."""
        self.entries.clear()

    def __len__(self) -> int:
        return len(self.entries)
