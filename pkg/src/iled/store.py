"""The historical memory: an append-only window store.

On disk a store is a directory with two files. ``windows.log`` holds the
windows in the stream text format, one after another. ``windows.idx`` holds
one fixed-width record per window (offset and length in the log), so a
window can be read without scanning the log and iteration streams one
window at a time.

Every read is counted per ``(revision, window id)`` so tests can check that
a learning step reads each stored window at most once.
"""

from __future__ import annotations

import os
import threading
from collections import Counter
from pathlib import Path
from typing import Iterator, List, Optional, Union

from .errors import DataError
from .event_calculus import Window
from .io import parse_stream, serialize_window

__all__ = ["HistoricalMemory"]

_RECORD = 32  # two 15-digit fields, a space and a newline


class HistoricalMemory:
    """Append-only, ordered window store with read instrumentation.

    With ``path=None`` windows are kept in memory (same interface).
    """

    def __init__(self, path: Optional[Union[str, os.PathLike]] = None):
        self.path = Path(path) if path is not None else None
        self._mem: List[Window] = []
        self._ids: List[int] = []
        self._lock = threading.Lock()
        self.visit_counter: Counter = Counter()
        self.revision = 0
        if self.path is not None:
            self.path.mkdir(parents=True, exist_ok=True)
            self._log = self.path / "windows.log"
            self._idx = self.path / "windows.idx"
            for f in (self._log, self._idx):
                if not f.exists():
                    f.touch()
            size = self._idx.stat().st_size
            if size % _RECORD:
                raise DataError(f"corrupt window index {self._idx} (size {size})")
            for k in range(size // _RECORD):
                self._ids.append(self._read_at(k, count=False).id)

    # -- writing --------------------------------------------------------------
    def append(self, w: Window) -> None:
        with self._lock:
            if w.id in self._ids:
                raise DataError(f"window {w.id} is already stored")
            if self.path is None:
                self._mem.append(w)
            else:
                data = serialize_window(w).encode()
                try:
                    with open(self._log, "ab") as log:
                        offset = log.seek(0, os.SEEK_END)
                        log.write(data)
                    with open(self._idx, "ab") as idx:
                        idx.write(f"{offset:015d} {len(data):015d}".encode()[:_RECORD - 1] + b"\n")
                except OSError as e:
                    raise DataError(f"cannot store window {w.id}: {e}") from e
            self._ids.append(w.id)

    # -- reading --------------------------------------------------------------
    def __len__(self) -> int:
        return len(self._ids)

    @property
    def ids(self) -> List[int]:
        return list(self._ids)

    def begin_revision(self) -> int:
        """Start a new read-count epoch and return its id."""
        self.revision += 1
        return self.revision

    def reads(self, revision: Optional[int] = None) -> Counter:
        rev = self.revision if revision is None else revision
        return Counter({wid: n for (r, wid), n in self.visit_counter.items() if r == rev})

    def _read_at(self, k: int, count: bool = True) -> Window:
        if self.path is None:
            w = self._mem[k]
        else:
            try:
                with open(self._idx, "rb") as idx:
                    idx.seek(k * _RECORD)
                    rec = idx.read(_RECORD).split()
                offset, length = int(rec[0]), int(rec[1])
                with open(self._log, "rb") as log:
                    log.seek(offset)
                    text = log.read(length).decode()
            except (OSError, ValueError, IndexError) as e:
                wid = self._ids[k] if k < len(self._ids) else k
                raise DataError(f"cannot read stored window {wid}: {e}") from e
            ws = parse_stream(text, str(self._log))
            if len(ws) != 1:
                raise DataError(f"corrupt window record {k} in {self._log}")
            w = ws[0]
        if count:
            with self._lock:
                self.visit_counter[(self.revision, w.id)] += 1
        return w

    def get(self, k: int) -> Window:
        return self._read_at(k)

    def __iter__(self) -> Iterator[Window]:
        """Windows in arrival order, read one at a time."""
        n = len(self._ids)
        for k in range(n):
            yield self._read_at(k)
