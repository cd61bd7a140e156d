"""Streaming NDJSON dump parsing with transparent gzip/zstd detection."""

from __future__ import annotations

import gzip
import io
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterator, Optional, Union

from valuelens.errors import DataError
from valuelens.ingest import zstdio
from valuelens.ingest.records import DumpFieldMap, RawRecord

log = logging.getLogger(__name__)

_CHUNK = 1 << 17


@dataclass
class ParseCounters:
    lines: int = 0
    records: int = 0
    malformed: int = 0


def _iter_lines_from_chunks(chunks: Iterator[bytes]) -> Iterator[bytes]:
    buf = b""
    for chunk in chunks:
        buf += chunk
        if b"\n" not in buf:
            continue
        lines = buf.split(b"\n")
        buf = lines.pop()
        yield from lines
    if buf:
        yield buf


def _file_chunks(fileobj: BinaryIO) -> Iterator[bytes]:
    while True:
        chunk = fileobj.read(_CHUNK)
        if not chunk:
            return
        yield chunk


def open_dump_lines(source: Union[str, Path, BinaryIO]) -> Iterator[bytes]:
    """Yield raw NDJSON lines from a path or binary stream, decompressing
    zstd/gzip by magic bytes.  Memory stays bounded by the chunk size plus
    the longest single line."""
    close_after = False
    if isinstance(source, (str, Path)):
        try:
            fileobj: BinaryIO = open(source, "rb")
        except OSError as exc:
            raise DataError(f"cannot open dump {source}: {exc}") from exc
        close_after = True
    else:
        fileobj = source
    try:
        head = fileobj.read(6)  # longest sniffed magic (xz) is 6 bytes
        kind = zstdio.sniff_compression(head)
        if kind == "zstd":
            rest = _prepend(head, fileobj)
            yield from _iter_lines_from_chunks(zstdio.iter_decompressed_chunks(rest))
        elif kind == "gzip":
            gz = gzip.GzipFile(fileobj=_prepend(head, fileobj))
            yield from _iter_lines_from_chunks(_file_chunks(gz))
        else:
            yield from _iter_lines_from_chunks(_chain_chunks(head, fileobj))
    except OSError as exc:
        raise DataError(f"error reading dump stream: {exc}") from exc
    finally:
        if close_after:
            fileobj.close()


class _prepend(io.RawIOBase):
    """Binary reader that replays a sniffed header before the wrapped stream."""

    def __init__(self, head: bytes, fileobj: BinaryIO):
        self._head = head
        self._fileobj = fileobj

    def readable(self) -> bool:
        return True

    def read(self, size: int = -1) -> bytes:
        if self._head:
            if size < 0 or size >= len(self._head):
                out, self._head = self._head, b""
                if size < 0:
                    return out + self._fileobj.read()
                remaining = size - len(out)
                return out + (self._fileobj.read(remaining) if remaining else b"")
            out, self._head = self._head[:size], self._head[size:]
            return out
        return self._fileobj.read(size)


def _chain_chunks(head: bytes, fileobj: BinaryIO) -> Iterator[bytes]:
    if head:
        yield head
    yield from _file_chunks(fileobj)


def parse_dump(
    source: Union[str, Path, BinaryIO],
    field_map: Optional[DumpFieldMap] = None,
    counters: Optional[ParseCounters] = None,
) -> Iterator[RawRecord]:
    """Stream RawRecords out of a newline-delimited JSON dump.

    Malformed lines (bad JSON, missing fields, bad field types) are counted
    and skipped.  The stream itself being unreadable or compressed with an
    unknown scheme is fatal.
    """
    field_map = field_map or DumpFieldMap()
    counters = counters if counters is not None else ParseCounters()
    for line in open_dump_lines(source):
        if not line.strip():
            continue
        counters.lines += 1
        try:
            obj = json.loads(line)
            rec = field_map.normalize(obj)
        except (ValueError, KeyError, TypeError):
            counters.malformed += 1
            continue
        counters.records += 1
        yield rec
