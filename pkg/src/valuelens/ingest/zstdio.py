"""Streaming zstd decompression over the system libzstd via ctypes.

The usual `zstandard` wheel is not always installable in sealed environments,
but libzstd.so ships with the base system everywhere we run.  Only the small
slice of the API needed for streaming decompression (plus one-shot compression
for building fixtures) is bound here.
"""

from __future__ import annotations

import ctypes
import ctypes.util
from typing import BinaryIO, Iterator, Optional

from valuelens.errors import DumpFormatError

ZSTD_MAGIC = b"\x28\xb5\x2f\xfd"
GZIP_MAGIC = b"\x1f\x8b"

# Magics we can name in errors but not read.
_KNOWN_UNSUPPORTED = {
    b"\xfd7zXZ\x00": "xz",
    b"BZh": "bzip2",
    b"\x04\x22\x4d\x18": "lz4",
}

_ZSTD_D_WINDOW_LOG_MAX = 100  # ZSTD_d_windowLogMax


class _InBuffer(ctypes.Structure):
    _fields_ = [
        ("src", ctypes.c_char_p),
        ("size", ctypes.c_size_t),
        ("pos", ctypes.c_size_t),
    ]


class _OutBuffer(ctypes.Structure):
    _fields_ = [
        ("dst", ctypes.c_void_p),
        ("size", ctypes.c_size_t),
        ("pos", ctypes.c_size_t),
    ]


_lib: Optional[ctypes.CDLL] = None


def _zstd_lib() -> ctypes.CDLL:
    global _lib
    if _lib is not None:
        return _lib
    path = ctypes.util.find_library("zstd")
    if path is None:
        raise DumpFormatError("zstd-compressed input but libzstd is not available")
    lib = ctypes.CDLL(path)
    lib.ZSTD_isError.restype = ctypes.c_uint
    lib.ZSTD_isError.argtypes = [ctypes.c_size_t]
    lib.ZSTD_getErrorName.restype = ctypes.c_char_p
    lib.ZSTD_getErrorName.argtypes = [ctypes.c_size_t]
    lib.ZSTD_createDCtx.restype = ctypes.c_void_p
    lib.ZSTD_freeDCtx.argtypes = [ctypes.c_void_p]
    lib.ZSTD_DCtx_setParameter.restype = ctypes.c_size_t
    lib.ZSTD_DCtx_setParameter.argtypes = [ctypes.c_void_p, ctypes.c_int, ctypes.c_int]
    lib.ZSTD_decompressStream.restype = ctypes.c_size_t
    lib.ZSTD_decompressStream.argtypes = [
        ctypes.c_void_p,
        ctypes.POINTER(_OutBuffer),
        ctypes.POINTER(_InBuffer),
    ]
    lib.ZSTD_compressBound.restype = ctypes.c_size_t
    lib.ZSTD_compressBound.argtypes = [ctypes.c_size_t]
    lib.ZSTD_compress.restype = ctypes.c_size_t
    lib.ZSTD_compress.argtypes = [
        ctypes.c_void_p,
        ctypes.c_size_t,
        ctypes.c_char_p,
        ctypes.c_size_t,
        ctypes.c_int,
    ]
    _lib = lib
    return lib


def compress(data: bytes, level: int = 3) -> bytes:
    """One-shot zstd compression (fixture construction, tests)."""
    lib = _zstd_lib()
    bound = lib.ZSTD_compressBound(len(data))
    dst = ctypes.create_string_buffer(bound)
    written = lib.ZSTD_compress(dst, bound, data, len(data), level)
    if lib.ZSTD_isError(written):
        raise DumpFormatError(
            f"zstd compression failed: {lib.ZSTD_getErrorName(written).decode()}"
        )
    return dst.raw[:written]


def iter_decompressed_chunks(
    fileobj: BinaryIO, read_size: int = 1 << 17, out_size: int = 1 << 17
) -> Iterator[bytes]:
    """Yield decompressed chunks from a zstd stream with bounded buffers.

    Window log is raised to 31 because public dump archives are often
    compressed with long-distance matching.
    """
    lib = _zstd_lib()
    dctx = lib.ZSTD_createDCtx()
    if not dctx:
        raise DumpFormatError("could not allocate zstd decompression context")
    lib.ZSTD_DCtx_setParameter(dctx, _ZSTD_D_WINDOW_LOG_MAX, 31)
    out_mem = ctypes.create_string_buffer(out_size)
    try:
        while True:
            piece = fileobj.read(read_size)
            if not piece:
                break
            ibuf = _InBuffer(piece, len(piece), 0)
            while ibuf.pos < ibuf.size:
                obuf = _OutBuffer(ctypes.cast(out_mem, ctypes.c_void_p), out_size, 0)
                ret = lib.ZSTD_decompressStream(
                    dctx, ctypes.byref(obuf), ctypes.byref(ibuf)
                )
                if lib.ZSTD_isError(ret):
                    raise DumpFormatError(
                        f"zstd decompression failed: {lib.ZSTD_getErrorName(ret).decode()}"
                    )
                if obuf.pos:
                    yield out_mem.raw[: obuf.pos]
    finally:
        lib.ZSTD_freeDCtx(dctx)


def sniff_compression(head: bytes) -> str:
    """Classify a stream by its magic bytes: 'zstd', 'gzip' or 'plain'.

    Raises DumpFormatError for recognizable but unsupported compression.
    """
    if head.startswith(ZSTD_MAGIC):
        return "zstd"
    if head.startswith(GZIP_MAGIC):
        return "gzip"
    for magic, name in _KNOWN_UNSUPPORTED.items():
        if head.startswith(magic):
            raise DumpFormatError(f"unsupported compression format: {name}")
    return "plain"
