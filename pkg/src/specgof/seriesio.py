"""Reading and writing series files.

Text: one real value per line. Binary: the 8-byte magic ``SPGF0001``, the
count as an unsigned 64-bit little-endian integer, then that many
little-endian float64 values.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"SPGF0001"


class SeriesFormatError(ValueError):
    pass


def write_series(path, x, binary: bool = False) -> None:
    x = np.asarray(x, dtype="<f8").ravel()
    if binary:
        with open(path, "wb") as fh:
            fh.write(MAGIC + struct.pack("<Q", x.size) + x.tobytes())
    else:
        Path(path).write_text("".join(f"{v:.17g}\n" for v in x))


def read_series(path) -> np.ndarray:
    """Load a text or binary series; the format is recognised by the magic."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise SeriesFormatError(f"cannot read {path}: {exc.strerror or exc}") from None
    if raw.startswith(MAGIC):
        if len(raw) < 16:
            raise SeriesFormatError(f"{path}: truncated header")
        (n,) = struct.unpack("<Q", raw[8:16])
        if len(raw) != 16 + 8 * n:
            raise SeriesFormatError(f"{path}: header announces {n} values, file holds {(len(raw) - 16) / 8:g}")
        x = np.frombuffer(raw, dtype="<f8", offset=16, count=n).astype(float)
    else:
        x = _parse_text(path, raw)
    if x.size == 0:
        raise SeriesFormatError(f"{path}: no values")
    if not np.all(np.isfinite(x)):
        raise SeriesFormatError(f"{path}: non-finite values")
    return x


def _parse_text(path, raw: bytes) -> np.ndarray:
    try:
        text = raw.decode("ascii")
    except UnicodeDecodeError:
        raise SeriesFormatError(f"{path}: neither a text series nor a SPGF0001 file") from None
    values = []
    for k, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise SeriesFormatError(f"{path}, line {k}: not a number: {line[:40]!r}") from None
    return np.array(values, dtype=float)
