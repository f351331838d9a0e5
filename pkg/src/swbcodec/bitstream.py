"""Bit-exact framing and the .pgna stream container.

Frame payloads (MSB-first bit packing):

    WB  (15 bytes): 40 quantizer indices x 3 bits, dimension order 0..39
    SWB (20 bytes): the 15 WB bytes, then 8-bit global gain, then eight
                    4-bit envelope indices, subband order 0..7

Every bit pattern is a valid code, so unpacking never fails on content,
only on length. Stream container:

    magic        4 bytes  b"PGNA"
    version      u8       currently 1
    mode         u8       0 = WB @ 6 kbps, 1 = SWB @ 8 kbps
    sample_rate  u32 LE   output rate (16000 or 32000)
    reserved     6 bytes  bytes 0-1: u16 LE count of trailing padding
                          samples to trim after decoding; rest zero

followed by fixed-size frames to end of stream. At 50 frames/s the rates
are exact: 15 * 8 * 50 = 6000 bps, 20 * 8 * 50 = 8000 bps.
"""

from dataclasses import dataclass
from typing import BinaryIO, Iterable, Iterator

import numpy as np

from .bwe import BweParams
from .wideband import QuantizedFrame

__all__ = [
    "MODE_WB",
    "MODE_SWB",
    "FRAME_BYTES",
    "StreamHeader",
    "FramingError",
    "StreamFormatError",
    "BadStreamMagicError",
    "UnsupportedStreamVersionError",
    "TruncatedStreamError",
    "pack_frame",
    "unpack_frame",
    "pack_frames",
    "unpack_frames",
    "write_stream",
    "read_stream",
]

STREAM_MAGIC = b"PGNA"
STREAM_VERSION = 1
HEADER_BYTES = 16

MODE_WB = 0
MODE_SWB = 1
FRAME_BYTES = {MODE_WB: 15, MODE_SWB: 20}

_DIMS = 40
_BITS = 3


class FramingError(ValueError):
    """Frame payload has the wrong size or inconsistent arguments."""


class StreamFormatError(Exception):
    """Base class for container-level problems."""


class BadStreamMagicError(StreamFormatError):
    pass


class UnsupportedStreamVersionError(StreamFormatError):
    pass


class TruncatedStreamError(StreamFormatError):
    """Stream ended inside a frame; `frames_read` full frames preceded it."""

    def __init__(self, message: str, frames_read: int):
        super().__init__(message)
        self.frames_read = frames_read


@dataclass(frozen=True)
class StreamHeader:
    mode: int
    sample_rate: int
    padding: int = 0
    version: int = STREAM_VERSION

    def __post_init__(self):
        if self.mode not in FRAME_BYTES:
            raise ValueError(f"unknown mode {self.mode}")
        if not 0 <= self.padding < 1 << 16:
            raise ValueError("padding must fit in u16")

    def to_bytes(self) -> bytes:
        reserved = self.padding.to_bytes(2, "little") + b"\x00" * 4
        return (STREAM_MAGIC + bytes([self.version, self.mode])
                + self.sample_rate.to_bytes(4, "little") + reserved)

    @classmethod
    def from_bytes(cls, data: bytes) -> "StreamHeader":
        if len(data) < HEADER_BYTES:
            raise TruncatedStreamError("stream shorter than its header", 0)
        if data[:4] != STREAM_MAGIC:
            raise BadStreamMagicError("not a PGNA stream")
        version, mode = data[4], data[5]
        if version != STREAM_VERSION:
            raise UnsupportedStreamVersionError(f"unsupported version {version}")
        if mode not in FRAME_BYTES:
            raise StreamFormatError(f"unknown mode {mode}")
        rate = int.from_bytes(data[6:10], "little")
        padding = int.from_bytes(data[10:12], "little")
        return cls(mode=mode, sample_rate=rate, padding=padding, version=version)


def pack_frame(q: QuantizedFrame, bwe: BweParams | None, mode: int) -> bytes:
    """Pack one frame; `bwe` must be present exactly when mode is SWB."""
    if mode not in FRAME_BYTES:
        raise FramingError(f"unknown mode {mode}")
    if (bwe is not None) != (mode == MODE_SWB):
        raise FramingError("BWE params must be given iff mode is SWB")
    idx = q.indices
    if idx.shape != (_DIMS,):
        raise FramingError(f"expected {_DIMS} indices, got {idx.shape}")
    if np.any(idx >= 1 << _BITS):
        raise FramingError(f"index {int(idx.max())} does not fit in {_BITS} bits")
    acc = 0
    for v in idx:
        acc = (acc << _BITS) | int(v)
    if mode == MODE_WB:
        return acc.to_bytes(15, "big")
    if not 0 <= bwe.global_gain_index < 256:
        raise FramingError("global gain index does not fit in 8 bits")
    env = bwe.envelope_indices
    if env.shape != (8,) or np.any(env >= 16):
        raise FramingError("envelope must be eight 4-bit indices")
    acc = (acc << 8) | int(bwe.global_gain_index)
    for e in env:
        acc = (acc << 4) | int(e)
    return acc.to_bytes(20, "big")


def unpack_frame(payload: bytes, mode: int) -> tuple[QuantizedFrame, BweParams | None]:
    """Exact inverse of :func:`pack_frame`; total over all byte patterns."""
    if mode not in FRAME_BYTES:
        raise FramingError(f"unknown mode {mode}")
    expected = FRAME_BYTES[mode]
    if len(payload) != expected:
        raise FramingError(f"expected {expected}-byte frame, got {len(payload)}")
    acc = int.from_bytes(payload, "big")
    bwe = None
    if mode == MODE_SWB:
        env = np.empty(8, dtype=np.uint8)
        for j in range(7, -1, -1):
            env[j] = acc & 0xF
            acc >>= 4
        gain = acc & 0xFF
        acc >>= 8
        bwe = BweParams(global_gain_index=int(gain), envelope_indices=env)
    indices = np.empty(_DIMS, dtype=np.uint8)
    for d in range(_DIMS - 1, -1, -1):
        indices[d] = acc & 0x7
        acc >>= _BITS
    return QuantizedFrame(indices=indices), bwe


def pack_frames(indices: np.ndarray, gains: np.ndarray | None,
                envelopes: np.ndarray | None, mode: int) -> np.ndarray:
    """Vectorized :func:`pack_frame` over many frames.

    indices: (F, 40) uint8; gains: (F,) and envelopes: (F, 8) in SWB mode.
    Returns a (F, frame_bytes) uint8 array, rows identical to pack_frame.
    """
    indices = np.asarray(indices, dtype=np.uint8)
    if indices.ndim != 2 or indices.shape[1] != _DIMS:
        raise FramingError(f"expected (F, {_DIMS}) indices, got {indices.shape}")
    if np.any(indices >= 1 << _BITS):
        raise FramingError("quantizer index out of range")
    shifts = np.array([2, 1, 0], dtype=np.uint8)
    bits = [((indices[:, :, None] >> shifts) & 1).reshape(len(indices), -1)]
    if mode == MODE_SWB:
        if gains is None or envelopes is None:
            raise FramingError("BWE params must be given iff mode is SWB")
        gains = np.asarray(gains, dtype=np.uint8)
        envelopes = np.asarray(envelopes, dtype=np.uint8)
        if np.any(envelopes >= 16):
            raise FramingError("envelope index out of range")
        bits.append(np.unpackbits(gains[:, None], axis=1))
        env_shifts = np.array([3, 2, 1, 0], dtype=np.uint8)
        bits.append(((envelopes[:, :, None] >> env_shifts) & 1)
                    .reshape(len(indices), -1))
    elif gains is not None or envelopes is not None:
        raise FramingError("BWE params must be given iff mode is SWB")
    return np.packbits(np.concatenate(bits, axis=1).astype(np.uint8), axis=1)


def unpack_frames(payloads: np.ndarray, mode: int
                  ) -> tuple[np.ndarray, np.ndarray | None, np.ndarray | None]:
    """Vectorized :func:`unpack_frame`: (F, frame_bytes) uint8 rows to
    (indices, gains, envelopes) arrays."""
    payloads = np.asarray(payloads, dtype=np.uint8)
    if payloads.ndim != 2 or payloads.shape[1] != FRAME_BYTES[mode]:
        raise FramingError(
            f"expected (F, {FRAME_BYTES[mode]}) payloads, got {payloads.shape}")
    bits = np.unpackbits(payloads, axis=1)
    idx_bits = bits[:, : _DIMS * _BITS].reshape(-1, _DIMS, _BITS)
    indices = ((idx_bits << np.array([2, 1, 0], dtype=np.uint8))
               .sum(axis=2, dtype=np.uint8))
    if mode == MODE_WB:
        return indices, None, None
    gains = np.packbits(bits[:, 120:128], axis=1)[:, 0]
    env_bits = bits[:, 128:].reshape(-1, 8, 4)
    envelopes = ((env_bits << np.array([3, 2, 1, 0], dtype=np.uint8))
                 .sum(axis=2, dtype=np.uint8))
    return indices, gains, envelopes


def write_stream(header: StreamHeader, frames: Iterable[bytes], sink: BinaryIO) -> int:
    """Write header then frames; returns the number of frames written."""
    sink.write(header.to_bytes())
    count = 0
    size = FRAME_BYTES[header.mode]
    for frame in frames:
        if len(frame) != size:
            raise FramingError(f"frame {count}: {len(frame)} bytes, expected {size}")
        sink.write(frame)
        count += 1
    return count


def read_stream(source: BinaryIO) -> tuple[StreamHeader, Iterator[bytes]]:
    """Parse the header and return a constant-memory frame iterator.

    The iterator raises :class:`TruncatedStreamError` if the stream ends
    inside a frame.
    """
    header = StreamHeader.from_bytes(source.read(HEADER_BYTES))
    size = FRAME_BYTES[header.mode]

    def frames() -> Iterator[bytes]:
        index = 0
        while True:
            chunk = source.read(size)
            if not chunk:
                return
            if len(chunk) < size:
                raise TruncatedStreamError(
                    f"stream truncated inside frame {index}", index)
            yield chunk
            index += 1

    return header, frames()
