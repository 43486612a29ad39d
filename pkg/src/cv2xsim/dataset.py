"""Dataset persistence: one "CVXD" file per (speed, SNR) point.

Layout: 4-byte magic, u32 version, a dimension block, then fixed-size
records.  Complex matrices are stored as interleaved re/im little-endian
float32 (numpy '<c8').  Each record carries the payload bits (packed),
the raw LS-interpolated estimate H_noisy, the ground truth H_perf, and
the raw per-antenna received frequency-domain grids.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"CVXD"
VERSION = 1
_HEADER_FMT = "<4sIIIIIIdd"  # magic, version, n_records, n_rx, n_sc, n_sym, tbs, speed, snr
_HEADER_LEN = struct.calcsize(_HEADER_FMT)


@dataclass(frozen=True)
class DatasetHeader:
    n_records: int
    n_rx: int
    n_sc: int
    n_sym: int
    tbs: int
    speed_kmph: float
    snr_db: float

    @property
    def payload_bytes(self) -> int:
        return (self.tbs + 7) // 8

    @property
    def matrix_bytes(self) -> int:
        return self.n_rx * self.n_sc * self.n_sym * 8  # complex64

    @property
    def record_bytes(self) -> int:
        return 4 + self.payload_bytes + 3 * self.matrix_bytes


@dataclass
class SampleRecord:
    subframe_index: int
    payload_bits: np.ndarray  # (tbs,) uint8
    h_noisy: np.ndarray  # (n_rx, n_sc, n_sym) complex
    h_perf: np.ndarray
    rx_grids: np.ndarray  # raw (non-deprecoded) received grids


def dataset_filename(speed_kmph: float, snr_db: float) -> str:
    return f"speed{speed_kmph:g}kmph_snr{snr_db:g}db.cvxd"


def write_dataset_file(path, header: DatasetHeader, records: list[SampleRecord]) -> None:
    if len(records) != header.n_records:
        raise ValueError("record count does not match header")
    with open(path, "wb") as fh:
        fh.write(
            struct.pack(
                _HEADER_FMT,
                MAGIC,
                VERSION,
                header.n_records,
                header.n_rx,
                header.n_sc,
                header.n_sym,
                header.tbs,
                header.speed_kmph,
                header.snr_db,
            )
        )
        for rec in records:
            fh.write(struct.pack("<I", rec.subframe_index))
            fh.write(np.packbits(rec.payload_bits.astype(np.uint8)).tobytes())
            for mat in (rec.h_noisy, rec.h_perf, rec.rx_grids):
                arr = np.ascontiguousarray(mat, dtype="<c8")
                if arr.shape != (header.n_rx, header.n_sc, header.n_sym):
                    raise ValueError(f"matrix shape {arr.shape} does not match header")
                fh.write(arr.tobytes())


def read_header(path) -> DatasetHeader:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER_LEN)
    if len(raw) != _HEADER_LEN:
        raise ValueError(f"{path}: truncated dataset header")
    magic, version, n_records, n_rx, n_sc, n_sym, tbs, speed, snr = struct.unpack(
        _HEADER_FMT, raw
    )
    if magic != MAGIC:
        raise ValueError(f"{path}: not a dataset file (bad magic {magic!r})")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported dataset version {version}")
    return DatasetHeader(
        n_records=n_records,
        n_rx=n_rx,
        n_sc=n_sc,
        n_sym=n_sym,
        tbs=tbs,
        speed_kmph=speed,
        snr_db=snr,
    )


def iter_records(path, want_rx: bool = True):
    """Yield (header, SampleRecord) pairs; rx grids are skipped if not wanted."""
    header = read_header(path)
    shape = (header.n_rx, header.n_sc, header.n_sym)
    with open(path, "rb") as fh:
        fh.seek(_HEADER_LEN)
        for _ in range(header.n_records):
            (idx,) = struct.unpack("<I", fh.read(4))
            payload = np.unpackbits(
                np.frombuffer(fh.read(header.payload_bytes), dtype=np.uint8)
            )[: header.tbs]
            h_noisy = np.frombuffer(fh.read(header.matrix_bytes), dtype="<c8").reshape(shape)
            h_perf = np.frombuffer(fh.read(header.matrix_bytes), dtype="<c8").reshape(shape)
            if want_rx:
                rx = np.frombuffer(fh.read(header.matrix_bytes), dtype="<c8").reshape(shape)
            else:
                fh.seek(header.matrix_bytes, os.SEEK_CUR)
                rx = None
            yield header, SampleRecord(
                subframe_index=idx,
                payload_bits=payload,
                h_noisy=h_noisy,
                h_perf=h_perf,
                rx_grids=rx,
            )


def read_dataset_file(path) -> tuple[DatasetHeader, list[SampleRecord]]:
    header = read_header(path)
    return header, [rec for _, rec in iter_records(path)]
