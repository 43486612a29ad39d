"""Evaluation metrics: EVM, channel-estimate MSE, and the per-curve row type."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CSV_HEADER = "speed_kmph,snr_db,estimator,bler,evm_pct,mse,blocks"


def evm(ideal_syms: np.ndarray, measured_syms: np.ndarray) -> float:
    """Error vector magnitude in percent: 100*sqrt(mean|e|^2 / mean|ideal|^2)."""
    ideal = np.asarray(ideal_syms).reshape(-1)
    measured = np.asarray(measured_syms).reshape(-1)
    if ideal.size == 0 or ideal.shape != measured.shape:
        raise ValueError("symbol streams must be equal-length and nonempty")
    ref = np.mean(np.abs(ideal) ** 2)
    if ref == 0:
        raise ValueError("EVM reference undefined: ideal symbols are all zero")
    err = np.mean(np.abs(measured - ideal) ** 2)
    return float(100.0 * np.sqrt(err / ref))


def estimate_mse(h_est: np.ndarray, h_perf: np.ndarray) -> float:
    """Mean squared error between channel matrices, over all antennas/cells."""
    h_est = np.asarray(h_est)
    h_perf = np.asarray(h_perf)
    if h_est.shape != h_perf.shape:
        raise ValueError("channel matrices differ in shape")
    return float(np.mean(np.abs(h_est - h_perf) ** 2))


@dataclass
class MetricsRow:
    speed_kmph: float
    snr_db: float
    estimator: str
    bler: float
    evm_pct: float
    mse: float
    blocks: int

    def __post_init__(self) -> None:
        if not (0.0 <= self.bler <= 1.0):
            raise ValueError("BLER must lie in [0, 1]")
        if self.evm_pct < 0 or self.blocks < 1:
            raise ValueError("EVM must be nonnegative and blocks >= 1")

    def to_csv_row(self) -> str:
        return (
            f"{self.speed_kmph:g},{self.snr_db:g},{self.estimator},"
            f"{self.bler:.6g},{self.evm_pct:.6g},{self.mse:.6g},{self.blocks}"
        )


def write_metrics_csv(path, rows: list[MetricsRow]) -> None:
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row.to_csv_row() + "\n")


def read_metrics_csv(path) -> list[MetricsRow]:
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected CSV header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            speed, snr, est, bler, evm_pct, mse, blocks = line.split(",")
            rows.append(
                MetricsRow(
                    speed_kmph=float(speed),
                    snr_db=float(snr),
                    estimator=est,
                    bler=float(bler),
                    evm_pct=float(evm_pct),
                    mse=float(mse),
                    blocks=int(blocks),
                )
            )
    return rows
