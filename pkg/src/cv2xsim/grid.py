"""Sidelink subframe resource grid: pilot/data layout, mapping and extraction.

One subframe is a complex matrix of shape (n_subcarriers, n_symbols) =
(576, 14) under the default configuration, with DMRS pilots occupying
whole columns at fixed symbol positions and user data filling the rest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridConfig:
    """Dimensions and pilot layout of one sidelink subframe."""

    n_prb: int = 48
    n_sc_per_prb: int = 12
    n_symbols: int = 14
    dmrs_symbol_indices: tuple[int, ...] = (2, 5, 8, 11)

    def __post_init__(self) -> None:
        if self.n_prb < 1 or self.n_sc_per_prb < 1 or self.n_symbols < 1:
            raise ValueError("grid dimensions must be positive")
        idx = self.dmrs_symbol_indices
        if list(idx) != sorted(set(idx)):
            raise ValueError("dmrs_symbol_indices must be strictly increasing")
        if idx and not (0 <= idx[0] and idx[-1] < self.n_symbols):
            raise ValueError("dmrs_symbol_indices out of range")

    @property
    def n_subcarriers(self) -> int:
        return self.n_prb * self.n_sc_per_prb

    @property
    def n_data_symbols(self) -> int:
        return self.n_symbols - len(self.dmrs_symbol_indices)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_subcarriers, self.n_symbols)


def data_symbol_indices(cfg: GridConfig) -> list[int]:
    """Symbol indices carrying user data: the complement of the DMRS columns."""
    dmrs = set(cfg.dmrs_symbol_indices)
    return [t for t in range(cfg.n_symbols) if t not in dmrs]


def map_subframe(
    data_syms: np.ndarray,
    dmrs_syms: list[np.ndarray] | tuple[np.ndarray, ...],
    cfg: GridConfig,
) -> np.ndarray:
    """Build the subframe grid from a data symbol stream and per-column pilots.

    Data fills the non-DMRS columns in ascending symbol order, one full
    column (all subcarriers) at a time.  The inverse is
    ``extract_positions`` over the data and DMRS columns respectively.
    """
    n_sc = cfg.n_subcarriers
    data_cols = data_symbol_indices(cfg)
    data_syms = np.asarray(data_syms, dtype=np.complex128)
    if data_syms.shape != (len(data_cols) * n_sc,):
        raise ValueError(
            f"data length {data_syms.shape} does not match "
            f"{len(data_cols)} data symbols x {n_sc} subcarriers"
        )
    if len(dmrs_syms) != len(cfg.dmrs_symbol_indices):
        raise ValueError(
            f"expected {len(cfg.dmrs_symbol_indices)} DMRS sequences, got {len(dmrs_syms)}"
        )
    grid = np.empty(cfg.shape, dtype=np.complex128)
    for j, t in enumerate(data_cols):
        grid[:, t] = data_syms[j * n_sc : (j + 1) * n_sc]
    for j, t in enumerate(cfg.dmrs_symbol_indices):
        seq = np.asarray(dmrs_syms[j], dtype=np.complex128)
        if seq.shape != (n_sc,):
            raise ValueError(f"DMRS sequence {j} has shape {seq.shape}, expected ({n_sc},)")
        grid[:, t] = seq
    return grid


def extract_positions(grid: np.ndarray, symbol_indices) -> np.ndarray:
    """Select grid columns in the given order (duplicates allowed), unmodified."""
    grid = np.asarray(grid)
    indices = list(symbol_indices)
    for t in indices:
        if not (0 <= t < grid.shape[1]):
            raise ValueError(f"symbol index {t} out of range [0, {grid.shape[1]})")
    return grid[:, indices].copy()


def check_grid(grid: np.ndarray, cfg: GridConfig) -> np.ndarray:
    """Validate shape and finiteness of a subframe grid; returns it unchanged."""
    grid = np.asarray(grid)
    if grid.shape != cfg.shape:
        raise ValueError(f"grid shape {grid.shape} does not match config {cfg.shape}")
    if not np.all(np.isfinite(grid)):
        raise ValueError("grid contains non-finite cells")
    return grid
