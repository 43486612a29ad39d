"""Classical channel estimation: LS at pilots, 2D averaging, noise level,
time interpolation, perfect pass-through, and diversity equalization.

Estimation runs independently per receive antenna; antennas are combined
only in ``equalize``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .grid import GridConfig, extract_positions

DEFAULT_WINDOW = (7, 1)  # (freq_span, time_span), frequency-only averaging


@dataclass
class PilotEstimate:
    """Raw or averaged channel values at pilot positions."""

    values: np.ndarray  # (n_sc, n_pilot_columns) complex
    symbol_indices: tuple[int, ...]


@dataclass
class EstimateSet:
    """The per-antenna channel matrices a receiver can equalize with."""

    h_perf: np.ndarray  # (n_rx, n_sc, n_symbols)
    h_prac: np.ndarray
    h_noisy: np.ndarray
    noise_var: float


def ls_at_pilots(
    rx_grid: np.ndarray, tx_dmrs: list[np.ndarray], cfg: GridConfig
) -> PilotEstimate:
    """Least-squares estimate Y/X at every pilot position."""
    pilots = extract_positions(rx_grid, cfg.dmrs_symbol_indices)
    tx = np.stack([np.asarray(s) for s in tx_dmrs], axis=1)
    if tx.shape != pilots.shape:
        raise ValueError(f"tx DMRS shape {tx.shape} does not match pilots {pilots.shape}")
    if np.any(tx == 0):
        raise ZeroDivisionError("transmitted pilots must be nonzero")
    return PilotEstimate(values=pilots / tx, symbol_indices=cfg.dmrs_symbol_indices)


def average_2d(p: PilotEstimate, window: tuple[int, int] = DEFAULT_WINDOW) -> PilotEstimate:
    """Mean over a centered (freq_span, time_span) window, truncated at edges.

    Spans are odd and counted on the pilot lattice: rows are subcarriers,
    columns are pilot symbols.  Out-of-bounds positions do not contribute.
    """
    freq_span, time_span = window
    if freq_span < 1 or time_span < 1 or freq_span % 2 == 0 or time_span % 2 == 0:
        raise ValueError("window spans must be odd positive integers")
    v = p.values
    out = _box_mean(v, freq_span // 2, time_span // 2)
    return PilotEstimate(values=out, symbol_indices=p.symbol_indices)


def _box_mean(v: np.ndarray, half_rows: int, half_cols: int) -> np.ndarray:
    """Truncated-window box average via integral images."""
    sums = _box_sum(v, half_rows, half_cols)
    counts = _box_sum(np.ones(v.shape), half_rows, half_cols).real
    return sums / counts


def _box_sum(v: np.ndarray, hr: int, hc: int) -> np.ndarray:
    n_r, n_c = v.shape
    integral = np.zeros((n_r + 1, n_c + 1), dtype=np.complex128)
    integral[1:, 1:] = np.cumsum(np.cumsum(v, axis=0), axis=1)
    r = np.arange(n_r)
    c = np.arange(n_c)
    r0 = np.clip(r - hr, 0, n_r)
    r1 = np.clip(r + hr + 1, 0, n_r)
    c0 = np.clip(c - hc, 0, n_c)
    c1 = np.clip(c + hc + 1, 0, n_c)
    return (
        integral[np.ix_(r1, c1)]
        - integral[np.ix_(r0, c1)]
        - integral[np.ix_(r1, c0)]
        + integral[np.ix_(r0, c0)]
    )


def noise_level(raw: PilotEstimate, averaged: PilotEstimate) -> float:
    """Noise variance estimate: mean |raw - averaged|^2 over all pilots."""
    if raw.symbol_indices != averaged.symbol_indices:
        raise ValueError("pilot estimates cover different positions")
    return float(np.mean(np.abs(raw.values - averaged.values) ** 2))


def interpolate_grid(p: PilotEstimate, cfg: GridConfig) -> np.ndarray:
    """Linear time interpolation between pilot columns, per subcarrier.

    Symbols outside the pilot span hold the nearest pilot value; pilot
    columns pass through unchanged.  Pilots cover every subcarrier, so no
    frequency interpolation is involved.
    """
    cols = p.symbol_indices
    if len(cols) < 2:
        raise ValueError("need at least two pilot columns to interpolate")
    v = p.values
    out = np.empty((v.shape[0], cfg.n_symbols), dtype=np.complex128)
    for t in range(cfg.n_symbols):
        if t <= cols[0]:
            out[:, t] = v[:, 0]
        elif t >= cols[-1]:
            out[:, t] = v[:, -1]
        else:
            j = int(np.searchsorted(cols, t, side="right")) - 1
            w = (t - cols[j]) / (cols[j + 1] - cols[j])
            out[:, t] = (1.0 - w) * v[:, j] + w * v[:, j + 1]
    return out


def perfect_estimate(realization: ChannelRealization) -> np.ndarray:
    """Ground-truth frequency response, shape (n_rx, n_sc, n_symbols)."""
    return realization.freq_response


def noisy_estimate(
    rx_grid: np.ndarray, tx_dmrs: list[np.ndarray], cfg: GridConfig
) -> np.ndarray:
    """Raw LS at pilots, linearly interpolated over the subframe (no averaging)."""
    return interpolate_grid(ls_at_pilots(rx_grid, tx_dmrs, cfg), cfg)


def practical_estimate(
    rx_grid: np.ndarray,
    tx_dmrs: list[np.ndarray],
    cfg: GridConfig,
    window: tuple[int, int] = DEFAULT_WINDOW,
) -> tuple[np.ndarray, float]:
    """LS -> window averaging -> interpolation, plus the noise-level estimate."""
    raw = ls_at_pilots(rx_grid, tx_dmrs, cfg)
    avg = average_2d(raw, window)
    sigma2 = noise_level(raw, avg)
    return interpolate_grid(avg, cfg), sigma2


def equalize(
    rx_grids: np.ndarray,
    h: np.ndarray,
    noise_var: float = 0.0,
    mode: str = "paper",
) -> np.ndarray:
    """Combine antennas against a channel estimate.

    mode "paper": Y_eq = sum_r Y_r * conj(H_r), the conjugate equalizer with
    maximum-ratio combining.  mode "mrc-normalized": divide by
    sum_r |H_r|^2 + noise_var for soft demodulation; cells whose denominator
    is zero are erased (set to 0, i.e. no information).
    """
    rx = np.asarray(rx_grids)
    h = np.asarray(h)
    if rx.ndim == 2:
        rx = rx[None]
    if h.ndim == 2:
        h = h[None]
    if rx.shape != h.shape:
        raise ValueError(f"rx grids {rx.shape} and estimates {h.shape} differ in shape")
    combined = np.sum(rx * np.conj(h), axis=0)
    if mode == "paper":
        return combined
    if mode == "mrc-normalized":
        denom = np.sum(np.abs(h) ** 2, axis=0) + noise_var
        out = np.zeros_like(combined)
        np.divide(combined, denom, out=out, where=denom > 0)
        return out
    raise ValueError(f"unknown equalizer mode {mode!r}")
