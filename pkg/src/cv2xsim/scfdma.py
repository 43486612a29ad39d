"""SC-FDMA modem: DFT-precoded OFDM between resource grids and waveforms.

LTE 10 MHz numerology: 1024-point FFT at 15.36 Msps, normal cyclic prefix
(80 samples on symbols 0 and 7, 72 otherwise), 15360 samples per subframe.
All transforms are unitary (1/sqrt(N) both ways) so grid and symbol-body
energies agree.  Active subcarriers sit symmetrically around DC with the
DC bin left empty.  Data columns are DFT-precoded; DMRS columns are
frequency-domain sequences and map directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridConfig, data_symbol_indices

NORMAL_CP_10MHZ = (80, 72, 72, 72, 72, 72, 72, 80, 72, 72, 72, 72, 72, 72)


@dataclass(frozen=True)
class ModemConfig:
    fft_size: int = 1024
    sample_rate: float = 15.36e6
    cp_lengths: tuple[int, ...] = NORMAL_CP_10MHZ
    transform_precoding: bool = True

    def __post_init__(self) -> None:
        if any(cp < 0 or cp > self.fft_size for cp in self.cp_lengths):
            raise ValueError("cyclic prefix lengths must lie in [0, fft_size]")

    @property
    def n_symbols(self) -> int:
        return len(self.cp_lengths)

    @property
    def subframe_samples(self) -> int:
        return sum(self.cp_lengths) + self.n_symbols * self.fft_size


@dataclass(frozen=True)
class Waveform:
    samples: np.ndarray
    sample_rate: float


def subcarrier_bins(n_active: int, fft_size: int) -> np.ndarray:
    """FFT bin index per active subcarrier, ascending in frequency, DC skipped."""
    if n_active % 2 != 0:
        raise ValueError("active subcarrier count must be even")
    if n_active >= fft_size:
        raise ValueError("active subcarriers must fit inside the FFT, DC excluded")
    half = n_active // 2
    offsets = np.concatenate([np.arange(-half, 0), np.arange(1, half + 1)])
    return offsets % fft_size


def subcarrier_offsets(n_active: int) -> np.ndarray:
    """Signed frequency offsets (in bins) per active subcarrier."""
    half = n_active // 2
    return np.concatenate([np.arange(-half, 0), np.arange(1, half + 1)])


def symbol_starts(cfg: ModemConfig) -> np.ndarray:
    """Sample index where each symbol (including its CP) begins."""
    lengths = np.array(cfg.cp_lengths) + cfg.fft_size
    return np.concatenate([[0], np.cumsum(lengths)[:-1]])


def symbol_midpoint_times(cfg: ModemConfig) -> np.ndarray:
    """Midpoint of each symbol body, in seconds from the subframe start."""
    starts = symbol_starts(cfg)
    mids = starts + np.array(cfg.cp_lengths) + cfg.fft_size / 2
    return mids / cfg.sample_rate


def modulate(grid: np.ndarray, cfg: ModemConfig, grid_cfg: GridConfig) -> Waveform:
    """Grid to time-domain subframe: precode data columns, map, IFFT, prepend CP."""
    grid = np.asarray(grid, dtype=np.complex128)
    if grid.shape != (grid_cfg.n_subcarriers, cfg.n_symbols):
        raise ValueError(
            f"grid shape {grid.shape} does not match "
            f"({grid_cfg.n_subcarriers}, {cfg.n_symbols})"
        )
    bins = subcarrier_bins(grid_cfg.n_subcarriers, cfg.fft_size)
    freq = grid.copy()
    if cfg.transform_precoding:
        cols = data_symbol_indices(grid_cfg)
        freq[:, cols] = np.fft.fft(grid[:, cols], axis=0, norm="ortho")
    out = np.empty(cfg.subframe_samples, dtype=np.complex128)
    pos = 0
    for t in range(cfg.n_symbols):
        spectrum = np.zeros(cfg.fft_size, dtype=np.complex128)
        spectrum[bins] = freq[:, t]
        body = np.fft.ifft(spectrum, norm="ortho")
        cp = cfg.cp_lengths[t]
        out[pos : pos + cp] = body[cfg.fft_size - cp :]
        out[pos + cp : pos + cp + cfg.fft_size] = body
        pos += cp + cfg.fft_size
    return Waveform(samples=out, sample_rate=cfg.sample_rate)


def demodulate(wf: Waveform, cfg: ModemConfig, grid_cfg: GridConfig) -> np.ndarray:
    """Waveform to grid: strip CP, FFT, de-map, inverse-precode data columns.

    Exact inverse of ``modulate`` on a noiseless channel-free link.  With
    ``cfg.transform_precoding=False`` the raw frequency-domain grid is
    returned, which is the domain where per-subcarrier equalization runs.
    """
    samples = np.asarray(wf.samples)
    if samples.shape != (cfg.subframe_samples,):
        raise ValueError(
            f"waveform length {samples.shape} does not match one subframe "
            f"({cfg.subframe_samples} samples)"
        )
    bins = subcarrier_bins(grid_cfg.n_subcarriers, cfg.fft_size)
    grid = np.empty((grid_cfg.n_subcarriers, cfg.n_symbols), dtype=np.complex128)
    pos = 0
    for t in range(cfg.n_symbols):
        cp = cfg.cp_lengths[t]
        body = samples[pos + cp : pos + cp + cfg.fft_size]
        spectrum = np.fft.fft(body, norm="ortho")
        grid[:, t] = spectrum[bins]
        pos += cp + cfg.fft_size
    if cfg.transform_precoding:
        cols = data_symbol_indices(grid_cfg)
        grid[:, cols] = np.fft.ifft(grid[:, cols], axis=0, norm="ortho")
    return grid


def strip_cyclic_prefixes(wf: Waveform, cfg: ModemConfig) -> np.ndarray:
    """Concatenated symbol bodies with every cyclic prefix removed."""
    samples = np.asarray(wf.samples)
    if samples.shape != (cfg.subframe_samples,):
        raise ValueError("waveform length does not match one subframe")
    bodies = []
    pos = 0
    for cp in cfg.cp_lengths:
        bodies.append(samples[pos + cp : pos + cp + cfg.fft_size])
        pos += cp + cfg.fft_size
    return np.concatenate(bodies)
