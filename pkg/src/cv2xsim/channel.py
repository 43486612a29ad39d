"""Time-varying multipath fading, receive diversity, AWGN, ground-truth export.

Tapped-delay-line Rayleigh fading with a sum-of-sinusoids Jakes spectrum
per tap and per receive antenna.  Tap delays are rounded to the nearest
sample; the ground-truth frequency response is exported once per OFDM
symbol at the symbol-body midpoint, the same granularity the estimators
produce.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scfdma import ModemConfig, Waveform, subcarrier_offsets, symbol_midpoint_times

SPEED_OF_LIGHT = 2.998e8

# Extended Vehicular A: (delay ns, mean power dB), the standard 9-tap set.
EVA_PROFILE = (
    (0.0, 0.0),
    (30.0, -1.5),
    (150.0, -1.4),
    (310.0, -3.6),
    (370.0, -0.6),
    (710.0, -9.1),
    (1090.0, -7.0),
    (1730.0, -12.0),
    (2510.0, -16.9),
)

FLAT_PROFILE = ((0.0, 0.0),)


@dataclass(frozen=True)
class ChannelConfig:
    profile: tuple[tuple[float, float], ...] = EVA_PROFILE
    speed_kmph: float = 100.0
    carrier_freq_hz: float = 5.9e9
    n_rx: int = 2
    seed: object = None  # int or np.random.SeedSequence
    snr_db: float | None = None
    n_sinusoids: int = 32
    gain_sample_step: int = 128  # tap-gain evaluation stride, in waveform samples

    def __post_init__(self) -> None:
        if self.speed_kmph < 0:
            raise ValueError("speed must be nonnegative")
        if self.n_rx < 1:
            raise ValueError("need at least one receive antenna")
        if not self.profile:
            raise ValueError("profile must contain at least one tap")
        if self.n_sinusoids < 8:
            raise ValueError("too few sinusoids for a credible Doppler spectrum")


@dataclass
class ChannelRealization:
    """Per-antenna ground truth for one subframe."""

    freq_response: np.ndarray  # (n_rx, n_sc, n_symbols) complex
    tap_gains: np.ndarray  # (n_rx, n_taps, n_symbols) complex, at symbol midpoints
    tap_delays_samples: np.ndarray  # (n_taps,) int
    tap_powers: np.ndarray  # (n_taps,) linear, sums to 1
    midpoint_times: np.ndarray  # (n_symbols,) seconds


def doppler_from_speed(speed_kmph: float, carrier_freq_hz: float) -> float:
    """Maximum Doppler shift f_d = v * f_c / c."""
    if speed_kmph < 0:
        raise ValueError("speed must be nonnegative")
    return (speed_kmph / 3.6) * carrier_freq_hz / SPEED_OF_LIGHT


class JakesFader:
    """Independent sum-of-sinusoids Rayleigh processes for (n_rx, n_taps).

    Each process is (1/sqrt(N)) * sum_n exp(j*(2*pi*f_d*cos(a_n)*t + p_n))
    with arrival angles a_n and phases p_n drawn uniformly.  The ensemble
    autocorrelation is J0(2*pi*f_d*tau) and E|g|^2 = 1.
    """

    def __init__(
        self,
        n_rx: int,
        n_taps: int,
        max_doppler_hz: float,
        rng: np.random.Generator,
        n_sinusoids: int = 32,
    ) -> None:
        shape = (n_rx, n_taps, n_sinusoids)
        arrival = rng.uniform(0.0, 2 * np.pi, size=shape)
        self._omega = 2 * np.pi * max_doppler_hz * np.cos(arrival)
        self._phase = rng.uniform(0.0, 2 * np.pi, size=shape)
        self._scale = 1.0 / np.sqrt(n_sinusoids)

    def gains(self, times: np.ndarray) -> np.ndarray:
        """Complex gains at the given times, shape (n_rx, n_taps, len(times))."""
        t = np.asarray(times, dtype=np.float64)
        phase = self._omega[..., None] * t + self._phase[..., None]
        return self._scale * np.exp(1j * phase).sum(axis=2)


def _tap_layout(cfg: ChannelConfig, sample_rate: float) -> tuple[np.ndarray, np.ndarray]:
    delays_ns = np.array([d for d, _ in cfg.profile], dtype=np.float64)
    powers_db = np.array([p for _, p in cfg.profile], dtype=np.float64)
    delays = np.rint(delays_ns * 1e-9 * sample_rate).astype(int)
    powers = 10.0 ** (powers_db / 10.0)
    powers /= powers.sum()
    return delays, powers


def propagate(
    wf: Waveform, cfg: ChannelConfig, modem_cfg: ModemConfig, n_subcarriers: int = 576
) -> tuple[list[Waveform], ChannelRealization]:
    """Fade one subframe through the tapped delay line on every rx antenna.

    Tap gains are evaluated on a decimated time grid (cfg.gain_sample_step,
    far above twice the maximum Doppler) and linearly interpolated to sample
    rate, so the channel varies continuously within a symbol.  Returns the
    faded per-antenna waveforms and the exact symbol-midpoint ground truth.
    """
    x = np.asarray(wf.samples)
    n = x.shape[0]
    fs = wf.sample_rate
    rng = np.random.default_rng(cfg.seed)
    delays, powers = _tap_layout(cfg, fs)
    fd = doppler_from_speed(cfg.speed_kmph, cfg.carrier_freq_hz)
    fader = JakesFader(cfg.n_rx, len(delays), fd, rng, cfg.n_sinusoids)

    coarse_idx = np.arange(0, n, cfg.gain_sample_step)
    if coarse_idx[-1] != n - 1:
        coarse_idx = np.append(coarse_idx, n - 1)
    g_coarse = fader.gains(coarse_idx / fs)  # (n_rx, n_taps, n_coarse)
    sample_idx = np.arange(n)
    amp = np.sqrt(powers)

    outputs = []
    for r in range(cfg.n_rx):
        y = np.zeros(n, dtype=np.complex128)
        for l, d in enumerate(delays):
            g = np.interp(sample_idx, coarse_idx, g_coarse[r, l].real) + 1j * np.interp(
                sample_idx, coarse_idx, g_coarse[r, l].imag
            )
            if d == 0:
                y += amp[l] * g * x
            else:
                y[d:] += amp[l] * g[d:] * x[: n - d]
        outputs.append(Waveform(samples=y, sample_rate=fs))

    mids = symbol_midpoint_times(modem_cfg)
    g_mid = fader.gains(mids)  # (n_rx, n_taps, n_symbols)
    offsets = subcarrier_offsets(n_subcarriers)
    # (n_sc, n_taps) phase slopes for sample-aligned tap delays
    phase = np.exp(-2j * np.pi * offsets[:, None] * delays[None, :] / modem_cfg.fft_size)
    weighted = phase * amp[None, :]
    freq_response = np.einsum("kl,rlt->rkt", weighted, g_mid)

    realization = ChannelRealization(
        freq_response=freq_response,
        tap_gains=g_mid,
        tap_delays_samples=delays,
        tap_powers=powers,
        midpoint_times=mids,
    )
    return outputs, realization


def add_awgn(
    wf: Waveform, snr_db: float | None, signal_power_ref: float, seed: object
) -> Waveform:
    """Add circularly-symmetric complex Gaussian noise at the given SNR.

    Noise variance is signal_power_ref / 10^(snr/10), split equally between
    real and imaginary parts.  ``snr_db=None`` or +inf disables the noise.
    """
    samples = np.asarray(wf.samples)
    if snr_db is None or np.isinf(snr_db):
        return Waveform(samples=samples.copy(), sample_rate=wf.sample_rate)
    if not np.isfinite(snr_db):
        raise ValueError("snr_db must be finite or +inf")
    rng = np.random.default_rng(seed)
    noise_var = signal_power_ref / 10.0 ** (snr_db / 10.0)
    scale = np.sqrt(noise_var / 2.0)
    noise = scale * (
        rng.standard_normal(samples.shape) + 1j * rng.standard_normal(samples.shape)
    )
    return Waveform(samples=samples + noise, sample_rate=wf.sample_rate)
