"""Run configuration: simulation-parameter defaults, plain-text config files,
and builders for the per-module configs.

Config files are ``key=value`` lines (``#`` comments allowed).  SNR lists
accept either comma syntax (``-2,0,2``) or range syntax ``start:step:stop``
with an inclusive stop.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .channel import EVA_PROFILE, FLAT_PROFILE, ChannelConfig
from .dmrs import DmrsConfig
from .grid import GridConfig
from .scfdma import ModemConfig
from .transport import TransportConfig

PROFILES = {"eva": EVA_PROFILE, "flat": FLAT_PROFILE}


@dataclass(frozen=True)
class RunConfig:
    # high-level simulation parameters
    bandwidth_mhz: float = 10.0
    nslrb: int = 48
    tbs: int = 3496
    n_subframes: int = 500
    snr_db: tuple[float, ...] = (-2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0)
    speeds_kmph: tuple[float, ...] = (100.0, 200.0, 300.0, 400.0)
    modulation: str = "qpsk"
    delay_profile: str = "eva"
    mimo: str = "1x2"
    carrier_freq_hz: float = 5.9e9
    master_seed: int = 0
    # estimation
    avg_window_freq: int = 7
    avg_window_time: int = 1
    dmrs_root_q: int = 25
    dmrs_cyclic_shift: float = 0.0
    # network training
    epochs: int = 20
    train_split: float = 0.3
    batch_size: int = 32
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    adam_bias_correction: bool = True

    def __post_init__(self) -> None:
        if self.modulation.lower() != "qpsk":
            raise ValueError(f"unsupported modulation {self.modulation!r}")
        if self.delay_profile.lower() not in PROFILES:
            raise ValueError(f"unknown delay profile {self.delay_profile!r}")
        if self.mimo.lower() not in ("1x1", "1x2"):
            raise ValueError(f"unsupported antenna configuration {self.mimo!r}")
        if self.n_subframes < 1:
            raise ValueError("n_subframes must be positive")

    @property
    def n_rx(self) -> int:
        return int(self.mimo.lower().split("x")[1])

    @property
    def n_subcarriers(self) -> int:
        return 12 * self.nslrb

    def grid_cfg(self) -> GridConfig:
        return GridConfig(n_prb=self.nslrb)

    def modem_cfg(self, transform_precoding: bool = True) -> ModemConfig:
        return ModemConfig(transform_precoding=transform_precoding)

    def dmrs_cfg(self) -> DmrsConfig:
        return DmrsConfig(
            m_sc=self.n_subcarriers,
            root_q=self.dmrs_root_q,
            cyclic_shift=self.dmrs_cyclic_shift,
        )

    def transport_cfg(self) -> TransportConfig:
        grid = self.grid_cfg()
        n_data = grid.n_data_symbols * grid.n_subcarriers
        return TransportConfig(tbs=self.tbs, coded_bits_target=2 * n_data)

    def channel_cfg(self, speed_kmph: float, seed, snr_db: float | None = None) -> ChannelConfig:
        return ChannelConfig(
            profile=PROFILES[self.delay_profile.lower()],
            speed_kmph=speed_kmph,
            carrier_freq_hz=self.carrier_freq_hz,
            n_rx=self.n_rx,
            seed=seed,
            snr_db=snr_db,
        )

    @property
    def avg_window(self) -> tuple[int, int]:
        return (self.avg_window_freq, self.avg_window_time)

    def to_metadata(self) -> dict:
        """Every field, for the run metadata file."""
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


def parse_number_list(text: str) -> tuple[float, ...]:
    """Parse ``a,b,c`` or ``start:step:stop`` (stop inclusive)."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range syntax is start:step:stop, got {text!r}")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("range step must be positive")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + i * step for i in range(n))
    return tuple(float(p) for p in text.split(",") if p.strip())


_BOOL_FIELDS = {"adam_bias_correction"}
_INT_FIELDS = {
    "nslrb",
    "tbs",
    "n_subframes",
    "master_seed",
    "avg_window_freq",
    "avg_window_time",
    "dmrs_root_q",
    "epochs",
    "batch_size",
}
_FLOAT_FIELDS = {
    "bandwidth_mhz",
    "carrier_freq_hz",
    "dmrs_cyclic_shift",
    "train_split",
    "learning_rate",
    "adam_beta1",
    "adam_beta2",
    "adam_eps",
}
_LIST_FIELDS = {"snr_db", "speeds_kmph"}
_STR_FIELDS = {"modulation", "delay_profile", "mimo"}


def parse_config_file(path) -> RunConfig:
    """Read key=value overrides for RunConfig from a plain-text file."""
    overrides: dict = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key in _LIST_FIELDS:
                overrides[key] = parse_number_list(value)
            elif key in _INT_FIELDS:
                overrides[key] = int(value)
            elif key in _FLOAT_FIELDS:
                overrides[key] = float(value)
            elif key in _BOOL_FIELDS:
                overrides[key] = value.lower() in ("1", "true", "yes", "on")
            elif key in _STR_FIELDS:
                overrides[key] = value
            else:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
    return RunConfig(**overrides)


def write_metadata(path, cfg: RunConfig, extra: dict | None = None) -> None:
    """Plain-text key=value metadata recording every configured default."""
    items = dict(cfg.to_metadata())
    if extra:
        items.update(extra)
    with open(path, "w") as fh:
        for key in sorted(items):
            fh.write(f"{key}={items[key]}\n")
