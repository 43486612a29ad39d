"""End-to-end orchestration: subframe simulation, dataset generation,
model training entry point, and estimator evaluation (BLER / EVM / MSE).

Every (speed, snr, subframe) work item derives its RNG stream from
(master_seed, speed, snr, subframe_index), so results do not depend on
execution order.  The decoding receiver equalizes the raw frequency-domain
grids with normalized maximum-ratio combining, then inverse-precodes the
data columns and soft-demaps with per-column reliability weighting.
"""

from __future__ import annotations

import os

import numpy as np

from . import chanest, transport
from .channel import add_awgn, propagate
from .config import RunConfig
from .dataset import (
    DatasetHeader,
    SampleRecord,
    dataset_filename,
    iter_records,
    read_header,
    write_dataset_file,
)
from .dmrs import dmrs_for_subframe
from .grid import data_symbol_indices, map_subframe
from .metrics import MetricsRow, estimate_mse, evm, write_metrics_csv
from .nn.checkpoint import save_model
from .nn.model import Model, build_model, predict, to_channels
from .nn.training import TrainConfig, train
from .scfdma import demodulate, modulate

ESTIMATORS = ("perfect", "ls", "ann")

_NOISE_FLOOR = 1e-12  # keeps noiseless LLR scaling finite


def subframe_seed(master_seed: int, speed_kmph: float, snr_db: float, subframe: int):
    """Order-independent RNG root for one work item."""
    snr_key = 2**30 if not np.isfinite(snr_db) else int(round(snr_db * 1000)) + 2**24
    return np.random.SeedSequence(
        [int(master_seed), int(round(speed_kmph * 1000)), snr_key, int(subframe)]
    )


def encode_payload(payload_bits: np.ndarray, cfg: RunConfig) -> np.ndarray:
    """Payload bits -> the QPSK data-symbol stream of one subframe."""
    tcfg = cfg.transport_cfg()
    block = transport.crc_attach(payload_bits, tcfg)
    coded = transport.conv_encode(block)
    matched = transport.rate_match(coded, tcfg.coded_bits_target)
    return transport.qpsk_map(matched)


def extract_data_stream(grid: np.ndarray, cfg: RunConfig) -> np.ndarray:
    """Data-column cells in transmit order (ascending symbol, then subcarrier)."""
    cols = data_symbol_indices(cfg.grid_cfg())
    return np.asarray(grid)[:, cols].T.reshape(-1)


def simulate_subframe(
    cfg: RunConfig, speed_kmph: float, snr_db: float, subframe: int
) -> SampleRecord:
    """Transmit, fade, add noise, demodulate, and estimate one subframe."""
    seed = subframe_seed(cfg.master_seed, speed_kmph, snr_db, subframe)
    payload_ss, channel_ss, noise_ss = seed.spawn(3)

    tcfg = cfg.transport_cfg()
    payload = np.random.default_rng(payload_ss).integers(0, 2, tcfg.tbs).astype(np.uint8)
    data_syms = encode_payload(payload, cfg)
    gcfg = cfg.grid_cfg()
    dmrs_seqs = dmrs_for_subframe(cfg.dmrs_cfg(), len(gcfg.dmrs_symbol_indices))
    tx_grid = map_subframe(data_syms, dmrs_seqs, gcfg)
    wf = modulate(tx_grid, cfg.modem_cfg(), gcfg)

    rx_wfs, realization = propagate(
        wf, cfg.channel_cfg(speed_kmph, seed=channel_ss), cfg.modem_cfg(), gcfg.n_subcarriers
    )
    ref_power = float(np.mean([np.mean(np.abs(w.samples) ** 2) for w in rx_wfs]))
    noise_children = noise_ss.spawn(len(rx_wfs))
    raw_cfg = cfg.modem_cfg(transform_precoding=False)
    rx_grids = []
    h_noisy = []
    for w, child in zip(rx_wfs, noise_children):
        noisy = add_awgn(w, snr_db, ref_power, child)
        y = demodulate(noisy, raw_cfg, gcfg)
        rx_grids.append(y)
        h_noisy.append(chanest.noisy_estimate(y, dmrs_seqs, gcfg))

    return SampleRecord(
        subframe_index=subframe,
        payload_bits=payload,
        h_noisy=np.stack(h_noisy),
        h_perf=realization.freq_response,
        rx_grids=np.stack(rx_grids),
    )


def generate_dataset(cfg: RunConfig, out_dir) -> list[str]:
    """Simulate and persist every (speed, snr) file; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    gcfg = cfg.grid_cfg()
    paths = []
    for speed in cfg.speeds_kmph:
        for snr in cfg.snr_db:
            records = [
                simulate_subframe(cfg, speed, snr, sf) for sf in range(cfg.n_subframes)
            ]
            header = DatasetHeader(
                n_records=len(records),
                n_rx=cfg.n_rx,
                n_sc=gcfg.n_subcarriers,
                n_sym=gcfg.n_symbols,
                tbs=cfg.tbs,
                speed_kmph=speed,
                snr_db=snr,
            )
            path = os.path.join(out_dir, dataset_filename(speed, snr))
            write_dataset_file(path, header, records)
            paths.append(path)
    return paths


def dataset_paths(cfg: RunConfig, data_dir) -> list[str]:
    return [
        os.path.join(data_dir, dataset_filename(speed, snr))
        for speed in cfg.speeds_kmph
        for snr in cfg.snr_db
    ]


def load_training_arrays(cfg: RunConfig, data_dir):
    """Stack every record's per-antenna matrices into network samples.

    Returns (inputs, targets, strata): float32 channel tensors and one
    stratum id per sample so the training split stays uniform across
    (speed, snr) cells.
    """
    inputs, targets, strata = [], [], []
    for stratum, path in enumerate(dataset_paths(cfg, data_dir)):
        if not os.path.exists(path):
            raise FileNotFoundError(f"dataset file missing: {path}")
        for header, rec in iter_records(path, want_rx=False):
            for r in range(header.n_rx):
                inputs.append(to_channels(rec.h_noisy[r]).astype(np.float32))
                targets.append(to_channels(rec.h_perf[r]).astype(np.float32))
                strata.append(stratum)
    return np.stack(inputs), np.stack(targets), np.array(strata)


def train_model(cfg: RunConfig, data_dir, model_path=None) -> tuple[Model, list[float]]:
    """Train the denoiser on the dataset's 30% split and optionally save it."""
    inputs, targets, strata = load_training_arrays(cfg, data_dir)
    model = build_model(seed=cfg.master_seed)
    tcfg = TrainConfig(
        epochs=cfg.epochs,
        split=cfg.train_split,
        batch_size=cfg.batch_size,
        learning_rate=cfg.learning_rate,
        beta1=cfg.adam_beta1,
        beta2=cfg.adam_beta2,
        eps=cfg.adam_eps,
        bias_correction=cfg.adam_bias_correction,
        seed=cfg.master_seed,
    )
    history = train(model, inputs, targets, tcfg, strata=strata)
    if model_path is not None:
        meta = tcfg.to_dict()
        meta["loss_history"] = history
        save_model(model_path, model, meta)
    return model, history


def _column_llr_weights(h_est: np.ndarray, noise_var: float, cols) -> tuple[np.ndarray, np.ndarray]:
    """Per-data-column signal gain and effective noise variance after
    normalized MRC, for soft-demapper reliability weighting."""
    a = np.sum(np.abs(h_est) ** 2, axis=0)[:, cols]  # (n_sc, n_data)
    denom = a + noise_var
    gain = np.where(denom > 0, a / denom, 0.0).mean(axis=0)
    nvar = np.where(denom > 0, a * noise_var / denom**2, _NOISE_FLOOR).mean(axis=0)
    return gain, np.maximum(nvar, _NOISE_FLOOR)


def _receive_symbols(
    rx_grids: np.ndarray, h_est: np.ndarray, noise_var: float, cfg: RunConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Equalize, inverse-precode, and return (symbols, llrs) for one subframe."""
    gcfg = cfg.grid_cfg()
    cols = data_symbol_indices(gcfg)
    eq = chanest.equalize(rx_grids, h_est, noise_var, mode="mrc-normalized")
    data = np.fft.ifft(eq[:, cols], axis=0, norm="ortho")  # (n_sc, n_data)
    syms = data.T.reshape(-1)
    gain, nvar = _column_llr_weights(h_est, noise_var, cols)
    n_sc = gcfg.n_subcarriers
    gain_per_sym = np.repeat(gain, n_sc)
    nvar_per_sym = np.repeat(nvar, n_sc)
    llrs = transport.soft_demap(syms, nvar_per_sym, gain_per_sym)
    return syms, llrs


def run_eval(
    cfg: RunConfig,
    data_dir,
    model: Model | None = None,
    estimators: tuple[str, ...] = ESTIMATORS,
    csv_path=None,
) -> list[MetricsRow]:
    """Score each estimator per (speed, snr) point over the stored dataset."""
    for est in estimators:
        if est not in ESTIMATORS:
            raise ValueError(f"unknown estimator {est!r}")
    if "ann" in estimators and model is None:
        raise ValueError("estimator 'ann' requires a trained model")

    gcfg = cfg.grid_cfg()
    tcfg = cfg.transport_cfg()
    dmrs_seqs = dmrs_for_subframe(cfg.dmrs_cfg(), len(gcfg.dmrs_symbol_indices))
    rows: list[MetricsRow] = []
    for path in dataset_paths(cfg, data_dir):
        if not os.path.exists(path):
            raise FileNotFoundError(f"dataset file missing: {path}")
        header = read_header(path)
        records = [rec for _, rec in iter_records(path)]

        h_pred = None
        if "ann" in estimators:
            stacked = np.stack([rec.h_noisy for rec in records])  # (n, n_rx, sc, sym)
            h_pred = predict(model, stacked)

        acc = {
            est: {"err": 0.0, "ref": 0.0, "mse": 0.0, "llrs": []} for est in estimators
        }
        payloads = []
        for i, rec in enumerate(records):
            tx_syms = encode_payload(rec.payload_bits, cfg)
            payloads.append(rec.payload_bits)
            rx = rec.rx_grids.astype(np.complex128)
            h_ls = []
            sigma2 = []
            for r in range(header.n_rx):
                h, s2 = chanest.practical_estimate(rx[r], dmrs_seqs, gcfg, cfg.avg_window)
                h_ls.append(h)
                sigma2.append(s2)
            h_ls = np.stack(h_ls)
            noise_var = float(np.mean(sigma2))

            for est in estimators:
                if est == "perfect":
                    h_est = rec.h_perf.astype(np.complex128)
                elif est == "ls":
                    h_est = h_ls
                else:
                    h_est = h_pred[i].astype(np.complex128)
                syms, llrs = _receive_symbols(rx, h_est, noise_var, cfg)
                a = acc[est]
                a["err"] += float(np.sum(np.abs(syms - tx_syms) ** 2))
                a["ref"] += float(np.sum(np.abs(tx_syms) ** 2))
                a["mse"] += estimate_mse(h_est, rec.h_perf)
                a["llrs"].append(llrs)

        for est in estimators:
            a = acc[est]
            llr_mat = np.stack(a["llrs"])
            decoded, crc_ok = transport.decode(llr_mat, tcfg)
            errors = sum(
                transport.block_error(payloads[i], decoded[i], bool(crc_ok[i]))
                for i in range(len(payloads))
            )
            n = len(payloads)
            rows.append(
                MetricsRow(
                    speed_kmph=header.speed_kmph,
                    snr_db=header.snr_db,
                    estimator=est,
                    bler=errors / n,
                    evm_pct=float(100.0 * np.sqrt(a["err"] / a["ref"])),
                    mse=a["mse"] / n,
                    blocks=n,
                )
            )
    if csv_path is not None:
        write_metrics_csv(csv_path, rows)
    return rows


def write_report(rows: list[MetricsRow], out_dir) -> list[str]:
    """One plot-ready file per (speed, estimator) curve with SNR/BLER columns."""
    os.makedirs(out_dir, exist_ok=True)
    curves: dict[tuple[float, str], list[MetricsRow]] = {}
    for row in rows:
        curves.setdefault((row.speed_kmph, row.estimator), []).append(row)
    paths = []
    for (speed, est), points in sorted(curves.items()):
        path = os.path.join(out_dir, f"curve_speed{speed:g}kmph_{est}.csv")
        with open(path, "w") as fh:
            fh.write("snr_db,bler,evm_pct\n")
            for row in sorted(points, key=lambda r: r.snr_db):
                fh.write(f"{row.snr_db:g},{row.bler:.6g},{row.evm_pct:.6g}\n")
        paths.append(path)
    return paths
