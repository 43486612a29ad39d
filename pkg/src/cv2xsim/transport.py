"""Bit-level transport chain for BLER: CRC-24A, tail-biting convolutional
coding, circular-buffer rate matching, Gray QPSK, max-log soft demapping,
and a batched soft-input Viterbi decoder.

The code is rate 1/3, constraint length 7, generators 133/171/165 octal.
Coded bits are emitted interleaved per input bit (d0 d1 d2), and rate
matching repeats the coded block circularly up to the target length.
QPSK uses Gray mapping with the 0 -> +1 amplitude convention: bit pair
00 -> (1+j)/sqrt(2), first bit on I, second on Q.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CRC24A_POLY = 0x864CFB
CRC24_LEN = 24

CONV_GENERATORS_OCT = (0o133, 0o171, 0o165)
CONSTRAINT_LEN = 7
N_STATES = 64

_WRAP_STEPS = 96  # circular extension on each side for tail-biting decoding


@dataclass(frozen=True)
class TransportConfig:
    tbs: int = 3496
    crc_len: int = CRC24_LEN
    coded_bits_target: int = 11520  # 10 data symbols x 576 subcarriers x 2 bits

    def __post_init__(self) -> None:
        if self.tbs + self.crc_len > self.coded_bits_target:
            raise ValueError("payload plus CRC exceeds the coded-bit budget")

    @property
    def block_len(self) -> int:
        return self.tbs + self.crc_len

    @property
    def coded_len(self) -> int:
        return 3 * self.block_len


# ---------------------------------------------------------------------------
# CRC-24A


def _crc24_table() -> np.ndarray:
    table = np.zeros(256, dtype=np.uint32)
    for byte in range(256):
        reg = byte << 16
        for _ in range(8):
            reg <<= 1
            if reg & 0x1000000:
                reg ^= CRC24A_POLY
        table[byte] = reg & 0xFFFFFF
    return table


_CRC24_TABLE = _crc24_table()


def crc24(bits: np.ndarray) -> np.ndarray:
    """CRC-24A parity bits (MSB first) over a bit array, zero initial state."""
    bits = np.asarray(bits, dtype=np.uint8)
    reg = 0
    n_full = bits.size // 8
    if n_full:
        packed = np.packbits(bits[: n_full * 8])
        for byte in packed:
            reg = ((reg << 8) & 0xFFFFFF) ^ int(_CRC24_TABLE[((reg >> 16) ^ byte) & 0xFF])
    for b in bits[n_full * 8 :]:
        reg = ((reg << 1) & 0xFFFFFF) ^ (CRC24A_POLY if ((reg >> 23) ^ int(b)) & 1 else 0)
    return np.array([(reg >> (23 - i)) & 1 for i in range(24)], dtype=np.uint8)


def crc_attach(payload: np.ndarray, cfg: TransportConfig) -> np.ndarray:
    payload = np.asarray(payload, dtype=np.uint8)
    if payload.shape != (cfg.tbs,):
        raise ValueError(f"payload length {payload.shape} does not match tbs={cfg.tbs}")
    return np.concatenate([payload, crc24(payload)])


def crc_check(block: np.ndarray, cfg: TransportConfig) -> bool:
    block = np.asarray(block, dtype=np.uint8)
    if block.shape != (cfg.block_len,):
        raise ValueError("block length does not match tbs + crc_len")
    return bool(np.array_equal(crc24(block[: cfg.tbs]), block[cfg.tbs :]))


# ---------------------------------------------------------------------------
# Tail-biting convolutional code


def _generator_taps() -> np.ndarray:
    """(3, 7) tap matrix; column 0 taps the current bit."""
    taps = np.zeros((3, CONSTRAINT_LEN), dtype=np.uint8)
    for k, g in enumerate(CONV_GENERATORS_OCT):
        for j in range(CONSTRAINT_LEN):
            taps[k, j] = (g >> (CONSTRAINT_LEN - 1 - j)) & 1
    return taps


_TAPS = _generator_taps()


def conv_encode(bits: np.ndarray) -> np.ndarray:
    """Rate-1/3 tail-biting encoding; output interleaved d0 d1 d2 per input bit.

    Tail-biting initializes the register with the last 6 input bits, which
    makes the encoder a circular convolution over GF(2).
    """
    u = np.asarray(bits, dtype=np.uint8)
    if u.size < CONSTRAINT_LEN - 1:
        raise ValueError("input shorter than the encoder memory")
    out = np.zeros((u.size, 3), dtype=np.uint8)
    for k in range(3):
        acc = np.zeros(u.size, dtype=np.uint8)
        for j in range(CONSTRAINT_LEN):
            if _TAPS[k, j]:
                acc ^= np.roll(u, j)
        out[:, k] = acc
    return out.reshape(-1)


def rate_match(coded: np.ndarray, target_len: int) -> np.ndarray:
    """Circular-buffer repetition (or truncation) to exactly target_len bits."""
    coded = np.asarray(coded)
    if coded.size == 0 or target_len < 1:
        raise ValueError("nothing to rate match")
    idx = np.arange(target_len) % coded.size
    return coded[idx]


def de_rate_match(llrs: np.ndarray, coded_len: int) -> np.ndarray:
    """Combine repeated soft bits additively; punctured positions stay zero.

    Accepts a single block (n_rm,) or a batch (n_blocks, n_rm).
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    single = llrs.ndim == 1
    llrs = np.atleast_2d(llrs)
    n_blocks, n_rm = llrs.shape
    idx = np.arange(n_rm) % coded_len
    acc = np.zeros((n_blocks, coded_len))
    np.add.at(acc, (np.arange(n_blocks)[:, None], idx[None, :]), llrs)
    return acc[0] if single else acc


# ---------------------------------------------------------------------------
# QPSK


def qpsk_map(bits: np.ndarray) -> np.ndarray:
    """Gray QPSK, unit energy: I from even-position bits, Q from odd."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % 2 != 0:
        raise ValueError("bit count must be even for QPSK")
    pairs = bits.reshape(-1, 2).astype(np.float64)
    return ((1.0 - 2.0 * pairs[:, 0]) + 1j * (1.0 - 2.0 * pairs[:, 1])) / np.sqrt(2.0)


def qpsk_hard_demap(symbols: np.ndarray) -> np.ndarray:
    symbols = np.asarray(symbols)
    bits = np.empty((symbols.size, 2), dtype=np.uint8)
    bits[:, 0] = symbols.real < 0
    bits[:, 1] = symbols.imag < 0
    return bits.reshape(-1)


def soft_demap(symbols: np.ndarray, noise_var, gain=1.0) -> np.ndarray:
    """Exact max-log LLRs for Gray QPSK; positive LLR means bit 0.

    ``noise_var`` and ``gain`` broadcast against the symbol array, so
    per-symbol reliability weighting is supported.
    """
    symbols = np.asarray(symbols)
    nv = np.broadcast_to(np.asarray(noise_var, dtype=np.float64), symbols.shape)
    if np.any(nv <= 0):
        raise ValueError("noise_var must be positive")
    g = np.broadcast_to(np.asarray(gain, dtype=np.float64), symbols.shape)
    scale = 2.0 * np.sqrt(2.0) * g / nv
    llrs = np.empty((symbols.size, 2))
    llrs[:, 0] = (scale * symbols.real).reshape(-1)
    llrs[:, 1] = (scale * symbols.imag).reshape(-1)
    return llrs.reshape(-1)


# ---------------------------------------------------------------------------
# Batched tail-biting Viterbi

# State packs the previous 6 input bits, most recent in the LSB.
_STATES = np.arange(N_STATES)


def _transition_tables() -> tuple[np.ndarray, np.ndarray]:
    """next_state[s, u] and output_bits[s, u, k] for the 64-state trellis."""
    next_state = np.zeros((N_STATES, 2), dtype=np.int64)
    outputs = np.zeros((N_STATES, 2, 3), dtype=np.uint8)
    for s in range(N_STATES):
        prev = [(s >> j) & 1 for j in range(6)]  # prev[j] = input j+1 steps ago
        for u in (0, 1):
            reg = [u] + prev
            next_state[s, u] = ((s << 1) | u) & (N_STATES - 1)
            for k in range(3):
                outputs[s, u, k] = np.bitwise_xor.reduce(_TAPS[k] & np.array(reg))
    return next_state, outputs


_NEXT_STATE, _OUTPUTS = _transition_tables()
# sign convention: +1 where the branch emits bit 0 (matches positive LLRs)
_BRANCH_SIGNS = 1.0 - 2.0 * _OUTPUTS.astype(np.float64)  # (64, 2, 3)
# predecessors of each state ns: input bit is ns & 1, two candidate sources
_PRED = np.stack([_STATES >> 1, (_STATES >> 1) | (N_STATES // 2)], axis=1)  # (64, 2)


def viterbi_decode(llr3: np.ndarray) -> np.ndarray:
    """Soft-input tail-biting Viterbi over a batch of blocks.

    ``llr3`` has shape (n_blocks, n_bits, 3): one LLR triple per trellis
    step.  Tail-biting is handled by a circular extension of the metric
    sequence; only the middle window's decisions are kept.
    """
    llr3 = np.asarray(llr3, dtype=np.float64)
    if llr3.ndim == 2:
        llr3 = llr3[None]
    if llr3.ndim != 3 or llr3.shape[-1] != 3:
        raise ValueError("expected LLR triples in the last axis")
    n_blocks, n_bits, _ = llr3.shape
    wrap = min(_WRAP_STEPS, n_bits)
    ext = np.concatenate([llr3[:, n_bits - wrap :], llr3, llr3[:, :wrap]], axis=1)
    n_steps = ext.shape[1]

    metrics = np.zeros((n_blocks, N_STATES))
    decisions = np.empty((n_steps, n_blocks, N_STATES), dtype=np.uint8)

    # branch metric of arriving at ns from predecessor choice i:
    # correlate the predecessor's emitted triple with the step's LLRs
    sign_a = _BRANCH_SIGNS[_PRED[:, 0], (_STATES & 1)]  # (64, 3)
    sign_b = _BRANCH_SIGNS[_PRED[:, 1], (_STATES & 1)]
    for t in range(n_steps):
        step = ext[:, t]  # (n_blocks, 3)
        bm_a = step @ sign_a.T  # (n_blocks, 64)
        bm_b = step @ sign_b.T
        cand_a = metrics[:, _PRED[:, 0]] + bm_a
        cand_b = metrics[:, _PRED[:, 1]] + bm_b
        take_b = cand_b > cand_a
        decisions[t] = take_b
        metrics = np.where(take_b, cand_b, cand_a)
        metrics -= metrics.max(axis=1, keepdims=True)

    state = metrics.argmax(axis=1)
    rows = np.arange(n_blocks)
    bits = np.zeros((n_blocks, n_bits), dtype=np.uint8)
    for t in range(n_steps - 1, -1, -1):
        if wrap <= t < wrap + n_bits:
            bits[:, t - wrap] = state & 1
        choice = decisions[t][rows, state]
        state = (state >> 1) | (choice.astype(np.int64) << 5)
    return bits


def decode(llrs: np.ndarray, cfg: TransportConfig) -> tuple[np.ndarray, np.ndarray]:
    """Rate-matched LLRs -> payload bits and per-block CRC verdicts.

    Accepts (coded_bits_target,) or (n_blocks, coded_bits_target).
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    single = llrs.ndim == 1
    llrs = np.atleast_2d(llrs)
    if llrs.shape[1] != cfg.coded_bits_target:
        raise ValueError(
            f"expected {cfg.coded_bits_target} soft bits per block, got {llrs.shape[1]}"
        )
    acc = de_rate_match(llrs, cfg.coded_len)
    acc = np.atleast_2d(acc)
    llr3 = acc.reshape(acc.shape[0], cfg.block_len, 3)
    blocks = viterbi_decode(llr3)
    payloads = blocks[:, : cfg.tbs]
    crc_ok = np.array([crc_check(b, cfg) for b in blocks], dtype=bool)
    if single:
        return payloads[0], crc_ok[0]
    return payloads, crc_ok


def block_error(tx_payload: np.ndarray, rx_payload: np.ndarray, crc_ok: bool) -> bool:
    """A block is in error on any payload mismatch or a failed CRC."""
    tx_payload = np.asarray(tx_payload)
    rx_payload = np.asarray(rx_payload)
    if tx_payload.shape != rx_payload.shape:
        raise ValueError("payload lengths differ")
    return bool(not crc_ok or not np.array_equal(tx_payload, rx_payload))


# ---------------------------------------------------------------------------
# Golden vectors: one "input_hex expected_hex" pair per line


def _bits_to_hex(bits: np.ndarray) -> str:
    bits = np.asarray(bits, dtype=np.uint8)
    pad = (-bits.size) % 4
    padded = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    nibbles = padded.reshape(-1, 4) @ np.array([8, 4, 2, 1])
    return f"{bits.size}:" + "".join(f"{n:x}" for n in nibbles)


def _hex_to_bits(text: str) -> np.ndarray:
    length, _, hexpart = text.partition(":")
    n = int(length)
    bits = []
    for ch in hexpart:
        v = int(ch, 16)
        bits.extend([(v >> 3) & 1, (v >> 2) & 1, (v >> 1) & 1, v & 1])
    return np.array(bits[:n], dtype=np.uint8)


def write_golden_vectors(path, pairs: list[tuple[np.ndarray, np.ndarray]]) -> None:
    with open(path, "w") as fh:
        for inp, exp in pairs:
            fh.write(f"{_bits_to_hex(inp)} {_bits_to_hex(exp)}\n")


def read_golden_vectors(path) -> list[tuple[np.ndarray, np.ndarray]]:
    pairs = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            left, right = line.split()
            pairs.append((_hex_to_bits(left), _hex_to_bits(right)))
    return pairs
