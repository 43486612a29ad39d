"""DMRS reference sequences: Zadoff-Chu roots, cyclic extension, cyclic shift.

Sequences of length m_sc (a multiple of 12) are built by cyclically
extending a prime-length Zadoff-Chu root sequence and applying a
per-element phase ramp (the cyclic shift).  Short computer-generated
sequences used below 3 PRBs are deliberately unsupported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# ZC sequences require at least 3 PRBs worth of subcarriers; shorter
# allocations use table-based sequences that are out of scope here.
MIN_ZC_LENGTH = 36


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def zc_length(m_sc: int) -> int:
    """Largest prime strictly less than the sequence length m_sc."""
    if m_sc < MIN_ZC_LENGTH:
        raise ValueError(
            f"m_sc={m_sc} is below the ZC minimum of {MIN_ZC_LENGTH}; "
            "short CG sequences are not supported"
        )
    for n in range(m_sc - 1, 1, -1):
        if _is_prime(n):
            return n
    raise AssertionError("unreachable: there is always a prime below m_sc >= 36")


def zc_root_sequence(q: int, n_zc: int) -> np.ndarray:
    """Zadoff-Chu root sequence x_q(m) = exp(-j*pi*q*m*(m+1)/n_zc), m in [0, n_zc)."""
    if not _is_prime(n_zc):
        raise ValueError(f"n_zc={n_zc} must be prime")
    if not (1 <= q < n_zc):
        raise ValueError(f"root q={q} out of range [1, {n_zc})")
    m = np.arange(n_zc, dtype=np.float64)
    return np.exp(-1j * np.pi * q * m * (m + 1) / n_zc)


def base_sequence(q: int, m_sc: int) -> np.ndarray:
    """Cyclic extension of the ZC root sequence to length m_sc."""
    n_zc = zc_length(m_sc)
    root = zc_root_sequence(q, n_zc)
    n = np.arange(m_sc)
    return root[n % n_zc]


def apply_cyclic_shift(base: np.ndarray, alpha: float) -> np.ndarray:
    """Element-wise phase ramp exp(j*alpha*n); magnitudes are preserved."""
    base = np.asarray(base)
    n = np.arange(base.shape[0])
    return base * np.exp(1j * alpha * n)


@dataclass(frozen=True)
class DmrsConfig:
    """Fixed-index DMRS configuration (no group/sequence hopping).

    Group and sequence indices are carried for bookkeeping only; the root q
    is configured directly.  ``per_symbol_shifts`` optionally overrides the
    cyclic shift for each DMRS symbol.
    """

    m_sc: int = 576
    group_u: int = 0
    sequence_v: int = 0
    root_q: int = 25
    cyclic_shift: float = 0.0
    per_symbol_shifts: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.m_sc % 12 != 0:
            raise ValueError("m_sc must be a multiple of 12")
        n_zc = zc_length(self.m_sc)  # also rejects m_sc < 36
        if not (1 <= self.root_q < n_zc):
            raise ValueError(f"root_q={self.root_q} out of range [1, {n_zc})")
        shifts = (self.cyclic_shift,) + (self.per_symbol_shifts or ())
        for a in shifts:
            if not (0.0 <= a < 2 * np.pi):
                raise ValueError("cyclic shifts must lie in [0, 2*pi)")


def dmrs_for_subframe(cfg: DmrsConfig, n_dmrs_symbols: int = 4) -> list[np.ndarray]:
    """One sequence per DMRS symbol of the subframe.

    With fixed indices all symbols carry the same shifted base sequence
    unless per-symbol shifts are configured.
    """
    if cfg.per_symbol_shifts is not None and len(cfg.per_symbol_shifts) != n_dmrs_symbols:
        raise ValueError(
            f"per_symbol_shifts has {len(cfg.per_symbol_shifts)} entries, "
            f"expected {n_dmrs_symbols}"
        )
    base = base_sequence(cfg.root_q, cfg.m_sc)
    if cfg.per_symbol_shifts is None:
        seq = apply_cyclic_shift(base, cfg.cyclic_shift)
        return [seq.copy() for _ in range(n_dmrs_symbols)]
    return [apply_cyclic_shift(base, a) for a in cfg.per_symbol_shifts]
