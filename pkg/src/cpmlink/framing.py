"""Transmit block construction: payload split, intrafixes, cyclic prefix.

A block of N payload symbols is split in half and each half is followed by
an N_K-symbol intrafix that steers the trellis back to the reference state
(state 0), so every block starts and ends in the same state.  The cyclic
prefix is then a copy of the block's last N_P symbols; at the waveform
level the frame prepends the last kappa*N_P modulated samples of the block,
which makes the post-CP received block obey an exactly circulant channel
model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cpm import CpmConfig, CpmTrellis, WaveformTable, modified_data, modulate, walk_states

REFERENCE_STATE = 0


@dataclass(frozen=True)
class FrameLayout:
    """Block segmentation in symbols: payload N, intrafix N_K, prefix N_P."""

    N: int
    N_K: int
    N_P: int
    kappa: int

    def __post_init__(self):
        if self.N < 2 or self.N % 2:
            raise ValueError(f"payload length N must be even and >= 2, got {self.N}")
        if self.N_K < 1 or self.N_P < 1:
            raise ValueError("N_K and N_P must be >= 1")

    @property
    def N_tilde(self) -> int:
        """Block length after intrafix insertion."""
        return self.N + 2 * self.N_K

    @property
    def N_T(self) -> int:
        """Frame length including the cyclic prefix."""
        return self.N_tilde + self.N_P

    @property
    def block_samples(self) -> int:
        return self.kappa * self.N_tilde

    @property
    def frame_samples(self) -> int:
        return self.kappa * self.N_T

    @property
    def half(self) -> int:
        return self.N // 2

    @property
    def data_positions(self) -> np.ndarray:
        """Block indices of the N payload symbols, in payload order."""
        h, nk = self.half, self.N_K
        return np.concatenate([np.arange(h), h + nk + np.arange(h)])

    @property
    def intrafix_positions(self) -> np.ndarray:
        h, nk = self.half, self.N_K
        return np.concatenate([h + np.arange(nk), self.N_tilde - nk + np.arange(nk)])

    def validate_against(self, cfg: CpmConfig) -> None:
        if self.kappa != cfg.kappa:
            raise ValueError("layout kappa differs from modulation kappa")
        need = max(cfg.P - 1, cfg.L - 1)
        if self.N_K < need:
            raise ValueError(f"N_K={self.N_K} too short; need >= {need} for P={cfg.P}, L={cfg.L}")


@dataclass(frozen=True)
class SymbolBlock:
    """One assembled transmit frame in symbol units (see FrameLayout)."""

    layout: FrameLayout
    alpha_p: np.ndarray    # CP symbols, copy of the block tail
    alpha_d1: np.ndarray
    alpha_i1: np.ndarray
    alpha_d2: np.ndarray
    alpha_i2: np.ndarray

    @property
    def block(self) -> np.ndarray:
        """Post-CP symbol block of length N_tilde."""
        return np.concatenate([self.alpha_d1, self.alpha_i1, self.alpha_d2, self.alpha_i2])

    @property
    def frame(self) -> np.ndarray:
        """Full frame of length N_T including the CP."""
        return np.concatenate([self.alpha_p, self.block])

    @property
    def intrafix_values(self) -> np.ndarray:
        return np.concatenate([self.alpha_i1, self.alpha_i2])


def compute_intrafix(current_state: int, target_state: int, cfg: CpmConfig,
                     trellis: CpmTrellis, n_k: int) -> np.ndarray:
    """Symbols that drive the trellis from ``current_state`` to ``target_state``.

    The last L-1 symbols replicate the target's pulse memory; the remaining
    free symbols distribute the accumulated-phase deficit, which is always
    possible when n_k - (L-1) symbols can cover residues mod P.
    """
    M, L, P, Q = cfg.M, cfg.L, cfg.P, cfg.Q
    if n_k < L - 1:
        raise ValueError(f"intrafix of {n_k} symbols cannot rewrite L-1={L - 1} memory symbols")
    mem_cur = trellis.memory_digits(current_state)
    mem_tgt = trellis.memory_digits(target_state)
    k_cur = trellis.phase_index(current_state)
    k_tgt = trellis.phase_index(target_state)
    q_inv = pow(Q, -1, P) if P > 1 else 0
    deficit = (q_inv * (k_tgt - k_cur) - int(mem_cur.sum())) % P
    free = n_k - (L - 1)
    values = np.zeros(n_k, dtype=np.int64)
    remaining = deficit
    for t in range(free):
        values[t] = min(M - 1, remaining)
        remaining -= values[t]
    if remaining > 0:
        raise ValueError(
            f"intrafix unsatisfiable: {free} free symbols cannot reach residue {deficit} mod {P}")
    # Pinned tail, oldest of the target memory first.
    for t in range(L - 1):
        values[n_k - 1 - t] = mem_tgt[t]
    intrafix = 2 * values - (M - 1)
    final = walk_states(intrafix, current_state, cfg, trellis)
    if final != target_state:  # pragma: no cover - construction guarantees this
        raise AssertionError("intrafix construction failed to reach target state")
    return intrafix


def assemble_block(alpha_d, cfg: CpmConfig, trellis: CpmTrellis, layout: FrameLayout) -> SymbolBlock:
    """Split the payload, insert intrafixes, and prepend the symbol-level CP."""
    layout.validate_against(cfg)
    alpha_d = np.asarray(alpha_d)
    if len(alpha_d) != layout.N:
        raise ValueError(f"payload length {len(alpha_d)} != N={layout.N}")
    modified_data(alpha_d, cfg.M)  # alphabet check
    d1, d2 = alpha_d[:layout.half], alpha_d[layout.half:]
    s1 = walk_states(d1, REFERENCE_STATE, cfg, trellis)
    i1 = compute_intrafix(s1, REFERENCE_STATE, cfg, trellis, layout.N_K)
    s2 = walk_states(d2, REFERENCE_STATE, cfg, trellis)
    i2 = compute_intrafix(s2, REFERENCE_STATE, cfg, trellis, layout.N_K)
    block = np.concatenate([d1, i1, d2, i2])
    return SymbolBlock(layout=layout, alpha_p=block[-layout.N_P:].copy(),
                       alpha_d1=d1.copy(), alpha_i1=i1, alpha_d2=d2.copy(), alpha_i2=i2)


def frame_waveform(block: SymbolBlock, cfg: CpmConfig, trellis: CpmTrellis,
                   table: WaveformTable):
    """Modulate a block and prepend the sample-level cyclic prefix.

    Returns ``(frame_x, block_x)``: the kappa*N_T transmitted samples and
    the kappa*N_tilde block samples they wrap.  The tilt reference is the
    block start, matching the receiver's model of the post-CP samples.
    """
    layout = block.layout
    block_x, final = modulate(block.block, REFERENCE_STATE, cfg, trellis, table)
    if final != REFERENCE_STATE:  # pragma: no cover - assemble_block guarantees this
        raise AssertionError("assembled block does not return to the reference state")
    cp = block_x[-layout.kappa * layout.N_P:]
    return np.concatenate([cp, block_x]), block_x


def strip_cp(samples, layout: FrameLayout) -> np.ndarray:
    """Drop the cyclic prefix from a received frame of kappa*N_T samples."""
    samples = np.asarray(samples)
    if len(samples) != layout.frame_samples:
        raise ValueError(f"expected {layout.frame_samples} samples, got {len(samples)}")
    return samples[layout.kappa * layout.N_P:]
