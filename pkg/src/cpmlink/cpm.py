"""Continuous phase modulation: parameters, tilted-phase trellis, waveform bank.

The trellis works on the tilted (Rimoldi) representation, in which the
accumulated-phase state takes exactly P values regardless of the modulation
index numerator, and the branch waveforms are independent of the symbol
epoch.  Each branch stores the tilted waveform ``chi``; the transmitted
baseband samples are recovered by removing the per-sample tilt ``psi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

PULSE_KINDS = ("lrec", "lrc", "gmsk")


@dataclass(frozen=True)
class CpmConfig:
    """Modulation parameters.

    M       : modulation order (power of two); G = log2(M) bits per symbol.
    L       : frequency-pulse correlation length in symbols.
    Q, P    : coprime integers, modulation index h = Q/P.
    pulse   : frequency pulse kind, 'lrec' or 'lrc' ('gmsk' reserved).
    kappa   : samples per symbol period.
    T       : symbol period (normalized to 1).

    Samples have unit magnitude, so the discrete symbol energy is kappa.
    """

    M: int = 4
    L: int = 2
    Q: int = 1
    P: int = 3
    pulse: str = "lrc"
    kappa: int = 2
    T: float = 1.0

    def __post_init__(self):
        if self.M < 2 or (self.M & (self.M - 1)) != 0:
            raise ValueError(f"M must be a power of two >= 2, got {self.M}")
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")
        if self.kappa < 1:
            raise ValueError(f"kappa must be >= 1, got {self.kappa}")
        if self.P < 1 or self.Q < 1 or math.gcd(self.Q, self.P) != 1:
            raise ValueError(f"Q={self.Q}, P={self.P} must be positive coprime integers")
        if self.pulse not in PULSE_KINDS:
            raise ValueError(f"unknown pulse kind {self.pulse!r}, expected one of {PULSE_KINDS}")

    @property
    def G(self) -> int:
        return int(round(math.log2(self.M)))

    @property
    def h(self) -> float:
        return self.Q / self.P

    @property
    def num_states(self) -> int:
        return self.P * self.M ** (self.L - 1)

    @property
    def num_branches(self) -> int:
        return self.num_states * self.M

    @property
    def symbol_energy(self) -> float:
        return float(self.kappa)

    @property
    def alphabet(self) -> np.ndarray:
        """Symbol alphabet {-(M-1), ..., -1, +1, ..., M-1} ordered by modified data."""
        return 2 * np.arange(self.M) - (self.M - 1)


def phase_pulse(t, cfg: CpmConfig):
    """Phase-shaping function g(t): 0 for t<0, 1/2 for t>=LT, smooth in between.

    Accepts a scalar or array ``t``; returns the same shape.
    """
    if cfg.pulse == "gmsk":
        raise ValueError("gmsk pulse shaping is not implemented")
    t = np.asarray(t, dtype=float)
    lt = cfg.L * cfg.T
    if cfg.pulse == "lrec":
        ramp = t / (2.0 * lt)
    elif cfg.pulse == "lrc":
        ramp = (t - (lt / TWO_PI) * np.sin(TWO_PI * t / lt)) / (2.0 * lt)
    else:  # pragma: no cover - guarded in CpmConfig
        raise ValueError(f"unknown pulse kind {cfg.pulse!r}")
    out = np.where(t <= 0.0, 0.0, np.where(t >= lt, 0.5, ramp))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class CpmTrellis:
    """Time-invariant tilted-phase trellis.

    States are indexed as ``k * M**(L-1) + mem`` where ``k`` in [0, P) is the
    accumulated-phase index and ``mem`` encodes the last L-1 modified-data
    symbols in base M (newest symbol in the highest digit).  Branch l =
    state * M + input, so branch indices double as waveform-bank rows.
    """

    cfg: CpmConfig
    next_state: np.ndarray      # (S, M) int32
    waveform_index: np.ndarray  # (S, M) int32, equals state*M + input
    branch_src: np.ndarray      # (B,) int32
    branch_dst: np.ndarray      # (B,) int32
    branch_sym: np.ndarray      # (B,) int32, modified-data input of the branch

    @property
    def num_states(self) -> int:
        return self.cfg.num_states

    @property
    def num_branches(self) -> int:
        return self.cfg.num_branches

    def phase_index(self, state: int) -> int:
        return state // self.cfg.M ** (self.cfg.L - 1)

    def memory_digits(self, state: int) -> np.ndarray:
        """Modified-data memory (newest first), empty for L=1."""
        M, L = self.cfg.M, self.cfg.L
        mem = state % M ** (L - 1)
        return np.array([(mem // M ** (L - 1 - j)) % M for j in range(1, L)], dtype=np.int64)


def modified_data(alpha, M: int):
    """Map symbols {+-1, ..., +-(M-1)} to modified data {0, ..., M-1}."""
    alpha = np.asarray(alpha)
    tilde = (alpha + (M - 1)) // 2
    if np.any((2 * tilde - (M - 1)) != alpha) or np.any(tilde < 0) or np.any(tilde >= M):
        raise ValueError("symbol out of alphabet {+-1, ..., +-(M-1)}")
    return tilde.astype(np.int64)


def build_trellis(cfg: CpmConfig) -> CpmTrellis:
    """Construct the state-transition tables for the tilted-phase trellis."""
    M, L, P, Q = cfg.M, cfg.L, cfg.P, cfg.Q
    mem_size = M ** (L - 1)
    S = P * mem_size
    next_state = np.empty((S, M), dtype=np.int32)
    waveform_index = np.empty((S, M), dtype=np.int32)
    for state in range(S):
        k, mem = divmod(state, mem_size)
        for a in range(M):
            # The symbol leaving the pulse memory updates the phase index.
            absorbed = a if L == 1 else mem % M
            k_next = (k + Q * absorbed) % P
            mem_next = 0 if L == 1 else a * M ** (L - 2) + mem // M
            next_state[state, a] = k_next * mem_size + mem_next
            waveform_index[state, a] = state * M + a
    B = S * M
    branch = np.arange(B, dtype=np.int32)
    return CpmTrellis(
        cfg=cfg,
        next_state=next_state,
        waveform_index=waveform_index,
        branch_src=(branch // M).astype(np.int32),
        branch_dst=next_state.reshape(-1).copy(),
        branch_sym=(branch % M).astype(np.int32),
    )


@dataclass(frozen=True)
class WaveformTable:
    """Tilted branch waveforms and the per-sample tilt cache.

    chi[l, i] is the unit-magnitude tilted sample of branch l at offset
    i*T/kappa into the symbol.  psi_period holds one period of the tilt
    sequence psi = pi*h*(M-1)*(sample index)/kappa reduced mod 2*pi; the
    tilt at global sample s is psi_period[s % len(psi_period)].
    """

    cfg: CpmConfig
    chi: np.ndarray          # (B, kappa) complex128
    psi_period: np.ndarray   # (p,) float64
    start_phase: np.ndarray  # (B,) tilted phase at symbol start
    end_phase: np.ndarray    # (B,) tilted phase at symbol end (offset T)

    def psi(self, num_samples: int, offset: int = 0) -> np.ndarray:
        """Tilt values for global sample indices offset..offset+num_samples-1."""
        idx = (np.arange(offset, offset + num_samples)) % len(self.psi_period)
        return self.psi_period[idx]


def _branch_phase(cfg: CpmConfig, k: int, sym_history: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """Tilted phase of a branch at offsets ``tau`` within the symbol.

    ``sym_history[m]`` is the modified-data symbol m intervals back
    (m=0 is the branch input).
    """
    h, M, L, T = cfg.h, cfg.M, cfg.L, cfg.T
    phase = np.full(tau.shape, TWO_PI * k / cfg.P + math.pi * h * (M - 1) * (L - 1))
    phase = phase + math.pi * h * (M - 1) * tau / T
    for m in range(L):
        g = phase_pulse(tau + m * T, cfg)
        phase = phase + (4.0 * math.pi * h * sym_history[m] - TWO_PI * h * (M - 1)) * g
    return phase


def build_waveform_table(cfg: CpmConfig, trellis: CpmTrellis) -> WaveformTable:
    """Sample every branch's tilted waveform at t = i*T/kappa (left edge)."""
    M, L, P, Q, kappa = cfg.M, cfg.L, cfg.P, cfg.Q, cfg.kappa
    mem_size = M ** (L - 1)
    B = cfg.num_branches
    tau = np.arange(kappa) * cfg.T / kappa
    tau_ends = np.array([0.0, cfg.T])
    chi = np.empty((B, kappa), dtype=np.complex128)
    start_phase = np.empty(B)
    end_phase = np.empty(B)
    for state in range(cfg.num_states):
        k, mem = divmod(state, mem_size)
        mem_digits = trellis.memory_digits(state)
        for a in range(M):
            l = trellis.waveform_index[state, a]
            history = np.concatenate(([a], mem_digits))
            chi[l] = np.exp(1j * _branch_phase(cfg, k, history, tau))
            sp, ep = _branch_phase(cfg, k, history, tau_ends)
            start_phase[l] = sp
            end_phase[l] = ep
    # One period of the tilt sequence: increment pi*Q*(M-1)/(P*kappa) per sample.
    period = 2 * P * kappa // math.gcd(Q * (M - 1), 2 * P * kappa)
    psi_period = (np.arange(period) * (math.pi * cfg.h * (M - 1) / kappa)) % TWO_PI
    return WaveformTable(cfg=cfg, chi=chi, psi_period=psi_period,
                         start_phase=start_phase, end_phase=end_phase)


def modulate(alpha, initial_state: int, cfg: CpmConfig, trellis: CpmTrellis,
             table: WaveformTable, sample_offset: int = 0):
    """Walk the trellis and emit untilted baseband samples.

    Returns ``(x, final_state)`` with ``len(x) == kappa * len(alpha)``.
    ``sample_offset`` is the global index of the first emitted sample, used
    to keep the tilt reference consistent when modulating a sub-sequence.
    """
    tilde = modified_data(alpha, cfg.M)
    if not 0 <= initial_state < cfg.num_states:
        raise ValueError(f"initial_state {initial_state} out of range")
    n = len(tilde)
    kappa = cfg.kappa
    rows = np.empty(n, dtype=np.int64)
    state = initial_state
    for t, a in enumerate(tilde):
        rows[t] = trellis.waveform_index[state, a]
        state = trellis.next_state[state, a]
    tilted = table.chi[rows].reshape(-1)
    psi = table.psi(n * kappa, offset=sample_offset)
    return tilted * np.exp(-1j * psi), int(state)


def walk_states(alpha, initial_state: int, cfg: CpmConfig, trellis: CpmTrellis) -> int:
    """Final trellis state after a symbol sequence (no waveform emission)."""
    state = initial_state
    for a in modified_data(alpha, cfg.M):
        state = trellis.next_state[state, a]
    return int(state)
