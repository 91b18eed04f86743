"""Channel coding: rate-1/2 RSC code, interleaving, bit/symbol mapping.

LLR sign convention throughout: L = ln P(bit=0) / P(bit=1).  The decoder is
an exact log-MAP BCJR (log-sum-exp recursions, no max-log approximation)
and returns full a-posteriori LLRs on every coded bit, which the iterative
receiver feeds back to the demodulator.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from numba import njit

LLR_CLAMP = 50.0
NEG = -1.0e30


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


@dataclass(frozen=True)
class CodeConfig:
    """Recursive systematic convolutional code, rate 1/2, zero-tail terminated.

    ``feedback``/``feedforward`` are octal-style generator values; the
    default (7, 5) is the classic 4-state code with systematic output equal
    to the input.  ``K`` is the information length before the nu tail bits.
    """

    K: int
    feedback: int = 0o7
    feedforward: int = 0o5

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if not (self.feedback & 1) or not (self.feedforward & 1):
            raise ValueError("generator polynomials must include the current input tap")

    @property
    def nu(self) -> int:
        return max(self.feedback.bit_length(), self.feedforward.bit_length()) - 1

    @property
    def num_states(self) -> int:
        return 1 << self.nu

    @property
    def rate(self) -> float:
        return 0.5

    @property
    def coded_length(self) -> int:
        return 2 * (self.K + self.nu)

    def tables(self):
        """(next_state, parity_out, tail_input) arrays for trellis processing."""
        S = self.num_states
        mask = S - 1
        nxt = np.empty((S, 2), dtype=np.int32)
        par = np.empty((S, 2), dtype=np.int32)
        tail = np.empty(S, dtype=np.int32)
        fb_taps = self.feedback >> 1
        for s in range(S):
            tail[s] = _parity(fb_taps & s)
            for b in (0, 1):
                a = b ^ _parity(fb_taps & s)
                reg = a | (s << 1)
                par[s, b] = _parity(self.feedforward & reg)
                nxt[s, b] = reg & mask
        return nxt, par, tail


def conv_encode(b, cfg: CodeConfig) -> np.ndarray:
    """Encode K info bits; output [sys, par] pairs including the tail."""
    b = np.asarray(b, dtype=np.int64)
    if len(b) != cfg.K:
        raise ValueError(f"expected {cfg.K} info bits, got {len(b)}")
    if np.any((b != 0) & (b != 1)):
        raise ValueError("info bits must be 0/1")
    nxt, par, tail = cfg.tables()
    out = np.empty(cfg.coded_length, dtype=np.int64)
    s = 0
    for t in range(cfg.K + cfg.nu):
        bit = int(b[t]) if t < cfg.K else int(tail[s])
        out[2 * t] = bit
        out[2 * t + 1] = par[s, bit]
        s = nxt[s, bit]
    assert s == 0, "zero-tail termination failed"
    return out


class Interleaver:
    """Seeded pseudo-random bit permutation with exact inverse."""

    def __init__(self, length: int, seed: int):
        self.length = length
        self.seed = seed
        self.perm = np.random.default_rng(seed).permutation(length)
        self.inv = np.empty(length, dtype=np.int64)
        self.inv[self.perm] = np.arange(length)

    def interleave(self, seq):
        seq = np.asarray(seq)
        self._check(seq)
        return seq[self.perm]

    def deinterleave(self, seq):
        seq = np.asarray(seq)
        self._check(seq)
        return seq[self.inv]

    def _check(self, seq):
        if len(seq) != self.length:
            raise ValueError(f"sequence length {len(seq)} != interleaver length {self.length}")


@functools.lru_cache(maxsize=None)
def _cached_interleaver(length: int, seed: int) -> Interleaver:
    return Interleaver(length, seed)


def permute(seq, direction: str, seed: int):
    """Apply the seeded pseudo-random permutation or its inverse."""
    il = _cached_interleaver(len(seq), seed)
    if direction == "interleave":
        return il.interleave(seq)
    if direction == "deinterleave":
        return il.deinterleave(seq)
    raise ValueError(f"direction must be 'interleave' or 'deinterleave', got {direction!r}")


class SymbolAlphabet:
    """M-ary CPM alphabet with a G-bit label per symbol.

    Symbols are ordered by modified data (index j maps to 2j-(M-1)), and
    ``labels[j]`` is the bit string assigned to symbol j, MSB first.
    Natural labeling assigns j its binary representation; gray labeling
    assigns the reflected code.
    """

    def __init__(self, M: int, labeling: str = "natural"):
        if M < 2 or (M & (M - 1)) != 0:
            raise ValueError("M must be a power of two >= 2")
        if labeling not in ("natural", "gray"):
            raise ValueError(f"unknown labeling {labeling!r}")
        self.M = M
        self.G = M.bit_length() - 1
        self.labeling = labeling
        values = np.arange(M)
        label_value = values if labeling == "natural" else values ^ (values >> 1)
        self.symbols = 2 * values - (M - 1)
        self.labels = ((label_value[:, None] >> np.arange(self.G - 1, -1, -1)) & 1).astype(np.int64)
        self.symbol_for_label = np.empty(M, dtype=np.int64)
        self.symbol_for_label[label_value] = values

    def bits_to_index(self, bits) -> np.ndarray:
        """Pack G-bit groups (MSB first) and map through the label bijection."""
        bits = np.asarray(bits, dtype=np.int64).reshape(-1, self.G)
        packed = bits @ (1 << np.arange(self.G - 1, -1, -1))
        return self.symbol_for_label[packed]

    def index_to_bits(self, idx) -> np.ndarray:
        return self.labels[np.asarray(idx, dtype=np.int64)].reshape(-1)


def map_bits_to_symbols(c, alphabet: SymbolAlphabet) -> np.ndarray:
    """Map N*G coded bits to N symbols via the alphabet's label bijection."""
    c = np.asarray(c)
    if len(c) % alphabet.G:
        raise ValueError(f"bit count {len(c)} not divisible by G={alphabet.G}")
    return alphabet.symbols[alphabet.bits_to_index(c)]


def map_symbols_to_bits(alpha, alphabet: SymbolAlphabet) -> np.ndarray:
    idx = (np.asarray(alpha) + alphabet.M - 1) // 2
    return alphabet.index_to_bits(idx)


def _bit_logprobs(llrs):
    """Stack of (log P(bit=0), log P(bit=1)) for LLRs ln P0/P1."""
    llrs = np.asarray(llrs, dtype=np.float64)
    return np.stack([-np.logaddexp(0.0, -llrs), -np.logaddexp(0.0, llrs)], axis=-1)


def symbol_priors_from_bit_llrs(la_bits, alphabet: SymbolAlphabet) -> np.ndarray:
    """Per-symbol log-priors over the alphabet from per-bit a-priori LLRs.

    ``la_bits`` has shape (N, G); the result (N, M) is log-sum-exp
    normalized per symbol.
    """
    lp = _bit_logprobs(la_bits)                      # (N, G, 2)
    n = lp.shape[0]
    logp = np.zeros((n, alphabet.M))
    for g in range(alphabet.G):
        logp += lp[:, g, alphabet.labels[:, g]]
    norm = _logsumexp_rows(logp)
    return logp - norm[:, None]


def bit_llrs_from_symbol_messages(m_sym, la_bits, alphabet: SymbolAlphabet) -> np.ndarray:
    """Extrinsic per-bit LLRs from demodulator symbol messages.

    ``m_sym`` (N, M) are log-domain symbol messages (extrinsic to the
    symbol prior); ``la_bits`` (N, G) are the current bit priors.  For each
    bit position the other G-1 bits' priors are folded in, the bit's own
    prior excluded.
    """
    m_sym = np.asarray(m_sym, dtype=np.float64)
    lp = _bit_logprobs(la_bits)                      # (N, G, 2)
    n, M = m_sym.shape
    out = np.empty((n, alphabet.G))
    total = np.zeros((n, M))
    own = np.empty((alphabet.G, n, M))
    for g in range(alphabet.G):
        own[g] = lp[:, g, alphabet.labels[:, g]]
        total += own[g]
    for g in range(alphabet.G):
        metric = m_sym + total - own[g]
        zero = alphabet.labels[:, g] == 0
        num = _logsumexp_rows(np.where(zero[None, :], metric, -np.inf))
        den = _logsumexp_rows(np.where(zero[None, :], -np.inf, metric))
        out[:, g] = num - den
    return np.clip(out, -LLR_CLAMP, LLR_CLAMP)


def _logsumexp_rows(x):
    m = np.max(x, axis=-1)
    safe = np.where(np.isfinite(m), m, 0.0)
    return safe + np.log(np.sum(np.exp(x - safe[..., None]), axis=-1))


@njit(cache=True)
def _bcjr_kernel(logp_sys, logp_par, nxt, par, tail, K):
    n_steps = logp_sys.shape[0]
    S = nxt.shape[0]
    alpha = np.full((n_steps + 1, S), NEG)
    beta = np.full((n_steps + 1, S), NEG)
    alpha[0, 0] = 0.0
    beta[n_steps, 0] = 0.0
    for t in range(n_steps):
        best = NEG
        for s in range(S):
            if alpha[t, s] <= NEG:
                continue
            for b in range(2):
                if t >= K and b != tail[s]:
                    continue
                v = alpha[t, s] + logp_sys[t, b] + logp_par[t, par[s, b]]
                ns = nxt[s, b]
                if alpha[t + 1, ns] <= NEG:
                    alpha[t + 1, ns] = v
                else:
                    hi = max(alpha[t + 1, ns], v)
                    alpha[t + 1, ns] = hi + np.log1p(np.exp(-abs(alpha[t + 1, ns] - v)))
                if alpha[t + 1, ns] > best:
                    best = alpha[t + 1, ns]
        for s in range(S):
            if alpha[t + 1, s] > NEG:
                alpha[t + 1, s] -= best
    for t in range(n_steps - 1, -1, -1):
        best = NEG
        for s in range(S):
            for b in range(2):
                if t >= K and b != tail[s]:
                    continue
                nb = beta[t + 1, nxt[s, b]]
                if nb <= NEG:
                    continue
                v = nb + logp_sys[t, b] + logp_par[t, par[s, b]]
                if beta[t, s] <= NEG:
                    beta[t, s] = v
                else:
                    hi = max(beta[t, s], v)
                    beta[t, s] = hi + np.log1p(np.exp(-abs(beta[t, s] - v)))
                if beta[t, s] > best:
                    best = beta[t, s]
        for s in range(S):
            if beta[t, s] > NEG:
                beta[t, s] -= best
    app_sys = np.empty(n_steps)
    app_par = np.empty(n_steps)
    for t in range(n_steps):
        acc = np.full(4, NEG)  # (sys0, sys1, par0, par1)
        for s in range(S):
            if alpha[t, s] <= NEG:
                continue
            for b in range(2):
                if t >= K and b != tail[s]:
                    continue
                nb = beta[t + 1, nxt[s, b]]
                if nb <= NEG:
                    continue
                v = alpha[t, s] + logp_sys[t, b] + logp_par[t, par[s, b]] + nb
                for slot in (b, 2 + par[s, b]):
                    if acc[slot] <= NEG:
                        acc[slot] = v
                    else:
                        hi = max(acc[slot], v)
                        acc[slot] = hi + np.log1p(np.exp(-abs(acc[slot] - v)))
        app_sys[t] = acc[0] - acc[1]
        app_par[t] = acc[2] - acc[3]
    return app_sys, app_par


def bcjr_decode(l_in, cfg: CodeConfig):
    """Exact log-MAP decoding of a zero-tail RSC codeword.

    ``l_in`` holds a-priori LLRs for the coded bits in encoder order.
    Returns ``(app_coded, app_info, hard_info)``: APP LLRs on all coded
    bits, APP LLRs on the K info bits, and hard info-bit decisions.
    """
    l_in = np.asarray(l_in, dtype=np.float64)
    if len(l_in) != cfg.coded_length:
        raise ValueError(f"expected {cfg.coded_length} LLRs, got {len(l_in)}")
    lp = _bit_logprobs(np.clip(l_in, -LLR_CLAMP, LLR_CLAMP))
    nxt, par, tail = cfg.tables()
    app_sys, app_par = _bcjr_kernel(lp[0::2], lp[1::2], nxt, par, tail, cfg.K)
    app_coded = np.empty(cfg.coded_length)
    app_coded[0::2] = app_sys
    app_coded[1::2] = app_par
    app_coded = np.clip(app_coded, -LLR_CLAMP, LLR_CLAMP)
    app_info = app_coded[0::2][:cfg.K]
    hard = (app_info < 0).astype(np.int64)
    return app_coded, app_info, hard
