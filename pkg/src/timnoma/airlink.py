"""Physical-layer primitives: fading, AWGN, QPSK and ML detection."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .topology import Scenario

# Gray map indexed by the bit pair (b0, b1) read as 2*b0 + b1:
# 00 -> +1+j, 01 -> -1+j, 10 -> +1-j, 11 -> -1-j (all over sqrt 2).
QPSK = np.array([1 + 1j, -1 + 1j, 1 - 1j, -1 - 1j]) / np.sqrt(2)
BITS_PER_SYMBOL = 2


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for one (master seed, key...) substream.

    Disjoint keys give independent streams, so frames can be generated in
    any order or on any worker and still reproduce bit-for-bit.
    """
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))


def complex_normal(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with total variance ``variance``."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def noise_variance(snr_db: float, reference_power: float = 1.0) -> float:
    """Noise variance for an SNR given as ``reference_power / sigma**2`` in dB."""
    return reference_power / 10.0 ** (snr_db / 10.0)


@dataclass(frozen=True)
class ChannelRealization:
    """One block-fading draw for every user.

    ``per_user_fading[k]`` is the ``N_r x N_t`` matrix ``h_k``; ``transfer[k]``
    is ``sqrt(gamma_k) * kron(I_T, h_k)``.
    """

    per_user_fading: np.ndarray
    transfer: np.ndarray
    gains: np.ndarray
    seed: int | None = None

    @property
    def K(self) -> int:
        return self.per_user_fading.shape[0]


def assemble_channel(scenario: Scenario, fading: np.ndarray, seed=None) -> ChannelRealization:
    fading = np.asarray(fading, dtype=complex).reshape(scenario.K, scenario.N_r, scenario.N_t)
    gains = scenario.gains
    eye = np.eye(scenario.T)
    transfer = np.stack([np.sqrt(g) * np.kron(eye, h) for g, h in zip(gains, fading)])
    return ChannelRealization(fading, transfer, gains, seed)


def draw_channel(scenario: Scenario, rng: np.random.Generator | int) -> ChannelRealization:
    """Draw i.i.d. CN(0, 1) fading for every user and assemble ``H_k``."""
    seed = None
    if not isinstance(rng, np.random.Generator):
        seed = int(rng)
        rng = substream(seed)
    fading = complex_normal(rng, (scenario.K, scenario.N_r, scenario.N_t))
    return assemble_channel(scenario, fading, seed)


def add_awgn(signal, noise_var: float, rng: np.random.Generator) -> np.ndarray:
    """Add CN(0, noise_var) noise to every complex sample of ``signal``."""
    if noise_var < 0:
        raise ValueError(f"noise variance must be non-negative, got {noise_var}")
    signal = np.asarray(signal, dtype=complex)
    if noise_var == 0:
        return signal.copy()
    return signal + complex_normal(rng, signal.shape, noise_var)


@dataclass(frozen=True)
class SymbolBlock:
    symbols: np.ndarray
    bits: np.ndarray
    constellation: str = "QPSK"


def qpsk_modulate(bits) -> SymbolBlock:
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size % BITS_PER_SYMBOL:
        raise ValueError(f"QPSK needs an even number of bits, got {bits.size}")
    if np.any(bits > 1):
        raise ValueError("bits must be 0 or 1")
    idx = 2 * bits[0::2] + bits[1::2]
    return SymbolBlock(QPSK[idx], bits)


def qpsk_indices_to_bits(indices) -> np.ndarray:
    indices = np.asarray(indices, dtype=np.uint8).ravel()
    out = np.empty(2 * indices.size, dtype=np.uint8)
    out[0::2] = indices >> 1
    out[1::2] = indices & 1
    return out


def qpsk_demodulate(symbols) -> np.ndarray:
    """Hard-decision demapping to the nearest QPSK point."""
    symbols = np.asarray(symbols, dtype=complex).ravel()
    idx = np.argmin(np.abs(symbols[:, None] - QPSK[None, :]), axis=1)
    return qpsk_indices_to_bits(idx)


@lru_cache(maxsize=None)
def _product(L: int) -> np.ndarray:
    return np.array(list(itertools.product(QPSK, repeat=L)), dtype=complex).reshape(-1, L)


def candidate_vectors(L: int) -> np.ndarray:
    """All ``4**L`` QPSK symbol vectors; row ``i`` has digits of ``i`` in base 4."""
    return _product(L).copy()


def candidate_index_digits(indices, L: int) -> np.ndarray:
    """Per-stream QPSK indices for product-candidate indices, shape ``(n, L)``."""
    indices = np.asarray(indices).ravel()
    digits = np.empty((indices.size, L), dtype=np.uint8)
    rem = indices.copy()
    for ell in range(L - 1, -1, -1):
        digits[:, ell] = rem % 4
        rem //= 4
    return digits


def _whitener(noise_cov, n: int) -> np.ndarray | None:
    if noise_cov is None or np.ndim(noise_cov) == 0:
        return None
    cov = np.asarray(noise_cov, dtype=complex)
    if cov.shape != (n, n):
        raise ValueError(f"noise covariance must be {n}x{n}, got {cov.shape}")
    scale = np.real(np.trace(cov)) / n
    if scale <= 0:
        return None
    chol = np.linalg.cholesky(cov + 1e-13 * scale * np.eye(n))
    return np.linalg.inv(chol)


def ml_detect(observed, effective_gain, constellation=None, noise_cov=None):
    """Maximum-likelihood detection over a finite candidate set.

    Parameters
    ----------
    observed : array_like, shape (n,) or (m, n)
        One observation per row.
    effective_gain : array_like, shape (n, L)
        Linear map from a symbol vector to the noiseless observation.
    constellation : array_like, shape (C,) or (C, L), optional
        Candidate symbol vectors. Defaults to the QPSK product set of
        dimension ``L``.
    noise_cov : float or array_like, optional
        Interference-plus-noise covariance. A matrix whitens the metric;
        a scalar (or None) keeps the plain Euclidean distance, for which
        the variance does not change the decision.

    Returns
    -------
    estimates : ndarray, shape (m, L)
    indices : ndarray, shape (m,)
        Row index of the chosen candidate. Ties go to the lowest index.
    """
    G = np.atleast_2d(np.asarray(effective_gain, dtype=complex))
    n, L = G.shape
    y = np.asarray(observed, dtype=complex)
    single = y.ndim == 1
    y = np.atleast_2d(y)
    if y.shape[1] != n:
        raise ValueError(f"observation length {y.shape[1]} does not match gain rows {n}")
    cands = candidate_vectors(L) if constellation is None else np.asarray(constellation, dtype=complex)
    cands = cands.reshape(len(cands), -1)
    if cands.shape[1] != L:
        raise ValueError(f"candidates have dimension {cands.shape[1]}, gain expects {L}")

    W = _whitener(noise_cov, n)
    if W is not None:
        G = W @ G
        y = y @ W.T
    points = cands @ G.T
    dist = np.sum(np.abs(y[:, None, :] - points[None, :, :]) ** 2, axis=2)
    idx = np.argmin(dist, axis=1)
    est = cands[idx]
    if single:
        return est[0], idx[0]
    return est, idx
