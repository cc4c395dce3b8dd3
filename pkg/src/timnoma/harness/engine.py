"""Frame-level Monte-Carlo engine.

Each frame owns a counter-based substream keyed by ``(master_seed, frame)``.
A frame draws one channel realization (held over all of its T-slot blocks),
the payload bits and unit-variance noise, and replays them at every SNR point.
Per-frame tallies are merged in frame order, so the output does not depend on
the number of workers.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..airlink import (
    BITS_PER_SYMBOL,
    candidate_index_digits,
    complex_normal,
    draw_channel,
    ml_detect,
    noise_variance,
    qpsk_indices_to_bits,
    qpsk_modulate,
    substream,
)
from ..codec import precoders_for, receive, sic_decode, tim_postprocess, transmit
from ..metrics import tdma_rate, user_rate
from .config import SimConfig
from .results import ResultTable, SnrRow, UserRow, normal_half_width, wilson_interval

log = logging.getLogger(__name__)


@dataclass
class FrameTally:
    errors_hybrid: np.ndarray  # (S, K) int
    errors_tdma: np.ndarray
    rate_hybrid: np.ndarray  # (S, K) float, this frame's draw
    rate_tdma: np.ndarray


@dataclass
class Totals:
    frames: int
    errors_hybrid: np.ndarray
    errors_tdma: np.ndarray
    rate_hybrid: np.ndarray
    rate_hybrid_sq: np.ndarray
    rate_tdma: np.ndarray
    rate_tdma_sq: np.ndarray
    sum_hybrid: np.ndarray  # (S,)
    sum_hybrid_sq: np.ndarray
    avg_tdma: np.ndarray
    avg_tdma_sq: np.ndarray

    @classmethod
    def empty(cls, S: int, K: int) -> "Totals":
        z = lambda *s: np.zeros(s)
        return cls(0, np.zeros((S, K), dtype=np.int64), np.zeros((S, K), dtype=np.int64),
                   z(S, K), z(S, K), z(S, K), z(S, K), z(S), z(S), z(S), z(S))

    def __add__(self, t: FrameTally) -> "Totals":
        s_h = t.rate_hybrid.sum(axis=1)
        a_t = t.rate_tdma.mean(axis=1)
        return Totals(
            self.frames + 1,
            self.errors_hybrid + t.errors_hybrid,
            self.errors_tdma + t.errors_tdma,
            self.rate_hybrid + t.rate_hybrid,
            self.rate_hybrid_sq + t.rate_hybrid**2,
            self.rate_tdma + t.rate_tdma,
            self.rate_tdma_sq + t.rate_tdma**2,
            self.sum_hybrid + s_h,
            self.sum_hybrid_sq + s_h**2,
            self.avg_tdma + a_t,
            self.avg_tdma_sq + a_t**2,
        )


def _frame_inputs(cfg: SimConfig, frame: int):
    sc = cfg.scenario
    rng = substream(cfg.master_seed, frame)
    channel = draw_channel(sc, rng)
    n = cfg.blocks_per_user
    bits = rng.integers(0, 2, size=(sc.K, n * sc.L * BITS_PER_SYMBOL), dtype=np.uint8)
    noise_h = complex_normal(rng, (sc.K, n, sc.T * sc.N_r))
    noise_t = complex_normal(rng, (sc.K, n, sc.T * sc.N_r))
    symbols = np.stack([qpsk_modulate(b).symbols.reshape(n, sc.L) for b in bits])
    return channel, bits, symbols, noise_h, noise_t


def _bits_from_indices(indices, L: int) -> np.ndarray:
    return qpsk_indices_to_bits(candidate_index_digits(indices, L).ravel())


def _hybrid_errors(cfg, allocation, precoders, channel, bits, symbols, noise, s2):
    sc = cfg.scenario
    x = transmit(list(symbols), allocation, precoders, sc)
    labels = sc.group_index
    errs = np.zeros(sc.K, dtype=np.int64)
    for k in range(sc.K):
        y = receive(x, channel, k) + np.sqrt(s2) * noise[k]
        y_tilde = tim_postprocess(y, labels[k], precoders)
        trace = sic_decode(y_tilde, k, sc, allocation, channel, s2, precoders, labels[k])
        errs[k] = np.count_nonzero(_bits_from_indices(trace.own_indices, sc.L) != bits[k])
    return errs


def _tdma_errors(cfg, precoders, channel, bits, symbols, noise, s2):
    sc = cfg.scenario
    labels = sc.group_index
    p_ant = cfg.a2_watts / sc.N_t
    errs = np.zeros(sc.K, dtype=np.int64)
    for k in range(sc.K):
        x = np.sqrt(p_ant) * (symbols[k] @ precoders.spreading(labels[k]).T)
        y = receive(x, channel, k) + np.sqrt(s2) * noise[k]
        y_tilde = tim_postprocess(y, labels[k], precoders)
        M = precoders.effective_channel(channel.per_user_fading[k])
        gain = np.sqrt(p_ant * channel.gains[k]) * M
        _, idx = ml_detect(y_tilde, gain, noise_cov=s2)
        errs[k] = np.count_nonzero(_bits_from_indices(idx, sc.L) != bits[k])
    return errs


def simulate_frame(cfg: SimConfig, frame: int) -> FrameTally:
    """Run every configured leg of one frame at every SNR point."""
    sc = cfg.scenario
    allocation = cfg.allocation()
    precoders = precoders_for(sc)
    channel, bits, symbols, noise_h, noise_t = _frame_inputs(cfg, frame)
    S, K = len(cfg.snr_grid_db), sc.K
    nan = np.full((S, K), np.nan)
    tally = FrameTally(np.zeros((S, K), dtype=np.int64), np.zeros((S, K), dtype=np.int64),
                       nan.copy(), nan.copy())
    for i, snr in enumerate(cfg.snr_grid_db):
        s2 = noise_variance(snr, cfg.reference_power)
        if "hybrid" in cfg.legs:
            tally.errors_hybrid[i] = _hybrid_errors(cfg, allocation, precoders, channel, bits,
                                                    symbols, noise_h, s2)
            tally.rate_hybrid[i] = [user_rate(sc, allocation, channel, k, s2, precoders)
                                    for k in range(K)]
        if "tdma" in cfg.legs:
            tally.errors_tdma[i] = _tdma_errors(cfg, precoders, channel, bits, symbols, noise_t, s2)
            tally.rate_tdma[i] = [tdma_rate(sc, channel, k, s2, cfg.a2_watts, precoders)
                                  for k in range(K)]
    return tally


def run_tdma_leg(cfg: SimConfig, snr_db: float, frame: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-user TDMA BER and rate for one frame at one SNR point.

    Uses the same frame substream as :func:`run_simulation`, so the values
    coincide with that frame's contribution to the full run.
    """
    sc = cfg.scenario
    precoders = precoders_for(sc)
    channel, bits, symbols, _, noise_t = _frame_inputs(cfg, frame)
    s2 = noise_variance(snr_db, cfg.reference_power)
    errs = _tdma_errors(cfg, precoders, channel, bits, symbols, noise_t, s2)
    rates = np.array([tdma_rate(sc, channel, k, s2, cfg.a2_watts, precoders) for k in range(sc.K)])
    return errs / cfg.bits_per_user, rates


def _frames_chunk(cfg: SimConfig, frames: range) -> list[FrameTally]:
    return [simulate_frame(cfg, f) for f in frames]


def _chunks(n: int, parts: int) -> list[range]:
    size = -(-n // parts)
    return [range(i, min(i + size, n)) for i in range(0, n, size)]


def run_simulation(cfg: SimConfig, workers: int | None = None) -> ResultTable:
    """Sweep the SNR grid over ``cfg.frames`` frames and aggregate the results."""
    workers = cfg.workers if workers is None else workers
    S, K = len(cfg.snr_grid_db), cfg.scenario.K
    totals = Totals.empty(S, K)
    if workers <= 1:
        for f in range(cfg.frames):
            totals = totals + simulate_frame(cfg, f)
    else:
        chunks = _chunks(cfg.frames, workers * 4)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for tallies in pool.map(_frames_chunk, [cfg] * len(chunks), chunks):
                for t in tallies:
                    totals = totals + t
    return _table(cfg, totals)


def _table(cfg: SimConfig, tot: Totals) -> ResultTable:
    sc = cfg.scenario
    n = tot.frames
    bits = n * cfg.bits_per_user
    run_h = "hybrid" in cfg.legs
    run_t = "tdma" in cfg.legs
    nan = float("nan")
    users, aggs = [], []
    for i, snr in enumerate(cfg.snr_grid_db):
        for k in range(sc.K):
            e_h = int(tot.errors_hybrid[i, k])
            e_t = int(tot.errors_tdma[i, k])
            lo_h, hi_h = wilson_interval(e_h, bits) if run_h else (nan, nan)
            lo_t, hi_t = wilson_interval(e_t, bits) if run_t else (nan, nan)
            users.append(UserRow(
                snr_db=snr, user=k + 1, bits=bits,
                errors_hybrid=e_h, errors_tdma=e_t,
                ber_hybrid=e_h / bits if run_h else nan, ber_hybrid_lo=lo_h, ber_hybrid_hi=hi_h,
                ber_tdma=e_t / bits if run_t else nan, ber_tdma_lo=lo_t, ber_tdma_hi=hi_t,
                rate_hybrid_mean=float(tot.rate_hybrid[i, k] / n),
                rate_hybrid_hw=normal_half_width(tot.rate_hybrid[i, k], tot.rate_hybrid_sq[i, k], n)
                if run_h else nan,
                rate_tdma_mean=float(tot.rate_tdma[i, k] / n),
                rate_tdma_hw=normal_half_width(tot.rate_tdma[i, k], tot.rate_tdma_sq[i, k], n)
                if run_t else nan,
            ))
        sum_h = float(tot.sum_hybrid[i] / n)
        avg_t = float(tot.avg_tdma[i] / n)
        # With equal time sharing the TDMA sum rate is the mean single-user rate.
        ratio = sum_h / avg_t if run_h and run_t and avg_t > 0 else nan
        aggs.append(SnrRow(
            snr_db=snr, frames=n,
            sum_rate_hybrid=sum_h,
            sum_rate_hybrid_hw=normal_half_width(tot.sum_hybrid[i], tot.sum_hybrid_sq[i], n)
            if run_h else nan,
            sum_rate_tdma=avg_t,
            tdma_average_rate=avg_t,
            tdma_average_hw=normal_half_width(tot.avg_tdma[i], tot.avg_tdma_sq[i], n) if run_t else nan,
            ratio=ratio,
            ber_network_hybrid=float(tot.errors_hybrid[i].sum() / (bits * sc.K)) if run_h else nan,
            ber_network_tdma=float(tot.errors_tdma[i].sum() / (bits * sc.K)) if run_t else nan,
        ))
    meta = cfg.to_mapping()
    meta["kind"] = "siso" if sc.is_siso else "mimo"
    return ResultTable(users, aggs, meta)
