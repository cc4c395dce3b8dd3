"""Achievable rates, DoF accounting, BER and the hybrid/TDMA ratio.

All rates are in bits/s/Hz per time slot (log base 2) and are evaluated for a
single channel realization; averaging over draws is left to the caller.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .airlink import ChannelRealization
from .codec import PrecodingSet, precoders_for
from .powerctl import PowerAllocation
from .topology import Scenario


def _noise(scenario: Scenario, noise_var):
    return scenario.noise_power if noise_var is None else float(noise_var)


def _logdet2(A: np.ndarray) -> float:
    sign, logabs = np.linalg.slogdet(A)
    return float(logabs / np.log(2.0))


def interference_direction_energy(M: np.ndarray, v: np.ndarray) -> float:
    """Energy of a nearer member's signal as seen through ``M``.

    When the group vector has one entry per stream it is used directly as
    the signal direction, ``||M v||**2``. Otherwise the energy is averaged
    over isotropic unit directions, ``||M||_F**2 / L``.
    """
    L = M.shape[1]
    if v.shape[0] == L:
        return float(np.linalg.norm(M @ v) ** 2)
    return float(np.linalg.norm(M) ** 2 / L)


def intra_group_interference(scenario: Scenario, allocation: PowerAllocation,
                             channel: ChannelRealization, user: int,
                             precoders: PrecodingSet | None = None) -> float:
    """Interference power left as noise at ``user`` by its group's nearer members."""
    if precoders is None:
        precoders = precoders_for(scenario)
    nearer = scenario.nearer_members(user)
    if not nearer:
        return 0.0
    M = precoders.effective_channel(channel.per_user_fading[user])
    v = precoders.vectors[scenario.group_of(user)]
    e = interference_direction_energy(M, v)
    return float(channel.gains[user] * e * allocation.powers[nearer].sum())


def user_rate_mimo(scenario: Scenario, allocation: PowerAllocation, channel: ChannelRealization,
                   user: int, noise_var: float | None = None,
                   precoders: PrecodingSet | None = None) -> float:
    """Hybrid rate of ``user`` with nearer group members treated as noise.

    ``P_k`` is the per-antenna power held in the allocation, so the SNR
    matrix is ``P_k gamma_k M M^H / (rho + sigma**2)``.
    """
    if precoders is None:
        precoders = precoders_for(scenario)
    s2 = _noise(scenario, noise_var)
    rho = intra_group_interference(scenario, allocation, channel, user, precoders)
    M = precoders.effective_channel(channel.per_user_fading[user])
    denom = rho + s2
    if denom == 0:
        return float("inf")
    if np.isinf(denom):
        return 0.0
    snr = allocation.powers[user] * channel.gains[user] / denom
    A = np.eye(M.shape[0]) + snr * (M @ M.conj().T)
    return _logdet2(A) / scenario.T


def user_rate_siso(scenario: Scenario, allocation: PowerAllocation, channel: ChannelRealization,
                   user: int, noise_var: float | None = None,
                   precoders: PrecodingSet | None = None) -> float:
    """Hybrid SISO rate written with the full ``T x T`` transfer matrix."""
    if not scenario.is_siso:
        raise ValueError("user_rate_siso needs N_t = N_r = 1")
    if precoders is None:
        precoders = precoders_for(scenario)
    s2 = _noise(scenario, noise_var)
    H = channel.transfer[user]
    t = scenario.group_of(user)
    v = precoders.vectors[t]
    p = allocation.powers
    interference = sum(np.linalg.norm(H @ precoders.vectors[t]) ** 2 * p[j]
                       for j in scenario.nearer_members(user))
    denom = interference + s2
    if np.isinf(denom):
        return 0.0
    signal = p[user] * abs(v @ H @ v) ** 2
    if denom == 0:
        return float("inf") if signal > 0 else 0.0
    return float(np.log2(1.0 + signal / denom) / scenario.T)


def user_rate(scenario, allocation, channel, user, noise_var=None, precoders=None) -> float:
    if scenario.is_siso:
        return user_rate_siso(scenario, allocation, channel, user, noise_var, precoders)
    return user_rate_mimo(scenario, allocation, channel, user, noise_var, precoders)


def tdma_rate(scenario: Scenario, channel: ChannelRealization, user: int, noise_var=None,
              total_power: float = 40.0, precoders: PrecodingSet | None = None) -> float:
    """Rate of ``user`` when it is the only active user and gets the whole budget."""
    s2 = _noise(scenario, noise_var)
    if np.isinf(s2) or total_power == 0:
        return 0.0
    if s2 == 0:
        return float("inf")
    if scenario.is_siso:
        if precoders is None:
            precoders = precoders_for(scenario)
        v = precoders.vectors[scenario.group_of(user)]
        gain = np.linalg.norm(channel.transfer[user] @ v) ** 2
        return float(np.log2(1.0 + total_power / s2 * gain) / scenario.T)
    h = channel.per_user_fading[user]
    A = np.eye(scenario.N_r) + total_power / (scenario.N_t * s2) * channel.gains[user] * (h @ h.conj().T)
    return _logdet2(A) / scenario.T


def dof_total(K: int, N_r: int, T: int) -> float:
    return K * N_r / T


def sum_rate_ratio(hybrid_sum: float, tdma_sum: float) -> float:
    if tdma_sum == 0:
        raise ZeroDivisionError("TDMA sum rate is zero")
    return hybrid_sum / tdma_sum


def ber(tx_bits, rx_bits) -> float:
    tx = np.asarray(tx_bits).ravel()
    rx = np.asarray(rx_bits).ravel()
    if tx.shape != rx.shape:
        raise ValueError(f"bit streams differ in length: {tx.size} vs {rx.size}")
    if tx.size == 0:
        return 0.0
    return float(np.count_nonzero(tx != rx) / tx.size)


@dataclass(frozen=True)
class RateRecord:
    snr_db: float
    per_user_rate: tuple[float, ...]
    tdma_rates: tuple[float, ...]
    interference_power: tuple[float, ...]

    @property
    def sum_rate(self) -> float:
        return float(sum(self.per_user_rate))

    @property
    def tdma_average(self) -> float:
        return float(np.mean(self.tdma_rates))

    @property
    def ratio(self) -> float:
        return sum_rate_ratio(self.sum_rate, self.tdma_average)


def rate_record(scenario: Scenario, allocation: PowerAllocation, channel: ChannelRealization,
                noise_var: float, snr_db: float = float("nan"),
                precoders: PrecodingSet | None = None) -> RateRecord:
    """All per-user hybrid and TDMA rates for one draw."""
    if precoders is None:
        precoders = precoders_for(scenario)
    users = range(scenario.K)
    budget = allocation.a2
    return RateRecord(
        snr_db=snr_db,
        per_user_rate=tuple(user_rate(scenario, allocation, channel, k, noise_var, precoders) for k in users),
        tdma_rates=tuple(tdma_rate(scenario, channel, k, noise_var, budget, precoders) for k in users),
        interference_power=tuple(
            intra_group_interference(scenario, allocation, channel, k, precoders) for k in users
        ),
    )
