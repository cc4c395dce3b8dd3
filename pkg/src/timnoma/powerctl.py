"""Transmit power allocation for the hybrid scheme.

MIMO powers are per-antenna: the radiated budget is ``N_t * sum(P_k)``, which
equals ``a**2`` for both MIMO schemes. For SISO (``N_t == 1``) the two
conventions coincide.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .topology import Scenario, sic_order

SCHEMES = ("siso-fixed", "mimo-rate", "mimo-sinr")


class SchemeMismatchError(ValueError):
    """Raised when a power scheme is applied to a scenario it does not support."""


@dataclass(frozen=True)
class PowerAllocation:
    per_user_power: tuple[float, ...]
    scheme: str
    budget_amplitude: float
    N_t: int = 1
    group_power: tuple[float, ...] = ()
    split_params: Mapping[str, Any] = field(default_factory=dict)
    deltas: tuple[float, ...] = ()

    @property
    def powers(self) -> np.ndarray:
        return np.asarray(self.per_user_power, dtype=float)

    @property
    def a2(self) -> float:
        return self.budget_amplitude**2


def allocate_siso(scenario: Scenario, a: float) -> PowerAllocation:
    """Distance-proportional SISO powers ``P_k = a**2 d_k**2 / sum(d**2)``.

    The exponent is 2 regardless of the path-loss exponent of the scenario.
    """
    if not scenario.is_siso:
        raise SchemeMismatchError("siso-fixed needs N_t = N_r = 1")
    if a < 0:
        raise ValueError("amplitude must be non-negative")
    d2 = np.asarray(scenario.distances_km) ** 2
    p = a**2 * d2 / d2.sum()
    return PowerAllocation(
        per_user_power=tuple(p),
        scheme="siso-fixed",
        budget_amplitude=float(a),
        N_t=1,
    )


def group_shares(scenario: Scenario) -> np.ndarray:
    """Fraction of the budget per group, proportional to the summed ``1/gamma``."""
    inv = 1.0 / scenario.gains
    return np.array([inv[list(g)].sum() for g in scenario.groups]) / inv.sum()


def _split_weights(split, m: int) -> np.ndarray:
    if np.ndim(split) == 0:
        s = float(split)
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"split {s} outside [0, 1]")
        if m == 1:
            return np.array([1.0])
        if m != 2:
            raise ValueError(f"a scalar split only applies to 2-member groups, group has {m}")
        return np.array([s, 1.0 - s])
    w = np.asarray(split, dtype=float)
    if w.shape != (m,):
        raise ValueError(f"split vector needs {m} weights, got shape {w.shape}")
    if np.any(w < 0) or np.any(w > 1) or not np.isclose(w.sum(), 1.0, rtol=0, atol=1e-12):
        raise ValueError("split weights must lie in [0, 1] and sum to 1")
    return w


def _plain(split):
    return float(split) if np.ndim(split) == 0 else [float(w) for w in split]


def allocate_mimo_rate(scenario: Scenario, a: float, splits: Sequence) -> PowerAllocation:
    """Group powers from path loss, then split inside each group.

    ``splits[t]`` is either the nearer member's fraction (2-member groups) or
    a weight vector over the members, ordered nearest to farthest.
    """
    if len(splits) != scenario.T:
        raise ValueError(f"need one split per group ({scenario.T}), got {len(splits)}")
    deltas = group_shares(scenario)
    group_power = a**2 / scenario.N_t * deltas
    p = np.zeros(scenario.K)
    for t, members in enumerate(scenario.groups):
        nearest_first = sic_order(scenario, t)[::-1]
        w = _split_weights(splits[t], len(members))
        p[nearest_first] = w * group_power[t]
    return PowerAllocation(
        per_user_power=tuple(p),
        scheme="mimo-rate",
        budget_amplitude=float(a),
        N_t=scenario.N_t,
        group_power=tuple(group_power),
        split_params={"splits": [_plain(s) for s in splits]},
        deltas=tuple(deltas),
    )


def allocate_mimo_sinr(scenario: Scenario, a: float, c: float) -> PowerAllocation:
    """Equal-SINR-motivated powers for cells made of 2-member groups.

    With ``f_t`` the farther member of group ``t`` and
    ``k1 + k2 = 1 / sum_t(1/gamma_{f_t})``, the nearer member gets
    ``(a**2/N_t) k2 / gamma_{f_t}`` and the farther ``(a**2/N_t) k1 / gamma_{f_t}``,
    where ``c = k2 / (k1 + k2)``.
    """
    if any(len(g) != 2 for g in scenario.groups):
        raise SchemeMismatchError("mimo-sinr is defined only for groups of exactly 2 users")
    if not 0.0 < c < 1.0:
        raise ValueError(f"c must lie in (0, 1), got {c}")
    g = scenario.gains
    far = [sic_order(scenario, t)[0] for t in range(scenario.T)]
    near = [sic_order(scenario, t)[1] for t in range(scenario.T)]
    k_sum = 1.0 / np.sum(1.0 / g[far])
    k2 = c * k_sum
    k1 = (1.0 - c) * k_sum
    scale = a**2 / scenario.N_t
    p = np.zeros(scenario.K)
    p[near] = scale * k2 / g[far]
    p[far] = scale * k1 / g[far]
    group_power = tuple(p[list(m)].sum() for m in scenario.groups)
    return PowerAllocation(
        per_user_power=tuple(p),
        scheme="mimo-sinr",
        budget_amplitude=float(a),
        N_t=scenario.N_t,
        group_power=group_power,
        split_params={"c": float(c), "k1": float(k1), "k2": float(k2)},
    )


def total_power(allocation: PowerAllocation) -> float:
    """Radiated power ``N_t * sum(P_k)``; equals ``a**2`` for every scheme."""
    return float(allocation.N_t * np.sum(allocation.powers))


def allocate(scenario: Scenario, scheme: str, a2_watts: float = 40.0, *,
             splits: Sequence | None = None, c: float | None = None) -> PowerAllocation:
    """Dispatch on the config-level scheme name."""
    a = float(np.sqrt(a2_watts))
    if scheme == "siso-fixed":
        return allocate_siso(scenario, a)
    if scheme == "mimo-rate":
        if splits is None:
            raise ValueError("mimo-rate needs 'splits'")
        return allocate_mimo_rate(scenario, a, splits)
    if scheme == "mimo-sinr":
        if c is None:
            raise ValueError("mimo-sinr needs 'c'")
        return allocate_mimo_sinr(scenario, a, c)
    raise ValueError(f"unknown power scheme {scheme!r}; choose from {SCHEMES}")
