"""Aggregated simulation output."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Any

import numpy as np

Z95 = 1.959963984540054


def wilson_interval(errors: int, n: int, z: float = Z95) -> tuple[float, float]:
    if n == 0:
        return (float("nan"), float("nan"))
    p = errors / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, centre - half), min(1.0, centre + half))


def normal_half_width(total: float, total_sq: float, n: int, z: float = Z95) -> float:
    if n < 2:
        return float("inf")
    mean = total / n
    if not math.isfinite(mean):
        # noiseless rates are +inf; their spread is undefined
        return float("nan")
    var = max(total_sq / n - mean * mean, 0.0) * n / (n - 1)
    return z * math.sqrt(var / n)


@dataclass(frozen=True)
class UserRow:
    snr_db: float
    user: int  # 1-based label
    bits: int
    errors_hybrid: int
    errors_tdma: int
    ber_hybrid: float
    ber_hybrid_lo: float
    ber_hybrid_hi: float
    ber_tdma: float
    ber_tdma_lo: float
    ber_tdma_hi: float
    rate_hybrid_mean: float
    rate_hybrid_hw: float
    rate_tdma_mean: float
    rate_tdma_hw: float

    def ber_se(self, leg: str = "hybrid") -> float:
        """Binomial standard error of the BER estimate."""
        p = self.ber_hybrid if leg == "hybrid" else self.ber_tdma
        return math.sqrt(p * (1 - p) / self.bits) if self.bits else float("nan")


@dataclass(frozen=True)
class SnrRow:
    snr_db: float
    frames: int
    sum_rate_hybrid: float
    sum_rate_hybrid_hw: float
    sum_rate_tdma: float
    tdma_average_rate: float
    tdma_average_hw: float
    ratio: float
    ber_network_hybrid: float
    ber_network_tdma: float


USER_FIELDS = tuple(f.name for f in fields(UserRow))
SNR_FIELDS = tuple(f.name for f in fields(SnrRow))
INT_FIELDS = {"user", "bits", "errors_hybrid", "errors_tdma", "frames"}


def _same(a, b) -> bool:
    if isinstance(a, float) and isinstance(b, float):
        return a == b or (math.isnan(a) and math.isnan(b))
    return a == b


def _rows_equal(r1, r2) -> bool:
    return type(r1) is type(r2) and all(
        _same(getattr(r1, f.name), getattr(r2, f.name)) for f in fields(r1)
    )


@dataclass
class ResultTable:
    users: list[UserRow] = field(default_factory=list)
    aggregates: list[SnrRow] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def snr_grid(self) -> list[float]:
        return [r.snr_db for r in self.aggregates]

    @property
    def user_labels(self) -> list[int]:
        return sorted({r.user for r in self.users})

    def user_row(self, snr_db: float, user: int) -> UserRow:
        for r in self.users:
            if r.snr_db == snr_db and r.user == user:
                return r
        raise KeyError((snr_db, user))

    def snr_row(self, snr_db: float) -> SnrRow:
        for r in self.aggregates:
            if r.snr_db == snr_db:
                return r
        raise KeyError(snr_db)

    def series(self, name: str, user: int | None = None) -> np.ndarray:
        """One metric across the SNR grid, per user or from the aggregate rows."""
        if user is None:
            return np.array([getattr(r, name) for r in self.aggregates], dtype=float)
        return np.array([getattr(self.user_row(s, user), name) for s in self.snr_grid], dtype=float)

    def same_values(self, other: "ResultTable") -> bool:
        """Row-wise equality that treats NaN as equal to NaN."""
        return (
            len(self.users) == len(other.users)
            and len(self.aggregates) == len(other.aggregates)
            and all(_rows_equal(a, b) for a, b in zip(self.users, other.users))
            and all(_rows_equal(a, b) for a, b in zip(self.aggregates, other.aggregates))
        )
