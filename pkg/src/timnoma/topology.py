"""Cell scenario: user placement, path loss, grouping and SIC order.

User and group indices are 0-based everywhere in the Python API. Config files
and exported tables use 1-based labels, matching the usual way the cells are
drawn (user 1 nearest the basestation).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np


class ScenarioError(ValueError):
    """Raised when a scenario violates one of its structural invariants."""


def path_loss(d_km: float, n: float = 3.0) -> float:
    """Linear path-loss gain ``1 / d**n``."""
    if not d_km > 0:
        raise ValueError(f"distance must be positive, got {d_km!r}")
    if not n > 0:
        raise ValueError(f"path-loss exponent must be positive, got {n!r}")
    return 1.0 / d_km**n


@dataclass(frozen=True)
class PathLossTable:
    gains: tuple[float, ...]

    @classmethod
    def from_distances(cls, distances: Sequence[float], n: float) -> "PathLossTable":
        return cls(tuple(path_loss(d, n) for d in distances))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.gains, dtype=float)


@dataclass(frozen=True)
class Scenario:
    """Validated, immutable description of one cell.

    Attributes
    ----------
    K, T : int
        Number of users and number of groups (= time slots per block).
    N_t, N_r, L : int
        Transmit antennas, receive antennas per user and streams per user.
    distances_km : tuple of float
        Distance of every user from the basestation.
    groups : tuple of tuple of int
        Partition of ``range(K)`` into ``T`` groups (0-based user indices).
    """

    K: int
    T: int
    N_t: int
    N_r: int
    L: int
    distances_km: tuple[float, ...]
    groups: tuple[tuple[int, ...], ...]
    radius_km: float = 5.0
    path_loss_exponent: float = 3.0
    noise_power: float = 1.0
    name: str = ""
    path_loss_table: PathLossTable = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "distances_km", tuple(float(d) for d in self.distances_km))
        object.__setattr__(self, "groups", tuple(tuple(int(u) for u in g) for g in self.groups))
        _validate(self)
        object.__setattr__(
            self,
            "path_loss_table",
            PathLossTable.from_distances(self.distances_km, self.path_loss_exponent),
        )

    @property
    def gains(self) -> np.ndarray:
        return self.path_loss_table.as_array()

    @property
    def is_siso(self) -> bool:
        return self.N_t == 1 and self.N_r == 1

    def group_of(self, user: int) -> int:
        for t, members in enumerate(self.groups):
            if user in members:
                return t
        raise ScenarioError(f"user {user} is not in any group")

    @property
    def group_index(self) -> np.ndarray:
        """Group label of every user, as an int array of length K."""
        labels = np.empty(self.K, dtype=int)
        for t, members in enumerate(self.groups):
            labels[list(members)] = t
        return labels

    def distance_order(self) -> list[int]:
        """Users sorted nearest first; ties broken by ascending index."""
        return sorted(range(self.K), key=lambda u: (self.distances_km[u], u))

    def nearer_members(self, user: int) -> list[int]:
        """Members of ``user``'s group that come after it in the SIC order."""
        order = sic_order(self, self.group_of(user))
        return order[order.index(user) + 1:]

    def farther_members(self, user: int) -> list[int]:
        """Members of ``user``'s group that it must peel off before its own signal."""
        order = sic_order(self, self.group_of(user))
        return order[: order.index(user)]

    def to_config(self) -> dict[str, Any]:
        """Plain mapping with 1-based user labels, inverse of :func:`build_scenario`."""
        return {
            "K": self.K,
            "T": self.T,
            "N_t": self.N_t,
            "N_r": self.N_r,
            "L": self.L,
            "radius_km": self.radius_km,
            "distances_km": list(self.distances_km),
            "path_loss_exponent": self.path_loss_exponent,
            "groups": [[u + 1 for u in g] for g in self.groups],
            "noise_power": self.noise_power,
        }


def _validate(s: Scenario) -> None:
    if s.K < 1:
        raise ScenarioError("K must be >= 1")
    if not 1 <= s.T <= s.K:
        raise ScenarioError(f"need 1 <= T <= K, got T={s.T}, K={s.K}")
    if s.N_r < 1 or s.N_t < s.N_r:
        raise ScenarioError(f"need N_t >= N_r >= 1, got N_t={s.N_t}, N_r={s.N_r}")
    if s.L != s.N_r:
        raise ScenarioError(f"L must equal N_r, got L={s.L}, N_r={s.N_r}")
    if len(s.distances_km) != s.K:
        raise ScenarioError(f"expected {s.K} distances, got {len(s.distances_km)}")
    if not s.radius_km > 0:
        raise ScenarioError("radius_km must be positive")
    for u, d in enumerate(s.distances_km):
        if not 0 < d <= s.radius_km:
            raise ScenarioError(f"distance of user {u + 1} must lie in (0, {s.radius_km}], got {d}")
    if not s.path_loss_exponent > 0:
        raise ScenarioError("path_loss_exponent must be positive")
    if s.noise_power < 0:
        raise ScenarioError("noise_power must be non-negative")

    if len(s.groups) != s.T:
        raise ScenarioError(f"partition: expected {s.T} groups, got {len(s.groups)}")
    if any(len(g) == 0 for g in s.groups):
        raise ScenarioError("partition: every group must be nonempty")
    flat = [u for g in s.groups for u in g]
    if sorted(flat) != list(range(s.K)):
        raise ScenarioError("partition: groups must cover every user exactly once")

    labels = s.group_index
    seq = [labels[u] for u in s.distance_order()]
    periodic = all(seq[i] == seq[i + s.T] for i in range(s.K - s.T))
    if not periodic or len(set(seq[: s.T])) != s.T:
        raise ScenarioError(
            "interleaving: members of one group must be separated by exactly T-1 users "
            "of the other groups in distance order"
        )


def _parse_groups(raw, K: int):
    groups = []
    for g in raw:
        members = []
        for u in g:
            u = int(u)
            if not 1 <= u <= K:
                raise ScenarioError(f"partition: user label {u} outside 1..{K}")
            members.append(u - 1)
        groups.append(tuple(members))
    return tuple(groups)


def build_scenario(config: Mapping[str, Any]) -> Scenario:
    """Build a :class:`Scenario` from a raw mapping with 1-based user labels.

    ``L`` defaults to ``N_r``; ``radius_km``, ``path_loss_exponent`` and
    ``noise_power`` fall back to 5 km, 3 and 1 W.
    """
    try:
        K = int(config["K"])
        N_r = int(config["N_r"])
        return Scenario(
            K=K,
            T=int(config["T"]),
            N_t=int(config["N_t"]),
            N_r=N_r,
            L=int(config.get("L", N_r)),
            distances_km=tuple(config["distances_km"]),
            groups=_parse_groups(config["groups"], K),
            radius_km=float(config.get("radius_km", 5.0)),
            path_loss_exponent=float(config.get("path_loss_exponent", 3.0)),
            noise_power=float(config.get("noise_power", 1.0)),
            name=str(config.get("name", "")),
        )
    except KeyError as exc:
        raise ScenarioError(f"missing scenario field {exc.args[0]!r}") from None


PRESETS: dict[str, dict[str, Any]] = {
    "paper-mimo-4u": {
        "K": 4, "T": 2, "N_t": 2, "N_r": 2, "L": 2,
        "distances_km": [1.0, 2.0, 3.0, 4.0],
        "groups": [[1, 3], [2, 4]],
    },
    "paper-siso-5u": {
        "K": 5, "T": 2, "N_t": 1, "N_r": 1, "L": 1,
        "distances_km": [0.5, 1.5, 2.5, 3.5, 4.5],
        "groups": [[1, 3, 5], [2, 4]],
    },
}


def preset(name: str) -> Scenario:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return build_scenario({**PRESETS[name], "name": name})


def sic_order(scenario: Scenario, group_index: int) -> list[int]:
    """Members of a group in SIC decoding order, farthest first.

    A receiver peels off, in this order, every member farther than itself
    and then detects its own signal with the nearer members left as noise.
    """
    if not 0 <= group_index < scenario.T:
        raise IndexError(f"group index {group_index} outside 0..{scenario.T - 1}")
    d = scenario.distances_km
    return sorted(scenario.groups[group_index], key=lambda u: (-d[u], u))
