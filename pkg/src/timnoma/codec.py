"""Hybrid transceiver: group precoding, TIM post-processing and SIC decoding."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .airlink import ChannelRealization, ml_detect
from .powerctl import PowerAllocation
from .topology import Scenario, sic_order

ROTATION = np.pi / 3


@dataclass(frozen=True)
class PrecodingSet:
    """Orthonormal group vectors plus the antenna/stream selection maps.

    ``vectors[t]`` is the real unit vector of group ``t`` (length ``T``);
    ``stream_map_tx`` is ``U`` (``N_t x L``) and ``stream_map_rx`` is ``S``
    (``L x N_r``).
    """

    vectors: np.ndarray
    stream_map_tx: np.ndarray
    stream_map_rx: np.ndarray

    @property
    def T(self) -> int:
        return self.vectors.shape[0]

    def spreading(self, t: int) -> np.ndarray:
        """``kron(v_t, U)``, shape ``(T*N_t, L)``."""
        return np.kron(self.vectors[t][:, None], self.stream_map_tx)

    def combiner(self, t: int) -> np.ndarray:
        """``kron(v_t^T, S)``, shape ``(L, T*N_r)``."""
        return np.kron(self.vectors[t][None, :], self.stream_map_rx)

    def effective_channel(self, h: np.ndarray) -> np.ndarray:
        """``M = S h U`` for one user's ``N_r x N_t`` fading matrix."""
        return self.stream_map_rx @ h @ self.stream_map_tx


def _givens_basis(T: int) -> np.ndarray:
    # Cascade of 60 degree rotations on planes (i, i+1); for T = 2 this is
    # v1 = (1/2, sqrt3/2), v2 = (-sqrt3/2, 1/2).
    Q = np.eye(T)
    c, s = np.cos(ROTATION), np.sin(ROTATION)
    for i in range(T - 1):
        R = np.eye(T)
        R[i, i], R[i, i + 1], R[i + 1, i], R[i + 1, i + 1] = c, -s, s, c
        Q = R @ Q
    return Q.T  # rows are the group vectors


def build_precoders(T: int, N_t: int, N_r: int, L: int | None = None) -> PrecodingSet:
    if L is None:
        L = N_r
    if T < 1:
        raise ValueError("T must be >= 1")
    if N_t < N_r:
        raise ValueError(f"need N_t >= N_r, got N_t={N_t}, N_r={N_r}")
    if L != N_r:
        raise ValueError(f"need L == N_r, got L={L}, N_r={N_r}")
    if T == 2:
        vectors = np.array([[0.5, np.sqrt(3) / 2], [-np.sqrt(3) / 2, 0.5]])
    else:
        vectors = _givens_basis(T)
    # Stream i leaves on antenna i; the remaining N_t - L antennas stay idle.
    U = np.eye(N_t, L)
    S = np.eye(L, N_r)
    return PrecodingSet(vectors, U, S)


def precoders_for(scenario: Scenario) -> PrecodingSet:
    return build_precoders(scenario.T, scenario.N_t, scenario.N_r, scenario.L)


def _as_blocks(symbols, L: int) -> np.ndarray:
    x = np.asarray(symbols, dtype=complex)
    if x.ndim <= 1:
        x = x.reshape(-1, L) if x.size != L else x.reshape(1, L)
    if x.shape[-1] != L:
        raise ValueError(f"symbol blocks must have {L} streams, got {x.shape[-1]}")
    return x


def transmit(symbols, allocation: PowerAllocation, precoders: PrecodingSet,
             scenario: Scenario) -> np.ndarray:
    """Superimposed transmit vectors, one row of length ``T*N_t`` per block.

    ``symbols[k]`` holds user ``k``'s symbols, shape ``(n_blocks, L)``.
    """
    if len(symbols) != scenario.K:
        raise ValueError(f"need symbols for {scenario.K} users, got {len(symbols)}")
    p = allocation.powers
    labels = scenario.group_index
    x = None
    for k in range(scenario.K):
        xk = _as_blocks(symbols[k], scenario.L)
        term = np.sqrt(p[k]) * (xk @ precoders.spreading(labels[k]).T)
        x = term if x is None else x + term
    return x


def receive(x: np.ndarray, channel: ChannelRealization, user: int) -> np.ndarray:
    """Noiseless ``H_k x`` for every block row of ``x``."""
    return np.atleast_2d(x) @ channel.transfer[user].T


def tim_postprocess(y, group_index: int, precoders: PrecodingSet) -> np.ndarray:
    """Project the ``T*N_r`` received rows onto group ``group_index``: ``(v_i^T kron S) y``."""
    C = precoders.combiner(group_index)
    y = np.atleast_2d(np.asarray(y, dtype=complex))
    if y.shape[-1] != C.shape[1]:
        raise ValueError(f"received rows have length {y.shape[-1]}, expected {C.shape[1]}")
    return y @ C.T


@dataclass
class PeelStep:
    user: int
    estimate: np.ndarray
    indices: np.ndarray
    residual: np.ndarray
    interference_cov: np.ndarray


@dataclass
class DecodeTrace:
    user: int
    post_processed: np.ndarray
    steps: list[PeelStep] = field(default_factory=list)
    own_estimate: np.ndarray | None = None
    own_indices: np.ndarray | None = None
    own_input: np.ndarray | None = None
    own_interference_cov: np.ndarray | None = None


def member_gain(scenario: Scenario, allocation: PowerAllocation, channel: ChannelRealization,
                precoders: PrecodingSet, receiver: int, member: int) -> np.ndarray:
    """Post-TIM gain of ``member``'s symbols at ``receiver``: ``sqrt(P_j gamma_k) S h_k U``."""
    M = precoders.effective_channel(channel.per_user_fading[receiver])
    return np.sqrt(allocation.powers[member] * channel.gains[receiver]) * M


def sic_decode(y_tilde, user: int, scenario: Scenario, allocation: PowerAllocation,
               channel: ChannelRealization, noise_var: float,
               precoders: PrecodingSet | None = None, group_index: int | None = None) -> DecodeTrace:
    """Successive interference cancellation inside one group.

    Members farther than ``user`` are detected and subtracted in SIC order,
    each time treating the not-yet-peeled signals (its own included) as
    Gaussian noise with known covariance. The subtracted term uses the
    detected symbols, so wrong decisions propagate.
    """
    if precoders is None:
        precoders = precoders_for(scenario)
    t = scenario.group_of(user) if group_index is None else group_index
    order = sic_order(scenario, t)
    if user not in order:
        raise ValueError(f"user {user} is not a member of group {t}")

    M = precoders.effective_channel(channel.per_user_fading[user])
    MMh = M @ M.conj().T
    g = channel.gains[user]
    p = allocation.powers
    eye = np.eye(M.shape[0])

    residual = np.atleast_2d(np.asarray(y_tilde, dtype=complex)).copy()
    trace = DecodeTrace(user=user, post_processed=residual.copy())
    pos = order.index(user)
    for i, j in enumerate(order[:pos]):
        rest = order[i + 1:]
        cov = noise_var * eye + g * p[rest].sum() * MMh
        G = member_gain(scenario, allocation, channel, precoders, user, j)
        est, idx = ml_detect(residual, G, noise_cov=cov)
        residual = residual - est @ G.T
        trace.steps.append(PeelStep(j, est, idx, residual.copy(), cov))

    nearer = order[pos + 1:]
    cov = noise_var * eye + g * p[nearer].sum() * MMh
    G = member_gain(scenario, allocation, channel, precoders, user, user)
    est, idx = ml_detect(residual, G, noise_cov=cov)
    trace.own_input = residual
    trace.own_estimate = est
    trace.own_indices = idx
    trace.own_interference_cov = cov
    return trace
