"""Hybrid TIM-NOMA downlink simulator.

Users of a single cell are split into distance-interleaved groups. Orthogonal
group precoders remove inter-group interference at every receiver, and
successive interference cancellation separates the power-multiplexed users
inside a group.
"""

from .topology import Scenario, ScenarioError, build_scenario, path_loss, preset, sic_order
from .powerctl import PowerAllocation, allocate, allocate_mimo_rate, allocate_mimo_sinr, allocate_siso, total_power
from .airlink import ChannelRealization, draw_channel, qpsk_modulate, qpsk_demodulate, ml_detect, add_awgn
from .codec import PrecodingSet, DecodeTrace, build_precoders, transmit, tim_postprocess, sic_decode
from .metrics import ber, dof_total, sum_rate_ratio, tdma_rate, user_rate, user_rate_mimo, user_rate_siso

__version__ = "0.1.0"

__all__ = [
    "Scenario", "ScenarioError", "build_scenario", "path_loss", "preset", "sic_order",
    "PowerAllocation", "allocate", "allocate_mimo_rate", "allocate_mimo_sinr", "allocate_siso",
    "total_power", "ChannelRealization", "draw_channel", "qpsk_modulate", "qpsk_demodulate",
    "ml_detect", "add_awgn", "PrecodingSet", "DecodeTrace", "build_precoders", "transmit",
    "tim_postprocess", "sic_decode", "ber", "dof_total", "sum_rate_ratio", "tdma_rate",
    "user_rate", "user_rate_mimo", "user_rate_siso",
]
