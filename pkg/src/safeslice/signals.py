"""Risk-sensitive multi-objective reward and per-window cost signals."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class RewardWeights:
    w_bandwidth: float
    w_latency: float
    slice_weights: tuple[float, ...]


@dataclass(frozen=True)
class CostSignal:
    window_id: int
    per_slice_ms: tuple[float, ...]


def sigmoid_latency_term(latency_ms, steepness_per_ms, inflection_ms):
    """1 / (1 + exp(c1 * (l - c2))), saturating instead of overflowing.

    Equals 0.5 at the inflection point and decreases strictly in latency.
    """
    x = steepness_per_ms * (latency_ms - inflection_ms)
    if x > 700.0:
        return 0.0
    if x < -700.0:
        return 1.0
    return 1.0 / (1.0 + math.exp(x))


def resource_term(shares):
    """Fraction of total bandwidth left unallocated, in [0, 1]."""
    return 1.0 - sum(shares) / 100.0


def compute_reward(weights: RewardWeights, slas, shares, latencies_ms):
    """Bandwidth-saving term plus the weighted sigmoid latency terms.

    `slas` is one SlaConfig per slice, `shares` the executed allocation in
    percent, `latencies_ms` the per-slice average latency of the window the
    allocation controlled.
    """
    if not (len(slas) == len(shares) == len(latencies_ms) == len(weights.slice_weights)):
        raise ValueError("reward inputs must have one entry per slice")
    latency_sum = 0.0
    for w_s, sla, l in zip(weights.slice_weights, slas, latencies_ms):
        latency_sum += w_s * sigmoid_latency_term(l, sla.steepness_per_ms, sla.inflection_ms)
    return weights.w_bandwidth * resource_term(shares) + weights.w_latency * latency_sum
