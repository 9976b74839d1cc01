"""Large-scale path loss and AWGN capacity for a trackside base station.

All capacities are in bits/s/Hz (log base 2). The environment constant of
the log-distance path-loss model is normalised to 0 dB, so the loss at
distance ``d`` is simply ``d**alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

LN2 = math.log(2.0)


@dataclass(frozen=True)
class ChannelParams:
    """Radio side of every service formula.

    Attributes:
        gamma: Transmitter SNR, ``2*Ps/N0`` (linear, dimensionless).
        alpha: Path-loss exponent, at least 2.
        d0: Perpendicular distance from the base station to the rail, metres.
    """

    gamma: float
    alpha: float
    d0: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise DomainError(f"gamma must be positive and finite, got {self.gamma}")
        if not (math.isfinite(self.alpha) and self.alpha >= 2):
            raise DomainError(f"alpha must be >= 2, got {self.alpha}")
        if not (math.isfinite(self.d0) and self.d0 > 0):
            raise DomainError(f"d0 must be positive and finite, got {self.d0}")

    @classmethod
    def from_snr0_db(cls, snr0_db: float, alpha: float, d0: float) -> "ChannelParams":
        """Build from the received SNR at the rail point nearest the station."""
        return cls(gamma=snr0_to_gamma(snr0_db, alpha, d0), alpha=alpha, d0=d0)

    @property
    def snr0(self) -> float:
        """Received SNR (linear) at the nearest rail point."""
        return self.gamma / self.d0**self.alpha

    @property
    def snr0_db(self) -> float:
        return 10.0 * math.log10(self.snr0)

    def with_gamma(self, gamma: float) -> "ChannelParams":
        return ChannelParams(gamma=gamma, alpha=self.alpha, d0=self.d0)


def snr0_to_gamma(snr0_db: float, alpha: float, d0: float) -> float:
    return 10.0 ** (snr0_db / 10.0) * d0**alpha


def check_velocity(v: float) -> float:
    if not (math.isfinite(v) and v > 0):
        raise DomainError(f"velocity must be positive and finite, got {v}")
    return float(v)


def path_loss(d: float, alpha: float) -> float:
    """Normalised path loss ``d**alpha``."""
    if not d > 0:
        raise DomainError(f"distance must be positive, got {d}")
    return d**alpha


def capacity_at_distance(params: ChannelParams, d: float) -> float:
    """Instantaneous capacity in bits/s/Hz at transmitter distance ``d``."""
    if not d > 0:
        raise DomainError(f"distance must be positive, got {d}")
    return math.log1p(params.gamma * d ** (-params.alpha)) / LN2


def capacity_line(params: ChannelParams, v: float, t: float) -> float:
    """Capacity seen at time ``t`` by a train passing a straight rail at speed ``v``.

    ``t = 0`` is the instant the train crosses the foot of the perpendicular
    from the base station.
    """
    check_velocity(v)
    x = v * t
    return math.log1p(params.gamma * (params.d0**2 + x * x) ** (-0.5 * params.alpha)) / LN2


def min_rate_for_interval(params: ChannelParams, d_s: float) -> float:
    """Capacity at the edge of a symmetric service region of length ``d_s``."""
    if not d_s >= 0:
        raise DomainError(f"service distance must be non-negative, got {d_s}")
    half = 0.5 * d_s
    return math.log1p(params.gamma * (params.d0**2 + half * half) ** (-0.5 * params.alpha)) / LN2


def distance_for_capacity(params: ChannelParams, rate: float) -> float:
    """Distance at which the capacity equals ``rate`` bits/s/Hz."""
    if not rate > 0:
        raise DomainError(f"rate must be positive, got {rate}")
    return (params.gamma / math.expm1(rate * LN2)) ** (1.0 / params.alpha)


def bits_to_nats(value: float) -> float:
    return value * LN2


def nats_to_bits(value: float) -> float:
    return value / LN2
