"""Serialization-delay model for the camera -> edge -> cloud path.

Only image transmission is charged.  Inference time and parameter broadcast
are not part of the delay metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidParameterError, UndefinedMetricError

BITS_PER_KB = 8 * 1000  # 1 kB = 1000 bytes


@dataclass(frozen=True)
class LinkConfig:
    image_size_bits: int = 30 * BITS_PER_KB
    bw_local_to_edge_bps: float = 5e6
    bw_edge_to_cloud_bps: float = 20e6
    # fixed extra latency per hop, for sensitivity runs only
    hop_latency_s: float = 0.0

    def __post_init__(self):
        if self.image_size_bits <= 0 or self.bw_local_to_edge_bps <= 0 or self.bw_edge_to_cloud_bps <= 0:
            raise InvalidParameterError("image size and bandwidths must be positive")
        if self.hop_latency_s < 0:
            raise InvalidParameterError("hop latency must be >= 0")

    @property
    def local_leg_s(self) -> float:
        return transmission_delay(self.image_size_bits, self.bw_local_to_edge_bps) + self.hop_latency_s

    @property
    def cloud_leg_s(self) -> float:
        return transmission_delay(self.image_size_bits, self.bw_edge_to_cloud_bps) + self.hop_latency_s


def transmission_delay(size_bits: float, bw_bps: float) -> float:
    if not (size_bits > 0 and bw_bps > 0):
        raise InvalidParameterError(f"size and bandwidth must be positive, got {size_bits}, {bw_bps}")
    return size_bits / bw_bps


def sample_delay(uploaded: bool, link: LinkConfig) -> float:
    return link.local_leg_s + link.cloud_leg_s if uploaded else link.local_leg_s


@dataclass
class DelayLedger:
    """Running per-sample delay record; one entry per processed sample."""

    entries: list[float] = field(default_factory=list)

    def record(self, delay_s: float) -> None:
        self.entries.append(float(delay_s))

    def extend(self, delays) -> None:
        self.entries.extend(float(d) for d in delays)

    @property
    def count(self) -> int:
        return len(self.entries)

    @property
    def total_s(self) -> float:
        return math.fsum(self.entries)


def average_delay(ledger: DelayLedger) -> float:
    if ledger.count < 1:
        raise UndefinedMetricError("average delay of an empty ledger")
    return ledger.total_s / ledger.count


def affine_delay(upload_proportion: float, link: LinkConfig) -> float:
    """Closed form of the mean delay as a function of the upload proportion."""
    return link.local_leg_s + link.cloud_leg_s * upload_proportion
