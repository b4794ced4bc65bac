"""Simulation parameters, channel models, and seeded random-stream derivation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Substream indices: channel noise must never perturb node election, so each
# replication splits its entropy into three independent generators.
STREAM_TOPOLOGY = 0
STREAM_COINS = 1
STREAM_CHANNEL = 2

CHANNEL_KINDS = ("ideal", "lossy", "contention")


class ConfigError(ValueError):
    """Invalid simulation parameter. `option` names the offending setting."""

    def __init__(self, option: str, message: str):
        self.option = option
        super().__init__(f"{option}: {message}")


@dataclass(frozen=True)
class Channel:
    """Link-level delivery model applied per transmission.

    ideal       every transmission arrives after one hop latency
    lossy       each receiver copy independently dropped with probability `per`
    contention  lossy plus a uniform [0, jitter_max) delay per transmission
    """

    kind: str = "ideal"
    per: float = 0.0
    jitter_max: float = 0.0

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise ConfigError("channel", f"unknown kind {self.kind!r}")
        if not 0.0 <= self.per < 1.0:
            raise ConfigError("per", "packet error rate must be in [0, 1)")
        if self.kind == "ideal" and self.per != 0.0:
            raise ConfigError("per", "ideal channel cannot drop packets")
        if self.jitter_max < 0.0:
            raise ConfigError("jitter-max", "jitter bound must be >= 0")
        if self.kind != "contention" and self.jitter_max != 0.0:
            raise ConfigError("jitter-max", "jitter applies to the contention channel only")

    @staticmethod
    def ideal() -> "Channel":
        return Channel("ideal")

    @staticmethod
    def lossy(per: float) -> "Channel":
        return Channel("lossy", per=per)

    @staticmethod
    def contention(per: float, jitter_max: float) -> "Channel":
        return Channel("contention", per=per, jitter_max=jitter_max)


@dataclass(frozen=True)
class SimConfig:
    """One run's full parameter set.

    Exactly one of `tx_range` / `d_target` is supplied; the other is derived
    from the uniform-deployment degree relation d = n*pi*Tr^2 / l^2.
    """

    n: int
    k: int
    p: float
    seed: int
    l: float = 100.0
    tx_range: float | None = None
    d_target: float | None = None
    o: int = 1
    t_hop: float = 1.0
    delta: float | None = None  # bootstrap slack; defaults to one hop latency
    c: float = 2.0
    channel: Channel = Channel()
    reps: int = 1
    wrap_area: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("n", "node count must be >= 1")
        if self.l <= 0:
            raise ConfigError("l", "area side must be > 0")
        if self.k < 1:
            raise ConfigError("k", "cluster radius must be >= 1 hop")
        if not 0.0 < self.p <= 1.0:
            raise ConfigError("p", "cluster-head probability must be in (0, 1]")
        if self.o < 1:
            raise ConfigError("o", "overlap threshold must be >= 1")
        if self.t_hop <= 0:
            raise ConfigError("t-hop", "per-hop latency must be > 0")
        if self.c < 2:
            raise ConfigError("c", "join-wait multiplier must be >= 2")
        if self.reps < 1:
            raise ConfigError("reps", "replication count must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed", "seed must be a non-negative integer")

        if (self.tx_range is None) == (self.d_target is None):
            raise ConfigError("tx-range/d", "supply exactly one of tx-range and d")
        if self.tx_range is None:
            if self.d_target <= 0:
                raise ConfigError("d", "target degree must be > 0")
            object.__setattr__(
                self, "tx_range", tx_range_for_degree(self.n, self.l, self.d_target)
            )
        else:
            if self.tx_range <= 0:
                raise ConfigError("tx-range", "transmission range must be > 0")
            object.__setattr__(
                self, "d_target", avg_node_degree(self.n, self.l, self.tx_range)
            )

        if self.delta is None:
            object.__setattr__(self, "delta", self.t_hop)
        elif self.delta < 0:
            raise ConfigError("delta", "bootstrap slack must be >= 0")

        if self.channel.kind == "contention" and self.channel.jitter_max == 0.0:
            # unspecified jitter bound defaults to half a hop latency
            object.__setattr__(
                self,
                "channel",
                Channel("contention", per=self.channel.per, jitter_max=self.t_hop / 2),
            )

        if self.wrap_area and self.tx_range > self.l / 2:
            raise ConfigError("tx-range", "toroidal wrap requires tx-range <= l/2")

    @property
    def mu(self) -> float:
        """Node density n / l^2."""
        return self.n / (self.l * self.l)

    @property
    def ch_ad_wait(self) -> float:
        """Advertisement listening window k*t_hop + delta."""
        return self.k * self.t_hop + self.delta

    @property
    def jreq_wait(self) -> float:
        """Join collection window c*k*t_hop + delta, set at bootstrap."""
        return self.c * self.k * self.t_hop + self.delta

    @property
    def jreq_wait_on_conversion(self) -> float:
        """Join collection window for a node that elects itself late.

        The bootstrap slack is already spent by conversion time, so the
        window is c*k*t_hop; this keeps the worst-case node lifetime at
        exactly 3*k*t_hop + delta.
        """
        return self.c * self.k * self.t_hop


def avg_node_degree(n: int | float, l: float, tx_range: float) -> float:
    """Average node degree for n nodes uniform on an l x l area: n*pi*Tr^2/l^2."""
    if n <= 0 or l <= 0 or tx_range < 0:
        raise ValueError("n and l must be positive, tx_range non-negative")
    return n * math.pi * tx_range * tx_range / (l * l)


def tx_range_for_degree(n: int | float, l: float, d_target: float) -> float:
    """Transmission range achieving a desired average degree (degree law inverted)."""
    if n <= 0 or l <= 0 or d_target <= 0:
        raise ValueError("all inputs must be positive")
    return math.sqrt(d_target * l * l / (n * math.pi))


def derive_seed(root: int, *parts: int) -> int:
    """Stable 64-bit seed derived from a root seed and integer context."""
    ss = np.random.SeedSequence([int(root), *[int(x) for x in parts]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class Streams:
    """Independent per-replication random generators."""

    topology: np.random.Generator
    coins: np.random.Generator
    channel: np.random.Generator


def rep_streams(seed: int, rep: int) -> Streams:
    """Build the three substreams for replication `rep` of root `seed`."""
    return Streams(
        topology=np.random.default_rng([seed, rep, STREAM_TOPOLOGY]),
        coins=np.random.default_rng([seed, rep, STREAM_COINS]),
        channel=np.random.default_rng([seed, rep, STREAM_CHANNEL]),
    )
