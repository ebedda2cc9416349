"""Seeded slot-level Monte Carlo engine for NM-ALOHA.

Slots are independent: every slot redraws which users are active, where
they are, and their fading.  Trials are processed in fixed blocks of
``CHUNK_TRIALS`` slots, block ``c`` drawing from the stream
``SeedSequence(seed, spawn_key=(c,))``; block results are combined in block
order, so any number of worker processes gives bit-identical estimates.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import channel
from .analytic import group_thresholds, power_levels
from .sic import decoded_counts, sinr_decoded_counts

DEFAULT_SEED = 20170
CHUNK_TRIALS = 8192
POLICIES = ("random", "channel_dependent")
RECEIVERS = ("sinr", "collision")


@dataclass(frozen=True)
class SystemConfig:
    """Scenario parameters.  ``gamma`` and ``cap`` are linear; ``cap=None`` disables truncation.

    ``receiver`` picks the decode rule: ``"collision"`` stops SIC only at a
    power collision, ``"sinr"`` additionally requires every lone user to meet
    the target SINR against the weaker signals actually present.
    """

    K: int = 200
    p_a: float = 0.05
    B: int = 6
    L: int = 4
    gamma: float = 10.0 ** 0.6
    D: float = 1.0
    A0: float = 1.0
    kappa: float = 3.5
    policy: str = "random"
    cap: Optional[float] = None
    trials: int = 200_000
    seed: int = DEFAULT_SEED
    receiver: str = "sinr"
    forced_m: Optional[int] = None

    def __post_init__(self):
        problems = []
        if self.K < 1:
            problems.append(f"K must be >= 1 (got {self.K})")
        if self.B < 1:
            problems.append(f"B must be >= 1 (got {self.B})")
        if self.L < 1:
            problems.append(f"L must be >= 1 (got {self.L})")
        if not 0.0 <= self.p_a <= 1.0:
            problems.append(f"p_a must lie in [0, 1] (got {self.p_a})")
        if not self.gamma > 0:
            problems.append(f"gamma must be positive (got {self.gamma})")
        if not self.D > 0:
            problems.append(f"D must be positive (got {self.D})")
        if not self.A0 > 0:
            problems.append(f"A0 must be positive (got {self.A0})")
        if self.kappa < 0:
            problems.append(f"kappa must be >= 0 (got {self.kappa})")
        if self.policy not in POLICIES:
            problems.append(f"policy must be one of {POLICIES} (got {self.policy!r})")
        if self.receiver not in RECEIVERS:
            problems.append(f"receiver must be one of {RECEIVERS} (got {self.receiver!r})")
        if self.cap is not None and not self.cap > 0:
            problems.append(f"cap must be positive (got {self.cap})")
        if self.trials < 1:
            problems.append(f"trials must be >= 1 (got {self.trials})")
        if self.forced_m is not None and not 0 <= self.forced_m <= self.K:
            problems.append(f"forced_m must lie in 0..K (got {self.forced_m})")
        if problems:
            raise ValueError("; ".join(problems))

    @property
    def lam(self) -> float:
        return self.K * self.p_a / self.B

    def with_(self, **changes) -> "SystemConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    trials: int
    seed: int

    def __str__(self) -> str:
        return f"{self.mean:.6g} +/- {self.std_error:.3g} (n={self.trials}, seed={self.seed})"


@dataclass
class SlotOutcome:
    active_count: int
    occupancy: np.ndarray          # (B, L) users per subchannel and level
    decoded: np.ndarray            # (B,) decoded users per subchannel
    powers: np.ndarray             # transmit powers of users that transmitted
    abstained_count: int

    @property
    def decoded_total(self) -> int:
        return int(self.decoded.sum())


@dataclass
class SimulationResult:
    config: SystemConfig
    throughput: Estimate
    power: Estimate
    abstention: Estimate
    active_users: int = field(default=0)


@dataclass
class _Batch:
    active: np.ndarray        # (n,) active users per slot
    counts: np.ndarray        # (n, B, L)
    decoded: np.ndarray       # (n, B)
    powers: np.ndarray        # powers of transmitting users
    abstained: int


def _draw_batch(cfg: SystemConfig, n: int, rng: np.random.Generator) -> _Batch:
    if cfg.forced_m is not None:
        active = np.full(n, cfg.forced_m, dtype=np.int64)
    else:
        active = rng.binomial(cfg.K, cfg.p_a, size=n)
    users = int(active.sum())
    slot_of_user = np.repeat(np.arange(n), active)
    ladder = power_levels(cfg.gamma, cfg.L).levels

    # inactive users never affect a slot, so only active ones are placed
    dist = channel.sample_placement(users, cfg.D, rng)
    chan = channel.sample_gains(dist, cfg.B, cfg.A0, cfg.kappa, rng)
    if cfg.policy == "random":
        sel = channel.select_random(chan.gains, ladder, cfg.cap, rng)
    else:
        group = channel.assign_group(dist, group_thresholds(cfg.D, cfg.L))
        sel = channel.select_channel_dependent(chan.gains, group, ladder, cfg.cap)

    tx = ~sel.abstained
    cell = (slot_of_user[tx] * cfg.B + sel.subchannel[tx]) * cfg.L + sel.level[tx]
    counts = np.bincount(cell, minlength=n * cfg.B * cfg.L).reshape(n, cfg.B, cfg.L)
    if cfg.receiver == "sinr":
        decoded = sinr_decoded_counts(counts, ladder, cfg.gamma)
    else:
        decoded = decoded_counts(counts)
    return _Batch(active, counts, decoded, sel.power[tx], int(users - tx.sum()))


def run_slot(cfg: SystemConfig, rng: np.random.Generator) -> SlotOutcome:
    b = _draw_batch(cfg, 1, rng)
    return SlotOutcome(int(b.active[0]), b.counts[0], b.decoded[0], b.powers, b.abstained)


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))


@dataclass
class _ChunkSummary:
    trials: int
    dec_sum: int
    dec_sqsum: int
    active: int
    abstained: int
    transmitted: int
    p_sum: float
    p_sqsum: float


def _run_chunk(args: tuple[SystemConfig, int, int]) -> _ChunkSummary:
    cfg, chunk, n = args
    b = _draw_batch(cfg, n, chunk_rng(cfg.seed, chunk))
    per_slot = b.decoded.sum(axis=1).astype(np.int64)
    return _ChunkSummary(
        trials=n,
        dec_sum=int(per_slot.sum()),
        dec_sqsum=int((per_slot * per_slot).sum()),
        active=int(b.active.sum()),
        abstained=b.abstained,
        transmitted=int(b.powers.size),
        p_sum=math.fsum(b.powers),
        p_sqsum=math.fsum(b.powers * b.powers),
    )


def _chunk_plan(trials: int) -> list[tuple[int, int]]:
    full, rest = divmod(trials, CHUNK_TRIALS)
    plan = [(c, CHUNK_TRIALS) for c in range(full)]
    if rest:
        plan.append((full, rest))
    return plan


def _mean_se(total: float, sqtotal: float, n: int) -> tuple[float, float]:
    if n == 0:
        return math.nan, math.nan
    mean = total / n
    if n == 1:
        return mean, math.nan
    var = max(sqtotal - n * mean * mean, 0.0) / (n - 1)
    return mean, math.sqrt(var / n)


def simulate(cfg: SystemConfig, workers: int = 1) -> SimulationResult:
    """Run ``cfg.trials`` slots and summarise throughput, power and abstention."""
    jobs = [(cfg, c, n) for c, n in _chunk_plan(cfg.trials)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]

    trials = sum(p.trials for p in parts)
    dec_sum = sum(p.dec_sum for p in parts)
    dec_sq = sum(p.dec_sqsum for p in parts)
    # exact integer moments, converted once
    t_mean = dec_sum / trials
    t_var = (dec_sq - dec_sum * dec_sum / trials) / (trials - 1) if trials > 1 else math.nan
    t_se = math.sqrt(max(t_var, 0.0) / trials) if trials > 1 else math.nan

    sent = sum(p.transmitted for p in parts)
    p_mean, p_se = _mean_se(math.fsum(p.p_sum for p in parts),
                            math.fsum(p.p_sqsum for p in parts), sent)
    active = sum(p.active for p in parts)
    abst = sum(p.abstained for p in parts)
    a_mean, a_se = _mean_se(abst, abst, active)  # Bernoulli: sum of squares = sum

    return SimulationResult(
        config=cfg,
        throughput=Estimate(t_mean, t_se, trials, cfg.seed),
        power=Estimate(p_mean, p_se, sent, cfg.seed),
        abstention=Estimate(a_mean, a_se, active, cfg.seed),
        active_users=active,
    )


def estimate_throughput(cfg: SystemConfig, workers: int = 1) -> Estimate:
    return simulate(cfg, workers).throughput


def estimate_avg_power(cfg: SystemConfig, workers: int = 1) -> tuple[Estimate, Estimate]:
    """Mean transmit power over transmitting users, and the abstention rate."""
    res = simulate(cfg, workers)
    return res.power, res.abstention
