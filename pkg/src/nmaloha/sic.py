"""Successive interference cancellation over power-level occupancies.

Levels are 0-indexed here: level 0 carries the strongest power and is
decoded first.  A level with two or more users is a power collision, which
stops SIC; nothing on that level or any weaker level is recovered.
"""
from __future__ import annotations

import itertools
from math import lgamma
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .analytic import power_levels

ENUMERATION_LIMIT = 10**7


@dataclass(frozen=True)
class DecodeResult:
    decoded_levels: frozenset[int]
    blocking_level: Optional[int] = None

    @property
    def decoded_count(self) -> int:
        return len(self.decoded_levels)


@dataclass
class LevelOccupancy:
    counts: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.counts = [int(c) for c in self.counts]
        if any(c < 0 for c in self.counts):
            raise ValueError(f"level counts must be non-negative, got {self.counts}")

    @property
    def L(self) -> int:
        return len(self.counts)

    @property
    def users(self) -> int:
        return sum(self.counts)

    @classmethod
    def from_levels(cls, chosen: Sequence[int], L: int) -> "LevelOccupancy":
        counts = [0] * L
        for lvl in chosen:
            counts[lvl] += 1
        return cls(counts)


def sic_decode(occ: LevelOccupancy | Sequence[int]) -> DecodeResult:
    counts = occ.counts if isinstance(occ, LevelOccupancy) else list(occ)
    decoded = []
    for lvl, c in enumerate(counts):
        if c >= 2:
            return DecodeResult(frozenset(decoded), blocking_level=lvl)
        if c == 1:
            decoded.append(lvl)
    return DecodeResult(frozenset(decoded))


def decoded_counts(counts: np.ndarray) -> np.ndarray:
    """Vectorised ``sic_decode(...).decoded_count`` over the last axis of ``counts``."""
    counts = np.asarray(counts)
    blocked = np.maximum.accumulate(counts >= 2, axis=-1)
    return np.count_nonzero((counts == 1) & ~blocked, axis=-1)


def eta_nma_realization(occupancies: Sequence[LevelOccupancy | Sequence[int]]) -> int:
    """Total users decoded across all subchannels of one slot."""
    return sum(sic_decode(o).decoded_count for o in occupancies)


def exact_eta_oracle(M: int, L: int) -> float:
    """Mean decoded count over all ``L**M`` equally likely level assignments.

    Brute force, lexicographic order.  Kept deliberately naive so it can
    check the closed-form bound and :func:`exact_eta`.
    """
    if L < 1:
        raise ValueError(f"number of power levels must be >= 1, got {L}")
    if M < 0:
        raise ValueError(f"M must be >= 0, got {M}")
    total_assignments = L**M
    if total_assignments > ENUMERATION_LIMIT:
        raise ValueError(
            f"L**M = {L}**{M} = {total_assignments} assignments exceeds the "
            f"enumeration limit of {ENUMERATION_LIMIT}")
    decoded = 0
    for assignment in itertools.product(range(L), repeat=M):
        decoded += sic_decode(LevelOccupancy.from_levels(assignment, L)).decoded_count
    return decoded / total_assignments


def exact_eta(M: int, L: int) -> float:
    """Exact conditional throughput of one subchannel for any M, by recursion over levels.

    Given no collision above level ``l`` and ``r`` users left, each of them sits
    on ``l`` with probability ``1/(L - l)``.  Level ``l`` adds one decode when it
    holds exactly one user; SIC continues only on zero or one.
    """
    if L < 1:
        raise ValueError(f"number of power levels must be >= 1, got {L}")
    if M < 0:
        raise ValueError(f"M must be >= 0, got {M}")
    # prob[r]: P(reach current level with r users still unplaced, no collision yet)
    prob = np.zeros(M + 1)
    prob[M] = 1.0
    expected = 0.0
    r = np.arange(M + 1)
    for lvl in range(L):
        q = 1.0 / (L - lvl)
        p0 = (1.0 - q) ** r
        p1 = r * q * (1.0 - q) ** np.maximum(r - 1, 0)
        expected += float(np.dot(prob, p1))
        nxt = prob * p0
        nxt[:-1] += (prob * p1)[1:]
        prob = nxt
    return expected


# relative slack on the SINR test; the ladder meets gamma with equality
SINR_RTOL = 1e-9


def sinr_decoded_counts(counts: np.ndarray, levels: Sequence[float], gamma: float) -> np.ndarray:
    """Decoded users per subchannel for a receiver that checks the actual SINR.

    Signals are received exactly at their ladder level (channel inversion).
    Top-down, a lone user on a level is decoded only if its SINR against all
    weaker signals still present reaches ``gamma``; a collided level, or a
    lone user that misses the target, ends SIC on that subchannel.  This is
    stricter than :func:`decoded_counts`: a pile-up on a weak level can push
    the interference seen by a stronger level above what the ladder allows.
    """
    counts = np.asarray(counts)
    v = np.asarray(levels, dtype=float)
    if counts.shape[-1] != v.size:
        raise ValueError(f"counts carry {counts.shape[-1]} levels, ladder has {v.size}")
    received = counts * v
    # interference from strictly weaker levels
    below = np.cumsum(received[..., ::-1], axis=-1)[..., ::-1] - received
    single = counts == 1
    meets = v >= gamma * (below + 1.0) * (1.0 - SINR_RTOL)
    failure = (counts >= 2) | (single & ~meets)
    blocked = np.maximum.accumulate(failure, axis=-1)
    return np.count_nonzero(single & meets & ~blocked, axis=-1)


def sinr_decode(occ: LevelOccupancy | Sequence[int], levels: Sequence[float], gamma: float) -> int:
    counts = occ.counts if isinstance(occ, LevelOccupancy) else list(occ)
    return int(sinr_decoded_counts(np.asarray(counts)[None, :], levels, gamma)[0])


def exact_eta_sinr_oracle(M: int, L: int, gamma: float) -> float:
    """Brute-force mean of :func:`sinr_decode` over all ``L**M`` assignments."""
    if M < 0:
        raise ValueError(f"M must be >= 0, got {M}")
    levels = power_levels(gamma, L).levels
    total_assignments = L**M
    if total_assignments > ENUMERATION_LIMIT:
        raise ValueError(
            f"L**M = {total_assignments} assignments exceeds the enumeration limit")
    decoded = 0
    for assignment in itertools.product(range(L), repeat=M):
        decoded += sinr_decode(LevelOccupancy.from_levels(assignment, L), levels, gamma)
    return decoded / total_assignments


def _compositions(n: int, L: int) -> np.ndarray:
    """All occupancy vectors of n users over L levels, shape (C(n+L-1, L-1), L)."""
    if L == 1:
        return np.array([[n]], dtype=np.int64)
    bars = np.array(list(itertools.combinations(range(n + L - 1), L - 1)), dtype=np.int64)
    if bars.size == 0:
        bars = bars.reshape(1, 0)
    edges = np.concatenate(
        [np.full((bars.shape[0], 1), -1), bars, np.full((bars.shape[0], 1), n + L - 1)], axis=1)
    return np.diff(edges, axis=1) - 1


def _log_multinomial_weights(comps: np.ndarray) -> np.ndarray:
    n = int(comps[0].sum())
    L = comps.shape[1]
    lg = np.array([lgamma(k + 1) for k in range(n + 1)])
    return lg[n] - lg[comps].sum(axis=1) - n * np.log(L)


def eta_by_occupancy(M: int, L: int, receiver: str = "collision", gamma: float | None = None) -> float:
    """Exact single-subchannel throughput by summing over occupancy vectors.

    Weights each vector by its multinomial probability instead of listing
    every user-to-level assignment, so it reaches M in the tens.
    """
    if M < 0:
        raise ValueError(f"M must be >= 0, got {M}")
    if M == 0:
        return 0.0
    comps = _compositions(M, L)
    w = np.exp(_log_multinomial_weights(comps))
    if receiver == "collision":
        dec = decoded_counts(comps)
    elif receiver == "sinr":
        if gamma is None:
            raise ValueError("the sinr receiver needs gamma")
        dec = sinr_decoded_counts(comps, power_levels(gamma, L).levels, gamma)
    else:
        raise ValueError(f"unknown receiver {receiver!r}")
    return float(np.dot(w, dec))
