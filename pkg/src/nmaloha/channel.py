"""User placement, fading, and subchannel/power-level selection.

Every function works on a batch of users at once.  Gains are channel power
gains ``|h|^2``; transmit powers are normalised to unit noise density.
Level and subchannel indices are 0-based (level 0 is the strongest).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .analytic import group_thresholds


@dataclass(frozen=True)
class ChannelRealization:
    distances: np.ndarray   # (n,)
    large_scale: np.ndarray  # (n,) mean gain A0 * d**-kappa
    gains: np.ndarray       # (n, B)

    @property
    def B(self) -> int:
        return self.gains.shape[1]


@dataclass(frozen=True)
class Selection:
    """Per-user decisions.  ``power`` holds the required inversion power even
    for users that abstain because it exceeds the cap."""

    subchannel: np.ndarray
    level: np.ndarray
    power: np.ndarray
    abstained: np.ndarray

    def __len__(self) -> int:
        return self.subchannel.size


def truncation_cap(L: int, db_per_level: float = 10.0) -> float:
    """Linear transmit-power cap of ``db_per_level * L`` dB."""
    return 10.0 ** (db_per_level * L / 10.0)


def sample_placement(K: int, D: float, rng: np.random.Generator) -> np.ndarray:
    """Distances of K users dropped uniformly over a disk of radius D."""
    if D <= 0:
        raise ValueError(f"cell radius must be positive, got {D}")
    # 1 - U lies in (0, 1], so no user sits on the base station
    return D * np.sqrt(1.0 - rng.random(K))


def sample_gains(distances: np.ndarray, B: int, A0: float, kappa: float,
                 rng: np.random.Generator) -> ChannelRealization:
    d = np.asarray(distances, dtype=float)
    if kappa < 0:
        raise ValueError(f"path-loss exponent must be >= 0, got {kappa}")
    if np.any(d <= 0):
        raise ValueError("distances must be strictly positive")
    large = A0 * d ** (-kappa)
    # |u|^2 of a unit-power Rayleigh amplitude is a unit-mean exponential
    small = rng.standard_exponential((d.size, B))
    return ChannelRealization(distances=d, large_scale=large, gains=large[:, None] * small)


def _abstain(power: np.ndarray, cap: Optional[float]) -> np.ndarray:
    if cap is None or np.isinf(cap):
        return np.zeros(power.shape, dtype=bool)
    return power > cap


def select_random(gains: np.ndarray, levels: Sequence[float], cap: Optional[float],
                  rng: np.random.Generator) -> Selection:
    """Uniform subchannel and uniform level, then invert the chosen subchannel's gain."""
    gains = np.asarray(gains)
    n, B = gains.shape
    v = np.asarray(levels, dtype=float)
    sub = rng.integers(B, size=n)
    lvl = rng.integers(v.size, size=n)
    power = v[lvl] / gains[np.arange(n), sub]
    return Selection(sub, lvl, power, _abstain(power, cap))


def assign_group(d, thresholds: Sequence[float]) -> np.ndarray:
    """Ring index for each distance: ring ``l`` holds ``tau[l] < d <= tau[l+1]``."""
    d = np.asarray(d, dtype=float)
    tau = np.asarray(thresholds, dtype=float)
    if np.any(d <= tau[0]) or np.any(d > tau[-1]):
        raise ValueError(f"distances must lie in ({tau[0]}, {tau[-1]}]")
    return np.searchsorted(tau[1:], d, side="left")


def select_channel_dependent(gains: np.ndarray, group_level: np.ndarray,
                             levels: Sequence[float], cap: Optional[float]) -> Selection:
    """Strongest subchannel (lowest index on ties), level fixed by the distance ring."""
    gains = np.asarray(gains)
    v = np.asarray(levels, dtype=float)
    lvl = np.asarray(group_level)
    sub = np.argmax(gains, axis=1)
    best = gains[np.arange(gains.shape[0]), sub]
    power = v[lvl] / best
    return Selection(sub, lvl, power, _abstain(power, cap))


def ring_levels(distances: np.ndarray, D: float, L: int) -> np.ndarray:
    return assign_group(distances, group_thresholds(D, L))
