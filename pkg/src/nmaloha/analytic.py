"""Closed-form throughput and power expressions for NOMA multichannel ALOHA.

All SINR and power values are linear, normalised to a unit noise density.
Nothing here draws random numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

# exact integer binomials up to this trial count, log-space above
_EXACT_COMB_MAX = 20
# Poisson sums stop once a term drops below this fraction of the running sum
_POISSON_TAIL_RTOL = 1e-15
_POISSON_MAX_TERMS = 100_000


@dataclass(frozen=True)
class PowerLevelSet:
    """Received-power ladder ``levels[0] > levels[1] > ... > levels[-1]``.

    Index 0 is the strongest level and is decoded first by SIC.
    """

    gamma: float
    levels: tuple[float, ...]

    @property
    def L(self) -> int:
        return len(self.levels)

    def interference_below(self, index: int) -> float:
        """Sum of all levels weaker than ``levels[index]``."""
        return math.fsum(self.levels[index + 1:])

    def sinr(self, index: int) -> float:
        """SINR of ``levels[index]`` with one user on it and on every weaker level."""
        return self.levels[index] / (self.interference_below(index) + 1.0)

    def mean_level(self) -> float:
        return math.fsum(self.levels) / self.L


@dataclass(frozen=True)
class TrafficModel:
    K: int
    p_a: float
    B: int

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if not 0.0 <= self.p_a <= 1.0:
            raise ValueError(f"p_a must lie in [0, 1], got {self.p_a}")
        if self.B < 1:
            raise ValueError(f"B must be >= 1, got {self.B}")

    @property
    def lam(self) -> float:
        """Mean number of active users per subchannel."""
        return self.K * self.p_a / self.B


def _check_B(B: int) -> None:
    if B < 1:
        raise ValueError(f"number of subchannels must be >= 1, got {B}")


def _check_L(L: int) -> None:
    if L < 1:
        raise ValueError(f"number of power levels must be >= 1, got {L}")


def eta_ma(M: int, B: int) -> float:
    """Expected number of collision-free users when M users pick among B subchannels."""
    _check_B(B)
    if M < 0:
        raise ValueError(f"M must be >= 0, got {M}")
    if M == 0:
        return 0.0
    return M * (1.0 - 1.0 / B) ** (M - 1)


def poisson_pmf(lam: float, n: int) -> float:
    if lam <= 0:
        raise ValueError(f"intensity must be positive, got {lam}")
    if n < 0:
        return 0.0
    return math.exp(-lam + n * math.log(lam) - math.lgamma(n + 1))


def poisson_expectation(fn: Callable[[int], float], lam: float) -> float:
    """E[fn(N)] for N ~ Poisson(lam), truncated once terms become negligible.

    ``fn`` must be bounded by a polynomial in n for the tail rule to be safe.
    """
    total = 0.0
    n_mode = int(lam)
    for n in range(_POISSON_MAX_TERMS):
        term = fn(n) * poisson_pmf(lam, n)
        total += term
        if n > n_mode and abs(term) < _POISSON_TAIL_RTOL * abs(total):
            break
    return total


def t_ma_avg(lam: float, B: int) -> float:
    """Average multichannel ALOHA throughput under Poisson traffic, ``B lam e^-lam``."""
    _check_B(B)
    if lam <= 0:
        raise ValueError(f"intensity must be positive, got {lam}")
    return B * lam * math.exp(-lam)


def power_levels(gamma: float, L: int) -> PowerLevelSet:
    """Build the ladder bottom-up so each level meets ``gamma`` over everything weaker."""
    if gamma <= 0:
        raise ValueError(f"target SINR must be positive, got {gamma}")
    _check_L(L)
    rev: list[float] = []
    below = 0.0
    for _ in range(L):
        v = gamma * (below + 1.0)
        rev.append(v)
        below += v
    return PowerLevelSet(gamma=gamma, levels=tuple(reversed(rev)))


def power_levels_closed_form(gamma: float, L: int) -> tuple[float, ...]:
    if gamma <= 0:
        raise ValueError(f"target SINR must be positive, got {gamma}")
    _check_L(L)
    return tuple(gamma * (gamma + 1.0) ** (L - l) for l in range(1, L + 1))


def rate_from_sinr(gamma: float) -> float:
    if gamma <= 0:
        raise ValueError(f"target SINR must be positive, got {gamma}")
    return math.log2(1.0 + gamma)


def eta_lower_bound(M: int, L: int) -> float:
    """M times the probability that M users all pick distinct levels out of L."""
    _check_L(L)
    if M < 0:
        raise ValueError(f"M must be >= 0, got {M}")
    if M > L:
        return 0.0
    prod = 1.0
    for m in range(1, M):
        prod *= 1.0 - m / L
    return M * prod


def binomial_pmf(M: int, p: float, n: int) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    if M < 0 or n < 0:
        raise ValueError("M and n must be non-negative")
    if n > M:
        raise ValueError(f"n={n} exceeds the number of trials M={M}")
    if p == 0.0:
        return 1.0 if n == 0 else 0.0
    if p == 1.0:
        return 1.0 if n == M else 0.0
    if M <= _EXACT_COMB_MAX:
        return math.comb(M, n) * p**n * (1.0 - p) ** (M - n)
    log_c = math.lgamma(M + 1) - math.lgamma(n + 1) - math.lgamma(M - n + 1)
    return math.exp(log_c + n * math.log(p) + (M - n) * math.log1p(-p))


EtaFn = Callable[[int, int], float]


def t_nma_conditional(M: int, L: int, B: int, eta_fn: EtaFn = eta_lower_bound) -> float:
    """NM-ALOHA throughput given exactly M active users.

    The per-subchannel count is Binomial(M, 1/B); ``eta_fn(n, L)`` is the
    single-subchannel conditional throughput.
    """
    _check_B(B)
    _check_L(L)
    if M < 0:
        raise ValueError(f"M must be >= 0, got {M}")
    p = 1.0 / B
    return B * math.fsum(eta_fn(n, L) * binomial_pmf(M, p, n) for n in range(M + 1))


def t_nma_lower_bound(lam: float, L: int, B: int) -> float:
    """Poisson-traffic lower bound on the average NM-ALOHA throughput."""
    _check_B(B)
    _check_L(L)
    if lam <= 0:
        raise ValueError(f"intensity must be positive, got {lam}")
    return B * math.fsum(eta_lower_bound(n, L) * poisson_pmf(lam, n) for n in range(1, L + 1))


def t_nma_poisson(lam: float, L: int, B: int, eta_fn: EtaFn) -> float:
    _check_B(B)
    _check_L(L)
    return B * poisson_expectation(lambda n: eta_fn(n, L), lam)


def t_nma_binomial(K: int, p_a: float, L: int, B: int, eta_fn: EtaFn) -> float:
    """Average throughput with K users each active w.p. ``p_a`` (no Poisson step).

    Each subchannel then sees a Binomial(K, p_a/B) number of users.
    """
    TrafficModel(K, p_a, B)
    _check_L(L)
    q = p_a / B
    return B * math.fsum(eta_fn(n, L) * binomial_pmf(K, q, n) for n in range(K + 1))


def group_thresholds(D: float, L: int) -> list[float]:
    """Ring radii splitting a uniform disk of radius D into L equiprobable groups."""
    if D <= 0:
        raise ValueError(f"cell radius must be positive, got {D}")
    _check_L(L)
    return [0.0] + [D * math.sqrt(l / L) for l in range(1, L + 1)]


def order_stat_factor(B: int) -> float:
    """Bound on E[1/max of B unit exponentials]: ``min(2 ln 2, B/(B-1))``."""
    if B < 2:
        raise ValueError(f"the max-gain power bound needs B >= 2, got {B}")
    return min(2.0 * math.log(2.0), B / (B - 1.0))


def power_bound_per_group(l: int, gamma: float, L: int, B: int,
                          A0: float = 1.0, D: float = 1.0, kappa: float = 3.5) -> float:
    """Upper bound on the mean transmit power of a user in distance group ``l``.

    ``l`` is 1-based: group 1 is the innermost ring and uses the strongest level.
    """
    factor = order_stat_factor(B)
    if not 1 <= l <= L:
        raise ValueError(f"group index must lie in 1..{L}, got {l}")
    v = power_levels(gamma, L).levels[l - 1]
    tau = group_thresholds(D, L)[l]
    A_l = A0 * tau ** (-kappa)
    return v / A_l * factor


def avg_power_upper_bound(gamma: float, L: int, B: int,
                          A0: float = 1.0, D: float = 1.0, kappa: float = 3.5) -> float:
    """Upper bound on the mean transmit power under channel-dependent selection."""
    factor = order_stat_factor(B)
    _check_L(L)
    terms = (gamma * (gamma + 1.0) ** (L - l) / (A0 * (D * math.sqrt(l / L)) ** (-kappa))
             for l in range(1, L + 1))
    return factor / L * math.fsum(terms)


def max_eta_lower_bound(L: int) -> tuple[int, float]:
    """Best active-user count for the single-channel bound, and the bound there."""
    _check_L(L)
    best_m, best = 1, eta_lower_bound(1, L)
    for m in range(2, L + 1):
        val = eta_lower_bound(m, L)
        if val > best:
            best_m, best = m, val
    return best_m, best


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise ValueError(f"cannot express non-positive value {x} in dB")
    return 10.0 * math.log10(x)

