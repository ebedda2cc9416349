"""NOMA random access over multichannel slotted ALOHA.

Closed-form throughput and power expressions (:mod:`nmaloha.analytic`), the
SIC decode model (:mod:`nmaloha.sic`), fading and selection policies
(:mod:`nmaloha.channel`), a seeded Monte Carlo engine
(:mod:`nmaloha.montecarlo`) and figure sweeps (:mod:`nmaloha.experiments`).
"""
from .analytic import (
    PowerLevelSet,
    avg_power_upper_bound,
    eta_lower_bound,
    eta_ma,
    power_levels,
    t_ma_avg,
    t_nma_lower_bound,
)
from .montecarlo import Estimate, SystemConfig, estimate_avg_power, estimate_throughput, simulate
from .sic import exact_eta_oracle, sic_decode

__version__ = "0.1.0"

__all__ = [
    "PowerLevelSet", "avg_power_upper_bound", "eta_lower_bound", "eta_ma", "power_levels",
    "t_ma_avg", "t_nma_lower_bound", "Estimate", "SystemConfig", "estimate_avg_power",
    "estimate_throughput", "simulate", "exact_eta_oracle", "sic_decode",
]
