"""Figure-style parameter sweeps with simulated and analytic columns.

Each grid point is simulated with its own seed, derived from the master
seed, the figure id, the series index and the grid index, so points can run
in any order or in parallel without changing a single digit of the output.
"""
from __future__ import annotations

import csv
import io
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from functools import lru_cache
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from . import analytic
from .channel import truncation_cap
from .montecarlo import DEFAULT_SEED, SystemConfig, simulate
from .sic import eta_by_occupancy, exact_eta

FIGURES = ("fig1a", "fig1b", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7")
METRICS = ("throughput", "power", "level_power", "eta_bound")
CSV_COLUMNS = ("swept_param", "value", "sim_mean", "sim_se", "analytic", "bound", "abstention_rate")
DEFAULT_TRIALS = 200_000
# binomial terms below this weight are dropped from exact throughput sums
_PMF_FLOOR = 1e-15

_CONFIG_FIELDS = {f.name for f in fields(SystemConfig)}


class SweepError(ValueError):
    pass


@dataclass(frozen=True)
class Series:
    """One curve of a figure: config overrides plus optional per-point truncation.

    ``cap_db_per_level`` sets the cap to ``cap_db_per_level * L`` dB at every
    grid point, so it follows L when L is the swept parameter.
    """

    label: str = ""
    overrides: tuple[tuple[str, object], ...] = ()
    cap_db_per_level: Optional[float] = None


@dataclass(frozen=True)
class SweepSpec:
    figure: str
    base: SystemConfig
    param: str
    values: tuple
    metric: str = "throughput"
    series: tuple[Series, ...] = (Series(),)

    def __post_init__(self):
        if not self.values:
            raise SweepError(f"{self.figure}: empty grid for {self.param}")
        if self.param not in _CONFIG_FIELDS and self.param != "gamma_db":
            raise SweepError(f"{self.figure}: {self.param!r} is not a configuration field")
        if self.metric not in METRICS:
            raise SweepError(f"{self.figure}: unknown metric {self.metric!r}")


@dataclass(frozen=True)
class SweepRow:
    swept_param: str
    value: float
    sim_mean: Optional[float] = None
    sim_se: Optional[float] = None
    analytic: Optional[float] = None
    bound: Optional[float] = None
    abstention_rate: Optional[float] = None

    @property
    def series(self) -> str:
        _, _, label = self.swept_param.partition(";")
        return label


def derive_seed(master: int, figure: str, series_index: int, grid_index: int) -> int:
    ss = np.random.SeedSequence(master, spawn_key=(zlib.crc32(figure.encode()), series_index, grid_index))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def point_config(spec: SweepSpec, series_index: int, grid_index: int) -> SystemConfig:
    series = spec.series[series_index]
    value = spec.values[grid_index]
    changes = dict(series.overrides)
    if spec.param == "gamma_db":
        changes["gamma"] = analytic.db_to_linear(value)
    else:
        changes[spec.param] = value
    changes["seed"] = derive_seed(spec.base.seed, spec.figure, series_index, grid_index)
    try:
        cfg = replace(spec.base, **changes)
        if series.cap_db_per_level is not None:
            cfg = replace(cfg, cap=truncation_cap(cfg.L, series.cap_db_per_level))
    except (TypeError, ValueError) as err:
        raise SweepError(f"{spec.figure}: {spec.param}={value}: {err}") from None
    return cfg


@lru_cache(maxsize=None)
def _eta(n: int, L: int, receiver: str, gamma: float) -> float:
    if receiver == "collision":
        return exact_eta(n, L)
    return eta_by_occupancy(n, L, "sinr", gamma)


def expected_throughput(cfg: SystemConfig) -> Optional[float]:
    """Exact mean decoded users per slot for the configured receiver and traffic.

    Defined only without truncation; abstention thins users non-uniformly.
    """
    if cfg.cap is not None:
        return None

    def eta(n: int, L: int) -> float:
        return _eta(n, L, cfg.receiver, cfg.gamma)

    if cfg.forced_m is not None:
        return analytic.t_nma_conditional(cfg.forced_m, cfg.L, cfg.B, eta)
    q = cfg.p_a / cfg.B
    total = []
    for n in range(1, cfg.K + 1):
        w = analytic.binomial_pmf(cfg.K, q, n)
        if w * n < _PMF_FLOOR and n > cfg.K * q:
            break
        if w > 0:
            total.append(eta(n, cfg.L) * w)
    return cfg.B * math.fsum(total)


def _throughput_bound(cfg: SystemConfig) -> Optional[float]:
    if cfg.forced_m is not None:
        return analytic.t_nma_conditional(cfg.forced_m, cfg.L, cfg.B, analytic.eta_lower_bound)
    if cfg.lam <= 0:
        return 0.0
    return analytic.t_nma_lower_bound(cfg.lam, cfg.L, cfg.B)


def _label(spec: SweepSpec, series: Series) -> str:
    return f"{spec.param};{series.label}" if series.label else spec.param


def _evaluate(args: tuple[SweepSpec, int, int, int]) -> SweepRow:
    spec, s_idx, g_idx, workers = args
    cfg = point_config(spec, s_idx, g_idx)
    label = _label(spec, spec.series[s_idx])
    value = spec.values[g_idx]

    if spec.metric == "level_power":
        return SweepRow(label, value, analytic=analytic.power_levels(cfg.gamma, cfg.L).mean_level())
    if spec.metric == "eta_bound":
        return SweepRow(label, value, analytic=analytic.max_eta_lower_bound(cfg.L)[1])

    res = simulate(cfg, workers)
    if spec.metric == "throughput":
        return SweepRow(label, value, res.throughput.mean, res.throughput.std_error,
                        analytic=expected_throughput(cfg), bound=_throughput_bound(cfg),
                        abstention_rate=res.abstention.mean if cfg.cap is not None else None)
    bound = None
    if cfg.policy == "channel_dependent" and cfg.B >= 2:
        bound = analytic.avg_power_upper_bound(cfg.gamma, cfg.L, cfg.B, cfg.A0, cfg.D, cfg.kappa)
    return SweepRow(label, value, res.power.mean, res.power.std_error,
                    bound=bound, abstention_rate=res.abstention.mean)


def run_sweep(spec: SweepSpec, workers: int = 1, progress=None) -> list[SweepRow]:
    """One row per (series, grid value), series-major.

    ``progress`` is called with each finished row, in output order.
    """
    # fail fast on a bad grid value before any simulation runs
    for s in range(len(spec.series)):
        for g in range(len(spec.values)):
            point_config(spec, s, g)
    jobs = [(spec, s, g, 1) for s in range(len(spec.series)) for g in range(len(spec.values))]
    rows: list[SweepRow] = []
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for row in pool.map(_evaluate, jobs):
                rows.append(row)
                if progress:
                    progress(row)
    else:
        for job in jobs:
            row = _evaluate(job)
            rows.append(row)
            if progress:
                progress(row)
    return rows


def _fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    return f"{x:.6g}"


def write_csv(rows: Iterable[SweepRow], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([r.swept_param, _fmt(r.value), _fmt(r.sim_mean), _fmt(r.sim_se),
                    _fmt(r.analytic), _fmt(r.bound), _fmt(r.abstention_rate)])


def rows_to_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def read_csv(fh: TextIO) -> list[SweepRow]:
    def num(s: str) -> Optional[float]:
        return float(s) if s != "" else None

    reader = csv.reader(fh)
    header = next(reader)
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"unexpected header {header}")
    return [SweepRow(r[0], float(r[1]), *(num(c) for c in r[2:])) for r in reader]


def builtin_specs(seed: int = DEFAULT_SEED, trials: int = DEFAULT_TRIALS) -> dict[str, SweepSpec]:
    """The canonical figure sweeps: K=200, p_a=0.05, kappa=3.5, D=A0=1, gamma 6 dB."""
    base = SystemConfig(K=200, p_a=0.05, B=6, L=4, gamma=analytic.db_to_linear(6.0),
                        D=1.0, A0=1.0, kappa=3.5, trials=trials, seed=seed)
    cd = Series("policy=channel_dependent", (("policy", "channel_dependent"),))
    rnd = Series("policy=random", (("policy", "random"),), cap_db_per_level=10.0)
    gamma_series = tuple(Series(f"gamma_db={g:g}", (("gamma", analytic.db_to_linear(g)),))
                         for g in (0.0, 3.0, 6.0, 9.0))
    return {
        "fig1a": SweepSpec("fig1a", base.with_(B=1), "L", tuple(range(1, 9)), "level_power", gamma_series),
        "fig1b": SweepSpec("fig1b", base.with_(B=1), "L", tuple(range(1, 11)), "eta_bound"),
        "fig2": SweepSpec("fig2", base, "B", (2, 4, 6, 8, 10, 12), "throughput",
                          (Series("L=1", (("L", 1),)), Series("L=4", (("L", 4),)))),
        "fig3": SweepSpec("fig3", base.with_(B=6), "L", tuple(range(1, 9)), "throughput"),
        "fig4": SweepSpec("fig4", base.with_(B=6, L=4), "p_a",
                          tuple(round(0.01 * i, 2) for i in range(1, 21)), "throughput"),
        "fig5": SweepSpec("fig5", base.with_(B=6), "L", tuple(range(1, 7)), "power", (cd, rnd)),
        "fig6": SweepSpec("fig6", base.with_(L=4), "B", (2, 4, 6, 8, 10), "power", (cd, rnd)),
        "fig7": SweepSpec("fig7", base.with_(B=6, L=4), "gamma_db", (0.0, 2.0, 4.0, 6.0, 8.0, 10.0),
                          "power", (cd, rnd)),
    }


def rows_by_series(rows: Sequence[SweepRow]) -> dict[str, list[SweepRow]]:
    out: dict[str, list[SweepRow]] = {}
    for r in rows:
        out.setdefault(r.series, []).append(r)
    return out
