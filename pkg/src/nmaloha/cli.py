"""Command-line front end.

    nmaloha analytic --formula t_ma --lambda 1 --B 10
    nmaloha simulate --K 200 --pa 0.05 --B 4 --L 4 --gamma-db 6 --seed 7
    nmaloha oracle --M 3 --L 2
    nmaloha sweep --figure fig2 --seed 7 --out fig2.csv --plot

Exit codes: 0 success, 2 invalid arguments or parameters, 1 internal failure.
SINR and power-cap flags are in dB; everything past this module is linear.
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import analytic
from .channel import truncation_cap
from .experiments import FIGURES, METRICS, Series, SweepError, SweepSpec, builtin_specs, run_sweep, write_csv
from .montecarlo import DEFAULT_SEED, POLICIES, RECEIVERS, SystemConfig, simulate
from .sic import ENUMERATION_LIMIT, exact_eta_oracle, exact_eta_sinr_oracle

FORMULAS = ("eta_ma", "eta_lb", "t_ma", "t_nma_lb", "power_levels", "power_bound")
DEFAULT_TRIALS = 200_000

# config-file / flag name -> (SystemConfig field, parser)
_CONFIG_KEYS = {
    "K": ("K", int),
    "pa": ("p_a", float),
    "B": ("B", int),
    "L": ("L", int),
    "gamma-db": ("gamma", lambda s: analytic.db_to_linear(float(s))),
    "D": ("D", float),
    "A0": ("A0", float),
    "kappa": ("kappa", float),
    "policy": ("policy", str),
    "receiver": ("receiver", str),
    "M": ("forced_m", int),
    "trials": ("trials", int),
    "seed": ("seed", int),
}


class UsageError(Exception):
    """Bad user input; reported with exit code 2."""


def fmt_num(x: float) -> str:
    if x != x:
        return "nan"
    s = f"{x:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def read_key_values(path: str | Path) -> dict[str, str]:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err}") from None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{n}: expected key=value, got {raw!r}")
        out[key.strip().lstrip("-")] = value.strip()
    return out


def _cap_from(text: str, L: int) -> Optional[float]:
    t = text.strip().lower()
    if t in ("none", "inf", ""):
        return None
    if t == "auto":
        return truncation_cap(L)
    return analytic.db_to_linear(float(t))


def build_config(file_values: dict[str, str], flags: dict[str, Optional[str]]) -> SystemConfig:
    """Merge config-file values with flags (flags win) into a validated SystemConfig."""
    merged = dict(file_values)
    merged.update({k: v for k, v in flags.items() if v is not None})
    unknown = set(merged) - set(_CONFIG_KEYS) - {"cap-db", "workers", "out"}
    if unknown:
        raise UsageError(f"unknown configuration keys: {', '.join(sorted(unknown))}")
    kwargs = {}
    for key, (name, parse) in _CONFIG_KEYS.items():
        if key in merged:
            try:
                kwargs[name] = parse(str(merged[key]))
            except ValueError:
                raise UsageError(f"invalid value for {key}: {merged[key]!r}") from None
    kwargs.setdefault("trials", DEFAULT_TRIALS)
    kwargs.setdefault("seed", DEFAULT_SEED)
    try:
        cfg = SystemConfig(**kwargs)
        if "cap-db" in merged:
            cfg = replace(cfg, cap=_cap_from(str(merged["cap-db"]), cfg.L))
    except ValueError as err:
        raise UsageError(str(err)) from None
    return cfg


def _emit(lines: Sequence[str], out: Optional[str]) -> None:
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if out:
        Path(out).write_text(text)


def _table(pairs: Sequence[tuple[str, object]]) -> list[str]:
    return [f"{k:<12}{v}" for k, v in pairs]


def _need(args, *names: str) -> None:
    dest = {"lambda": "lam"}
    missing = [n for n in names if getattr(args, dest.get(n, n.replace("-", "_"))) is None]
    if missing:
        raise UsageError(f"--formula {args.formula} needs " + ", ".join(f"--{m}" for m in missing))


def cmd_analytic(args) -> int:
    f = args.formula
    gamma = analytic.db_to_linear(args.gamma_db) if args.gamma_db is not None else None
    try:
        if f == "eta_ma":
            _need(args, "M", "B")
            pairs = [("M", args.M), ("B", args.B)]
            value = fmt_num(analytic.eta_ma(args.M, args.B))
        elif f == "eta_lb":
            _need(args, "M", "L")
            pairs = [("M", args.M), ("L", args.L)]
            value = fmt_num(analytic.eta_lower_bound(args.M, args.L))
        elif f == "t_ma":
            _need(args, "lambda", "B")
            pairs = [("lambda", fmt_num(args.lam)), ("B", args.B)]
            value = fmt_num(analytic.t_ma_avg(args.lam, args.B))
        elif f == "t_nma_lb":
            _need(args, "lambda", "L", "B")
            pairs = [("lambda", fmt_num(args.lam)), ("L", args.L), ("B", args.B)]
            value = fmt_num(analytic.t_nma_lower_bound(args.lam, args.L, args.B))
        elif f == "power_levels":
            _need(args, "gamma-db", "L")
            pairs = [("gamma_db", fmt_num(args.gamma_db)), ("L", args.L)]
            value = " ".join(fmt_num(v) for v in analytic.power_levels(gamma, args.L).levels)
        else:
            _need(args, "gamma-db", "L", "B")
            pairs = [("gamma_db", fmt_num(args.gamma_db)), ("L", args.L), ("B", args.B),
                     ("A0", fmt_num(args.A0)), ("D", fmt_num(args.D)), ("kappa", fmt_num(args.kappa))]
            if args.l is not None:
                pairs.append(("l", args.l))
                value = fmt_num(analytic.power_bound_per_group(
                    args.l, gamma, args.L, args.B, args.A0, args.D, args.kappa))
            else:
                value = fmt_num(analytic.avg_power_upper_bound(
                    gamma, args.L, args.B, args.A0, args.D, args.kappa))
    except ValueError as err:
        raise UsageError(str(err)) from None
    _emit(_table([("formula", f), *pairs, ("value", value)]), args.out)
    return 0


def _sim_flags(args) -> dict[str, Optional[str]]:
    names = {"K": args.K, "pa": args.pa, "B": args.B, "L": args.L, "gamma-db": args.gamma_db,
             "D": args.D, "A0": args.A0, "kappa": args.kappa, "policy": args.policy,
             "receiver": args.receiver, "M": args.M, "cap-db": args.cap_db,
             "trials": args.trials, "seed": args.seed}
    return {k: (None if v is None else str(v)) for k, v in names.items()}


def cmd_simulate(args) -> int:
    file_values = read_key_values(args.config) if args.config else {}
    cfg = build_config(file_values, _sim_flags(args))
    res = simulate(cfg, workers=args.workers)
    cap = "none" if cfg.cap is None else fmt_num(analytic.linear_to_db(cfg.cap)) + " dB"
    lines = _table([
        ("K", cfg.K), ("p_a", fmt_num(cfg.p_a)), ("B", cfg.B), ("L", cfg.L),
        ("gamma_db", fmt_num(analytic.linear_to_db(cfg.gamma))), ("policy", cfg.policy),
        ("receiver", cfg.receiver), ("cap", cap),
        ("trials", cfg.trials), ("seed", cfg.seed),
    ])
    lines.append(f"{'metric':<12}{'mean':>14}{'std_error':>14}{'samples':>12}")
    for name, est in (("throughput", res.throughput), ("avg_power", res.power),
                      ("abstention", res.abstention)):
        lines.append(f"{name:<12}{est.mean:>14.6g}{est.std_error:>14.6g}{est.trials:>12d}")
    sys.stdout.write("\n".join(lines) + "\n")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("metric", "mean", "std_error", "samples", "seed"))
            for name, est in (("throughput", res.throughput), ("avg_power", res.power),
                              ("abstention", res.abstention)):
                w.writerow((name, f"{est.mean:.6g}", f"{est.std_error:.6g}", est.trials, est.seed))
    return 0


def cmd_oracle(args) -> int:
    if args.M < 0 or args.L < 1:
        raise UsageError("oracle needs M >= 0 and L >= 1")
    if args.L**args.M > ENUMERATION_LIMIT:
        raise UsageError(f"L**M = {args.L**args.M} exceeds the enumeration limit {ENUMERATION_LIMIT}")
    exact = exact_eta_oracle(args.M, args.L)
    bound = analytic.eta_lower_bound(args.M, args.L)
    pairs = [("M", args.M), ("L", args.L), ("exact", fmt_num(exact)),
             ("bound", fmt_num(bound)), ("gap", fmt_num(exact - bound))]
    if args.gamma_db is not None:
        sinr = exact_eta_sinr_oracle(args.M, args.L, analytic.db_to_linear(args.gamma_db))
        pairs += [("gamma_db", fmt_num(args.gamma_db)), ("exact_sinr", fmt_num(sinr))]
    _emit(_table(pairs), args.out)
    return 0


_SPEC_PARAM_ALIASES = {"pa": "p_a", "gamma-db": "gamma_db", "M": "forced_m"}


def load_spec_file(path: str, seed: Optional[int], trials: Optional[int]) -> SweepSpec:
    """Custom sweep from key=value lines: ``param``, ``values``, ``metric``,
    optional ``figure`` name, and any configuration key for the base scenario."""
    kv = read_key_values(path)
    try:
        param = kv.pop("param")
        values_text = kv.pop("values")
    except KeyError as err:
        raise UsageError(f"{path}: missing required key {err.args[0]}") from None
    figure = kv.pop("figure", Path(path).stem)
    metric = kv.pop("metric", "throughput")
    if metric not in METRICS:
        raise UsageError(f"{path}: metric must be one of {METRICS}")
    param = _SPEC_PARAM_ALIASES.get(param, param)
    conv = int if param in ("K", "B", "L", "forced_m") else float
    try:
        values = tuple(conv(v) for v in values_text.split(",") if v.strip())
    except ValueError:
        raise UsageError(f"{path}: could not parse values {values_text!r}") from None
    flags = {"seed": None if seed is None else str(seed), "trials": None if trials is None else str(trials)}
    base = build_config(kv, flags)
    try:
        return SweepSpec(figure, base, param, values, metric, (Series(),))
    except SweepError as err:
        raise UsageError(str(err)) from None


def cmd_sweep(args) -> int:
    if args.figure is None and args.spec is None:
        raise UsageError("sweep needs --figure or --spec")
    if args.spec:
        spec = load_spec_file(args.spec, args.seed, args.trials)
    else:
        if args.figure not in FIGURES:
            raise UsageError(f"unknown figure {args.figure!r}; choose from {', '.join(FIGURES)}")
        spec = builtin_specs(seed=DEFAULT_SEED if args.seed is None else args.seed,
                             trials=DEFAULT_TRIALS if args.trials is None else args.trials)[args.figure]

    def progress(row):
        parts = [f"{row.swept_param}={fmt_num(row.value)}"]
        for name in ("sim_mean", "sim_se", "analytic", "bound", "abstention_rate"):
            v = getattr(row, name)
            if v is not None:
                parts.append(f"{name}={v:.6g}")
        print("  ".join(parts))

    try:
        rows = run_sweep(spec, workers=args.workers, progress=progress)
    except SweepError as err:
        raise UsageError(str(err)) from None
    out = Path(args.out or f"{spec.figure}.csv")
    with open(out, "w", newline="") as fh:
        write_csv(rows, fh)
    print(f"wrote {out}")
    if args.plot is not None:
        from .plotting import plot_sweep

        img = Path(args.plot) if args.plot else out.with_suffix(".png")
        plot_sweep(spec, rows, img)
        print(f"wrote {img}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--out")
    common.add_argument("--config")
    common.add_argument("--workers", type=int, default=1)

    p = argparse.ArgumentParser(prog="nmaloha", description="NOMA multichannel ALOHA toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analytic", parents=[common], help="evaluate a closed-form expression")
    a.add_argument("--formula", required=True, choices=FORMULAS)
    a.add_argument("--M", type=int)
    a.add_argument("--B", type=int)
    a.add_argument("--L", type=int)
    a.add_argument("--l", type=int, help="group index (1-based) for power_bound")
    a.add_argument("--lambda", dest="lam", type=float)
    a.add_argument("--gamma-db", type=float)
    a.add_argument("--A0", type=float, default=1.0)
    a.add_argument("--D", type=float, default=1.0)
    a.add_argument("--kappa", type=float, default=3.5)
    a.set_defaults(func=cmd_analytic)

    s = sub.add_parser("simulate", parents=[common], help="run one Monte Carlo scenario")
    s.add_argument("--K", type=int)
    s.add_argument("--pa", type=float)
    s.add_argument("--B", type=int)
    s.add_argument("--L", type=int)
    s.add_argument("--gamma-db", type=float)
    s.add_argument("--D", type=float)
    s.add_argument("--A0", type=float)
    s.add_argument("--kappa", type=float)
    s.add_argument("--policy", choices=POLICIES)
    s.add_argument("--receiver", choices=RECEIVERS)
    s.add_argument("--cap-db", help="power cap in dB, 'auto' for 10 L dB, or 'none'")
    s.add_argument("--M", type=int, help="force exactly M active users per slot")
    s.set_defaults(func=cmd_simulate)

    o = sub.add_parser("oracle", parents=[common], help="enumerate the exact conditional throughput")
    o.add_argument("--M", type=int, required=True)
    o.add_argument("--L", type=int, required=True)
    o.add_argument("--gamma-db", type=float, help="also enumerate the SINR receiver")
    o.set_defaults(func=cmd_oracle)

    w = sub.add_parser("sweep", parents=[common], help="run a figure sweep to CSV")
    w.add_argument("--figure")
    w.add_argument("--spec", help="custom sweep file of key=value lines")
    w.add_argument("--plot", nargs="?", const="", default=None,
                   help="also render a figure (default: CSV path with .png)")
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as err:
        print(f"nmaloha: error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # noqa: BLE001
        print(f"nmaloha: internal error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
