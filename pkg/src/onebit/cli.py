"""Batch experiment runner.

Loads a TOML config describing the user population and an SNR sweep, runs
threshold optimization and/or Monte-Carlo simulation per sweep point, and
writes CSV files (12 significant digits, LF line endings, header row) that
are byte-identical for a fixed config and seed regardless of worker count.

Subcommands:

    optimize       thresholds + analytic objective per SNR
    simulate       Monte-Carlo vs analytic objective per SNR
    compare-peaks  brute-force vs random vs heuristic region choice
    sweep          optimize + simulate, both CSVs

Exit codes: 0 success, 2 config error, 3 solver error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .distributions import UserProfile, make_rayleigh_rate
from .feedback_stats import conditional_means, weighted_sum_rate
from .simulator import WORKER_ENV_VAR, SimConfig, simulate
from .threshold_opt import (
    BruteForce,
    Heuristic,
    Random,
    SolverConfig,
    SolverError,
    optimize,
    optimize_two_user,
)

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "main"]

PAPER_WEIGHTS = (1.1, 1.05, 1.0, 0.95, 0.9)

DEFAULT_CONFIG_TOML = """\
# default experiment: 5 users with the reference QoS weights, a common
# average SNR swept 0..20 dB in 2 dB steps, one million blocks per point
seed = 1
n_blocks = 1000000
strategy = "brute"
random_draws = 20
snr_db_start = 0.0
snr_db_stop = 20.0
snr_db_step = 2.0

[[user]]
weight = 1.1

[[user]]
weight = 1.05

[[user]]
weight = 1.0

[[user]]
weight = 0.95

[[user]]
weight = 0.9
"""


class ConfigError(ValueError):
    """The experiment config file is unreadable or inconsistent."""


@dataclass(frozen=True)
class UserSpec:
    weight: float
    avg_snr_db: float | None = None  # None: follow the sweep


@dataclass(frozen=True)
class ExperimentConfig:
    users: tuple[UserSpec, ...]
    sweep_snrs_db: tuple[float, ...]
    n_blocks: int
    seed: int
    strategy_name: str
    random_draws: int = 20
    solver: SolverConfig = field(default_factory=SolverConfig)

    def profiles_at(self, snr_db: float) -> tuple[UserProfile, ...]:
        return tuple(
            UserProfile(
                weight=u.weight,
                dist=make_rayleigh_rate(u.avg_snr_db if u.avg_snr_db is not None else snr_db),
            )
            for u in self.users
        )

    def strategy(self):
        if self.strategy_name == "brute":
            return BruteForce()
        if self.strategy_name == "random":
            return Random(seed=self.seed)
        if self.strategy_name == "heuristic":
            return Heuristic()
        raise ConfigError(f"unknown strategy {self.strategy_name!r}")


def _require(table: dict, key: str, kind, where: str):
    if key not in table:
        raise ConfigError(f"missing required key {key!r} in {where}")
    value = table[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ConfigError(f"key {key!r} in {where} must be {kind.__name__}, got {value!r}")
    return value


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc

    users_raw = raw.get("user")
    if not users_raw:
        raise ConfigError(f"{source}: at least one [[user]] section is required")
    users = []
    for idx, u in enumerate(users_raw, start=1):
        weight = _require(u, "weight", float, f"[[user]] #{idx}")
        if weight <= 0:
            raise ConfigError(f"{source}: [[user]] #{idx} weight must be > 0")
        snr = u.get("avg_snr_db")
        if snr is not None and not isinstance(snr, (int, float)):
            raise ConfigError(f"{source}: [[user]] #{idx} avg_snr_db must be a number")
        users.append(UserSpec(weight=weight, avg_snr_db=None if snr is None else float(snr)))

    if "snr_db" in raw:
        sweep = (float(_require(raw, "snr_db", float, source)),)
    elif "snr_db_start" in raw or "snr_db_stop" in raw or "snr_db_step" in raw:
        start = _require(raw, "snr_db_start", float, source)
        stop = _require(raw, "snr_db_stop", float, source)
        step = _require(raw, "snr_db_step", float, source)
        if step <= 0:
            raise ConfigError(f"{source}: snr_db_step must be > 0")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        if count < 1:
            raise ConfigError(f"{source}: empty SNR sweep ({start}..{stop} step {step})")
        sweep = tuple(start + k * step for k in range(count))
    else:
        raise ConfigError(f"{source}: need snr_db or snr_db_start/snr_db_stop/snr_db_step")

    n_blocks = int(_require(raw, "n_blocks", int, source))
    if n_blocks < 1:
        raise ConfigError(f"{source}: n_blocks must be >= 1")
    seed = int(_require(raw, "seed", int, source))
    strategy = raw.get("strategy", "brute")
    if strategy not in ("brute", "random", "heuristic"):
        raise ConfigError(f"{source}: strategy must be brute|random|heuristic, got {strategy!r}")
    random_draws = int(raw.get("random_draws", 20))
    if random_draws < 1:
        raise ConfigError(f"{source}: random_draws must be >= 1")

    solver_raw = raw.get("solver", {})
    if not isinstance(solver_raw, dict):
        raise ConfigError(f"{source}: [solver] must be a table")
    allowed = {"fixed_point_tol", "max_iters", "damping", "bisection_tol", "fd_step"}
    unknown = set(solver_raw) - allowed
    if unknown:
        raise ConfigError(f"{source}: unknown [solver] keys: {sorted(unknown)}")
    try:
        solver = SolverConfig(**solver_raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: invalid [solver] table: {exc}") from exc

    return ExperimentConfig(
        users=tuple(users),
        sweep_snrs_db=sweep,
        n_blocks=n_blocks,
        seed=seed,
        strategy_name=strategy,
        random_draws=random_draws,
        solver=solver,
    )


def load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return parse_config(DEFAULT_CONFIG_TOML, source="<built-in default>")
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, source=str(p))


# ---------------------------------------------------------------------------
# CSV helpers
# ---------------------------------------------------------------------------


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    lines = [",".join(header)]
    lines += [",".join(row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _region_str(ordering) -> str:
    return "-".join(str(k + 1) for k in ordering)


def _write_meta(out_dir: Path, cfg: ExperimentConfig, command: str) -> None:
    meta = {
        "command": command,
        "note": "SNR range and block count are artifact defaults, not reference values",
        "seed": cfg.seed,
        "n_blocks": cfg.n_blocks,
        "strategy": cfg.strategy_name,
        "random_draws": cfg.random_draws,
        "snr_db": list(cfg.sweep_snrs_db),
        "users": [
            {"weight": u.weight, "avg_snr_db": u.avg_snr_db} for u in cfg.users
        ],
        "solver": {
            "fixed_point_tol": cfg.solver.fixed_point_tol,
            "max_iters": cfg.solver.max_iters,
            "damping": cfg.solver.damping,
            "bisection_tol": cfg.solver.bisection_tol,
            "fd_step": cfg.solver.fd_step,
        },
    }
    (out_dir / "run_meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


# ---------------------------------------------------------------------------
# per-sweep-point work (module level so ProcessPoolExecutor can pickle it)
# ---------------------------------------------------------------------------


def _optimize_point(args):
    cfg, snr_db = args
    profiles = cfg.profiles_at(snr_db)
    best = optimize(profiles, cfg.strategy(), cfg.solver)
    return snr_db, best


def _simulate_point(args):
    cfg, snr_db, thresholds = args
    profiles = cfg.profiles_at(snr_db)
    if thresholds is None:
        thresholds = optimize(profiles, cfg.strategy(), cfg.solver).thresholds
    stats = [conditional_means(p.dist, r) for p, r in zip(profiles, thresholds)]
    phi_analytic = weighted_sum_rate(stats, [p.weight for p in profiles])
    report = simulate(
        SimConfig(profiles=profiles, thresholds=thresholds, n_blocks=cfg.n_blocks, seed=cfg.seed),
        n_workers=1,  # sweep points already run in parallel
    )
    return snr_db, thresholds, phi_analytic, report


def _compare_point(args):
    cfg, snr_db = args
    profiles = cfg.profiles_at(snr_db)
    phi_brute = optimize(profiles, BruteForce(), cfg.solver).phi
    phi_random = min(
        optimize(profiles, Random(seed=cfg.seed + d), cfg.solver).phi
        for d in range(cfg.random_draws)
    )
    phi_heur = optimize(profiles, Heuristic(), cfg.solver).phi
    return snr_db, phi_brute, phi_random, phi_heur


def _map_sweep(fn, tasks):
    workers = _cli_workers()
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def _cli_workers() -> int:
    env = os.environ.get(WORKER_ENV_VAR)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{WORKER_ENV_VAR} must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_optimize(cfg: ExperimentConfig, out_dir: Path) -> None:
    results = _map_sweep(_optimize_point, [(cfg, s) for s in cfg.sweep_snrs_db])
    m = len(cfg.users)
    header = (
        ["snr_db"]
        + [f"r_{i + 1}" for i in range(m)]
        + ["phi_analytic", "region", "raw_polish_gap"]
    )
    rows = []
    for snr_db, best in results:
        gap = 0.0 if best.raw_phi is None else best.phi - best.raw_phi
        rows.append(
            [_fmt(snr_db)]
            + [_fmt(r) for r in best.thresholds]
            + [_fmt(best.phi), _region_str(best.ordering), _fmt(gap)]
        )
        print(
            f"snr={snr_db:g} dB  phi={best.phi:.6f}  region={_region_str(best.ordering)}"
            f"  thresholds=" + "/".join(f"{r:.4f}" for r in best.thresholds)
        )
    if m == 2:
        for snr_db, _ in results:
            peaks = optimize_two_user(cfg.profiles_at(snr_db), cfg.solver)
            print(
                f"snr={snr_db:g} dB  two-user peaks: "
                f"phi_a={peaks.peak_a.phi:.9f} phi_b={peaks.peak_b.phi:.9f}"
            )
    _write_csv(out_dir / "optimize.csv", header, rows)
    _write_meta(out_dir, cfg, "optimize")


def cmd_simulate(cfg: ExperimentConfig, out_dir: Path, thresholds_csv: str | None) -> None:
    fixed = _load_thresholds(thresholds_csv, cfg) if thresholds_csv else None
    tasks = [
        (cfg, s, None if fixed is None else fixed[s]) for s in cfg.sweep_snrs_db
    ]
    results = _map_sweep(_simulate_point, tasks)
    m = len(cfg.users)
    header = (
        ["snr_db", "phi_analytic", "phi_mc", "phi_mc_stderr", "phi_full_csi", "phi_full_csi_stderr"]
        + [f"rate_{i + 1}" for i in range(m)]
        + [f"frac_{i + 1}" for i in range(m)]
    )
    rows = []
    for snr_db, _thr, phi_analytic, rep in results:
        rows.append(
            [
                _fmt(snr_db),
                _fmt(phi_analytic),
                _fmt(rep.avg_weighted_rate_one_bit),
                _fmt(rep.stderr_one_bit),
                _fmt(rep.avg_weighted_rate_full_csi),
                _fmt(rep.stderr_full_csi),
            ]
            + [_fmt(r) for r in rep.per_user_avg_rate]
            + [_fmt(f) for f in rep.scheduling_fraction]
        )
        print(
            f"snr={snr_db:g} dB  phi_mc={rep.avg_weighted_rate_one_bit:.6f}"
            f" (analytic {phi_analytic:.6f}, full-CSI {rep.avg_weighted_rate_full_csi:.6f})"
        )
    _write_csv(out_dir / "simulate.csv", header, rows)
    _write_meta(out_dir, cfg, "simulate")


def cmd_compare_peaks(cfg: ExperimentConfig, out_dir: Path) -> None:
    if len(cfg.users) > 8:
        raise ConfigError("compare-peaks needs M <= 8 for the brute-force reference")
    results = _map_sweep(_compare_point, [(cfg, s) for s in cfg.sweep_snrs_db])
    header = [
        "snr_db",
        "phi_bruteforce",
        "phi_random",
        "phi_heuristic",
        "loss_random_percent",
        "loss_heuristic_percent",
    ]
    rows = []
    for snr_db, phi_brute, phi_random, phi_heur in results:
        loss_r = 100.0 * (1.0 - phi_random / phi_brute)
        loss_h = 100.0 * (1.0 - phi_heur / phi_brute)
        rows.append(
            [_fmt(snr_db), _fmt(phi_brute), _fmt(phi_random), _fmt(phi_heur), _fmt(loss_r), _fmt(loss_h)]
        )
        print(
            f"snr={snr_db:g} dB  brute={phi_brute:.6f}  worst-random={phi_random:.6f}"
            f" ({loss_r:.3f}% loss)  heuristic={phi_heur:.6f} ({loss_h:.3f}% loss)"
        )
    _write_csv(out_dir / "compare_peaks.csv", header, rows)
    _write_meta(out_dir, cfg, "compare-peaks")


def cmd_sweep(cfg: ExperimentConfig, out_dir: Path) -> None:
    cmd_optimize(cfg, out_dir)
    thresholds = _load_thresholds(str(out_dir / "optimize.csv"), cfg)
    tasks = [(cfg, s, thresholds[s]) for s in cfg.sweep_snrs_db]
    results = _map_sweep(_simulate_point, tasks)
    m = len(cfg.users)
    header = (
        ["snr_db", "phi_analytic", "phi_mc", "phi_mc_stderr", "phi_full_csi", "phi_full_csi_stderr"]
        + [f"rate_{i + 1}" for i in range(m)]
        + [f"frac_{i + 1}" for i in range(m)]
    )
    rows = []
    for snr_db, _thr, phi_analytic, rep in results:
        rows.append(
            [
                _fmt(snr_db),
                _fmt(phi_analytic),
                _fmt(rep.avg_weighted_rate_one_bit),
                _fmt(rep.stderr_one_bit),
                _fmt(rep.avg_weighted_rate_full_csi),
                _fmt(rep.stderr_full_csi),
            ]
            + [_fmt(r) for r in rep.per_user_avg_rate]
            + [_fmt(f) for f in rep.scheduling_fraction]
        )
    _write_csv(out_dir / "simulate.csv", header, rows)
    _write_meta(out_dir, cfg, "sweep")


def _load_thresholds(path: str, cfg: ExperimentConfig) -> dict[float, tuple[float, ...]]:
    """Read thresholds per SNR from a previous optimize.csv."""
    m = len(cfg.users)
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read thresholds CSV {path}: {exc}") from exc
    if not lines:
        raise ConfigError(f"thresholds CSV {path} is empty")
    header = lines[0].split(",")
    wanted = [f"r_{i + 1}" for i in range(m)]
    try:
        snr_col = header.index("snr_db")
        cols = [header.index(w) for w in wanted]
    except ValueError as exc:
        raise ConfigError(f"thresholds CSV {path} lacks a required column: {exc}") from exc
    table = {}
    for line in lines[1:]:
        parts = line.split(",")
        table[float(parts[snr_col])] = tuple(float(parts[c]) for c in cols)
    missing = [s for s in cfg.sweep_snrs_db if s not in table]
    if missing:
        raise ConfigError(f"thresholds CSV {path} has no rows for SNR points {missing}")
    return table


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onebit",
        description="One-bit-feedback scheduler: threshold optimization and Monte-Carlo checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("optimize", "simulate", "compare-peaks", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML config file (omit for the built-in default)")
        p.add_argument("--out", default="results", help="output directory (default: results)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--blocks", type=int, help="override the config n_blocks")
        p.add_argument(
            "--strategy",
            choices=("brute", "random", "heuristic"),
            help="override the region-selection strategy",
        )
        if name == "simulate":
            p.add_argument("--thresholds", help="optimize.csv to take thresholds from")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.blocks is not None:
            if args.blocks < 1:
                raise ConfigError("--blocks must be >= 1")
            overrides["n_blocks"] = args.blocks
        if args.strategy is not None:
            overrides["strategy_name"] = args.strategy
        if overrides:
            cfg = replace(cfg, **overrides)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)

        if args.command == "optimize":
            cmd_optimize(cfg, out_dir)
        elif args.command == "simulate":
            cmd_simulate(cfg, out_dir, getattr(args, "thresholds", None))
        elif args.command == "compare-peaks":
            cmd_compare_peaks(cfg, out_dir)
        elif args.command == "sweep":
            cmd_sweep(cfg, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
