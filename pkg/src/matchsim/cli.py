"""Command-line driver.

Subcommands map one-to-one onto the engines: meanfield (trajectories),
scan-gamma (failure onset), frozenline (rank-reversal boundary), micro
(stochastic years over a seed batch), hightemp (expansion tables and the
analytic-vs-sampled unemployment comparison) and mismatch (model points
against an empirical series).  `run --config FILE` reads the mode from
the file instead.

Every invocation resolves its parameters from, in increasing precedence,
built-in defaults, a key=value config file and explicit flags, then
writes CSV tables plus a manifest.txt recording the resolved scenario;
the manifest is written last so a complete manifest marks a complete
run.  Exit codes: 0 success, 2 bad configuration or parameters, 3
unknown mode, 4 unwritable output directory.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from statistics import fmean

import numpy as np

from . import __version__
from .core import MarketConfig, make_config
from .hightemp import (acceptance_profile, analytic_unemployment,
                       expansion_order1, expansion_order2)
from .meanfield import critical_gamma_scan, frozen_line, iterate
from .microsim import run_market

MODES = ("meanfield", "micro", "hightemp", "frozenline", "mismatch",
         "scan-gamma")

EXIT_CONFIG = 2
EXIT_UNKNOWN_MODE = 3
EXIT_OUTPUT_DIR = 4


class ConfigError(Exception):
    """Bad or missing configuration input."""


class UnknownModeError(Exception):
    """Mode name not one of MODES."""


class OutputDirError(Exception):
    """Output directory cannot be created or written."""


@dataclass
class Scenario:
    cfg: MarketConfig
    mode: str
    output_dir: Path
    replicas: int = 1
    years: int = 10
    seeds: list[int] = field(default_factory=list)
    sweep: list[tuple[float, float]] | None = None    # (beta, gamma) pairs
    gamma_grid: list[float] | None = None
    series: "EmpiricalSeries | None" = None
    u_normalization: str = "falling"

    def __post_init__(self):
        if self.mode == "micro" and self.replicas < 1:
            raise ConfigError("replicas must be at least 1 in micro mode")
        if self.sweep is not None and not self.sweep:
            raise ConfigError("sweep grid must be non-empty")
        if not self.seeds:
            self.seeds = [self.cfg.seed + r for r in range(self.replicas)]


@dataclass
class EmpiricalSeries:
    """Observed (alpha, U, Omega) rows, one per labeled year."""

    rows: list[tuple[str, float, float | None, float | None]]


def load_empirical(path: str | Path) -> EmpiricalSeries:
    """Read a year,alpha[,U,Omega] CSV; header row required."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"empirical series file not found: {path}")
    rows = []
    seen = set()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "year" not in reader.fieldnames \
                or "alpha" not in reader.fieldnames:
            raise ConfigError("empirical series needs at least "
                              "year and alpha columns")
        for line in reader:
            year = line["year"].strip()
            if year in seen:
                raise ConfigError(f"duplicate year in series: {year}")
            seen.add(year)
            try:
                alpha = float(line["alpha"])
            except (TypeError, ValueError):
                raise ConfigError(f"bad alpha for year {year}") from None
            if alpha <= 0:
                raise ConfigError(f"alpha must be positive (year {year})")

            def opt(name):
                raw = (line.get(name) or "").strip()
                return float(raw) if raw else None

            rows.append((year, alpha, opt("U"), opt("Omega")))
    if not rows:
        raise ConfigError("empirical series is empty")
    return EmpiricalSeries(rows=rows)


def mismatch_compare(series: EmpiricalSeries, cfg: MarketConfig,
                     years: int = 10,
                     seeds: list[int] | None = None) -> list[tuple]:
    """Model (U, Omega) under each year's alpha, beside the observations.

    Each row's alpha replaces the template's; the couplings default to
    the template's beta, gamma (1, 1 unless overridden).  The model
    point is the final simulated year's (U, Omega) averaged over the
    seed batch.
    """
    if not series.rows:
        raise ConfigError("empirical series is empty")
    if seeds is None:
        seeds = [cfg.seed]
    table = []
    for year, alpha, u_emp, om_emp in series.rows:
        year_cfg = replace(cfg, alpha=alpha)
        finals = [run_market(replace(year_cfg, seed=s), years)[-1]
                  for s in seeds]
        table.append((year, alpha,
                      fmean(o.U for o in finals),
                      fmean(o.Omega for o in finals),
                      u_emp, om_emp))
    return table


# ---------------------------------------------------------------- output

def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.12g}"
    if x is None:
        return ""
    return str(x)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def _param_tag(x: float) -> str:
    return f"{x:g}".replace("-", "m").replace(".", "p")


# ---------------------------------------------------------------- modes

def _run_meanfield(sc: Scenario, outdir: Path) -> dict:
    pairs = sc.sweep or [(sc.cfg.beta, sc.cfg.gamma)]
    notes = {}
    for beta, gamma in pairs:
        cfg = replace(sc.cfg, beta=beta, gamma=gamma)
        traj = iterate(cfg)
        tag = f"b{_param_tag(beta)}_g{_param_tag(gamma)}"
        rows = ((t, k + 1, traj.states[t, k])
                for t in range(traj.states.shape[0])
                for k in range(cfg.K))
        _write_csv(outdir / f"trajectory_{tag}.csv", ["t", "k", "P_k"], rows)
        notes[f"verdict_{tag}"] = traj.verdict
        notes[f"iterations_{tag}"] = traj.iterations_run
        if traj.period is not None:
            notes[f"period_{tag}"] = traj.period
        if traj.failure_first_time is not None:
            notes[f"failure_first_time_{tag}"] = traj.failure_first_time
    return notes


def _run_scan(sc: Scenario, outdir: Path) -> dict:
    grid = sc.gamma_grid if sc.gamma_grid is not None \
        else [float(g) for g in range(16)]
    scan = critical_gamma_scan(sc.cfg, grid)
    _write_csv(outdir / "scan.csv", ["gamma", "steady_P1", "failed"],
               scan.rows)
    if scan.gamma_c is None:
        return {"gamma_c": "no failure in range"}
    return {"gamma_c": f"{scan.gamma_c:.12g}"}


def _run_frozenline(sc: Scenario, outdir: Path) -> dict:
    cfg = sc.cfg
    report = frozen_line(cfg.K, cfg.beta, cfg.gamma, cfg.alpha)
    rows = ((m, report.lhs[m - 1], report.ratio, m in report.frozen_set)
            for m in range(1, cfg.K))
    _write_csv(outdir / "frozenline.csv", ["m", "lhs", "ratio", "frozen"],
               rows)
    return {"m_star": f"{report.m_star:.12g}",
            "frozen_count": len(report.frozen_set)}


def _run_micro(sc: Scenario, outdir: Path) -> dict:
    peryear = []
    for seed in sc.seeds:
        outcomes = run_market(replace(sc.cfg, seed=seed), sc.years)
        for o in outcomes:
            peryear.append((o.year, o.U, o.Omega, int(o.hires.sum()), seed))
        _write_csv(outdir / f"company_seed{seed}.csv",
                   ["year", "k", "v_k", "m_k"],
                   ((o.year, k + 1, int(o.v[k]), int(o.hires[k]))
                    for o in outcomes for k in range(sc.cfg.K)))
    _write_csv(outdir / "peryear.csv",
               ["year", "U", "Omega", "sum_m", "seed"], peryear)
    return {}


def _run_hightemp(sc: Scenario, outdir: Path) -> dict:
    cfg = sc.cfg
    first = expansion_order1(cfg)
    second = expansion_order2(cfg)
    profile = acceptance_profile(first, cfg)
    _write_csv(outdir / "expansion.csv",
               ["k", "P1", "P1_hat", "P2_plus", "P2_minus", "phi"],
               ((k + 1, first.p_above[k], first.p_below[k],
                 second.p_above[k], second.p_below[k], profile.phi[k])
                for k in range(cfg.K)))

    u_rows = []
    for a_val in range(1, cfg.sheets_per_student + 1):
        analytic = analytic_unemployment(profile, a_val, cfg.K,
                                         normalization=sc.u_normalization)
        finals = [run_market(replace(cfg, sheets_per_student=a_val, seed=s),
                             sc.years)[-1].U
                  for s in sc.seeds]
        u_rows.append((a_val, analytic, fmean(finals)))
    _write_csv(outdir / "u_table.csv",
               ["a", "U_analytic", "U_montecarlo"], u_rows)
    return {"u_normalization": sc.u_normalization}


def _run_mismatch(sc: Scenario, outdir: Path) -> dict:
    if sc.series is None:
        raise ConfigError("mismatch mode needs --series FILE")
    table = mismatch_compare(sc.series, sc.cfg, years=sc.years,
                             seeds=sc.seeds)
    _write_csv(outdir / "mismatch.csv",
               ["year", "alpha", "U_model", "Omega_model",
                "U_emp", "Omega_emp"], table)
    return {"series_rows": len(table)}


_RUNNERS = {
    "meanfield": _run_meanfield,
    "scan-gamma": _run_scan,
    "frozenline": _run_frozenline,
    "micro": _run_micro,
    "hightemp": _run_hightemp,
    "mismatch": _run_mismatch,
}


def run_scenario(scenario: Scenario) -> list[Path]:
    """Dispatch a scenario and write its tables; manifest written last."""
    if scenario.mode not in MODES:
        raise UnknownModeError(f"unknown mode: {scenario.mode}")

    outdir = scenario.output_dir
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputDirError(f"cannot create output dir {outdir}: {exc}") \
            from exc
    if not os.access(outdir, os.W_OK):
        raise OutputDirError(f"output dir not writable: {outdir}")

    notes = _RUNNERS[scenario.mode](scenario, outdir)

    manifest = outdir / "manifest.txt"
    with open(manifest, "w") as fh:
        fh.write(f"matchsim_version = {__version__}\n")
        fh.write(f"mode = {scenario.mode}\n")
        for name in ("K", "N", "alpha", "beta", "gamma",
                     "sheets_per_student", "failure_threshold", "seed",
                     "max_iters", "fixed_point_tol", "oscillation_window",
                     "oscillation_tol"):
            fh.write(f"{name} = {_fmt(getattr(scenario.cfg, name))}\n")
        fh.write(f"years = {scenario.years}\n")
        fh.write(f"seeds = {','.join(str(s) for s in scenario.seeds)}\n")
        if scenario.sweep:
            fh.write("sweep = " + ";".join(f"{b}:{g}"
                                           for b, g in scenario.sweep) + "\n")
        for key, value in notes.items():
            fh.write(f"{key} = {value}\n")
    return sorted(outdir.iterdir())


# ---------------------------------------------------------------- parsing

def parse_config_file(path: str | Path) -> dict:
    """key = value lines; # comments and blank lines ignored."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


_SCENARIO_KEYS = {"mode", "years", "replicas", "seeds", "out_dir",
                  "u_normalization", "gamma_grid", "series", "sweep"}

_CFG_KEYS = {"K", "N", "alpha", "beta", "gamma", "a", "eps", "iters",
             "seed", "sheets_per_student", "failure_threshold", "max_iters",
             "fixed_point_tol", "oscillation_window", "oscillation_tol"}

# alias pairs resolve to the same MarketConfig field; keep only the winner
_COUNTERPART = {"a": "sheets_per_student", "sheets_per_student": "a",
                "eps": "failure_threshold", "failure_threshold": "eps",
                "iters": "max_iters", "max_iters": "iters"}


def _parse_seeds(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip() != ""]
    except ValueError:
        raise ConfigError(f"bad seed list: {text!r}") from None


def _parse_grid(text: str) -> list[float]:
    try:
        if ":" in text:
            lo, hi, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ValueError
            return list(np.arange(lo, hi + step / 2, step))
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise ConfigError(f"bad gamma grid: {text!r} "
                          "(use lo:hi:step or comma-separated values)") \
            from None


def _parse_sweep(text: str) -> list[tuple[float, float]]:
    pairs = []
    try:
        for chunk in text.split(";"):
            beta, gamma = (float(x) for x in chunk.split(":"))
            pairs.append((beta, gamma))
    except ValueError:
        raise ConfigError(f"bad sweep {text!r} (use BETA:GAMMA;BETA:GAMMA)") \
            from None
    return pairs


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matchsim",
        description="labor-market matching model: simulators and analytics")
    common = argparse.ArgumentParser(add_help=False)
    for flag, kind in (("--K", int), ("--N", int), ("--alpha", float),
                       ("--beta", float), ("--gamma", float), ("--a", int),
                       ("--seed", int), ("--iters", int)):
        common.add_argument(flag, type=kind)
    common.add_argument("--eps", type=float,
                        help="failure threshold on P_1")
    common.add_argument("--out-dir", type=str)
    common.add_argument("--config", type=str,
                        help="key = value file supplying any of the flags")
    common.add_argument("--years", type=int)
    common.add_argument("--replicas", type=int)
    common.add_argument("--seeds", type=str,
                        help="comma-separated seed batch, overrides --replicas")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common],
                   help="mode taken from the config file")
    mf = sub.add_parser("meanfield", parents=[common])
    mf.add_argument("--sweep", type=str,
                    help="BETA:GAMMA pairs separated by ';'")
    sub.add_parser("micro", parents=[common])
    ht = sub.add_parser("hightemp", parents=[common])
    ht.add_argument("--u-normalization", choices=("falling", "mean"))
    sub.add_parser("frozenline", parents=[common])
    mm = sub.add_parser("mismatch", parents=[common])
    mm.add_argument("--series", type=str,
                    help="CSV with year,alpha[,U,Omega] rows")
    sg = sub.add_parser("scan-gamma", parents=[common])
    sg.add_argument("--gamma-grid", type=str,
                    help="lo:hi:step or comma-separated values")
    return parser


_DEFAULTS = {"K": 50, "N": 5000, "alpha": 1.0, "beta": 1.0, "gamma": 1.0,
             "a": 3, "seed": 0, "iters": 10_000}


def scenario_from_args(args: argparse.Namespace) -> Scenario:
    file_values = parse_config_file(args.config) if args.config else {}
    unknown = set(file_values) - _SCENARIO_KEYS - _CFG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    def pick(name):
        cli = getattr(args, name, None)
        if cli is not None:
            return cli
        return file_values.get(name)

    # precedence: defaults < config file < explicit flags
    raw = dict(_DEFAULTS)
    for key, value in file_values.items():
        if key in _CFG_KEYS:
            raw.pop(_COUNTERPART.get(key, key), None)
            raw[key] = value
    for key in ("K", "N", "alpha", "beta", "gamma", "a", "seed", "iters",
                "eps"):
        cli = getattr(args, key, None)
        if cli is not None:
            raw.pop(_COUNTERPART.get(key, key), None)
            raw[key] = cli
    try:
        cfg = make_config(raw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    if args.command == "run":
        mode = file_values.get("mode")
        if mode is None:
            raise ConfigError("run needs a mode= entry in the config file")
    else:
        mode = args.command

    replicas = pick("replicas")
    replicas = int(replicas) if replicas is not None else 1
    years = pick("years")
    years = int(years) if years is not None else 10
    if years < 1:
        raise ConfigError("years must be at least 1")

    seeds_text = pick("seeds")
    seeds = _parse_seeds(seeds_text) if seeds_text else []

    sweep_text = getattr(args, "sweep", None) or file_values.get("sweep")
    grid_text = getattr(args, "gamma_grid", None) \
        or file_values.get("gamma_grid")
    series_path = getattr(args, "series", None) or file_values.get("series")
    norm = getattr(args, "u_normalization", None) \
        or file_values.get("u_normalization") or "falling"
    if norm not in ("falling", "mean"):
        raise ConfigError(f"unknown u_normalization: {norm}")

    out_dir = pick("out_dir") or "out"

    scenario = Scenario(
        cfg=cfg,
        mode=mode,
        output_dir=Path(out_dir),
        replicas=replicas,
        years=years,
        seeds=seeds,
        sweep=_parse_sweep(sweep_text) if sweep_text else None,
        gamma_grid=_parse_grid(grid_text) if grid_text else None,
        series=load_empirical(series_path) if series_path else None,
        u_normalization=norm,
    )
    return scenario


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = scenario_from_args(args)
        run_scenario(scenario)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnknownModeError as exc:
        print(f"{exc}", file=sys.stderr)
        return EXIT_UNKNOWN_MODE
    except OutputDirError as exc:
        print(f"{exc}", file=sys.stderr)
        return EXIT_OUTPUT_DIR
    return 0


if __name__ == "__main__":
    sys.exit(main())
