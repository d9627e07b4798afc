"""Command-line harness: ``mgdyn {verify,static-limit,dynamics,paths,dist}``.

Configuration is an INI file with one section per subcommand plus ``[run]``
for the seed and worker count; command-line flags override the file.
Exit codes: 0 pass, 1 check failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import sys
from pathlib import Path

from . import checks as C
from . import experiments as X
from .multigraph import DEFAULT_BUDGET, GraphFormatError, ms_distance_graphs, read_graph

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_SEED = 20240607


class ConfigError(ValueError):
    pass


@dataclasses.dataclass
class VerifyConfig:
    checks: list = dataclasses.field(default_factory=lambda: list(C.ALL_CHECKS))
    draws: int = 1_000_000
    tv_tolerance: float = 0.005
    chain_draws: int = 1_000_000
    chain_tolerance: float = 0.02
    chain_steps: int = 6
    chain_unconditional_tolerance: float = 0.01
    corrupt_formula: bool = False

    def __post_init__(self):
        bad = [c for c in self.checks if c not in C.ALL_CHECKS]
        if bad:
            raise ValueError(f"unknown checks {bad}; choose from {list(C.ALL_CHECKS)}")
        if self.draws < 1 or self.chain_draws < 1:
            raise ValueError("draw counts must be positive")


SECTIONS = {
    "verify": VerifyConfig,
    "static-limit": X.StaticConfig,
    "dynamics": X.DynamicsConfig,
    "paths": X.PathsConfig,
}


def _convert(raw: str, default, name: str):
    raw = raw.strip()
    if isinstance(default, bool):
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    if isinstance(default, list):
        items = [s.strip() for s in raw.split(",") if s.strip()]
        if default and isinstance(default[0], (int, float)):
            kind = type(default[0])
            try:
                return [kind(float(s)) if kind is int and float(s).is_integer() else kind(s) for s in items]
            except ValueError:
                raise ConfigError(f"{name}: expected numbers, got {raw!r}") from None
        return items
    try:
        if isinstance(default, int):
            v = float(raw)
            if not v.is_integer():
                raise ValueError
            return int(v)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{name}: expected {type(default).__name__}, got {raw!r}") from None
    return raw


def build_config(section: str, values: dict):
    """Dataclass for ``section`` from string values, defaults filling the rest."""
    cls = SECTIONS[section]
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, raw in values.items():
        key = key.replace("-", "_")
        if key not in fields:
            raise ConfigError(f"[{section}] unknown key {key!r}")
        f = fields[key]
        default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
        kwargs[key] = _convert(raw, default, f"[{section}] {key}")
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"[{section}] {e}") from None


def load_config(path: str | None) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if path is None:
        return cp
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from None
    except configparser.Error as e:
        raise ConfigError(f"bad config: {e}") from None
    unknown = [s for s in cp.sections() if s not in SECTIONS and s != "run"]
    if unknown:
        raise ConfigError(f"unknown config sections {unknown}")
    return cp


def _section(cp, name) -> dict:
    return dict(cp[name]) if cp.has_section(name) else {}


def _run_settings(cp, args) -> tuple[int, int]:
    run = _section(cp, "run")
    try:
        seed = int(run.get("seed", DEFAULT_SEED)) if args.seed is None else args.seed
        workers = int(run.get("workers", 1)) if args.workers is None else args.workers
    except ValueError:
        raise ConfigError("[run] seed and workers must be integers") from None
    if seed < 0:
        raise ConfigError("seed must be non-negative")
    if workers < 1:
        raise ConfigError("workers must be positive")
    return seed, workers


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    p = out / name
    p.write_text(text)
    return p


def _summary(report) -> str:
    lines = []
    for c in report.get("checks", []):
        status = "PASS" if c["passed"] else "FAIL"
        lines.append(f"{status} {c['name']}: observed={c['observed']:.6g} tolerance={c['tolerance']:.6g}")
    lines.append("overall: " + ("PASS" if report["passed"] else "FAIL"))
    return "\n".join(lines)


# ---------------------------------------------------------------- subcommands


def cmd_verify(cfg: VerifyConfig, seed: int, workers: int, out: Path) -> dict:
    results = C.run_checks(cfg.checks, seed, workers, cfg.draws, cfg.tv_tolerance, cfg.chain_draws,
                           cfg.chain_tolerance, cfg.chain_steps, cfg.chain_unconditional_tolerance,
                           corrupt=cfg.corrupt_formula)
    report = {"experiment": "verify", "seed": seed, "config": dataclasses.asdict(cfg),
              "checks": [r.to_json() for r in results], "passed": all(r.passed for r in results)}
    _write(out, "verify_report.json", X.to_json(report))
    return report


def cmd_static_limit(cfg, seed, workers, out, budget) -> dict:
    summary, reps, report = X.run_static(cfg, seed, workers, budget)
    _write(out, "static_limit.csv", X.to_csv(X.STATIC_HEADER, summary))
    _write(out, "static_limit_replicates.csv", X.to_csv(X.STATIC_REP_HEADER, reps))
    _write(out, "static_limit_report.json", X.to_json(report))
    return report


def cmd_dynamics(cfg, seed, workers, out, budget, unsafe) -> dict:
    rows, summary, report = X.run_dynamics(cfg, seed, workers, budget, unsafe)
    _write(out, "dynamics_trajectories.csv", X.to_csv(X.DYN_HEADER, rows))
    _write(out, "dynamics.csv", X.to_csv(X.DYN_SUMMARY_HEADER, summary))
    _write(out, "dynamics_report.json", X.to_json(report))
    return report


def cmd_paths(cfg, seed, workers, out, unsafe) -> dict:
    rows, report = X.run_paths(cfg, seed, workers, unsafe)
    _write(out, "paths.csv", X.to_csv(X.PATHS_HEADER, rows))
    _write(out, "paths_report.json", X.to_json(report))
    return report


def cmd_dist(file_a, file_b, i_max, r_max, max_k, budget) -> dict:
    g1, g2 = read_graph(file_a), read_graph(file_b)
    d = ms_distance_graphs(g1, g2, i_max, r_max, max_k, budget)
    return {"value": d.value, "truncation_bound": d.truncation_bound, "I_max": i_max,
            "R_max": r_max, "max_k": max_k}


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mgdyn", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("verify", "exact-law and sampler checks"),
                        ("static-limit", "static limit experiment"),
                        ("dynamics", "reconnection chain against its limit"),
                        ("paths", "fast half-edge count paths")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="INI file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--out-dir", default="results")
        sp.add_argument("--budget", type=int, default=int(DEFAULT_BUDGET),
                        help="largest map count evaluated exactly")
        if name in ("dynamics", "paths"):
            sp.add_argument("--unsafe-regime", action="store_true",
                            help="allow p1 != p2, which has no calibrated limit")
    d = sub.add_parser("dist", help="truncated distance between two graph files")
    d.add_argument("file_a")
    d.add_argument("file_b")
    d.add_argument("--i-max", type=int, default=64)
    d.add_argument("--r-max", type=int, default=None)
    d.add_argument("--max-k", type=int, default=3)
    d.add_argument("--budget", type=int, default=int(DEFAULT_BUDGET))
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        if args.command == "dist":
            if args.i_max < 0 or args.max_k < 1 or (args.r_max is not None and args.r_max < 0):
                raise ConfigError("--i-max, --r-max must be non-negative and --max-k positive")
            try:
                res = cmd_dist(args.file_a, args.file_b, args.i_max, args.r_max, args.max_k, args.budget)
            except OSError as e:
                raise ConfigError(str(e)) from None
            print(json.dumps(res, sort_keys=True))
            return EXIT_OK
        if args.budget < 1:
            raise ConfigError("--budget must be positive")
        cp = load_config(args.config)
        seed, workers = _run_settings(cp, args)
        cfg = build_config(args.command, _section(cp, args.command))
        out = Path(args.out_dir)
        if args.command == "verify":
            report = cmd_verify(cfg, seed, workers, out)
        elif args.command == "static-limit":
            report = cmd_static_limit(cfg, seed, workers, out, args.budget)
        elif args.command == "dynamics":
            report = cmd_dynamics(cfg, seed, workers, out, args.budget, args.unsafe_regime)
        else:
            report = cmd_paths(cfg, seed, workers, out, args.unsafe_regime)
    except (ConfigError, GraphFormatError, X.RegimeError) as e:
        print(f"mgdyn: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    print(_summary(report))
    return EXIT_OK if report["passed"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
