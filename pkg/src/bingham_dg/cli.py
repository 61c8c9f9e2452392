"""Command-line runner for the benchmarks.

Exit codes: 0 success, 2 usage or malformed configuration, 3 unknown
benchmark, 4 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .benchmarks import BENCHMARKS, build, error_norms
from .config import (
    RunConfig,
    UnknownBenchmarkError,
    config_echo,
    parse_continuation,
    parse_orders,
    read_ini,
    resolve,
)
from .errors import ConfigError, InvalidArgumentError, SimulationAborted
from .output import write_snapshot, write_summary
from .time_newton import NewtonConfig, run_simulation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNKNOWN_BENCHMARK = 3
EXIT_SOLVER = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bingham-dg", description="Run a shallow-water Bingham DG benchmark.")
    p.add_argument("--benchmark", help=f"one of: {', '.join(BENCHMARKS)}")
    p.add_argument("--config", type=Path, help="INI file; flags override its values")
    p.add_argument("--nel", type=int, help="number of elements")
    p.add_argument("--dt", type=float, help="time step")
    p.add_argument("--tfinal", type=float, help="final time")
    p.add_argument("--orders", help="m0,m1,m2,m3 (bottom, depth, velocity, strain rate)")
    p.add_argument("--reg", type=int, choices=(1, 2, 3), help="regularization variant")
    p.add_argument("--gamma", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--continuation", help="gamma0,n_gamma (or 'off')")
    p.add_argument("--sigma0", type=float, help="yield stress")
    p.add_argument("--eta", type=float, help="viscosity")
    p.add_argument("--out", type=Path, help="output directory for snapshots and summary.json")
    p.add_argument("--snapshot-every", type=int, help="write a snapshot every N steps (0: final only)")
    return p


def _merge(ns: argparse.Namespace) -> dict:
    values = read_ini(ns.config) if ns.config else {}
    values = {sec: dict(v) for sec, v in values.items()}
    flags = {
        ("benchmark", "name"): ns.benchmark,
        ("benchmark", "n_el"): ns.nel,
        ("benchmark", "dt"): ns.dt,
        ("benchmark", "t_final"): ns.tfinal,
        ("benchmark", "orders"): parse_orders(ns.orders) if ns.orders else None,
        ("regularization", "variant"): ns.reg,
        ("regularization", "gamma"): ns.gamma,
        ("regularization", "beta"): ns.beta,
        ("physics", "sigma0"): ns.sigma0,
        ("physics", "eta"): ns.eta,
        ("output", "dir"): str(ns.out) if ns.out else None,
        ("output", "snapshot_every"): ns.snapshot_every,
    }
    for (sec, key), val in flags.items():
        if val is not None:
            values.setdefault(sec, {})[key] = val
    if ns.continuation is not None:
        values.setdefault("regularization", {})["continuation"] = parse_continuation(ns.continuation)
    return values


def execute(cfg: RunConfig) -> tuple[int, dict]:
    spec = cfg.spec
    try:
        setup, state, reference = build(spec)
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from exc
    out = cfg.out_dir
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    observers = []
    if out is not None and cfg.snapshot_every > 0:
        observers.append(
            lambda t, s, _st: write_snapshot(out / f"snapshot_t{t:.6e}.csv", s, setup)
        )
    summary = {"config": config_echo(cfg)}
    code = EXIT_OK
    try:
        final, run = run_simulation(
            state, spec.t_final, setup, NewtonConfig(dt=spec.dt),
            observers=observers, stride=max(cfg.snapshot_every, 1),
        )
        summary["status"] = "ok"
    except SimulationAborted as exc:
        final, run = exc.state, exc.stats
        summary["status"] = "failed"
        summary["error"] = str(exc)
        code = EXIT_SOLVER
    report = error_norms(final, reference, setup, run)
    summary.update(report.to_dict())
    summary.pop("extra", None)
    summary.update(
        time=final.time,
        steps=run.n_steps,
        newton_iters=run.total_newton_iters,
        unconverged_steps=run.n_unconverged,
        max_iter_hits=run.max_iter_hits,
    )
    if out is not None:
        if not observers or code != EXIT_OK:
            write_snapshot(out / f"snapshot_t{final.time:.6e}.csv", final, setup)
        write_summary(out / "summary.json", summary)
    return code, summary


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        cfg = resolve(_merge(ns))
    except UnknownBenchmarkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_BENCHMARK
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        code, summary = execute(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if code != EXIT_OK:
        print(f"error: {summary.get('error')}", file=sys.stderr)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return code


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
