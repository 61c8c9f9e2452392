"""INI run configuration.

Example::

    [benchmark]
    name = dam-break
    n_el = 100
    orders = 1,1,1,0
    dt = 1e-5
    t_final = 0.05

    [physics]
    eta = 0.02
    sigma0 = 0.2

    [regularization]
    variant = 1
    gamma = 100
    beta = 100
    continuation = 100,3

    [output]
    dir = run1
    snapshot_every = 1000

Missing keys fall back to the benchmark defaults.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace
from pathlib import Path

from .benchmarks import BENCHMARKS, BenchmarkSpec, default_spec
from .errors import BinghamDGError, ConfigError

SECTIONS = {
    "benchmark": {"name", "n_el", "orders", "dt", "t_final"},
    "physics": {"rho", "g", "alpha", "eta", "sigma0"},
    "regularization": {"variant", "gamma", "beta", "continuation"},
    "output": {"dir", "snapshot_every"},
}


class UnknownBenchmarkError(ConfigError):
    pass


@dataclass(frozen=True)
class RunConfig:
    spec: BenchmarkSpec
    out_dir: Path | None = None
    snapshot_every: int = 0


def parse_orders(text: str) -> tuple[int, int, int, int]:
    try:
        vals = tuple(int(v) for v in str(text).split(","))
    except ValueError as exc:
        raise ConfigError(f"orders must be four integers m0,m1,m2,m3, got {text!r}") from exc
    if len(vals) != 4 or min(vals) < 0:
        raise ConfigError(f"orders must be four non-negative integers m0,m1,m2,m3, got {text!r}")
    return vals


def parse_continuation(text: str | None) -> tuple[float, int] | None:
    if text is None or str(text).strip().lower() in ("", "none", "off"):
        return None
    parts = str(text).split(",")
    try:
        g0, n = float(parts[0]), int(parts[1])
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"continuation must be gamma0,n_gamma, got {text!r}") from exc
    if len(parts) != 2:
        raise ConfigError(f"continuation must be gamma0,n_gamma, got {text!r}")
    return g0, n


def read_ini(path: str | Path) -> dict[str, dict[str, str]]:
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    out = {}
    for sec in cp.sections():
        if sec not in SECTIONS:
            raise ConfigError(f"unknown section [{sec}] in {path}")
        bad = set(cp[sec]) - SECTIONS[sec]
        if bad:
            raise ConfigError(f"unknown keys in [{sec}]: {', '.join(sorted(bad))}")
        out[sec] = dict(cp[sec])
    return out


def _num(value, kind, key):
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {value!r}") from exc


def resolve(values: dict[str, dict[str, object]]) -> RunConfig:
    """Merge sectioned values (strings or already typed) over benchmark defaults."""
    bench = values.get("benchmark", {})
    name = bench.get("name")
    if not name:
        raise ConfigError("no benchmark given (use --benchmark or [benchmark] name)")
    if name not in BENCHMARKS:
        raise UnknownBenchmarkError(f"unknown benchmark {name!r}; choose from {', '.join(BENCHMARKS)}")
    base = default_spec(name)
    phys = values.get("physics", {})
    regv = values.get("regularization", {})
    outv = values.get("output", {})
    try:
        params = replace(base.params, **{k: _num(v, float, k) for k, v in phys.items() if v is not None})
        reg_kwargs = {}
        if regv.get("variant") is not None:
            reg_kwargs["variant"] = _num(regv["variant"], int, "variant")
        for key in ("gamma", "beta"):
            if regv.get(key) is not None:
                reg_kwargs[key] = _num(regv[key], float, key)
        if "continuation" in regv:
            c = regv["continuation"]
            reg_kwargs["continuation"] = c if isinstance(c, tuple) or c is None else parse_continuation(c)
        reg = replace(base.reg, **reg_kwargs)
        orders = bench.get("orders")
        if isinstance(orders, str):
            orders = parse_orders(orders)
        spec = BenchmarkSpec(
            name,
            _num(bench.get("n_el", base.n_el), int, "n_el"),
            tuple(orders) if orders is not None else base.orders,
            _num(bench.get("dt", base.dt), float, "dt"),
            _num(bench.get("t_final", base.t_final), float, "t_final"),
            params,
            reg,
        )
    except ConfigError:
        raise
    except (BinghamDGError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    out_dir = outv.get("dir")
    every = _num(outv.get("snapshot_every", 0) or 0, int, "snapshot_every")
    if every < 0:
        raise ConfigError("snapshot_every must be >= 0")
    return RunConfig(spec, Path(out_dir) if out_dir else None, every)


def config_echo(cfg: RunConfig) -> dict:
    s = cfg.spec
    return {
        "benchmark": {"name": s.name, "n_el": s.n_el, "orders": list(s.orders), "dt": s.dt, "t_final": s.t_final},
        "physics": {k: getattr(s.params, k) for k in ("rho", "g", "alpha", "eta", "sigma0")},
        "regularization": {
            "variant": int(s.reg.variant),
            "gamma": s.reg.gamma,
            "beta": s.reg.beta,
            "continuation": list(s.reg.continuation) if s.reg.continuation else None,
        },
        "output": {"dir": str(cfg.out_dir) if cfg.out_dir else None, "snapshot_every": cfg.snapshot_every},
    }
