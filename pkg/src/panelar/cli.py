"""Command-line entry point.

Configuration is a YAML mapping. Each command has a defaults tree; the
config file and ``--set key.path=value`` overrides are merged into it and
may only name keys that exist in that tree. The fully resolved tree,
including the master seed, is embedded in every report.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
error, 5 I/O error.
"""

from __future__ import annotations

import argparse
import copy
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from . import asymptotics, inference, montecarlo, report
from .core import RegimeSpec
from .errors import (
    ConfigError,
    ConfigParse,
    DataError,
    IoFailure,
    NumericalError,
    UnknownKey,
)
from .simulate import InnovationSpec, ingest_panel, simulate_panel

log = logging.getLogger("panelar")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4
EXIT_IO = 5

COMMANDS = ("simulate", "mc", "berry_esseen", "variance_curve", "infer", "wiener")

_REGIME = {"kind": "unit_root", "rho": None, "c": None, "kt_exponent": None}
_INNOV = {"family": "standard_normal", "df": None}

DEFAULTS: dict[str, dict] = {
    "simulate": {
        "regime": _REGIME,
        "innovations": _INNOV,
        "n": 10,
        "t_len": 100,
        "keep_innovations": True,
        "emit": ["json", "csv_panel"],
    },
    "mc": {
        "regime": _REGIME,
        "innovations": _INNOV,
        "n": 200,
        "t_len": 100,
        "replications": 2000,
        "standardization": "asymptotic",
        "statistic": "scaled",
        "emit": ["json"],
    },
    "berry_esseen": {
        "regime": _REGIME,
        "innovations": _INNOV,
        "t_len": 100,
        "replications": 5000,
        "n_grid": [25, 50, 100, 200, 400],
        "emit": ["json", "csv_curve"],
    },
    "variance_curve": {
        "regime": {"kind": "local_to_unity", "rho": None, "c": 1.0, "kt_exponent": None},
        "innovations": _INNOV,
        "t_grid": [50, 200, 800],
        "n": 200,
        "replications": 2000,
        "emit": ["json", "csv_curve"],
    },
    "infer": {
        "input": {"path": None, "format": "long_csv"},
        "regime": _REGIME,
        "level": 0.95,
        "alternative": "two_sided",
        "all_regimes": False,
        "emit": ["json"],
    },
    "wiener": {
        "functional": "unit_root",
        "c": None,
        "grid_steps": 10_000,
        "replications": 10_000,
        "emit": ["json"],
    },
}
_COMMON = {"command": None, "seed": None, "out": None, "workers": None}


@dataclass
class RunConfig:
    command: str
    parameters: dict
    output_path: Path
    emit: list[str]
    seed: int

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "seed": self.seed,
            "out": str(self.output_path),
            "emit": list(self.emit),
            **self.parameters,
        }


def _normalize_command(name: str) -> str:
    cmd = str(name).strip().lower().replace("-", "_")
    if cmd not in COMMANDS:
        raise ConfigError(f"unknown command {name!r}; choose from {COMMANDS}")
    return cmd


def _merge(base: dict, update: dict, prefix: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in update.items():
        path = f"{prefix}{key}"
        if key not in out:
            raise UnknownKey(f"unknown configuration key {path!r}")
        if isinstance(out[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{path!r} must be a mapping")
            out[key] = _merge(out[key], value, path + ".")
        else:
            out[key] = value
    return out


def _set_path(tree: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = tree
    for i, part in enumerate(parts):
        if not isinstance(node, dict) or part not in node:
            raise UnknownKey(f"unknown configuration key {dotted!r}")
        if i == len(parts) - 1:
            if isinstance(node[part], dict):
                raise ConfigError(f"{dotted!r} is a section, set its fields instead")
            node[part] = value
        else:
            node = node[part]


def parse_override(text: str) -> tuple[str, object]:
    key, sep, raw = text.partition("=")
    if not sep or not key.strip():
        raise ConfigParse(f"override must look like key=value, got {text!r}")
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as exc:
        raise ConfigParse(f"cannot parse value in {text!r}: {exc}") from None
    return key.strip(), value


def load_config_file(path: str | Path | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParse(f"cannot read config {path}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigParse(f"invalid YAML in {path}: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigParse(f"config {path} must be a mapping at top level")
    return data


def _fresh_seed() -> int:
    return int(np.random.SeedSequence().generate_state(1, np.uint64)[0])


def resolve_config(
    config_path: str | Path | None = None,
    overrides: Sequence[str] = (),
    *,
    command: str | None = None,
    out: str | Path | None = None,
    emit: Sequence[str] | None = None,
    seed: int | None = None,
) -> RunConfig:
    raw = load_config_file(config_path)
    cmd = command or raw.get("command")
    parsed = [parse_override(o) for o in overrides]
    for key, value in parsed:
        if key == "command" and cmd is None:
            cmd = value
    if cmd is None:
        raise ConfigError("no command given (positional argument or 'command' key)")
    cmd = _normalize_command(cmd)
    if raw.get("command") is not None and _normalize_command(raw["command"]) != cmd:
        raise ConfigError(f"config is for {raw['command']!r}, invoked as {cmd!r}")

    tree = _merge({**_COMMON, **DEFAULTS[cmd]}, raw)
    for key, value in parsed:
        _set_path(tree, key, value)
    tree["command"] = cmd
    if out is not None:
        tree["out"] = str(out)
    if emit is not None:
        tree["emit"] = list(emit)
    if seed is not None:
        tree["seed"] = seed
    if tree["seed"] is None:
        tree["seed"] = _fresh_seed()
    try:
        tree["seed"] = int(tree["seed"])
    except (TypeError, ValueError):
        raise ConfigError(f"seed must be an integer, got {tree['seed']!r}") from None
    if not 0 <= tree["seed"] < 2**64:
        raise ConfigError("seed must fit in an unsigned 64-bit integer")
    if tree["out"] is None:
        tree["out"] = f"{cmd}.json"
    emit_list = tree.pop("emit")
    if isinstance(emit_list, str):
        emit_list = [e.strip() for e in emit_list.split(",") if e.strip()]
    allowed = set(report.FORMATS) | ({"csv_panel"} if cmd == "simulate" else set())
    bad = [e for e in emit_list if e not in allowed]
    if bad:
        raise ConfigError(f"unsupported emit formats for {cmd}: {bad}")
    params = {k: v for k, v in tree.items() if k not in ("command", "seed", "out")}
    return RunConfig(cmd, params, Path(tree["out"]), list(emit_list), tree["seed"])


def _regime(d: dict) -> RegimeSpec:
    return RegimeSpec.from_dict({k: v for k, v in d.items() if v is not None})


def _innov(d: dict) -> InnovationSpec:
    return InnovationSpec.from_dict({k: v for k, v in d.items() if v is not None})


def _workers(params: dict) -> int | None:
    w = params.get("workers")
    return None if w is None else int(w)


def _prepare(rc: RunConfig):
    """Validate everything and return a zero-argument job producing the report."""
    p = rc.parameters
    cmd = rc.command
    if cmd == "mc":
        cfg = montecarlo.McConfig(
            regime=_regime(p["regime"]),
            innovations=_innov(p["innovations"]),
            n=p["n"],
            t_len=p["t_len"],
            replications=p["replications"],
            seed=rc.seed,
            standardization=p["standardization"],
            statistic=p["statistic"],
        )
        return lambda: montecarlo.run_replications(cfg, _workers(p))
    if cmd == "berry_esseen":
        cfg = montecarlo.McConfig(
            regime=_regime(p["regime"]),
            innovations=_innov(p["innovations"]),
            n=1,
            t_len=p["t_len"],
            replications=p["replications"],
            seed=rc.seed,
        )
        grid = list(p["n_grid"])
        if len(grid) < 4 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError(f"n_grid must hold >= 4 increasing values, got {grid}")
        return lambda: montecarlo.berry_esseen_curve(cfg, grid, _workers(p))
    if cmd == "variance_curve":
        spec, innov = _regime(p["regime"]), _innov(p["innovations"])
        grid = list(p["t_grid"])
        if len(grid) < 3 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError(f"t_grid must hold >= 3 increasing values, got {grid}")
        for t in grid:
            montecarlo.McConfig(spec, innov, p["n"], t, p["replications"], rc.seed)
        return lambda: montecarlo.variance_convergence(
            spec, innov, grid, p["n"], p["replications"], rc.seed, _workers(p)
        )
    if cmd == "simulate":
        spec, innov = _regime(p["regime"]), _innov(p["innovations"])
        montecarlo.McConfig(spec, innov, p["n"], p["t_len"], 1, rc.seed)
        return lambda: simulate_panel(
            spec, innov, p["n"], p["t_len"], rc.seed, bool(p["keep_innovations"])
        )
    if cmd == "infer":
        path = p["input"]["path"]
        if path is None:
            raise ConfigError("infer needs input.path")
        fmt = p["input"]["format"]
        kind = p["regime"]["kind"]
        params = {k: p["regime"][k] for k in ("c", "kt_exponent") if p["regime"][k] is not None}
        if p["alternative"] not in inference.ALTERNATIVES:
            raise ConfigError(f"alternative must be one of {inference.ALTERNATIVES}")

        def job():
            panel = ingest_panel(path, fmt)
            if p["all_regimes"]:
                res = inference.all_regime_intervals(panel, p["level"], params)
                return {
                    "conditional_on_declared_regime": True,
                    "warnings": list(panel.warnings),
                    "intervals": {
                        k: v.to_dict() if hasattr(v, "to_dict") else v
                        for k, v in res.items()
                    },
                }
            if kind == "unit_root":
                return inference.unit_root_test(panel, p["alternative"], p["level"])
            return inference.confidence_interval(panel, kind, p["level"], params)

        return job
    if cmd == "wiener":
        fn = p["functional"]
        gs, R = p["grid_steps"], p["replications"]
        if fn == "unit_root":
            sampler = lambda: asymptotics.sample_unit_root_functionals(gs, R, rc.seed)
            asymptotics._check_sampler_args(gs, R)
        elif fn == "local_to_unity":
            if p["c"] is None or p["c"] == 0:
                raise ConfigError("local_to_unity functional needs c != 0")
            asymptotics._check_sampler_args(gs, R)
            sampler = lambda: asymptotics.sample_local_to_unity_functionals(
                p["c"], gs, R, rc.seed
            )
        elif fn == "mildly_explosive":
            if p["c"] is None or not p["c"] < 0:
                raise ConfigError("mildly_explosive functional needs c < 0")
            sampler = lambda: asymptotics.mildly_explosive_limit_sample(p["c"], R, rc.seed)
        else:
            raise ConfigError(f"unknown functional {fn!r}")

        def job():
            draws = sampler()
            mean = draws.mean(axis=0)
            var = draws.var(axis=0, ddof=1)
            return {
                "functional": fn,
                "replications": int(draws.shape[0]),
                "mean": mean.tolist(),
                "variance": var.tolist(),
                "mc_standard_error_of_mean": np.sqrt(var / draws.shape[0]).tolist(),
            }

        return job
    raise ConfigError(f"unknown command {cmd!r}")  # pragma: no cover


def _panel_csv(panel) -> str:
    rows = (
        (i + 1, t, float(panel.y[i, t]))
        for i in range(panel.n)
        for t in range(panel.t_len + 1)
    )
    return report._csv(["i", "t", "y"], rows)


def _emit_simulation(panel, rc: RunConfig) -> list[Path]:
    meta = {
        "n": panel.n,
        "t_len": panel.t_len,
        "rho_used": panel.rho_used,
        "seed": panel.seed,
        "regime": panel.regime.to_dict(),
        "innovations": panel.innovations.to_dict(),
    }
    rendered = []
    for fmt in rc.emit:
        if fmt == "json":
            rendered.append((rc.output_path, report.to_json(meta, rc.to_dict())))
        elif fmt == "csv_panel":
            rendered.append((report.side_path(rc.output_path, fmt), _panel_csv(panel)))
        else:
            raise ConfigError(f"simulate cannot emit {fmt}")
    return [report.atomic_write_text(path, text) for path, text in rendered]


def execute(rc: RunConfig) -> list[Path]:
    job = _prepare(rc)
    log.info("resolved config: %s", rc.to_dict())
    result = job()
    if rc.command == "simulate":
        return _emit_simulation(result, rc)
    return report.emit_report(result, rc.emit, rc.output_path, rc.to_dict())


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, DataError):
        return EXIT_DATA
    if isinstance(exc, (NumericalError, ArithmeticError)):
        return EXIT_NUMERICAL
    if isinstance(exc, (IoFailure, OSError)):
        return EXIT_IO
    return 1


def run(
    config_path: str | Path | None = None,
    overrides: Sequence[str] = (),
    **kwargs,
) -> int:
    """Resolve the configuration, execute the command and write its outputs.

    Returns a process exit status instead of raising.
    """
    try:
        rc = resolve_config(config_path, overrides, **kwargs)
        for path in execute(rc):
            log.info("wrote %s", path)
    except Exception as exc:  # mapped to exit codes
        code = _exit_code(exc)
        if code == 1:
            raise
        log.error("%s: %s", type(exc).__name__, exc)
        return code
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="panelar",
        description="Panel AR(1) simulation, limit-law verification and inference.",
    )
    parser.add_argument(
        "command",
        nargs="?",
        help="one of: " + ", ".join(c.replace("_", "-") for c in COMMANDS),
    )
    parser.add_argument("--config", help="YAML configuration file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a configuration key (dotted path); repeatable",
    )
    parser.add_argument("--out", help="output JSON path")
    parser.add_argument("--emit", help="comma-separated output formats")
    parser.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    parser.add_argument("--workers", type=int, help=f"worker processes (env {montecarlo.WORKERS_ENV})")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    overrides = list(args.overrides)
    if args.workers is not None:
        overrides.append(f"workers={args.workers}")
    emit = None
    if args.emit:
        emit = [e.strip() for e in args.emit.split(",") if e.strip()]
    return run(
        args.config,
        overrides,
        command=args.command,
        out=args.out,
        emit=emit,
        seed=args.seed,
    )


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
