"""Run configuration, result records and their on-disk formats."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

SCHEMA = 1
PROFILE_HEADER = ("r", "u", "du_dr")
SWEEP_HEADER = ("param", "kappa", "flux", "residual", "converged")
GRID_PARAMS = ("Q0", "n", "kappa", "alpha", "R")


def package_version() -> str:
    from . import __version__
    return __version__


def fmt(x) -> str:
    """Shortest text that parses back to the same double (17 significant digits at most)."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return repr(x)
    s = format(x, ".17g")
    return s if float(s) == x else repr(x)


@dataclass
class RunConfig:
    command: str = "solve"
    alpha: float = 0.1
    n: int = 1
    R: float = 8.0
    Q0: float | None = None
    kappa: float | None = None
    basis: str = "sine"
    N: int = 40
    cells: int | None = None
    jobs: int = 1
    seed: int = 0
    out: str | None = None
    format: str = "csv"
    strict: bool = False
    restarts: int = 4
    max_iters: int = 5000
    grad_tol: float = 1e-8
    metric: str = "hessian"
    grid_param: str | None = None
    values: tuple = ()

    def validate(self) -> "RunConfig":
        if self.command not in ("solve", "sweep", "bounds", "crosscheck"):
            raise ConfigError(f"unknown command {self.command!r}")
        if not self.alpha > 0:
            raise ConfigError("alpha must be positive")
        if not self.R > 0:
            raise ConfigError("R must be positive")
        if self.N < 2:
            raise ConfigError("N must be at least 2")
        if self.cells is not None and self.cells < 1:
            raise ConfigError("cells must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.basis not in ("sine", "hat"):
            raise ConfigError("basis must be sine or hat")
        if self.Q0 is not None and not self.Q0 > 0:
            raise ConfigError(f"Q0 must be positive, got {self.Q0}")
        if self.command == "solve" and (self.Q0 is None) == (self.kappa is None):
            raise ConfigError("solve needs exactly one of Q0 and kappa")
        if self.command in ("bounds", "crosscheck") and self.Q0 is None:
            raise ConfigError(f"{self.command} needs Q0")
        if self.command == "sweep":
            if self.grid_param not in GRID_PARAMS:
                raise ConfigError(f"sweep needs --grid-param from {GRID_PARAMS}")
            if not self.values:
                raise ConfigError("sweep grid is empty")
            if self.grid_param not in ("Q0", "kappa") and self.Q0 is None:
                raise ConfigError("sweeps over n, alpha or R need Q0")
        return self

    def echo(self) -> dict:
        d = dataclasses.asdict(self)
        d["values"] = list(self.values)
        return d


_CONFIG_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(key: str, text: str):
    text = text.strip()
    if key in ("n", "N", "cells", "jobs", "seed", "restarts", "max_iters"):
        try:
            return int(text)
        except ValueError as exc:
            raise ConfigError(f"{key} must be an integer, got {text!r}") from exc
    if key in ("alpha", "R", "Q0", "kappa", "grad_tol"):
        try:
            return float(text)
        except ValueError as exc:
            raise ConfigError(f"{key} must be a number, got {text!r}") from exc
    if key == "strict":
        if text.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigError(f"strict must be a boolean, got {text!r}")
        return text.lower() in ("true", "1", "yes")
    if key == "values":
        return parse_values(text)
    return text


def parse_values(text: str) -> tuple:
    parts = [s for s in text.replace(",", " ").split() if s]
    try:
        return tuple(float(s) for s in parts)
    except ValueError as exc:
        raise ConfigError(f"grid values must be numbers, got {text!r}") from exc


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment, dashes in keys map to underscores."""
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "grid":
            key = "values"
        if key not in _CONFIG_TYPES or key == "command":
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


@dataclass
class ResultRecord:
    inputs: dict
    mode: str
    kappa: float
    flux: float
    action: float
    residual: float
    converged: bool
    iterations: int
    grad_norm: float
    bounds: dict
    violations: list
    wall_time: float
    seed: int
    version: str = field(default_factory=package_version)
    extras: dict = field(default_factory=dict)
    schema: int = SCHEMA

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ResultRecord":
        if d.get("schema") != SCHEMA:
            raise ConfigError(f"unsupported record schema {d.get('schema')!r}")
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        return cls.from_dict(json.loads(text))

    @property
    def bounds_ok(self) -> bool:
        return not any(not v["advisory"] for v in self.violations)


def profile_csv(r, u, du) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PROFILE_HEADER)
    for row in zip(r, u, du):
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def table_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(row[h]) if not isinstance(row[h], str) else row[h] for h in header])
    return buf.getvalue()


def read_table_csv(text: str) -> list[dict]:
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for row in rows:
        out.append({k: (v == "true" if v in ("true", "false") else float(v)) for k, v in row.items()})
    return out
