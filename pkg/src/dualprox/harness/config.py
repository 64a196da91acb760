"""Run configuration and its flat ``key = value`` file format."""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional

ALGORITHMS = ("sync", "fista", "async", "ucdc")
STEP_MODES = ("safe", "reproduction")
TIMER_MODES = ("uniform_pick", "event_queue")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    n: int = 15
    d: int = 2
    graph_p: float = 0.2
    seed: int = 0
    algorithm: str = "async"
    iterations: int = 5000
    step_mode: str = "safe"
    alpha_override: Optional[float] = None
    m_halfspaces: int = 1
    output_dir: str = "out"
    tolerance: float = 1e-10
    node: int = 5
    timer_mode: str = "uniform_pick"
    record_every: int = 1
    wall_clock: bool = False

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ConfigError("n and d must be positive")
        if self.n >= 2 and not 0 < self.graph_p <= 1:
            raise ConfigError(f"graph_p must lie in (0, 1], got {self.graph_p}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.step_mode not in STEP_MODES:
            raise ConfigError(f"step_mode must be one of {STEP_MODES}, got {self.step_mode!r}")
        if self.timer_mode not in TIMER_MODES:
            raise ConfigError(f"timer_mode must be one of {TIMER_MODES}, got {self.timer_mode!r}")
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if self.tolerance <= 0:
            raise ConfigError("tolerance must be positive")
        if self.m_halfspaces < 0:
            raise ConfigError("m_halfspaces must be >= 0")
        if self.record_every < 1:
            raise ConfigError("record_every must be >= 1")
        if not 1 <= self.node <= self.n:
            raise ConfigError(f"node must lie in 1..{self.n}, got {self.node}")
        if self.alpha_override is not None:
            if self.step_mode != "reproduction":
                raise ConfigError("alpha_override is only honored with step_mode = reproduction")
            if self.alpha_override <= 0:
                raise ConfigError("alpha_override must be positive")

    def with_updates(self, **kw):
        try:
            return replace(self, **kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_text(self) -> str:
        lines = []
        for k, v in asdict(self).items():
            lines.append(f"{k} = {'' if v is None else v}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


# reference set-up: ER(15, 0.2), d = 2, one halfspace per node, alpha_i = 1.
SEC5_PRESET = dict(
    n=15,
    d=2,
    graph_p=0.2,
    algorithm="async",
    iterations=5000,
    step_mode="reproduction",
    alpha_override=1.0,
    m_halfspaces=1,
    node=5,
)

_ALIASES = {"alpha": "alpha_override", "iters": "iterations", "p": "graph_p", "m": "m_halfspaces", "out": "output_dir"}


def _convert(name, raw):
    types = {f.name: f.type for f in fields(RunConfig)}
    kind = types[name]
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "Optional[float]":
            return None if raw in ("", "none", "None") else float(raw)
        if kind == "bool":
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment. Returns overrides only."""
    names = {f.name for f in fields(RunConfig)}
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in names:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = _convert(key, val)
    return out


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config_text(text)


def build_config(*layers: dict) -> RunConfig:
    merged = {}
    for layer in layers:
        merged.update({k: v for k, v in layer.items() if v is not None})
    try:
        return RunConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
