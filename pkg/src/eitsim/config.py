"""Flat ``key = value`` run configuration.

Lines are ``key = value``; ``#`` starts a comment.  Keys are the
:class:`~eitsim.model.ModelParams` fields plus the run options below.
A JSON run manifest written by the CLI is accepted as well and reproduces
the recorded run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import ModelParams, ParameterError

REQUIRED = (
    "n_atoms", "g13", "g24", "omega",
    "gamma31", "gamma32", "gamma4", "delta", "big_delta", "eps_p",
)
OPTIONAL_PARAMS = ("kappa", "n_max")
INT_KEYS = ("n_atoms", "n_max", "tau_steps")
OPTION_KEYS = ("grid", "out", "tau_max", "tau_steps")
KNOWN = REQUIRED + OPTIONAL_PARAMS + OPTION_KEYS


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    options: dict = field(default_factory=dict)
    source: str | None = None

    def flat(self) -> dict:
        """Key/value echo that :func:`parse_mapping` turns back into this config."""
        out = {k: v for k, v in self.params.to_dict().items() if v is not None}
        out.update(self.options)
        return out

    def grid(self) -> np.ndarray | None:
        spec = self.options.get("grid")
        return None if spec is None else parse_grid(spec)


def parse_grid(spec: str) -> np.ndarray:
    """``lo:hi:steps`` into an inclusive uniform grid."""
    parts = str(spec).split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be lo:hi:steps, got {spec!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"grid must be lo:hi:steps, got {spec!r}") from exc
    if steps < 1 or (steps > 1 and not hi > lo):
        raise ConfigError(f"grid needs steps >= 1 and hi > lo, got {spec!r}")
    return np.linspace(lo, hi, steps)


def _convert(key: str, raw, where: str):
    if key in ("grid", "out"):
        value = str(raw)
        if key == "grid":
            parse_grid(value)
        return value
    try:
        if key in INT_KEYS:
            if isinstance(raw, float) and not raw.is_integer():
                raise ValueError
            return int(raw) if not isinstance(raw, str) else int(raw.strip())
        return float(raw)
    except (TypeError, ValueError):
        kind = "integer" if key in INT_KEYS else "decimal number"
        raise ConfigError(f"{where}: {key} must be a {kind}, got {raw!r}") from None


def parse_mapping(values: dict, source: str = "<mapping>") -> RunConfig:
    unknown = sorted(set(values) - set(KNOWN))
    if unknown:
        raise ConfigError(f"{source}: unknown key(s): {', '.join(unknown)}")
    missing = [k for k in REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"{source}: missing required key(s): {', '.join(missing)}")
    converted = {k: _convert(k, v, source) for k, v in values.items()}
    params = {k: v for k, v in converted.items() if k in REQUIRED + OPTIONAL_PARAMS}
    options = {k: v for k, v in converted.items() if k in OPTION_KEYS}
    try:
        return RunConfig(ModelParams(**params), options, source)
    except ParameterError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def parse_text(text: str, source: str = "<text>") -> RunConfig:
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, value = (s.strip() for s in body.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{source}:{lineno}: empty key or value")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        if key not in KNOWN:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            _convert(key, value, f"{source}:{lineno}")
        except ConfigError:
            raise
        values[key] = value
    return parse_mapping(values, source)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if path.suffix == ".json":
        try:
            manifest = json.loads(text)
            values = manifest["config"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"{path}: not a run manifest ({exc})") from exc
        return parse_mapping(values, str(path))
    return parse_text(text, str(path))


def format_config(cfg: RunConfig) -> str:
    return "".join(f"{k} = {v!r}\n" if isinstance(v, float) else f"{k} = {v}\n" for k, v in cfg.flat().items())
