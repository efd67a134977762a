"""Pipeline configuration: flat key=value file, env seed override, flag overrides.

Precedence, lowest to highest: built-in defaults, the config file, the
``HSIF_SEED`` environment variable (seed only), then command-line flags.
The resolved configuration has a stable content hash that every artifact
embeds, so any output can be traced back to the exact settings that made it.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields as dataclass_fields
from pathlib import Path

from .errors import ConfigError

SCALING_MODES = ("train-fit", "paper-literal")


@dataclass(frozen=True)
class PipelineConfig:
    # inputs / outputs
    ohlcv_csv: str = ""
    tweets_csv: str = ""
    scored_csv: str = ""
    out_dir: str = "runs"
    catalog: str = ""  # empty -> bundled default catalog
    # dataset assembly
    window_length: int = 21
    train_ratio: float = 0.70
    val_ratio: float = 0.15
    test_ratio: float = 0.15
    correlation_threshold: float = 0.95
    scaling_mode: str = "train-fit"
    # network hyperparameters
    hidden_size: int = 64
    num_layers: int = 2
    bidirectional: bool = True
    dropout: float = 0.20
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 16
    max_epochs: int = 200
    patience: int = 20
    min_delta: float = 1e-4
    shuffle: bool = False
    # run control
    seed: int = 0
    commission_rate: float = 0.001
    initial_capital: float = 100_000.0

    def __post_init__(self) -> None:
        if self.window_length < 1:
            raise ConfigError(f"field window_length: must be >= 1, got {self.window_length}")
        ratios = (self.train_ratio, self.val_ratio, self.test_ratio)
        if min(ratios) <= 0:
            raise ConfigError(f"field train_ratio/val_ratio/test_ratio: must be positive, got {ratios}")
        if abs(sum(ratios) - 1.0) > 1e-9:
            raise ConfigError(f"field train_ratio/val_ratio/test_ratio: must sum to 1, got {ratios}")
        if not (0.0 < self.correlation_threshold < 1.0):
            raise ConfigError(
                f"field correlation_threshold: must be in (0, 1), got {self.correlation_threshold}"
            )
        if self.scaling_mode not in SCALING_MODES:
            raise ConfigError(
                f"field scaling_mode: expected one of {SCALING_MODES}, got {self.scaling_mode!r}"
            )
        if not (0.0 <= self.dropout < 1.0):
            raise ConfigError(f"field dropout: must be in [0, 1), got {self.dropout}")
        for name in ("hidden_size", "num_layers", "batch_size", "max_epochs", "patience"):
            if getattr(self, name) < 1:
                raise ConfigError(f"field {name}: must be >= 1, got {getattr(self, name)}")
        for name in ("learning_rate", "min_delta", "eps"):
            if getattr(self, name) < 0:
                raise ConfigError(f"field {name}: must be >= 0, got {getattr(self, name)}")
        if not (0.0 <= self.commission_rate < 1.0):
            raise ConfigError(
                f"field commission_rate: must be in [0, 1), got {self.commission_rate}"
            )
        if self.initial_capital <= 0:
            raise ConfigError(
                f"field initial_capital: must be positive, got {self.initial_capital}"
            )

    def canonical_text(self) -> str:
        """Stable key=value dump of the semantic settings, for hashing.

        File-location fields are excluded on purpose: artifacts name their
        inputs by content hash, so two runs over identical data produce
        identical artifacts no matter where the files or output live.
        """
        lines = []
        for f in sorted(dataclass_fields(self), key=lambda f: f.name):
            if f.name in _PATH_FIELDS:
                continue
            lines.append(f"{f.name}={format_value(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    def content_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode("utf-8")).hexdigest()


_PATH_FIELDS = frozenset({"ohlcv_csv", "tweets_csv", "scored_csv", "out_dir", "catalog"})


_FIELD_TYPES = {f.name: f.type for f in dataclass_fields(PipelineConfig)}
FIELD_NAMES = tuple(_FIELD_TYPES)


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_value(name: str, raw: str):
    """Convert one raw string to the field's type, with a field-path error."""
    if name not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {name!r}")
    kind = _FIELD_TYPES[name]
    raw = raw.strip()
    try:
        if kind == "bool":
            lowered = raw.lower()
            if lowered in ("true", "1", "yes", "on"):
                return True
            if lowered in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"field {name}: {exc}") from None


def parse_config_file(text: str, source: str = "config") -> dict:
    """Flat KEY=VALUE lines; blank lines and # comments ignored."""
    values: dict = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source} line {line_no}: expected KEY=VALUE, got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key in values:
            raise ConfigError(f"{source} line {line_no}: duplicate key {key!r}")
        values[key] = parse_value(key, raw)
    return values


def resolve_config(
    config_path: str | Path | None = None,
    env: dict | None = None,
    overrides: dict | None = None,
) -> PipelineConfig:
    """Merge defaults < file < HSIF_SEED < overrides into a validated config."""
    values: dict = {}
    if config_path:
        path = Path(config_path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        values.update(parse_config_file(path.read_text(encoding="utf-8"), source=str(path)))
    env = env or {}
    if "HSIF_SEED" in env:
        values["seed"] = parse_value("seed", env["HSIF_SEED"])
    for key, value in (overrides or {}).items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        if value is not None:
            values[key] = value
    return PipelineConfig(**values)
