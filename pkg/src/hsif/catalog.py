"""Hard-feature catalogs: which indicators, with which windows.

A catalog is a text file of ``KIND(param,...)`` entries (``#`` comments, one
entry per line). :func:`compute_catalog` evaluates every entry over a candle
series and returns a FeatureFrame of the five raw OHLCV columns followed by
one column per entry, named ``KIND_param1_param2`` (bare ``KIND`` when the
entry takes no parameters).
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import indicators as ind
from .errors import CatalogError, HsifError
from .frame import FeatureFrame
from .marketdata import CandleSeries

DEFAULT_CATALOG_VERSION = "default-53-v1"

RAW_COLUMNS = ("O", "H", "L", "C", "VOL")

# kind -> number of integer parameters
_ARITY = {
    "MA": 1, "EMA": 1, "ROC": 1, "MOM": 1, "RSI": 1, "STOK": 1, "STOD": 1,
    "TR1": 0, "TR2": 0, "TR3": 0, "TR": 0, "ATR": 1,
    "PLUS_DI": 1, "MINUS_DI": 1, "DX": 1, "ADX": 1, "MDI": 1, "PDI": 1,
    "AROON_UP": 1, "AROON_DOWN": 1, "BOP": 0,
    "PPO": 2, "CMO": 1, "MFI": 1,
    "MACD": 2, "MACD_SIGNAL": 1, "MACD_HIST": 1,
    "CCI": 1, "LB": 1, "MB": 1, "UB": 1, "FI": 1, "EOM": 1,
}

_ENTRY_RE = re.compile(r"^([A-Z][A-Z0-9_]*)(?:\(([0-9,\s]*)\))?$")


@dataclass(frozen=True)
class CatalogEntry:
    kind: str
    params: tuple[int, ...]

    @property
    def column_name(self) -> str:
        if not self.params:
            return self.kind
        return self.kind + "_" + "_".join(str(p) for p in self.params)

    def __str__(self) -> str:
        if not self.params:
            return self.kind
        return f"{self.kind}({','.join(str(p) for p in self.params)})"


@dataclass(frozen=True)
class IndicatorCatalog:
    entries: tuple[CatalogEntry, ...]
    version: str = "custom"

    def __post_init__(self) -> None:
        if not self.entries:
            raise CatalogError("empty catalog")
        seen: set[str] = set()
        for entry in self.entries:
            if entry.kind not in _ARITY:
                raise CatalogError(f"unknown indicator kind {entry.kind!r}")
            if len(entry.params) != _ARITY[entry.kind]:
                raise CatalogError(
                    f"{entry}: {entry.kind} takes {_ARITY[entry.kind]} parameter(s), "
                    f"got {len(entry.params)}"
                )
            if any(p <= 0 for p in entry.params):
                raise CatalogError(f"{entry}: parameters must be positive integers")
            key = str(entry)
            if key in seen:
                raise CatalogError(f"duplicate catalog entry {key}")
            seen.add(key)

    def to_text(self) -> str:
        """Canonical one-entry-per-line form (comments dropped); hash input."""
        return "\n".join(str(e) for e in self.entries) + "\n"

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(e.column_name for e in self.entries)

    @classmethod
    def from_text(cls, text: str, version: str = "custom") -> "IndicatorCatalog":
        entries: list[CatalogEntry] = []
        for line_no, raw_line in enumerate(text.splitlines(), start=1):
            line = raw_line.split("#", 1)[0].strip()
            if not line:
                continue
            match = _ENTRY_RE.match(line)
            if not match:
                raise CatalogError(f"line {line_no}: malformed catalog entry {line!r}")
            kind, params_text = match.group(1), match.group(2)
            if params_text is None:
                params: tuple[int, ...] = ()
            else:
                parts = [p.strip() for p in params_text.split(",") if p.strip()]
                params = tuple(int(p) for p in parts)
            entries.append(CatalogEntry(kind, params))
        return cls(tuple(entries), version=version)

    @classmethod
    def default(cls) -> "IndicatorCatalog":
        text = (
            resources.files("hsif.data")
            .joinpath("default_catalog.txt")
            .read_text(encoding="utf-8")
        )
        return cls.from_text(text, version=DEFAULT_CATALOG_VERSION)


def _entry_values(series: CandleSeries, entry: CatalogEntry) -> np.ndarray:
    kind, params = entry.kind, entry.params
    close = series.column("close")
    if kind == "MA":
        return ind.sma(close, params[0]).values
    if kind == "EMA":
        return ind.ema(close, params[0]).values
    if kind == "ROC":
        return ind.roc(close, params[0]).values
    if kind == "MOM":
        return ind.mom(close, params[0]).values
    if kind == "RSI":
        return ind.rsi(close, params[0]).values
    if kind == "STOK":
        return ind.stochastic(series, params[0], 1).k.values
    if kind == "STOD":
        return ind.stochastic(series, params[0], params[0]).d.values
    if kind in ("TR1", "TR2", "TR3", "TR"):
        result = ind.true_range_atr(series, 1)
        return getattr(result, kind.lower()).values
    if kind == "ATR":
        return ind.true_range_atr(series, params[0]).atr.values
    if kind in ("PLUS_DI", "MINUS_DI", "DX", "ADX"):
        result = ind.directional_system(series, params[0])
        field = {"PLUS_DI": "plus_di", "MINUS_DI": "minus_di", "DX": "dx", "ADX": "adx"}
        return getattr(result, field[kind]).values
    if kind in ("MDI", "PDI"):
        result = ind.conditional_dm(series, params[0])
        return (result.mdi if kind == "MDI" else result.pdi).values
    if kind in ("AROON_UP", "AROON_DOWN"):
        result = ind.aroon(series, params[0])
        return (result.up if kind == "AROON_UP" else result.down).values
    if kind == "BOP":
        return ind.bop(series).values
    if kind == "PPO":
        return ind.ppo(close, params[0], params[1]).values
    if kind == "CMO":
        return ind.cmo(close, params[0]).values
    if kind == "MFI":
        return ind.mfi(series, params[0]).values
    if kind in ("MACD", "MACD_SIGNAL", "MACD_HIST"):
        if kind == "MACD":
            result = ind.macd(close, params[0], params[1], 1)
            return result.macd.values
        result = ind.macd(close, 12, 26, params[0])
        return (result.signal if kind == "MACD_SIGNAL" else result.hist).values
    if kind == "CCI":
        return ind.cci(series, params[0]).values
    if kind in ("LB", "MB", "UB"):
        result = ind.bollinger(close, params[0], 2.0)
        field = {"LB": "lower", "MB": "middle", "UB": "upper"}[kind]
        return getattr(result, field).values
    if kind == "FI":
        return ind.force_index(series, params[0]).values
    if kind == "EOM":
        return ind.eom(series, params[0]).values
    raise CatalogError(f"unknown indicator kind {kind!r}")  # unreachable


def compute_catalog(series: CandleSeries, catalog: IndicatorCatalog) -> FeatureFrame:
    """Evaluate a catalog into a FeatureFrame: raw OHLCV columns, then entries."""
    columns: dict[str, np.ndarray] = {
        "O": np.asarray(series.column("open")),
        "H": np.asarray(series.column("high")),
        "L": np.asarray(series.column("low")),
        "C": np.asarray(series.column("close")),
        "VOL": np.asarray(series.column("volume")),
    }
    for entry in catalog.entries:
        try:
            columns[entry.column_name] = _entry_values(series, entry)
        except HsifError as exc:
            raise CatalogError(f"catalog entry {entry}: {exc}") from exc
    return FeatureFrame(series.dates, columns)
