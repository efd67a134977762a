"""Technical indicator operations over daily candles.

Every operation returns one or more :class:`IndicatorSeries` aligned with the
input: a NaN prefix marks the warmup region, and once a value appears at
index t the series is defined for every later index. Rolling statistics use
plain arithmetic means throughout (no exponential smoothing except where the
indicator is defined by an EMA).

Division-by-zero conventions (applied wherever a formula's denominator can
vanish): RSI -> 100 when the average loss is 0 (50 when both averages are 0);
%K -> 50 on a flat window; BOP -> 0 when high = low; CMO -> 0 when no closes
moved; CCI -> 0 when the mean deviation is 0; DI/DX/ADX -> 0 when ATR or the
DI sum is 0; MFI -> 100 when only positive flow exists, 50 when no flow;
EOM -> 0 when high = low or the box ratio is 0. Each is the neutral/limit
value and keeps outputs finite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import HsifError, WindowError
from .marketdata import CandleSeries

#: Divisor applied to volume inside the Ease of Movement box ratio.
EOM_SCALE = 1e-10


@dataclass(frozen=True)
class IndicatorSeries:
    """A named per-day value series; NaN marks the undefined warmup prefix."""

    name: str
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        defined = ~np.isnan(values)
        if defined.any():
            first = int(np.argmax(defined))
            if not defined[first:].all():
                raise HsifError(f"{self.name}: defined values are not contiguous")
            if not np.isfinite(values[first:]).all():
                raise HsifError(f"{self.name}: non-finite value in defined region")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def first_defined(self) -> int | None:
        defined = ~np.isnan(self.values)
        if not defined.any():
            return None
        return int(np.argmax(defined))


class StochasticResult(NamedTuple):
    k: IndicatorSeries
    d: IndicatorSeries


class TrueRangeResult(NamedTuple):
    tr1: IndicatorSeries
    tr2: IndicatorSeries
    tr3: IndicatorSeries
    tr: IndicatorSeries
    atr: IndicatorSeries


class DirectionalResult(NamedTuple):
    plus_di: IndicatorSeries
    minus_di: IndicatorSeries
    dx: IndicatorSeries
    adx: IndicatorSeries


class ConditionalDmResult(NamedTuple):
    mdi: IndicatorSeries
    pdi: IndicatorSeries


class AroonResult(NamedTuple):
    up: IndicatorSeries
    down: IndicatorSeries


class MacdResult(NamedTuple):
    macd: IndicatorSeries
    signal: IndicatorSeries
    hist: IndicatorSeries


class BollingerResult(NamedTuple):
    lower: IndicatorSeries
    middle: IndicatorSeries
    upper: IndicatorSeries


def _as_close(close: Sequence[float] | np.ndarray) -> np.ndarray:
    arr = np.asarray(close, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise WindowError("close must be a non-empty 1-D sequence")
    if not np.isfinite(arr).all():
        raise WindowError("close contains non-finite values")
    return arr


def _check_window(n: int, length: int, label: str = "n") -> None:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise WindowError(f"{label} must be an integer, got {n!r}")
    if n <= 0:
        raise WindowError(f"{label} must be positive, got {n}")
    if n > length:
        raise WindowError(f"{label}={n} exceeds series length {length}")


def _nan(length: int) -> np.ndarray:
    return np.full(length, np.nan, dtype=np.float64)


def _rolling_mean(x: np.ndarray, n: int, start: int = 0) -> np.ndarray:
    """Mean over trailing n-windows of x[start:]; NaN before index start+n-1."""
    out = _nan(len(x))
    region = x[start:]
    if len(region) >= n:
        out[start + n - 1 :] = sliding_window_view(region, n).mean(axis=1)
    return out


def _rolling_sum(x: np.ndarray, n: int, start: int = 0) -> np.ndarray:
    out = _nan(len(x))
    region = x[start:]
    if len(region) >= n:
        out[start + n - 1 :] = sliding_window_view(region, n).sum(axis=1)
    return out


def _ema_values(x: np.ndarray, n: int, start: int = 0) -> np.ndarray:
    """EMA of x[start:], seeded at start+n-1 with the SMA of the first n values."""
    out = _nan(len(x))
    alpha = 2.0 / (n + 1.0)
    seed_at = start + n - 1
    out[seed_at] = x[start : start + n].mean()
    for t in range(seed_at + 1, len(x)):
        out[t] = alpha * x[t] + (1.0 - alpha) * out[t - 1]
    return out


def sma(close: Sequence[float] | np.ndarray, n: int) -> IndicatorSeries:
    """Arithmetic moving average of the last n closes."""
    arr = _as_close(close)
    _check_window(n, len(arr))
    return IndicatorSeries(f"MA_{n}", _rolling_mean(arr, n))


def ema(close: Sequence[float] | np.ndarray, n: int) -> IndicatorSeries:
    """Exponential moving average, alpha = 2/(n+1), seeded with the first n-SMA."""
    arr = _as_close(close)
    _check_window(n, len(arr))
    return IndicatorSeries(f"EMA_{n}", _ema_values(arr, n))


def roc(close: Sequence[float] | np.ndarray, n: int) -> IndicatorSeries:
    """Percent rate of change versus the close n-1 days earlier."""
    arr = _as_close(close)
    _check_window(n, len(arr))
    out = _nan(len(arr))
    ref = arr[: len(arr) - n + 1]
    if np.any(ref == 0.0):
        raise WindowError("zero reference price in ROC")
    out[n - 1 :] = (arr[n - 1 :] - ref) / ref * 100.0
    return IndicatorSeries(f"ROC_{n}", out)


def mom(close: Sequence[float] | np.ndarray, n: int) -> IndicatorSeries:
    """Price difference versus the close n-1 days earlier."""
    arr = _as_close(close)
    _check_window(n, len(arr))
    out = _nan(len(arr))
    out[n - 1 :] = arr[n - 1 :] - arr[: len(arr) - n + 1]
    return IndicatorSeries(f"MOM_{n}", out)


def rsi(close: Sequence[float] | np.ndarray, n: int) -> IndicatorSeries:
    """Relative Strength Index over the trailing n close-to-close changes."""
    arr = _as_close(close)
    _check_window(n, len(arr) - 1, label="n (number of changes)")
    delta = np.diff(arr)
    gains = np.clip(delta, 0.0, None)
    losses = np.clip(-delta, 0.0, None)
    avg_gain = sliding_window_view(gains, n).mean(axis=1)
    avg_loss = sliding_window_view(losses, n).mean(axis=1)
    out = _nan(len(arr))
    safe_loss = np.where(avg_loss > 0.0, avg_loss, 1.0)
    value = 100.0 - 100.0 / (1.0 + avg_gain / safe_loss)
    out[n:] = np.where(
        avg_loss > 0.0, value, np.where(avg_gain > 0.0, 100.0, 50.0)
    )
    return IndicatorSeries(f"RSI_{n}", out)


def stochastic(candles: CandleSeries, n_k: int, n_d: int) -> StochasticResult:
    """Stochastic oscillator: %K over n_k days and %D as the n_d-mean of %K."""
    high = np.asarray(candles.column("high"))
    low = np.asarray(candles.column("low"))
    close = np.asarray(candles.column("close"))
    _check_window(n_k, len(candles), "n_k")
    _check_window(n_d, len(candles) - n_k + 1, "n_d")
    hh = sliding_window_view(high, n_k).max(axis=1)
    ll = sliding_window_view(low, n_k).min(axis=1)
    span = hh - ll
    k = _nan(len(candles))
    safe = np.where(span > 0.0, span, 1.0)
    k[n_k - 1 :] = np.where(span > 0.0, (close[n_k - 1 :] - ll) / safe * 100.0, 50.0)
    d = _rolling_mean(k, n_d, start=n_k - 1)
    return StochasticResult(
        IndicatorSeries(f"STOK_{n_k}", k), IndicatorSeries(f"STOD_{n_k}_{n_d}", d)
    )


def _true_range_arrays(candles: CandleSeries) -> tuple[np.ndarray, ...]:
    high = np.asarray(candles.column("high"))
    low = np.asarray(candles.column("low"))
    close = np.asarray(candles.column("close"))
    n = len(candles)
    tr1 = high - low
    tr2 = _nan(n)
    tr3 = _nan(n)
    tr = _nan(n)
    if n > 1:
        tr2[1:] = high[1:] - close[:-1]
        tr3[1:] = low[1:] - close[:-1]
        tr[1:] = np.maximum(tr1[1:], np.maximum(np.abs(tr2[1:]), np.abs(tr3[1:])))
    return tr1, tr2, tr3, tr


def true_range_atr(candles: CandleSeries, n: int) -> TrueRangeResult:
    """tr1/tr2/tr3 components, true range, and its n-mean (ATR)."""
    _check_window(n, len(candles) - 1, label="n (ATR window)")
    tr1, tr2, tr3, tr = _true_range_arrays(candles)
    atr = _rolling_mean(np.where(np.isnan(tr), 0.0, tr), n, start=1)
    return TrueRangeResult(
        IndicatorSeries("TR1", tr1),
        IndicatorSeries("TR2", tr2),
        IndicatorSeries("TR3", tr3),
        IndicatorSeries("TR", tr),
        IndicatorSeries(f"ATR_{n}", atr),
    )


def directional_system(candles: CandleSeries, n: int) -> DirectionalResult:
    """+DI/-DI from clipped daily high/low moves, DX, and recursively smoothed ADX.

    +DM = max(0, H_t - H_{t-1}) and -DM = max(0, L_{t-1} - L_t); DI values are
    the n-mean DM over ATR(n), scaled to percent. ADX is seeded with the simple
    mean of the first n DX values, then ADX_t = (ADX_{t-1}*(n-1) + DX_t)/n.
    """
    length = len(candles)
    _check_window(n, length - 1, label="n (directional window)")
    if length < 2 * n:
        raise WindowError(f"directional system needs at least 2n={2 * n} candles, got {length}")
    high = np.asarray(candles.column("high"))
    low = np.asarray(candles.column("low"))
    plus_dm = np.clip(high[1:] - high[:-1], 0.0, None)
    minus_dm = np.clip(low[:-1] - low[1:], 0.0, None)
    atr = true_range_atr(candles, n).atr.values

    plus_avg = sliding_window_view(plus_dm, n).mean(axis=1)
    minus_avg = sliding_window_view(minus_dm, n).mean(axis=1)
    atr_def = atr[n:]
    safe_atr = np.where(atr_def > 0.0, atr_def, 1.0)
    plus_di = _nan(length)
    minus_di = _nan(length)
    plus_di[n:] = np.where(atr_def > 0.0, plus_avg / safe_atr * 100.0, 0.0)
    minus_di[n:] = np.where(atr_def > 0.0, minus_avg / safe_atr * 100.0, 0.0)

    di_sum = plus_di[n:] + minus_di[n:]
    safe_sum = np.where(di_sum > 0.0, di_sum, 1.0)
    dx = _nan(length)
    dx[n:] = np.where(
        di_sum > 0.0, np.abs(plus_di[n:] - minus_di[n:]) / safe_sum * 100.0, 0.0
    )

    adx = _nan(length)
    seed_at = 2 * n - 1
    adx[seed_at] = dx[n : seed_at + 1].mean()
    for t in range(seed_at + 1, length):
        adx[t] = (adx[t - 1] * (n - 1) + dx[t]) / n
    return DirectionalResult(
        IndicatorSeries(f"PLUS_DI_{n}", plus_di),
        IndicatorSeries(f"MINUS_DI_{n}", minus_di),
        IndicatorSeries(f"DX_{n}", dx),
        IndicatorSeries(f"ADX_{n}", adx),
    )


def conditional_dm(candles: CandleSeries, n: int) -> ConditionalDmResult:
    """MDI/PDI built from conditionally gated directional moves.

    A day contributes its low drop (MDM) only when the drop exceeds the high
    rise and is positive; symmetrically for PDM. The average excludes the
    current day: sum of the previous n-1 gated moves divided by n.
    """
    length = len(candles)
    _check_window(n, length - 1, label="n (conditional DM window)")
    high = np.asarray(candles.column("high"))
    low = np.asarray(candles.column("low"))
    up = high[1:] - high[:-1]
    down = low[:-1] - low[1:]
    mdm = np.where((down > up) & (down > 0.0), down, 0.0)
    pdm = np.where((up > down) & (up > 0.0), up, 0.0)
    atr = true_range_atr(candles, n).atr.values

    mdi = _nan(length)
    pdi = _nan(length)
    if n == 1:
        mdm_avg = np.zeros(length - 1)
        pdm_avg = np.zeros(length - 1)
    else:
        # window of n-1 moves ending the day before t, still divided by n
        mdm_avg = sliding_window_view(mdm, n - 1).sum(axis=1)[:-1] / n
        pdm_avg = sliding_window_view(pdm, n - 1).sum(axis=1)[:-1] / n
    atr_def = atr[n:]
    safe_atr = np.where(atr_def > 0.0, atr_def, 1.0)
    take = len(atr_def)
    mdi[n:] = np.where(atr_def > 0.0, mdm_avg[-take:] / safe_atr * 100.0, 0.0)
    pdi[n:] = np.where(atr_def > 0.0, pdm_avg[-take:] / safe_atr * 100.0, 0.0)
    return ConditionalDmResult(
        IndicatorSeries(f"MDI_{n}", mdi), IndicatorSeries(f"PDI_{n}", pdi)
    )


def aroon(candles: CandleSeries, n: int) -> AroonResult:
    """Aroon Up/Down as periods since the trailing (n+1)-bar extreme.

    A high set today scores 100; an extreme exactly n bars back scores 0.
    Ties resolve to the most recent occurrence.
    """
    length = len(candles)
    _check_window(n, length - 1, label="n (Aroon lookback)")
    high = np.asarray(candles.column("high"))
    low = np.asarray(candles.column("low"))
    up = _nan(length)
    down = _nan(length)
    high_windows = sliding_window_view(high, n + 1)[:, ::-1]
    low_windows = sliding_window_view(low, n + 1)[:, ::-1]
    since_high = high_windows.argmax(axis=1)  # reversed window: first hit = most recent
    since_low = low_windows.argmin(axis=1)
    up[n:] = (n - since_high) / n * 100.0
    down[n:] = (n - since_low) / n * 100.0
    return AroonResult(
        IndicatorSeries(f"AROON_UP_{n}", up), IndicatorSeries(f"AROON_DOWN_{n}", down)
    )


def bop(candles: CandleSeries) -> IndicatorSeries:
    """Balance of Power: (close - open)/(high - low); 0 on a flat bar."""
    open_ = np.asarray(candles.column("open"))
    high = np.asarray(candles.column("high"))
    low = np.asarray(candles.column("low"))
    close = np.asarray(candles.column("close"))
    span = high - low
    safe = np.where(span > 0.0, span, 1.0)
    values = np.where(span > 0.0, (close - open_) / safe, 0.0)
    return IndicatorSeries("BOP", values)


def ppo(close: Sequence[float] | np.ndarray, n1: int, n2: int) -> IndicatorSeries:
    """Percentage Price Oscillator: (EMA(n1) - EMA(n2))/EMA(n2) * 100."""
    arr = _as_close(close)
    _check_window(n1, len(arr), "n1")
    _check_window(n2, len(arr), "n2")
    e1 = _ema_values(arr, n1)
    e2 = _ema_values(arr, n2)
    start = max(n1, n2) - 1
    if np.any(e2[start:] == 0.0):
        raise WindowError("zero EMA denominator in PPO")
    out = _nan(len(arr))
    out[start:] = (e1[start:] - e2[start:]) / e2[start:] * 100.0
    return IndicatorSeries(f"PPO_{n1}_{n2}", out)


def cmo(close: Sequence[float] | np.ndarray, n: int) -> IndicatorSeries:
    """Chande Momentum Oscillator over the trailing n changes; 0 when flat."""
    arr = _as_close(close)
    _check_window(n, len(arr) - 1, label="n (number of changes)")
    delta = np.diff(arr)
    su = sliding_window_view(np.clip(delta, 0.0, None), n).sum(axis=1)
    sd = sliding_window_view(np.clip(-delta, 0.0, None), n).sum(axis=1)
    total = su + sd
    safe = np.where(total > 0.0, total, 1.0)
    out = _nan(len(arr))
    out[n:] = np.where(total > 0.0, (su - sd) / safe * 100.0, 0.0)
    return IndicatorSeries(f"CMO_{n}", out)


def mfi(candles: CandleSeries, n: int) -> IndicatorSeries:
    """Money Flow Index from typical-price money flows over the last n days."""
    _check_window(n, len(candles) - 1, label="n (flow window)")
    high = np.asarray(candles.column("high"))
    low = np.asarray(candles.column("low"))
    close = np.asarray(candles.column("close"))
    volume = np.asarray(candles.column("volume"))
    tp = (high + low + close) / 3.0
    rmf = tp * volume
    dtp = np.diff(tp)
    pos_flow = np.where(dtp > 0.0, rmf[1:], 0.0)
    neg_flow = np.where(dtp < 0.0, rmf[1:], 0.0)
    pmf = sliding_window_view(pos_flow, n).sum(axis=1)
    nmf = sliding_window_view(neg_flow, n).sum(axis=1)
    out = _nan(len(candles))
    safe = np.where(nmf > 0.0, nmf, 1.0)
    value = 100.0 - 100.0 / (1.0 + pmf / safe)
    out[n:] = np.where(nmf > 0.0, value, np.where(pmf > 0.0, 100.0, 50.0))
    return IndicatorSeries(f"MFI_{n}", out)


def macd(
    close: Sequence[float] | np.ndarray, n1: int, n2: int, n_sig: int
) -> MacdResult:
    """MACD line (EMA(n1) - EMA(n2)), its n_sig-EMA signal, and the histogram."""
    arr = _as_close(close)
    _check_window(n1, len(arr), "n1")
    _check_window(n2, len(arr), "n2")
    start = max(n1, n2) - 1
    _check_window(n_sig, len(arr) - start, "n_sig")
    line = _nan(len(arr))
    line[start:] = _ema_values(arr, n1)[start:] - _ema_values(arr, n2)[start:]
    signal = _ema_values(np.where(np.isnan(line), 0.0, line), n_sig, start=start)
    hist = line - signal
    return MacdResult(
        IndicatorSeries(f"MACD_{n1}_{n2}", line),
        IndicatorSeries(f"MACD_SIGNAL_{n_sig}", signal),
        IndicatorSeries(f"MACD_HIST_{n_sig}", hist),
    )


def cci(candles: CandleSeries, n: int) -> IndicatorSeries:
    """Commodity Channel Index with mean absolute deviation; 0 when flat."""
    _check_window(n, len(candles))
    high = np.asarray(candles.column("high"))
    low = np.asarray(candles.column("low"))
    close = np.asarray(candles.column("close"))
    tp = (high + low + close) / 3.0
    windows = sliding_window_view(tp, n)
    sm = windows.mean(axis=1)
    dev = np.abs(windows - sm[:, None]).mean(axis=1)
    out = _nan(len(candles))
    safe = np.where(dev > 0.0, dev, 1.0)
    out[n - 1 :] = np.where(dev > 0.0, (tp[n - 1 :] - sm) / (0.015 * safe), 0.0)
    return IndicatorSeries(f"CCI_{n}", out)


def bollinger(close: Sequence[float] | np.ndarray, n: int, k: float = 2.0) -> BollingerResult:
    """Bollinger bands around the n-SMA using population standard deviation."""
    arr = _as_close(close)
    _check_window(n, len(arr))
    windows = sliding_window_view(arr, n)
    mid = windows.mean(axis=1)
    std = windows.std(axis=1)
    lower = _nan(len(arr))
    middle = _nan(len(arr))
    upper = _nan(len(arr))
    middle[n - 1 :] = mid
    upper[n - 1 :] = mid + k * std
    lower[n - 1 :] = mid - k * std
    return BollingerResult(
        IndicatorSeries(f"LB_{n}", lower),
        IndicatorSeries(f"MB_{n}", middle),
        IndicatorSeries(f"UB_{n}", upper),
    )


def force_index(candles: CandleSeries, n: int) -> IndicatorSeries:
    """n-mean of the daily force (close change times volume)."""
    _check_window(n, len(candles) - 1, label="n (force window)")
    close = np.asarray(candles.column("close"))
    volume = np.asarray(candles.column("volume"))
    raw = _nan(len(candles))
    raw[1:] = np.diff(close) * volume[1:]
    out = _rolling_mean(np.where(np.isnan(raw), 0.0, raw), n, start=1)
    return IndicatorSeries(f"FI_{n}", out)


def eom(candles: CandleSeries, n: int) -> IndicatorSeries:
    """Ease of Movement: n-mean of per-day EMV values.

    EMV_t = EM_t / BR_t with EM = (midpoint move)/(high-low span) and
    BR = (volume/scale)/span, scale fixed at 1e-10. Days with a flat bar or a
    zero box ratio contribute 0.
    """
    _check_window(n, len(candles) - 1, label="n (EOM window)")
    high = np.asarray(candles.column("high"))
    low = np.asarray(candles.column("low"))
    volume = np.asarray(candles.column("volume"))
    hld = high - low
    hla = (high + low) / 2.0
    emv = np.zeros(len(candles) - 1)
    for i in range(1, len(candles)):
        span = hld[i]
        if span == 0.0:
            continue
        br = (volume[i] / EOM_SCALE) / span
        if br == 0.0:
            continue
        em = (hla[i] - hla[i - 1]) / span
        emv[i - 1] = em / br
    padded = _nan(len(candles))
    padded[1:] = emv
    out = _rolling_mean(np.where(np.isnan(padded), 0.0, padded), n, start=1)
    return IndicatorSeries(f"EOM_{n}", out)
