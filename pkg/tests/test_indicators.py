import datetime as dt
import math

import numpy as np
import numpy.testing as npt
import pytest

import oracles
from hsif import indicators as ind
from hsif.catalog import IndicatorCatalog, compute_catalog
from hsif.errors import CatalogError, WindowError
from hsif.fixtures import make_walk_candles
from hsif.marketdata import Candle, CandleSeries


def series_from_arrays(open_, high, low, close, volume=None):
    n = len(close)
    volume = volume if volume is not None else [100.0] * n
    start = dt.date(2020, 1, 1)
    return CandleSeries(
        tuple(
            Candle(
                start + dt.timedelta(days=i),
                float(open_[i]),
                float(high[i]),
                float(low[i]),
                float(close[i]),
                float(volume[i]),
            )
            for i in range(n)
        )
    )


def assert_matches_oracle(values: np.ndarray, expected: list, exact: bool = False):
    """Same warmup pattern, then relative 1e-9 (absolute 1e-9 near zero)."""
    assert len(values) == len(expected)
    for got, want in zip(values, expected):
        if want is None:
            assert math.isnan(got)
        elif exact:
            assert got == want
        else:
            assert abs(got - want) <= 1e-9 + 1e-9 * abs(want)


@pytest.fixture(scope="module")
def walk():
    candles = make_walk_candles(120, seed=11)
    return {
        "candles": candles,
        "open": candles.column("open"),
        "high": candles.column("high"),
        "low": candles.column("low"),
        "close": candles.column("close"),
        "volume": candles.column("volume"),
    }


# ------------------------------------------------------------ simple closes


def test_sma_examples():
    out = ind.sma([1.0, 2.0, 3.0, 4.0], 2).values
    assert math.isnan(out[0])
    npt.assert_allclose(out[1:], [1.5, 2.5, 3.5])
    whole = ind.sma([1.0, 2.0, 3.0, 4.0], 4).values
    assert math.isnan(whole[2]) and whole[3] == 2.5
    const = ind.sma([7.0] * 10, 3).values
    npt.assert_allclose(const[2:], 7.0)


def test_ema_examples():
    out = ind.ema([0.0, 10.0], 2).values
    assert math.isnan(out[0]) and out[1] == 5.0
    out = ind.ema([0.0, 10.0, 10.0], 2).values
    npt.assert_allclose(out[2], (2 / 3) * 10 + (1 / 3) * 5)
    const = ind.ema([3.0] * 8, 4).values
    npt.assert_allclose(const[3:], 3.0, rtol=1e-12)


def test_roc_mom_examples():
    npt.assert_allclose(ind.roc([100.0, 110.0], 2).values[1], 10.0)
    npt.assert_allclose(ind.roc([100.0, 90.0], 2).values[1], -10.0)
    npt.assert_allclose(ind.roc([5.0] * 6, 3).values[2:], 0.0)
    npt.assert_allclose(ind.mom([5.0, 9.0], 2).values[1], 4.0)
    npt.assert_allclose(ind.mom([4.0, 7.0, 2.0], 1).values, 0.0)


def test_rsi_monotone_conventions():
    inc = ind.rsi(np.linspace(1, 30, 30), 14).values
    npt.assert_allclose(inc[14:], 100.0)
    dec = ind.rsi(np.linspace(30, 1, 30), 14).values
    npt.assert_allclose(dec[14:], 0.0)
    flat = ind.rsi([5.0] * 30, 14).values
    npt.assert_allclose(flat[14:], 50.0)


def test_rsi_random_walk_matches_oracle():
    rng = np.random.default_rng(5)
    close = list(100 + np.cumsum(rng.normal(0, 1, 15)))
    assert_matches_oracle(ind.rsi(close, 14).values, oracles.rsi(close, 14))


def test_stochastic(walk):
    k, d = ind.stochastic(walk["candles"], 14, 3)
    assert_matches_oracle(k.values, oracles.stok(walk["high"], walk["low"], walk["close"], 14))
    assert_matches_oracle(d.values, oracles.stod(walk["high"], walk["low"], walk["close"], 14, 3))
    # close at window high -> 100
    s = series_from_arrays([1, 1, 1], [1.5, 2, 3], [0.5, 0.5, 0.5], [1, 1.5, 3])
    npt.assert_allclose(ind.stochastic(s, 3, 1).k.values[2], 100.0)
    flat = make_walk_candles(10, flat=True)
    npt.assert_allclose(ind.stochastic(flat, 5, 2).k.values[4:], 50.0)


def test_true_range_example():
    s = series_from_arrays([9, 10], [10, 12], [8, 9], [9, 11])
    result = ind.true_range_atr(s, 1)
    assert result.tr1.values[1] == 3.0
    assert result.tr2.values[1] == 3.0
    assert result.tr3.values[1] == 0.0
    assert result.tr.values[1] == 3.0
    flat = make_walk_candles(12, flat=True)
    npt.assert_allclose(ind.true_range_atr(flat, 5).atr.values[5:], 0.0)


def test_directional_constant_and_monotone():
    flat = make_walk_candles(30, flat=True)
    result = ind.directional_system(flat, 5)
    for s in result:
        defined = ~np.isnan(s.values)
        npt.assert_allclose(s.values[defined], 0.0)
    # high/low rising 1/day: -DM = 0, DX = 100 once defined
    n = 30
    close = np.arange(10.0, 10.0 + n)
    s = series_from_arrays(close, close + 1.0, close - 1.0, close)
    result = ind.directional_system(s, 5)
    npt.assert_allclose(result.minus_di.values[5:], 0.0)
    npt.assert_allclose(result.dx.values[5:], 100.0)


def test_conditional_dm_gate():
    # day 1: L drops 3, H rises 1 -> MDM contributes 3, PDM contributes 0
    s = series_from_arrays([10, 10], [12, 13], [8, 5], [10, 9])
    mdi, pdi = ind.conditional_dm(s, 1)
    # with n=1 the averaging window is empty; check via the oracle on n=2
    high = [12.0, 13.0, 13.0]
    low = [8.0, 5.0, 5.0]
    close = [10.0, 9.0, 9.0]
    s3 = series_from_arrays([10, 10, 9], high, low, close)
    got = ind.conditional_dm(s3, 2)
    want_mdi, want_pdi = oracles.conditional_dm(high, low, close, 2)
    assert_matches_oracle(got.mdi.values, want_mdi)
    assert_matches_oracle(got.pdi.values, want_pdi)
    assert want_mdi[2] > 0.0 and want_pdi[2] == 0.0


def test_aroon_examples():
    n = 21
    candles = make_walk_candles(60, seed=3)
    up, down = ind.aroon(candles, n)
    want_up, want_down = oracles.aroon(
        candles.column("high"), candles.column("low"), n
    )
    assert_matches_oracle(up.values, want_up, exact=True)
    assert_matches_oracle(down.values, want_down, exact=True)
    # today's high is the window max -> 100
    rising = np.arange(1.0, 31.0)
    s = series_from_arrays(rising, rising + 0.5, rising - 0.5, rising)
    npt.assert_allclose(ind.aroon(s, 10).up.values[10:], 100.0)
    # max exactly n bars ago -> 0
    high = [100.0] + [50.0 - i for i in range(10)]
    low = [1.0] * 11
    s = series_from_arrays([10.0] * 11, high, low, [10.0] * 11, None)
    assert ind.aroon(s, 10).up.values[10] == 0.0


def test_bop_examples():
    s = series_from_arrays([10], [13], [9], [12])
    npt.assert_allclose(ind.bop(s).values[0], 0.5)
    s = series_from_arrays([10], [13], [9], [10])
    assert ind.bop(s).values[0] == 0.0
    flat = make_walk_candles(3, flat=True)
    npt.assert_allclose(ind.bop(flat).values, 0.0)


def test_ppo_and_cmo():
    const = ind.ppo([5.0] * 40, 12, 26).values
    npt.assert_allclose(const[25:], 0.0, atol=1e-12)
    inc = ind.cmo(np.linspace(1, 30, 30), 14).values
    npt.assert_allclose(inc[14:], 100.0)
    dec = ind.cmo(np.linspace(30, 1, 30), 14).values
    npt.assert_allclose(dec[14:], -100.0)
    flat = ind.cmo([5.0] * 30, 14).values
    npt.assert_allclose(flat[14:], 0.0)


def test_mfi_conventions():
    n = 20
    rising = np.arange(10.0, 10.0 + n)
    s = series_from_arrays(rising, rising + 1, rising - 1, rising, [5.0] * n)
    npt.assert_allclose(ind.mfi(s, 5).values[5:], 100.0)
    falling = rising[::-1]
    s = series_from_arrays(falling, falling + 1, falling - 1, falling, [5.0] * n)
    npt.assert_allclose(ind.mfi(s, 5).values[5:], 0.0)
    flat = make_walk_candles(n, flat=True)
    npt.assert_allclose(ind.mfi(flat, 5).values[5:], 50.0)


def test_macd_structure(walk):
    result = ind.macd(walk["close"], 12, 26, 9)
    const = ind.macd([4.0] * 40, 12, 26, 9)
    for s in const:
        defined = ~np.isnan(s.values)
        npt.assert_allclose(s.values[defined], 0.0, atol=1e-12)
    defined = ~np.isnan(result.hist.values)
    npt.assert_allclose(
        result.hist.values[defined],
        (result.macd.values - result.signal.values)[defined],
        rtol=1e-12,
    )


def test_cci_window_example():
    # typical prices [10, 10, 13]: SM=11, D=4/3, CCI=100
    s = series_from_arrays([10, 10, 13], [10, 10, 13], [10, 10, 13], [10, 10, 13])
    npt.assert_allclose(ind.cci(s, 3).values[2], 100.0)
    flat = make_walk_candles(10, flat=True)
    npt.assert_allclose(ind.cci(flat, 4).values[3:], 0.0)


def test_bollinger_example():
    closes = np.arange(1.0, 21.0)
    lb, mb, ub = ind.bollinger(closes, 20, 2.0)
    assert mb.values[19] == 10.5
    std = math.sqrt(33.25)
    npt.assert_allclose(ub.values[19], 10.5 + 2 * std)
    npt.assert_allclose(lb.values[19], 10.5 - 2 * std)
    const = ind.bollinger([6.0] * 25, 20, 2.0)
    npt.assert_allclose(const.lower.values[19:], 6.0)
    npt.assert_allclose(const.upper.values[19:], 6.0)
    # symmetry
    walk_closes = make_walk_candles(50, seed=9).column("close")
    lb, mb, ub = ind.bollinger(walk_closes, 20, 2.0)
    defined = ~np.isnan(mb.values)
    npt.assert_allclose(
        (ub.values - mb.values)[defined], (mb.values - lb.values)[defined], rtol=1e-9
    )


def test_force_index_example():
    s = series_from_arrays([10, 11], [11, 13], [9, 10], [10, 12], [3.0, 5.0])
    npt.assert_allclose(ind.force_index(s, 1).values[1], 10.0)
    flat = make_walk_candles(10, flat=True)
    npt.assert_allclose(ind.force_index(flat, 4).values[4:], 0.0)


def test_eom_example():
    s = series_from_arrays(
        [9, 11], [10, 12], [8, 10], [9, 11], [1.0, 2e-10]
    )
    npt.assert_allclose(ind.eom(s, 1).values[1], 1.0)
    flat = make_walk_candles(10, flat=True)  # H == L: convention 0
    npt.assert_allclose(ind.eom(flat, 4).values[4:], 0.0)
    # constant H and L (EM = 0) -> 0
    s = series_from_arrays([5] * 8, [6] * 8, [4] * 8, [5] * 8, [7.0] * 8)
    npt.assert_allclose(ind.eom(s, 3).values[3:], 0.0)


# --------------------------------------------------------- oracle sweep


ORACLE_CASES = [
    ("sma", lambda w: ind.sma(w["close"], 20).values, lambda w: oracles.sma(w["close"], 20)),
    ("ema", lambda w: ind.ema(w["close"], 12).values, lambda w: oracles.ema(w["close"], 12)),
    ("roc", lambda w: ind.roc(w["close"], 10).values, lambda w: oracles.roc(w["close"], 10)),
    ("mom", lambda w: ind.mom(w["close"], 30).values, lambda w: oracles.mom(w["close"], 30)),
    ("rsi", lambda w: ind.rsi(w["close"], 14).values, lambda w: oracles.rsi(w["close"], 14)),
    (
        "stok",
        lambda w: ind.stochastic(w["candles"], 14, 3).k.values,
        lambda w: oracles.stok(w["high"], w["low"], w["close"], 14),
    ),
    (
        "stod",
        lambda w: ind.stochastic(w["candles"], 14, 3).d.values,
        lambda w: oracles.stod(w["high"], w["low"], w["close"], 14, 3),
    ),
    (
        "atr",
        lambda w: ind.true_range_atr(w["candles"], 14).atr.values,
        lambda w: oracles.atr(w["high"], w["low"], w["close"], 14),
    ),
    (
        "adx",
        lambda w: ind.directional_system(w["candles"], 14).adx.values,
        lambda w: oracles.directional_system(w["high"], w["low"], w["close"], 14)[3],
    ),
    (
        "mdi",
        lambda w: ind.conditional_dm(w["candles"], 14).mdi.values,
        lambda w: oracles.conditional_dm(w["high"], w["low"], w["close"], 14)[0],
    ),
    (
        "aroon_up",
        lambda w: ind.aroon(w["candles"], 21).up.values,
        lambda w: oracles.aroon(w["high"], w["low"], 21)[0],
    ),
    ("bop", lambda w: ind.bop(w["candles"]).values, lambda w: oracles.bop(w["open"], w["high"], w["low"], w["close"])),
    ("ppo", lambda w: ind.ppo(w["close"], 12, 26).values, lambda w: oracles.ppo(w["close"], 12, 26)),
    ("cmo", lambda w: ind.cmo(w["close"], 14).values, lambda w: oracles.cmo(w["close"], 14)),
    (
        "mfi",
        lambda w: ind.mfi(w["candles"], 14).values,
        lambda w: oracles.mfi(w["high"], w["low"], w["close"], w["volume"], 14),
    ),
    (
        "macd_hist",
        lambda w: ind.macd(w["close"], 12, 26, 9).hist.values,
        lambda w: oracles.macd(w["close"], 12, 26, 9)[2],
    ),
    ("cci", lambda w: ind.cci(w["candles"], 20).values, lambda w: oracles.cci(w["high"], w["low"], w["close"], 20)),
    (
        "bollinger_ub",
        lambda w: ind.bollinger(w["close"], 20, 2.0).upper.values,
        lambda w: oracles.bollinger(w["close"], 20, 2.0)[2],
    ),
    (
        "force_index",
        lambda w: ind.force_index(w["candles"], 13).values,
        lambda w: oracles.force_index(w["close"], w["volume"], 13),
    ),
    (
        "eom",
        lambda w: ind.eom(w["candles"], 14).values,
        lambda w: oracles.eom(w["high"], w["low"], w["volume"], 14),
    ),
]


@pytest.mark.parametrize("name,impl,oracle", ORACLE_CASES, ids=[c[0] for c in ORACLE_CASES])
def test_matches_oracle_on_random_walk(name, impl, oracle, walk):
    assert_matches_oracle(impl(walk), oracle(walk))


# --------------------------------------------------------------- properties


def test_shift_equivariance_all_ops():
    longer = make_walk_candles(81, seed=21)
    shorter = CandleSeries(longer.candles[:-1])

    def all_series(candles):
        w = {
            "candles": candles,
            "open": candles.column("open"),
            "high": candles.column("high"),
            "low": candles.column("low"),
            "close": candles.column("close"),
            "volume": candles.column("volume"),
        }
        return {name: impl(w) for name, impl, _ in ORACLE_CASES}

    before = all_series(shorter)
    after = all_series(longer)
    for name in before:
        npt.assert_array_equal(
            before[name], after[name][:-1], err_msg=f"{name} changed history"
        )


def test_bounded_ranges():
    candles = make_walk_candles(300, seed=2)
    close = candles.column("close")

    def defined(values):
        return values[~np.isnan(values)]

    for values in (
        defined(ind.rsi(close, 14).values),
        defined(ind.stochastic(candles, 14, 3).k.values),
        defined(ind.stochastic(candles, 14, 3).d.values),
        defined(ind.mfi(candles, 14).values),
        defined(ind.aroon(candles, 21).up.values),
        defined(ind.aroon(candles, 21).down.values),
    ):
        assert values.min() >= 0.0 and values.max() <= 100.0
    cmo_vals = defined(ind.cmo(close, 14).values)
    assert cmo_vals.min() >= -100.0 and cmo_vals.max() <= 100.0
    bop_vals = defined(ind.bop(candles).values)
    assert bop_vals.min() >= -1.0 and bop_vals.max() <= 1.0


EXPECTED_WARMUPS = {
    "MA_200": 199, "EMA_12": 11, "EMA_26": 25,
    "ROC_10": 9, "ROC_30": 29, "MOM_10": 9, "MOM_30": 29,
    "RSI_10": 10, "RSI_14": 14, "RSI_30": 30, "RSI_200": 200,
    "STOK_10": 9, "STOK_14": 13, "STOK_30": 29, "STOK_200": 199,
    "STOD_10": 18, "STOD_14": 26,
    "TR1": 0, "TR2": 1, "TR3": 1, "TR": 1,
    "ATR_14": 14, "ATR_21": 21,
    "PLUS_DI_14": 14, "MINUS_DI_14": 14, "PLUS_DI_21": 21, "MINUS_DI_21": 21,
    "DX_14": 14, "DX_21": 21, "ADX_14": 27, "ADX_21": 41,
    "MDI_14": 14, "PDI_14": 14,
    "AROON_UP_21": 21, "AROON_DOWN_21": 21,
    "BOP": 0, "PPO_12_26": 25, "CMO_14": 14, "MFI_14": 14,
    "MACD_12_26": 25, "MACD_SIGNAL_9": 33, "MACD_HIST_9": 33,
    "CCI_20": 19, "LB_20": 19, "MB_20": 19, "UB_20": 19,
    "FI_13": 13, "EOM_14": 14,
    "O": 0, "H": 0, "L": 0, "C": 0, "VOL": 0,
}


def test_catalog_warmups_and_column_count():
    candles = make_walk_candles(400, seed=7)
    frame = compute_catalog(candles, IndicatorCatalog.default())
    assert len(frame.names) == 53
    firsts = {}
    for name, values in frame.columns.items():
        defined = ~np.isnan(values)
        first = int(np.argmax(defined))
        assert defined[first:].all(), f"{name}: non-contiguous defined region"
        firsts[name] = first
    assert firsts == EXPECTED_WARMUPS
    assert max(firsts.values()) == 200


def test_catalog_errors():
    with pytest.raises(CatalogError, match="empty catalog"):
        IndicatorCatalog(())
    candles = make_walk_candles(150, seed=1)
    with pytest.raises(CatalogError, match=r"catalog entry MA\(200\)"):
        compute_catalog(candles, IndicatorCatalog.default())
    with pytest.raises(CatalogError, match="unknown indicator"):
        IndicatorCatalog.from_text("WOBBLE(3)\n")
    with pytest.raises(CatalogError, match="duplicate"):
        IndicatorCatalog.from_text("BOP\nBOP\n")
    with pytest.raises(CatalogError, match="parameter"):
        IndicatorCatalog.from_text("MA\n")


def test_catalog_text_round_trip_and_hash():
    catalog = IndicatorCatalog.default()
    again = IndicatorCatalog.from_text(catalog.to_text())
    assert again.entries == catalog.entries
    assert again.sha256 == catalog.sha256


def test_window_errors():
    close = [1.0, 2.0, 3.0]
    with pytest.raises(WindowError):
        ind.sma(close, 0)
    with pytest.raises(WindowError):
        ind.sma(close, 4)
    with pytest.raises(WindowError):
        ind.sma(close, -2)
    with pytest.raises(WindowError):
        ind.rsi(close, 3)  # only 2 changes available
    candles = make_walk_candles(10, seed=0)
    with pytest.raises(WindowError):
        ind.directional_system(candles, 6)  # needs 2n candles for the ADX seed
