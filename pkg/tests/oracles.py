"""Independent reference implementations used to verify the library.

Everything here is written as literal per-index transliterations of the
indicator/metric definitions using plain Python floats and loops — no numpy
vectorization, no code shared with the package under test. Values are None
during warmup.
"""

from __future__ import annotations

import math

EOM_SCALE = 1e-10


def _mean(xs):
    return sum(xs) / len(xs)


# ---------------------------------------------------------------- indicators


def sma(close, n):
    out = [None] * len(close)
    for t in range(n - 1, len(close)):
        out[t] = _mean(close[t - n + 1 : t + 1])
    return out


def ema(close, n):
    out = [None] * len(close)
    alpha = 2.0 / (n + 1.0)
    out[n - 1] = _mean(close[:n])
    for t in range(n, len(close)):
        out[t] = alpha * close[t] + (1.0 - alpha) * out[t - 1]
    return out


def roc(close, n):
    out = [None] * len(close)
    for t in range(n - 1, len(close)):
        ref = close[t - n + 1]
        out[t] = (close[t] - ref) / ref * 100.0
    return out


def mom(close, n):
    out = [None] * len(close)
    for t in range(n - 1, len(close)):
        out[t] = close[t] - close[t - n + 1]
    return out


def rsi(close, n):
    out = [None] * len(close)
    for t in range(n, len(close)):
        gains, losses = [], []
        for i in range(t - n + 1, t + 1):
            change = close[i] - close[i - 1]
            gains.append(max(change, 0.0))
            losses.append(max(-change, 0.0))
        avg_gain, avg_loss = _mean(gains), _mean(losses)
        if avg_loss == 0.0:
            out[t] = 100.0 if avg_gain > 0.0 else 50.0
        else:
            out[t] = 100.0 - 100.0 / (1.0 + avg_gain / avg_loss)
    return out


def stok(high, low, close, n):
    out = [None] * len(close)
    for t in range(n - 1, len(close)):
        hh = max(high[t - n + 1 : t + 1])
        ll = min(low[t - n + 1 : t + 1])
        out[t] = 50.0 if hh == ll else (close[t] - ll) / (hh - ll) * 100.0
    return out


def stod(high, low, close, n_k, n_d):
    k = stok(high, low, close, n_k)
    out = [None] * len(close)
    for t in range(n_k - 1 + n_d - 1, len(close)):
        out[t] = _mean(k[t - n_d + 1 : t + 1])
    return out


def true_range(high, low, close):
    n = len(close)
    tr1 = [high[t] - low[t] for t in range(n)]
    tr2 = [None] + [high[t] - close[t - 1] for t in range(1, n)]
    tr3 = [None] + [low[t] - close[t - 1] for t in range(1, n)]
    tr = [None] + [
        max(tr1[t], abs(tr2[t]), abs(tr3[t])) for t in range(1, n)
    ]
    return tr1, tr2, tr3, tr


def atr(high, low, close, n):
    _, _, _, tr = true_range(high, low, close)
    out = [None] * len(close)
    for t in range(n, len(close)):
        out[t] = _mean(tr[t - n + 1 : t + 1])
    return out


def directional_system(high, low, close, n):
    length = len(close)
    plus_dm = [None] + [max(0.0, high[t] - high[t - 1]) for t in range(1, length)]
    minus_dm = [None] + [max(0.0, low[t - 1] - low[t]) for t in range(1, length)]
    atr_vals = atr(high, low, close, n)
    plus_di = [None] * length
    minus_di = [None] * length
    dx = [None] * length
    adx = [None] * length
    for t in range(n, length):
        p_avg = _mean(plus_dm[t - n + 1 : t + 1])
        m_avg = _mean(minus_dm[t - n + 1 : t + 1])
        if atr_vals[t] == 0.0:
            plus_di[t] = minus_di[t] = 0.0
        else:
            plus_di[t] = p_avg / atr_vals[t] * 100.0
            minus_di[t] = m_avg / atr_vals[t] * 100.0
        di_sum = plus_di[t] + minus_di[t]
        dx[t] = 0.0 if di_sum == 0.0 else abs(plus_di[t] - minus_di[t]) / di_sum * 100.0
    seed = 2 * n - 1
    if seed < length:
        adx[seed] = _mean(dx[n : seed + 1])
        for t in range(seed + 1, length):
            adx[t] = (adx[t - 1] * (n - 1) + dx[t]) / n
    return plus_di, minus_di, dx, adx


def conditional_dm(high, low, close, n):
    length = len(close)
    mdm = [None] * length
    pdm = [None] * length
    for t in range(1, length):
        drop = low[t - 1] - low[t]
        rise = high[t] - high[t - 1]
        mdm[t] = drop if (drop > rise and drop > 0.0) else 0.0
        pdm[t] = rise if (rise > drop and rise > 0.0) else 0.0
    atr_vals = atr(high, low, close, n)
    mdi = [None] * length
    pdi = [None] * length
    for t in range(n, length):
        m_avg = sum(mdm[t - i] for i in range(1, n)) / n
        p_avg = sum(pdm[t - i] for i in range(1, n)) / n
        if atr_vals[t] == 0.0:
            mdi[t] = pdi[t] = 0.0
        else:
            mdi[t] = m_avg / atr_vals[t] * 100.0
            pdi[t] = p_avg / atr_vals[t] * 100.0
    return mdi, pdi


def aroon(high, low, n):
    length = len(high)
    up = [None] * length
    down = [None] * length
    for t in range(n, length):
        window_h = high[t - n : t + 1]
        window_l = low[t - n : t + 1]
        best_h = max(window_h)
        best_l = min(window_l)
        # ties -> most recent occurrence (largest index)
        j_h = max(j for j, v in enumerate(window_h) if v == best_h)
        j_l = max(j for j, v in enumerate(window_l) if v == best_l)
        since_h = n - j_h
        since_l = n - j_l
        up[t] = (n - since_h) / n * 100.0
        down[t] = (n - since_l) / n * 100.0
    return up, down


def bop(open_, high, low, close):
    out = []
    for t in range(len(close)):
        span = high[t] - low[t]
        out.append(0.0 if span == 0.0 else (close[t] - open_[t]) / span)
    return out


def ppo(close, n1, n2):
    e1 = ema(close, n1)
    e2 = ema(close, n2)
    out = [None] * len(close)
    for t in range(max(n1, n2) - 1, len(close)):
        out[t] = (e1[t] - e2[t]) / e2[t] * 100.0
    return out


def cmo(close, n):
    out = [None] * len(close)
    for t in range(n, len(close)):
        su = sd = 0.0
        for i in range(t - n + 1, t + 1):
            change = close[i] - close[i - 1]
            if change > 0.0:
                su += change
            elif change < 0.0:
                sd += -change
        total = su + sd
        out[t] = 0.0 if total == 0.0 else (su - sd) / total * 100.0
    return out


def mfi(high, low, close, volume, n):
    length = len(close)
    tp = [(high[t] + low[t] + close[t]) / 3.0 for t in range(length)]
    rmf = [tp[t] * volume[t] for t in range(length)]
    out = [None] * length
    for t in range(n, length):
        pmf = nmf = 0.0
        for i in range(t - n + 1, t + 1):
            if tp[i] > tp[i - 1]:
                pmf += rmf[i]
            elif tp[i] < tp[i - 1]:
                nmf += rmf[i]
        if nmf == 0.0:
            out[t] = 100.0 if pmf > 0.0 else 50.0
        else:
            out[t] = 100.0 - 100.0 / (1.0 + pmf / nmf)
    return out


def macd(close, n1, n2, n_sig):
    e1 = ema(close, n1)
    e2 = ema(close, n2)
    start = max(n1, n2) - 1
    line = [None] * len(close)
    for t in range(start, len(close)):
        line[t] = e1[t] - e2[t]
    signal = [None] * len(close)
    alpha = 2.0 / (n_sig + 1.0)
    seed_at = start + n_sig - 1
    signal[seed_at] = _mean(line[start : seed_at + 1])
    for t in range(seed_at + 1, len(close)):
        signal[t] = alpha * line[t] + (1.0 - alpha) * signal[t - 1]
    hist = [None] * len(close)
    for t in range(seed_at, len(close)):
        hist[t] = line[t] - signal[t]
    return line, signal, hist


def cci(high, low, close, n):
    length = len(close)
    m = [(high[t] + low[t] + close[t]) / 3.0 for t in range(length)]
    out = [None] * length
    for t in range(n - 1, length):
        window = m[t - n + 1 : t + 1]
        sm = _mean(window)
        d = _mean([abs(v - sm) for v in window])
        out[t] = 0.0 if d == 0.0 else (m[t] - sm) / (0.015 * d)
    return out


def bollinger(close, n, k):
    lower = [None] * len(close)
    middle = [None] * len(close)
    upper = [None] * len(close)
    for t in range(n - 1, len(close)):
        window = close[t - n + 1 : t + 1]
        mb = _mean(window)
        var = _mean([(v - mb) ** 2 for v in window])
        std = math.sqrt(var)
        middle[t] = mb
        upper[t] = mb + k * std
        lower[t] = mb - k * std
    return lower, middle, upper


def force_index(close, volume, n):
    length = len(close)
    fi_raw = [None] + [(close[t] - close[t - 1]) * volume[t] for t in range(1, length)]
    out = [None] * length
    for t in range(n, length):
        out[t] = _mean(fi_raw[t - n + 1 : t + 1])
    return out


def eom(high, low, volume, n):
    length = len(high)
    emv = [None] * length
    for t in range(1, length):
        hld = high[t] - low[t]
        if hld == 0.0:
            emv[t] = 0.0
            continue
        hla_t = (high[t] + low[t]) / 2.0
        hla_prev = (high[t - 1] + low[t - 1]) / 2.0
        br = (volume[t] / EOM_SCALE) / hld
        if br == 0.0:
            emv[t] = 0.0
            continue
        em = (hla_t - hla_prev) / hld
        emv[t] = em / br
    out = [None] * length
    for t in range(n, length):
        out[t] = _mean(emv[t - n + 1 : t + 1])
    return out


# ------------------------------------------------------------------- metrics


def confusion_counts(labels, predictions):
    tp = fp = tn = fn = 0
    for y, p in zip(labels, predictions):
        if y == 1 and p == 1:
            tp += 1
        elif y == 0 and p == 1:
            fp += 1
        elif y == 0 and p == 0:
            tn += 1
        else:
            fn += 1
    return tp, fp, tn, fn


def metrics_from_counts(tp, fp, tn, fn):
    total = tp + fp + tn + fn
    accuracy = (tp + tn) / total if total else 0.0
    precision = tp / (tp + fp) if (tp + fp) else 0.0
    recall = tp / (tp + fn) if (tp + fn) else 0.0
    f1 = (2 * tp) / (2 * tp + fp + fn) if (2 * tp + fp + fn) else 0.0
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    mcc = (tp * tn - fp * fn) / math.sqrt(denom) if denom else 0.0
    return accuracy, precision, recall, f1, mcc


def roc_auc_pairs(labels, scores):
    """All-pairs AUC: P(score_pos > score_neg), ties count half."""
    pos = [s for y, s in zip(labels, scores) if y == 1]
    neg = [s for y, s in zip(labels, scores) if y == 0]
    if not pos or not neg:
        return None
    wins = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                wins += 1.0
            elif sp == sn:
                wins += 0.5
    return wins / (len(pos) * len(neg))


# ------------------------------------------------------------------ pearson


def pearson(xs, ys):
    n = len(xs)
    mx = _mean(xs)
    my = _mean(ys)
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    vx = sum((x - mx) ** 2 for x in xs)
    vy = sum((y - my) ** 2 for y in ys)
    if vx == 0.0 or vy == 0.0:
        return 0.0
    return cov / math.sqrt(vx * vy)


# --------------------------------------------------- recurrent network


def _sigmoid_scalar(x):
    return 1.0 / (1.0 + math.exp(-x))


def _affine(x, h, wx, wh, b):
    """z[j] = b[j] + sum_a x[a] wx[a][j] + sum_k h[k] wh[k][j], plain loops."""
    cols = len(b)
    z = []
    for j in range(cols):
        total = b[j]
        for a, xa in enumerate(x):
            total += xa * wx[a][j]
        for k, hk in enumerate(h):
            total += hk * wh[k][j]
        z.append(total)
    return z


def lstm_direction(x_seq, gates, hidden):
    """Step-by-step cell recurrence; gates = {name: (wx, wh, b)} nested lists.

    Returns the hidden state after each step, in processing order.
    """
    h = [0.0] * hidden
    c = [0.0] * hidden
    states = []
    for x in x_seq:
        z_i = _affine(x, h, *gates["input"])
        z_f = _affine(x, h, *gates["forget"])
        z_g = _affine(x, h, *gates["cell"])
        z_o = _affine(x, h, *gates["output"])
        i = [_sigmoid_scalar(z) for z in z_i]
        f = [_sigmoid_scalar(z) for z in z_f]
        g = [math.tanh(z) for z in z_g]
        o = [_sigmoid_scalar(z) for z in z_o]
        c = [f[j] * c[j] + i[j] * g[j] for j in range(hidden)]
        h = [o[j] * math.tanh(c[j]) for j in range(hidden)]
        states.append(h)
    return states


def bilstm_probs(layer_gates, dense_w, dense_b, window, hidden):
    """Full network oracle: stacked (bi)directional layers, dense, softmax.

    layer_gates: list of (fwd_gates, bwd_gates_or_None) per layer.
    Returns (probabilities, k).
    """
    x = [list(row) for row in window]
    steps = len(x)
    for fwd_gates, bwd_gates in layer_gates:
        h_fwd = lstm_direction(x, fwd_gates, hidden)
        if bwd_gates is not None:
            h_bwd_proc = lstm_direction(list(reversed(x)), bwd_gates, hidden)
            h_bwd = list(reversed(h_bwd_proc))
            x = [h_fwd[t] + h_bwd[t] for t in range(steps)]
        else:
            x = h_fwd
    if layer_gates[-1][1] is not None:
        k = x[-1][:hidden] + x[0][hidden:]
    else:
        k = x[-1]
    logits = []
    for j in range(len(dense_b)):
        total = dense_b[j]
        for a, ka in enumerate(k):
            total += ka * dense_w[a][j]
        logits.append(total)
    top = max(logits)
    exps = [math.exp(z - top) for z in logits]
    denom = sum(exps)
    return [e / denom for e in exps], k


# ------------------------------------------------------------------ adam


def adam_scalar(p0, grad_seq, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
    """Bias-corrected Adam on a scalar; returns the value after each step."""
    p = p0
    m = 0.0
    v = 0.0
    out = []
    for t, g in enumerate(grad_seq, start=1):
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        p = p - lr * m_hat / (math.sqrt(v_hat) + eps)
        out.append(p)
    return out
