"""Scalar-loop reference for grouped attention.

Plain Python loops over float64 values, no tensor operations. Used by the
invariant suite and the tests as an independent oracle for both the layer
output and the multiply-accumulate counts behind ``attention_flops``.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Optional

import numpy as np

from .layer import AttentionWeights, ScaleMode
from .scheme import GroupingScheme


def _project(
    x_row: list[float], w: np.ndarray, b: np.ndarray, cols: range, macs: Counter, key: str
) -> list[float]:
    out = []
    for c in cols:
        acc = 0.0
        for r, xv in enumerate(x_row):
            acc += xv * float(w[r, c])
            macs[key] += 1
        out.append(acc + float(b[c]))
    return out


def _blocks(
    rows: list[list[float]], w: np.ndarray, b: np.ndarray, groups: int, hd: int, macs: Counter
) -> list[list[list[float]]]:
    return [
        [_project(r, w, b, range(g * hd, (g + 1) * hd), macs, "projection") for r in rows]
        for g in range(groups)
    ]


def loop_attention(
    x: np.ndarray,
    w: AttentionWeights,
    s: GroupingScheme,
    scale_mode: ScaleMode = ScaleMode.HEAD_DIM,
    macs: Optional[Counter] = None,
) -> np.ndarray:
    """Grouped attention of ``x`` (``[B, N, d]``) computed element by element.

    If ``macs`` is given it is incremented per multiply-accumulate under the keys
    ``projection``, ``score``, ``weighted_sum`` and ``output_proj``.
    """
    counter: Counter = macs if macs is not None else Counter()
    w_q, b_q, w_k, b_k, w_v, b_v, w_o, b_o = (t.numpy().astype(np.float64) for t in w.tensors())
    hd = s.head_dim
    scale = scale_mode.factor(s)
    batch, n_tok, _ = x.shape
    out = np.zeros((batch, n_tok, s.d), dtype=np.float64)

    for bi in range(batch):
        rows = [[float(v) for v in x[bi, n]] for n in range(n_tok)]
        q = _blocks(rows, w_q, b_q, s.g_q, hd, counter)
        k = _blocks(rows, w_k, b_k, s.g_kv, hd, counter)
        v = _blocks(rows, w_v, b_v, s.g_kv, hd, counter)

        merged = [[0.0] * s.d for _ in range(n_tok)]
        for t, (i, j) in enumerate(s.pairing):
            for n in range(n_tok):
                scores = []
                for m in range(n_tok):
                    acc = 0.0
                    for c in range(hd):
                        acc += q[i][n][c] * k[j][m][c]
                        counter["score"] += 1
                    scores.append(acc * scale)
                top = max(scores)
                exps = [math.exp(sc - top) for sc in scores]
                total = sum(exps)
                probs = [e / total for e in exps]
                for c in range(hd):
                    acc = 0.0
                    for m in range(n_tok):
                        acc += probs[m] * v[j][m][c]
                        counter["weighted_sum"] += 1
                    merged[n][t * hd + c] = acc

        for n in range(n_tok):
            out[bi, n] = _project(merged[n], w_o, b_o, range(s.d), counter, "output_proj")
    return out
