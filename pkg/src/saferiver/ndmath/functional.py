"""Math operations for the encoder and policy/value networks.

Everything here composes the primitives in :mod:`tensor`, so gradients
flow automatically.  Natural logarithms throughout.
"""

from __future__ import annotations

import numpy as np

from .tensor import (
    Tensor,
    _record,
    exp,
    log_softmax_last,
    mean_all,
    mul,
    sub,
    sum_all,
    sum_last,
)


def softmax(logits: Tensor | np.ndarray) -> np.ndarray:
    """Probability vector for a 1-D logits vector (plain numpy, no tape)."""
    v = logits.value if isinstance(logits, Tensor) else np.asarray(logits, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError("softmax expects a vector")
    shifted = v - np.max(v)
    e = np.exp(shifted)
    return e / np.sum(e)


def categorical_kl(p_logits: Tensor, q_logits: Tensor) -> Tensor:
    """KL(P || Q) between the categoricals defined by two logit vectors."""
    if p_logits.value.shape != q_logits.value.shape:
        raise ValueError("categorical_kl: length mismatch")
    lsp = log_softmax_last(p_logits)
    lsq = log_softmax_last(q_logits)
    return sum_all(mul(exp(lsp), sub(lsp, lsq)))


def categorical_kl_rows(p_logits: Tensor, q_logits: Tensor) -> Tensor:
    """Row-wise KL(P || Q) for batched logits (N, K) -> (N,)."""
    if p_logits.value.shape != q_logits.value.shape:
        raise ValueError("categorical_kl_rows: shape mismatch")
    lsp = log_softmax_last(p_logits)
    lsq = log_softmax_last(q_logits)
    return sum_last(mul(exp(lsp), sub(lsp, lsq)))


def gaussian_kl_unit(mu: Tensor, logvar: Tensor) -> Tensor:
    """KL(N(mu, diag exp(logvar)) || N(0, I)), summed over components."""
    if mu.value.shape != logvar.value.shape:
        raise ValueError("gaussian_kl_unit: length mismatch")
    inner = sub(sub(mul(mu, mu) + exp(logvar), 1.0), logvar)
    return mul(sum_all(inner), 0.5)


def mse(a: Tensor, b: Tensor) -> Tensor:
    """Mean of squared elementwise differences."""
    if a.value.shape != b.value.shape:
        raise ValueError(f"mse: shape mismatch {a.value.shape} vs {b.value.shape}")
    d = sub(a, b)
    return mean_all(mul(d, d))


def entropy_rows(logits: Tensor) -> Tensor:
    """Row-wise Shannon entropy of categorical logits (N, K) -> (N,)."""
    ls = log_softmax_last(logits)
    return sum_last(mul(exp(ls), ls)) * -1.0


# ---------------------------------------------------------------------------
# Convolution / upsampling primitives (NCHW layout).
# ---------------------------------------------------------------------------

def _im2col(x: np.ndarray, kh: int, kw: int, stride: int, pad: int):
    n, c, h, w = x.shape
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (w + 2 * pad - kw) // stride + 1
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
    s0, s1, s2, s3 = xp.strides
    win = np.lib.stride_tricks.as_strided(
        xp,
        (n, c, oh, ow, kh, kw),
        (s0, s1, s2 * stride, s3 * stride, s2, s3),
        writeable=False,
    )
    cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(n, oh * ow, c * kh * kw)
    return cols, oh, ow


def _col2im(dcols, xshape, kh, kw, stride, pad, oh, ow):
    n, c, h, w = xshape
    dxp = np.zeros((n, c, h + 2 * pad, w + 2 * pad))
    dwin = dcols.reshape(n, oh, ow, c, kh, kw).transpose(0, 3, 1, 2, 4, 5)
    for i in range(kh):
        for j in range(kw):
            dxp[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride] += (
                dwin[:, :, :, :, i, j]
            )
    if pad:
        return dxp[:, :, pad:-pad, pad:-pad]
    return dxp


def conv2d(x: Tensor, w: Tensor, b: Tensor, stride: int = 1, pad: int = 0) -> Tensor:
    """x (N,C,H,W) * w (F,C,KH,KW) + b (F,) -> (N,F,OH,OW)."""
    xv, wv = x.value, w.value
    f, c, kh, kw = wv.shape
    if xv.ndim != 4 or xv.shape[1] != c:
        raise ValueError(f"conv2d: input {xv.shape} incompatible with kernel {wv.shape}")
    cols, oh, ow = _im2col(xv, kh, kw, stride, pad)
    wmat = wv.reshape(f, c * kh * kw)
    out = cols @ wmat.T + b.value
    out = out.transpose(0, 2, 1).reshape(xv.shape[0], f, oh, ow)

    def vjp(g):
        n = xv.shape[0]
        gm = g.transpose(0, 2, 3, 1).reshape(n, oh * ow, f)
        dw = np.einsum("nkf,nkc->fc", gm, cols).reshape(wv.shape)
        db = np.sum(gm, axis=(0, 1))
        dcols = gm @ wmat
        dx = _col2im(dcols, xv.shape, kh, kw, stride, pad, oh, ow)
        return dx, dw, db

    return _record(out, [x, w, b], vjp)


def upsample2(x: Tensor) -> Tensor:
    """Nearest-neighbour 2x upsampling: (N,C,H,W) -> (N,C,2H,2W)."""
    xv = x.value
    n, c, h, w = xv.shape
    out = np.repeat(np.repeat(xv, 2, axis=2), 2, axis=3)

    def vjp(g):
        return (g.reshape(n, c, h, 2, w, 2).sum(axis=(3, 5)),)

    return _record(out, [x], vjp)
