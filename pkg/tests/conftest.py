"""Shared test utilities: finite-difference oracles and tolerances."""

from __future__ import annotations

import numpy as np

from saferiver import ndmath as nd


def central_diff(f, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Per-coordinate central finite difference of a scalar-valued f."""
    g = np.zeros_like(x, dtype=np.float64)
    flat = x.reshape(-1)
    gf = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f(x)
        flat[i] = orig - h
        fm = f(x)
        flat[i] = orig
        gf[i] = (fp - fm) / (2.0 * h)
    return g


def grad_close(analytic: np.ndarray, numeric: np.ndarray, rtol: float = 1e-4) -> bool:
    """Mixed relative/absolute agreement check suitable for FD noise."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1.0)
    return bool(np.all(np.abs(a - n) <= rtol * denom + 1e-8))


def tape_grad(build, params: list[nd.Tensor]) -> list[np.ndarray]:
    """Run build() under a fresh tape and return gradients for params."""
    nd.zero_grads(params)
    tape = nd.Tape()
    with tape:
        loss = build()
    return nd.backward(tape, loss, params)
