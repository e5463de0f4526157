"""Dense float64 tensors with tape-based reverse-mode differentiation.

All arithmetic is double precision.  A forward pass runs eagerly; when a
Tape is active, every primitive records itself so `backward` can replay
the chain rule in reverse.  Tapes are single-writer and thread-local, so
independent tapes may run in parallel threads without coordination.
"""

from __future__ import annotations

import threading
from typing import Callable, Optional, Sequence

import numpy as np

_ACTIVE = threading.local()


def _active_tape() -> Optional["Tape"]:
    stack = getattr(_ACTIVE, "stack", None)
    return stack[-1] if stack else None


class Tensor:
    """A dense float64 array, optionally a differentiable leaf."""

    __slots__ = ("value", "requires_grad", "grad", "name")

    def __init__(self, value, requires_grad: bool = False, name: str | None = None):
        self.value = np.asarray(value, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    @property
    def size(self) -> int:
        return self.value.size

    def item(self) -> float:
        return float(self.value)

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.value.shape}{tag})"

    # Arithmetic sugar; scalars are folded in as constants.
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(_as_tensor(other), self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return neg(self)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


class Tape:
    """Ordered record of primitive applications for one forward pass.

    Node k lists the ids of its input nodes, all < k, so a single reverse
    sweep visits every node exactly once.  Use as a context manager::

        with Tape() as tape:
            loss = mse(model(x), y)
        backward(tape, loss, params)
    """

    def __init__(self):
        self.nodes: list[tuple[Tensor, tuple[int, ...], Optional[Callable]]] = []
        self._ids: dict[int, int] = {}  # id(tensor) -> node index

    def __enter__(self) -> "Tape":
        stack = getattr(_ACTIVE, "stack", None)
        if stack is None:
            stack = _ACTIVE.stack = []
        stack.append(self)
        return self

    def __exit__(self, *exc) -> None:
        _ACTIVE.stack.pop()

    def node_id(self, t: Tensor) -> Optional[int]:
        return self._ids.get(id(t))

    def watch(self, t: Tensor) -> int:
        """Register a leaf tensor; returns its node id."""
        nid = self._ids.get(id(t))
        if nid is None:
            nid = len(self.nodes)
            self.nodes.append((t, (), None))
            self._ids[id(t)] = nid
        return nid

    def record(self, out: Tensor, inputs: Sequence[Tensor], vjp: Callable) -> None:
        parent_ids = tuple(self.watch(t) for t in inputs)
        nid = len(self.nodes)
        self.nodes.append((out, parent_ids, vjp))
        self._ids[id(out)] = nid


def _record(out_value: np.ndarray, inputs: Sequence[Tensor], vjp: Callable) -> Tensor:
    """Wrap a primitive's result, recording it if a tape is tracking any input."""
    out = Tensor(out_value)
    tape = _active_tape()
    if tape is not None and any(
        t.requires_grad or tape.node_id(t) is not None for t in inputs
    ):
        tracked = [t for t in inputs if t.requires_grad or tape.node_id(t) is not None]
        tape.record(out, tracked, vjp)
    return out


def backward(tape: Tape, loss: Tensor, params: Sequence[Tensor] | None = None):
    """Reverse sweep: accumulate d(loss)/d(leaf) for every leaf on the tape.

    Sets ``t.grad`` on each leaf with requires_grad.  When ``params`` is
    given, returns the gradient list aligned with it; parameters the loss
    never touched get zeros.
    """
    if loss.value.shape != ():
        raise ValueError(f"loss must be scalar, got shape {loss.value.shape}")
    loss_id = tape.node_id(loss)
    if loss_id is None:
        raise ValueError("loss is not a node on this tape (forward pass incomplete?)")

    grads: dict[int, np.ndarray] = {loss_id: np.ones((), dtype=np.float64)}
    for nid in range(len(tape.nodes) - 1, -1, -1):
        g = grads.pop(nid, None)
        if g is None:
            continue
        tensor, parent_ids, vjp = tape.nodes[nid]
        if vjp is None:
            if tensor.requires_grad:
                tensor.grad = np.asarray(g, dtype=np.float64).reshape(tensor.value.shape)
            continue
        parent_grads = vjp(g)
        for pid, pg in zip(parent_ids, parent_grads):
            if pg is None:
                continue
            if pid >= nid:
                raise ValueError("tape is not topologically ordered")
            acc = grads.get(pid)
            grads[pid] = pg if acc is None else acc + pg

    # Leaves registered on the tape but never reached by the sweep get zeros.
    for tensor, parent_ids, vjp in tape.nodes:
        if vjp is None and tensor.requires_grad and tensor.grad is None:
            tensor.grad = np.zeros_like(tensor.value)

    if params is not None:
        out = []
        for p in params:
            out.append(p.grad if p.grad is not None else np.zeros_like(p.value))
        return out
    return None


def zero_grads(params: Sequence[Tensor]) -> None:
    for p in params:
        p.grad = None


def _check_same_shape(a: Tensor, b: Tensor, op: str) -> None:
    if a.value.shape != b.value.shape:
        raise ValueError(f"{op}: shape mismatch {a.value.shape} vs {b.value.shape}")


# ---------------------------------------------------------------------------
# Elementwise primitives.  Scalar (python float) operands are constants.
# ---------------------------------------------------------------------------

def add(a: Tensor, b) -> Tensor:
    if not isinstance(b, Tensor):
        c = float(b)
        return _record(a.value + c, [a], lambda g: (g,))
    _check_same_shape(a, b, "add")
    return _record(a.value + b.value, [a, b], lambda g: (g, g))


def sub(a: Tensor, b) -> Tensor:
    if not isinstance(b, Tensor):
        c = float(b)
        return _record(a.value - c, [a], lambda g: (g,))
    _check_same_shape(a, b, "sub")
    return _record(a.value - b.value, [a, b], lambda g: (g, -g))


def mul(a: Tensor, b) -> Tensor:
    if not isinstance(b, Tensor):
        c = float(b)
        return _record(a.value * c, [a], lambda g: (g * c,))
    _check_same_shape(a, b, "mul")
    av, bv = a.value, b.value
    return _record(av * bv, [a, b], lambda g: (g * bv, g * av))


def neg(a: Tensor) -> Tensor:
    return _record(-a.value, [a], lambda g: (-g,))


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.value)
    return _record(out, [a], lambda g: (g * out,))


def log(a: Tensor) -> Tensor:
    av = a.value
    return _record(np.log(av), [a], lambda g: (g / av,))


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.value)
    return _record(out, [a], lambda g: (g * (1.0 - out * out),))


def sigmoid(a: Tensor) -> Tensor:
    # 1/(1+e^-x) via tanh for symmetric stability
    out = 0.5 * (np.tanh(0.5 * a.value) + 1.0)
    return _record(out, [a], lambda g: (g * out * (1.0 - out),))


def clamp(a: Tensor, lo: float | None, hi: float | None) -> Tensor:
    av = a.value
    out = np.clip(av, lo, hi)
    inside = np.ones_like(av)
    if lo is not None:
        inside = inside * (av >= lo)
    if hi is not None:
        inside = inside * (av <= hi)
    return _record(out, [a], lambda g: (g * inside,))


def minimum(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape(a, b, "minimum")
    take_a = a.value <= b.value  # ties route to the first argument
    out = np.where(take_a, a.value, b.value)
    return _record(out, [a, b], lambda g: (g * take_a, g * (~take_a)))


def maximum(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape(a, b, "maximum")
    take_a = a.value >= b.value
    out = np.where(take_a, a.value, b.value)
    return _record(out, [a, b], lambda g: (g * take_a, g * (~take_a)))


# ---------------------------------------------------------------------------
# Shape, reduction and indexing primitives.
# ---------------------------------------------------------------------------

def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    old = a.value.shape
    return _record(a.value.reshape(shape), [a], lambda g: (g.reshape(old),))


def sum_all(a: Tensor) -> Tensor:
    shape = a.value.shape
    return _record(np.sum(a.value), [a], lambda g: (np.broadcast_to(g, shape).copy(),))


def mean_all(a: Tensor) -> Tensor:
    n = a.value.size
    shape = a.value.shape
    return _record(
        np.sum(a.value) / n, [a], lambda g: (np.broadcast_to(g / n, shape).copy(),)
    )


def sum_last(a: Tensor) -> Tensor:
    """Sum over the last axis: (..., K) -> (...)."""
    k = a.value.shape[-1]
    return _record(
        np.sum(a.value, axis=-1),
        [a],
        lambda g: (np.repeat(g[..., None], k, axis=-1),),
    )


def take_last(a: Tensor, idx: np.ndarray) -> Tensor:
    """Row-wise gather: a (N, K) with idx (N,) ints -> (N,)."""
    if a.value.ndim != 2:
        raise ValueError("take_last expects a 2-D tensor")
    idx = np.asarray(idx, dtype=np.intp)
    rows = np.arange(a.value.shape[0])
    out = a.value[rows, idx]

    def vjp(g):
        gi = np.zeros_like(a.value)
        gi[rows, idx] = g
        return (gi,)

    return _record(out, [a], vjp)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.value.ndim != 2 or b.value.ndim != 2:
        raise ValueError("matmul expects 2-D tensors")
    av, bv = a.value, b.value
    return _record(av @ bv, [a, b], lambda g: (g @ bv.T, av.T @ g))


def affine(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """x (N, I) @ w (I, O) + b (O,) with the bias broadcast over rows."""
    xv, wv = x.value, w.value
    out = xv @ wv + b.value
    return _record(
        out, [x, w, b], lambda g: (g @ wv.T, xv.T @ g, np.sum(g, axis=0))
    )


# ---------------------------------------------------------------------------
# Softmax family (numerically stabilized by max subtraction).
# ---------------------------------------------------------------------------

def log_softmax_last(a: Tensor) -> Tensor:
    av = a.value
    shifted = av - np.max(av, axis=-1, keepdims=True)
    lse = np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))
    out = shifted - lse
    p = np.exp(out)
    return _record(
        out, [a], lambda g: (g - p * np.sum(g, axis=-1, keepdims=True),)
    )


def softmax_last(a: Tensor) -> Tensor:
    av = a.value
    shifted = av - np.max(av, axis=-1, keepdims=True)
    e = np.exp(shifted)
    p = e / np.sum(e, axis=-1, keepdims=True)
    return _record(
        p, [a], lambda g: (p * (g - np.sum(g * p, axis=-1, keepdims=True)),)
    )
