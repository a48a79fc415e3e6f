"""A small reverse-mode automatic differentiation engine over float64 arrays.

Tensors are rank 0, 1 or 2. Every op checks its output for NaN/Inf and
raises :class:`~structgnn.errors.NonFiniteValue` immediately.

    >>> x = Tensor([[3.0]], requires_grad=True)
    >>> y = square(x).sum()
    >>> y.backward()
    >>> float(x.grad[0, 0])
    6.0
"""

from __future__ import annotations

from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import NonFiniteValue, ShapeMismatch

_Backward = Callable[[np.ndarray], Sequence["np.ndarray | None"]]

_GRAD_ENABLED = True


@contextmanager
def no_grad() -> Iterator[None]:
    """Evaluate without recording the tape (inference only)."""
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "op")

    def __init__(self, data, requires_grad: bool = False, _parents=(), _backward=None, op: str = ""):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim > 2:
            raise ShapeMismatch(f"tensors are limited to rank 2, got shape {arr.shape}")
        self.data = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = _parents
        self._backward: _Backward | None = _backward
        self.op = op

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, op={self.op or 'leaf'}, requires_grad={self.requires_grad})"

    def backward(self, grad: np.ndarray | float | None = None) -> None:
        """Accumulate d(self)/d(leaf) into ``.grad`` of every leaf needing it."""
        if grad is None:
            if self.data.size != 1:
                raise ShapeMismatch("backward() without a seed gradient needs a scalar output")
            grad = np.ones_like(self.data)
        grad = np.broadcast_to(np.asarray(grad, dtype=np.float64), self.shape).copy()

        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen or not node.requires_grad:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in seen:
                    stack.append((p, False))

        grads: dict[int, np.ndarray] = {id(self): grad}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                node.grad = g if node.grad is None else node.grad + g
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                if not np.all(np.isfinite(pg)):
                    raise NonFiniteValue(f"non-finite gradient flowing out of {node.op}")
                prev = grads.get(id(parent))
                grads[id(parent)] = pg if prev is None else prev + pg

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(as_tensor(other), self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other: float):
        return mul(self, 1.0 / float(other))

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def sum(self):
        return sum_all(self)

    def mean(self):
        return mean_all(self)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _result(data: np.ndarray, parents: tuple[Tensor, ...], backward: _Backward, op: str) -> Tensor:
    if not np.all(np.isfinite(data)):
        raise NonFiniteValue(f"non-finite value produced by {op}")
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        return Tensor(data, True, parents, backward, op)
    return Tensor(data, op=op)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(a: Tensor, b: Tensor, op: str) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeMismatch(f"{op}: cannot broadcast {a.shape} with {b.shape}") from None


def add(a, b) -> Tensor:
    """Elementwise sum; a (1, m) or (m,) operand broadcasts over rows."""
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "add")
    return _result(
        a.data + b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
        "add",
    )


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "sub")
    return _result(
        a.data - b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)),
        "sub",
    )


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "mul")
    return _result(
        a.data * b.data,
        (a, b),
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
        "mul",
    )


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"matmul: {a.shape} @ {b.shape}")
    return _result(
        a.data @ b.data,
        (a, b),
        lambda g: (g @ b.data.T, a.data.T @ g),
        "matmul",
    )


def relu(x) -> Tensor:
    x = as_tensor(x)
    mask = x.data > 0
    return _result(np.where(mask, x.data, 0.0), (x,), lambda g: (g * mask,), "relu")


def square(x) -> Tensor:
    x = as_tensor(x)
    return _result(x.data * x.data, (x,), lambda g: (2.0 * x.data * g,), "square")


def sqrt(x) -> Tensor:
    """Square root; the gradient at exactly 0 is taken as 0."""
    x = as_tensor(x)
    if np.any(x.data < 0):
        raise NonFiniteValue("sqrt of a negative value")
    out = np.sqrt(x.data)

    def backward(g):
        safe = np.where(out > 0, out, 1.0)
        return (np.where(out > 0, g / (2.0 * safe), 0.0),)

    return _result(out, (x,), backward, "sqrt")


def concat(tensors: Sequence[Tensor], axis: int = 1) -> Tensor:
    """Concatenate rank-2 tensors along the feature axis (or rows with axis=0)."""
    ts = [as_tensor(t) for t in tensors]
    if not ts:
        raise ShapeMismatch("concat of nothing")
    if any(t.data.ndim != 2 for t in ts):
        raise ShapeMismatch("concat needs rank-2 tensors")
    other = 1 - axis
    if len({t.shape[other] for t in ts}) != 1:
        raise ShapeMismatch(f"concat: mismatched shapes {[t.shape for t in ts]}")
    sizes = [t.shape[axis] for t in ts]
    cuts = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.split(g, cuts, axis=axis))

    return _result(np.concatenate([t.data for t in ts], axis=axis), tuple(ts), backward, "concat")


def sum_rows(x) -> Tensor:
    """Column sums as a (1, m) tensor."""
    x = as_tensor(x)
    if x.data.ndim != 2:
        raise ShapeMismatch("sum_rows needs a rank-2 tensor")
    return _result(
        x.data.sum(axis=0, keepdims=True),
        (x,),
        lambda g: (np.broadcast_to(g, x.shape).copy(),),
        "sum_rows",
    )


def mean_rows(x) -> Tensor:
    """Column means as a (1, m) tensor; each row receives 1/n of the gradient."""
    x = as_tensor(x)
    if x.data.ndim != 2 or x.shape[0] == 0:
        raise ShapeMismatch("mean_rows needs a non-empty rank-2 tensor")
    n = x.shape[0]
    return _result(
        x.data.mean(axis=0, keepdims=True),
        (x,),
        lambda g: (np.broadcast_to(g / n, x.shape).copy(),),
        "mean_rows",
    )


def sum_all(x) -> Tensor:
    x = as_tensor(x)
    return _result(np.asarray(x.data.sum()), (x,), lambda g: (np.full(x.shape, float(g)),), "sum")


def mean_all(x) -> Tensor:
    x = as_tensor(x)
    n = x.data.size
    return _result(
        np.asarray(x.data.mean()), (x,), lambda g: (np.full(x.shape, float(g) / n),), "mean"
    )


def gather_rows(x, index: np.ndarray) -> Tensor:
    """Rows ``x[index]``; gradients scatter-add back."""
    x = as_tensor(x)
    index = np.asarray(index, dtype=np.int64)
    n = x.shape[0]

    def backward(g):
        return (_segment_matrix(index, n) @ g,)

    return _result(x.data[index], (x,), backward, "gather_rows")


def _segment_matrix(segment_ids: np.ndarray, n_segments: int) -> sp.csr_matrix:
    m = len(segment_ids)
    return sp.csr_matrix(
        (np.ones(m), (segment_ids, np.arange(m))), shape=(n_segments, m)
    )


def segment_sum(x, segment_ids: np.ndarray, n_segments: int) -> Tensor:
    """Sum rows of ``x`` into ``n_segments`` buckets given by ``segment_ids``."""
    x = as_tensor(x)
    segment_ids = np.asarray(segment_ids, dtype=np.int64)
    if x.data.ndim != 2 or len(segment_ids) != x.shape[0]:
        raise ShapeMismatch("segment_sum: one segment id per row required")
    mat = _segment_matrix(segment_ids, n_segments)
    out = np.asarray(mat @ x.data) if x.shape[0] else np.zeros((n_segments, x.shape[1]))

    def backward(g):
        return (g[segment_ids],)

    return _result(out, (x,), backward, "segment_sum")


def segment_mean(x, segment_ids: np.ndarray, n_segments: int) -> Tensor:
    counts = np.bincount(np.asarray(segment_ids, dtype=np.int64), minlength=n_segments)
    if np.any(counts == 0):
        raise ShapeMismatch("segment_mean: empty segment")
    return mul(segment_sum(x, segment_ids, n_segments), (1.0 / counts)[:, None])


# -- parameters and optimization ------------------------------------------------


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)


def adam_step(params: Sequence[np.ndarray], grads: Sequence[np.ndarray], state: AdamState) -> None:
    """One bias-corrected Adam update, in place on ``params`` and ``state``."""
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if g.shape != p.shape:
            raise ShapeMismatch(f"gradient shape {g.shape} != parameter shape {p.shape}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteValue("non-finite gradient passed to adam_step")
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * g * g
        m_hat = m / (1 - b1**t)
        v_hat = v / (1 - b2**t)
        p -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
        if not np.all(np.isfinite(p)):
            raise NonFiniteValue("parameters became non-finite")


class Adam:
    def __init__(self, params: Sequence[Tensor], lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.state = AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps)

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None

    def step(self) -> None:
        grads = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in self.params]
        adam_step([p.data for p in self.params], grads, self.state)


def grad_check(
    f: Callable[[], Tensor], params: Sequence[Tensor], h: float = 1e-5, floor: float = 1e-8
) -> float:
    """Largest relative error between tape gradients and central differences.

    The relative error of one element is ``|a - n| / max(|a|, |n|, floor)``,
    where ``floor`` keeps exactly-zero gradients from dividing by zero.
    """
    for p in params:
        p.grad = None
    f().backward()
    analytic = [p.grad.copy() if p.grad is not None else np.zeros_like(p.data) for p in params]
    worst = 0.0
    for p, a in zip(params, analytic):
        flat = p.data.reshape(-1)
        a_flat = a.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = f().item()
            flat[i] = orig - h
            down = f().item()
            flat[i] = orig
            num = (up - down) / (2 * h)
            denom = max(abs(a_flat[i]), abs(num), floor)
            worst = max(worst, abs(a_flat[i] - num) / denom)
    return worst
