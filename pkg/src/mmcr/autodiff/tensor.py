"""Reverse-mode automatic differentiation over numpy arrays.

Every op builds a node holding its parents and a closure that maps the
output gradient to one gradient per parent. ``Tensor.backward`` walks the
graph in reverse topological order and accumulates into the ``grad`` of
leaf tensors that require it.
"""

from __future__ import annotations

import contextlib
from typing import Callable, Sequence

import numpy as np

DEFAULT_DTYPE = np.float32

_checked = False


class ShapeError(ValueError):
    pass


class NonFiniteError(FloatingPointError):
    pass


def set_checked(flag: bool) -> None:
    """Trap NaN/Inf at every op boundary when ``flag`` is true."""
    global _checked
    _checked = bool(flag)


@contextlib.contextmanager
def checked(flag: bool = True):
    prev = _checked
    set_checked(flag)
    try:
        yield
    finally:
        set_checked(prev)


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward")
    __array_priority__ = 100  # numpy defers to our reflected operators

    def __init__(self, data, requires_grad: bool = False, dtype=None, name: str | None = None):
        arr = np.asarray(data, dtype=dtype)
        if arr.dtype.kind != "f":
            arr = arr.astype(DEFAULT_DTYPE)
        self.data = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable | None = None

    # -- basic properties -------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def values(self) -> np.ndarray:
        """Flat row-major view of the data."""
        return self.data.reshape(-1)

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> Tensor:
        return Tensor(self.data)

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{tag}, requires_grad={self.requires_grad})"

    def __len__(self) -> int:
        return len(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    # -- graph traversal --------------------------------------------------

    def backward(self, grad=None) -> None:
        if grad is None:
            if self.data.size != 1:
                raise ShapeError(f"backward: implicit gradient needs a scalar, got shape {self.shape}")
            grad = np.ones_like(self.data)
        grad = np.asarray(grad, dtype=self.dtype)

        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
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
                if node.requires_grad:
                    node.grad = g.copy() if node.grad is None else node.grad + g
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                grads[key] = pg if key not in grads else grads[key] + pg

    # -- operator sugar ---------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    def __getitem__(self, index):
        return index_select(self, index)

    def sum(self, axis=None, keepdims: bool = False) -> Tensor:
        return sum_(self, axis, keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> Tensor:
        return mean(self, axis, keepdims)

    def reshape(self, *shape) -> Tensor:
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def transpose(self, *axes) -> Tensor:
        return transpose(self, axes or None)

    @property
    def T(self) -> Tensor:
        return transpose(self)


def as_tensor(x, like: Tensor | None = None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    dtype = like.dtype if like is not None else None
    return Tensor(np.asarray(x, dtype=dtype))


def _result(data: np.ndarray, op: str, parents: Sequence[Tensor], backward: Callable) -> Tensor:
    if _checked and not np.all(np.isfinite(data)):
        raise NonFiniteError(f"{op}: produced non-finite values")
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    lead = grad.ndim - len(shape)
    if lead:
        grad = grad.sum(axis=tuple(range(lead)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: incompatible shapes {a.shape} and {b.shape}") from None


def _pair(a, b) -> tuple[Tensor, Tensor]:
    if isinstance(a, Tensor):
        return a, as_tensor(b, like=a)
    b = as_tensor(b)
    return as_tensor(a, like=b), b


# -- elementwise arithmetic -------------------------------------------------


def add(a, b) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_shape("add", a, b)
    return _result(
        a.data + b.data, "add", (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def sub(a, b) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_shape("sub", a, b)
    return _result(
        a.data - b.data, "sub", (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)),
    )


def mul(a, b) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_shape("mul", a, b)
    return _result(
        a.data * b.data, "mul", (a, b),
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
    )


def div(a, b) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_shape("div", a, b)
    out = a.data / b.data
    return _result(
        out, "div", (a, b),
        lambda g: (_unbroadcast(g / b.data, a.shape), _unbroadcast(-g * out / b.data, b.shape)),
    )


def neg(a: Tensor) -> Tensor:
    return _result(-a.data, "neg", (a,), lambda g: (-g,))


# -- linear algebra and shape ops -------------------------------------------


def matmul(a, b) -> Tensor:
    a, b = _pair(a, b)
    if a.ndim == 0 or b.ndim == 0:
        raise ShapeError(f"matmul: scalar operands not allowed, got {a.shape} and {b.shape}")
    if a.ndim == 1:
        return reshape(matmul(reshape(a, (1, -1)), b), b.shape[:-2] + b.shape[-1:])
    if b.ndim == 1:
        return reshape(matmul(a, reshape(b, (-1, 1))), a.shape[:-1])
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul: shapes {a.shape} and {b.shape} not aligned")
    try:
        out = np.matmul(a.data, b.data)
    except ValueError:
        raise ShapeError(f"matmul: batch dimensions of {a.shape} and {b.shape} do not broadcast") from None

    def backward(g):
        ga = np.matmul(g, np.swapaxes(b.data, -1, -2)) if a.requires_grad else None
        gb = np.matmul(np.swapaxes(a.data, -1, -2), g) if b.requires_grad else None
        return (
            None if ga is None else _unbroadcast(ga, a.shape),
            None if gb is None else _unbroadcast(gb, b.shape),
        )

    return _result(out, "matmul", (a, b), backward)


def transpose(a: Tensor, axes=None) -> Tensor:
    axes = tuple(axes) if axes is not None else tuple(reversed(range(a.ndim)))
    if sorted(axes) != list(range(a.ndim)):
        raise ShapeError(f"transpose: axes {axes} invalid for shape {a.shape}")
    inverse = np.argsort(axes)
    return _result(np.transpose(a.data, axes), "transpose", (a,), lambda g: (np.transpose(g, inverse),))


def reshape(a: Tensor, shape) -> Tensor:
    try:
        out = a.data.reshape(shape)
    except ValueError:
        raise ShapeError(f"reshape: cannot reshape {a.shape} into {tuple(shape)}") from None
    return _result(out, "reshape", (a,), lambda g: (g.reshape(a.shape),))


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise ShapeError("concat: no inputs")
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        raise ShapeError(f"concat: incompatible shapes {[t.shape for t in tensors]} on axis {axis}") from None
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return _result(out, "concat", tensors, backward)


def index_select(a: Tensor, index) -> Tensor:
    """Basic or advanced indexing; repeated indices accumulate in backward."""
    if isinstance(index, Tensor):
        index = index.data
    out = a.data[index]

    def backward(g):
        full = np.zeros_like(a.data)
        np.add.at(full, index, g)
        return (full,)

    return _result(np.array(out, copy=True), "slice", (a,), backward)


slice_ = index_select


def embedding(table: Tensor, ids: np.ndarray) -> Tensor:
    """Row lookup ``table[ids]``; faster backward than generic indexing."""
    ids = np.asarray(ids, dtype=np.int64)
    out = table.data[ids]

    def backward(g):
        full = np.zeros_like(table.data)
        flat = g.reshape(-1, table.shape[-1])
        np.add.at(full, ids.reshape(-1), flat)
        return (full,)

    return _result(out, "embedding", (table,), backward)


# -- reductions ---------------------------------------------------------------


def _norm_axis(axis, ndim):
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(ax % ndim for ax in axis)


def sum_(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axes = _norm_axis(axis, a.ndim)
    out = a.data.sum(axis=axes, keepdims=keepdims)

    def backward(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g, a.shape).copy(),)

    return _result(np.asarray(out), "sum", (a,), backward)


def mean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axes = _norm_axis(axis, a.ndim)
    count = int(np.prod([a.shape[ax] for ax in axes])) if axes else 1
    return sum_(a, axis, keepdims) * (1.0 / count)


# -- nonlinearities -------------------------------------------------------------


def relu(a: Tensor) -> Tensor:
    out = np.maximum(a.data, 0)
    return _result(out, "relu", (a,), lambda g: (g * (a.data > 0),))


def clip(a: Tensor, lo: float, hi: float) -> Tensor:
    """Clamp to [lo, hi]; gradient passes only where the input was inside."""
    out = np.clip(a.data, lo, hi)
    inside = (a.data >= lo) & (a.data <= hi)
    return _result(out, "clip", (a,), lambda g: (g * inside,))


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.data)
    return _result(out, "tanh", (a,), lambda g: (g * (1 - out * out),))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # tanh form never overflows, unlike 1 / (1 + exp(-x)).
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def sigmoid(a: Tensor) -> Tensor:
    out = _sigmoid(a.data)
    return _result(out, "sigmoid", (a,), lambda g: (g * out * (1 - out),))


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.data)
    return _result(out, "exp", (a,), lambda g: (g * out,))


def log(a: Tensor) -> Tensor:
    if np.any(a.data <= 0):
        raise ValueError("log: input must be strictly positive")
    return _result(np.log(a.data), "log", (a,), lambda g: (g / a.data,))


def sqrt(a: Tensor) -> Tensor:
    out = np.sqrt(a.data)
    return _result(out, "sqrt", (a,), lambda g: (g * 0.5 / out,))


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        return (out * (g - (g * out).sum(axis=axis, keepdims=True)),)

    return _result(out, "softmax", (a,), backward)


def log_softmax(a: Tensor, axis: int = -1) -> Tensor:
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - lse
    probs = np.exp(out)

    def backward(g):
        return (g - probs * g.sum(axis=axis, keepdims=True),)

    return _result(out, "log_softmax", (a,), backward)


# -- composites -----------------------------------------------------------------

NORM_EPS = 1e-12


def l2_normalize(a: Tensor, axis: int = -1) -> Tensor:
    sq = sum_(a * a, axis=axis, keepdims=True)
    if np.any(np.sqrt(sq.data) < NORM_EPS):
        raise ValueError("l2_normalize: zero-norm vector")
    return a / sqrt(sq)


def cosine_sim(a: Tensor, b: Tensor) -> Tensor:
    """Cosine similarity of two vectors (scalar tensor)."""
    a, b = _pair(a, b)
    if a.shape != b.shape or a.ndim != 1:
        raise ShapeError(f"cosine_sim: need two equal-length vectors, got {a.shape} and {b.shape}")
    na = sqrt(sum_(a * a))
    nb = sqrt(sum_(b * b))
    if na.item() < NORM_EPS or nb.item() < NORM_EPS:
        raise ValueError("cosine_sim: zero-norm vector")
    return sum_(a * b) / (na * nb)


# -- recurrent primitive ----------------------------------------------------------


def gru(x: Tensor, mask: np.ndarray, W: Tensor, U: Tensor, b: Tensor, reverse: bool = False) -> Tensor:
    """Run a GRU over a padded batch of sequences.

    x: (B, T, E) inputs; mask: (B, T) with 1 on real positions; W: (E, 3H),
    U: (H, 3H), b: (3H,) with gate blocks ordered [update, reset, candidate].

        z = sigmoid(x W_z + h U_z + b_z)
        r = sigmoid(x W_r + h U_r + b_r)
        n = tanh(x W_n + r * (h U_n) + b_n)
        h' = (1 - z) * n + z * h

    Padded positions leave the state unchanged and emit zeros. Returns the
    (B, T, H) stack of hidden states in input order (``reverse`` only
    changes the direction of the scan).
    """
    if x.ndim != 3:
        raise ShapeError(f"gru: input must be (B, T, E), got {x.shape}")
    B, T, E = x.shape
    H = U.shape[0]
    if W.shape != (E, 3 * H) or U.shape != (H, 3 * H) or b.shape != (3 * H,):
        raise ShapeError(f"gru: weight shapes W{W.shape} U{U.shape} b{b.shape} inconsistent with input {x.shape}")
    m = np.asarray(mask, dtype=x.dtype).reshape(B, T, 1)
    dt = x.dtype
    A = x.data @ W.data + b.data  # (B, T, 3H)
    Ud = U.data
    steps = range(T - 1, -1, -1) if reverse else range(T)

    h = np.zeros((B, H), dtype=dt)
    out = np.zeros((B, T, H), dtype=dt)
    cache = []
    for t in steps:
        u = h @ Ud
        a = A[:, t]
        zr = _sigmoid(a[:, : 2 * H] + u[:, : 2 * H])
        z, r = zr[:, :H], zr[:, H:]
        un = u[:, 2 * H :]
        n = np.tanh(a[:, 2 * H :] + r * un)
        h_new = n + z * (h - n)
        mt = m[:, t]
        cache.append((h, z, r, n, un, h_new))
        h = h + mt * (h_new - h)
        out[:, t] = mt * h

    def backward(g):
        dA = np.zeros_like(A)
        dU = np.zeros_like(Ud)
        dh = np.zeros((B, H), dtype=dt)
        for t, (h_prev, z, r, n, un, h_new) in zip(reversed(list(steps)), reversed(cache)):
            mt = m[:, t]
            dh_t = dh + mt * g[:, t]
            dh_new = mt * dh_t
            dh_prev = (1 - mt) * dh_t + dh_new * z
            dn = dh_new * (1 - z)
            dz = dh_new * (h_prev - n)
            dpre_n = dn * (1 - n * n)
            dr = dpre_n * un
            dpre_z = dz * z * (1 - z)
            dpre_r = dr * r * (1 - r)
            du = np.concatenate([dpre_z, dpre_r, dpre_n * r], axis=1)
            dA[:, t] = np.concatenate([dpre_z, dpre_r, dpre_n], axis=1)
            dU += h_prev.T @ du
            dh = dh_prev + du @ Ud.T
        dx = dA @ W.data.T if x.requires_grad else None
        dW = x.data.reshape(-1, E).T @ dA.reshape(-1, 3 * H) if W.requires_grad else None
        db = dA.sum(axis=(0, 1))
        return dx, dW, dU, db

    return _result(out, "gru", (x, W, U, b), backward)
