"""Tape-based reverse-mode autodiff over float64 numpy arrays.

Graphs are built eagerly by the vector ops below; backward() walks the tape
iteratively so deep recurrent chains do not hit the recursion limit. Inside
a no_grad() block the ops return detached tensors and build no tape.
"""

import numpy as np

from ..errors import ShapeError

_grad_enabled = True


class no_grad:
    """Context manager that suspends tape construction."""

    def __enter__(self):
        global _grad_enabled
        self._prev = _grad_enabled
        _grad_enabled = False
        return self

    def __exit__(self, exc_type, exc, tb):
        global _grad_enabled
        _grad_enabled = self._prev
        return False


class Tensor:
    """Dense row-major array with an optional gradient of the same shape."""

    __slots__ = ("data", "grad", "_parents", "_backward", "_needs")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.array(data, dtype=np.float64, copy=True)
        self.grad = np.zeros_like(self.data) if requires_grad else None
        self._parents = ()
        self._backward = None
        self._needs = requires_grad

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, needs_grad={self._needs})"

    def zero_grad(self):
        if self.grad is not None:
            self.grad.fill(0.0)

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __neg__(self):
        return scale(self, -1.0)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))


def _node(data: np.ndarray, parents, backward) -> Tensor:
    t = Tensor.__new__(Tensor)
    t.data = data
    t.grad = None
    if _grad_enabled and any(p._needs for p in parents):
        t._parents = tuple(parents)
        t._backward = backward
        t._needs = True
    else:
        t._parents = ()
        t._backward = None
        t._needs = False
    return t


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    if g.shape == tuple(shape):
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data + b.data

    def backward(g):
        if a._needs:
            a.grad += _unbroadcast(g, a.data.shape)
        if b._needs:
            b.grad += _unbroadcast(g, b.data.shape)

    return _node(out, (a, b), backward)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data - b.data

    def backward(g):
        if a._needs:
            a.grad += _unbroadcast(g, a.data.shape)
        if b._needs:
            b.grad -= _unbroadcast(g, b.data.shape)

    return _node(out, (a, b), backward)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data * b.data

    def backward(g):
        if a._needs:
            a.grad += _unbroadcast(g * b.data, a.data.shape)
        if b._needs:
            b.grad += _unbroadcast(g * a.data, b.data.shape)

    return _node(out, (a, b), backward)


def scale(a, c: float) -> Tensor:
    a = as_tensor(a)
    c = float(c)
    out = a.data * c

    def backward(g):
        if a._needs:
            a.grad += g * c

    return _node(out, (a,), backward)


def matvec(w: Tensor, x: Tensor) -> Tensor:
    if w.ndim != 2 or x.ndim != 1 or w.data.shape[1] != x.data.shape[0]:
        raise ShapeError(f"matvec mismatch: {w.data.shape} @ {x.data.shape}")
    out = w.data @ x.data

    def backward(g):
        if w._needs:
            w.grad += np.outer(g, x.data)
        if x._needs:
            x.grad += w.data.T @ g

    return _node(out, (w, x), backward)


def dot(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 1 or b.ndim != 1 or a.data.shape != b.data.shape:
        raise ShapeError(f"dot mismatch: {a.data.shape} . {b.data.shape}")
    out = np.asarray(a.data @ b.data)

    def backward(g):
        if a._needs:
            a.grad += g * b.data
        if b._needs:
            b.grad += g * a.data

    return _node(out, (a, b), backward)


def sigmoid(a: Tensor) -> Tensor:
    a = as_tensor(a)
    x = a.data
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)

    def backward(g):
        if a._needs:
            a.grad += g * out * (1.0 - out)

    return _node(out, (a,), backward)


def tanh(a: Tensor) -> Tensor:
    a = as_tensor(a)
    out = np.tanh(a.data)

    def backward(g):
        if a._needs:
            a.grad += g * (1.0 - out * out)

    return _node(out, (a,), backward)


def relu(a: Tensor) -> Tensor:
    a = as_tensor(a)
    out = np.maximum(a.data, 0.0)

    def backward(g):
        if a._needs:
            a.grad += g * (a.data > 0)

    return _node(out, (a,), backward)


def softmax(a: Tensor) -> Tensor:
    if a.ndim != 1:
        raise ShapeError("softmax expects a vector")
    shifted = a.data - a.data.max()
    e = np.exp(shifted)
    out = e / e.sum()

    def backward(g):
        if a._needs:
            a.grad += out * (g - np.dot(g, out))

    return _node(out, (a,), backward)


def concat(tensors) -> Tensor:
    ts = [as_tensor(t) for t in tensors]
    if not ts or any(t.ndim != 1 for t in ts):
        raise ShapeError("concat expects a non-empty list of vectors")
    out = np.concatenate([t.data for t in ts])
    sizes = [t.data.shape[0] for t in ts]

    def backward(g):
        offset = 0
        for t, size in zip(ts, sizes):
            if t._needs:
                t.grad += g[offset:offset + size]
            offset += size

    return _node(out, tuple(ts), backward)


def sum_vectors(tensors) -> Tensor:
    ts = [as_tensor(t) for t in tensors]
    if not ts:
        raise ShapeError("sum_vectors needs at least one vector")
    out = ts[0].data.copy()
    for t in ts[1:]:
        out += t.data

    def backward(g):
        for t in ts:
            if t._needs:
                t.grad += g

    return _node(out, tuple(ts), backward)


def mean_vectors(tensors) -> Tensor:
    ts = list(tensors)
    return scale(sum_vectors(ts), 1.0 / len(ts))


def stack_scalars(tensors) -> Tensor:
    """Collect scalar tensors into one vector, e.g. per-candidate scores."""
    ts = [as_tensor(t) for t in tensors]
    if not ts or any(t.ndim != 0 for t in ts):
        raise ShapeError("stack_scalars expects a non-empty list of scalars")
    out = np.array([t.data for t in ts])

    def backward(g):
        for i, t in enumerate(ts):
            if t._needs:
                t.grad += g[i]

    return _node(out, tuple(ts), backward)


def vsum(a: Tensor) -> Tensor:
    a = as_tensor(a)
    out = np.asarray(a.data.sum())

    def backward(g):
        if a._needs:
            a.grad += g

    return _node(out, (a,), backward)


def take_row(a: Tensor, index: int) -> Tensor:
    if a.ndim != 2:
        raise ShapeError("take_row expects a matrix")
    if not 0 <= index < a.data.shape[0]:
        raise ShapeError(f"row {index} out of range for {a.data.shape}")
    out = a.data[index].copy()

    def backward(g):
        if a._needs:
            a.grad[index] += g

    return _node(out, (a,), backward)


def backward(root: Tensor) -> None:
    """Accumulate gradients of root w.r.t. every reachable tensor."""
    if root.data.size != 1:
        raise ShapeError("backward expects a scalar root")
    topo = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            topo.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p._needs and id(p) not in visited:
                stack.append((p, False))
    if root.grad is None:
        root.grad = np.ones_like(root.data)
    else:
        root.grad += 1.0
    for node in reversed(topo):
        if node._backward is None:
            continue
        for p in node._parents:
            if p._needs and p.grad is None:
                p.grad = np.zeros_like(p.data)
        node._backward(node.grad)
