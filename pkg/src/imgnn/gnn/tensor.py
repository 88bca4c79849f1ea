"""Minimal reverse-mode autodiff over dense float64 numpy arrays.

Only the operations the attention model needs are provided. Every op builds
a node holding its parents and a closure that pushes the output gradient
back to them; :meth:`Tensor.backward` replays the closures in reverse
topological order.
"""

from __future__ import annotations

import numpy as np


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


class Tensor:
    __slots__ = ("data", "grad", "_parents", "_backward")

    def __init__(self, data, parents: tuple = (), backward=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self._parents = parents
        self._backward = backward

    @property
    def shape(self):
        return self.data.shape

    def _accumulate(self, g: np.ndarray) -> None:
        g = _unbroadcast(g, self.data.shape)
        self.grad = g.copy() if self.grad is None else self.grad + g

    def backward(self, grad=None) -> None:
        order, seen = [], set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data) if grad is None else np.asarray(grad, dtype=np.float64)
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # arithmetic

    def __add__(self, other):
        other = as_tensor(other)

        def back(g):
            self._accumulate(g)
            other._accumulate(g)

        return Tensor(self.data + other.data, (self, other), back)

    __radd__ = __add__

    def __neg__(self):
        return Tensor(-self.data, (self,), lambda g: self._accumulate(-g))

    def __sub__(self, other):
        return self + (-as_tensor(other))

    def __rsub__(self, other):
        return as_tensor(other) + (-self)

    def __mul__(self, other):
        other = as_tensor(other)

        def back(g):
            self._accumulate(g * other.data)
            other._accumulate(g * self.data)

        return Tensor(self.data * other.data, (self, other), back)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_tensor(other)
        out = self.data / other.data

        def back(g):
            self._accumulate(g / other.data)
            other._accumulate(-g * out / other.data)

        return Tensor(out, (self, other), back)

    def __matmul__(self, other):
        other = as_tensor(other)

        def back(g):
            self._accumulate(g @ other.data.T)
            other._accumulate(self.data.T @ g)

        return Tensor(self.data @ other.data, (self, other), back)

    # reductions and elementwise functions

    def sum(self):
        return Tensor(self.data.sum(), (self,), lambda g: self._accumulate(np.broadcast_to(g, self.shape)))

    def exp(self):
        out = np.exp(self.data)
        return Tensor(out, (self,), lambda g: self._accumulate(g * out))

    def square(self):
        return Tensor(self.data**2, (self,), lambda g: self._accumulate(2.0 * g * self.data))

    def leaky_relu(self, slope: float = 0.2):
        pos = self.data > 0
        out = np.where(pos, self.data, slope * self.data)
        return Tensor(out, (self,), lambda g: self._accumulate(np.where(pos, g, slope * g)))

    def elu(self, alpha: float = 1.0):
        pos = self.data > 0
        neg = alpha * np.expm1(np.minimum(self.data, 0.0))
        out = np.where(pos, self.data, neg)
        return Tensor(out, (self,), lambda g: self._accumulate(np.where(pos, g, g * (neg + alpha))))

    def sigmoid(self):
        out = 0.5 * (1.0 + np.tanh(0.5 * self.data))
        return Tensor(out, (self,), lambda g: self._accumulate(g * out * (1.0 - out)))

    # indexing

    def gather(self, index: np.ndarray):
        """Rows ``self[index]``."""
        index = np.asarray(index)

        def back(g):
            full = np.zeros_like(self.data)
            np.add.at(full, index, g)
            self._accumulate(full)

        return Tensor(self.data[index], (self,), back)

    def segment_sum(self, index: np.ndarray, size: int):
        """Rows summed into ``size`` buckets by ``index``."""
        index = np.asarray(index)
        out = np.zeros((size,) + self.shape[1:])
        np.add.at(out, index, self.data)
        return Tensor(out, (self,), lambda g: self._accumulate(g[index]))


def concat(tensors, axis: int = 1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum([0] + sizes)

    def back(g):
        for t, lo, hi in zip(tensors, bounds[:-1], bounds[1:]):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(lo, hi)
            t._accumulate(g[tuple(sl)])

    return Tensor(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), back)
