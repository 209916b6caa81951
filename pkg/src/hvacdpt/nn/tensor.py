"""Dense float tensors with reverse-mode gradients.

Small closure-tape autodiff: each op returns a Tensor holding a backward
closure over its parents; ``backward()`` replays the closures in reverse
topological order. Only the ops the PPO networks and the transformer need
are provided. Training runs in float32 by default; tests build float64
graphs for tight finite-difference comparisons.
"""

from __future__ import annotations

import hashlib

import numpy as np

DEFAULT_DTYPE = np.float32


class ShapeError(ValueError):
    pass


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        if isinstance(data, Tensor):
            data = data.data
        arr = np.asarray(data)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(DEFAULT_DTYPE)
        self.data = arr
        self.grad = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None

    # -- structure ---------------------------------------------------------

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}, grad={self.requires_grad})"

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self):
        self.grad = None

    def _accumulate(self, g: np.ndarray):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self, grad: np.ndarray | None = None):
        """Backpropagate from this tensor (scalar unless grad is given)."""
        if grad is None:
            if self.data.size != 1:
                raise ShapeError(f"backward() without grad needs a scalar, got shape {self.shape}")
            grad = np.ones_like(self.data)
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self._accumulate(np.asarray(grad, dtype=self.data.dtype))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- operator sugar ------------------------------------------------------

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

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def reshape(self, *shape):
        return reshape(self, shape)

    def transpose(self, axes):
        return transpose(self, axes)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis=axis, keepdims=keepdims)


def as_tensor(x, like: Tensor | None = None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    arr = np.asarray(x)
    if like is not None and arr.dtype != like.data.dtype:
        arr = arr.astype(like.data.dtype)
    return Tensor(arr)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum grad over axes that were broadcast to reach the output shape."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _make(data: np.ndarray, parents: tuple, backward) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward
    return out


# -- arithmetic --------------------------------------------------------------


def add(a, b) -> Tensor:
    a = as_tensor(a)
    b = as_tensor(b, like=a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g, b.shape))

    return _make(a.data + b.data, (a, b), backward)


def sub(a, b) -> Tensor:
    a = as_tensor(a)
    b = as_tensor(b, like=a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(-g, b.shape))

    return _make(a.data - b.data, (a, b), backward)


def mul(a, b) -> Tensor:
    a = as_tensor(a)
    b = as_tensor(b, like=a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g * b.data, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g * a.data, b.shape))

    return _make(a.data * b.data, (a, b), backward)


def div(a, b) -> Tensor:
    a = as_tensor(a)
    b = as_tensor(b, like=a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g / b.data, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(-g * a.data / (b.data * b.data), b.shape))

    return _make(a.data / b.data, (a, b), backward)


def _mm(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # (..., C) @ (C, D) collapses to one GEMM; stacked matmul over leading
    # dims dispatches one tiny BLAS call per slice and is far slower.
    if y.ndim == 2 and x.ndim > 2:
        lead = x.shape[:-1]
        return (x.reshape(-1, x.shape[-1]) @ y).reshape(*lead, y.shape[-1])
    return np.matmul(x, y)


def matmul(a, b) -> Tensor:
    a = as_tensor(a)
    b = as_tensor(b)
    if a.data.ndim < 2 or b.data.ndim < 2:
        raise ShapeError(f"matmul needs rank >= 2 operands, got {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul inner dims differ: {a.shape} @ {b.shape}")

    def backward(g):
        if a.requires_grad:
            ga = _mm(g, b.data.swapaxes(-1, -2)) if b.data.ndim == 2 else np.matmul(
                g, np.swapaxes(b.data, -1, -2)
            )
            a._accumulate(_unbroadcast(ga, a.shape))
        if b.requires_grad:
            if b.data.ndim == 2 and a.data.ndim > 2:
                gb = a.data.reshape(-1, a.shape[-1]).T @ g.reshape(-1, g.shape[-1])
            else:
                gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
            b._accumulate(_unbroadcast(gb, b.shape))

    return _make(_mm(a.data, b.data), (a, b), backward)


# -- shape ---------------------------------------------------------------


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g.reshape(a.shape))

    return _make(a.data.reshape(shape), (a,), backward)


def transpose(a, axes) -> Tensor:
    a = as_tensor(a)
    inv = np.argsort(axes)

    def backward(g):
        if a.requires_grad:
            a._accumulate(np.transpose(g, inv))

    return _make(np.transpose(a.data, axes), (a,), backward)


def tsum(a, axis=None, keepdims=False) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        if not a.requires_grad:
            return
        if axis is None:
            a._accumulate(np.broadcast_to(g, a.shape).copy())
        else:
            g2 = g if keepdims else np.expand_dims(g, axis)
            a._accumulate(np.broadcast_to(g2, a.shape).copy())

    return _make(a.data.sum(axis=axis, keepdims=keepdims), (a,), backward)


def tmean(a, axis=None, keepdims=False) -> Tensor:
    a = as_tensor(a)
    if axis is None:
        count = a.data.size
    else:
        count = a.data.shape[axis]
    return mul(tsum(a, axis=axis, keepdims=keepdims), 1.0 / count)


# -- pointwise nonlinearities ---------------------------------------------


def tanh(a) -> Tensor:
    a = as_tensor(a)
    y = np.tanh(a.data)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * (1.0 - y * y))

    return _make(y, (a,), backward)


_GELU_C = 0.7978845608028654  # sqrt(2 / pi)


def gelu(a) -> Tensor:
    a = as_tensor(a)
    x = a.data
    t = np.tanh(_GELU_C * (x + 0.044715 * (x * x * x)))
    y = 0.5 * x * (1.0 + t)

    def backward(g):
        if a.requires_grad:
            d_inner = _GELU_C * (1.0 + 3.0 * 0.044715 * x * x)
            da = 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * d_inner
            a._accumulate(g * da)

    return _make(y, (a,), backward)


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    y = 1.0 / (1.0 + np.exp(-a.data))

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * y * (1.0 - y))

    return _make(y, (a,), backward)


def exp(a) -> Tensor:
    a = as_tensor(a)
    y = np.exp(a.data)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * y)

    return _make(y, (a,), backward)


def log(a) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g / a.data)

    return _make(np.log(a.data), (a,), backward)


def square(a) -> Tensor:
    return mul(a, a)


def clip(a, lo: float, hi: float) -> Tensor:
    """Clamp values; gradient passes only where no clamping occurred."""
    a = as_tensor(a)
    pass_mask = (a.data > lo) & (a.data < hi)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * pass_mask)

    return _make(np.clip(a.data, lo, hi), (a,), backward)


def minimum(a, b) -> Tensor:
    a = as_tensor(a)
    b = as_tensor(b, like=a)
    take_a = a.data <= b.data

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g * take_a, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g * ~take_a, b.shape))

    return _make(np.minimum(a.data, b.data), (a, b), backward)


# -- neural-net primitives -------------------------------------------------


def softmax(a) -> Tensor:
    """Row softmax over the last axis."""
    a = as_tensor(a)
    shifted = a.data - a.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=-1, keepdims=True)

    def backward(g):
        if a.requires_grad:
            dot = (g * y).sum(axis=-1, keepdims=True)
            a._accumulate(y * (g - dot))

    return _make(y, (a,), backward)


def layer_norm(a, gamma, beta, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then scale and shift."""
    a = as_tensor(a)
    gamma = as_tensor(gamma, like=a)
    beta = as_tensor(beta, like=a)
    mu = a.data.mean(axis=-1, keepdims=True)
    var = a.data.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (a.data - mu) * inv
    y = gamma.data * xhat + beta.data

    def backward(g):
        if gamma.requires_grad:
            gamma._accumulate(_unbroadcast(g * xhat, gamma.shape))
        if beta.requires_grad:
            beta._accumulate(_unbroadcast(g, beta.shape))
        if a.requires_grad:
            dxhat = g * gamma.data
            m1 = dxhat.mean(axis=-1, keepdims=True)
            m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
            a._accumulate(inv * (dxhat - m1 - xhat * m2))

    return _make(y, (a, gamma, beta), backward)


def embedding_lookup(table, indices) -> Tensor:
    """Gather rows of a (vocab, dim) table by an integer index array."""
    table = as_tensor(table)
    idx = np.asarray(indices, dtype=np.int64)

    def backward(g):
        if table.requires_grad:
            dt = np.zeros_like(table.data)
            np.add.at(dt, idx, g)
            table._accumulate(dt)

    return _make(table.data[idx], (table,), backward)


def dropout(a, p: float, rng: np.random.Generator | None = None, training: bool = True) -> Tensor:
    a = as_tensor(a)
    if p == 0.0 or not training:
        # Exact identity in both passes.
        def backward_id(g):
            if a.requires_grad:
                a._accumulate(g)

        return _make(a.data, (a,), backward_id)
    if rng is None:
        raise ValueError("dropout with p > 0 needs an rng")
    keep = (rng.random(a.shape) >= p).astype(a.data.dtype) / (1.0 - p)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * keep)

    return _make(a.data * keep, (a,), backward)


def mse_loss(pred, target) -> Tensor:
    """Mean squared error over every element."""
    pred = as_tensor(pred)
    target = as_tensor(target, like=pred)
    if pred.shape != target.shape:
        raise ShapeError(f"mse_loss shape mismatch: {pred.shape} vs {target.shape}")
    return tmean(square(sub(pred, target)))


def linear(x, w, b=None) -> Tensor:
    y = matmul(x, w)
    if b is not None:
        y = add(y, b)
    return y


def causal_self_attention(x, wq, bq, wk, bk, wv, bv, wo, bo, n_heads: int, mask: np.ndarray) -> Tensor:
    """Multi-head causal self-attention over x of shape (B, T, C).

    ``mask`` is an additive (T, T) array, 0 on and below the diagonal and a
    large negative number above it, so post-softmax weights on future
    positions are exactly zero.
    """
    x = as_tensor(x)
    B, T, C = x.shape
    if C % n_heads != 0:
        raise ShapeError(f"width {C} not divisible by {n_heads} heads")
    hd = C // n_heads

    def heads(t):
        return transpose(reshape(t, (B, T, n_heads, hd)), (0, 2, 1, 3))

    q = heads(linear(x, wq, bq))
    k = heads(linear(x, wk, bk))
    v = heads(linear(x, wv, bv))
    att = mul(matmul(q, transpose(k, (0, 1, 3, 2))), 1.0 / np.sqrt(hd))
    att = add(att, Tensor(mask[:T, :T].astype(x.data.dtype)))
    probs = softmax(att)
    y = matmul(probs, v)
    y = reshape(transpose(y, (0, 2, 1, 3)), (B, T, C))
    return linear(y, wo, bo)


def causal_mask(max_seq: int, dtype=np.float32) -> np.ndarray:
    mask = np.zeros((max_seq, max_seq), dtype=dtype)
    mask[np.triu_indices(max_seq, k=1)] = -1e30
    return mask


# -- parameter helpers -------------------------------------------------------


def parameter(data, dtype=None) -> Tensor:
    arr = np.asarray(data, dtype=dtype if dtype is not None else DEFAULT_DTYPE)
    return Tensor(arr, requires_grad=True)


def truncated_normal(rng: np.random.Generator, shape, std: float, dtype=None) -> Tensor:
    """Normal init clipped at two standard deviations."""
    raw = rng.normal(0.0, std, size=shape)
    return parameter(np.clip(raw, -2.0 * std, 2.0 * std), dtype=dtype)


def scaled_uniform(rng: np.random.Generator, shape, gain: float = 1.0, dtype=None) -> Tensor:
    fan_in, fan_out = shape[0], shape[-1]
    bound = gain * np.sqrt(6.0 / (fan_in + fan_out))
    return parameter(rng.uniform(-bound, bound, size=shape), dtype=dtype)


def params_checksum(params: dict[str, Tensor]) -> str:
    h = hashlib.sha256()
    for name in sorted(params):
        h.update(name.encode())
        h.update(np.ascontiguousarray(params[name].data).tobytes())
    return h.hexdigest()
