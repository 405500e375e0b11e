"""Reverse-mode automatic differentiation over dense numpy arrays.

A Tensor wraps an ndarray and, while grad mode is on, records a backward
closure linking it to its parents. backward() on a scalar output runs the
tape in reverse topological order and accumulates gradients into every
reachable input with requires_grad=True. The tape lives only as long as
the output tensor; dropping it frees the graph.

The primitive set is exactly what the model stack needs: elementwise
arithmetic, matmul, 1-D (transposed) convolution, the gated tanh*sigmoid
unit, tanh/sigmoid/softplus/exp/log/sqrt/abs/clip, reductions, slicing,
concat/reshape/gather, signal framing, layer norm, softmax, and cosine
similarity. Broadcasting follows numpy rules; gradients are summed back
over broadcast axes.
"""

from __future__ import annotations

import contextlib
from typing import Iterable, Sequence

import numpy as np

from ..errors import NumericFault

_GRAD_ENABLED = True


def is_grad_enabled() -> bool:
    return _GRAD_ENABLED


@contextlib.contextmanager
def no_grad():
    """Disable tape recording inside the block (inference / frozen passes)."""
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        self.data = np.asarray(data, dtype=dtype)
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None

    # ---- bookkeeping -------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def assert_finite(self, what: str = "tensor") -> "Tensor":
        if not np.all(np.isfinite(self.data)):
            raise NumericFault(f"non-finite values in {what}")
        return self

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}, requires_grad={self.requires_grad})"

    # ---- operator sugar ----------------------------------------------

    def __add__(self, other):
        return add(self, _lift(other, self.dtype))

    def __radd__(self, other):
        return add(_lift(other, self.dtype), self)

    def __sub__(self, other):
        return add(self, neg(_lift(other, self.dtype)))

    def __rsub__(self, other):
        return add(_lift(other, self.dtype), neg(self))

    def __neg__(self):
        return neg(self)

    def __mul__(self, other):
        return mul(self, _lift(other, self.dtype))

    def __rmul__(self, other):
        return mul(_lift(other, self.dtype), self)

    def __truediv__(self, other):
        return div(self, _lift(other, self.dtype))

    def __rtruediv__(self, other):
        return div(_lift(other, self.dtype), self)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __matmul__(self, other):
        return matmul(self, _lift(other, self.dtype))

    def __getitem__(self, key):
        return _getitem(self, key)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def sum(self, axis=None, keepdims=False):
        return sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean(self, axis=axis, keepdims=keepdims)


def _lift(x, dtype) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=dtype))


def _make(data: np.ndarray, parents: tuple[Tensor, ...], backward_fn) -> Tensor:
    out = Tensor(data)
    if _GRAD_ENABLED and any(p.requires_grad or p._backward is not None for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward_fn
    return out


def _accum(t: Tensor, g: np.ndarray) -> None:
    if t.grad is None:
        t.grad = np.array(g, dtype=t.data.dtype, copy=True)
    else:
        t.grad += g


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum gradient g back down to `shape` after numpy broadcasting."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def backward(out: Tensor, params: Iterable[Tensor] | None = None, check_finite: bool = True) -> None:
    """Run reverse-mode accumulation from a scalar output.

    Fills .grad of every reachable input; tensors in `params` that the tape
    never touched get an explicit zero gradient. Raises NumericFault if the
    output is non-finite or a NaN/Inf gradient is produced.
    """
    if out.data.ndim != 0:
        raise ValueError(f"backward requires a scalar output, got shape {out.data.shape}")
    if not np.isfinite(out.data):
        raise NumericFault("backward called on non-finite output")

    # Iterative topological sort; recursion would overflow on deep tapes.
    topo: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(out, False)]
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
            if id(p) not in visited:
                stack.append((p, False))

    out.grad = np.ones((), dtype=out.data.dtype)
    for node in reversed(topo):
        if node._backward is None or node.grad is None:
            continue
        node._backward(node.grad)
        if check_finite:
            for p in node._parents:
                if p.grad is not None and not np.all(np.isfinite(p.grad)):
                    raise NumericFault("NaN/Inf gradient produced during backprop")

    if params is not None:
        for p in params:
            if p.grad is None:
                p.grad = np.zeros_like(p.data)


# ---- elementwise arithmetic -------------------------------------------


def add(a: Tensor, b: Tensor) -> Tensor:
    data = a.data + b.data

    def bwd(g):
        if a.requires_grad or a._backward is not None:
            _accum(a, _unbroadcast(g, a.data.shape))
        if b.requires_grad or b._backward is not None:
            _accum(b, _unbroadcast(g, b.data.shape))

    return _make(data, (a, b), bwd)


def neg(a: Tensor) -> Tensor:
    def bwd(g):
        _accum(a, -g)

    return _make(-a.data, (a,), bwd)


def mul(a: Tensor, b: Tensor) -> Tensor:
    data = a.data * b.data

    def bwd(g):
        if a.requires_grad or a._backward is not None:
            _accum(a, _unbroadcast(g * b.data, a.data.shape))
        if b.requires_grad or b._backward is not None:
            _accum(b, _unbroadcast(g * a.data, b.data.shape))

    return _make(data, (a, b), bwd)


def div(a: Tensor, b: Tensor) -> Tensor:
    data = a.data / b.data

    def bwd(g):
        if a.requires_grad or a._backward is not None:
            _accum(a, _unbroadcast(g / b.data, a.data.shape))
        if b.requires_grad or b._backward is not None:
            _accum(b, _unbroadcast(-g * a.data / (b.data * b.data), b.data.shape))

    return _make(data, (a, b), bwd)


def power(a: Tensor, exponent: float) -> Tensor:
    e = float(exponent)
    data = a.data**e

    def bwd(g):
        _accum(a, g * e * a.data ** (e - 1.0))

    return _make(data, (a,), bwd)


# ---- nonlinearities ----------------------------------------------------


def tanh(a: Tensor) -> Tensor:
    t = np.tanh(a.data)

    def bwd(g):
        _accum(a, g * (1.0 - t * t))

    return _make(t, (a,), bwd)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # Stable in both tails.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(a: Tensor) -> Tensor:
    s = _sigmoid(a.data)

    def bwd(g):
        _accum(a, g * s * (1.0 - s))

    return _make(s, (a,), bwd)


def softplus(a: Tensor) -> Tensor:
    x = a.data
    data = np.maximum(x, 0) + np.log1p(np.exp(-np.abs(x)))

    def bwd(g):
        _accum(a, g * _sigmoid(x))

    return _make(data, (a,), bwd)


def gated(a: Tensor, b: Tensor) -> Tensor:
    """Gated activation unit tanh(a) * sigmoid(b), fused."""
    if a.data.shape != b.data.shape:
        raise ValueError(f"gated unit needs equal shapes, got {a.data.shape} vs {b.data.shape}")
    t = np.tanh(a.data)
    s = _sigmoid(b.data)
    data = t * s

    def bwd(g):
        if a.requires_grad or a._backward is not None:
            _accum(a, g * s * (1.0 - t * t))
        if b.requires_grad or b._backward is not None:
            _accum(b, g * t * s * (1.0 - s))

    return _make(data, (a, b), bwd)


def exp(a: Tensor) -> Tensor:
    e = np.exp(a.data)

    def bwd(g):
        _accum(a, g * e)

    return _make(e, (a,), bwd)


def log(a: Tensor) -> Tensor:
    def bwd(g):
        _accum(a, g / a.data)

    return _make(np.log(a.data), (a,), bwd)


def sqrt(a: Tensor) -> Tensor:
    r = np.sqrt(a.data)

    def bwd(g):
        _accum(a, g * 0.5 / r)

    return _make(r, (a,), bwd)


def absolute(a: Tensor) -> Tensor:
    def bwd(g):
        _accum(a, g * np.sign(a.data))

    return _make(np.abs(a.data), (a,), bwd)


def clip(a: Tensor, lo: float, hi: float) -> Tensor:
    """Hard clamp; gradient passes only where lo <= x <= hi."""
    data = np.clip(a.data, lo, hi)
    mask = (a.data >= lo) & (a.data <= hi)

    def bwd(g):
        _accum(a, g * mask)

    return _make(data, (a,), bwd)


# ---- reductions --------------------------------------------------------


def sum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def bwd(g):
        if axis is None:
            _accum(a, np.broadcast_to(g, a.data.shape))
        else:
            gg = g if keepdims else np.expand_dims(g, axis)
            _accum(a, np.broadcast_to(gg, a.data.shape))

    return _make(data, (a,), bwd)


def mean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    data = a.data.mean(axis=axis, keepdims=keepdims)
    n = a.data.size if axis is None else a.data.shape[axis]

    def bwd(g):
        if axis is None:
            _accum(a, np.broadcast_to(g / n, a.data.shape))
        else:
            gg = g if keepdims else np.expand_dims(g, axis)
            _accum(a, np.broadcast_to(gg / n, a.data.shape))

    return _make(data, (a,), bwd)


# ---- shape ops ---------------------------------------------------------


def _getitem(a: Tensor, key) -> Tensor:
    data = a.data[key]
    if not isinstance(data, np.ndarray):
        data = np.asarray(data)

    def bwd(g):
        full = np.zeros_like(a.data)
        full[key] = g
        _accum(a, full)

    return _make(data, (a,), bwd)


def reshape(a: Tensor, shape) -> Tensor:
    shape = tuple(shape)

    def bwd(g):
        _accum(a, g.reshape(a.data.shape))

    return _make(a.data.reshape(shape), (a,), bwd)


def transpose(a: Tensor) -> Tensor:
    """2-D transpose."""
    if a.data.ndim != 2:
        raise ValueError("transpose expects a 2-D tensor")

    def bwd(g):
        _accum(a, g.T)

    return _make(a.data.T.copy(), (a,), bwd)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = list(tensors)
    if not tensors:
        raise ValueError("concat of an empty list")
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def bwd(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            if t.requires_grad or t._backward is not None:
                idx = [slice(None)] * g.ndim
                idx[axis] = slice(int(lo), int(hi))
                _accum(t, g[tuple(idx)])

    return _make(data, tuple(tensors), bwd)


def take(table: Tensor, ids) -> Tensor:
    """Gather rows table[ids]; gradient scatter-adds into the rows."""
    idx = np.asarray(ids, dtype=np.int64)
    data = table.data[idx]

    def bwd(g):
        full = np.zeros_like(table.data)
        np.add.at(full, idx, g)
        _accum(table, full)

    return _make(data, (table,), bwd)


def frame(x: Tensor, frame_length: int, hop: int) -> Tensor:
    """Slide a window over a 1-D signal: (n,) -> (T, frame_length).

    T = 1 + floor((n - frame_length) / hop); no padding. Gradient is the
    overlap-add of window gradients.
    """
    n = x.data.shape[0]
    if x.data.ndim != 1:
        raise ValueError("frame expects a 1-D signal")
    if n < frame_length:
        raise ValueError(f"signal of {n} samples is shorter than one frame ({frame_length})")
    t_frames = 1 + (n - frame_length) // hop
    s = x.data.strides[0]
    windows = np.lib.stride_tricks.as_strided(
        x.data, shape=(t_frames, frame_length), strides=(hop * s, s)
    ).copy()

    def bwd(g):
        full = np.zeros_like(x.data)
        if frame_length % hop == 0:
            for j in range(frame_length // hop):
                seg = full[j * hop : j * hop + t_frames * hop]
                seg.reshape(-1, hop)[: t_frames] += g[:, j * hop : (j + 1) * hop]
        else:
            for t in range(t_frames):
                full[t * hop : t * hop + frame_length] += g[t]
        _accum(x, full)

    return _make(windows, (x,), bwd)


# ---- linear algebra ----------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ValueError("matmul supports 2-D operands only")
    data = a.data @ b.data

    def bwd(g):
        if a.requires_grad or a._backward is not None:
            _accum(a, g @ b.data.T)
        if b.requires_grad or b._backward is not None:
            _accum(b, a.data.T @ g)

    return _make(data, (a, b), bwd)


def _conv_pad(kernel: int, dilation: int, padding: str) -> tuple[int, int]:
    if padding == "same":
        total = dilation * (kernel - 1)
        return total // 2, total - total // 2
    if padding == "valid":
        return 0, 0
    raise ValueError(f"unknown padding {padding!r}")


def conv1d(
    x: Tensor,
    weight: Tensor,
    bias: Tensor | None = None,
    dilation: int = 1,
    padding: str = "same",
) -> Tensor:
    """Dilated 1-D convolution over (T, C_in) with weight (K, C_in, C_out)."""
    if x.data.ndim != 2 or weight.data.ndim != 3:
        raise ValueError("conv1d expects x (T, C_in) and weight (K, C_in, C_out)")
    t_in, c_in = x.data.shape
    k, wc_in, c_out = weight.data.shape
    if wc_in != c_in:
        raise ValueError(f"conv1d channel mismatch: x has {c_in}, weight expects {wc_in}")
    left, right = _conv_pad(k, dilation, padding)
    xp = np.pad(x.data, ((left, right), (0, 0))) if (left or right) else x.data
    t_out = xp.shape[0] - dilation * (k - 1)
    if t_out < 1:
        raise ValueError("conv1d input shorter than receptive field")
    s0, s1 = xp.strides
    cols = np.lib.stride_tricks.as_strided(
        xp, shape=(t_out, k, c_in), strides=(s0, dilation * s0, s1)
    ).reshape(t_out, k * c_in)
    w2 = weight.data.reshape(k * c_in, c_out)
    data = cols @ w2
    if bias is not None:
        data = data + bias.data

    def bwd(g):
        if weight.requires_grad or weight._backward is not None:
            _accum(weight, (cols.T @ g).reshape(k, c_in, c_out))
        if bias is not None and (bias.requires_grad or bias._backward is not None):
            _accum(bias, g.sum(axis=0))
        if x.requires_grad or x._backward is not None:
            dcols = (g @ w2.T).reshape(t_out, k, c_in)
            dxp = np.zeros_like(xp)
            for j in range(k):
                dxp[j * dilation : j * dilation + t_out] += dcols[:, j, :]
            _accum(x, dxp[left : left + t_in] if (left or right) else dxp)

    parents = (x, weight) if bias is None else (x, weight, bias)
    return _make(data, parents, bwd)


def conv_transpose1d(x: Tensor, weight: Tensor, bias: Tensor | None, stride: int) -> Tensor:
    """Transposed 1-D convolution for integer upsampling.

    x (T, C_in), weight (C_in, K, C_out); output length is exactly T * stride,
    which requires K >= stride and (K - stride) even.
    """
    if x.data.ndim != 2 or weight.data.ndim != 3:
        raise ValueError("conv_transpose1d expects x (T, C_in) and weight (C_in, K, C_out)")
    t_in, c_in = x.data.shape
    wc_in, k, c_out = weight.data.shape
    if wc_in != c_in:
        raise ValueError(f"conv_transpose1d channel mismatch: x has {c_in}, weight expects {wc_in}")
    if (k - stride) % 2 != 0 or k < stride:
        raise ValueError("kernel must be >= stride with even overhang for exact upsampling")
    crop = (k - stride) // 2
    full = (t_in - 1) * stride + k
    w2 = weight.data.reshape(c_in, k * c_out)
    cols = (x.data @ w2).reshape(t_in, k, c_out)
    out_full = np.zeros((full, c_out), dtype=x.data.dtype)
    for j in range(k):
        out_full[j : j + (t_in - 1) * stride + 1 : stride] += cols[:, j, :]
    data = out_full[crop : crop + t_in * stride]
    if bias is not None:
        data = data + bias.data

    def bwd(g):
        g_full = np.zeros((full, c_out), dtype=g.dtype)
        g_full[crop : crop + t_in * stride] = g
        dcols = np.empty((t_in, k, c_out), dtype=g.dtype)
        for j in range(k):
            dcols[:, j, :] = g_full[j : j + (t_in - 1) * stride + 1 : stride]
        if weight.requires_grad or weight._backward is not None:
            _accum(weight, (x.data.T @ dcols.reshape(t_in, k * c_out)).reshape(c_in, k, c_out))
        if bias is not None and (bias.requires_grad or bias._backward is not None):
            _accum(bias, g.sum(axis=0))
        if x.requires_grad or x._backward is not None:
            _accum(x, dcols.reshape(t_in, k * c_out) @ w2.T)

    parents = (x, weight) if bias is None else (x, weight, bias)
    return _make(data, parents, bwd)


# ---- normalization / attention helpers ---------------------------------


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then scale and shift."""
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    data = xhat * gain.data + bias.data

    def bwd(g):
        if gain.requires_grad or gain._backward is not None:
            _accum(gain, (g * xhat).sum(axis=tuple(range(g.ndim - 1))))
        if bias.requires_grad or bias._backward is not None:
            _accum(bias, g.sum(axis=tuple(range(g.ndim - 1))))
        if x.requires_grad or x._backward is not None:
            gx = g * gain.data
            dx = inv * (gx - gx.mean(axis=-1, keepdims=True) - xhat * (gx * xhat).mean(axis=-1, keepdims=True))
            _accum(x, dx)

    return _make(data, (x, gain, bias), bwd)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    z = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    s = e / e.sum(axis=axis, keepdims=True)

    def bwd(g):
        dot = (g * s).sum(axis=axis, keepdims=True)
        _accum(x, s * (g - dot))

    return _make(s, (x,), bwd)


def cosine_similarity(a: Tensor, b: Tensor) -> Tensor:
    """Cosine of the angle between two 1-D vectors.

    Computed as dot(a, b) / sqrt(dot(a, a) * dot(b, b)), which returns
    exactly 1.0 when the operands are elementwise identical.
    """
    if a.data.ndim != 1 or b.data.ndim != 1 or a.data.shape != b.data.shape:
        raise ValueError("cosine_similarity expects two equal-length 1-D vectors")
    pa = float(a.data @ a.data)
    pb = float(b.data @ b.data)
    if pa == 0.0 or pb == 0.0:
        raise ValueError("cosine_similarity of a zero vector")
    p = a.data @ b.data
    q = np.sqrt(pa * pb)
    c = p / q

    def bwd(g):
        if a.requires_grad or a._backward is not None:
            _accum(a, g * (b.data / q - c * a.data / pa))
        if b.requires_grad or b._backward is not None:
            _accum(b, g * (a.data / q - c * b.data / pb))

    return _make(np.asarray(c, dtype=a.data.dtype), (a, b), bwd)
