"""Small layer library on top of the ndgrad engine.

Modules hold their parameters as Tensors registered under dotted names so
checkpoints can address every array individually. Initialization draws
from an explicitly passed Generator, keeping model construction
reproducible under named RNG streams.
"""

from __future__ import annotations

import numpy as np

from .ndgrad import Tensor, conv1d, conv_transpose1d, gated, layer_norm


class Module:
    """Base class managing named parameters and submodules."""

    def __init__(self):
        self._params: dict[str, Tensor] = {}
        self._no_decay: set[str] = set()
        self._children: dict[str, Module] = {}

    def add_param(self, name: str, data: np.ndarray, decay: bool = True) -> Tensor:
        t = Tensor(data, requires_grad=True)
        self._params[name] = t
        if not decay:
            self._no_decay.add(name)
        return t

    def add_module(self, name: str, child: "Module") -> "Module":
        self._children[name] = child
        return child

    def named_params(self, prefix: str = "") -> dict[str, Tensor]:
        out = {}
        for name, p in self._params.items():
            out[prefix + name] = p
        for cname, child in self._children.items():
            out.update(child.named_params(prefix + cname + "."))
        return out

    def no_decay_names(self, prefix: str = "") -> set[str]:
        out = {prefix + n for n in self._no_decay}
        for cname, child in self._children.items():
            out |= child.no_decay_names(prefix + cname + ".")
        return out

    def set_trainable(self, flag: bool) -> None:
        for p in self.named_params().values():
            p.requires_grad = flag


class Linear(Module):
    def __init__(self, rng: np.random.Generator, d_in: int, d_out: int, zero_init=False, bias=True, dtype=np.float32):
        super().__init__()
        scale = 0.0 if zero_init else 1.0 / np.sqrt(d_in)
        w = rng.normal(0.0, 1.0, size=(d_in, d_out)) * scale
        self.w = self.add_param("w", w.astype(dtype))
        self.b = self.add_param("b", np.zeros(d_out, dtype=dtype)) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        y = x @ self.w
        if self.b is not None:
            y = y + self.b
        return y


class Conv1d(Module):
    """Dilated same-padding 1-D convolution over (T, C_in)."""

    def __init__(self, rng, c_in: int, c_out: int, kernel: int, dilation=1, zero_init=False, dtype=np.float32):
        super().__init__()
        self.dilation = dilation
        scale = 0.0 if zero_init else 1.0 / np.sqrt(kernel * c_in)
        w = rng.normal(0.0, 1.0, size=(kernel, c_in, c_out)) * scale
        self.w = self.add_param("w", w.astype(dtype))
        self.b = self.add_param("b", np.zeros(c_out, dtype=dtype))

    def __call__(self, x: Tensor) -> Tensor:
        return conv1d(x, self.w, self.b, dilation=self.dilation, padding="same")


class ConvTranspose1d(Module):
    """Stride-r upsampling convolution: (T, C_in) -> (T*r, C_out)."""

    def __init__(self, rng, c_in: int, c_out: int, kernel: int, stride: int, dtype=np.float32):
        super().__init__()
        self.stride = stride
        scale = 1.0 / np.sqrt(kernel * c_in / stride)
        w = rng.normal(0.0, 1.0, size=(c_in, kernel, c_out)) * scale
        self.w = self.add_param("w", w.astype(dtype))
        self.b = self.add_param("b", np.zeros(c_out, dtype=dtype))

    def __call__(self, x: Tensor) -> Tensor:
        return conv_transpose1d(x, self.w, self.b, stride=self.stride)


class LayerNorm(Module):
    def __init__(self, d: int, dtype=np.float32):
        super().__init__()
        self.g = self.add_param("g", np.ones(d, dtype=dtype), decay=False)
        self.b = self.add_param("b", np.zeros(d, dtype=dtype), decay=False)

    def __call__(self, x: Tensor) -> Tensor:
        return layer_norm(x, self.g, self.b)


class GatedResidualStack(Module):
    """WaveNet-style stack of dilated gated residual blocks.

    Each block: dilated conv to 2*hidden channels, plus a per-block 1x1
    projection of the global conditioning vector, gated tanh*sigmoid,
    then 1x1 back to hidden with a residual connection; skip outputs are
    summed. Non-causal (same padding).
    """

    def __init__(self, rng, hidden: int, cond_dim: int, n_blocks=4, kernel=3, dilations=None, dtype=np.float32):
        super().__init__()
        self.hidden = hidden
        self.n_blocks = n_blocks
        dilations = dilations if dilations is not None else [2**i for i in range(n_blocks)]
        if len(dilations) != n_blocks:
            raise ValueError("need one dilation per block")
        self.convs = []
        self.cond_projs = []
        self.res_projs = []
        self.skip_projs = []
        for i, d in enumerate(dilations):
            self.convs.append(self.add_module(f"conv{i}", Conv1d(rng, hidden, 2 * hidden, kernel, dilation=d, dtype=dtype)))
            self.cond_projs.append(self.add_module(f"cond{i}", Linear(rng, cond_dim, 2 * hidden, bias=False, dtype=dtype)))
            self.res_projs.append(self.add_module(f"res{i}", Linear(rng, hidden, hidden, dtype=dtype)))
            self.skip_projs.append(self.add_module(f"skip{i}", Linear(rng, hidden, hidden, dtype=dtype)))

    def __call__(self, h: Tensor, cond: Tensor) -> Tensor:
        """h (T, hidden), cond (cond_dim,) -> skip sum (T, hidden)."""
        cond_row = cond.reshape((1, cond.shape[-1]))
        skip = None
        for conv, cproj, rproj, sproj in zip(self.convs, self.cond_projs, self.res_projs, self.skip_projs):
            u = conv(h) + cproj(cond_row)
            a = u[:, : self.hidden]
            b = u[:, self.hidden :]
            z = gated(a, b)
            h = h + rproj(z)
            s = sproj(z)
            skip = s if skip is None else skip + s
        return skip
