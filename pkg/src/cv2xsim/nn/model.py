"""Denoiser model: 4 conv+BN+ReLU stages, position-wise dense head, and the
complex <-> 2-channel real mapping between channel matrices and tensors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .layers import BatchNorm2D, Conv2D, Dense, ReLU  # noqa: F401 (re-exported)

# (in_ch, out_ch, kh, kw) per stage; kernels are tall in frequency because
# the grid is 576 subcarriers by 14 symbols
DEFAULT_CONV_SPECS = ((2, 16, 9, 3), (16, 8, 5, 3), (8, 4, 5, 3), (4, 2, 3, 3))


@dataclass(frozen=True)
class ArchConfig:
    conv_specs: tuple[tuple[int, int, int, int], ...] = DEFAULT_CONV_SPECS
    dense_in: int = 2
    dense_out: int = 2
    use_relu: bool = True
    # rectifying the last 2-channel stage erases the sign information the
    # dense head needs to rebuild re/im; keep the tail linear by default
    final_relu: bool = False
    bn_momentum: float = 0.1
    bn_eps: float = 1e-5

    def to_dict(self) -> dict:
        return {
            "conv_specs": [list(s) for s in self.conv_specs],
            "dense_in": self.dense_in,
            "dense_out": self.dense_out,
            "use_relu": self.use_relu,
            "final_relu": self.final_relu,
            "bn_momentum": self.bn_momentum,
            "bn_eps": self.bn_eps,
        }

    @staticmethod
    def from_dict(d: dict) -> "ArchConfig":
        return ArchConfig(
            conv_specs=tuple(tuple(s) for s in d["conv_specs"]),
            dense_in=d["dense_in"],
            dense_out=d["dense_out"],
            use_relu=d["use_relu"],
            final_relu=d.get("final_relu", False),
            bn_momentum=d["bn_momentum"],
            bn_eps=d["bn_eps"],
        )


@dataclass
class Model:
    layers: list
    arch: ArchConfig
    init_seed: int = 0

    def forward(self, x: np.ndarray, train: bool = True) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x, train=train)
        return x

    def backward(self, grad: np.ndarray) -> np.ndarray | None:
        for i in range(len(self.layers) - 1, -1, -1):
            layer = self.layers[i]
            if i == 0 and isinstance(layer, Conv2D):
                return layer.backward(grad, need_grad_x=False)
            grad = layer.backward(grad)
        return grad

    def params(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.params()]

    def grads(self) -> list[np.ndarray]:
        return [g for layer in self.layers for g in layer.grads()]

    def set_params(self, values: list[np.ndarray]) -> None:
        params = self.params()
        if len(values) != len(params):
            raise ValueError("parameter count mismatch")
        for p, v in zip(params, values):
            if p.shape != v.shape:
                raise ValueError("parameter shape mismatch")
            p[...] = v

    def param_count(self) -> int:
        return int(sum(p.size for p in self.params()))

    @property
    def batchnorms(self) -> list[BatchNorm2D]:
        return [l for l in self.layers if isinstance(l, BatchNorm2D)]


def build_model(arch: ArchConfig = ArchConfig(), seed: int = 0, dtype=np.float32) -> Model:
    """Conv->BN(->ReLU) stages followed by a position-wise dense head.

    The head keeps the (2, H, W) output shape, so the reshape back to a
    complex matrix is a fixed re/im channel split.
    """
    rng = np.random.default_rng(seed)
    layers: list = []
    n_stages = len(arch.conv_specs)
    for i, (in_ch, out_ch, kh, kw) in enumerate(arch.conv_specs):
        layers.append(Conv2D(in_ch, out_ch, kh, kw, rng=rng, dtype=dtype))
        layers.append(BatchNorm2D(out_ch, momentum=arch.bn_momentum, eps=arch.bn_eps, dtype=dtype))
        if arch.use_relu and (arch.final_relu or i < n_stages - 1):
            layers.append(ReLU(inplace=True))
    layers.append(Dense(arch.dense_in, arch.dense_out, rng=rng, dtype=dtype))
    return Model(layers=layers, arch=arch, init_seed=seed)


def to_channels(h: np.ndarray) -> np.ndarray:
    """Complex (..., H, W) -> real (..., 2, H, W) with channels (re, im)."""
    h = np.asarray(h)
    return np.stack([h.real, h.imag], axis=-3)


def from_channels(x: np.ndarray) -> np.ndarray:
    """Inverse of to_channels; exact round trip."""
    x = np.asarray(x)
    return x[..., 0, :, :] + 1j * x[..., 1, :, :]


def predict(model: Model, h_noisy: np.ndarray, batch_size: int = 64) -> np.ndarray:
    """Denoise complex channel matrices in inference mode (running BN stats).

    Accepts one matrix (H, W) or a stack (..., H, W); returns the same shape.
    """
    h = np.asarray(h_noisy)
    single = h.ndim == 2
    stack = h[None] if single else h.reshape(-1, *h.shape[-2:])
    dtype = model.params()[0].dtype
    outs = []
    for i in range(0, stack.shape[0], batch_size):
        x = to_channels(stack[i : i + batch_size]).astype(dtype)
        outs.append(from_channels(model.forward(x, train=False)))
    out = np.concatenate(outs, axis=0)
    return out[0] if single else out.reshape(h.shape)
