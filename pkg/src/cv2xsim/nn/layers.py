"""Layer primitives with explicit forward/backward passes.

Tensors are (batch, channels, height, width) real arrays; float32 in
production, float64 for gradient checking.  Convolutions are stride-1
cross-correlations with zero 'same' padding, evaluated as one GEMM against
a patch matrix built in (channel, kernel-row, kernel-col, position) order;
the patch rows are contiguous shifted copies of the padded input, which
keeps the copies sequential and cheap.
"""

from __future__ import annotations

import numpy as np


class _ConvGeometry:
    """Padded-flat geometry shared by the conv forward and backward passes."""

    def __init__(self, b, c, h, w, kh, kw):
        self.b, self.c, self.h, self.w, self.kh, self.kw = b, c, h, w, kh, kw
        self.hp, self.wp = h + kh - 1, w + kw - 1
        self.lp = self.hp * self.wp
        self.n = b * self.lp
        self.nv = self.n - (kh - 1) * self.wp - (kw - 1)


class _Workspace:
    """Reusable scratch buffers; avoids large alloc/page-fault churn per batch."""

    def __init__(self):
        self._bufs: dict = {}

    def get(self, key: str, shape: tuple, dtype) -> np.ndarray:
        buf = self._bufs.get(key)
        if buf is None or buf.shape != shape or buf.dtype != dtype:
            buf = np.empty(shape, dtype=dtype)
            self._bufs[key] = buf
        return buf


def _build_cols(
    x: np.ndarray, kh: int, kw: int, ws: _Workspace, tag: str
) -> tuple[np.ndarray, _ConvGeometry]:
    """Patch matrix (C*kh*kw, Nv) over the zero-padded, batch-flattened input."""
    b, c, h, w = x.shape
    g = _ConvGeometry(b, c, h, w, kh, kw)
    ph, pw = (kh - 1) // 2, (kw - 1) // 2
    xpad = ws.get(tag + ".pad", (c, b, g.hp, g.wp), x.dtype)
    xpad[:] = 0
    xpad[:, :, ph : ph + h, pw : pw + w] = x.transpose(1, 0, 2, 3)
    xf = xpad.reshape(c, g.n)
    cols = ws.get(tag + ".cols", (c, kh, kw, g.nv), x.dtype)
    for i in range(kh):
        for j in range(kw):
            off = i * g.wp + j
            cols[:, i, j, :] = xf[:, off : off + g.nv]
    return cols.reshape(c * kh * kw, g.nv), g


def _conv_gemm(
    cols: np.ndarray, wmat: np.ndarray, g: _ConvGeometry, out_ch: int, ws: _Workspace, tag: str
) -> np.ndarray:
    """cols (CK, Nv) x wmat (O, CK) -> (B, O, H, W) via the flat crop view."""
    y = ws.get(tag + ".out", (g.nv, out_ch), cols.dtype)
    np.dot(cols.T, wmat.T, out=y)  # (Nv, O): fastest orientation for skinny O
    it = y.itemsize
    view = np.lib.stride_tricks.as_strided(
        y,
        shape=(g.b, out_ch, g.h, g.w),
        strides=(g.lp * out_ch * it, it, g.wp * out_ch * it, out_ch * it),
    )
    return np.ascontiguousarray(view)


class Conv2D:
    """Stride-1 'same' convolution (cross-correlation) with bias."""

    def __init__(self, in_ch, out_ch, kh, kw, rng=None, dtype=np.float32):
        if kh % 2 == 0 or kw % 2 == 0:
            raise ValueError("kernel dims must be odd to preserve spatial shape")
        self.in_ch, self.out_ch, self.kh, self.kw = in_ch, out_ch, kh, kw
        bound = 1.0 / np.sqrt(in_ch * kh * kw)
        rng = rng or np.random.default_rng(0)
        self.weight = rng.uniform(-bound, bound, (out_ch, in_ch, kh, kw)).astype(dtype)
        self.bias = np.zeros(out_ch, dtype=dtype)
        self.grad_weight = np.zeros_like(self.weight)
        self.grad_bias = np.zeros_like(self.bias)
        self._ws = _Workspace()
        self._cols = None
        self._geom = None

    def forward(self, x: np.ndarray, train: bool = True) -> np.ndarray:
        if x.ndim != 4 or x.shape[1] != self.in_ch:
            raise ValueError(f"expected (B, {self.in_ch}, H, W) input, got {x.shape}")
        cols, geom = _build_cols(x, self.kh, self.kw, self._ws, "fwd")
        y = _conv_gemm(cols, self.weight.reshape(self.out_ch, -1), geom, self.out_ch, self._ws, "fwd")
        y += self.bias[:, None, None]
        # the workspace is shared, so an inference pass invalidates any
        # pending backward state
        self._cols, self._geom = (cols, geom) if train else (None, None)
        return y

    def backward(self, grad_out: np.ndarray, need_grad_x: bool = True) -> np.ndarray | None:
        g = self._geom
        # zero-embed grad_out into the padded-flat geometry, channels last
        gz = self._ws.get("bwd.gz", (g.b, g.lp, grad_out.shape[1]), grad_out.dtype)
        gz[:] = 0
        gz.reshape(g.b, g.hp, g.wp, -1)[:, : g.h, : g.w, :] = grad_out.transpose(0, 2, 3, 1)
        gnv = gz.reshape(g.n, -1)[: g.nv]
        self.grad_weight = (self._cols @ gnv).T.reshape(self.weight.shape)
        self.grad_bias = grad_out.sum(axis=(0, 2, 3))
        self._cols = None
        if not need_grad_x:
            return None
        # full correlation with flipped, in/out-transposed kernels
        flipped = np.ascontiguousarray(
            self.weight[:, :, ::-1, ::-1].transpose(1, 0, 2, 3)
        )
        gcols, ggeom = _build_cols(grad_out, self.kh, self.kw, self._ws, "bwd")
        return _conv_gemm(gcols, flipped.reshape(self.in_ch, -1), ggeom, self.in_ch, self._ws, "bwd")

    def params(self):
        return [self.weight, self.bias]

    def grads(self):
        return [self.grad_weight, self.grad_bias]


class BatchNorm2D:
    """Per-channel batch normalization over (batch, height, width)."""

    def __init__(self, ch, momentum=0.1, eps=1e-5, dtype=np.float32):
        if eps <= 0:
            raise ValueError("eps must be positive")
        self.ch = ch
        self.momentum = momentum
        self.eps = eps
        self.gamma = np.ones(ch, dtype=dtype)
        self.beta = np.zeros(ch, dtype=dtype)
        self.running_mean = np.zeros(ch, dtype=dtype)
        self.running_var = np.ones(ch, dtype=dtype)
        self.grad_gamma = np.zeros_like(self.gamma)
        self.grad_beta = np.zeros_like(self.beta)
        self._cache = None

    def forward(self, x: np.ndarray, train: bool = True) -> np.ndarray:
        if x.shape[1] != self.ch:
            raise ValueError(f"expected {self.ch} channels, got {x.shape[1]}")
        if train:
            if x.shape[0] < 2:
                raise ValueError("batch normalization needs batch >= 2 in train mode")
            mean = x.mean(axis=(0, 2, 3))
            var = x.var(axis=(0, 2, 3))
            m = self.momentum
            self.running_mean = ((1 - m) * self.running_mean + m * mean).astype(
                self.running_mean.dtype
            )
            self.running_var = ((1 - m) * self.running_var + m * var).astype(
                self.running_var.dtype
            )
        else:
            mean = self.running_mean
            var = self.running_var
        inv_std = (1.0 / np.sqrt(var + self.eps)).astype(x.dtype)
        xhat = x - mean[:, None, None].astype(x.dtype)
        xhat *= inv_std[:, None, None]
        if train:
            self._cache = (xhat, inv_std)
        return self.gamma[:, None, None] * xhat + self.beta[:, None, None]

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        xhat, inv_std = self._cache
        n = grad_out.shape[0] * grad_out.shape[2] * grad_out.shape[3]
        self.grad_beta = grad_out.sum(axis=(0, 2, 3))
        self.grad_gamma = (grad_out * xhat).sum(axis=(0, 2, 3))
        scale = (self.gamma * inv_std / n)[:, None, None]
        gx = n * grad_out
        gx -= self.grad_beta[:, None, None]
        gx -= xhat * self.grad_gamma[:, None, None]
        gx *= scale
        self._cache = None
        return gx

    def params(self):
        return [self.gamma, self.beta]

    def grads(self):
        return [self.grad_gamma, self.grad_beta]


class ReLU:
    """Elementwise max(0, x); ``inplace`` clobbers the input (safe after BN)."""

    def __init__(self, inplace: bool = False):
        self.inplace = inplace
        self._mask = None

    def forward(self, x: np.ndarray, train: bool = True) -> np.ndarray:
        if train:
            self._mask = x > 0
            out = x if self.inplace else np.empty_like(x)
            return np.multiply(x, self._mask, out=out)
        return np.maximum(x, 0)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        gx = grad_out * self._mask
        self._mask = None
        return gx

    def params(self):
        return []

    def grads(self):
        return []


class Dense:
    """Position-wise linear map: (out_ch x in_ch) applied at every pixel."""

    def __init__(self, in_ch, out_ch, rng=None, dtype=np.float32):
        bound = 1.0 / np.sqrt(in_ch)
        rng = rng or np.random.default_rng(0)
        self.in_ch, self.out_ch = in_ch, out_ch
        self.weight = rng.uniform(-bound, bound, (out_ch, in_ch)).astype(dtype)
        self.bias = np.zeros(out_ch, dtype=dtype)
        self.grad_weight = np.zeros_like(self.weight)
        self.grad_bias = np.zeros_like(self.bias)
        self._x = None

    def forward(self, x: np.ndarray, train: bool = True) -> np.ndarray:
        if x.shape[1] != self.in_ch:
            raise ValueError(f"expected {self.in_ch} channels, got {x.shape[1]}")
        if train:
            self._x = x
        y = np.tensordot(self.weight, x, axes=([1], [1]))  # (out, B, H, W)
        return np.ascontiguousarray(y.transpose(1, 0, 2, 3)) + self.bias[:, None, None]

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        self.grad_weight = np.tensordot(grad_out, self._x, axes=([0, 2, 3], [0, 2, 3]))
        self.grad_bias = grad_out.sum(axis=(0, 2, 3))
        gx = np.tensordot(self.weight.T, grad_out, axes=([1], [1]))
        self._x = None
        return np.ascontiguousarray(gx.transpose(1, 0, 2, 3))

    def params(self):
        return [self.weight, self.bias]

    def grads(self):
        return [self.grad_weight, self.grad_bias]


def mse_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error over all elements and its gradient wrt pred."""
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    diff = pred - target
    flat = diff.reshape(-1).astype(np.float64, copy=False)
    loss = float(np.dot(flat, flat) / flat.size)
    grad = (2.0 / diff.size) * diff
    return loss, grad
