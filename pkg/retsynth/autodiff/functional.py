"""
Differentiable layer operations: convolutions, batch normalization,
activations, pooling/resizing, the linear map and the training losses.

All image tensors are NCHW. Apart from bias-over-channels no operation
broadcasts; shape mismatches raise DimensionError naming the axes involved.
"""

from dataclasses import dataclass
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from ..shared.constants import PROB_CLAMP
from ..shared.errors import (
    ConfigurationError,
    ContractError,
    DegenerateInputError,
    DimensionError,
    LabelError,
)
from .tensor import Function, Tensor


def _windows(padded, kernel_h, kernel_w, stride):
    """(N, C, Hp, Wp) -> read-only (N, C, Ho, Wo, kh, kw) view of the strided windows"""
    win = sliding_window_view(padded, (kernel_h, kernel_w), axis=(2, 3))
    return win[:, :, ::stride, ::stride]


def _scatter_windows(cols, full_shape, stride):
    """adjoint of `_windows`: sums (N, C, Ho, Wo, kh, kw) window values into (N, C, Hp, Wp)"""
    out = np.zeros(full_shape, dtype=cols.dtype)
    out_h, out_w, kernel_h, kernel_w = cols.shape[2:]
    for i in range(kernel_h):
        for j in range(kernel_w):
            out[:, :, i : i + stride * out_h : stride, j : j + stride * out_w : stride] += cols[
                :, :, :, :, i, j
            ]
    return out


def _pad(x, pad):
    if pad == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))


def _unpad(x, pad):
    if pad == 0:
        return x
    return x[:, :, pad:-pad, pad:-pad]


def _check_conv_args(op, x, weight, bias, stride, pad, in_axis):
    if x.ndim != 4:
        raise DimensionError(f"{op}: input must be 4-D NCHW, got shape {x.shape}")
    if weight.ndim != 4:
        raise DimensionError(f"{op}: weight must be 4-D, got shape {weight.shape}")
    if x.shape[1] != weight.shape[in_axis]:
        raise DimensionError(
            f"{op}: input channels (axis 1) = {x.shape[1]} but weight in-channels "
            f"(axis {in_axis}) = {weight.shape[in_axis]}"
        )
    out_axis = 1 - in_axis
    if bias is not None and bias.shape != (weight.shape[out_axis],):
        raise DimensionError(
            f"{op}: bias shape {bias.shape} != ({weight.shape[out_axis]},) out-channels"
        )
    if stride < 1:
        raise ConfigurationError(f"{op}: stride must be >= 1, got {stride}")
    if pad < 0:
        raise ConfigurationError(f"{op}: pad must be >= 0, got {pad}")


class Conv2dFn(Function):
    def forward(self, x, weight, *bias, stride, pad):
        kernel_h, kernel_w = weight.shape[2:]
        win = _windows(_pad(x, pad), kernel_h, kernel_w, stride)
        # (N, Ho, Wo, O) -> (N, O, Ho, Wo)
        out = np.tensordot(win, weight, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
        if bias:
            out = out + bias[0][None, :, None, None]
        self.saved.update(win=win, weight=weight, x_shape=x.shape, stride=stride, pad=pad)
        return np.ascontiguousarray(out)

    def backward(self, grad):
        win, weight = self.saved["win"], self.saved["weight"]
        stride, pad = self.saved["stride"], self.saved["pad"]
        n, c, h, w = self.saved["x_shape"]

        grad_w = np.tensordot(grad, win, axes=([0, 2, 3], [0, 2, 3]))
        cols = np.tensordot(grad, weight, axes=([1], [0])).transpose(0, 3, 1, 2, 4, 5)
        grad_x = _unpad(_scatter_windows(cols, (n, c, h + 2 * pad, w + 2 * pad), stride), pad)
        grads = [np.ascontiguousarray(grad_x), grad_w]
        if len(self.inputs) == 3:
            grads.append(grad.sum(axis=(0, 2, 3)))
        return tuple(grads)


class ConvTranspose2dFn(Function):
    def forward(self, x, weight, *bias, stride, pad):
        n, _, h, w = x.shape
        out_ch, kernel_h, kernel_w = weight.shape[1:]
        full_shape = (n, out_ch, (h - 1) * stride + kernel_h, (w - 1) * stride + kernel_w)
        # (N, H, W, O, kh, kw) -> (N, O, H, W, kh, kw)
        cols = np.tensordot(x, weight, axes=([1], [0])).transpose(0, 3, 1, 2, 4, 5)
        out = _unpad(_scatter_windows(cols, full_shape, stride), pad)
        if bias:
            out = out + bias[0][None, :, None, None]
        self.saved.update(x=x, weight=weight, stride=stride, pad=pad)
        return np.ascontiguousarray(out)

    def backward(self, grad):
        x, weight = self.saved["x"], self.saved["weight"]
        stride, pad = self.saved["stride"], self.saved["pad"]
        kernel_h, kernel_w = weight.shape[2:]

        win = _windows(_pad(grad, pad), kernel_h, kernel_w, stride)
        grad_x = np.tensordot(win, weight, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
        grad_w = np.tensordot(x, win, axes=([0, 2, 3], [0, 2, 3]))
        grads = [np.ascontiguousarray(grad_x), grad_w]
        if len(self.inputs) == 3:
            grads.append(grad.sum(axis=(0, 2, 3)))
        return tuple(grads)


def conv2d(x, weight, bias=None, stride=1, pad=0):
    """2-D cross-correlation with zero padding

    Args:
        x (Tensor): N x C x H x W input
        weight (Tensor): O x C x kh x kw kernel
        bias (Tensor, optional): length-O bias. Defaults to None.
        stride (int, optional): Defaults to 1.
        pad (int, optional): zero padding on each side. Defaults to 0.

    Raises:
        DimensionError: if channel counts or bias length do not match
        ConfigurationError: if stride/pad are invalid or the output would be empty

    Returns:
        Tensor: N x O x Ho x Wo with Ho = (H + 2 pad - kh) // stride + 1
    """
    _check_conv_args("conv2d", x, weight, bias, stride, pad, in_axis=1)
    out_h = (x.shape[2] + 2 * pad - weight.shape[2]) // stride + 1
    out_w = (x.shape[3] + 2 * pad - weight.shape[3]) // stride + 1
    if out_h < 1 or out_w < 1 or x.shape[2] + 2 * pad < weight.shape[2]:
        raise ConfigurationError(
            f"conv2d: non-positive output size {out_h}x{out_w} for input {x.shape[2:]} "
            f"kernel {weight.shape[2:]} stride {stride} pad {pad}"
        )
    inputs = (x, weight) if bias is None else (x, weight, bias)
    return Conv2dFn.apply(*inputs, stride=stride, pad=pad)


def conv_transpose2d(x, weight, bias=None, stride=1, pad=0):
    """transposed convolution, the adjoint of conv2d with the same weight

    Args:
        x (Tensor): N x I x H x W input
        weight (Tensor): I x O x kh x kw kernel
        bias (Tensor, optional): length-O bias. Defaults to None.
        stride (int, optional): Defaults to 1.
        pad (int, optional): Defaults to 0.

    Returns:
        Tensor: N x O x Ho x Wo with Ho = (H - 1) * stride - 2 pad + kh
    """
    _check_conv_args("conv_transpose2d", x, weight, bias, stride, pad, in_axis=0)
    out_h = (x.shape[2] - 1) * stride - 2 * pad + weight.shape[2]
    out_w = (x.shape[3] - 1) * stride - 2 * pad + weight.shape[3]
    if out_h < 1 or out_w < 1:
        raise ConfigurationError(
            f"conv_transpose2d: non-positive output size {out_h}x{out_w} for input "
            f"{x.shape[2:]} kernel {weight.shape[2:]} stride {stride} pad {pad}"
        )
    inputs = (x, weight) if bias is None else (x, weight, bias)
    return ConvTranspose2dFn.apply(*inputs, stride=stride, pad=pad)


@dataclass
class RunningStats:
    """per-channel running mean/variance kept by a batchnorm layer"""

    mean: np.ndarray
    var: np.ndarray

    @classmethod
    def fresh(cls, channels, dtype=np.float32):
        return cls(mean=np.zeros(channels, dtype=dtype), var=np.ones(channels, dtype=dtype))


class BatchNorm2dFn(Function):
    def forward(self, x, gamma, beta, running, training, momentum, eps):
        if training:
            n_per_channel = x.shape[0] * x.shape[2] * x.shape[3]
            if n_per_channel < 2:
                raise DegenerateInputError(
                    "batchnorm2d: train mode needs more than one value per channel "
                    f"(batch {x.shape[0]}, spatial {x.shape[2]}x{x.shape[3]})"
                )
            mean = x.mean(axis=(0, 2, 3))
            var = x.var(axis=(0, 2, 3))
            unbiased = var * (n_per_channel / (n_per_channel - 1))
            running.mean[...] = (1 - momentum) * running.mean + momentum * mean
            running.var[...] = (1 - momentum) * running.var + momentum * unbiased
        else:
            mean, var = running.mean.astype(x.dtype), running.var.astype(x.dtype)

        inv_std = 1.0 / np.sqrt(var + eps)
        x_hat = (x - mean[None, :, None, None]) * inv_std[None, :, None, None]
        self.saved.update(x_hat=x_hat, inv_std=inv_std, gamma=gamma, training=training)
        return gamma[None, :, None, None] * x_hat + beta[None, :, None, None]

    def backward(self, grad):
        x_hat, inv_std = self.saved["x_hat"], self.saved["inv_std"]
        gamma = self.saved["gamma"]
        grad_gamma = (grad * x_hat).sum(axis=(0, 2, 3))
        grad_beta = grad.sum(axis=(0, 2, 3))
        grad_xhat = grad * gamma[None, :, None, None]

        if self.saved["training"]:
            count = grad.shape[0] * grad.shape[2] * grad.shape[3]
            sum_g = grad_xhat.sum(axis=(0, 2, 3))[None, :, None, None]
            sum_gx = (grad_xhat * x_hat).sum(axis=(0, 2, 3))[None, :, None, None]
            grad_x = (
                inv_std[None, :, None, None] / count * (count * grad_xhat - sum_g - x_hat * sum_gx)
            )
        else:
            grad_x = grad_xhat * inv_std[None, :, None, None]
        return grad_x, grad_gamma, grad_beta


def batchnorm2d(x, gamma, beta, running_stats, mode="train", momentum=0.1, eps=1e-5):
    """per-channel batch normalization

    In train mode the batch statistics over N*H*W normalize the input and the
    running statistics move by an exponential moving average with `momentum`.
    In eval mode the running statistics are used.

    Raises:
        DimensionError: if gamma/beta length differs from the channel count
        DegenerateInputError: train mode with a single value per channel
    """
    if x.ndim != 4:
        raise DimensionError(f"batchnorm2d: input must be 4-D NCHW, got shape {x.shape}")
    channels = x.shape[1]
    if gamma.shape != (channels,) or beta.shape != (channels,):
        raise DimensionError(
            f"batchnorm2d: gamma {gamma.shape} / beta {beta.shape} must have length C={channels}"
        )
    if eps <= 0:
        raise ConfigurationError(f"batchnorm2d: eps must be positive, got {eps}")
    if mode not in ("train", "eval"):
        raise ConfigurationError(f"batchnorm2d: mode must be train or eval, got {mode}")
    return BatchNorm2dFn.apply(
        x,
        gamma,
        beta,
        running=running_stats,
        training=mode == "train",
        momentum=momentum,
        eps=eps,
    )


class ReluFn(Function):
    def forward(self, x):
        self.saved["mask"] = x > 0
        return np.where(self.saved["mask"], x, 0).astype(x.dtype)

    def backward(self, grad):
        # subgradient 0 at the kink
        return (grad * self.saved["mask"],)


class LeakyReluFn(Function):
    def forward(self, x, slope):
        mask = x > 0
        self.saved.update(mask=mask, slope=slope)
        return np.where(mask, x, x * x.dtype.type(slope))

    def backward(self, grad):
        mask, slope = self.saved["mask"], self.saved["slope"]
        return (np.where(mask, grad, grad * grad.dtype.type(slope)),)


class TanhFn(Function):
    def forward(self, x):
        out = np.tanh(x)
        self.saved["out"] = out
        return out

    def backward(self, grad):
        out = self.saved["out"]
        return (grad * (1 - out * out),)


class SigmoidFn(Function):
    def forward(self, x):
        out = 0.5 * (1 + np.tanh(0.5 * x))
        self.saved["out"] = out
        return out.astype(x.dtype)

    def backward(self, grad):
        out = self.saved["out"]
        return (grad * out * (1 - out),)


def activation(x, kind, slope=0.2):
    """elementwise activation: relu, leaky_relu(slope), tanh or sigmoid"""
    if kind == "relu":
        return ReluFn.apply(x)
    if kind == "leaky_relu":
        if not 0 < slope < 1:
            raise ConfigurationError(f"leaky_relu slope must be in (0, 1), got {slope}")
        return LeakyReluFn.apply(x, slope=slope)
    if kind == "tanh":
        return TanhFn.apply(x)
    if kind == "sigmoid":
        return SigmoidFn.apply(x)
    raise ConfigurationError(f"unknown activation '{kind}'")


class AvgPool2Fn(Function):
    def forward(self, x):
        n, c, h, w = x.shape
        return x.reshape(n, c, h // 2, 2, w // 2, 2).mean(axis=(3, 5))

    def backward(self, grad):
        up = np.repeat(np.repeat(grad, 2, axis=2), 2, axis=3)
        return (up * grad.dtype.type(0.25),)


class GlobalAvgFn(Function):
    def forward(self, x):
        self.saved["shape"] = x.shape
        return x.mean(axis=(2, 3))

    def backward(self, grad):
        n, c, h, w = self.saved["shape"]
        spread = grad[:, :, None, None] / (h * w)
        return (np.broadcast_to(spread, (n, c, h, w)).astype(grad.dtype),)


class NearestUpsample2Fn(Function):
    def forward(self, x):
        return np.repeat(np.repeat(x, 2, axis=2), 2, axis=3)

    def backward(self, grad):
        n, c, h, w = grad.shape
        return (grad.reshape(n, c, h // 2, 2, w // 2, 2).sum(axis=(3, 5)),)


def pool_and_resize(x, kind):
    """avg_pool2 (2x2 mean), global_avg (N x C) or nearest_upsample2 (doubles H, W)"""
    if x.ndim != 4:
        raise DimensionError(f"{kind}: input must be 4-D NCHW, got shape {x.shape}")
    if kind == "avg_pool2":
        if x.shape[2] % 2 or x.shape[3] % 2:
            raise DimensionError(
                f"avg_pool2 needs even spatial dims (axes 2, 3), got {x.shape[2]}x{x.shape[3]}"
            )
        return AvgPool2Fn.apply(x)
    if kind == "global_avg":
        return GlobalAvgFn.apply(x)
    if kind == "nearest_upsample2":
        return NearestUpsample2Fn.apply(x)
    raise ConfigurationError(f"unknown pool/resize kind '{kind}'")


class LinearFn(Function):
    def forward(self, x, weight, *bias):
        self.saved.update(x=x, weight=weight)
        out = x @ weight.T
        if bias:
            out = out + bias[0][None, :]
        return out

    def backward(self, grad):
        x, weight = self.saved["x"], self.saved["weight"]
        grads = [grad @ weight, grad.T @ x]
        if len(self.inputs) == 3:
            grads.append(grad.sum(axis=0))
        return tuple(grads)


def linear(x, weight, bias=None):
    """x @ weight.T + bias for x: N x in, weight: out x in"""
    if x.ndim != 2 or weight.ndim != 2 or x.shape[1] != weight.shape[1]:
        raise DimensionError(
            f"linear: input {x.shape} (axis 1) does not match weight {weight.shape} (axis 1)"
        )
    if bias is not None and bias.shape != (weight.shape[0],):
        raise DimensionError(f"linear: bias shape {bias.shape} != ({weight.shape[0]},)")
    inputs = (x, weight) if bias is None else (x, weight, bias)
    return LinearFn.apply(*inputs)


class BceFn(Function):
    def forward(self, pred, target):
        clipped = np.clip(pred, PROB_CLAMP, 1 - PROB_CLAMP)
        self.saved.update(clipped=clipped, target=target, inside=(pred == clipped))
        loss = -(target * np.log(clipped) + (1 - target) * np.log(1 - clipped))
        return np.asarray(loss.mean(), dtype=pred.dtype)

    def backward(self, grad):
        clipped, target = self.saved["clipped"], self.saved["target"]
        local = -(target / clipped - (1 - target) / (1 - clipped)) / clipped.size
        # clamped entries are constant, so they pass no gradient
        return grad * local * self.saved["inside"], None


class SoftmaxXentFn(Function):
    def forward(self, logits, target):
        shifted = logits - logits.max(axis=1, keepdims=True)
        log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        self.saved.update(probs=np.exp(log_probs), target=target)
        picked = log_probs[np.arange(len(target)), target]
        return np.asarray(-picked.mean(), dtype=logits.dtype)

    def backward(self, grad):
        probs, target = self.saved["probs"], self.saved["target"]
        local = probs.copy()
        local[np.arange(len(target)), target] -= 1
        return grad * local / len(target), None


class L2Fn(Function):
    def forward(self, pred, target):
        diff = pred - target
        self.saved["diff"] = diff
        return np.asarray((diff * diff).mean(), dtype=pred.dtype)

    def backward(self, grad):
        diff = self.saved["diff"]
        local = grad * 2 * diff / diff.size
        return local, -local


def _as_tensor(value):
    if isinstance(value, Tensor):
        return value
    return Tensor(value, requires_grad=False)


def losses(pred, target, kind):
    """mean loss over the batch

    Args:
        pred (Tensor): probabilities in (0, 1) for bce, N x K logits for
            softmax_xent, anything for l2
        target: array of {0, 1} (bce), class indices (softmax_xent) or a
            same-shape tensor/array (l2)
        kind (str): bce, softmax_xent or l2

    Raises:
        DimensionError: on shape mismatch
        LabelError: class index out of range
        ContractError: bce targets outside {0, 1}

    Returns:
        Tensor: scalar loss
    """
    if kind == "bce":
        target = _as_tensor(np.asarray(target, dtype=pred.dtype))
        if target.shape != pred.shape:
            raise DimensionError(f"bce: target shape {target.shape} != pred shape {pred.shape}")
        if not np.all((target.data == 0) | (target.data == 1)):
            raise ContractError("bce: targets must be 0 or 1")
        return BceFn.apply(pred, target)

    if kind == "softmax_xent":
        if pred.ndim != 2:
            raise DimensionError(f"softmax_xent: logits must be N x K, got {pred.shape}")
        indices = np.asarray(target)
        if indices.shape != (pred.shape[0],):
            raise DimensionError(
                f"softmax_xent: {indices.shape} targets for {pred.shape[0]} samples"
            )
        if not np.issubdtype(indices.dtype, np.integer):
            raise LabelError("softmax_xent: targets must be integer class indices")
        if np.any(indices < 0) or np.any(indices >= pred.shape[1]):
            raise LabelError(
                f"softmax_xent: class index out of range [0, {pred.shape[1]}): "
                f"{indices[(indices < 0) | (indices >= pred.shape[1])].tolist()}"
            )
        return SoftmaxXentFn.apply(pred, Tensor._from_op(indices, None, False))

    if kind == "l2":
        target = _as_tensor(target)
        if target.shape != pred.shape:
            raise DimensionError(f"l2: target shape {target.shape} != pred shape {pred.shape}")
        return L2Fn.apply(pred, target)

    raise ConfigurationError(f"unknown loss kind '{kind}'")


def softmax(logits):
    """row-wise softmax of an N x K numpy array (no graph)"""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)
