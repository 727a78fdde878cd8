"""layer specs: each owns its named parameters and knows its output shape"""

import numpy as np
from ..autodiff import (
    RunningStats,
    Tensor,
    activation,
    batchnorm2d,
    conv2d,
    conv_transpose2d,
    linear,
    pool_and_resize,
)
from ..shared.errors import ConfigurationError, DimensionError

INIT_STD = 0.02


def _normal(rng, shape, mean=0.0, std=INIT_STD):
    return Tensor(rng.normal(mean, std, size=shape), requires_grad=True)


def _zeros(shape):
    return Tensor(np.zeros(shape), requires_grad=True)


class Layer:
    """one step of a network; per-sample shapes exclude the batch axis"""

    kind = "layer"

    def __init__(self, name):
        self.name = name
        self.params = {}

    def parameters(self):
        return {f"{self.name}.{key}": value for key, value in self.params.items()}

    def buffers(self):
        return {}

    def output_shape(self, shape):
        return shape

    def forward(self, x, mode):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.name})"


class Conv2d(Layer):
    kind = "conv2d"

    def __init__(self, name, in_ch, out_ch, kernel, stride=1, pad=0, bias=True, rng=None):
        super().__init__(name)
        self.in_ch, self.out_ch = in_ch, out_ch
        self.kernel, self.stride, self.pad = kernel, stride, pad
        self.params["weight"] = _normal(rng, (out_ch, in_ch, kernel, kernel))
        if bias:
            self.params["bias"] = _zeros(out_ch)

    def output_shape(self, shape):
        if len(shape) != 3 or shape[0] != self.in_ch:
            raise DimensionError(f"{self.name}: expects {self.in_ch} x H x W, got {shape}")
        height = (shape[1] + 2 * self.pad - self.kernel) // self.stride + 1
        width = (shape[2] + 2 * self.pad - self.kernel) // self.stride + 1
        if height < 1 or width < 1:
            raise ConfigurationError(f"{self.name}: non-positive output size for input {shape}")
        return (self.out_ch, height, width)

    def forward(self, x, mode):
        return conv2d(x, self.params["weight"], self.params.get("bias"), self.stride, self.pad)


class ConvTranspose2d(Layer):
    kind = "conv_transpose2d"

    def __init__(self, name, in_ch, out_ch, kernel, stride=1, pad=0, bias=True, rng=None):
        super().__init__(name)
        self.in_ch, self.out_ch = in_ch, out_ch
        self.kernel, self.stride, self.pad = kernel, stride, pad
        self.params["weight"] = _normal(rng, (in_ch, out_ch, kernel, kernel))
        if bias:
            self.params["bias"] = _zeros(out_ch)

    def output_shape(self, shape):
        if len(shape) != 3 or shape[0] != self.in_ch:
            raise DimensionError(f"{self.name}: expects {self.in_ch} x H x W, got {shape}")
        height = (shape[1] - 1) * self.stride - 2 * self.pad + self.kernel
        width = (shape[2] - 1) * self.stride - 2 * self.pad + self.kernel
        if height < 1 or width < 1:
            raise ConfigurationError(f"{self.name}: non-positive output size for input {shape}")
        return (self.out_ch, height, width)

    def forward(self, x, mode):
        return conv_transpose2d(
            x, self.params["weight"], self.params.get("bias"), self.stride, self.pad
        )


class BatchNorm2d(Layer):
    kind = "batchnorm2d"

    def __init__(self, name, channels, momentum=0.1, eps=1e-5, rng=None):
        super().__init__(name)
        self.channels, self.momentum, self.eps = channels, momentum, eps
        self.params["gamma"] = _normal(rng, channels, mean=1.0)
        self.params["beta"] = _zeros(channels)
        self.running = RunningStats.fresh(channels)

    def buffers(self):
        return {
            f"{self.name}.running_mean": self.running.mean,
            f"{self.name}.running_var": self.running.var,
        }

    def output_shape(self, shape):
        if len(shape) != 3 or shape[0] != self.channels:
            raise DimensionError(f"{self.name}: expects {self.channels} x H x W, got {shape}")
        return shape

    def forward(self, x, mode):
        return batchnorm2d(
            x,
            self.params["gamma"],
            self.params["beta"],
            self.running,
            mode=mode,
            momentum=self.momentum,
            eps=self.eps,
        )


class Activation(Layer):
    kind = "activation"

    def __init__(self, name, fn, slope=0.2):
        super().__init__(name)
        self.fn, self.slope = fn, slope

    def forward(self, x, mode):
        return activation(x, self.fn, self.slope)


class Pool(Layer):
    kind = "pool"

    def __init__(self, name, fn):
        super().__init__(name)
        self.fn = fn

    def output_shape(self, shape):
        if len(shape) != 3:
            raise DimensionError(f"{self.name}: expects C x H x W, got {shape}")
        channels, height, width = shape
        if self.fn == "avg_pool2":
            if height % 2 or width % 2:
                raise DimensionError(f"{self.name}: avg_pool2 needs even dims, got {shape}")
            return (channels, height // 2, width // 2)
        if self.fn == "global_avg":
            return (channels,)
        return (channels, height * 2, width * 2)

    def forward(self, x, mode):
        return pool_and_resize(x, self.fn)


class Linear(Layer):
    kind = "linear"

    def __init__(self, name, in_features, out_features, bias=True, rng=None):
        super().__init__(name)
        self.in_features, self.out_features = in_features, out_features
        self.params["weight"] = _normal(rng, (out_features, in_features))
        if bias:
            self.params["bias"] = _zeros(out_features)

    def output_shape(self, shape):
        if shape != (self.in_features,):
            raise DimensionError(f"{self.name}: expects ({self.in_features},), got {shape}")
        return (self.out_features,)

    def forward(self, x, mode):
        return linear(x, self.params["weight"], self.params.get("bias"))


class Reshape(Layer):
    kind = "reshape"

    def __init__(self, name, shape):
        super().__init__(name)
        self.shape = tuple(shape)

    def output_shape(self, shape):
        if int(np.prod(shape)) != int(np.prod(self.shape)):
            raise DimensionError(f"{self.name}: cannot reshape {shape} to {self.shape}")
        return self.shape

    def forward(self, x, mode):
        return x.reshape((x.shape[0],) + self.shape)


class Tap(Layer):
    """marks a named intermediate output; forward is the identity"""

    kind = "tap"

    def forward(self, x, mode):
        return x
