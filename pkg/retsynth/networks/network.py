"""
An ordered stack of layers with named parameters and feature taps.

Shapes are validated when the network is built: each layer's `output_shape`
is chained from the entry shape, so a mismatch raises before any data flows.
Fully convolutional networks leave their spatial entry dims as None and are
validated on a probe shape instead.
"""

import hashlib
import logging
import numpy as np
from ..autodiff import Tensor, no_grad
from ..shared.errors import (
    ConfigurationError,
    ContractError,
    DimensionError,
    TapLookupError,
)
from .layers import Linear, Pool, Tap

logger = logging.getLogger(__name__)


class Network:
    """ordered layers with named parameters and taps

    Args:
        kind (str): builder registry key, used by checkpoints to rebuild
        layers (list[Layer]): applied in order
        input_shape (tuple): per-sample entry shape, None for free spatial dims
        spec (dict, optional): builder kwargs. Defaults to {}.
        probe_shape (tuple, optional): concrete entry shape for validation when
            input_shape has free dims
    """

    def __init__(self, kind, layers, input_shape, spec=None, probe_shape=None):
        self.kind = kind
        self.layers = list(layers)
        self.input_shape = tuple(input_shape)
        self.spec = dict(spec or {})
        self.mode = "train"

        names = [layer.name for layer in self.layers]
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            raise ConfigurationError(f"{kind}: duplicate layer names {duplicates}")
        self.taps = [layer.name for layer in self.layers if isinstance(layer, Tap)]

        if probe_shape is None:
            if None in self.input_shape:
                raise ConfigurationError(f"{kind}: free input dims need a probe shape")
            probe_shape = self.input_shape
        self.probe_shape = tuple(probe_shape)
        self.shapes = self._chain_shapes(self.probe_shape)

    def _chain_shapes(self, shape):
        shapes = {}
        for layer in self.layers:
            shape = tuple(layer.output_shape(shape))
            shapes[layer.name] = shape
        return shapes

    @property
    def output_shape(self):
        return self.shapes[self.layers[-1].name]

    def __repr__(self):
        return f"Network({self.kind}, {len(self.layers)} layers, {self.num_parameters()} params)"

    def layer(self, name):
        for layer in self.layers:
            if layer.name == name:
                return layer
        raise KeyError(name)

    # modes and parameters

    def train(self):
        self.mode = "train"
        return self

    def eval(self):
        self.mode = "eval"
        return self

    def parameters(self):
        params = {}
        for layer in self.layers:
            params.update(layer.parameters())
        return params

    def buffers(self):
        buffers = {}
        for layer in self.layers:
            buffers.update(layer.buffers())
        return buffers

    def zero_grad(self):
        for param in self.parameters().values():
            param.zero_grad()

    def num_parameters(self):
        return int(sum(param.data.size for param in self.parameters().values()))

    def state_dict(self):
        """copies of every parameter and buffer keyed by name"""
        state = {name: param.data.copy() for name, param in self.parameters().items()}
        state.update({name: buffer.copy() for name, buffer in self.buffers().items()})
        return state

    def load_state_dict(self, state):
        """copies arrays into the network after checking every name and shape

        Raises:
            ContractError: on missing, unexpected or mis-shaped entries; nothing is
                written in that case
        """
        params, buffers = self.parameters(), self.buffers()
        targets = {name: param.data for name, param in params.items()}
        targets.update(buffers)

        missing = sorted(set(targets) - set(state))
        unexpected = sorted(set(state) - set(targets))
        if missing or unexpected:
            raise ContractError(
                f"{self.kind}: state mismatch, missing {missing}, unexpected {unexpected}"
            )
        for name, target in targets.items():
            if np.shape(state[name]) != target.shape:
                raise ContractError(
                    f"{self.kind}: {name} has shape {np.shape(state[name])}, expected {target.shape}"
                )

        for name, param in params.items():
            param.data = np.array(state[name], dtype=param.data.dtype)
            param.grad = None
        for name, buffer in buffers.items():
            buffer[...] = state[name]

    def checksum(self):
        """sha1 over parameter names and float32 bytes"""
        digest = hashlib.sha1()
        for name, param in sorted(self.parameters().items()):
            digest.update(name.encode("utf-8"))
            digest.update(np.ascontiguousarray(param.data, dtype="<f4").tobytes())
        return digest.hexdigest()

    # evaluation

    def _check_input(self, x):
        shape = x.shape[1:]
        expected = self.input_shape
        if len(shape) != len(expected) or any(
            want is not None and got != want for got, want in zip(shape, expected)
        ):
            raise DimensionError(
                f"{self.kind}: input per-sample shape {shape} does not match {expected}"
            )

    def forward(self, x, want_taps=()):
        """runs every layer in order

        Args:
            x (Tensor | np.ndarray): batch with the entry shape
            want_taps (iterable[str], optional): tap names to return. Defaults to ().

        Raises:
            TapLookupError: if a requested tap does not exist
            DimensionError: if the input shape does not match the entry shape

        Returns:
            tuple[Tensor, dict]: the output and the requested taps by name
        """
        want_taps = list(want_taps or ())
        unknown = [name for name in want_taps if name not in self.taps]
        if unknown:
            raise TapLookupError(f"{self.kind}: unknown taps {unknown}, available {self.taps}")
        if not isinstance(x, Tensor):
            x = Tensor(x)
        self._check_input(x)

        taps = {}
        for layer in self.layers:
            x = layer.forward(x, self.mode)
            if layer.name in want_taps:
                taps[layer.name] = x
        return x, taps

    def __call__(self, x):
        return self.forward(x)[0]

    def predict(self, x, batch_size=64):
        """eval-mode outputs as a numpy array, batched and without a graph"""
        if len(x) == 0:
            raise ConfigurationError(f"{self.kind}: predict on an empty batch")
        previous = self.mode
        self.eval()
        try:
            with no_grad():
                outputs = [
                    self.forward(np.asarray(x[start : start + batch_size]))[0].numpy()
                    for start in range(0, len(x), batch_size)
                ]
        finally:
            self.mode = previous
        return np.concatenate(outputs, axis=0)

    def smoke_test(self, seed=0):
        """one-sample eval-mode forward/backward; every parameter must receive a gradient

        Raises:
            ContractError: on a wrong output shape or an unreachable parameter
        """
        previous = self.mode
        rng = np.random.default_rng(seed)
        self.eval()
        try:
            out, _ = self.forward(Tensor(rng.normal(size=(1,) + self.probe_shape)))
            if out.shape[1:] != self.output_shape:
                raise ContractError(
                    f"{self.kind}: output shape {out.shape[1:]} != built {self.output_shape}"
                )
            out.sum().backward()
            unreached = [name for name, param in self.parameters().items() if param.grad is None]
            if unreached:
                raise ContractError(f"{self.kind}: parameters unreachable from output {unreached}")
        finally:
            self.zero_grad()
            self.mode = previous
        logger.debug("%s passed the build smoke test", self.kind)

    def cam_head(self):
        """the linear layer that maps pooled "final_conv" features to logits

        Raises:
            ContractError: unless the network ends Tap("final_conv") -> global_avg -> Linear
        """
        names = [layer.name for layer in self.layers]
        if "final_conv" not in names:
            raise ContractError(f"{self.kind}: no final_conv tap, not CAM-compatible")
        tail = self.layers[names.index("final_conv") + 1 :]
        if (
            len(tail) != 2
            or not isinstance(tail[0], Pool)
            or tail[0].fn != "global_avg"
            or not isinstance(tail[1], Linear)
        ):
            raise ContractError(
                f"{self.kind}: final_conv must feed global_avg then a single linear layer, "
                f"got {tail}"
            )
        return tail[1]
