"""
Dense tensors with reverse-mode automatic differentiation.

A `Tensor` wraps a numpy array. Every differentiable operation is a `Function`
subclass; applying it records the function as the creator of its output, so the
outputs of a forward pass form an acyclic graph that `Tensor.backward` walks in
reverse topological order.
"""

import contextlib
import logging
import threading
from abc import abstractmethod
from dataclasses import dataclass, field
import numpy as np
from ..shared.errors import ContractError, DimensionError, NumericError

logger = logging.getLogger(__name__)

_state = threading.local()


def get_default_dtype():
    """dtype new leaf tensors are created with (float32 unless inside `precision`)"""
    return getattr(_state, "dtype", np.float32)


def is_grad_enabled():
    """whether operations currently record a graph"""
    return getattr(_state, "grad_enabled", True)


@contextlib.contextmanager
def precision(dtype):
    """selects the float precision of new leaf tensors for the duration of the block

    Args:
        dtype (numpy dtype): np.float32 or np.float64
    """
    dtype = np.dtype(dtype).type
    if dtype not in (np.float32, np.float64):
        raise ContractError(f"precision must be float32 or float64, got {dtype}")
    previous = get_default_dtype()
    _state.dtype = dtype
    try:
        yield
    finally:
        _state.dtype = previous


@contextlib.contextmanager
def no_grad():
    """operations inside the block record no graph"""
    previous = is_grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


class Function:
    """
    Base class for differentiable operations.

    Subclasses implement `forward` on numpy arrays and `backward`, which maps the
    gradient of the loss with respect to the output to one gradient per input
    (or None for inputs that get no gradient). Values needed by `backward` are
    kept in `self.saved`.
    """

    def __init__(self, *inputs):
        self.inputs = inputs
        self.saved = {}

    @property
    def name(self):
        """op kind as recorded in the graph"""
        return type(self).__name__

    @abstractmethod
    def forward(self, *arrays, **kwargs):
        """computes the output array from the input arrays"""
        raise NotImplementedError("Forward pass not implemented for this function")

    @abstractmethod
    def backward(self, grad):
        """returns a tuple with one gradient array (or None) per input"""
        raise NotImplementedError("Backward pass not implemented for this function")

    @classmethod
    def apply(cls, *inputs, **kwargs):
        """runs the forward pass and wires the result into the graph

        Raises:
            NumericError: if the output holds NaN or Inf
        """
        func = cls(*inputs)
        out = np.asarray(func.forward(*(inp.data for inp in inputs), **kwargs))
        if not np.all(np.isfinite(out)):
            raise NumericError(f"{func.name} produced non-finite values")

        requires_grad = is_grad_enabled() and any(inp.requires_grad for inp in inputs)
        if not requires_grad:
            func.saved.clear()
        return Tensor._from_op(out, func if requires_grad else None, requires_grad)


class Tensor:
    """
    A dense float array with optional gradient tracking.

    Leaf tensors are cast to the current default precision. `grad` is a numpy
    array of the same shape, populated (and accumulated) by `backward`.
    """

    def __init__(self, data, requires_grad=False):
        self.data = np.array(data, dtype=get_default_dtype())
        if not np.all(np.isfinite(self.data)):
            raise NumericError("tensor data holds non-finite values")
        self.requires_grad = requires_grad
        self.grad = None
        self.creator = None

    @classmethod
    def _from_op(cls, data, creator, requires_grad):
        out = cls.__new__(cls)
        out.data = data
        out.requires_grad = requires_grad
        out.grad = None
        out.creator = creator
        return out

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def ndim(self):
        return self.data.ndim

    def __len__(self):
        return len(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, dtype={self.dtype}, requires_grad={self.requires_grad})"

    def numpy(self):
        """the underlying array (not a copy)"""
        return self.data

    def item(self):
        return self.data.item()

    def detach(self):
        """a leaf tensor sharing the data but cut off from the graph"""
        return Tensor._from_op(self.data, None, False)

    def zero_grad(self):
        self.grad = None

    def backward(self):
        """backpropagates from this scalar, accumulating into every requires_grad leaf

        Calling backward twice without zeroing accumulates the gradients.

        Raises:
            ContractError: if the tensor is not a scalar
        """
        if self.data.size != 1:
            raise ContractError(f"backward needs a scalar loss, got shape {self.shape}")
        Graph.from_output(self).backward()

    # arithmetic

    def __add__(self, other):
        if isinstance(other, Tensor):
            return Add.apply(self, other)
        return ScalarAffine.apply(self, scale=1.0, shift=float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Tensor):
            return Sub.apply(self, other)
        return ScalarAffine.apply(self, scale=1.0, shift=-float(other))

    def __rsub__(self, other):
        return ScalarAffine.apply(self, scale=-1.0, shift=float(other))

    def __mul__(self, other):
        if isinstance(other, Tensor):
            return Mul.apply(self, other)
        return ScalarAffine.apply(self, scale=float(other), shift=0.0)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            raise NotImplementedError("division is only supported by a scalar")
        return ScalarAffine.apply(self, scale=1.0 / float(other), shift=0.0)

    def __neg__(self):
        return ScalarAffine.apply(self, scale=-1.0, shift=0.0)

    def __pow__(self, exponent):
        return Pow.apply(self, exponent=float(exponent))

    def sum(self):
        return Sum.apply(self)

    def mean(self):
        return Mean.apply(self)

    def log(self):
        return Log.apply(self)

    def exp(self):
        return Exp.apply(self)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return Reshape.apply(self, shape=shape)


@dataclass
class Graph:
    """
    Topologically ordered view of the tensors a scalar output depends on.

    `nodes` lists tensors so that every input precedes its consumers; `ops`
    gives the (op kind, input ids) record of each non-leaf node.
    """

    nodes: list = field(default_factory=list)
    output: Tensor = None

    @classmethod
    def from_output(cls, output):
        """collects the graph behind `output` by iterative post-order traversal"""
        order = []
        visited = set()
        stack = [(output, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            if node.creator is not None:
                for inp in node.creator.inputs:
                    if id(inp) not in visited:
                        stack.append((inp, False))
        return cls(nodes=order, output=output)

    @property
    def ops(self):
        return [
            (node.creator.name, [id(inp) for inp in node.creator.inputs])
            for node in self.nodes
            if node.creator is not None
        ]

    def backward(self):
        """visits each node once in reverse topological order"""
        grads = {id(self.output): np.ones_like(self.output.data)}
        for node in reversed(self.nodes):
            grad = grads.pop(id(node), None)
            if grad is None or not node.requires_grad:
                continue

            if node.creator is None:
                grad = grad.astype(node.data.dtype, copy=False)
                node.grad = grad.copy() if node.grad is None else node.grad + grad
                continue

            input_grads = node.creator.backward(grad)
            assert len(input_grads) == len(node.creator.inputs), (
                f"{node.creator.name} returned {len(input_grads)} gradients "
                f"for {len(node.creator.inputs)} inputs"
            )
            for inp, inp_grad in zip(node.creator.inputs, input_grads):
                if inp_grad is None or not inp.requires_grad:
                    continue
                assert inp_grad.shape == inp.shape, (
                    f"{node.creator.name} gradient shape {inp_grad.shape} != input shape {inp.shape}"
                )
                key = id(inp)
                grads[key] = inp_grad if key not in grads else grads[key] + inp_grad


def _check_same_shape(op, a, b):
    if a.shape != b.shape:
        axes = [
            i for i, (m, n) in enumerate(zip(a.shape, b.shape)) if m != n
        ] or "rank"
        raise DimensionError(
            f"{op}: shapes {a.shape} and {b.shape} differ (axes {axes}); "
            "implicit broadcasting is not supported"
        )


class Add(Function):
    def forward(self, a, b):
        _check_same_shape("add", a, b)
        return a + b

    def backward(self, grad):
        return grad, grad


class Sub(Function):
    def forward(self, a, b):
        _check_same_shape("sub", a, b)
        return a - b

    def backward(self, grad):
        return grad, -grad


class Mul(Function):
    def forward(self, a, b):
        _check_same_shape("mul", a, b)
        self.saved["a"], self.saved["b"] = a, b
        return a * b

    def backward(self, grad):
        return grad * self.saved["b"], grad * self.saved["a"]


class ScalarAffine(Function):
    """scale * x + shift for python scalars"""

    def forward(self, x, scale, shift):
        self.saved["scale"] = scale
        return x * x.dtype.type(scale) + x.dtype.type(shift)

    def backward(self, grad):
        return (grad * grad.dtype.type(self.saved["scale"]),)


class Pow(Function):
    def forward(self, x, exponent):
        self.saved["x"], self.saved["exponent"] = x, exponent
        return x**exponent

    def backward(self, grad):
        x, exponent = self.saved["x"], self.saved["exponent"]
        return (grad * exponent * x ** (exponent - 1),)


class Log(Function):
    def forward(self, x):
        if np.any(x <= 0):
            raise NumericError("log of a non-positive value")
        self.saved["x"] = x
        return np.log(x)

    def backward(self, grad):
        return (grad / self.saved["x"],)


class Exp(Function):
    def forward(self, x):
        out = np.exp(x)
        self.saved["out"] = out
        return out

    def backward(self, grad):
        return (grad * self.saved["out"],)


class Sum(Function):
    def forward(self, x):
        self.saved["shape"] = x.shape
        return np.asarray(x.sum(), dtype=x.dtype)

    def backward(self, grad):
        return (np.broadcast_to(grad, self.saved["shape"]).copy(),)


class Mean(Function):
    def forward(self, x):
        self.saved["shape"] = x.shape
        return np.asarray(x.mean(), dtype=x.dtype)

    def backward(self, grad):
        shape = self.saved["shape"]
        size = int(np.prod(shape)) if shape else 1
        return (np.broadcast_to(grad / size, shape).astype(grad.dtype),)


class Reshape(Function):
    def forward(self, x, shape):
        self.saved["shape"] = x.shape
        try:
            return x.reshape(shape)
        except ValueError as exc:
            raise DimensionError(f"cannot reshape {x.shape} to {shape}") from exc

    def backward(self, grad):
        return (grad.reshape(self.saved["shape"]),)
