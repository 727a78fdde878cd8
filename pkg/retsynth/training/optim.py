"""sgd, rmsprop and adam updates applied in place to named parameters"""

from dataclasses import dataclass
import numpy as np
from ..shared.errors import ConfigurationError, ContractError

OPTIMIZER_KINDS = ("sgd", "rmsprop", "adam")


@dataclass
class OptimizerConfig:
    """hyperparameters of one optimizer; unused fields are ignored by the kind"""

    kind: str = "adam"
    lr: float = 1e-4
    rho: float = 0.9
    b1: float = 0.9
    b2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.kind not in OPTIMIZER_KINDS:
            raise ConfigurationError(
                f"optimizer kind must be one of {OPTIMIZER_KINDS}, got {self.kind}"
            )
        for name in ("lr", "eps"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"optimizer {name} must be positive, got {getattr(self, name)}")
        for name in ("rho", "b1", "b2"):
            if not 0 <= getattr(self, name) < 1:
                raise ConfigurationError(f"optimizer {name} must be in [0, 1), got {getattr(self, name)}")


def _check_state(name, param, slot, state):
    if slot in state and state[slot].shape != param.shape:
        raise ContractError(
            f"optimizer state for {name} has shape {state[slot].shape}, "
            f"parameter now {param.shape}"
        )


def optimizer_step(params, grads, config, state):
    """updates every parameter in place and advances the optimizer state

    Args:
        params (dict[str, Tensor]): parameters by name
        grads (dict[str, np.ndarray | None]): gradients by name; None counts as zero
        config (OptimizerConfig): kind and hyperparameters
        state (dict): per-parameter slots plus the step count "t"; mutated

    Raises:
        ContractError: if a gradient or a state slot no longer matches its parameter's shape

    Returns:
        dict: the advanced state
    """
    state["t"] = state.get("t", 0) + 1
    t = state["t"]
    for name, param in params.items():
        grad = grads.get(name)
        grad = np.zeros_like(param.data) if grad is None else np.asarray(grad)
        if grad.shape != param.shape:
            raise ContractError(f"gradient for {name} has shape {grad.shape}, parameter {param.shape}")
        slots = state.setdefault(name, {})
        dtype = param.data.dtype

        if config.kind == "sgd":
            update = config.lr * grad
        elif config.kind == "rmsprop":
            _check_state(name, param, "v", slots)
            v = slots.get("v", np.zeros_like(param.data))
            v = config.rho * v + (1 - config.rho) * grad * grad
            slots["v"] = v.astype(dtype)
            update = config.lr * grad / np.sqrt(v + config.eps)
        else:
            _check_state(name, param, "m", slots)
            _check_state(name, param, "v", slots)
            m = slots.get("m", np.zeros_like(param.data))
            v = slots.get("v", np.zeros_like(param.data))
            m = config.b1 * m + (1 - config.b1) * grad
            v = config.b2 * v + (1 - config.b2) * grad * grad
            slots["m"], slots["v"] = m.astype(dtype), v.astype(dtype)
            m_hat = m / (1 - config.b1**t)
            v_hat = v / (1 - config.b2**t)
            update = config.lr * m_hat / (np.sqrt(v_hat) + config.eps)

        param.data -= update.astype(dtype)
    return state


class Optimizer:
    """binds an OptimizerConfig to the parameters of one or more networks"""

    def __init__(self, params, config):
        if hasattr(params, "parameters"):
            params = params.parameters()
        self.params = dict(params)
        self.config = config
        self.state = {}

    @property
    def lr(self):
        return self.config.lr

    @lr.setter
    def lr(self, value):
        if value <= 0:
            raise ConfigurationError(f"lr must be positive, got {value}")
        self.config.lr = value

    def zero_grad(self):
        for param in self.params.values():
            param.zero_grad()

    def step(self):
        grads = {name: param.grad for name, param in self.params.items()}
        optimizer_step(self.params, grads, self.config, self.state)
