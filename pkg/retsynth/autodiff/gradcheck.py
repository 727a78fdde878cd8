"""compares analytic gradients against central finite differences in 64-bit mode"""

import logging
import numpy as np
from ..shared.errors import ConfigurationError, NumericError
from .tensor import precision

logger = logging.getLogger(__name__)


def _named_parameters(network):
    if hasattr(network, "parameters"):
        return dict(network.parameters())
    if isinstance(network, dict):
        return dict(network)
    return {f"param{i}": param for i, param in enumerate(network)}


def _evaluate(loss_fn):
    loss = loss_fn()
    value = float(np.asarray(loss.data))
    if not np.isfinite(value):
        raise NumericError(f"grad_check: loss is non-finite ({value})")
    return loss, value


def grad_check(network, loss_fn, eps=1e-6, n_samples=16, seed=0):
    """max relative error between analytic and numeric gradients

    Every parameter is promoted to float64 for the check and restored to its
    original dtype afterwards. For each parameter up to `n_samples` entries are
    perturbed by +/- eps.

    Args:
        network (Network | dict | list): holder of the parameter tensors
        loss_fn (callable): builds and returns the scalar loss from the current parameters
        eps (float, optional): finite-difference step in [1e-6, 1e-4]. Defaults to 1e-6.
        n_samples (int, optional): entries sampled per parameter. Defaults to 16.
        seed (int, optional): seed for the entry sampling. Defaults to 0.

    Raises:
        ConfigurationError: if eps is outside [1e-6, 1e-4]
        NumericError: if the loss is non-finite

    Returns:
        float: max over sampled entries of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8)
    """
    if not 1e-6 <= eps <= 1e-4:
        raise ConfigurationError(f"grad_check: eps must be in [1e-6, 1e-4], got {eps}")

    params = _named_parameters(network)
    original_dtypes = {name: param.data.dtype for name, param in params.items()}
    rng = np.random.default_rng(seed)
    max_error = 0.0

    with precision(np.float64):
        for param in params.values():
            param.data = param.data.astype(np.float64)
        try:
            for param in params.values():
                param.grad = None
            loss, _ = _evaluate(loss_fn)
            loss.backward()
            analytic = {
                name: (np.zeros_like(param.data) if param.grad is None else param.grad.copy())
                for name, param in params.items()
            }

            for name, param in params.items():
                flat = param.data.reshape(-1)
                count = min(n_samples, flat.size)
                indices = rng.choice(flat.size, size=count, replace=False)
                for index in indices:
                    saved = flat[index]
                    flat[index] = saved + eps
                    _, plus = _evaluate(loss_fn)
                    flat[index] = saved - eps
                    _, minus = _evaluate(loss_fn)
                    flat[index] = saved

                    numeric = (plus - minus) / (2 * eps)
                    exact = analytic[name].reshape(-1)[index]
                    error = abs(exact - numeric) / max(abs(exact), abs(numeric), 1e-8)
                    if error > max_error:
                        logger.debug(
                            "grad_check %s[%s]: analytic %s numeric %s", name, index, exact, numeric
                        )
                        max_error = error
        finally:
            for name, param in params.items():
                param.data = param.data.astype(original_dtypes[name])
                param.grad = None

    return float(max_error)
