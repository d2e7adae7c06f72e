"""Central-difference gradient checking for the full layer stack.

The checker perturbs every trainable parameter element by +/-h and compares
the resulting loss slope against the analytic gradient.  Evaluations reuse
one fixed dropout seed so the stochastic mask is identical across the whole
sweep; run it on a float64 model, where h = 1e-3 leaves truncation error
well under the 1e-4 acceptance bound.
"""

from __future__ import annotations

import numpy as np

from .model import ConvNet


def max_relative_gradient_error(
    model: ConvNet, x, labels, h: float = 1e-3, dropout_seed: int = 0
) -> float:
    """Worst relative disagreement between analytic and numeric gradients."""

    def loss_at_current_params() -> float:
        return model.loss_and_grads(x, labels, rng=np.random.default_rng(dropout_seed))[0]

    _, grads = model.loss_and_grads(x, labels, rng=np.random.default_rng(dropout_seed))

    worst = 0.0
    for key, param in model.params.items():
        flat = param.reshape(-1)
        analytic = grads[key].reshape(-1)
        for i in range(flat.shape[0]):
            original = flat[i]
            flat[i] = original + h
            loss_plus = loss_at_current_params()
            flat[i] = original - h
            loss_minus = loss_at_current_params()
            flat[i] = original
            numeric = (loss_plus - loss_minus) / (2.0 * h)
            rel = abs(analytic[i] - numeric) / max(abs(analytic[i]) + abs(numeric), 1e-8)
            worst = max(worst, rel)
    return worst
