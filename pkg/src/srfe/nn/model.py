"""The classifier: batch norm, four conv/pool blocks, dense head with dropout.

Layer order is fixed:

    batchnorm (per frequency row)
    -> [conv 3x3 same + relu -> maxpool 2x2] x len(conv_filters)
    -> flatten -> dense + relu -> dropout -> dense -> softmax

with conv widths (64, 128, 256, 256) and a 256-unit hidden layer by default.
Convolution and hidden-dense weights use He initialization (normal with
std sqrt(2 / fan_in)); the classifier layer starts at exactly zero so the
initial output is the uniform distribution and the initial loss is
ln(n_classes).  All randomness is derived from the seed, so two models
built with the same arguments are bitwise identical.
"""

from __future__ import annotations

import numpy as np

from . import layers


class ConvNet:
    def __init__(
        self,
        input_height: int,
        input_width: int,
        n_classes: int = 50,
        seed: int = 0,
        conv_filters: tuple = (64, 128, 256, 256),
        dense_units: int = 256,
        dropout_rate: float = 0.5,
        dtype=np.float32,
    ):
        min_dim = 2 ** len(conv_filters)
        if input_height < min_dim or input_width < min_dim:
            raise ValueError(
                f"input {input_height}x{input_width} too small for "
                f"{len(conv_filters)} 2x2 pooling stages (needs >= {min_dim})"
            )
        if not 0.0 <= dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {dropout_rate}")

        self.input_height = input_height
        self.input_width = input_width
        self.n_classes = n_classes
        self.seed = seed
        self.conv_filters = tuple(int(f) for f in conv_filters)
        self.dense_units = dense_units
        self.dropout_rate = dropout_rate
        self.dtype = dtype

        h, w = input_height, input_width
        for _ in self.conv_filters:
            h, w = h // 2, w // 2
        self.flat_dim = h * w * self.conv_filters[-1]

        rng = np.random.default_rng(seed)
        self._rng = np.random.default_rng(seed + 1)  # dropout stream

        self.params: dict[str, np.ndarray] = {
            "bn/gamma": np.ones(input_height, dtype=dtype),
            "bn/beta": np.zeros(input_height, dtype=dtype),
        }
        self.running: dict[str, np.ndarray] = {
            "bn/mean": np.zeros(input_height, dtype=dtype),
            "bn/var": np.ones(input_height, dtype=dtype),
        }

        cin = 1
        for i, cout in enumerate(self.conv_filters, start=1):
            fan_in = 9 * cin
            self.params[f"conv{i}/w"] = rng.normal(
                0.0, np.sqrt(2.0 / fan_in), size=(3, 3, cin, cout)
            ).astype(dtype)
            self.params[f"conv{i}/b"] = np.zeros(cout, dtype=dtype)
            cin = cout

        self.params["fc/w"] = rng.normal(
            0.0, np.sqrt(2.0 / self.flat_dim), size=(self.flat_dim, dense_units)
        ).astype(dtype)
        self.params["fc/b"] = np.zeros(dense_units, dtype=dtype)
        # Zero classifier: the untrained model predicts the uniform distribution.
        self.params["head/w"] = np.zeros((dense_units, n_classes), dtype=dtype)
        self.params["head/b"] = np.zeros(n_classes, dtype=dtype)

    # -- forward ---------------------------------------------------------

    def _check_input(self, x):
        if x.ndim == 3:
            x = x[..., None]
        if x.ndim != 4 or x.shape[1:] != (self.input_height, self.input_width, 1):
            raise ValueError(
                f"expected batch of shape (n, {self.input_height}, {self.input_width}, 1), "
                f"got {x.shape}"
            )
        return np.ascontiguousarray(x, dtype=self.dtype)

    def _forward(self, x, training: bool, rng):
        p = self.params
        caches = {}
        a, caches["bn"] = layers.batchnorm_freq_forward(
            x, p["bn/gamma"], p["bn/beta"], self.running["bn/mean"], self.running["bn/var"], training
        )
        for i in range(1, len(self.conv_filters) + 1):
            a, xp = layers.conv3x3_forward(a, p[f"conv{i}/w"], p[f"conv{i}/b"])
            a, mask = layers.relu_forward(a, inplace=True)
            a, pool = layers.maxpool2x2_forward(a)
            caches[f"conv{i}"] = (xp, mask, pool)
        a = a.reshape(a.shape[0], self.flat_dim)
        a, caches["fc_x"] = layers.dense_forward(a, p["fc/w"], p["fc/b"])
        a, caches["fc_out"] = layers.relu_forward(a, inplace=True)
        if training and self.dropout_rate > 0.0:
            a, caches["drop"] = layers.dropout_forward(a, self.dropout_rate, rng or self._rng)
        else:
            caches["drop"] = None
        logits, caches["head_x"] = layers.dense_forward(a, p["head/w"], p["head/b"])
        return logits, caches

    def forward(self, x, training: bool = False, rng=None):
        """Class probabilities, one row per sample."""
        logits, _ = self._forward(self._check_input(x), training, rng)
        return layers.softmax(logits)

    def loss_and_grads(self, x, labels, rng=None, return_probs: bool = False):
        """Training-mode cross-entropy loss and gradients for every parameter.

        With return_probs=True the training-mode class probabilities come
        back as a third element, saving the training loop a second forward
        pass when it wants running accuracy.
        """
        x = self._check_input(x)
        labels = np.asarray(labels, dtype=np.int64)
        if labels.ndim != 1 or labels.shape[0] != x.shape[0]:
            raise ValueError(f"labels shape {labels.shape} does not match batch {x.shape[0]}")
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_classes):
            raise ValueError(f"labels must be in [0, {self.n_classes})")

        logits, caches = self._forward(x, training=True, rng=rng)
        loss, dlogits, probs = layers.softmax_cross_entropy(logits, labels)

        p = self.params
        grads: dict[str, np.ndarray] = {}
        da, grads["head/w"], grads["head/b"] = layers.dense_backward(
            dlogits, caches["head_x"], p["head/w"]
        )
        if caches["drop"] is not None:
            da = layers.dropout_backward(da, caches["drop"])
        da = layers.relu_backward(da, caches["fc_out"])
        da, grads["fc/w"], grads["fc/b"] = layers.dense_backward(da, caches["fc_x"], p["fc/w"])

        h, w = self.input_height, self.input_width
        for _ in self.conv_filters:
            h, w = h // 2, w // 2
        da = da.reshape(da.shape[0], h, w, self.conv_filters[-1])

        for i in range(len(self.conv_filters), 0, -1):
            xp, mask, pool = caches.pop(f"conv{i}")  # free layer caches as we go
            da = layers.maxpool2x2_backward(da, pool)
            da = layers.relu_backward(da, mask)
            da, grads[f"conv{i}/w"], grads[f"conv{i}/b"] = layers.conv3x3_backward(
                da, xp, p[f"conv{i}/w"]
            )
            del xp
        _, grads["bn/gamma"], grads["bn/beta"] = layers.batchnorm_freq_backward(
            da, caches["bn"]
        )
        if return_probs:
            return loss, grads, probs
        return loss, grads

    def predict(self, x, batch_size: int = 32):
        """Eval-mode argmax labels and probabilities, in input order.

        Runs in batches so wide-activation layers do not blow up memory on
        large evaluation sets.  Ties break toward the lower class id.
        """
        x = self._check_input(x)
        probs = np.empty((x.shape[0], self.n_classes), dtype=np.float64)
        for lo in range(0, x.shape[0], batch_size):
            probs[lo : lo + batch_size] = self.forward(x[lo : lo + batch_size])
        return probs.argmax(axis=1), probs

    # -- state -----------------------------------------------------------

    def state_copy(self) -> dict[str, np.ndarray]:
        state = {k: v.copy() for k, v in self.params.items()}
        state.update({k: v.copy() for k, v in self.running.items()})
        return state

    def load_state(self, state: dict[str, np.ndarray]) -> None:
        for target in (self.params, self.running):
            for key, value in target.items():
                if key not in state:
                    raise ValueError(f"state is missing tensor {key!r}")
                if state[key].shape != value.shape:
                    raise ValueError(
                        f"tensor {key!r} has shape {state[key].shape}, expected {value.shape}"
                    )
                target[key] = state[key].astype(value.dtype).copy()


def init_model(input_height: int, input_width: int, n_classes: int = 50, seed: int = 0, **kwargs) -> ConvNet:
    """Build a freshly initialized classifier (see ConvNet for the layout)."""
    return ConvNet(input_height, input_width, n_classes=n_classes, seed=seed, **kwargs)
