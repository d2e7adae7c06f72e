"""Validation-loss plateau handling: learning-rate reduction and early stop.

"Improvement" means a validation loss strictly below the best seen so far,
with no minimum delta.  The learning-rate counter resets both on improvement
and after a reduction; the early-stop counter resets only on improvement.
So with a flat loss sequence and patiences (2, 6), the rate drops after
epochs 3 and 5, and training stops after epoch 7 (six non-improving epochs
after the best one).
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class PlateauPolicy:
    initial_lr: float
    reduce_factor: float = 0.1
    lr_patience: int | None = 2
    stop_patience: int | None = 6

    best_loss: float = field(default=float("inf"), init=False)
    n_reductions: int = field(default=0, init=False)
    _lr_wait: int = field(default=0, init=False)
    _stop_wait: int = field(default=0, init=False)

    def __post_init__(self):
        if not 0.0 < self.reduce_factor < 1.0:
            raise ValueError(f"reduce_factor must be in (0, 1), got {self.reduce_factor}")
        for name, value in (("lr_patience", self.lr_patience), ("stop_patience", self.stop_patience)):
            if value is not None and value < 1:
                raise ValueError(f"{name} must be >= 1 or None, got {value}")

    @property
    def lr(self) -> float:
        return self.initial_lr * self.reduce_factor ** self.n_reductions

    def update(self, val_loss: float) -> tuple[bool, bool]:
        """Record one epoch's validation loss; returns (improved, should_stop)."""
        improved = val_loss < self.best_loss
        if improved:
            self.best_loss = val_loss
            self._lr_wait = 0
            self._stop_wait = 0
        else:
            self._lr_wait += 1
            self._stop_wait += 1
            if self.lr_patience is not None and self._lr_wait >= self.lr_patience:
                self.n_reductions += 1
                self._lr_wait = 0
        should_stop = self.stop_patience is not None and self._stop_wait >= self.stop_patience
        return improved, should_stop
