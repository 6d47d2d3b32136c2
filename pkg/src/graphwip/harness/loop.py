"""The optimizer loop: Adam at a fixed learning rate, global-norm clipping,
periodic validation with early stopping, best-checkpoint retention."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..nn.optim import Adam, clip_global_norm
from ..nn.tensor import Tensor


@dataclass
class TrainConfig:
    lr: float = 1e-4
    batch_size: int = 16
    clip_norm: float = 0.25
    dropout: float = 0.1
    subword_dropout: float = 0.1
    patience: int = 2000          # steps past the best validation point
    max_epochs: int = 20
    eval_every: int = 100
    eval_examples: int = 64       # validation subsample per evaluation
    seed: int = 0
    tau: float = 0.1              # straight-through temperature (tuned modes)
    context: int = 128
    gamma: float = 2.0            # focal loss exponent (edge training)

    def __post_init__(self):
        if self.clip_norm <= 0:
            raise ValueError("clip threshold must be positive")
        if not (0.01 <= self.tau <= 1.0):
            raise ValueError("tau must lie in [0.01, 1]")

    def to_dict(self) -> dict:
        return vars(self).copy()


class TrainingDiverged(RuntimeError):
    def __init__(self, step: int, batch_id: str):
        super().__init__(
            f"non-finite loss at step {step} on batch {batch_id}")
        self.step = step
        self.batch_id = batch_id


@dataclass
class EvalPoint:
    step: int
    objective: float              # lower is better
    metrics: dict
    wall_time: float


@dataclass
class TrainResult:
    best_step: int
    best_objective: float
    steps_run: int
    history: list[EvalPoint] = field(default_factory=list)
    wall_time: float = 0.0
    diverged: bool = False


def train_loop(*, params: dict[str, Tensor],
               batch_loss: Callable[[int, np.random.Generator],
                                    tuple[str, Tensor]],
               evaluate: Callable[[], tuple[float, dict]],
               cfg: TrainConfig, steps_per_epoch: int,
               on_eval: Callable[[EvalPoint], None] | None = None
               ) -> TrainResult:
    """Generic loop.  `batch_loss(step, rng)` returns (batch id, mean loss);
    `evaluate()` returns (objective lower-is-better, metrics dict).  The
    best-validation parameters are restored into `params` before returning.
    """
    opt = Adam(params, lr=cfg.lr)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0x10ad]))
    max_steps = max(1, cfg.max_epochs * max(1, steps_per_epoch))
    t0 = time.monotonic()

    def snap() -> dict[str, np.ndarray]:
        return {k: v.data.copy() for k, v in params.items()}

    def run_eval(step: int) -> EvalPoint:
        obj, metrics = evaluate()
        pt = EvalPoint(step, obj, metrics, time.monotonic() - t0)
        result.history.append(pt)
        if on_eval is not None:
            on_eval(pt)
        return pt

    result = TrainResult(best_step=0, best_objective=np.inf, steps_run=0)
    best_params = snap()
    pt = run_eval(0)
    result.best_objective = pt.objective

    step = 0
    while step < max_steps:
        step += 1
        batch_id, loss = batch_loss(step, rng)
        if not np.isfinite(loss.data):
            raise TrainingDiverged(step, batch_id)
        for p in params.values():
            p.grad = None
        loss.backward()
        clip_global_norm(params, cfg.clip_norm)
        opt.step()

        if step % cfg.eval_every == 0 or step == max_steps:
            pt = run_eval(step)
            if pt.objective < result.best_objective:
                result.best_objective = pt.objective
                result.best_step = step
                best_params = snap()
            elif step - result.best_step >= cfg.patience:
                break

    for k, v in params.items():
        v.data[...] = best_params[k]
    result.steps_run = step
    result.wall_time = time.monotonic() - t0
    return result
