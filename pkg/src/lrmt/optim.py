"""Adam with linear warmup + inverse-square-root decay and group freezing.

Frozen parameter groups are excluded from the update entirely: tensors and
their moment accumulators stay bit-identical, so a later unfreeze resumes
from stale moments (documented behavior).
"""

import math
from dataclasses import dataclass, field

import numpy as np


class OptimError(ValueError):
    pass


class NonFiniteGradient(OptimError):
    pass


@dataclass(frozen=True)
class AdamHyper:
    beta1: float = 0.9
    beta2: float = 0.98
    eps: float = 1e-8
    weight_decay: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise OptimError("Adam betas must lie in [0, 1)")


@dataclass(frozen=True)
class LrSchedule:
    warmup_init_lr: float = 1e-7
    peak_lr: float = 3e-5
    warmup_updates: int = 4000
    decay: str = "inverse_sqrt"  # or "constant"

    def __post_init__(self):
        if not 0.0 < self.warmup_init_lr <= self.peak_lr:
            raise OptimError("need 0 < warmup_init_lr <= peak_lr")
        if self.warmup_updates < 1:
            raise OptimError("warmup_updates must be >= 1")
        if self.decay not in ("inverse_sqrt", "constant"):
            raise OptimError(f"unknown decay {self.decay!r}")


FREEZE_MODES = {
    "none": frozenset(),
    "encoder": frozenset({"encoder"}),
    "encoder_and_embedding": frozenset({"encoder", "embedding"}),
}


@dataclass(frozen=True)
class FreezeSpec:
    mode: str = "none"

    def __post_init__(self):
        if self.mode not in FREEZE_MODES:
            raise OptimError(f"freeze mode {self.mode!r} not one of {sorted(FREEZE_MODES)}")

    @property
    def frozen_groups(self) -> frozenset:
        return FREEZE_MODES[self.mode]


@dataclass
class OptState:
    step: int
    m: dict  # first-moment accumulators, parameter-shaped
    v: dict  # second-moment accumulators

    @classmethod
    def fresh(cls, params) -> "OptState":
        return cls(step=0,
                   m={k: np.zeros_like(t) for k, t in params.tensors.items()},
                   v={k: np.zeros_like(t) for k, t in params.tensors.items()})


def lr_at(step: int, sched: LrSchedule) -> float:
    """Learning rate for 1-based update step: linear warmup, then decay."""
    if step < 1:
        raise OptimError("steps are 1-based")
    if step <= sched.warmup_updates:
        frac = step / sched.warmup_updates
        return sched.warmup_init_lr + (sched.peak_lr - sched.warmup_init_lr) * frac
    if sched.decay == "constant":
        return sched.peak_lr
    return sched.peak_lr * math.sqrt(sched.warmup_updates / step)


def adam_step(params, grads, state: OptState, hyper: AdamHyper, lr: float,
              freeze: FreezeSpec = FreezeSpec("none")) -> None:
    """One bias-corrected Adam update in place; frozen groups untouched.

    Weight decay (when nonzero) is decoupled: w -= lr * wd * w.
    """
    if lr <= 0.0:
        raise OptimError(f"learning rate must be positive, got {lr}")
    frozen = freeze.frozen_groups
    state.step += 1
    t = state.step
    bc1 = 1.0 - hyper.beta1 ** t
    bc2 = 1.0 - hyper.beta2 ** t
    for name, w in params.tensors.items():
        if params.groups[name] in frozen:
            continue
        g = grads.tensors[name]
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(f"non-finite gradient for {name}")
        if g.shape != w.shape:
            raise OptimError(f"gradient shape {g.shape} != parameter shape {w.shape} for {name}")
        m = state.m[name]
        v = state.v[name]
        m *= hyper.beta1
        m += (1.0 - hyper.beta1) * g
        v *= hyper.beta2
        v += (1.0 - hyper.beta2) * np.square(g)
        update = (m / bc1) / (np.sqrt(v / bc2) + hyper.eps)
        if hyper.weight_decay:
            update = update + hyper.weight_decay * w
        w -= np.asarray(lr * update, dtype=w.dtype)


class GradAccumulator:
    """Sums per-token-mean gradients over micro-steps, weighted by token count.

    Flushing every `accumulation` micro-steps yields the gradient an equally
    token-weighted concatenated batch would have produced.
    """

    def __init__(self, accumulation: int = 2):
        if accumulation < 1:
            raise OptimError("accumulation must be >= 1")
        self.accumulation = accumulation
        self.micro_step = 0
        self._sum = None
        self._tokens = 0

    def add(self, grads, n_tokens: int):
        """Accumulate one micro-batch; returns flushed gradients or None."""
        self.micro_step += 1
        if self._sum is None:
            self._sum = {k: t * float(n_tokens) for k, t in grads.tensors.items()}
            self._groups = dict(grads.groups)
        else:
            for k, t in grads.tensors.items():
                self._sum[k] += t * float(n_tokens)
        self._tokens += n_tokens
        if self.micro_step % self.accumulation != 0:
            return None
        from .model import Parameters
        flushed = Parameters(
            {k: t / float(self._tokens) for k, t in self._sum.items()}, self._groups)
        self._sum = None
        self._tokens = 0
        return flushed
