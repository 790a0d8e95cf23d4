"""Jump sequences for a qubit colliding with a time-correlated environment.

Each collision applies a jump (``X`` or ``Z``) with probability ``p = 2*eps``
regardless of history; the environment correlation only biases which type
the jump has:

* ``uncorrelated`` -- type is a fair coin.
* ``step`` -- the first jump opens a window covering the next ``n_cor``
  collisions; every jump inside the window copies the anchor's type and does
  not move the window. The next jump after the window expires opens a new one.
* ``exponential`` -- a jump repeats the type of the most recent jump with
  probability ``(1 + exp(-s / n_cor)) / 2`` where ``s`` is the separation.

Jumps are encoded as ``int8`` with ``+1`` for ``X``, ``-1`` for ``Z`` and
``0`` for no jump, which is also the sign variable used by the correlation
estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

import numpy as np

from .errors import InvalidConfig
from .streams import CounterStream


class Jump(IntEnum):
    NONE = 0
    X = 1
    Z = -1


MODEL_KINDS = ("uncorrelated", "step", "exponential")


@dataclass(frozen=True)
class CorrelationModel:
    kind: str = "uncorrelated"
    n_cor: int | None = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise InvalidConfig(f"unknown correlation model {self.kind!r}; expected one of {MODEL_KINDS}")
        if self.kind == "uncorrelated":
            if self.n_cor is not None:
                raise InvalidConfig("the uncorrelated model takes no n_cor")
        elif self.n_cor is None or int(self.n_cor) != self.n_cor or self.n_cor < 1:
            raise InvalidConfig(f"{self.kind} model needs an integer n_cor >= 1, got {self.n_cor!r}")

    @classmethod
    def uncorrelated(cls) -> "CorrelationModel":
        return cls("uncorrelated")

    @classmethod
    def step(cls, n_cor: int) -> "CorrelationModel":
        return cls("step", n_cor)

    @classmethod
    def exponential(cls, n_cor: int) -> "CorrelationModel":
        return cls("exponential", n_cor)

    def describe(self) -> str:
        return self.kind if self.n_cor is None else f"{self.kind}({self.n_cor})"


@dataclass(frozen=True)
class SamplerConfig:
    epsilon: float
    n: int
    model: CorrelationModel = CorrelationModel()
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.epsilon < 0.25) or math.isnan(self.epsilon):
            raise InvalidConfig(f"epsilon must lie in [0, 0.25), got {self.epsilon!r}")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidConfig(f"n must be a positive integer, got {self.n!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidConfig(f"seed must fit in 64 bits, got {self.seed!r}")

    @property
    def jump_probability(self) -> float:
        return 2.0 * self.epsilon


def same_type_conditional(model: CorrelationModel, separation: int) -> float:
    """Probability that a jump repeats the type of an earlier jump ``separation`` collisions back.

    For the step model this assumes the earlier jump anchors the window.
    """
    if separation < 1:
        raise ValueError("separation must be >= 1")
    if model.kind == "step":
        return 1.0 if separation <= model.n_cor else 0.5
    if model.kind == "exponential":
        return 0.5 * (1.0 + math.exp(-separation / model.n_cor))
    return 0.5


class JumpProcess:
    """Vectorized jump generator for a batch of trajectories, advanced one collision at a time."""

    def __init__(self, cfg: SamplerConfig, trajectories: np.ndarray, stream: CounterStream | None = None):
        self.cfg = cfg
        self.trajectories = np.asarray(trajectories, dtype=np.uint64)
        self.stream = stream if stream is not None else CounterStream(cfg.seed)
        size = self.trajectories.shape[0]
        # type and collision index of the window anchor (step) or last jump (exponential)
        self.ref_type = np.zeros(size, dtype=np.int8)
        self.ref_k = np.zeros(size, dtype=np.int64)
        self.k = 0

    def step(self) -> np.ndarray:
        """Advance one collision and return the jumps it produced."""
        self.k += 1
        k = self.k
        u_jump, u_type = self.stream.uniform_pair(self.trajectories, k)
        jumped = u_jump < self.cfg.jump_probability
        fresh = np.where(u_type < 0.5, np.int8(Jump.X), np.int8(Jump.Z))
        model = self.cfg.model

        if model.kind == "uncorrelated":
            return np.where(jumped, fresh, np.int8(0)).astype(np.int8)

        if model.kind == "step":
            in_window = (self.ref_type != 0) & (k - self.ref_k <= model.n_cor)
            kind = np.where(in_window, self.ref_type, fresh)
            opens = jumped & ~in_window
            self.ref_type = np.where(opens, fresh, self.ref_type)
            self.ref_k = np.where(opens, k, self.ref_k)
        else:
            repeat_prob = 0.5 * (1.0 + np.exp(-(k - self.ref_k) / model.n_cor))
            # the same uniform decides the type, so first jumps see the fair coin
            repeat = u_type < repeat_prob
            kind = np.where(
                self.ref_type == 0, fresh, np.where(repeat, self.ref_type, -self.ref_type)
            ).astype(np.int8)
            self.ref_type = np.where(jumped, kind, self.ref_type)
            self.ref_k = np.where(jumped, k, self.ref_k)

        return np.where(jumped, kind, np.int8(0)).astype(np.int8)


def sample_jumps(cfg: SamplerConfig, trajectories: Sequence[int] | np.ndarray) -> np.ndarray:
    """Jump sequences for the given trajectory indices, shape ``(len(trajectories), cfg.n)``."""
    proc = JumpProcess(cfg, np.asarray(trajectories, dtype=np.uint64))
    out = np.empty((proc.trajectories.shape[0], cfg.n), dtype=np.int8)
    for k in range(cfg.n):
        out[:, k] = proc.step()
    return out


def sample_jump_sequence(cfg: SamplerConfig, trajectory: int = 0) -> np.ndarray:
    """Jump sequence of one trajectory (its own counter-based stream)."""
    return sample_jumps(cfg, [trajectory])[0]
