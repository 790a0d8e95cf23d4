"""Monte Carlo ensemble of collision trajectories reduced to Pauli classes.

Every collision operator is a Pauli matrix, so a trajectory's net effect on
any state is fixed by the class of the accumulated product (phases cancel
under conjugation). A trajectory is therefore two bits of state, and the
ensemble estimate of the channel after ``n`` collisions is the histogram of
classes at ``n``.

Trajectories are processed in fixed blocks of ``BLOCK`` indices. Shards own
disjoint sets of blocks and private count tables that are merged by integer
addition, so the result does not depend on ``shards`` or ``threads``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidConfig, UnknownCheckpoint
from .pauli import PauliChannel
from .sampler import JumpProcess, SamplerConfig
from .streams import CounterStream

BLOCK = 1 << 16

# engine-internal class code is the symplectic bit pair (I=0, X=1, Z=2, Y=3),
# so class multiplication is XOR; reorder to (I, X, Y, Z) when counting
_BITS_TO_CLASS = np.array([0, 1, 3, 2], dtype=np.int64)


@dataclass(frozen=True)
class EnsembleConfig:
    sampler: SamplerConfig
    checkpoints: tuple[int, ...]
    trajectories: int
    shards: int = 1
    threads: int | None = None

    def __post_init__(self):
        cps = tuple(int(c) for c in self.checkpoints)
        object.__setattr__(self, "checkpoints", cps)
        if not cps:
            raise InvalidConfig("at least one checkpoint is required")
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise InvalidConfig("checkpoints must be strictly ascending")
        if cps[0] < 1 or cps[-1] > self.sampler.n:
            raise InvalidConfig(f"checkpoints must lie in 1..{self.sampler.n}")
        if self.trajectories < 1:
            raise InvalidConfig("trajectories must be positive")
        if self.shards < 1:
            raise InvalidConfig("shards must be positive")
        if self.threads is not None and self.threads < 1:
            raise InvalidConfig("threads must be positive")

    @property
    def doubling_pairs(self) -> tuple[tuple[int, int], ...]:
        present = set(self.checkpoints)
        return tuple((n, 2 * n) for n in self.checkpoints if 2 * n in present)


@dataclass
class CheckpointEstimates:
    """Class counts per checkpoint, ``counts[i]`` ordered (I, X, Y, Z).

    ``pair_counts[(n, m)][a, b]`` counts trajectories in class ``a`` at ``n``
    and class ``b`` at ``m``; these carry the covariance between checkpoints
    that share trajectories.
    """

    checkpoints: tuple[int, ...]
    counts: np.ndarray
    trajectories: int
    pair_counts: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)

    def index(self, n: int) -> int:
        try:
            return self.checkpoints.index(n)
        except ValueError:
            raise UnknownCheckpoint(n) from None

    def weights(self, n: int) -> np.ndarray:
        return self.counts[self.index(n)] / self.trajectories

    def standard_errors(self, n: int) -> np.ndarray:
        w = self.weights(n)
        return np.sqrt(w * (1.0 - w) / self.trajectories)

    def merge(self, other: "CheckpointEstimates") -> "CheckpointEstimates":
        if other.checkpoints != self.checkpoints:
            raise ValueError("cannot merge estimates with different checkpoints")
        pairs = {k: v + other.pair_counts[k] for k, v in self.pair_counts.items()}
        return CheckpointEstimates(
            self.checkpoints, self.counts + other.counts, self.trajectories + other.trajectories, pairs
        )


def empirical_channel(est: CheckpointEstimates, n: int) -> PauliChannel:
    counts = est.counts[est.index(n)]
    w = counts / est.trajectories
    w[0] = 1.0 - w[1:].sum()
    return PauliChannel.from_weights(w)


def _run_block(cfg: EnsembleConfig, stream: CounterStream, start: int, stop: int) -> CheckpointEstimates:
    traj = np.arange(start, stop, dtype=np.uint64)
    proc = JumpProcess(cfg.sampler, traj, stream)
    cls = np.zeros(traj.shape[0], dtype=np.uint8)
    cps = cfg.checkpoints
    recorded = np.empty((len(cps), traj.shape[0]), dtype=np.uint8)
    i = 0
    for k in range(1, cps[-1] + 1):
        jumps = proc.step()
        # X -> bit 1, Z -> bit 2
        cls ^= ((jumps == 1) * 1 + (jumps == -1) * 2).astype(np.uint8)
        if k == cps[i]:
            recorded[i] = cls
            i += 1

    cidx = _BITS_TO_CLASS[recorded]
    counts = np.stack([np.bincount(row, minlength=4) for row in cidx]).astype(np.int64)
    pairs = {}
    for n, m in cfg.doubling_pairs:
        a, b = cidx[cps.index(n)], cidx[cps.index(m)]
        pairs[(n, m)] = np.bincount(4 * a + b, minlength=16).reshape(4, 4).astype(np.int64)
    return CheckpointEstimates(cps, counts, traj.shape[0], pairs)


def _empty(cfg: EnsembleConfig) -> CheckpointEstimates:
    return CheckpointEstimates(
        cfg.checkpoints,
        np.zeros((len(cfg.checkpoints), 4), dtype=np.int64),
        0,
        {p: np.zeros((4, 4), dtype=np.int64) for p in cfg.doubling_pairs},
    )


def _run_shard(cfg: EnsembleConfig, stream: CounterStream, blocks: Sequence[int]) -> CheckpointEstimates:
    total = _empty(cfg)
    for b in blocks:
        start = b * BLOCK
        stop = min(start + BLOCK, cfg.trajectories)
        total = total.merge(_run_block(cfg, stream, start, stop))
    return total


def run_ensemble(cfg: EnsembleConfig) -> CheckpointEstimates:
    """Estimate class histograms at every checkpoint from ``cfg.trajectories`` trajectories."""
    stream = CounterStream(cfg.sampler.seed)
    n_blocks = -(-cfg.trajectories // BLOCK)
    shards = [list(range(s, n_blocks, cfg.shards)) for s in range(cfg.shards)]
    threads = cfg.threads or os.cpu_count() or 1
    threads = max(1, min(threads, cfg.shards))
    if threads == 1:
        parts = [_run_shard(cfg, stream, blocks) for blocks in shards]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda blocks: _run_shard(cfg, stream, blocks), shards))
    total = _empty(cfg)
    for part in parts:
        total = total.merge(part)
    return total
