"""CP-divisibility of the dynamics: intermediate maps, eigenvalue curves, n_CG detection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Union

import numpy as np

from .engine import CheckpointEstimates, empirical_channel
from .errors import InvalidConfig, NonInvertible, NotFound
from .pauli import (
    CHARACTERS,
    ChannelSpectrum,
    PauliChannel,
    char_transform,
    choi_matrix,
    hermitian_eigenvalues,
    inverse_char_transform,
)

INVERT_TOL = 1e-9

ChannelSource = Union[CheckpointEstimates, Callable[[int], PauliChannel]]


def intermediate_channel(full: PauliChannel, half: PauliChannel) -> PauliChannel:
    """The map ``X`` with ``compose(X, half) == full``."""
    s_full = char_transform(full).values
    s_half = char_transform(half).values
    if np.any(np.abs(s_half) < INVERT_TOL):
        raise NonInvertible(f"channel spectrum {s_half} has a vanishing component")
    ratio = s_full / s_half
    ratio[0] = 1.0
    return inverse_char_transform(ChannelSpectrum.from_values(ratio))


@dataclass(frozen=True)
class CurvePoint:
    n: int
    value: float | None
    se: float | None = None
    channel: PauliChannel | None = None

    @property
    def defined(self) -> bool:
        return self.value is not None


@dataclass(frozen=True)
class EigenvalueCurve:
    """Smallest Choi eigenvalue of ``Lambda(2n, n)`` per ``n``; ``value`` is None where undefined."""

    points: tuple[CurvePoint, ...]

    @property
    def n(self) -> list[int]:
        return [p.n for p in self.points]

    @property
    def values(self) -> list[float | None]:
        return [p.value for p in self.points]

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class CrossingPolicy:
    z: float = 2.0
    require_stable_tail: bool = True

    def __post_init__(self):
        if self.z < 0:
            raise InvalidConfig("z must be >= 0")


def _character_samples() -> np.ndarray:
    # row 4a+b: characters (X, Y, Z) of class a at n, then of class b at 2n
    rows = []
    for a in range(4):
        for b in range(4):
            rows.append(np.concatenate([CHARACTERS[1:, a], CHARACTERS[1:, b]]))
    return np.array(rows)


_PAIR_FEATURES = _character_samples()


def quotient_standard_error(est: CheckpointEstimates, n: int, target: int) -> float:
    """Delta-method standard error of weight ``target`` of the empirical ``Lambda(2n, n)``.

    Uses the joint class table of ``(n, 2n)`` when available, so the strong
    positive correlation between the two checkpoints (they share every
    trajectory) enters the error. Without it the two are treated as
    independent, which overstates the error.
    """
    s_half = CHARACTERS[1:] @ est.weights(n)
    s_full = CHARACTERS[1:] @ est.weights(2 * n)
    h = CHARACTERS[target, 1:] / 4.0
    grad = np.concatenate([-h * s_full / s_half**2, h / s_half])

    pair = est.pair_counts.get((n, 2 * n))
    if pair is not None:
        prob = pair.reshape(-1) / est.trajectories
        mean = prob @ _PAIR_FEATURES
        second = _PAIR_FEATURES.T @ (prob[:, None] * _PAIR_FEATURES)
        cov = (second - np.outer(mean, mean)) / est.trajectories
    else:
        cov = np.zeros((6, 6))
        for off, m in ((0, n), (3, 2 * n)):
            w = est.weights(m)
            x = CHARACTERS[1:] * 1.0
            mean = x @ w
            cov[off : off + 3, off : off + 3] = ((x * w) @ x.T - np.outer(mean, mean)) / est.trajectories
    return math.sqrt(max(float(grad @ cov @ grad), 0.0))


def _point(full: PauliChannel, half: PauliChannel, n: int) -> CurvePoint:
    ch = intermediate_channel(full, half)
    lam = float(hermitian_eigenvalues(choi_matrix(ch))[0])
    return CurvePoint(n, lam, None, ch)


def eigenvalue_curve(source: ChannelSource, n_list: Iterable[int]) -> EigenvalueCurve:
    """``lambda(2n, n)`` for each ``n`` from empirical estimates or an analytic ``n -> Lambda(n, 0)``."""
    points = []
    for n in n_list:
        try:
            if isinstance(source, CheckpointEstimates):
                pt = _point(empirical_channel(source, 2 * n), empirical_channel(source, n), n)
                target = int(np.argmin(pt.channel.weights))
                pt = CurvePoint(n, pt.value, quotient_standard_error(source, n, target), pt.channel)
            else:
                pt = _point(source(2 * n), source(n), n)
        except NonInvertible:
            pt = CurvePoint(n, None)
        points.append(pt)
    return EigenvalueCurve(tuple(points))


def detect_ncg(curve: EigenvalueCurve, policy: CrossingPolicy = CrossingPolicy()) -> int:
    """Coarse-graining length: where the curve returns to nonnegative (within ``z`` standard errors)."""
    pts = [p for p in curve if p.defined]
    if len(pts) < 3:
        raise NotFound("need at least three defined curve points")
    ok = [p.value >= -policy.z * (p.se or 0.0) for p in pts]

    if policy.require_stable_tail:
        if not ok[-1]:
            raise NotFound("curve does not end nonnegative")
        i = len(pts) - 1
        while i > 0 and ok[i - 1]:
            i -= 1
        return pts[i].n

    for p, good in zip(pts, ok):
        if good:
            return p.n
    raise NotFound("curve never becomes nonnegative")
