"""Closed-form two-jump model of the correlated collisional dynamics.

For small jump probability most windows of ``n`` collisions contain at most
two jumps. Under that truncation the channel after ``n`` collisions is a
Pauli channel with

* ``w(n)`` for each of ``X`` and ``Z`` (exactly one jump),
* ``wy(n)`` for ``Y`` (two jumps of different type), reduced by the
  environment correlation ``f`` weighted by the distribution ``G`` of the
  separation between consecutive jumps.

The intermediate map from ``n`` to ``2n`` follows by dividing the Pauli-transfer
eigenvalues, and its ``Y`` weight decides CP-divisibility. The second half of
the module takes the continuum limit ``n = T/delta``, ``eps = gamma*delta``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, NotFound, SingularMap, TruncationWarning
from .pauli import PauliChannel
from .quadrature import adaptive_simpson

SIGN_TOL = 1e-14
SINGULAR_TOL = 1e-9
TRUNCATION_LIMIT = 0.5


def _step(x, scale):
    # slack absorbs rounding in tau/delta when the grid lands on the edge
    return np.where(np.asarray(x, dtype=float) <= scale * (1.0 + 1e-12), 1.0, 0.0)


def _exponential(x, scale):
    return np.exp(-np.asarray(x, dtype=float) / scale)


def _zero(x, scale):
    return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class CorrelationFunction:
    """Environment correlation ``f(x, scale)`` shared by the discrete and continuum forms.

    ``x`` is a separation (collisions or time) and ``scale`` the correlation
    length in the same unit. ``func`` must accept numpy arrays.
    ``breakpoints(scale)`` lists discontinuities for quadrature.
    """

    name: str
    func: Callable[[np.ndarray, float], np.ndarray]
    breakpoints: Callable[[float], Sequence[float]] = field(default=lambda scale: ())

    def __call__(self, x, scale):
        return self.func(x, scale)

    @classmethod
    def custom(cls, func, name: str = "custom", breakpoints=lambda scale: ()) -> "CorrelationFunction":
        return cls(name, func, breakpoints)


STEP = CorrelationFunction("step", _step, lambda scale: (scale,))
EXPONENTIAL = CorrelationFunction("exponential", _exponential)
UNCORRELATED = CorrelationFunction("uncorrelated", _zero)

BUILTIN = {f.name: f for f in (STEP, EXPONENTIAL, UNCORRELATED)}


def correlation_function(name: str) -> CorrelationFunction:
    try:
        return BUILTIN[name]
    except KeyError:
        raise DomainError(f"unknown correlation function {name!r}") from None


def _check_eps(epsilon: float) -> float:
    if not 0.0 < epsilon < 0.25:
        raise DomainError(f"epsilon must lie in (0, 0.25), got {epsilon!r}")
    return 2.0 * epsilon


def weight_w(n: int, epsilon: float) -> float:
    """Weight of ``X`` (equal to that of ``Z``) after ``n`` collisions: one jump of that type."""
    p = _check_eps(epsilon)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return 0.5 * n * p * (1.0 - p) ** (n - 1)


def _pair_normalizer(n: int, p: float) -> float:
    # (1-p)^n + n p - 1 == p * sum_{j<n} (1 - (1-p)^j); the sum has no cancellation
    j = np.arange(1, n)
    return p * float(np.sum(-np.expm1(j * math.log1p(-p))))


def separation_weights(n: int, p: float) -> np.ndarray:
    """``G(k, n, p)`` for ``k = 1 .. n-1`` as an array."""
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    k = np.arange(1, n)
    num = p * p * (n - k) * np.exp((k - 1) * math.log1p(-p))
    return num / _pair_normalizer(n, p)


def separation_distribution_G(k: int, n: int, p: float) -> float:
    """Probability that two consecutive jumps within ``n`` collisions are ``k`` apart."""
    if not 1 <= k <= n - 1:
        raise DomainError(f"k must lie in 1..{n - 1}, got {k}")
    return float(separation_weights(n, p)[k - 1])


def _bracket(n: int, p: float, f: CorrelationFunction | None, n_cor: float | None) -> float:
    if f is None or f is UNCORRELATED or n < 2:
        return 1.0
    if n_cor is None or n_cor <= 0:
        raise DomainError(f"n_cor must be positive, got {n_cor!r}")
    k = np.arange(1, n)
    return 1.0 - float(np.sum(f(k, n_cor) * separation_weights(n, p)))


def weight_wy(n: int, epsilon: float, f: CorrelationFunction | None = None, n_cor: float | None = None) -> float:
    """Weight of ``Y`` after ``n`` collisions (``n = 1`` gives 0)."""
    p = _check_eps(epsilon)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if 2 * n * p > TRUNCATION_LIMIT:
        warnings.warn(
            f"two-jump truncation degrades for n={n}, eps={epsilon} (2np={2 * n * p:.3g})",
            TruncationWarning,
            stacklevel=2,
        )
    if n < 2:
        return 0.0
    return 0.5 * math.comb(n, 2) * p * p * (1.0 - p) ** (n - 2) * _bracket(n, p, f, n_cor)


def analytic_channel(n: int, epsilon: float, f: CorrelationFunction | None = None, n_cor: float | None = None) -> PauliChannel:
    """Two-jump approximation of the channel after ``n`` collisions from the start."""
    w = weight_w(n, epsilon)
    wy = weight_wy(n, epsilon, f, n_cor)
    return PauliChannel(1.0 - 2.0 * w - wy, w, wy, w)


def intermediate_weights(n: int, epsilon: float, f: CorrelationFunction | None = None, n_cor: float | None = None) -> PauliChannel:
    """Weights of the map taking collision ``n`` to ``2n``; the ``Y`` weight may be negative."""
    w1, w2 = weight_w(n, epsilon), weight_w(2 * n, epsilon)
    y1, y2 = weight_wy(n, epsilon, f, n_cor), weight_wy(2 * n, epsilon, f, n_cor)
    d_y = 1.0 - 4.0 * w1
    d_x = 1.0 - 2.0 * w1 - 2.0 * y1
    if abs(d_y) <= SINGULAR_TOL or abs(d_x) <= SINGULAR_TOL:
        raise SingularMap(f"intermediate map undefined at n={n}, eps={epsilon}")
    w = (w2 - w1) / d_y
    wy = 0.25 * (1.0 + (1.0 - 4.0 * w2) / d_y - (2.0 - 4.0 * w2 - 4.0 * y2) / d_x)
    return PauliChannel(1.0 - 2.0 * w - wy, w, wy, w)


def predicted_ncg(
    epsilon: float,
    f: CorrelationFunction | None,
    n_cor: float | None,
    n_max: int,
    tol: float = SIGN_TOL,
) -> int:
    """Smallest ``n`` with a CP intermediate map ``2m <- m`` for every ``m`` in ``n .. n_max``."""
    if n_max < 2:
        raise DomainError("n_max must be >= 2")
    n = n_max
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        if intermediate_weights(n_max, epsilon, f, n_cor).wy < -tol:
            raise NotFound(f"intermediate map still non-CP at n_max={n_max}")
        while n > 1 and intermediate_weights(n - 1, epsilon, f, n_cor).wy >= -tol:
            n -= 1
    if 2 * (2 * n_max) * (2 * epsilon) > TRUNCATION_LIMIT:
        warnings.warn(
            f"n_max={n_max} reaches beyond the two-jump regime for eps={epsilon}",
            TruncationWarning,
            stacklevel=2,
        )
    return n


def step_criterion_ncg(n_cor: int) -> int:
    """Smallest integer ``n`` with ``n (n - 1 - 2 n_cor) > 0``."""
    if n_cor < 1:
        raise DomainError("n_cor must be >= 1")
    return 2 * n_cor + 2


# continuum limit


def _shifted_exp(x: float) -> float:
    """``exp(-x) - 1 + x`` without cancellation for small ``x``."""
    if abs(x) < 1e-2:
        term, total = x * x / 2.0, 0.0
        j = 2
        while abs(term) > 1e-18 * abs(total) or total == 0.0:
            total += term
            j += 1
            term *= -x / j
        return total
    return math.expm1(-x) + x


def continuum_g(t, T: float, gamma: float):
    """Density of the separation between consecutive jumps in ``[0, T]``."""
    if gamma <= 0 or T <= 0:
        raise DomainError("gamma and T must be positive")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > T):
        raise DomainError(f"t must lie in [0, {T}]")
    val = 4.0 * gamma**2 * (T - t_arr) * np.exp(-2.0 * gamma * t_arr) / _shifted_exp(2.0 * gamma * T)
    return float(val) if np.ndim(val) == 0 else val


def continuum_bracket(f: CorrelationFunction, tau: float, T: float, gamma: float, tol: float = 1e-10) -> float:
    """``integral_0^T f(t, tau) g(t, T, gamma) dt`` by adaptive Simpson."""
    if tau <= 0 or T <= 0 or gamma <= 0:
        raise DomainError("tau, T and gamma must be positive")
    denom = _shifted_exp(2.0 * gamma * T)
    c = 4.0 * gamma**2 / denom

    def integrand(t):
        return float(f(t, tau)) * c * (T - t) * math.exp(-2.0 * gamma * t)

    return adaptive_simpson(integrand, 0.0, T, tol=tol, breakpoints=f.breakpoints(tau))


@dataclass(frozen=True)
class ContinuumParams:
    gamma: float
    tau: float
    T: float
    delta: float

    def __post_init__(self):
        if min(self.gamma, self.tau, self.T, self.delta) <= 0:
            raise DomainError("gamma, tau, T and delta must be positive")
        if self.gamma * self.delta >= 0.25:
            raise DomainError("gamma * delta must be < 0.25")

    @property
    def steps(self) -> int:
        n = round(self.T / self.delta)
        if abs(n - self.T / self.delta) > 1e-9 * max(1.0, n) or n < 3:
            raise DomainError(f"T/delta must be an integer >= 3, got {self.T / self.delta!r}")
        return n


def riemann_sum(f: CorrelationFunction, params: ContinuumParams) -> float:
    """Discrete sum ``sum_k f(k, tau/delta) G(k, T/delta, 2 gamma delta)`` approaching the bracket integral."""
    n = params.steps
    p = 2.0 * params.gamma * params.delta
    k = np.arange(1, n)
    return float(np.sum(f(k, params.tau / params.delta) * separation_weights(n, p)))
