"""Correlation function of the environment as seen through sampled jumps.

Each collision is mapped to ``x = +1`` (X jump), ``-1`` (Z jump) or ``0``,
and for lag ``h``::

    Gamma(h) = sum_i x_i x_{i+h} / sum_i |x_i x_{i+h}|

Numerator and denominator are pooled over all trajectories before dividing;
at small jump rates most single trajectories have no jump pair at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData

EXP_FIT_FLOOR = 0.05


@dataclass(frozen=True)
class CorrelationCurve:
    lags: np.ndarray
    numerator: np.ndarray
    denominator: np.ndarray

    @property
    def gamma(self) -> np.ndarray:
        """``Gamma(h)`` per lag, NaN where no jump pair was observed."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.denominator > 0, self.numerator / np.maximum(self.denominator, 1), np.nan)

    @property
    def standard_error(self) -> np.ndarray:
        """Pooled standard error treating each contributing pair as a +-1 draw."""
        g = self.gamma
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(
                self.denominator > 0, np.sqrt(np.clip(1.0 - g * g, 0.0, None) / np.maximum(self.denominator, 1)), np.nan
            )

    @property
    def defined(self) -> np.ndarray:
        return self.denominator > 0

    def merge(self, other: "CorrelationCurve") -> "CorrelationCurve":
        if not np.array_equal(self.lags, other.lags):
            raise ValueError("lag grids differ")
        return CorrelationCurve(self.lags, self.numerator + other.numerator, self.denominator + other.denominator)


def correlation_function(sequences, h_max: int) -> CorrelationCurve:
    """Pooled ``Gamma(h)`` for ``h = 1 .. h_max`` from jump sequences (rows = trajectories)."""
    x = np.atleast_2d(np.asarray(sequences, dtype=np.int64))
    if x.size == 0:
        raise ValueError("need at least one sequence")
    n = x.shape[1]
    if not 1 <= h_max < n:
        raise ValueError(f"h_max must lie in 1..{n - 1}, got {h_max}")
    num = np.empty(h_max, dtype=np.int64)
    den = np.empty(h_max, dtype=np.int64)
    for h in range(1, h_max + 1):
        prod = x[:, :-h] * x[:, h:]
        num[h - 1] = prod.sum()
        den[h - 1] = np.abs(prod).sum()
    return CorrelationCurve(np.arange(1, h_max + 1), num, den)


def _fit_exponential(h: np.ndarray, g: np.ndarray, den: np.ndarray) -> float:
    keep = g > EXP_FIT_FLOOR
    if keep.sum() < 2:
        raise InsufficientData("fewer than two lags with Gamma above the fit floor")
    h, g, den = h[keep], g[keep], den[keep]
    # inverse variance of log(Gamma) for a pooled mean of +-1 draws
    weight = den * g * g / np.maximum(1.0 - g * g, 1e-12)
    slope, _ = np.polyfit(h, np.log(g), 1, w=np.sqrt(weight))
    if slope >= 0:
        raise InsufficientData("correlation curve does not decay")
    return -1.0 / slope


def _fit_step(h: np.ndarray, g: np.ndarray) -> float:
    # template is 1 up to the edge c, (c - j) at lag j+1, 0 beyond; minimize over each unit cell of c
    order = np.argsort(h)
    h, g = h[order], g[order]
    best_c, best_cost = None, math.inf
    for j in range(0, int(h[-1])):
        below = h <= j
        at = h == j + 1
        frac = float(np.clip(g[at][0], 0.0, 1.0)) if at.any() else 0.0
        c = j + frac
        template = np.where(below, 1.0, np.where(at, frac, 0.0))
        cost = float(np.sum((g - template) ** 2))
        if cost < best_cost:
            best_c, best_cost = c, cost
    return best_c


def fit_correlation_length(curve: CorrelationCurve, model: str) -> float:
    """Estimate the correlation length from ``curve`` under a step or exponential template."""
    mask = curve.defined
    if mask.sum() < 5:
        raise InsufficientData("need at least five defined lags")
    h = curve.lags[mask].astype(float)
    g = curve.gamma[mask]
    if model == "exponential":
        return _fit_exponential(h, g, curve.denominator[mask].astype(float))
    if model == "step":
        return _fit_step(h, g)
    raise ValueError(f"unknown fit model {model!r}")
