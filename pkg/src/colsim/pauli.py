"""Exact algebra of qubit Pauli channels.

A Pauli channel acts as ``rho -> sum_a w_a P_a rho P_a`` with ``P_a`` ranging
over ``I, X, Y, Z``. Weights are stored in that order. They always sum to one,
but individual weights may be negative: quotients of channels (intermediate
maps) are generally not completely positive and must still be representable.

Composition of Pauli channels is a convolution over the Klein four-group, which
the character transform (the diagonal of the Pauli-transfer matrix) turns into
a componentwise product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable

import numpy as np

from .errors import NotHermitian

SUM_TOL = 1e-9


class PauliClass(IntEnum):
    I = 0
    X = 1
    Y = 2
    Z = 3


# symplectic (x-bit, z-bit) encoding: I=00, X=10, Z=01, Y=11
_TO_BITS = np.array([0, 1, 3, 2], dtype=np.uint8)
_FROM_BITS = np.array([0, 1, 3, 2], dtype=np.uint8)


def pauli_class_mul(a: PauliClass, b: PauliClass) -> PauliClass:
    """Class of the product ``ab`` with the phase discarded."""
    return PauliClass(int(_FROM_BITS[_TO_BITS[a] ^ _TO_BITS[b]]))


# CHARACTERS[alpha, beta] = +1 if P_alpha and P_beta commute, -1 otherwise
CHARACTERS = np.array(
    [
        [1, 1, 1, 1],
        [1, 1, -1, -1],
        [1, -1, 1, -1],
        [1, -1, -1, 1],
    ],
    dtype=float,
)

PAULI_MATRICES = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class PauliChannel:
    """Trace-preserving Pauli channel with (possibly signed) weights ``(w0, wx, wy, wz)``."""

    w0: float
    wx: float
    wy: float
    wz: float

    def __post_init__(self):
        total = self.w0 + self.wx + self.wy + self.wz
        if not math.isfinite(total) or abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"Pauli channel weights must sum to 1, got {total!r}")

    @classmethod
    def from_weights(cls, weights: Iterable[float]) -> "PauliChannel":
        w0, wx, wy, wz = (float(v) for v in weights)
        return cls(w0, wx, wy, wz)

    @classmethod
    def identity(cls) -> "PauliChannel":
        return cls(1.0, 0.0, 0.0, 0.0)

    @property
    def weights(self) -> np.ndarray:
        return np.array([self.w0, self.wx, self.wy, self.wz])

    def __getitem__(self, cls_: PauliClass) -> float:
        return (self.w0, self.wx, self.wy, self.wz)[cls_]


@dataclass(frozen=True)
class ChannelSpectrum:
    """Diagonal Pauli-transfer eigenvalues ``(sI, sX, sY, sZ)``."""

    sI: float
    sX: float
    sY: float
    sZ: float

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "ChannelSpectrum":
        a, b, c, d = (float(v) for v in values)
        return cls(a, b, c, d)

    @property
    def values(self) -> np.ndarray:
        return np.array([self.sI, self.sX, self.sY, self.sZ])


def apply_channel(ch: PauliChannel, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros((2, 2), dtype=complex)
    for w, p in zip(ch.weights, PAULI_MATRICES):
        if w != 0.0:
            out += w * (p @ rho @ p)
    return out


def compose(later: PauliChannel, earlier: PauliChannel) -> PauliChannel:
    """Channel of ``later`` applied after ``earlier`` (group convolution of weights)."""
    a, b = later.weights, earlier.weights
    out = np.zeros(4)
    for i in PauliClass:
        for j in PauliClass:
            out[pauli_class_mul(i, j)] += a[i] * b[j]
    return PauliChannel.from_weights(out)


def char_transform(ch: PauliChannel) -> ChannelSpectrum:
    return ChannelSpectrum.from_values(CHARACTERS @ ch.weights)


def inverse_char_transform(s: ChannelSpectrum) -> PauliChannel:
    if abs(s.sI - 1.0) > SUM_TOL:
        raise ValueError(f"spectrum of a trace-preserving channel needs sI = 1, got {s.sI!r}")
    w = CHARACTERS @ s.values / 4.0
    # exact trace preservation; the remaining three weights carry the rounding
    w[0] = 1.0 - w[1] - w[2] - w[3]
    return PauliChannel.from_weights(w)


_PHI = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)


def choi_matrix(ch: PauliChannel) -> np.ndarray:
    """Trace-one Choi matrix; it is Bell-diagonal with eigenvalues equal to the weights."""
    c = np.zeros((4, 4), dtype=complex)
    for w, p in zip(ch.weights, PAULI_MATRICES):
        v = np.kron(p, PAULI_MATRICES[0]) @ _PHI
        c += w * np.outer(v, v.conj())
    return c


def _off_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a[~np.eye(a.shape[0], dtype=bool)]))


def jacobi_eigh(
    m: np.ndarray, tol: float = 1e-13, max_sweeps: int = 60, herm_tol: float = 1e-10
) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a small complex Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(values, vectors)`` with values ascending and eigenvectors as
    columns. Sweeps stop once the Frobenius norm of the off-diagonal part is
    below ``tol`` (scaled by the matrix norm when that exceeds one).
    """
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {a.shape}")
    if np.max(np.abs(a - a.conj().T), initial=0.0) > herm_tol:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))

    for _ in range(max_sweeps):
        if _off_norm(a) < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                # phase makes the pivot real, then a real rotation annihilates it
                phase = apq / mag
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n, dtype=complex)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s * phase
                rot[q, p] = -s * np.conj(phase)
                a = rot.conj().T @ a @ rot
                a[p, q] = a[q, p] = 0.0
                v = v @ rot
    else:
        if _off_norm(a) >= tol * scale:
            raise RuntimeError("Jacobi iteration did not converge")
    vals = np.diag(a).real
    order = np.argsort(vals, kind="stable")
    return vals[order], v[:, order]


def hermitian_eigenvalues(m: np.ndarray, **kwargs) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix (see :func:`jacobi_eigh`)."""
    return jacobi_eigh(m, **kwargs)[0]


def is_cp(ch: PauliChannel, tol: float = 0.0) -> bool:
    return min(ch.weights) >= -tol
