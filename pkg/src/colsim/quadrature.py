"""Adaptive Simpson quadrature with an explicit work stack."""

from __future__ import annotations

from typing import Callable, Iterable

from .errors import QuadratureFailure


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_intervals: int = 1_000_000,
    breakpoints: Iterable[float] = (),
) -> float:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    ``breakpoints`` inside ``(a, b)`` split the domain first; put known
    discontinuities there. The tolerance budget is shared in proportion to
    interval length. Raises :class:`QuadratureFailure` when more than
    ``max_intervals`` subintervals would be needed.
    """
    if b < a:
        return -adaptive_simpson(f, b, a, tol, max_intervals, breakpoints)
    if b == a:
        return 0.0
    edges = [a] + sorted(x for x in set(breakpoints) if a < x < b) + [b]
    length = b - a
    total = 0.0
    used = 0
    for lo, hi in zip(edges, edges[1:]):
        flo, fhi, fmid = f(lo), f(hi), f(0.5 * (lo + hi))
        whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
        stack = [(lo, hi, flo, fmid, fhi, whole, tol * (hi - lo) / length)]
        while stack:
            x0, x1, f0, fm, f1, s, eps = stack.pop()
            m = 0.5 * (x0 + x1)
            lm, rm = 0.5 * (x0 + m), 0.5 * (m + x1)
            flm, frm = f(lm), f(rm)
            left = (m - x0) / 6.0 * (f0 + 4.0 * flm + fm)
            right = (x1 - m) / 6.0 * (fm + 4.0 * frm + f1)
            delta = left + right - s
            if abs(delta) <= 15.0 * eps or m in (x0, x1):
                total += left + right + delta / 15.0
                used += 1
                continue
            if used + len(stack) + 2 > max_intervals:
                raise QuadratureFailure(
                    f"adaptive Simpson exceeded {max_intervals} subintervals on [{a}, {b}]"
                )
            stack.append((x0, m, f0, flm, fm, left, 0.5 * eps))
            stack.append((m, x1, fm, frm, f1, right, 0.5 * eps))
    return total
