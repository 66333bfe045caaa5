"""First zeros of J0 and J0' from power series, and the thin-sector ratio.

For a thin circular sector of radius 1 the second Neumann eigenfunction
is close to ``J0(a1 r)``, whose nodal arc sits at radius ``a0 / a1``.
"""

from __future__ import annotations

import math

A0_BRACKET = (2.0, 3.0)
A1_BRACKET = (3.0, 4.0)


def _series(x: float, order: int) -> float:
    # J_n(x) = sum_k (-1)^k (x/2)^(2k+n) / (k! (k+n)!)
    q = -0.25 * x * x
    term = (0.5 * x) ** order / math.factorial(order)
    total = term
    k = 0
    while abs(term) > 1e-18 * max(1.0, abs(total)):
        k += 1
        term *= q / (k * (k + order))
        total += term
    return total


def j0(x: float) -> float:
    return _series(float(x), 0)


def j1(x: float) -> float:
    return _series(float(x), 1)


def bisect(f, lo: float, hi: float, tol: float = 1e-15) -> float:
    flo = f(lo)
    if flo * f(hi) > 0:
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > tol * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sector_constants() -> tuple[float, float, float]:
    """``(a0, a1, a0 / a1)``: first zero of J0, first zero of J0' = -J1."""
    a0 = bisect(j0, *A0_BRACKET)
    a1 = bisect(j1, *A1_BRACKET)
    return a0, a1, a0 / a1


def sector_nodal_ratio() -> float:
    return sector_constants()[2]
