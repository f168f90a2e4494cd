"""Adaptive quadrature on finite and semi-infinite momentum intervals.

Two independent rules live here: a globally adaptive Gauss-Kronrod (7/15)
scheme used on every production path, and a Romberg (doubling trapezoid with
Richardson extrapolation) rule kept as a cross-check.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

ArrayFn = Callable[[np.ndarray], np.ndarray]

# QUADPACK qk15 abscissae and weights
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod abscissae
_WGAUSS = np.zeros(15)
_WGAUSS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


class QuadratureError(RuntimeError):
    """Raised when an adaptive rule exhausts its subdivision budget.

    The best available estimate and its error bound travel with the exception
    so callers can still report them.
    """

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class QuadratureSpec:
    """Controls for the momentum integrals.

    ``kappa_max`` of ``None`` means "pick a default from the problem scale"
    (``200 / a`` for the well integrals).
    """

    kappa_max: float | None = None
    rel_tol: float = 1e-8
    max_subdivisions: int = 2000
    tail_estimate: bool = True

    def __post_init__(self):
        if self.kappa_max is not None and not self.kappa_max > 0:
            raise ValueError(f"kappa_max must be positive, got {self.kappa_max}")
        if not 0 < self.rel_tol <= 1e-2:
            raise ValueError(f"rel_tol must lie in (0, 1e-2], got {self.rel_tol}")
        if int(self.max_subdivisions) < 1:
            raise ValueError("max_subdivisions must be a positive integer")

    def cutoff(self, length_scale: float) -> float:
        if self.kappa_max is not None:
            return float(self.kappa_max)
        return 200.0 / length_scale


def _gk15(f: ArrayFn, a: float, b: float) -> tuple[float, float]:
    half = 0.5 * (b - a)
    center = 0.5 * (a + b)
    fx = np.asarray(f(center + half * _NODES), dtype=float)
    resk = half * float(np.dot(_WK, fx))
    resg = half * float(np.dot(_WGAUSS, fx))
    # QUADPACK error heuristic
    reskh = resk / (2.0 * half) if half else 0.0
    resasc = abs(half) * float(np.dot(_WK, np.abs(fx - reskh)))
    err = abs(resk - resg)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    resabs = abs(half) * float(np.dot(_WK, np.abs(fx)))
    if resabs > np.finfo(float).tiny / (50 * np.finfo(float).eps):
        err = max(50 * np.finfo(float).eps * resabs, err)
    return resk, err


def gauss_kronrod(f: ArrayFn, a: float, b: float, *, rel_tol: float = 1e-10,
                  abs_tol: float = 0.0, limit: int = 2000,
                  breakpoints=()) -> tuple[float, float]:
    """Globally adaptive G7/K15 integration of a vectorised ``f`` over [a, b].

    Returns ``(value, error_estimate)``. Raises :class:`QuadratureError` when
    ``limit`` subdivisions do not meet ``max(abs_tol, rel_tol*|value|)``.
    """
    if b == a:
        return 0.0, 0.0
    if b < a:
        val, err = gauss_kronrod(f, b, a, rel_tol=rel_tol, abs_tol=abs_tol,
                                 limit=limit, breakpoints=breakpoints)
        return -val, err
    edges = [a] + sorted(p for p in breakpoints if a < p < b) + [b]
    heap = []
    total = 0.0
    total_err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = _gk15(f, lo, hi)
        heapq.heappush(heap, (-err, lo, hi, val))
        total += val
        total_err += err
    nsub = len(heap)
    while total_err > max(abs_tol, rel_tol * abs(total)):
        if nsub >= limit:
            raise QuadratureError(
                f"subdivision limit {limit} reached on [{a}, {b}]", total, total_err)
        neg_err, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            # interval collapsed to floating-point resolution; accept what we have
            heapq.heappush(heap, (neg_err, lo, hi, val))
            break
        v1, e1 = _gk15(f, lo, mid)
        v2, e2 = _gk15(f, mid, hi)
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        total += v1 + v2 - val
        total_err += e1 + e2 + neg_err
        nsub += 1
        if nsub % 64 == 0:
            # resum to shed accumulated cancellation in the running totals
            total = math.fsum(item[3] for item in heap)
            total_err = math.fsum(-item[0] for item in heap)
    total = math.fsum(item[3] for item in heap)
    total_err = math.fsum(-item[0] for item in heap)
    return total, total_err


def tail_integral(f: ArrayFn, start: float, *, rel_tol: float = 1e-10,
                  abs_tol: float = 0.0, limit: int = 500) -> tuple[float, float]:
    """Integrate ``f`` over [start, inf) through ``k = start / s``, s in (0, 1].

    Suited to integrands that decay algebraically (k^-2 or faster) so the
    mapped integrand stays bounded at s = 0.
    """
    if start <= 0:
        raise ValueError("tail_integral needs a positive start")

    def mapped(s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        ok = s > 0
        k = start / s[ok]
        out[ok] = np.asarray(f(k), dtype=float) * start / s[ok] ** 2
        return out

    return gauss_kronrod(mapped, 0.0, 1.0, rel_tol=rel_tol, abs_tol=abs_tol, limit=limit)


def semi_infinite(f: ArrayFn, spec: QuadratureSpec, length_scale: float,
                  breakpoints=()) -> tuple[float, float]:
    """Integrate over [0, inf) as [0, kappa_max] plus an optional mapped tail."""
    kmax = spec.cutoff(length_scale)
    head, herr = gauss_kronrod(f, 0.0, kmax, rel_tol=spec.rel_tol * 1e-2,
                               limit=spec.max_subdivisions, breakpoints=breakpoints)
    if not spec.tail_estimate:
        return head, herr
    tail, terr = tail_integral(f, kmax, rel_tol=spec.rel_tol * 1e-2,
                               abs_tol=spec.rel_tol * 1e-3 * abs(head),
                               limit=spec.max_subdivisions)
    return head + tail, herr + terr


def romberg(f: ArrayFn, a: float, b: float, *, rel_tol: float = 1e-10,
            max_levels: int = 22) -> tuple[float, float]:
    """Doubling trapezoid with Richardson extrapolation.

    Independent of :func:`gauss_kronrod`; intended for smooth integrands on a
    finite interval (map semi-infinite ranges before calling).
    """
    h = b - a
    fa, fb = np.asarray(f(np.array([a, b])), dtype=float)
    prev_row = [0.5 * h * (fa + fb)]
    n = 1
    for level in range(1, max_levels):
        h *= 0.5
        x = a + h * (2 * np.arange(n) + 1)
        mid_sum = math.fsum(np.asarray(f(x), dtype=float))
        row = [0.5 * prev_row[0] + h * mid_sum]
        factor = 1.0
        for j in range(1, level + 1):
            factor *= 4.0
            row.append(row[j - 1] + (row[j - 1] - prev_row[j - 1]) / (factor - 1.0))
        n *= 2
        err = abs(row[-1] - prev_row[-1])
        if level > 4 and err <= rel_tol * abs(row[-1]):
            return row[-1], err
        prev_row = row
    raise QuadratureError("romberg did not converge", prev_row[-1], err)
