"""Flanagan's spatial quantum-inequality bound and the exponential-plateau test.

For a sampling function ``rho >= 0`` with unit integral the bound is

    xi_min[rho] = -(1 / 24 pi) * integral(rho'^2 / rho)

and the inequality reads ``integral(T00R * rho) >= xi_min[rho]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .density import DensityProfile, e_ke_closed
from .quadrature import QuadratureError, QuadratureSpec, gauss_kronrod
from .well import WellConfig

EXPONENTIAL = "exponential-plateau"
GAUSSIAN = "gaussian"
GENERIC = "generic"


class DivergenceError(ArithmeticError):
    """The Fisher-information-like integral of rho'^2/rho does not converge."""


class ConfigMismatchError(ValueError):
    """Plateau half-width differs from the well half-width."""


@dataclass(frozen=True)
class SamplingFunction:
    """Non-negative weight with an analytic derivative.

    Build instances with :func:`exponential_plateau`, :func:`gaussian` or
    :func:`generic`; ``scale`` is the length used to map the infinite tails.
    """

    kind: str
    rho: Callable = field(repr=False)
    drho: Callable = field(repr=False)
    scale: float = 1.0
    breakpoints: tuple = ()
    eta: float | None = None
    a: float | None = None
    sigma: float | None = None

    def __call__(self, x):
        return self.rho(np.asarray(x, dtype=float))

    def derivative(self, x):
        return self.drho(np.asarray(x, dtype=float))

    @property
    def norm_const(self) -> float | None:
        if self.kind != EXPONENTIAL:
            return None
        return plateau_norm(self.eta, self.a)


def plateau_norm(eta: float, a: float) -> float:
    """``N = eta / (2 (a eta + 1))``."""
    return eta / (2.0 * (a * eta + 1.0))


def exponential_plateau(eta: float, a: float) -> SamplingFunction:
    """Flat on ``|x| < a``, decaying as ``exp(eta (a - |x|))`` outside."""
    if not (eta > 0 and a > 0):
        raise ValueError(f"eta and a must be positive, got eta={eta}, a={a}")
    norm = plateau_norm(eta, a)

    def rho(x):
        return norm * np.exp(-eta * np.maximum(np.abs(x) - a, 0.0))

    def drho(x):
        # one-sided exterior slope at |x| = a
        out = -eta * np.sign(x) * rho(x)
        return np.where(np.abs(x) >= a, out, 0.0)

    return SamplingFunction(EXPONENTIAL, rho, drho, scale=1.0 / eta,
                            breakpoints=(-a, a), eta=eta, a=a)


def gaussian(sigma: float) -> SamplingFunction:
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    norm = 1.0 / (sigma * math.sqrt(2.0 * math.pi))

    def rho(x):
        return norm * np.exp(-0.5 * (x / sigma) ** 2)

    def drho(x):
        return -x / sigma ** 2 * rho(x)

    return SamplingFunction(GAUSSIAN, rho, drho, scale=sigma, breakpoints=(0.0,), sigma=sigma)


def generic(rho: Callable, drho: Callable, scale: float = 1.0, breakpoints=()) -> SamplingFunction:
    """Wrap caller-supplied ``rho`` and its analytic derivative ``drho``."""
    return SamplingFunction(GENERIC, rho, drho, scale=float(scale),
                            breakpoints=tuple(sorted(breakpoints)))


def _whole_line(f, rho: SamplingFunction, rel_tol: float, limit: int) -> float:
    pts = list(rho.breakpoints) or [0.0]
    lo, hi = pts[0], pts[-1]
    scale = rho.scale

    def right(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        ok = t < 1.0
        s = t[ok]
        out[ok] = f(hi + scale * s / (1.0 - s)) * scale / (1.0 - s) ** 2
        return out

    def left(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        ok = t < 1.0
        s = t[ok]
        out[ok] = f(lo - scale * s / (1.0 - s)) * scale / (1.0 - s) ** 2
        return out

    total = 0.0
    for part in (left, right):
        total += gauss_kronrod(part, 0.0, 1.0, rel_tol=rel_tol, limit=limit)[0]
    if hi > lo:
        total += gauss_kronrod(f, lo, hi, rel_tol=rel_tol, limit=limit, breakpoints=pts[1:-1])[0]
    return total


def _fisher_density(rho: SamplingFunction):
    def f(x):
        r = np.asarray(rho(x), dtype=float)
        d = np.asarray(rho.derivative(x), dtype=float)
        if np.any(r < 0):
            raise ValueError("sampling function is negative somewhere")
        out = np.zeros_like(r)
        pos = r > 0
        out[pos] = d[pos] ** 2 / r[pos]
        if np.any((~pos) & (d != 0) & np.isfinite(x)):
            raise DivergenceError("rho vanishes where rho' does not; rho'^2/rho is not integrable")
        return out
    return f


def normalization(rho: SamplingFunction, rel_tol: float = 1e-12) -> float:
    """Integral of ``rho`` over the real line."""
    return _whole_line(lambda x: np.asarray(rho(x), dtype=float), rho, rel_tol, 2000)


def xi_min_numeric(rho: SamplingFunction, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Bound value by direct quadrature of ``rho'^2 / rho``."""
    try:
        total = _whole_line(_fisher_density(rho), rho, quad.rel_tol * 1e-2, quad.max_subdivisions)
    except QuadratureError as exc:
        raise DivergenceError(f"rho'^2/rho integral did not converge: {exc}") from exc
    if not math.isfinite(total):
        raise DivergenceError("rho'^2/rho integral is not finite")
    return -total / (24.0 * math.pi)


def xi_min_exponential(eta: float, a: float) -> float:
    """Closed form ``-eta N / (12 pi)`` for the exponential plateau."""
    if not (eta > 0 and a > 0):
        raise ValueError(f"eta and a must be positive, got eta={eta}, a={a}")
    return -eta * plateau_norm(eta, a) / (12.0 * math.pi)


def qi_lhs(rho: SamplingFunction, *, profile: DensityProfile | None = None,
           e_ke: float | None = None, cfg: WellConfig | None = None) -> float:
    """Left-hand side ``integral(T00R * rho)``.

    For the exponential plateau on the same well the density vanishes where
    rho is not flat, so the integral is ``E_KE * N``; ``e_ke`` (closed form)
    takes precedence over the profile total. Generic weights need a profile
    and are integrated by trapezoid over the well.
    """
    if cfg is None:
        if profile is None:
            raise ValueError("need a profile or a cfg")
        cfg = profile.cfg
    if rho.kind == EXPONENTIAL:
        if not math.isclose(rho.a, cfg.a, rel_tol=1e-12):
            raise ConfigMismatchError(f"plateau half-width {rho.a} != well half-width {cfg.a}")
        if e_ke is None:
            if profile is None:
                raise ValueError("exponential plateau needs e_ke or a profile")
            e_ke = profile.interior_integral()
        return e_ke * rho.norm_const
    if profile is None:
        raise ValueError("a non-plateau sampling function needs a density profile")
    a = cfg.a
    inside = np.abs(profile.grid) < a
    xs = np.concatenate([[-a], profile.grid[inside], [a]])
    ys = np.concatenate([[profile.wall_limit], profile.values[inside], [profile.wall_limit]])
    return float(np.trapezoid(ys * rho(xs), xs))


@dataclass(frozen=True)
class QiReport:
    v0: float
    a: float
    eta: float
    e_ke: float
    eta_star: float
    xi_min: float
    lhs: float
    violated: bool

    def as_json(self) -> dict:
        return {
            "v0": self.v0,
            "a": self.a,
            "eta": self.eta,
            "e_ke": self.e_ke,
            "eta_star": self.eta_star,
            "xi_min": self.xi_min,
            "lhs": self.lhs,
            "violated": self.violated,
        }


def eta_threshold(e_ke: float) -> float:
    """``12 pi |E_KE|``: the plateau bound fails for every smaller eta."""
    return 12.0 * math.pi * abs(e_ke)


def violation_report(cfg: WellConfig, eta: float, quad: QuadratureSpec = QuadratureSpec(),
                     *, e_ke: float | None = None, plateau_a: float | None = None) -> QiReport:
    """Evaluate both sides of the inequality for the exponential plateau.

    ``plateau_a`` widens the plateau beyond the well (post-ramp use); the
    density must then be zero outside ``|x| < plateau_a``. Both sides carry the
    same factor ``N``, so the verdict is decided as ``eta < eta_star``; this
    keeps the equality case (bound met exactly) on the satisfied side without
    depending on the rounding of two separately computed products.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    if e_ke is None:
        e_ke = e_ke_closed(cfg, quad)
    width = cfg.a if plateau_a is None else float(plateau_a)
    if width < cfg.a:
        raise ConfigMismatchError("plateau must cover the well")
    norm = plateau_norm(eta, width)
    lhs = e_ke * norm
    xi = xi_min_exponential(eta, width)
    star = eta_threshold(e_ke)
    violated = bool(e_ke < 0 and eta < star)
    return QiReport(cfg.v0, width, float(eta), float(e_ke), star, xi, lhs, violated)
