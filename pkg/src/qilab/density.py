"""Regularized kinetic energy density of the barrier vacuum and its interior total.

The density at ``x`` is a branch-cut integral over imaginary momentum of the
diagonal Green's function. The total over ``|x| < a`` is computed three ways:
the closed single integral, the direct route through ``F(kappa)`` and the wall
derivatives, and a trapezoid sum of the sampled profile.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from ._parallel import pmap
from .quadrature import (QuadratureError, QuadratureSpec, gauss_kronrod,
                         semi_infinite, tail_integral)
from .well import WellConfig, _parts, greens_diag, interval_integral

WALL_EXCLUSION = 1e-3  # fraction of a kept clear of each wall on default grids


class DensityError(RuntimeError):
    """A per-point or total integral failed to converge."""

    def __init__(self, where: str, cause: QuadratureError):
        super().__init__(f"quadrature failed at {where}: {cause}")
        self.where = where
        self.estimate = cause.estimate
        self.error = cause.error


def density_integrand(cfg: WellConfig, x: float, kappa):
    """Fused branch-cut integrand at ``x``.

    Equals ``(4k^2 G - 2k) - (G'' - 2 V G)`` with the large-kappa cancellation
    done analytically:
    ``V^2 (1 - e^{-2k'(a-|x|)}) (1 - e^{-2k'(a+|x|)}) / (2 k' D_hat)`` inside,
    zero outside.
    """
    kappa = np.asarray(kappa, dtype=float)
    ax = abs(float(x))
    if cfg.is_free or ax >= cfg.a:
        return np.zeros_like(kappa)
    _, d_hat, kp, _, _ = _parts(cfg, kappa)
    near = -np.expm1(-2.0 * kp * (cfg.a - ax))
    far = -np.expm1(-2.0 * kp * (cfg.a + ax))
    return cfg.coupling ** 2 * near * far / (2.0 * kp * d_hat)


def density_integrand_unfused(cfg: WellConfig, x: float, kappa):
    """The same bracket assembled term by term from :func:`greens_diag`."""
    kappa = np.asarray(kappa, dtype=float)
    g = greens_diag(cfg, x, kappa)
    v = float(cfg.potential(x))
    return (4.0 * kappa ** 2 * g.value - 2.0 * kappa) - (g.d2 - 2.0 * v * g.value)


def density_at(cfg: WellConfig, x: float, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """``T00R(x)``; exactly zero outside the well and at the walls."""
    ax = abs(float(x))
    if cfg.is_free or ax >= cfg.a:
        return 0.0
    gap = cfg.a - ax
    kmax = quad.cutoff(cfg.a)
    if quad.kappa_max is None:
        kmax = max(kmax, 20.0 / gap)
    spec = QuadratureSpec(kmax, quad.rel_tol, quad.max_subdivisions, quad.tail_estimate)
    breaks = sorted({min(1.0 / gap, kmax / 2), min(math.sqrt(cfg.coupling), kmax / 2)})
    try:
        total, _ = semi_infinite(lambda k: density_integrand(cfg, ax, k), spec,
                                 cfg.a, breakpoints=breaks)
    except QuadratureError as exc:
        raise DensityError(f"x={x!r}", exc) from exc
    return -total / (4.0 * math.pi)


@dataclass(frozen=True)
class DensityProfile:
    grid: np.ndarray
    values: np.ndarray
    quad: QuadratureSpec
    cfg: WellConfig
    wall_limit: float = 0.0

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")

    def interior_integral(self) -> float:
        """Trapezoid integral over ``(-a, a)`` with the wall limits as end values."""
        a = self.cfg.a
        inside = np.abs(self.grid) < a
        xs = np.concatenate([[-a], self.grid[inside], [a]])
        ys = np.concatenate([[self.wall_limit], self.values[inside], [self.wall_limit]])
        return float(np.trapezoid(ys, xs))


def density_profile(cfg: WellConfig, grid, quad: QuadratureSpec = QuadratureSpec()) -> DensityProfile:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    values = np.array(pmap(lambda x: density_at(cfg, x, quad), grid), dtype=float)
    wall = density_at(cfg, cfg.a, quad)
    return DensityProfile(grid, values, quad, cfg, wall)


def interior_grid(cfg: WellConfig, n: int = 401) -> np.ndarray:
    """``n`` uniform points on ``|x| <= a(1 - WALL_EXCLUSION)``."""
    edge = cfg.a * (1.0 - WALL_EXCLUSION)
    return np.linspace(-edge, edge, n)


def profile_grid(cfg: WellConfig, n: int, xmax: float) -> np.ndarray:
    """Uniform grid on ``[-xmax, xmax]`` minus points inside the wall exclusion zones."""
    xs = np.linspace(-xmax, xmax, n)
    keep = np.abs(np.abs(xs) - cfg.a) >= WALL_EXCLUSION * cfg.a
    return xs[keep]


def _u_cosh_minus_sinh_scaled(u):
    """``e^{-u} (u cosh u - sinh u)`` without cancellation at small ``u``."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    small = u < 0.5
    if np.any(small):
        us = u[small]
        term = us ** 3 / 3.0
        acc = term.copy()
        # sum_{n>=1} 2n u^{2n+1} / (2n+1)!
        for n in range(2, 12):
            term = term * us * us / ((2 * n) * (2 * n + 1)) * (2 * n) / (2 * n - 2)
            acc += term
        out[small] = acc * np.exp(-us)
    big = ~small
    if np.any(big):
        ub = u[big]
        em = np.exp(-2.0 * ub)
        out[big] = 0.5 * (ub * (1.0 + em) + np.expm1(-2.0 * ub))
    return out


def e_ke_integrand(cfg: WellConfig, kappa):
    """Non-negative integrand ``V^2 (2ak' cosh(2ak') - sinh(2ak')) / (k'^2 D)``."""
    kappa = np.asarray(kappa, dtype=float)
    if cfg.is_free:
        return np.zeros_like(kappa)
    _, d_hat, kp, u, _ = _parts(cfg, kappa)
    return cfg.coupling ** 2 * _u_cosh_minus_sinh_scaled(u) / (kp * kp * d_hat)


def e_ke_direct_integrand(cfg: WellConfig, kappa):
    """Bracket of the direct route: ``(4k^2 F - 4ka) + 2VF - (G'(a) - G'(-a))``."""
    kappa = np.asarray(kappa, dtype=float)
    if cfg.is_free:
        return np.zeros_like(kappa)
    f = interval_integral(cfg, kappa)
    wall = greens_diag(cfg, np.full_like(kappa, cfg.a), kappa).d1
    wall_left = greens_diag(cfg, np.full_like(kappa, -cfg.a), kappa).d1
    v = cfg.coupling
    return (4.0 * kappa ** 2 * f - 4.0 * kappa * cfg.a) + 2.0 * v * f - (wall - wall_left)


def e_ke_direct_tail_integrand(cfg: WellConfig, kappa):
    """Direct bracket with ``e^{-2u}`` dropped, cancellations done by hand.

    ``F -> a/k' + V/(2k'^2 (k+k')^2)``, wall term ``-> 2V/(k+k')^2``; using
    ``k'^2 - k^2 = V`` the bracket reduces to
    ``2aV^2/(k'(k+k')^2) - V^2/(k'^2 (k+k')^2)``.
    """
    kappa = np.asarray(kappa, dtype=float)
    v = cfg.coupling
    kp = cfg.kappa_prime(kappa)
    s2 = (kappa + kp) ** 2
    return 2.0 * cfg.a * v * v / (kp * s2) - v * v / (kp * kp * s2)


def e_ke_closed(cfg: WellConfig, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Interior kinetic energy from the single non-negative integral.

    ``lam`` is folded into ``v0`` (the formula is written for unit coupling).
    """
    cfg = cfg.folded()
    if cfg.is_free:
        return 0.0
    breaks = [min(math.sqrt(cfg.coupling), quad.cutoff(cfg.a) / 2), min(1.0 / cfg.a, quad.cutoff(cfg.a) / 2)]
    try:
        total, _ = semi_infinite(lambda k: e_ke_integrand(cfg, k), quad, cfg.a, breakpoints=breaks)
    except QuadratureError as exc:
        raise DensityError("e_ke_closed", exc) from exc
    return -total / (4.0 * math.pi)


def direct_switch_point(cfg: WellConfig) -> float:
    """Momentum where ``e^{-4ak'}`` drops below 1e-35 and the tail form is exact."""
    return math.sqrt(max((20.0 / cfg.a) ** 2 - cfg.coupling, 0.0)) + 1.0 / cfg.a


def e_ke_direct(cfg: WellConfig, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Interior kinetic energy through ``F(kappa)`` and the wall derivatives."""
    cfg = cfg.folded()
    if cfg.is_free:
        return 0.0
    switch = direct_switch_point(cfg)
    breaks = [min(math.sqrt(cfg.coupling), switch / 2), min(1.0 / cfg.a, switch / 2)]
    try:
        # rounding floor of the O(kappa) cancellation, integrated over the head
        noise = 8.0 * np.finfo(float).eps * cfg.a * switch ** 2
        head, _ = gauss_kronrod(lambda k: e_ke_direct_integrand(cfg, k), 0.0, switch,
                                rel_tol=quad.rel_tol * 1e-2, abs_tol=noise,
                                limit=quad.max_subdivisions, breakpoints=breaks)
        tail, _ = tail_integral(lambda k: e_ke_direct_tail_integrand(cfg, k), switch,
                                rel_tol=quad.rel_tol * 1e-2, limit=quad.max_subdivisions)
    except QuadratureError as exc:
        raise DensityError("e_ke_direct", exc) from exc
    return -(head + tail) / (4.0 * math.pi)


def e_ke_direct_integrand_mp(cfg: WellConfig, kappa: float, dps: int = 50):
    """Direct-route bracket evaluated term by term at ``dps`` decimal digits.

    The O(kappa) pieces ``4k^2 F`` and ``4ka`` cancel down to O(kappa^-3), so
    double precision loses ~``log10(8 k^4 / V^2)`` digits; extended precision
    keeps the unsimplified expression meaningful at large kappa.
    """
    with mpmath.workdps(dps):
        k = mpmath.mpf(kappa)
        v = mpmath.mpf(cfg.coupling)
        a = mpmath.mpf(cfg.a)
        kp = mpmath.sqrt(k * k + v)
        u = 2 * a * kp
        ch, sh = mpmath.cosh(u), mpmath.sinh(u)
        n = (k * k + kp * kp) * ch + 2 * kp * k * sh
        d = 2 * kp * k * ch + (k * k + kp * kp) * sh
        f = (2 * a * n + v * sh / kp) / (2 * kp * d)
        wall = v * mpmath.sinh(2 * kp * a) / d
        wall_left = v * mpmath.sinh(-2 * kp * a) / d
        return (4 * k * k * f - 4 * k * a) + 2 * v * f - (wall - wall_left)


def appendix_identity_check(cfg: WellConfig, kappa: float) -> float:
    """Absolute gap between the direct-route and closed-form integrands at ``kappa``.

    The direct bracket is evaluated in extended precision; the closed-form
    integrand in double precision through the overflow-safe path.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    cfg = cfg.folded()
    if cfg.is_free:
        return abs(float(e_ke_direct_integrand(cfg, np.array([kappa]))[0]))
    direct = float(e_ke_direct_integrand_mp(cfg, kappa))
    closed = float(e_ke_integrand(cfg, np.array([kappa]))[0])
    return abs(direct - closed)


@dataclass(frozen=True)
class EnergyReport:
    e_ke_closed: float
    e_ke_direct: float
    e_ke_profile: float
    cfg: WellConfig
    quad: QuadratureSpec
    profile: DensityProfile | None = field(default=None, repr=False, compare=False)

    def as_json(self) -> dict:
        return {
            "v0": self.cfg.v0,
            "a": self.cfg.a,
            "e_ke_closed": self.e_ke_closed,
            "e_ke_direct": self.e_ke_direct,
            "e_ke_profile": self.e_ke_profile,
            "rel_tol": self.quad.rel_tol,
            "kappa_max": self.quad.cutoff(self.cfg.a),
        }


def energy_report(cfg: WellConfig, quad: QuadratureSpec = QuadratureSpec(),
                  n_interior: int = 401, profile: DensityProfile | None = None) -> EnergyReport:
    if profile is None:
        profile = density_profile(cfg, interior_grid(cfg, n_interior), quad)
    return EnergyReport(e_ke_closed(cfg, quad), e_ke_direct(cfg, quad),
                        profile.interior_integral(), cfg, quad, profile)
