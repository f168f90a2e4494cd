"""Diagonal Green's function of the inverse square well at imaginary momentum.

The background is a rectangular barrier of height ``v0`` on ``|x| < a``.
Everything here is evaluated at ``k = i*kappa`` with ``kappa >= 0``, where the
Green's function is real.

Hyperbolic functions of ``u = 2*a*kappa'`` are carried in scaled form,
``cosh(u) = e^u * c`` and ``sinh(u) = e^u * s``, and the ``e^u`` factor is
cancelled inside every ratio. Raw (unscaled) ``N`` and ``D`` are available
only while ``u <= 700``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_EXPONENT = 700.0


class OverflowDomainError(OverflowError):
    """Unscaled hyperbolic quantity requested beyond the safe exponent range."""


@dataclass(frozen=True)
class WellConfig:
    """Barrier of height ``v0`` (1/length^2) and half-width ``a``, coupling ``lam``."""

    v0: float
    a: float
    lam: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"half-width a must be positive, got {self.a}")
        if not self.v0 >= 0:
            raise ValueError(f"v0 must be non-negative, got {self.v0}")
        if not self.lam >= 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam}")

    @property
    def coupling(self) -> float:
        """Effective potential height ``lam * v0``."""
        return self.lam * self.v0

    @property
    def is_free(self) -> bool:
        return self.coupling == 0.0

    def folded(self) -> "WellConfig":
        """Same physics with ``lam`` absorbed into ``v0``."""
        return WellConfig(self.coupling, self.a, 1.0)

    def kappa_prime(self, kappa):
        kappa = np.asarray(kappa, dtype=float)
        return np.sqrt(kappa * kappa + self.coupling)

    def potential(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) < self.a, self.coupling, 0.0)

    def scaled(self, s: float) -> "WellConfig":
        """Image under the length rescaling ``a -> a/s``, ``v0 -> s^2 v0``."""
        return WellConfig(self.v0 * s * s, self.a / s, self.lam)


@dataclass(frozen=True)
class GreensDiagonal:
    """``G(x, x, i kappa)`` and its first two derivatives along the diagonal."""

    value: np.ndarray | float
    d1: np.ndarray | float
    d2: np.ndarray | float


def _check_kappa(kappa, *, allow_zero: bool):
    kappa = np.asarray(kappa, dtype=float)
    if not np.all(np.isfinite(kappa)):
        raise ValueError("kappa must be finite")
    if allow_zero:
        if np.any(kappa < 0):
            raise ValueError("kappa must be non-negative")
    elif np.any(kappa <= 0):
        raise ValueError("kappa must be positive")
    return kappa


def scaled_hyperbolics(u):
    """Return ``(c, s)`` with ``cosh(u) = e^u c`` and ``sinh(u) = e^u s``."""
    u = np.asarray(u, dtype=float)
    em = np.exp(-2.0 * u)
    return 0.5 * (1.0 + em), -0.5 * np.expm1(-2.0 * u)


def _parts(cfg: WellConfig, kappa):
    """Scaled N, D together with kappa', u and the scaled sinh(u)."""
    kp = cfg.kappa_prime(kappa)
    u = 2.0 * cfg.a * kp
    c, s = scaled_hyperbolics(u)
    sq = kappa * kappa + kp * kp
    cross = 2.0 * kp * kappa
    n_hat = sq * c + cross * s
    d_hat = cross * c + sq * s
    return n_hat, d_hat, kp, u, s


def n_kappa_scaled(cfg: WellConfig, kappa):
    """``N_kappa`` as ``(mantissa, exponent)`` with ``N = mantissa * e^exponent``."""
    kappa = _check_kappa(kappa, allow_zero=True)
    n_hat, _, _, u, _ = _parts(cfg, kappa)
    return n_hat, u


def d_kappa_scaled(cfg: WellConfig, kappa):
    """``D_kappa`` as ``(mantissa, exponent)``."""
    kappa = _check_kappa(kappa, allow_zero=True)
    _, d_hat, _, u, _ = _parts(cfg, kappa)
    return d_hat, u


def _unscale(mantissa, u, name):
    if np.any(u > MAX_EXPONENT):
        raise OverflowDomainError(
            f"{name} needs exp({float(np.max(u)):.1f}); use the scaled form beyond u={MAX_EXPONENT}")
    return mantissa * np.exp(u)


def n_kappa(cfg: WellConfig, kappa):
    """``N = (k^2 + k'^2) cosh(2k'a) + 2k'k sinh(2k'a)``, unscaled."""
    mant, u = n_kappa_scaled(cfg, kappa)
    return _unscale(mant, u, "N_kappa")


def d_kappa(cfg: WellConfig, kappa):
    """``D = 2k'k cosh(2k'a) + (k^2 + k'^2) sinh(2k'a)``, unscaled."""
    mant, u = d_kappa_scaled(cfg, kappa)
    return _unscale(mant, u, "D_kappa")


def reflection_decay(cfg: WellConfig, kappa, x):
    """Stable product ``r(i kappa) * exp(-2 kappa |x|)`` for ``|x| >= a``."""
    kappa = _check_kappa(kappa, allow_zero=False)
    ax = np.abs(np.asarray(x, dtype=float))
    if np.any(ax < cfg.a):
        raise ValueError("reflection_decay is defined outside the well only")
    if cfg.is_free:
        return np.zeros(np.broadcast(kappa, ax).shape)
    _, d_hat, _, _, s = _parts(cfg, kappa)
    return -cfg.coupling * s / d_hat * np.exp(-2.0 * kappa * (ax - cfg.a))


def reflection(cfg: WellConfig, kappa):
    """Exterior reflection amplitude ``r(i kappa)`` (non-positive)."""
    kappa = _check_kappa(kappa, allow_zero=False)
    if cfg.is_free:
        return np.zeros_like(kappa)
    grow = 2.0 * kappa * cfg.a
    if np.any(grow > MAX_EXPONENT):
        raise OverflowDomainError("r(i kappa) overflows; use reflection_decay")
    return reflection_decay(cfg, kappa, cfg.a) * np.exp(grow)


def _interior(cfg: WellConfig, x, kappa):
    n_hat, d_hat, kp, _, _ = _parts(cfg, kappa)
    ax = np.abs(x)
    grow = np.exp(2.0 * kp * (ax - cfg.a))
    shrink = np.exp(-2.0 * kp * (ax + cfg.a))
    ch = 0.5 * (grow + shrink)          # cosh(2k'x) e^{-u}
    sh = 0.5 * np.sign(x) * (grow - shrink)
    v = cfg.coupling
    value = (n_hat + v * ch) / (2.0 * kp * d_hat)
    d1 = v * sh / d_hat
    d2 = 2.0 * kp * v * ch / d_hat
    return value, d1, d2


def _exterior(cfg: WellConfig, x, kappa):
    refl = reflection_decay(cfg, kappa, x)
    value = (1.0 + refl) / (2.0 * kappa)
    d1 = -np.sign(x) * refl
    d2 = 2.0 * kappa * refl
    return value, d1, d2


def greens_diag(cfg: WellConfig, x, kappa) -> GreensDiagonal:
    """Diagonal Green's function and derivatives at ``(x, i kappa)``.

    The interior branch is used for ``|x| <= a``. ``kappa = 0`` is accepted
    inside the well when the coupling is positive (finite limit) and rejected
    elsewhere.
    """
    x = np.asarray(x, dtype=float)
    kappa = _check_kappa(kappa, allow_zero=True)
    x, kappa = np.broadcast_arrays(x, kappa)
    inside = np.abs(x) <= cfg.a
    if np.any(kappa[~inside] == 0) or (cfg.is_free and np.any(kappa == 0)):
        raise ValueError("kappa = 0 is singular for the free/exterior Green's function")
    value = np.empty(x.shape)
    d1 = np.empty(x.shape)
    d2 = np.empty(x.shape)
    if np.any(inside):
        value[inside], d1[inside], d2[inside] = _interior(cfg, x[inside], kappa[inside])
    if np.any(~inside):
        out = ~inside
        value[out], d1[out], d2[out] = _exterior(cfg, x[out], kappa[out])
    if value.ndim == 0:
        return GreensDiagonal(float(value), float(d1), float(d2))
    return GreensDiagonal(value, d1, d2)


def greens_exterior(cfg: WellConfig, x, kappa) -> GreensDiagonal:
    """Exterior-branch formula evaluated at ``|x| >= a`` (used for wall checks)."""
    x = np.asarray(x, dtype=float)
    kappa = _check_kappa(kappa, allow_zero=False)
    return GreensDiagonal(*_exterior(cfg, x, kappa))


def interval_integral(cfg: WellConfig, kappa):
    """``F(kappa)``: integral of ``G(x, x, i kappa)`` over ``-a < x < a``."""
    kappa = _check_kappa(kappa, allow_zero=True)
    if cfg.is_free:
        if np.any(kappa == 0):
            raise ValueError("free interval integral is singular at kappa = 0")
        return cfg.a / kappa
    n_hat, d_hat, kp, _, s = _parts(cfg, kappa)
    return (2.0 * cfg.a * n_hat + cfg.coupling * s / kp) / (2.0 * kp * d_hat)
