"""First-order kinetic-energy change while the barrier is ramped down linearly.

The potential is scaled by ``f(t) = 1 - alpha t`` on ``0 <= t <= 1/alpha``.
To lowest order the kinetic energy obeys ``dE/dt = -2 alpha (1 - alpha t) D(t)``
with

    D(t) = sum_pairs  int dk dq  C_kq^2 (1 - cos((k+q) t)) / (4 pi^2 (k+q) k q)

and ``C_kq`` the well overlap of two static modes.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .density import e_ke_closed
from .modes import ANTISYMMETRIC, SYMMETRIC, OverlapTable, overlap_table
from .quadrature import QuadratureSpec
from .sampling import QiReport, eta_threshold, violation_report
from .well import WellConfig

PERTURBATIVE_LIMIT = 0.3


class PerturbationWarning(UserWarning):
    """First-order results are outside the regime where they can be trusted."""


def ramp_profile(alpha: float, t):
    """``f(t)``: 1 before the ramp, ``1 - alpha t`` during, 0 after."""
    t = np.asarray(t, dtype=float)
    return np.clip(1.0 - alpha * t, 0.0, 1.0) * (t >= 0) + (t < 0)


def b_kq(alpha: float, k, q, t):
    """``B_kq(t) = int_0^t (f(t') - 1) exp(-i (k+q) t') dt'`` in closed form."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > 1.0 / alpha):
        raise ValueError("B_kq is defined on the ramp window 0 <= t <= 1/alpha")
    w = np.asarray(k, dtype=float) + np.asarray(q, dtype=float)
    phase = np.exp(-1j * w * t)
    return -alpha * ((1j * w * t + 1.0) / w ** 2 * phase - 1.0 / w ** 2)


def oscillation_combination(alpha: float, k, q, t):
    """``B e^{i(k+q)t} + conj(B) e^{-i(k+q)t}`` evaluated from :func:`b_kq`."""
    w = np.asarray(k, dtype=float) + np.asarray(q, dtype=float)
    b = b_kq(alpha, k, q, t)
    return 2.0 * np.real(b * np.exp(1j * w * np.asarray(t, dtype=float)))


@dataclass(frozen=True)
class RampConfig:
    """Ramp rate plus the momentum grid used for the double integral.

    The grid is a Gauss-Legendre panel mesh: one panel on ``[0, k_lo]``,
    ``n_log`` geometric panels up to ``1/a``, then uniform panels of width
    ``panel_width`` up to ``k_max``.
    """

    alpha: float
    cfg: WellConfig
    k_max: float | None = None
    n_log: int = 12
    panel_width: float | None = None
    order: int = 8
    n_times: int = 201

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.n_times < 3 or self.n_times % 2 == 0:
            raise ValueError("n_times must be odd and >= 3 (Simpson)")

    @property
    def cutoff(self) -> float:
        return self.k_max if self.k_max is not None else 50.0 / self.cfg.a

    @property
    def width(self) -> float:
        if self.panel_width is not None:
            return self.panel_width
        return 0.5 * min(1.0 / self.cfg.a, self.alpha)

    @property
    def coupling_strength(self) -> float:
        """Dimensionless ``lam V0 a^2``."""
        return self.cfg.coupling * self.cfg.a ** 2

    def refined(self) -> "RampConfig":
        """Half the momentum panel width and half the time step."""
        return RampConfig(self.alpha, self.cfg, self.k_max, 2 * self.n_log, self.width / 2,
                          self.order, 2 * self.n_times - 1)

    def momentum_grid(self) -> tuple[np.ndarray, np.ndarray]:
        a = self.cfg.a
        kmax = self.cutoff
        k_lo = 1e-3 / a
        edges = [0.0]
        edges.extend(np.geomspace(k_lo, min(1.0 / a, kmax), self.n_log + 1))
        if kmax > 1.0 / a:
            n_lin = max(1, int(math.ceil((kmax - 1.0 / a) / self.width)))
            edges.extend(np.linspace(1.0 / a, kmax, n_lin + 1)[1:])
        edges = np.unique(np.asarray(edges))
        x, w = np.polynomial.legendre.leggauss(self.order)
        lo, hi = edges[:-1, None], edges[1:, None]
        nodes = (0.5 * (hi - lo) * (x + 1.0) + lo).ravel()
        weights = (0.5 * (hi - lo) * w).ravel()
        return nodes, weights


@dataclass
class DKernel:
    """Precomputed ``w_k w_q sum C^2 / (4 pi^2 (k+q) k q)`` on the tensor grid."""

    k: np.ndarray
    weights: np.ndarray
    table: OverlapTable = field(repr=False)

    def __post_init__(self):
        k, w = self.k, self.weights
        c2 = self.table.pair(SYMMETRIC, SYMMETRIC) ** 2 + self.table.pair(ANTISYMMETRIC, ANTISYMMETRIC) ** 2
        kk, qq = k[:, None], k[None, :]
        self.kernel = (w[:, None] * w[None, :]) * c2 / (4.0 * math.pi ** 2 * (kk + qq) * kk * qq)
        self.ksum = kk + qq

    def __call__(self, t: float) -> float:
        # 1 - cos(x) = 2 sin^2(x/2), no cancellation at small x
        return float(np.sum(self.kernel * 2.0 * np.sin(0.5 * self.ksum * t) ** 2))


def d_kernel(rcfg: RampConfig) -> DKernel:
    k, w = rcfg.momentum_grid()
    return DKernel(k, w, overlap_table(rcfg.cfg, k))


def d_of_t(rcfg: RampConfig, t, kernel: DKernel | None = None):
    """``D(t)`` on the configured momentum grid (scalar or array of times)."""
    kernel = kernel or d_kernel(rcfg)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0):
        raise ValueError("D(t) needs t >= 0")
    out = np.array([kernel(tv) for tv in t_arr])
    return float(out[0]) if np.ndim(t) == 0 else out


def small_t_coefficient(kernel: DKernel) -> float:
    """``lim D(t)/t^2`` on the truncated grid (diagnostic of the UV weight)."""
    return float(np.sum(kernel.kernel * kernel.ksum ** 2) / 2.0)


def overlap_edge_behaviour(cfg: WellConfig, q: float = 1.0, ks=None) -> np.ndarray:
    """``C(k, q) / k`` for ``k -> 0``; finite values show ``C = O(k)`` at the edge."""
    ks = np.geomspace(1e-6, 1e-2, 5) / cfg.a if ks is None else np.asarray(ks)
    table = overlap_table(cfg, ks, np.array([q]))
    return np.stack([table.pair(SYMMETRIC, SYMMETRIC)[:, 0] / ks,
                     table.pair(ANTISYMMETRIC, ANTISYMMETRIC)[:, 0] / ks])


@dataclass(frozen=True)
class RampResult:
    times: np.ndarray
    dEdt: np.ndarray
    d_values: np.ndarray
    delta_e: float
    e_ke: float
    rcfg: RampConfig
    post_ramp: QiReport

    def summary(self) -> dict:
        return {
            "alpha": self.rcfg.alpha,
            "delta_e": self.delta_e,
            "e_ke": self.e_ke,
            "post_ramp_eta_star": self.post_ramp.eta_star,
            "post_ramp_violated": self.post_ramp.violated,
        }


def ramp_run(rcfg: RampConfig, quad: QuadratureSpec = QuadratureSpec(), *,
             e_ke: float | None = None, eta: float | None = None,
             kernel: DKernel | None = None) -> RampResult:
    """Tabulate ``dE/dt`` over the ramp, integrate it, and redo the QI test.

    After the ramp the density is untouched for ``|x| > a + 1/alpha``, so the
    plateau half-width becomes ``a + 1/alpha`` and the enclosed total is
    ``E_KE + delta_e``. ``eta`` defaults to half of the new threshold.
    """
    cfg = rcfg.cfg
    if rcfg.coupling_strength > PERTURBATIVE_LIMIT:
        warnings.warn(f"lam*V0*a^2 = {rcfg.coupling_strength:.3g} > {PERTURBATIVE_LIMIT}: "
                      "first-order perturbation theory is dubious", PerturbationWarning,
                      stacklevel=2)
    kernel = kernel or d_kernel(rcfg)
    times = np.linspace(0.0, 1.0 / rcfg.alpha, rcfg.n_times)
    d_vals = d_of_t(rcfg, times, kernel)
    dEdt = -2.0 * rcfg.alpha * (1.0 - rcfg.alpha * times) * d_vals
    delta_e = float(simpson(dEdt, x=times))
    if e_ke is None:
        e_ke = e_ke_closed(cfg, quad)
    if e_ke != 0 and abs(delta_e) > PERTURBATIVE_LIMIT * abs(e_ke):
        warnings.warn(f"first-order shift {delta_e:.3g} is not small against E_KE = {e_ke:.3g}",
                      PerturbationWarning, stacklevel=2)
    total = e_ke + delta_e
    star = eta_threshold(total)
    if eta is None:
        eta = star / 2 if star > 0 else 1.0 / cfg.a
    post = violation_report(cfg, eta, quad, e_ke=total, plateau_a=cfg.a + 1.0 / rcfg.alpha)
    return RampResult(times, dEdt, d_vals, delta_e, e_ke, rcfg, post)
