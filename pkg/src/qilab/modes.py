"""Delta-normalized scattering modes of the barrier and their overlap integrals.

Each parity is normalized to unit exterior amplitude,
``psi(x) = cos(k|x| + delta)`` (times ``sign(x)`` for the odd mode) for
``|x| > a``, which gives ``pi * delta(k - k')`` per parity and
``2 pi delta(k - k')`` summed over both. Inside the well the even/odd
solutions are written in the threshold-regular basis

    even: cos(p x),      odd: sin(p x) / p,      p = sqrt(k^2 - V)

with ``p`` imaginary below threshold (cosh, sinh) and the ``p -> 0`` limits
``1`` and ``x`` at threshold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import QuadratureError, gauss_kronrod
from .well import WellConfig, greens_diag

SYMMETRIC = "+"
ANTISYMMETRIC = "-"
PARITIES = (SYMMETRIC, ANTISYMMETRIC)
PAIRS = ((SYMMETRIC, SYMMETRIC), (SYMMETRIC, ANTISYMMETRIC),
         (ANTISYMMETRIC, SYMMETRIC), (ANTISYMMETRIC, ANTISYMMETRIC))

_SERIES_CUT = 1e-3
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(160)


def _parity(parity: str) -> str:
    aliases = {"+": SYMMETRIC, "symmetric": SYMMETRIC, "even": SYMMETRIC,
               "-": ANTISYMMETRIC, "antisymmetric": ANTISYMMETRIC, "odd": ANTISYMMETRIC}
    try:
        return aliases[parity]
    except KeyError:
        raise ValueError(f"unknown parity {parity!r}") from None


def _wavenumber(cfg: WellConfig, k):
    """Complex interior wavenumber ``sqrt(k^2 - V)`` (imaginary below threshold)."""
    return np.sqrt(np.asarray(k, dtype=float) ** 2 - cfg.coupling + 0j)


def _even(p, x):
    """``cos(px)``, ``-p sin(px)``, ``-p^2 cos(px)``."""
    px = p * x
    return np.cos(px), -p * np.sin(px), -p * p * np.cos(px)


def _odd(p, x):
    """``sin(px)/p``, ``cos(px)``, ``-p sin(px)`` with the ``p -> 0`` limit kept."""
    px = p * x
    small = np.abs(px) < _SERIES_CUT
    safe_p = np.where(p == 0, 1.0, p)
    val = np.where(small, x * (1.0 - px * px / 6.0 + px ** 4 / 120.0), np.sin(px) / safe_p)
    return val, np.cos(px), -p * np.sin(px)


def _basis(parity, p, x):
    return _even(p, x) if parity == SYMMETRIC else _odd(p, x)


def _matching(cfg: WellConfig, k, parity):
    """Interior amplitude ``B`` and exterior phase ``delta`` for momenta ``k``."""
    k = np.asarray(k, dtype=float)
    p = _wavenumber(cfg, k)
    u, du, _ = _basis(parity, p, cfg.a)
    u, du = np.real(u), np.real(du)
    amp = 1.0 / np.hypot(u, du / k)
    theta = np.arctan2(-amp * du / k, amp * u)
    return amp, theta - k * cfg.a, p


@dataclass(frozen=True)
class ModeFunction:
    """Real scattering solution ``psi_k^parity`` of the static barrier."""

    cfg: WellConfig
    k: float
    parity: str
    amplitude: float
    phase: float

    @property
    def interior_wavenumber(self) -> complex:
        return complex(_wavenumber(self.cfg, self.k))

    def _eval(self, x, order):
        x = np.asarray(x, dtype=float)
        k, a = self.k, self.cfg.a
        inside = np.abs(x) <= a
        p = self.interior_wavenumber
        vals = _basis(self.parity, p, x)
        interior = self.amplitude * np.real(vals[order])
        arg = k * np.abs(x) + self.phase
        ext = [np.cos(arg), -k * np.sin(arg), -k * k * np.cos(arg)][order]
        # d/dx of f(|x|) flips sign for x < 0 on odd derivative orders
        sgn = np.sign(x)
        if self.parity == SYMMETRIC:
            exterior = ext * (sgn if order == 1 else 1.0)
        else:
            exterior = ext * (1.0 if order == 1 else sgn)
        return np.where(inside, interior, exterior)

    def __call__(self, x):
        return self._eval(x, 0)

    def derivative(self, x):
        return self._eval(x, 1)

    def second_derivative(self, x):
        return self._eval(x, 2)

    def equation_residual(self, x):
        """``-k^2 psi - psi'' + V psi`` at ``x``."""
        return (-self.k ** 2 * self(x) - self.second_derivative(x)
                + self.cfg.potential(x) * self(x))

    def matching_residual(self) -> float:
        """Largest relative jump of ``psi`` or ``psi'`` across either wall."""
        a = self.cfg.a
        worst = 0.0
        p = self.interior_wavenumber
        u, du, _ = _basis(self.parity, p, a)
        inner = (self.amplitude * float(np.real(u)), self.amplitude * float(np.real(du)))
        arg = self.k * a + self.phase
        outer = (math.cos(arg), -self.k * math.sin(arg))
        scale = (1.0, self.k)
        for i, o, s in zip(inner, outer, scale):
            worst = max(worst, abs(i - o) / s)
        return worst


def mode(cfg: WellConfig, k: float, parity: str = SYMMETRIC) -> ModeFunction:
    if not k > 0:
        raise ValueError("mode momentum must be positive")
    parity = _parity(parity)
    amp, phase, _ = _matching(cfg, np.array([k]), parity)
    return ModeFunction(cfg, float(k), parity, float(amp[0]), float(phase[0]))


def mode_values(cfg: WellConfig, k, x, parity: str):
    """``psi_k(x)`` for an array of momenta at one position."""
    parity = _parity(parity)
    k = np.asarray(k, dtype=float)
    amp, phase, p = _matching(cfg, k, parity)
    if abs(x) <= cfg.a:
        return amp * np.real(_basis(parity, p, x)[0])
    arg = k * abs(x) + phase
    return np.cos(arg) * (1.0 if parity == SYMMETRIC else math.copysign(1.0, x))


def spectral_greens_difference(cfg: WellConfig, x: float, kappa: float,
                               k_max: float | None = None, rel_tol: float = 1e-10) -> float:
    """``G_lam - G_0`` at ``(x, x, i kappa)`` from the mode completeness sum.

    ``integral_0^k_max (dk/pi) sum_parity [psi_lam^2 - psi_0^2] / (k^2 + kappa^2)``
    """
    if k_max is None:
        k_max = 100.0 / cfg.a

    def f(k):
        total = mode_values(cfg, k, x, SYMMETRIC) ** 2 + mode_values(cfg, k, x, ANTISYMMETRIC) ** 2
        return (total - 1.0) / (k * k + kappa * kappa) / math.pi

    period = math.pi / cfg.a
    pts = list(np.arange(period, k_max, period))
    if cfg.coupling > 0:
        pts.append(math.sqrt(cfg.coupling))
    val, _ = gauss_kronrod(f, 0.0, k_max, rel_tol=rel_tol, abs_tol=1e-15, limit=20000,
                           breakpoints=pts)
    return val


def greens_mode_identity(cfg: WellConfig, x: float, kappa: float, k_max: float | None = None) -> float:
    """Absolute gap between the mode-sum and closed Green's function differences."""
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    if cfg.is_free:
        return 0.0
    try:
        spectral = spectral_greens_difference(cfg, x, kappa, k_max)
    except QuadratureError as exc:
        raise QuadratureError("mode-sum integral", exc.estimate, exc.error) from exc
    closed = greens_diag(cfg, x, kappa).value - 1.0 / (2.0 * kappa)
    return abs(spectral - closed)


def _sinc_a(z, a):
    """``sin(z a) / z`` with the ``z -> 0`` limit ``a``."""
    za = z * a
    small = np.abs(za) < 1e-4
    safe = np.where(small, 1.0, z)
    return np.where(small, a * (1.0 - za * za / 6.0), np.sin(za) / safe)


def _overlap_gl(parity, pk, pq, a):
    """Gauss-Legendre fallback for the near-threshold odd-parity integrals."""
    x = 0.5 * a * (_GL_NODES + 1.0)
    w = 0.5 * a * _GL_WEIGHTS
    uk = _basis(parity, pk[..., None], x)[0]
    uq = _basis(parity, pq[..., None], x)[0]
    return 2.0 * np.sum(w * uk * uq, axis=-1)


def _interior_integral(parity, pk, pq, a):
    """``integral_{-a}^{a} u_k u_q dx`` for the normalized-basis functions."""
    if parity == SYMMETRIC:
        return _sinc_a(pk - pq, a) + _sinc_a(pk + pq, a)
    near = (np.abs(pk) * a < 0.05) | (np.abs(pq) * a < 0.05)
    safe_k = np.where(near, 1.0, pk)
    safe_q = np.where(near, 1.0, pq)
    out = (_sinc_a(pk - pq, a) - _sinc_a(pk + pq, a)) / (safe_k * safe_q)
    if np.any(near):
        pk_b, pq_b = np.broadcast_arrays(pk, pq)
        out = np.array(np.broadcast_to(out, pk_b.shape), dtype=complex)
        out[near] = _overlap_gl(parity, pk_b[near], pq_b[near], a)
    return out


def overlap(cfg: WellConfig, k, q, parities=(SYMMETRIC, SYMMETRIC)):
    """``C = integral lam V psi_k psi_q dx`` in closed form (broadcasts over k, q)."""
    p1, p2 = (_parity(p) for p in parities)
    k = np.asarray(k, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(k <= 0) or np.any(q <= 0):
        raise ValueError("overlap momenta must be positive")
    shape = np.broadcast(k, q).shape
    if p1 != p2 or cfg.is_free:
        out = np.zeros(shape)
        return float(out) if out.ndim == 0 else out
    amp_k, _, pk = _matching(cfg, k, p1)
    amp_q, _, pq = _matching(cfg, q, p1)
    integral = np.real(_interior_integral(p1, pk, pq, cfg.a))
    out = cfg.coupling * amp_k * amp_q * integral
    return float(out) if np.ndim(out) == 0 else out


def overlap_numeric(cfg: WellConfig, k: float, q: float, parities=(SYMMETRIC, SYMMETRIC),
                    rel_tol: float = 1e-12) -> float:
    """Quadrature of ``V psi_k psi_q`` over the well; test oracle for :func:`overlap`."""
    m1, m2 = mode(cfg, k, parities[0]), mode(cfg, q, parities[1])
    f = lambda x: cfg.coupling * m1(x) * m2(x)  # noqa: E731
    # absolute floor: rounding level of the integrand magnitude over the well
    floor = 1e-15 * cfg.coupling * cfg.a * max(m1.amplitude, 1.0) * max(m2.amplitude, 1.0)
    return gauss_kronrod(f, -cfg.a, cfg.a, rel_tol=rel_tol, abs_tol=floor, limit=2000,
                         breakpoints=(0.0,))[0]


@dataclass(frozen=True)
class OverlapTable:
    k: np.ndarray
    q: np.ndarray
    values: dict

    def pair(self, p1: str, p2: str) -> np.ndarray:
        return self.values[(_parity(p1), _parity(p2))]

    def rows(self):
        """``(k, q, pair_label, c)`` tuples for CSV dumps."""
        for (p1, p2), table in self.values.items():
            for i, kv in enumerate(self.k):
                for j, qv in enumerate(self.q):
                    yield kv, qv, p1 + p2, table[i, j]


def overlap_table(cfg: WellConfig, k, q=None) -> OverlapTable:
    k = np.asarray(k, dtype=float)
    q = k if q is None else np.asarray(q, dtype=float)
    values = {}
    for pair in PAIRS:
        values[pair] = np.asarray(overlap(cfg, k[:, None], q[None, :], pair), dtype=float)
    return OverlapTable(k, q, values)
