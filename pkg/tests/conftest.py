import mpmath as mp
import pytest


def mp_nd(v0, a, kappa, lam=1.0, dps=60):
    """N and D of the well at 60 digits, straight from their defining sums."""
    with mp.workdps(dps):
        k = mp.mpf(kappa)
        kp = mp.sqrt(k * k + mp.mpf(lam) * mp.mpf(v0))
        u = 2 * mp.mpf(a) * kp
        n = (k * k + kp * kp) * mp.cosh(u) + 2 * kp * k * mp.sinh(u)
        d = 2 * kp * k * mp.cosh(u) + (k * k + kp * kp) * mp.sinh(u)
        return n, d, kp


@pytest.fixture
def nd_oracle():
    return mp_nd
