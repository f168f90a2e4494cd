"""Numerical laboratory for the spatial quantum inequality near a square barrier."""

__version__ = "0.1.0"

from .well import WellConfig, greens_diag  # noqa: E402
from .quadrature import QuadratureSpec  # noqa: E402
from .density import density_at, density_profile, e_ke_closed, e_ke_direct, energy_report  # noqa: E402
from .sampling import violation_report  # noqa: E402

__all__ = [
    "WellConfig", "greens_diag", "QuadratureSpec", "density_at", "density_profile",
    "e_ke_closed", "e_ke_direct", "energy_report", "violation_report", "__version__",
]
