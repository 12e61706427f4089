"""Two-mass-spring benchmark: plant family, stock controller, canned designs.

The plant is K / (M1 M2 s^4 + K (M1 + M2) s^2) with uncertain masses
M1, M2 in [0.5, 2] and spring constant K in [0.8, 1.2]; the nominal model
takes M1 = M2 = K = 1.  The stabilizing output-feedback compensator is
(-6.83 s^2 + 1.85 s + 0.28) / (s^2 + 4.28 s + 6.08).
"""

from __future__ import annotations

import numpy as np

from .discretize import DiscretizationMethod
from .dob import DobDesign, QFilter
from .lti import Domain, ParameterBox, RationalTransfer, UncertainPlantFamily
from .polynomial import Polynomial

__all__ = [
    "two_mass_spring_member",
    "two_mass_spring_family",
    "nominal_model",
    "benchmark_controller",
    "benchmark_design",
    "proposed_q",
    "indirect_q_coefficients",
]

MASS_BOUNDS = (0.5, 2.0)
SPRING_BOUNDS = (0.8, 1.2)

#: (z-1)-basis denominator coefficients [a0..a3] of the directly designed filter
PROPOSED_Q_COEFFS = (0.24, 1.0, 3.0, 3.0)

#: CT prototype denominator coefficients [a0..a3] for the indirect route
INDIRECT_CT_COEFFS = (0.3, 1.0, 2.0, 2.0)


def two_mass_spring_member(M1: float, M2: float, K: float) -> RationalTransfer:
    """K / (M1 M2 s^4 + K (M1+M2) s^2), normalized to a monic denominator."""
    if min(M1, M2, K) <= 0:
        raise ValueError("masses and spring constant must be positive")
    den = Polynomial([0.0, 0.0, K * (M1 + M2), 0.0, M1 * M2])
    num = Polynomial([K])
    return RationalTransfer(num, den, Domain.CONTINUOUS_S).normalized()


def _coefficients(params):
    M1, M2, K = params
    g = K / (M1 * M2)
    alpha = np.array([0.0, 0.0, K * (M1 + M2) / (M1 * M2), 0.0])
    return g, alpha, np.empty(0)


def two_mass_spring_family(grid_points: int = 21) -> UncertainPlantFamily:
    box = ParameterBox(
        names=("M1", "M2", "K"),
        lows=np.array([MASS_BOUNDS[0], MASS_BOUNDS[0], SPRING_BOUNDS[0]]),
        highs=np.array([MASS_BOUNDS[1], MASS_BOUNDS[1], SPRING_BOUNDS[1]]),
        to_coefficients=_coefficients,
    )
    return UncertainPlantFamily.from_parameter_box(n=4, nu=4, box=box,
                                                   grid_points=grid_points)


def nominal_model() -> RationalTransfer:
    return two_mass_spring_member(1.0, 1.0, 1.0)


def benchmark_controller() -> RationalTransfer:
    return RationalTransfer(Polynomial([0.28, 1.85, -6.83]),
                            Polynomial([6.08, 4.28, 1.0]),
                            Domain.CONTINUOUS_S)


def proposed_q() -> QFilter:
    return QFilter.constant_numerator(PROPOSED_Q_COEFFS)


def indirect_q_coefficients(psi: float) -> QFilter:
    """CT prototype rescaled by the bandwidth ratio psi = tau/delta."""
    a = INDIRECT_CT_COEFFS
    nq = len(a)
    return QFilter.constant_numerator(
        tuple(a[i] / psi ** (nq - i) for i in range(nq)))


def benchmark_design(q: QFilter, delta: float = 0.015,
                     nominal_method: DiscretizationMethod = DiscretizationMethod.FDM,
                     controller_method: DiscretizationMethod = DiscretizationMethod.FDM,
                     ) -> DobDesign:
    return DobDesign(
        family=two_mass_spring_family(),
        nominal_ct=nominal_model(),
        controller_ct=benchmark_controller(),
        nominal_method=nominal_method,
        controller_method=controller_method,
        q=q,
        delta=delta,
    )
