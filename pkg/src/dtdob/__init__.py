"""dtdob: analysis and design of sampled-data loops with digital disturbance observers.

The package is organized bottom-up:

* :mod:`dtdob.polynomial` - polynomial arithmetic, root extraction, and the
  Schur (Jury), Hurwitz (Routh), and interval (Kharitonov) stability tests;
* :mod:`dtdob.lti` - transfer functions, canonical realizations, and
  uncertain plant families;
* :mod:`dtdob.discretize` - exact zero-order-hold equivalents, the
  forward/backward difference, bilinear, and matched pole-zero methods,
  sampling-zero machinery, and sampling-period validation;
* :mod:`dtdob.dob` - the closed-loop characteristic polynomial, its fast and
  slow limiting factors, the robust-stability verdict, root contours, and the
  negative-result predicates;
* :mod:`dtdob.design` - direct and indirect Q-filter synthesis;
* :mod:`dtdob.sim` - sampled-data closed-loop simulation and frequency
  responses;
* :mod:`dtdob.benchmark` - the two-mass-spring benchmark problem;
* :mod:`dtdob.cli` - the command-line front end.
"""

from .polynomial import (
    ComplexRootSet,
    HurwitzResult,
    IntervalPolynomial,
    Polynomial,
    SchurResult,
    Tristate,
    add,
    compose_affine,
    interval_hurwitz,
    is_hurwitz,
    is_schur,
    jury_schur_test,
    kharitonov_vertices,
    mul,
    roots,
    routh_hurwitz_test,
)
from .lti import (
    Domain,
    ParameterBox,
    RationalTransfer,
    StateSpace,
    UncertainPlantFamily,
    gain_interval,
    high_frequency_gain,
    realize_controllable_canonical,
    sample_member,
    transfer_of,
)
from .discretize import (
    DiscreteModel,
    DiscretizationMethod,
    LimitComponents,
    ZeroClassification,
    approx_discretize,
    classify_zeros,
    discretize_model,
    euler_frobenius,
    euler_frobenius_coefficients,
    limit_components,
    matrix_exponential_with_integral,
    validate_sampling_period,
    zoh_discretize,
)
from .dob import (
    ContourResult,
    DobDesign,
    QFilter,
    StabilityVerdict,
    allpass_instability_predicate,
    characteristic_polynomial,
    corollary1_predicate,
    first_order_bt_mpz_predicate,
    incremental_characteristic_polynomial,
    psi_fast,
    psi_slow,
    root_contour,
    theorem1_verdict,
)
from .design import (
    DirectDesignResult,
    IndirectDesignResult,
    design_q_direct,
    design_q_indirect,
    kbar_search,
)
from .sim import (
    ControllerRealization,
    SimulationTrace,
    SineSignal,
    StepSignal,
    SumSignal,
    TraceClass,
    classify_trace,
    exact_sample_propagation,
    frequency_response,
    realize_controller,
    rk4_sample_propagation,
    simulate,
    two_mass_spring_member,
    write_trace_csv,
)
from . import benchmark, errors

__version__ = "0.1.0"
