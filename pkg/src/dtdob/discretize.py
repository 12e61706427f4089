"""Discretization machinery: exact ZOH equivalents, the four approximate
methods (forward/backward difference, bilinear, matched pole-zero), limiting
components, and zero classification.

Discrete models are kept in factored form (lead gain, zeros, poles).  The
factored form is what makes small-sampling-period numerics viable: the z- and
incremental-domain coefficient expansions are rebuilt from roots instead of
being composed out of nearly-cancelling z-coefficients.

Internally the ZOH path runs in scaled state coordinates
``x_i' = x_i / delta^(n-i)`` so that the discretized input column is
uniformly sized; the small first Markov parameter (order delta^nu / nu!)
then survives in full relative precision and the invariant-zero pencil stays
well balanced.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import (
    AmbiguousPairing,
    DegenerateSamplingPeriod,
    SingularSubstitution,
)
from .lti import (
    Domain,
    RationalTransfer,
    UncertainPlantFamily,
    realize_controllable_canonical,
)
from .polynomial import Polynomial, real_poly_from_roots, roots

__all__ = [
    "DiscretizationMethod",
    "LimitComponents",
    "ZeroClassification",
    "DiscreteModel",
    "euler_frobenius",
    "euler_frobenius_coefficients",
    "matrix_exponential_with_integral",
    "discretize_model",
    "zoh_discretize",
    "approx_discretize",
    "limit_components",
    "classify_zeros",
    "validate_sampling_period",
]


class DiscretizationMethod(enum.Enum):
    ZOH = "zoh"
    FDM = "fdm"
    BDM = "bdm"
    BT = "bt"
    MPZ = "mpz"


APPROXIMATE_METHODS = (
    DiscretizationMethod.FDM,
    DiscretizationMethod.BDM,
    DiscretizationMethod.BT,
    DiscretizationMethod.MPZ,
)


# ---------------------------------------------------------------------------
# Euler-Frobenius polynomials
# ---------------------------------------------------------------------------

def euler_frobenius_coefficients(nu: int) -> list:
    """Exact integer coefficients (ascending) of the degree nu-1 polynomial
    whose roots are the limiting sampling-zero locations.

    ``b_j = sum_{l=1}^{nu-j} (-1)^(nu-j-l) l^nu C(nu+1, nu-j-l)``.
    """
    if nu < 1:
        raise ValueError("nu must be >= 1")
    return [
        sum((-1) ** (nu - j - l) * l**nu * math.comb(nu + 1, nu - j - l)
            for l in range(1, nu - j + 1))
        for j in range(nu)
    ]


def euler_frobenius(nu: int) -> Polynomial:
    """Euler-Frobenius polynomial of order nu - 1 (exact integer coefficients)."""
    return Polynomial(euler_frobenius_coefficients(nu))


# ---------------------------------------------------------------------------
# matrix exponential with input integral
# ---------------------------------------------------------------------------

def matrix_exponential_with_integral(A, B, delta: float):
    """Return ``(exp(A*delta), integral_0^delta exp(A*rho) B drho)``.

    Both come from one Pade scaling-and-squaring exponential of the augmented
    block matrix ``[[A, B], [0, 0]] * delta``.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    B = np.asarray(B, dtype=float).reshape(n, -1)
    m = B.shape[1]
    M = np.zeros((n + m, n + m))
    M[:n, :n] = A * delta
    M[:n, n:] = B * delta
    E = scipy.linalg.expm(M)
    return E[:n, :n], E[:n, n:]


# ---------------------------------------------------------------------------
# discrete models in factored form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteModel:
    """Factored discrete-time model ``lead * prod(z - zeros) / prod(z - poles)``."""

    lead: float
    zeros: np.ndarray
    poles: np.ndarray
    delta: float
    method: DiscretizationMethod
    nu: int                     # relative degree of the CT source

    @property
    def order(self) -> int:
        return self.poles.size

    @property
    def relative_degree(self) -> int:
        return self.poles.size - self.zeros.size

    def num_den(self):
        """z-domain coefficient pair: monic denominator, jointly scaled numerator."""
        return (real_poly_from_roots(self.zeros, self.lead),
                real_poly_from_roots(self.poles))

    def transfer(self) -> RationalTransfer:
        num, den = self.num_den()
        return RationalTransfer(num, den, Domain.DISCRETE_Z)

    def gamma_num_den(self):
        """Incremental-form pair: both sides of z = 1 + delta*gamma, each scaled
        by delta^-order so the denominator stays monic in gamma."""
        d = self.delta
        gz = (self.zeros - 1.0) / d
        gp = (self.poles - 1.0) / d
        lead = self.lead * d ** (self.zeros.size - self.poles.size)
        return real_poly_from_roots(gz, lead), real_poly_from_roots(gp)


def _zpk_of(tf: RationalTransfer):
    tf = tf.normalized()
    g = tf.high_frequency_gain
    zs = roots(tf.num).roots if tf.num.degree >= 1 else np.empty(0, complex)
    ps = roots(tf.den).roots if tf.den.degree >= 1 else np.empty(0, complex)
    return g, zs, ps


def _zoh_model(tf: RationalTransfer, delta: float) -> DiscreteModel:
    """Exact ZOH equivalent in factored form.

    Poles are the exponential images of the CT poles.  Zeros are the finite
    generalized eigenvalues of the invariant-zero pencil of the discretized
    realization, computed in scaled coordinates.
    """
    if not tf.is_strictly_proper:
        raise ValueError("ZOH equivalence needs a strictly proper CT transfer")
    g, _, ct_poles = _zpk_of(tf)
    ss = realize_controllable_canonical(tf)
    n = ss.order
    nu = tf.relative_degree

    # scaled coordinates: T = diag(delta^(n-1), ..., 1)
    T = delta ** np.arange(n - 1, -1, -1.0)
    As = (ss.A * delta) * (T[None, :] / T[:, None])
    Bs = ss.B[:, 0] * delta / T
    Cs = ss.C[0, :] * T
    M = np.zeros((n + 1, n + 1))
    M[:n, :n] = As
    M[:n, n] = Bs
    E = scipy.linalg.expm(M)
    Ad, Bd = E[:n, :n], E[:n, n]

    lead = float(Cs @ Bd)                      # first Markov parameter C^d B^d
    natural = delta**nu / math.factorial(nu) * abs(g)
    if abs(lead) < 1e-6 * natural:
        raise DegenerateSamplingPeriod(
            f"C^d B^d = {lead:.3e} vanishes at delta = {delta:g}; "
            "sampling period lies in the exceptional set"
        )

    poles = np.exp(ct_poles * delta)
    # invariant zeros: finite generalized eigenvalues of [[Ad, Bd], [C, 0]]
    bscale = max(np.abs(Bd).max(), 1e-300)
    cscale = max(np.abs(Cs).max(), 1e-300)
    Mp = np.zeros((n + 1, n + 1))
    Mp[:n, :n] = Ad
    Mp[:n, n] = Bd / bscale
    Mp[n, :n] = Cs / cscale
    Np = np.eye(n + 1)
    Np[n, n] = 0.0
    w = scipy.linalg.eig(Mp, Np, right=False)
    finite = w[np.isfinite(w)]
    finite = finite[np.argsort(np.abs(finite))]
    if finite.size < n - 1:
        raise DegenerateSamplingPeriod(
            f"expected {n - 1} discrete zeros, found {finite.size}; degenerate delta"
        )
    zeros = finite[: n - 1]
    return DiscreteModel(lead=lead, zeros=zeros, poles=poles,
                         delta=delta, method=DiscretizationMethod.ZOH, nu=nu)


def _expm1_over(x: complex) -> complex:
    """(exp(x) - 1)/x with the limit value 1 at x = 0."""
    if abs(x) < 1e-8:
        return 1.0 + x / 2.0 + x * x / 6.0
    return (np.exp(x) - 1.0) / x


def _approx_model(tf: RationalTransfer, method: DiscretizationMethod,
                  delta: float) -> DiscreteModel:
    """FDM/BDM/BT via their pole/zero maps, MPZ via exponential matching.

    Each method's model is ``gd * M(z) * delta^nu * prod(z - zd_i) / prod(z - pd_i)``
    with the documented limiting factor M; here everything is flattened into
    the factored (lead, zeros, poles) form, the M factor contributing its
    roots (none for FDM, 0 for BDM, -1 for BT/MPZ).
    """
    g, ct_zeros, ct_poles = _zpk_of(tf)
    n = ct_poles.size
    nu = n - ct_zeros.size
    d = delta

    def check(vals, what):
        if np.any(np.abs(vals) < 1e-12):
            raise SingularSubstitution(
                f"{method.value} maps a CT {what} to infinity at delta = {d:g}"
            )

    if method is DiscretizationMethod.FDM:
        zd = 1.0 + d * ct_zeros
        pd = 1.0 + d * ct_poles
        gd = g
        m_roots = np.empty(0, complex)
        m_lead = 1.0
    elif method is DiscretizationMethod.BDM:
        check(1.0 - d * ct_zeros, "zero")
        check(1.0 - d * ct_poles, "pole")
        zd = 1.0 / (1.0 - d * ct_zeros)
        pd = 1.0 / (1.0 - d * ct_poles)
        gd = g * np.prod(1.0 - d * ct_zeros).real / np.prod(1.0 - d * ct_poles).real
        m_roots = np.zeros(nu, complex)
        m_lead = 1.0
    elif method is DiscretizationMethod.BT:
        check(1.0 - d * ct_zeros / 2.0, "zero")
        check(1.0 - d * ct_poles / 2.0, "pole")
        zd = (1.0 + d * ct_zeros / 2.0) / (1.0 - d * ct_zeros / 2.0)
        pd = (1.0 + d * ct_poles / 2.0) / (1.0 - d * ct_poles / 2.0)
        gd = g * np.prod(1.0 - d * ct_zeros / 2.0).real / np.prod(1.0 - d * ct_poles / 2.0).real
        m_roots = -np.ones(nu, complex)
        m_lead = 2.0 ** -nu
    elif method is DiscretizationMethod.MPZ:
        zd = np.exp(d * ct_zeros)
        pd = np.exp(d * ct_poles)
        # (e^(d x) - 1)/(d x) per pole over per zero; limit 1 at x = 0
        num_fac = np.prod([_expm1_over(d * p) for p in ct_poles]) if n else 1.0
        den_fac = np.prod([_expm1_over(d * z) for z in ct_zeros]) if ct_zeros.size else 1.0
        gd = g * complex(num_fac / den_fac).real
        m_roots = -np.ones(nu, complex)
        m_lead = 2.0 ** -nu
    else:
        raise ValueError(f"{method} is not an approximate method")

    zeros = np.concatenate([m_roots, zd])
    lead = gd * m_lead * d**nu
    return DiscreteModel(lead=float(lead), zeros=zeros, poles=pd,
                         delta=d, method=method, nu=nu)


def discretize_model(tf: RationalTransfer, method: DiscretizationMethod,
                     delta: float) -> DiscreteModel:
    """Factored discrete model of a CT transfer under any supported method."""
    if tf.domain is not Domain.CONTINUOUS_S:
        raise ValueError("input transfer must be continuous-time")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if method is DiscretizationMethod.ZOH:
        return _zoh_model(tf, delta)
    return _approx_model(tf, method, delta)


def zoh_discretize(tf_ct: RationalTransfer, delta: float) -> RationalTransfer:
    """Exact ZOH equivalent transfer (relative degree 1 away from degenerate deltas)."""
    return discretize_model(tf_ct, DiscretizationMethod.ZOH, delta).transfer()


def approx_discretize(tf_ct: RationalTransfer, method: DiscretizationMethod,
                      delta: float) -> RationalTransfer:
    """Approximate discretization by forward/backward difference, bilinear
    transformation, or matched pole-zero mapping."""
    if method not in APPROXIMATE_METHODS:
        raise ValueError("method must be one of FDM, BDM, BT, MPZ")
    return discretize_model(tf_ct, method, delta).transfer()


# ---------------------------------------------------------------------------
# limiting components
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitComponents:
    """Small-delta limits: gain, numerator factor M (with M(1) = 1), its degree."""

    g_limit: float
    m_star: Polynomial
    m_degree: int


def limit_components(tf_ct: RationalTransfer, method: DiscretizationMethod) -> LimitComponents:
    """Vanishing-sampling-period limits of the discretized model's components."""
    nu = tf_ct.relative_degree
    g = tf_ct.high_frequency_gain
    if method is DiscretizationMethod.ZOH:
        m = euler_frobenius(nu) * (1.0 / math.factorial(nu))
        return LimitComponents(g_limit=g, m_star=m, m_degree=nu - 1)
    if method is DiscretizationMethod.FDM:
        return LimitComponents(g_limit=g, m_star=Polynomial([1.0]), m_degree=0)
    if method is DiscretizationMethod.BDM:
        coeffs = np.zeros(nu + 1)
        coeffs[-1] = 1.0
        return LimitComponents(g_limit=g, m_star=Polynomial(coeffs), m_degree=nu)
    if method in (DiscretizationMethod.BT, DiscretizationMethod.MPZ):
        m = Polynomial([1.0, 1.0]) ** nu * (2.0 ** -nu)
        return LimitComponents(g_limit=g, m_star=m, m_degree=nu)
    raise ValueError(f"unknown method {method}")


# ---------------------------------------------------------------------------
# zero classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroClassification:
    """Partition of discrete zeros into intrinsic (images of CT zeros) and
    sampling (created by the sampler/hold pair)."""

    intrinsic: np.ndarray
    sampling: np.ndarray
    match_error: float


def classify_zeros(tf_dt, tf_ct: RationalTransfer, delta: float,
                   ambiguity_factor: float = 0.25) -> ZeroClassification:
    """Pair each discrete zero with its nearest exp(z_i * delta) target.

    Greedy nearest-neighbour pairing; a target claimed by two discrete zeros
    within the ambiguity tolerance raises :class:`AmbiguousPairing`.  The
    remainder (count nu - 1 for a ZOH equivalent) is labelled sampling.
    """
    if isinstance(tf_dt, DiscreteModel):
        dt_zeros = np.array(tf_dt.zeros, dtype=complex)
    else:
        dt_zeros = tf_dt.zeros()
    ct_zeros = tf_ct.zeros()
    targets = np.exp(ct_zeros * delta)

    if targets.size == 0:
        return ZeroClassification(intrinsic=np.empty(0, complex),
                                  sampling=np.sort_complex(dt_zeros), match_error=0.0)

    if targets.size > 1:
        gaps = [abs(a - b) for i, a in enumerate(targets) for b in targets[i + 1:]]
        min_gap = min(gaps)
    else:
        min_gap = np.inf
    tol = ambiguity_factor * min_gap

    # all candidate pairs sorted by distance; greedily claim both sides
    pairs = sorted(
        ((abs(z - t), i, j) for i, z in enumerate(dt_zeros) for j, t in enumerate(targets)),
        key=lambda x: x[0],
    )
    claimed_z: dict = {}
    claimed_t: dict = {}
    for dist, i, j in pairs:
        if len(claimed_t) == targets.size:
            break
        if j in claimed_t:
            if i not in claimed_z and dist <= tol:
                raise AmbiguousPairing(
                    f"discrete zeros {dt_zeros[i]:.6g} and {dt_zeros[claimed_t[j]]:.6g} "
                    f"both claim target {targets[j]:.6g}"
                )
            continue
        if i in claimed_z:
            continue
        claimed_z[i] = j
        claimed_t[j] = i
    if len(claimed_t) < targets.size:
        raise AmbiguousPairing("could not pair every continuous-time zero image")

    intrinsic = np.array([dt_zeros[claimed_t[j]] for j in range(targets.size)])
    match_error = float(max(abs(intrinsic[j] - targets[j]) for j in range(targets.size)))
    sampling = np.array([z for i, z in enumerate(dt_zeros) if i not in claimed_z])
    return ZeroClassification(intrinsic=intrinsic,
                              sampling=np.sort_complex(sampling),
                              match_error=match_error)


# ---------------------------------------------------------------------------
# sampling-period validity
# ---------------------------------------------------------------------------

def validate_sampling_period(fam: UncertainPlantFamily, delta: float,
                             points_per_axis: int = 5):
    """Certify the sampling period against the first-Markov-parameter bound.

    For each grid member (canonical realization) the remainder of the
    ``C^d B^d = (delta^nu / nu!)(g + p(delta))`` expansion is bounded by
    ``pbar = delta * ||C A^nu|| * exp(||A|| delta) * ||B||``; the member is
    safe when pbar < g/2.  Returns ``(ok, margin)`` with margin the worst
    ``g/2 - pbar`` over the grid; a negative margin means delta is too large.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    nu = fam.nu
    worst = np.inf
    for member in fam.grid_members(points_per_axis=points_per_axis):
        ss = realize_controllable_canonical(member)
        A, B, C = ss.A, ss.B, ss.C
        g = member.high_frequency_gain
        CAnu = C @ np.linalg.matrix_power(A, nu)
        # np.exp saturates to inf instead of raising; a huge delta then simply
        # reports a hopeless (|-inf|) margin
        pbar = delta * np.linalg.norm(CAnu) * np.exp(np.linalg.norm(A, 2) * delta) \
            * np.linalg.norm(B)
        worst = min(worst, g / 2.0 - pbar)
    return bool(worst > 0.0), float(worst)
