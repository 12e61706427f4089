"""Closed-loop analysis of disturbance-observer controlled sampled-data loops.

The central objects are the closed-loop characteristic polynomial and its two
limiting factors under fast sampling:

* a fast factor (degree ``n_mn + n_q``), a z-domain polynomial whose roots the
  non-slow closed-loop roots approach as the sampling period shrinks; it couples
  the sampler-induced numerator factors of plant and nominal model with the
  Q-filter and depends on the plant only through the gain ratio ``g / g_n``;
* a slow factor (degree ``2n - nu + n_c``) in the continuous variable, the
  product of the plant numerator with the nominal closed-loop polynomial, which
  the remaining roots approach after the incremental rescaling
  ``gamma = (z - 1)/delta``.

Robust internal stability under fast sampling then reduces to three checks:
(a) the nominal continuous loop is Hurwitz, (b) every family member is minimum
phase, (c) the fast factor is Schur for every admissible gain.  The negative
results (exact discretization of the nominal model, bilinear / matched
pole-zero with first-order low-pass filters, all-pass filters) are exposed as
checkable predicates.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .discretize import (
    DiscreteModel,
    DiscretizationMethod,
    discretize_model,
    euler_frobenius,
    limit_components,
)
from .errors import DegreeMismatch, ImproperTransfer, PartitionFailure, PreconditionViolation
from .lti import Domain, RationalTransfer, UncertainPlantFamily, gain_interval
from .polynomial import (
    Polynomial,
    SchurResult,
    Tristate,
    interval_hurwitz,
    is_hurwitz,
    is_schur,
    roots,
)

__all__ = [
    "QFilter",
    "DobDesign",
    "ItemResult",
    "StabilityVerdict",
    "characteristic_polynomial",
    "incremental_characteristic_polynomial",
    "psi_fast",
    "psi_slow",
    "theorem1_verdict",
    "root_contour",
    "ContourPoint",
    "ContourResult",
    "corollary1_predicate",
    "allpass_instability_predicate",
    "allpass_jury_schur_possible",
    "first_order_bt_mpz_predicate",
    "NON_SCHUR_TOL",
]

#: roots closer than this to the unit circle are not counted as strictly inside
NON_SCHUR_TOL = 1e-9

_ZM1 = Polynomial([-1.0, 1.0])  # (z - 1)


# ---------------------------------------------------------------------------
# Q-filter
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QFilter:
    """Strictly proper low-pass filter in the (z - 1) basis.

    Denominator ``(z-1)^nq + a[nq-1] (z-1)^(nq-1) + ... + a[0]``, numerator
    ``c[mq] (z-1)^mq + ... + c[0]`` with ``c[0] == a[0] != 0`` (unity DC gain).
    """

    a: tuple
    c: tuple

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        c = tuple(float(x) for x in self.c)
        if not a:
            raise ValueError("denominator needs at least the constant coefficient a0")
        if not c:
            raise ValueError("numerator needs at least c0")
        if a[0] == 0.0:
            raise ValueError("a0 must be nonzero")
        if abs(c[0] - a[0]) > 1e-12 * max(abs(a[0]), 1.0):
            raise ValueError("c0 must equal a0 (unity DC gain)")
        if len(c) > len(a):
            raise ValueError("filter must be strictly proper (mq < nq)")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", c)

    @property
    def n_q(self) -> int:
        return len(self.a)

    @property
    def m_q(self) -> int:
        return len(self.c) - 1

    def numerator_z(self) -> Polynomial:
        out = Polynomial([0.0])
        for i, ci in enumerate(self.c):
            out = out + ci * _ZM1**i
        return out

    def denominator_z(self) -> Polynomial:
        out = _ZM1 ** self.n_q
        for i, ai in enumerate(self.a):
            out = out + ai * _ZM1**i
        return out

    def numerator_gamma(self, delta: float) -> Polynomial:
        """Numerator after z = 1 + delta*gamma: (z-1)^i becomes (delta*gamma)^i."""
        return Polynomial([ci * delta**i for i, ci in enumerate(self.c)])

    def denominator_gamma(self, delta: float) -> Polynomial:
        coeffs = [ai * delta**i for i, ai in enumerate(self.a)]
        coeffs.append(delta ** self.n_q)
        return Polynomial(coeffs)

    def transfer(self) -> RationalTransfer:
        return RationalTransfer(self.numerator_z(), self.denominator_z(), Domain.DISCRETE_Z)

    @classmethod
    def constant_numerator(cls, a: Sequence[float]) -> "QFilter":
        """Low-pass filter whose numerator is the constant a[0]."""
        return cls(a=tuple(a), c=(a[0],))


# ---------------------------------------------------------------------------
# design bundle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DobDesign:
    """Everything that fixes the digital controller: plant family, CT nominal
    model and controller, their discretization methods, Q-filter, and the
    sampling period."""

    family: UncertainPlantFamily
    nominal_ct: RationalTransfer
    controller_ct: RationalTransfer
    nominal_method: DiscretizationMethod
    controller_method: DiscretizationMethod
    q: QFilter
    delta: float

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if not self.family.contains(self.nominal_ct):
            warnings.warn("nominal model is not a member of the plant family", stacklevel=2)
        n_mn = limit_components(self.nominal_ct, self.nominal_method).m_degree
        need = max(self.family.nu - n_mn, 1)
        if self.q.n_q - self.q.m_q < need:
            raise ImproperTransfer(
                f"Q relative degree {self.q.n_q - self.q.m_q} < {need}: the inverse-model "
                "branch of the observer would be improper"
            )

    @property
    def n(self) -> int:
        return self.family.n

    @property
    def nu(self) -> int:
        return self.family.nu

    @property
    def n_c(self) -> int:
        return self.controller_ct.den.degree

    @property
    def n_mn(self) -> int:
        return limit_components(self.nominal_ct, self.nominal_method).m_degree

    @property
    def g_n(self) -> float:
        return self.nominal_ct.high_frequency_gain

    @property
    def expected_degree(self) -> int:
        """Closed-loop characteristic degree: n + n_c + n_q + (n - nu + n_mn)."""
        return self.n + self.n_c + self.q.n_q + (self.n - self.nu + self.n_mn)

    @property
    def slow_degree(self) -> int:
        """Slow-factor degree: 2n - nu + n_c."""
        return 2 * self.n - self.nu + self.n_c

    @property
    def fast_degree(self) -> int:
        return self.n_mn + self.q.n_q


# ---------------------------------------------------------------------------
# characteristic polynomial assembly
# ---------------------------------------------------------------------------

def _component_models(design: DobDesign, member: RationalTransfer):
    plant = discretize_model(member, DiscretizationMethod.ZOH, design.delta)
    nominal = discretize_model(design.nominal_ct, design.nominal_method, design.delta)
    controller = discretize_model(design.controller_ct, design.controller_method, design.delta)
    return plant, nominal, controller


def _assemble(Np, Dp, Nn, Dn, Nc, Dc, Nq, Dq) -> Polynomial:
    return (Dp * Dc + Np * Nc) * Nn * Dq + Nq * Dc * (Np * Dn - Nn * Dp)


def _check_member(design: DobDesign, member: RationalTransfer):
    if member.domain is not Domain.CONTINUOUS_S:
        raise ValueError("member must be a continuous-time transfer")
    if not design.family.contains(member):
        warnings.warn("member lies outside the plant family; verdicts do not cover it",
                      stacklevel=3)


def characteristic_polynomial(design: DobDesign, member: RationalTransfer) -> Polynomial:
    """Closed-loop characteristic polynomial in z for one family member.

    Assembled as ``(D Dc + N Nc) Nn Dq + Nq Dc (N Dn - Nn D)`` from the ZOH
    equivalent of the member and the discretized nominal model/controller.
    Raises :class:`DegreeMismatch` when the assembled degree differs from the
    structural degree (the signature of a degenerate sampling period).
    """
    _check_member(design, member)
    plant, nominal, controller = _component_models(design, member)
    Np, Dp = plant.num_den()
    Nn, Dn = nominal.num_den()
    Nc, Dc = controller.num_den()
    psi = _assemble(Np, Dp, Nn, Dn, Nc, Dc, design.q.numerator_z(), design.q.denominator_z())
    if psi.degree != design.expected_degree:
        raise DegreeMismatch(
            f"characteristic degree {psi.degree} != expected {design.expected_degree}"
        )
    return psi


def incremental_characteristic_polynomial(design: DobDesign,
                                          member: RationalTransfer) -> Polynomial:
    """Characteristic polynomial in the incremental variable gamma = (z-1)/delta.

    Assembled from the factored components directly in the gamma domain; this
    resolves the root cluster near z = 1 that the z-domain coefficients cannot
    represent at small sampling periods.
    """
    _check_member(design, member)
    plant, nominal, controller = _component_models(design, member)
    Np, Dp = plant.gamma_num_den()
    Nn, Dn = nominal.gamma_num_den()
    Nc, Dc = controller.gamma_num_den()
    d = design.delta
    return _assemble(Np, Dp, Nn, Dn, Nc, Dc,
                     design.q.numerator_gamma(d), design.q.denominator_gamma(d))


# ---------------------------------------------------------------------------
# fast and slow factors
# ---------------------------------------------------------------------------

def psi_fast(design: DobDesign, g: float) -> Polynomial:
    """Fast limiting factor ``Mn*(Dq* - Nq*) + (g/g_n) M* Nq*`` for gain g."""
    if g <= 0:
        raise ValueError("gain must be positive")
    mn_star = limit_components(design.nominal_ct, design.nominal_method).m_star
    m_star = euler_frobenius(design.nu) * (1.0 / math.factorial(design.nu))
    nq = design.q.numerator_z()
    dq = design.q.denominator_z()
    return mn_star * (dq - nq) + (g / design.g_n) * (m_star * nq)


def psi_slow(design: DobDesign, member: RationalTransfer) -> Polynomial:
    """Slow limiting factor ``N (Dn Dc + Nn Nc)`` in the continuous variable."""
    loop = (design.nominal_ct.den * design.controller_ct.den
            + design.nominal_ct.num * design.controller_ct.num)
    return member.num * loop


# ---------------------------------------------------------------------------
# robust-stability verdict
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ItemResult:
    verdict: Tristate
    value: float
    note: str = ""


@dataclass(frozen=True)
class StabilityVerdict:
    """Per-condition results: (a) nominal loop Hurwitz, (b) family minimum
    phase, (c) fast factor Schur over the gain grid."""

    item_a: ItemResult
    item_b: ItemResult
    item_c: ItemResult
    grid_points: int

    @property
    def overall(self) -> Tristate:
        items = (self.item_a, self.item_b, self.item_c)
        if any(i.verdict is Tristate.FAIL for i in items):
            return Tristate.FAIL
        if any(i.verdict is Tristate.INCONCLUSIVE for i in items):
            return Tristate.INCONCLUSIVE
        return Tristate.PASS


def theorem1_verdict(design: DobDesign, grid_points: int = 101) -> StabilityVerdict:
    """Tristate robust-stability verdict under fast sampling.

    Item (c) sweeps the gain interval on a dense grid (endpoints forced); a
    failure anywhere on the grid is definitive while a pass certifies the grid
    only, which the result records in its note.
    """
    if grid_points < 2:
        raise ValueError("need at least 2 gain grid points")

    loop = (design.nominal_ct.num * design.controller_ct.num
            + design.nominal_ct.den * design.controller_ct.den)
    ha = is_hurwitz(loop)
    item_a = ItemResult(ha.verdict, ha.max_real_part, "nominal closed loop")

    if design.family.n == design.family.nu:
        item_b = ItemResult(Tristate.PASS, -np.inf, "family has no finite zeros")
    else:
        verdict, worst = interval_hurwitz(design.family.numerator_interval())
        item_b = ItemResult(verdict, worst, "Kharitonov vertices of numerator box")

    g_lo, g_hi = gain_interval(design.family)
    worst_mod = 0.0
    worst_verdict = Tristate.PASS
    for g in np.linspace(g_lo, g_hi, grid_points):
        res = is_schur(psi_fast(design, g))
        worst_mod = max(worst_mod, res.max_modulus)
        if res.verdict is Tristate.FAIL:
            worst_verdict = Tristate.FAIL
            break
        if res.verdict is Tristate.INCONCLUSIVE:
            worst_verdict = Tristate.INCONCLUSIVE
    note = ("fail is definitive" if worst_verdict is Tristate.FAIL
            else f"pass (grid of {grid_points} gains)")
    item_c = ItemResult(worst_verdict, worst_mod, note)
    return StabilityVerdict(item_a=item_a, item_b=item_b, item_c=item_c,
                            grid_points=grid_points)


# ---------------------------------------------------------------------------
# root contours
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContourPoint:
    delta: float
    fast_z: np.ndarray
    slow_z: np.ndarray
    slow_gamma: np.ndarray
    partition_ok: bool
    ambiguity_ratio: float


@dataclass(frozen=True)
class ContourResult:
    points: list
    fast_reference: np.ndarray   # roots of the fast factor (z-domain)
    slow_reference: np.ndarray   # roots of the slow factor (gamma/s-domain)


def root_contour(design: DobDesign, member: RationalTransfer,
                 deltas: Sequence[float]) -> ContourResult:
    """Track characteristic roots over a sampling-period sweep.

    Fast roots come from the z-domain assembly (partitioned by distance to the
    fast-factor roots); slow roots come from the incremental-domain assembly,
    which stays well conditioned as the cluster collapses toward z = 1.
    An ambiguous fast/slow split (distance ratio below 2) is flagged per point
    rather than silently assigned.
    """
    g = member.normalized().high_frequency_gain
    fast_ref = roots(psi_fast(design, g)).roots
    slow_ref = roots(psi_slow(design, member)).roots
    n_fast = design.fast_degree
    n_slow = design.slow_degree

    points = []
    for d in deltas:
        dd = DobDesign(design.family, design.nominal_ct, design.controller_ct,
                       design.nominal_method, design.controller_method, design.q, float(d))
        rz = roots(characteristic_polynomial(dd, member)).roots
        dist = np.array([np.abs(fast_ref - z).min() for z in rz])
        order = np.argsort(dist)
        fast_z = rz[order[:n_fast]]
        ratio = (dist[order[n_fast]] / max(dist[order[n_fast - 1]], 1e-300)
                 if rz.size > n_fast else np.inf)
        ok = bool(ratio >= 2.0)
        rg = roots(incremental_characteristic_polynomial(dd, member)).roots
        slow_gamma = rg[np.argsort(np.abs(rg))[:n_slow]]
        slow_gamma = slow_gamma[np.lexsort((slow_gamma.imag, slow_gamma.real))]
        points.append(ContourPoint(
            delta=float(d),
            fast_z=fast_z[np.lexsort((fast_z.imag, fast_z.real))],
            slow_z=1.0 + float(d) * slow_gamma,
            slow_gamma=slow_gamma,
            partition_ok=ok,
            ambiguity_ratio=float(ratio),
        ))
    return ContourResult(points=points, fast_reference=fast_ref, slow_reference=slow_ref)


# ---------------------------------------------------------------------------
# negative-result predicates
# ---------------------------------------------------------------------------

def _non_schur(p: Polynomial) -> bool:
    """Not strictly Schur: some root on or outside the unit circle (tolerance band)."""
    return float(np.abs(roots(p).roots).max()) >= 1.0 - NON_SCHUR_TOL


def corollary1_predicate(nu: int, q: QFilter, g_over_gn: float) -> bool:
    """Provable instability when the nominal model is discretized exactly (ZOH).

    With relative degree >= 3 the sampler's limiting numerator factor divides
    the fast factor and carries a root outside the unit circle, so no Q-filter
    can rescue internal stability.  Below relative degree 3 the predicate
    returns False and the full verdict must be consulted.
    """
    if nu < 3:
        return False
    m_star = euler_frobenius(nu) * (1.0 / math.factorial(nu))
    fast = m_star * (q.denominator_z() - q.numerator_z()) \
        + g_over_gn * (m_star * q.numerator_z())
    return _non_schur(fast)


def allpass_jury_schur_possible(nu: int, nq: int, K: float) -> bool:
    """Closed-form necessary conditions for the all-pass fast factor to be Schur.

    For the bracket polynomial ``(z+1)^nu (z^nq - 1) + K B_{nu-1}(z)`` the
    first/last Jury rows demand ``0 < K < 2`` and
    ``-K^2 + 2K > 2^nu K`` (nq = 1) or ``(2^nu - 1) K`` (nq >= 2).
    """
    if not (0.0 < K < 2.0):
        return False
    lhs = -K * K + 2.0 * K
    rhs = (2.0**nu) * K if nq == 1 else (2.0**nu - 1.0) * K
    return lhs > rhs


def allpass_psi_fast(nu: int, method: DiscretizationMethod, nq: int,
                     g_over_gn: float) -> Polynomial:
    """Fast factor for the prototypical all-pass filter 1/z^nq."""
    dq_star = Polynomial([0.0] * nq + [1.0])   # z^nq
    nq_star = Polynomial([1.0])
    if method is DiscretizationMethod.FDM:
        mn_star = Polynomial([1.0])
    elif method in (DiscretizationMethod.BT, DiscretizationMethod.MPZ):
        mn_star = Polynomial([1.0, 1.0]) ** nu * (2.0 ** -nu)
    else:
        raise PreconditionViolation("all-pass predicate covers FDM, BT, and MPZ only")
    m_star = euler_frobenius(nu) * (1.0 / math.factorial(nu))
    return mn_star * (dq_star - nq_star) + g_over_gn * (m_star * nq_star)


def allpass_instability_predicate(nu: int, method: DiscretizationMethod,
                                  nq: int, g_over_gn: float) -> bool:
    """Non-Schur fast factor for the all-pass filter, cross-validated two ways.

    Valid for (nu >= 3, FDM) and (nu >= 2, BT or MPZ); outside those ranges a
    :class:`PreconditionViolation` is raised.  Returns True when the root
    oracle confirms a root on or outside the unit circle; for BT/MPZ the
    closed-form Jury inequalities are checked for agreement.
    """
    if method is DiscretizationMethod.FDM:
        if nu < 3:
            raise PreconditionViolation("FDM all-pass statement needs nu >= 3")
    elif method in (DiscretizationMethod.BT, DiscretizationMethod.MPZ):
        if nu < 2:
            raise PreconditionViolation("BT/MPZ all-pass statement needs nu >= 2")
    else:
        raise PreconditionViolation("all-pass predicate covers FDM, BT, and MPZ only")
    oracle = _non_schur(allpass_psi_fast(nu, method, nq, g_over_gn))
    if method in (DiscretizationMethod.BT, DiscretizationMethod.MPZ):
        K = (2.0**nu) * g_over_gn / math.factorial(nu)
        closed_form = not allpass_jury_schur_possible(nu, nq, K)
        if closed_form != oracle:
            raise PartitionFailure(
                "closed-form Jury inequalities disagree with the root oracle"
            )
    return oracle


def first_order_bt_mpz_predicate(nu: int, method: DiscretizationMethod,
                                 a0: float, g_over_gn: float) -> bool:
    """Provable instability of BT/MPZ nominal models with first-order low-pass
    filters, for relative degrees of the form 4l + 3 or 4l + 4."""
    if method not in (DiscretizationMethod.BT, DiscretizationMethod.MPZ):
        raise PreconditionViolation("predicate covers BT and MPZ only")
    if nu % 4 not in (3, 0) or nu < 3:
        raise PreconditionViolation("predicate needs nu = 4l + 3 or nu = 4l + 4")
    if a0 <= 0 or g_over_gn <= 0:
        raise PreconditionViolation("a0 and the gain ratio must be positive")
    mn_star = Polynomial([1.0, 1.0]) ** nu * (2.0 ** -nu)
    m_star = euler_frobenius(nu) * (1.0 / math.factorial(nu))
    fast = mn_star * _ZM1 + (g_over_gn * a0) * m_star
    return _non_schur(fast)
