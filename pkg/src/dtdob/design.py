"""Q-filter synthesis.

Two routes are provided:

* the direct route builds a constant-numerator low-pass filter in the
  (z - 1) basis, placing the auxiliary factor V(z) at the origin (binomial
  coefficients), locating the largest loop gain for which the fast factor
  stays Schur by a root-locus style search, and sizing the DC coefficient
  from the family's worst gain with a safety factor;
* the indirect route rescales a continuous-time low-pass filter through the
  bandwidth ratio psi = tau/delta (the forward-difference image of the CT
  filter) and checks both the CT-side Hurwitz condition and the induced
  discrete fast factor.

Every returned filter is re-certified by a dense gain-grid Schur sweep; the
sweep, not the search, is the authoritative gate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .discretize import DiscretizationMethod, euler_frobenius, limit_components
from .dob import QFilter
from .errors import CtDesignInvalid, MethodNotSchur, SearchFailure
from .lti import UncertainPlantFamily, gain_interval
from .polynomial import Polynomial, Tristate, is_hurwitz, is_schur

__all__ = [
    "DirectDesignResult",
    "IndirectDesignResult",
    "design_q_direct",
    "kbar_search",
    "design_q_indirect",
    "method_m_star",
]

_ZM1 = Polynomial([-1.0, 1.0])


def method_m_star(method: DiscretizationMethod, nu: int) -> Polynomial:
    """Limiting numerator factor of a discretization method at relative degree nu."""
    if method is DiscretizationMethod.ZOH:
        return euler_frobenius(nu) * (1.0 / math.factorial(nu))
    if method is DiscretizationMethod.FDM:
        return Polynomial([1.0])
    if method is DiscretizationMethod.BDM:
        return Polynomial([0.0] * nu + [1.0])
    if method in (DiscretizationMethod.BT, DiscretizationMethod.MPZ):
        return Polynomial([1.0, 1.0]) ** nu * (2.0 ** -nu)
    raise ValueError(f"unknown method {method}")


def _fast_poly(mn_star: Polynomial, v: Polynomial, m_star: Polynomial, k: float) -> Polynomial:
    return mn_star * (_ZM1 * v) + k * m_star


def _schur_pass(p: Polynomial) -> bool:
    return is_schur(p).verdict is Tristate.PASS


# ---------------------------------------------------------------------------
# direct design
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DirectDesignResult:
    q: QFilter
    v_poly: Polynomial
    k_bar: float
    a0: float
    g_n: float
    worst_modulus: float          # max fast-factor root modulus over the gain grid
    certified: bool


def kbar_search(m_n_star: Polynomial, v: Polynomial, m_star: Polynomial,
                k_min: float = 1e-6, k_max: float = 1e3,
                points_per_decade: int = 10, verify_points: int = 200) -> float:
    """Largest gain K (within search resolution) with ``Mn* (z-1) V + K M*`` Schur
    for all sampled K in (0, K].

    Log-grid scan locates the first Schur-to-non-Schur transition, bisection
    tightens it, and a dense linear sweep over (0, K] re-verifies (shrinking K
    below any stray failure, since the Schur region need not be an interval).
    """
    if not _schur_pass(m_n_star) or not _schur_pass(v):
        raise SearchFailure("search preconditions: Mn* and V must be Schur")

    def ok(k: float) -> bool:
        return _schur_pass(_fast_poly(m_n_star, v, m_star, k))

    decades = np.log10(k_max / k_min)
    grid = np.logspace(np.log10(k_min), np.log10(k_max),
                       int(decades * points_per_decade) + 1)
    if not ok(grid[0]):
        raise SearchFailure(f"fast factor is not Schur even at K = {grid[0]:g}")
    k_good = grid[0]
    k_bad = None
    for k in grid[1:]:
        if ok(k):
            k_good = k
        else:
            k_bad = k
            break
    if k_bad is None:
        k_bar = float(k_max)
    else:
        while (k_bad - k_good) > 1e-9 * k_bad:
            mid = 0.5 * (k_good + k_bad)
            if ok(mid):
                k_good = mid
            else:
                k_bad = mid
        k_bar = float(k_good)

    # densified verification; shrink below the earliest failure if any appears
    for _ in range(8):
        ks = np.linspace(k_bar / verify_points, k_bar, verify_points)
        bad = [k for k in ks if not ok(k)]
        if not bad:
            return k_bar
        k_bar = 0.999 * min(bad)
    raise SearchFailure("could not verify a Schur gain interval")


def design_q_direct(family: UncertainPlantFamily, nominal_method: DiscretizationMethod,
                    nq: int, safety: float = 0.8, g_n: Optional[float] = None,
                    grid_points: int = 101) -> DirectDesignResult:
    """Constant-numerator Q-filter certified over the family's gain interval.

    V(z) = z^(nq-1), i.e. binomial coefficients in the (z - 1) basis; the DC
    coefficient is ``safety * (g_n / g_hi) * k_bar``.  ``g_n`` defaults to the
    geometric midpoint of the gain interval (only the ratio g/g_n matters).
    Raises :class:`MethodNotSchur` when the method's limiting numerator factor
    is not Schur (exact discretization for nu >= 3, bilinear / matched
    pole-zero for nu >= 2) and :class:`SearchFailure` when no admissible gain
    exists or the final certification sweep fails.
    """
    if not (0.0 < safety < 1.0):
        raise ValueError("safety must lie in (0, 1)")
    nu = family.nu
    if nq < max(nu - method_m_star(nominal_method, nu).degree, 1):
        raise ValueError("nq too small for a proper inverse-model branch")
    g_lo, g_hi = gain_interval(family)
    if g_n is None:
        g_n = math.sqrt(g_lo * g_hi)

    mn_star = method_m_star(nominal_method, nu)
    if not _schur_pass(mn_star):
        raise MethodNotSchur(
            f"{nominal_method.value} limiting numerator factor is not Schur for nu = {nu}"
        )
    m_star = method_m_star(DiscretizationMethod.ZOH, nu)
    v = Polynomial([0.0] * (nq - 1) + [1.0])   # z^(nq-1)

    k_bar = kbar_search(mn_star, v, m_star)
    a0 = safety * (g_n / g_hi) * k_bar
    # denominator (z-1) V(z) + a0 with V = z^(nq-1); the shifted-basis
    # coefficient of (z-1)^i (i >= 1) is V's coefficient of (z-1)^(i-1),
    # i.e. the binomial C(nq-1, i-1)
    a = [a0] + [float(math.comb(nq - 1, i - 1)) for i in range(1, nq)]
    q = QFilter.constant_numerator(a)

    worst = 0.0
    certified = True
    for g in np.linspace(g_lo, g_hi, grid_points):
        res = is_schur(_fast_poly(mn_star, v, m_star, (g / g_n) * a0))
        worst = max(worst, res.max_modulus)
        if res.verdict is not Tristate.PASS:
            certified = False
    if not certified:
        raise SearchFailure("certification sweep failed; designed filter is not admissible")
    return DirectDesignResult(q=q, v_poly=v, k_bar=k_bar, a0=a0, g_n=g_n,
                              worst_modulus=worst, certified=True)


# ---------------------------------------------------------------------------
# indirect design
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IndirectDesignResult:
    q: QFilter
    psi_ratio: float
    ct_fast_hurwitz: Tristate
    induced_schur: Tristate
    worst_induced_modulus: float


def design_q_indirect(ct_a: Sequence[float], ct_c: Sequence[float], psi: float,
                      family: UncertainPlantFamily, g_n: Optional[float] = None,
                      grid_points: int = 101) -> IndirectDesignResult:
    """Discretize a CT low-pass filter through the bandwidth ratio psi = tau/delta.

    ``ct_a`` holds the non-leading denominator coefficients a_0..a_{nq-1} of the
    CT prototype (powers of tau*s, monic leading term) and ``ct_c`` its
    numerator coefficients c_0..c_mq with c_0 = a_0.  The discrete filter has
    (z - 1)-basis coefficients a_i / psi^(nq - i).

    The CT-side robustness polynomial ``Dq(s;1) - Nq(s;1) + (g/g_n) Nq(s;1)``
    must be Hurwitz over the gain grid, else :class:`CtDesignInvalid`; the
    induced discrete fast factor (forward-difference nominal) is checked and
    reported but does not raise, since finite psi may genuinely lose it.
    """
    if psi <= 1.0:
        raise ValueError("psi must exceed 1 (cutoff below the Nyquist rate)")
    ct_a = [float(x) for x in ct_a]
    ct_c = [float(x) for x in ct_c]
    nq = len(ct_a)
    if len(ct_c) > nq:
        raise ValueError("CT prototype must be strictly proper")
    if abs(ct_c[0] - ct_a[0]) > 1e-12 * max(abs(ct_a[0]), 1.0):
        raise ValueError("c0 must equal a0 (unity DC gain)")
    g_lo, g_hi = gain_interval(family)
    if g_n is None:
        g_n = math.sqrt(g_lo * g_hi)

    dq_ct = Polynomial(ct_a + [1.0])
    nq_ct = Polynomial(ct_c)
    ct_verdict = Tristate.PASS
    for g in np.linspace(g_lo, g_hi, grid_points):
        res = is_hurwitz(dq_ct - nq_ct + (g / g_n) * nq_ct)
        if res.verdict is Tristate.FAIL:
            raise CtDesignInvalid(
                f"CT fast polynomial is not Hurwitz at gain g = {g:g}"
            )
        if res.verdict is Tristate.INCONCLUSIVE:
            ct_verdict = Tristate.INCONCLUSIVE

    q = QFilter(a=tuple(ct_a[i] / psi ** (nq - i) for i in range(nq)),
                c=tuple(ct_c[i] / psi ** (nq - i) for i in range(len(ct_c))))

    # induced discrete fast factor with a forward-difference nominal model
    nu = family.nu
    m_star = method_m_star(DiscretizationMethod.ZOH, nu)
    nq_z = q.numerator_z()
    dq_z = q.denominator_z()
    induced = Tristate.PASS
    worst = 0.0
    for g in np.linspace(g_lo, g_hi, grid_points):
        res = is_schur((dq_z - nq_z) + (g / g_n) * (m_star * nq_z))
        worst = max(worst, res.max_modulus)
        if res.verdict is Tristate.FAIL:
            induced = Tristate.FAIL
            break
        if res.verdict is Tristate.INCONCLUSIVE and induced is Tristate.PASS:
            induced = Tristate.INCONCLUSIVE
    return IndirectDesignResult(q=q, psi_ratio=float(psi), ct_fast_hurwitz=ct_verdict,
                                induced_schur=induced, worst_induced_modulus=worst)
