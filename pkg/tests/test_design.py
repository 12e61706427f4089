import math

import numpy as np
import pytest

from dtdob.benchmark import two_mass_spring_family
from dtdob.design import (
    design_q_direct,
    design_q_indirect,
    kbar_search,
    method_m_star,
)
from dtdob.discretize import DiscretizationMethod, euler_frobenius
from dtdob.dob import QFilter, psi_fast
from dtdob.errors import CtDesignInvalid, MethodNotSchur, SearchFailure
from dtdob.lti import UncertainPlantFamily
from dtdob.polynomial import Polynomial, Tristate, is_schur, roots

FDM, BDM, BT, MPZ = (DiscretizationMethod.FDM, DiscretizationMethod.BDM,
                     DiscretizationMethod.BT, DiscretizationMethod.MPZ)

ONE = Polynomial([1.0])


def zero_free_family(nu, g_lo, g_hi):
    return UncertainPlantFamily(n=nu, nu=nu, g_lo=g_lo, g_hi=g_hi,
                                alpha_lo=np.zeros(nu), alpha_hi=np.ones(nu),
                                beta_lo=[], beta_hi=[])


class TestKbarSearch:
    def test_pure_delay_boundary(self):
        # (z - 1) + K: root 1 - K, Schur iff 0 < K < 2
        kbar = kbar_search(ONE, ONE, ONE)
        assert abs(kbar - 2.0) < 1e-6

    def test_first_order_no_finite_boundary(self):
        # (z - 1) + K (z + 1)/2: root (2 - K)/(2 + K), inside the disk for
        # every K > 0, so the search saturates at its upper cap
        kbar = kbar_search(ONE, ONE, Polynomial([0.5, 0.5]))
        assert kbar == pytest.approx(1e3)
        poly = Polynomial([-1.0, 1.0]) + 1e3 * Polynomial([0.5, 0.5])
        assert is_schur(poly).verdict is Tristate.PASS

    def test_shifted_first_order_boundary(self):
        # Mn* = z: z(z-1) + K (z+1)/2 loses Schur at K = 2 (root product = K/2)
        kbar = kbar_search(Polynomial([0.0, 1.0]), ONE, Polynomial([0.5, 0.5]))
        assert abs(kbar - 2.0) < 1e-6

    def test_benchmark_fdm_boundary(self):
        # Mn* = 1, V = z^3, M* = B3/24: exact Schur-Cohn boundary 0.8709...
        kbar = kbar_search(ONE, Polynomial([0, 0, 0, 1.0]),
                           euler_frobenius(4) * (1 / 24))
        assert abs(kbar - 0.8709426578) < 1e-6

    def test_interval_verified(self):
        kbar = kbar_search(ONE, ONE, ONE)
        for K in (kbar / 2, 0.99 * kbar):
            assert is_schur(Polynomial([-1.0, 1.0]) + K * ONE).verdict is Tristate.PASS

    def test_precondition(self):
        with pytest.raises(SearchFailure):
            kbar_search(Polynomial([1.5, 1.0]), ONE, ONE)   # Mn* not Schur


class TestDirectDesign:
    def test_benchmark_fdm(self):
        fam = two_mass_spring_family()
        res = design_q_direct(fam, FDM, nq=4, g_n=1.0)
        # binomial auxiliary coefficients [1, 3, 3] in the shifted basis
        assert res.q.a[1:] == (1.0, 3.0, 3.0)
        assert res.v_poly == Polynomial([0, 0, 0, 1.0])
        assert abs(res.k_bar - 0.8709426578) < 1e-6
        assert res.a0 == pytest.approx(0.8 * res.k_bar / 4.8, rel=1e-9)
        assert res.certified and res.worst_modulus < 1.0
        # the admissibility inequality holds with the safety slack
        assert (4.8 / res.g_n) * res.a0 < res.k_bar

    def test_benchmark_bdm_first_order(self):
        fam = two_mass_spring_family()
        res = design_q_direct(fam, BDM, nq=1, g_n=1.0)
        assert res.q.n_q == 1 and res.certified
        assert 0.05 < res.a0 < 0.12
        # certified over the full gain interval by construction
        d_fast = [is_schur(method_m_star(BDM, 4) * (res.q.denominator_z()
                  - res.q.numerator_z()) + g * method_m_star(DiscretizationMethod.ZOH, 4)
                  * res.q.numerator_z()).verdict for g in (0.2, 2.0, 4.8)]
        assert all(v is Tristate.PASS for v in d_fast)

    def test_bt_rejected(self):
        with pytest.raises(MethodNotSchur):
            design_q_direct(two_mass_spring_family(), BT, nq=1, g_n=1.0)

    def test_mpz_rejected(self):
        with pytest.raises(MethodNotSchur):
            design_q_direct(two_mass_spring_family(), MPZ, nq=1, g_n=1.0)

    def test_nq_too_small(self):
        with pytest.raises(ValueError):
            design_q_direct(two_mass_spring_family(), FDM, nq=2, g_n=1.0)

    def test_random_families_always_certified(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            nu = int(rng.integers(1, 6))
            g_lo = 10.0 ** rng.uniform(-1.5, 1.0)
            g_hi = g_lo * 10.0 ** rng.uniform(0.0, 2.0)
            fam = zero_free_family(nu, g_lo, g_hi)
            method = BDM if rng.random() < 0.5 else FDM
            n_mn = nu if method is BDM else 0
            nq = max(nu - n_mn, 1) + int(rng.integers(0, 2))
            res = design_q_direct(fam, method, nq=nq)
            assert res.certified
            assert res.worst_modulus < 1.0 - 1e-9
            assert (fam.g_hi / res.g_n) * res.a0 < res.k_bar
            assert is_schur(res.v_poly).verdict is Tristate.PASS


class TestIndirectDesign:
    CT_A = (0.3, 1.0, 2.0, 2.0)
    CT_C = (0.3,)

    def test_ct_condition_rejected_on_wide_family(self):
        # the quartic prototype loses its own robustness condition at
        # gain 2.5 (Routh: constant term < 0.75), so the benchmark family
        # with gains up to 4.8 is rejected outright
        with pytest.raises(CtDesignInvalid):
            design_q_indirect(self.CT_A, self.CT_C, 10 / 3,
                              two_mass_spring_family(), g_n=1.0)

    def test_reduced_family_contrast(self):
        fam = zero_free_family(4, 0.2, 2.0)
        sbw = design_q_indirect(self.CT_A, self.CT_C, 10 / 3, fam, g_n=1.0)
        lbw = design_q_indirect(self.CT_A, self.CT_C, 5 / 3, fam, g_n=1.0)
        assert sbw.ct_fast_hurwitz is Tristate.PASS
        assert sbw.induced_schur is Tristate.PASS
        assert lbw.induced_schur is Tristate.FAIL
        assert lbw.worst_induced_modulus > 1.0

    def test_coefficient_scaling(self):
        fam = zero_free_family(4, 0.2, 2.0)
        psi = 10.0
        res = design_q_indirect(self.CT_A, self.CT_C, psi, fam, g_n=1.0)
        for i, ai in enumerate(self.CT_A):
            assert res.q.a[i] == pytest.approx(ai / psi ** (4 - i))
        assert res.q.c[0] == pytest.approx(0.3 / psi**4)

    def test_large_psi_recovers_ct_roots(self):
        # after Gamma = psi (z - 1) the fast-factor roots approach the roots
        # of the CT prototype polynomial within 10% at psi = 1e3
        fam = zero_free_family(4, 1.0, 1.0)
        psi = 1e3
        res = design_q_indirect(self.CT_A, self.CT_C, psi, fam, g_n=1.0)
        dq = res.q.denominator_z()
        nq = res.q.numerator_z()
        m_star = euler_frobenius(4) * (1 / 24)
        fast = (dq - nq) + m_star * nq
        ct_ref = Polynomial(list(self.CT_A) + [1.0]) - Polynomial(list(self.CT_C)) \
            + Polynomial(list(self.CT_C))
        want = np.sort_complex(roots(ct_ref).roots)
        got = np.sort_complex(psi * (roots(fast).roots - 1.0))
        assert np.abs(got - want).max() < 0.1 * np.abs(want).max()

    def test_psi_sweep_tracks_ct_image(self):
        # over psi in {10, 100, 1000} the worst fast-factor modulus follows
        # the CT prototype roots mapped through z = 1 + xi/psi
        fam = zero_free_family(4, 1.0, 1.0)
        ct_roots = roots(Polynomial(list(self.CT_A) + [1.0])
                         - Polynomial(list(self.CT_C))
                         + Polynomial(list(self.CT_C))).roots
        for psi in (10.0, 100.0, 1000.0):
            res = design_q_indirect(self.CT_A, self.CT_C, psi, fam, g_n=1.0)
            want = np.abs(1.0 + ct_roots / psi).max()
            assert res.induced_schur is Tristate.PASS
            assert res.worst_induced_modulus == pytest.approx(want, abs=5.0 / psi**2)

    def test_psi_must_exceed_one(self):
        with pytest.raises(ValueError):
            design_q_indirect(self.CT_A, self.CT_C, 0.5,
                              zero_free_family(4, 1.0, 1.0))

    def test_dc_gain_mismatch_rejected(self):
        with pytest.raises(ValueError):
            design_q_indirect((0.3, 1.0), (0.2,), 10.0,
                              zero_free_family(2, 1.0, 1.0))
