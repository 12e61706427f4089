import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dtdob.errors import ConvergenceFailure, DegenerateLeadingCoefficient, ZeroPolynomial
from dtdob.polynomial import (
    BOUNDARY_TOL,
    ComplexRootSet,
    IntervalPolynomial,
    Polynomial,
    Tristate,
    add,
    compose_affine,
    interval_hurwitz,
    is_hurwitz,
    is_schur,
    jury_schur_test,
    kharitonov_vertices,
    mul,
    real_poly_from_roots,
    roots,
    routh_hurwitz_test,
)


def P(*coeffs):
    return Polynomial(coeffs)


class TestArithmetic:
    def test_add_cancellation(self):
        assert add(P(1, 1), P(1, -1)) == P(2)

    def test_add_identity(self):
        assert add(P(0, 0, 1), P(0)) == P(0, 0, 1)

    def test_add_linear(self):
        assert add(P(-1, 1), P(1, 1)) == P(0, 2)

    def test_mul_difference_of_squares(self):
        assert mul(P(-1, 1), P(1, 1)) == P(-1, 0, 1)

    def test_mul_identity(self):
        p = P(3, -2, 7)
        assert mul(p, P(1)) == p

    def test_mul_square(self):
        assert mul(P(-1, 1), P(-1, 1)) == P(1, -2, 1)

    def test_trailing_zero_trim(self):
        assert P(1, 2, 0, 0).degree == 1

    def test_power(self):
        assert P(-1, 1) ** 3 == P(-1, 3, -3, 1)


class TestComposeAffine:
    def test_binomial_expansion(self):
        # p(z) = z^2 at z = 1 + delta*gamma
        delta = 0.25
        q = compose_affine(P(0, 0, 1), delta, 1.0)
        assert q == P(1, 2 * delta, delta**2)

    def test_scaled_difference(self):
        psi = 4.0
        q = compose_affine(P(-1, 1), 1.0 / psi, 1.0)
        assert q == P(0, 1.0 / psi)

    def test_identity_substitution(self):
        p = P(3, 1, 4, 1, 5)
        assert compose_affine(p, 1.0, 0.0) == p

    def test_round_trip_property(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            p = Polynomial(rng.uniform(-3, 3, rng.integers(1, 8)))
            a = rng.uniform(0.2, 4.0) * rng.choice([-1, 1])
            b = rng.uniform(-2, 2)
            back = compose_affine(compose_affine(p, a, b), 1.0 / a, -b / a)
            assert back.allclose(p, rtol=1e-10)


class TestRoots:
    def test_simple_pair(self):
        r = roots(P(-1, 0, 1))
        assert np.allclose(np.sort(r.roots.real), [-1.0, 1.0]) and np.allclose(r.roots.imag, 0)

    def test_quadratic_formula(self):
        # z^2 + 4z + 1 -> -2 +- sqrt(3)
        r = np.sort(roots(P(1, 4, 1)).roots.real)
        assert np.allclose(r, [-2 - math.sqrt(3), -2 + math.sqrt(3)], atol=1e-12)

    def test_triple_root(self):
        r = roots(P(1, 1) * P(1, 1) * P(1, 1))  # (z+1)^3
        assert np.allclose(r.roots, -1.0, atol=1e-5)

    def test_zero_polynomial_raises(self):
        with pytest.raises(ZeroPolynomial):
            roots(P(0))

    def test_conjugate_pairing(self):
        r = roots(P(2, 2, 1))  # roots -1 +- j
        assert np.conj(r.roots[0]) == r.roots[1]

    def test_residual_reported(self):
        assert roots(P(-1, 0, 1)).residual < 1e-12

    def test_round_trip_random_multisets(self):
        # rebuild from roots and re-extract: multiset match within 1e-6
        rng = np.random.default_rng(7)
        for _ in range(60):
            deg = int(rng.integers(1, 9))
            rts = []
            while len(rts) < deg:
                if deg - len(rts) >= 2 and rng.random() < 0.5:
                    m = rng.uniform(0.1, 3.0)
                    ang = rng.uniform(0.1, np.pi - 0.1)
                    z = m * np.exp(1j * ang)
                    rts += [z, np.conj(z)]
                else:
                    rts.append(complex(rng.uniform(0.1, 3.0) * rng.choice([-1, 1])))
            p = real_poly_from_roots(rts, lead=rng.uniform(0.5, 2.0))
            got = np.sort_complex(roots(p).roots)
            want = np.sort_complex(np.asarray(rts))
            assert np.abs(got - want).max() < 1e-6


class TestSchur:
    def test_inside(self):
        res = is_schur(P(-0.5, 1))
        assert res.verdict is Tristate.PASS and abs(res.max_modulus - 0.5) < 1e-12

    def test_outside_quadratic(self):
        res = is_schur(P(1, 4, 1))  # root -2 - sqrt(3) outside
        assert res.verdict is Tristate.FAIL
        assert abs(res.max_modulus - (2 + math.sqrt(3))) < 1e-9

    def test_marginal_is_inconclusive(self):
        assert is_schur(P(-1, 1)).verdict is Tristate.INCONCLUSIVE

    def test_margin_shrinks_disk(self):
        # root at 0.95: fails a 0.1 margin, passes margin 0
        assert is_schur(P(-0.95, 1)).verdict is Tristate.PASS
        assert is_schur(P(-0.95, 1), margin=0.1).verdict is Tristate.FAIL

    def test_constant_vacuous(self):
        assert is_schur(P(3.0)).verdict is Tristate.PASS

    def test_oracle_agreement_random(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            deg = int(rng.integers(1, 9))
            rts = []
            while len(rts) < deg:
                m = rng.uniform(0.05, 2.0)
                if abs(m - 1.0) < 1e-3:
                    continue
                if deg - len(rts) >= 2 and rng.random() < 0.5:
                    z = m * np.exp(1j * rng.uniform(0.05, np.pi - 0.05))
                    rts += [z, np.conj(z)]
                else:
                    rts.append(complex(m * rng.choice([-1, 1])))
            p = real_poly_from_roots(rts)
            truth = max(abs(z) for z in rts) < 1.0
            jury = jury_schur_test(p)
            assert jury is not None and jury == truth
            assert (is_schur(p).verdict is Tristate.PASS) == truth


class TestHurwitz:
    def test_first_order(self):
        assert is_hurwitz(P(1, 1)).verdict is Tristate.PASS

    def test_sign_change_unstable(self):
        assert is_hurwitz(P(-1, 1, 1)).verdict is Tristate.FAIL

    def test_complex_pair(self):
        res = is_hurwitz(P(2, 2, 1))  # roots -1 +- j
        assert res.verdict is Tristate.PASS and abs(res.max_real_part + 1.0) < 1e-12

    def test_marginal(self):
        assert is_hurwitz(P(0, 1)).verdict is Tristate.INCONCLUSIVE

    def test_oracle_agreement_random(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            deg = int(rng.integers(1, 9))
            rts = []
            while len(rts) < deg:
                re = rng.uniform(-2.0, 2.0)
                if abs(re) < 2e-3:
                    continue
                if deg - len(rts) >= 2 and rng.random() < 0.5:
                    z = complex(re, rng.uniform(0.1, 2.0))
                    rts += [z, np.conj(z)]
                else:
                    rts.append(complex(re))
            p = real_poly_from_roots(rts)
            truth = max(z.real for z in rts) < 0.0
            routh = routh_hurwitz_test(p)
            assert routh is not None and routh == truth
            assert (is_hurwitz(p).verdict is Tristate.PASS) == truth


class TestKharitonov:
    def test_point_interval(self):
        p = P(1, 2, 3)
        vs = kharitonov_vertices(IntervalPolynomial(p.coeffs, p.coeffs))
        assert all(v == p for v in vs)

    def test_vertex_patterns(self):
        vs = kharitonov_vertices(IntervalPolynomial([1, 1, 1], [2, 3, 2]))
        got = {tuple(v.coeffs) for v in vs}
        want = {(1, 1, 2), (2, 3, 1), (1, 3, 2), (2, 1, 1)}
        assert got == want

    def test_family_with_zero_constant_fails(self):
        ip = IntervalPolynomial([-1, 1, 1], [1, 1, 1])
        verdict, _ = interval_hurwitz(ip)
        assert verdict is not Tristate.PASS  # member s*q(s) sits at the boundary

    def test_leading_interval_through_zero(self):
        with pytest.raises(DegenerateLeadingCoefficient):
            kharitonov_vertices(IntervalPolynomial([1, 1, -1], [2, 2, 1]))

    def test_agrees_with_grid_sampling(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            deg = int(rng.integers(1, 5))
            center = rng.uniform(0.2, 3.0, deg + 1)
            width = rng.uniform(0.0, 0.5, deg + 1)
            lo, hi = center - width, center + width
            lo[-1] = max(lo[-1], 0.05)   # keep the family degree invariant
            hi[-1] = max(hi[-1], lo[-1])
            ip = IntervalPolynomial(lo, hi)
            verdict, _ = interval_hurwitz(ip)
            grids = [np.linspace(l, h, 3) if h > l else [l] for l, h in zip(lo, hi)]
            sampled_ok = True
            import itertools
            for combo in itertools.product(*grids):
                res = is_hurwitz(Polynomial(combo))
                if res.verdict is not Tristate.PASS:
                    sampled_ok = False
                    break
            if verdict is Tristate.PASS:
                assert sampled_ok
            elif verdict is Tristate.FAIL and not sampled_ok:
                pass  # both reject
            # (vertices are a superset certificate: grid can miss boundary cases)


# algebraic laws under hypothesis: exercised on short coefficient lists
coeff_lists = st.lists(
    st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False),
    min_size=1, max_size=6,
)


@settings(max_examples=200, deadline=None)
@given(coeff_lists, coeff_lists)
def test_addition_commutes(a, b):
    assert add(Polynomial(a), Polynomial(b)) == add(Polynomial(b), Polynomial(a))


@settings(max_examples=200, deadline=None)
@given(coeff_lists, coeff_lists, coeff_lists)
def test_multiplication_distributes(a, b, c):
    pa, pb, pc = Polynomial(a), Polynomial(b), Polynomial(c)
    lhs = mul(pa, add(pb, pc))
    rhs = add(mul(pa, pb), mul(pa, pc))
    assert lhs.allclose(rhs, rtol=1e-9)


@settings(max_examples=100, deadline=None)
@given(coeff_lists)
def test_evaluation_matches_numpy(a):
    p = Polynomial(a)
    x = 0.7 - 0.3j
    ref = sum(c * x**k for k, c in enumerate(p.coeffs))
    assert abs(p(x) - ref) <= 1e-9 * (1 + abs(ref))
