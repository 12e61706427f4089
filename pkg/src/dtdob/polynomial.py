"""Real-coefficient polynomial arithmetic and stability tests.

Coefficients are stored in ascending powers: ``coeffs[k]`` multiplies the
k-th power of the variable.  All higher modules treat :class:`Polynomial`
as their common currency, both for the discrete variable z and for the
continuous variable s (the type itself is variable-agnostic).

Stability verdicts are tristate: any test whose decisive quantity falls
within ``boundary_tol`` of its stability boundary reports
:data:`Tristate.INCONCLUSIVE` instead of guessing a boolean.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npp

from .errors import ConvergenceFailure, DegenerateLeadingCoefficient, ZeroPolynomial

__all__ = [
    "Polynomial",
    "ComplexRootSet",
    "IntervalPolynomial",
    "Tristate",
    "SchurResult",
    "HurwitzResult",
    "add",
    "mul",
    "compose_affine",
    "roots",
    "is_schur",
    "is_hurwitz",
    "jury_schur_test",
    "routh_hurwitz_test",
    "kharitonov_vertices",
    "interval_hurwitz",
    "real_poly_from_roots",
]

#: comparison tolerance relative to the largest coefficient magnitude
COEFF_RTOL = 1e-12
#: half-width of the band around a stability boundary that yields INCONCLUSIVE
BOUNDARY_TOL = 1e-9
#: default acceptable relative root residual
ROOT_RESIDUAL_TOL = 1e-6


class Tristate(enum.Enum):
    """Outcome of a stability test: the marginal band is reported, not guessed."""

    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


class Polynomial:
    """Immutable real polynomial with ascending coefficients.

    Trailing (highest-index) zero coefficients are trimmed on construction,
    so ``degree`` always refers to the true degree; the zero polynomial is
    stored as a single zero coefficient.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[float]):
        arr = np.atleast_1d(np.asarray(coeffs, dtype=float)).copy()
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("coefficients must be a non-empty 1-D sequence")
        n = arr.size
        while n > 1 and arr[n - 1] == 0.0:
            n -= 1
        arr = arr[:n]
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):  # immutability
        raise AttributeError("Polynomial is immutable")

    # -- basic queries --------------------------------------------------

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 1 and self.coeffs[0] == 0.0

    @property
    def leading(self) -> float:
        return float(self.coeffs[-1])

    def __call__(self, x):
        """Evaluate by Horner's rule; accepts real/complex scalars or arrays."""
        x = np.asarray(x)
        out = np.full(x.shape, self.coeffs[-1], dtype=np.result_type(x.dtype, float))
        for c in self.coeffs[-2::-1]:
            out = out * x + c
        return out if out.shape else out[()]

    # -- ring operations -------------------------------------------------

    def __add__(self, other) -> "Polynomial":
        other = _as_poly(other)
        return Polynomial(npp.polyadd(self.coeffs, other.coeffs))

    __radd__ = __add__

    def __sub__(self, other) -> "Polynomial":
        other = _as_poly(other)
        return Polynomial(npp.polysub(self.coeffs, other.coeffs))

    def __rsub__(self, other) -> "Polynomial":
        return _as_poly(other) - self

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Polynomial(self.coeffs * float(other))
        other = _as_poly(other)
        return Polynomial(npp.polymul(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __neg__(self) -> "Polynomial":
        return Polynomial(-self.coeffs)

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        out = Polynomial([1.0])
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def monic(self) -> "Polynomial":
        if self.is_zero:
            raise ZeroPolynomial("cannot normalize the zero polynomial")
        return Polynomial(self.coeffs / self.leading)

    def compose_affine(self, scale: float, shift: float) -> "Polynomial":
        """Return q with q(x) = p(shift + scale*x)."""
        return compose_affine(self, scale, shift)

    def allclose(self, other, rtol: float = COEFF_RTOL) -> bool:
        other = _as_poly(other)
        a, b = self.coeffs, other.coeffs
        n = max(a.size, b.size)
        a = np.pad(a, (0, n - a.size))
        b = np.pad(b, (0, n - b.size))
        scale = max(np.abs(a).max(), np.abs(b).max(), 1.0)
        return bool(np.abs(a - b).max() <= rtol * scale)

    def __eq__(self, other):
        try:
            other = _as_poly(other)
        except TypeError:
            return NotImplemented
        return self.allclose(other)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __repr__(self):
        return f"Polynomial({self.coeffs.tolist()})"


def _as_poly(p) -> Polynomial:
    if isinstance(p, Polynomial):
        return p
    if isinstance(p, (int, float, np.floating, np.integer)):
        return Polynomial([float(p)])
    if isinstance(p, (list, tuple, np.ndarray)):
        return Polynomial(p)
    raise TypeError(f"cannot interpret {type(p).__name__} as Polynomial")


@dataclass(frozen=True)
class ComplexRootSet:
    """All complex roots of a polynomial plus the worst relative residual."""

    roots: np.ndarray
    residual: float

    def __iter__(self):
        return iter(self.roots)

    def __len__(self):
        return len(self.roots)


@dataclass(frozen=True)
class IntervalPolynomial:
    """Coefficient-wise interval family, ascending powers."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape:
            raise ValueError("lo and hi must have the same length")
        if np.any(lo > hi):
            raise ValueError("every lower bound must not exceed its upper bound")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def degree(self) -> int:
        return self.lo.size - 1


@dataclass(frozen=True)
class SchurResult:
    verdict: Tristate
    max_modulus: float

    @property
    def passed(self) -> bool:
        return self.verdict is Tristate.PASS

    @property
    def strictly_outside(self) -> bool:
        """True when some root is confirmed outside the closed unit disk."""
        return self.verdict is Tristate.FAIL


@dataclass(frozen=True)
class HurwitzResult:
    verdict: Tristate
    max_real_part: float

    @property
    def passed(self) -> bool:
        return self.verdict is Tristate.PASS


# ---------------------------------------------------------------------------
# arithmetic entry points (thin wrappers kept for a uniform functional surface)
# ---------------------------------------------------------------------------

def add(p, q) -> Polynomial:
    """Coefficient-wise sum."""
    return _as_poly(p) + _as_poly(q)


def mul(p, q) -> Polynomial:
    """Product (coefficient convolution)."""
    return _as_poly(p) * _as_poly(q)


def compose_affine(p, scale: float, shift: float) -> Polynomial:
    """Substitute the variable: return q(x) = p(shift + scale*x).

    Used to move between the z-domain and the incremental domain
    gamma = (z - 1)/delta via z = 1 + delta*gamma, and for gain-margin
    rescalings z -> (1 - margin)*z.
    """
    p = _as_poly(p)
    arg = np.array([shift, scale], dtype=float)
    out = np.array([p.coeffs[-1]])
    for c in p.coeffs[-2::-1]:
        out = npp.polyadd(npp.polymul(out, arg), [c])
    return Polynomial(out)


def real_poly_from_roots(root_list, lead: float = 1.0, imag_rtol: float = 1e-7) -> Polynomial:
    """Build ``lead * prod (x - r)`` as a real polynomial.

    Complex roots must occur in (numerically) conjugate pairs; the residual
    imaginary parts of the expanded product are checked against `imag_rtol`
    and dropped.
    """
    rts = np.asarray(list(root_list), dtype=complex)
    if rts.size == 0:
        return Polynomial([lead])
    c = npp.polyfromroots(rts) * lead
    scale = max(np.abs(c).max(), 1e-300)
    if np.abs(c.imag).max() > imag_rtol * scale:
        raise ValueError("roots are not conjugate-symmetric; cannot form a real polynomial")
    return Polynomial(c.real)


# ---------------------------------------------------------------------------
# root extraction
# ---------------------------------------------------------------------------

def _pair_conjugates(rts: np.ndarray, tol: float) -> np.ndarray:
    """Symmetrize nearly-conjugate root pairs and flatten tiny imaginary parts."""
    rts = np.array(rts, dtype=complex)
    scale = 1.0 + np.abs(rts).max(initial=0.0)
    used = np.zeros(rts.size, dtype=bool)
    out = np.empty_like(rts)
    k = 0
    order = np.argsort(-np.abs(rts.imag), kind="stable")
    for i in order:
        if used[i]:
            continue
        r = rts[i]
        if abs(r.imag) <= tol * scale:
            used[i] = True
            out[k] = complex(r.real, 0.0)
            k += 1
            continue
        # find the best conjugate partner among unused roots
        cand = np.flatnonzero(~used & (np.arange(rts.size) != i))
        if cand.size == 0:
            used[i] = True
            out[k] = r
            k += 1
            continue
        d = np.abs(rts[cand] - np.conj(r))
        j = cand[np.argmin(d)]
        if d.min() <= 2 * tol * scale + 1e-6 * abs(r.imag):
            used[i] = used[j] = True
            m = 0.5 * (r + np.conj(rts[j]))
            out[k] = m
            out[k + 1] = np.conj(m)
            k += 2
        else:
            used[i] = True
            out[k] = r
            k += 1
    out = out[:k]
    return out[np.lexsort((out.imag, out.real))]


def roots(p, residual_tol: float = ROOT_RESIDUAL_TOL) -> ComplexRootSet:
    """All complex roots via the balanced companion-matrix eigenproblem.

    The reported residual is the worst relative backward error
    ``|p(r)| / sum_k |c_k| |r|^k``; :class:`ConvergenceFailure` is raised if
    it exceeds `residual_tol`.
    """
    p = _as_poly(p)
    if p.is_zero:
        raise ZeroPolynomial("the zero polynomial has no well-defined root set")
    if p.degree == 0:
        return ComplexRootSet(roots=np.empty(0, dtype=complex), residual=0.0)
    rts = npp.polyroots(p.coeffs)
    rts = _pair_conjugates(rts, tol=1e-10)
    absr = np.abs(rts)
    denom = np.zeros_like(absr)
    for k, c in enumerate(p.coeffs):
        denom += abs(c) * absr**k
    vals = np.abs(p(rts))
    residual = float(np.max(vals / np.maximum(denom, 1e-300)))
    if residual > residual_tol:
        raise ConvergenceFailure(
            f"root refinement stalled: relative residual {residual:.3e}", residual=residual
        )
    return ComplexRootSet(roots=rts, residual=residual)


# ---------------------------------------------------------------------------
# closed-form stability tables
# ---------------------------------------------------------------------------

def jury_schur_test(p, degeneracy_rtol: float = 1e-12) -> Optional[bool]:
    """Jury/Schur-Cohn reduction: True/False when the table is regular, None when
    a pivot degenerates (caller should fall back to the root oracle).

    The polynomial is Schur iff every reflection coefficient a_0/a_n of the
    successive reductions has modulus < 1.
    """
    p = _as_poly(p)
    if p.is_zero:
        raise ZeroPolynomial("Schur test needs a nonzero polynomial")
    a = p.coeffs.astype(float)
    while a.size > 1:
        scale = np.abs(a).max()
        lead, const = a[-1], a[0]
        if abs(lead) <= degeneracy_rtol * scale:
            return None
        delta = const / lead
        if abs(abs(delta) - 1.0) <= degeneracy_rtol:
            return None  # marginal reflection coefficient
        if abs(delta) > 1.0:
            return False
        # next row: (p - delta * reversed(p)) / x, ascending storage
        b = a - delta * a[::-1]
        a = b[1:]
    return True


def routh_hurwitz_test(p, degeneracy_rtol: float = 1e-12) -> Optional[bool]:
    """Routh array first-column test: True/False, or None on a degenerate pivot."""
    p = _as_poly(p)
    if p.is_zero:
        raise ZeroPolynomial("Hurwitz test needs a nonzero polynomial")
    if p.degree == 0:
        return True
    c = p.coeffs[::-1].astype(float)  # descending
    if c[0] < 0:
        c = -c
    n = c.size - 1
    row0 = c[0::2].copy()
    row1 = c[1::2].copy()
    if row1.size < row0.size:
        row1 = np.append(row1, 0.0)
    scale = np.abs(c).max()
    first_col = [row0[0]]
    for _ in range(n):
        if abs(row1[0]) <= degeneracy_rtol * scale:
            return None
        first_col.append(row1[0])
        nxt = np.empty(max(row0.size - 1, 1))
        for j in range(nxt.size):
            a2 = row0[j + 1] if j + 1 < row0.size else 0.0
            b2 = row1[j + 1] if j + 1 < row1.size else 0.0
            nxt[j] = (row1[0] * a2 - row0[0] * b2) / row1[0]
        row0, row1 = row1, nxt
        if len(first_col) == n + 1:
            break
    col = np.asarray(first_col)
    if np.any(np.abs(col) <= degeneracy_rtol * scale):
        return None
    return bool(np.all(col > 0))


# ---------------------------------------------------------------------------
# tristate verdicts
# ---------------------------------------------------------------------------

def is_schur(p, margin: float = 0.0, boundary_tol: float = BOUNDARY_TOL) -> SchurResult:
    """Schur test with a stability margin: PASS iff every root modulus < 1 - margin.

    The Jury table decides when it is regular; the companion-matrix root
    oracle supplies the reported max modulus and decides degenerate tables.
    A max modulus within `boundary_tol` of the boundary is INCONCLUSIVE.
    """
    p = _as_poly(p)
    if p.is_zero:
        raise ZeroPolynomial("Schur test needs a nonzero polynomial")
    if p.degree == 0:
        return SchurResult(Tristate.PASS, 0.0)
    radius = 1.0 - margin
    if radius <= 0:
        raise ValueError("margin must be < 1")
    max_mod = float(np.abs(roots(p).roots).max())
    if abs(max_mod - radius) <= boundary_tol:
        return SchurResult(Tristate.INCONCLUSIVE, max_mod)
    jury = jury_schur_test(compose_affine(p, radius, 0.0))
    inside = jury if jury is not None else (max_mod < radius)
    if inside != (max_mod < radius):
        inside = max_mod < radius  # regular-but-wrong table cannot outvote the oracle
    return SchurResult(Tristate.PASS if inside else Tristate.FAIL, max_mod)


def is_hurwitz(p, boundary_tol: float = BOUNDARY_TOL) -> HurwitzResult:
    """Hurwitz test: PASS iff all roots have negative real part (tristate)."""
    p = _as_poly(p)
    if p.is_zero:
        raise ZeroPolynomial("Hurwitz test needs a nonzero polynomial")
    if p.degree == 0:
        return HurwitzResult(Tristate.PASS, -np.inf)
    max_re = float(roots(p).roots.real.max())
    if abs(max_re) <= boundary_tol:
        return HurwitzResult(Tristate.INCONCLUSIVE, max_re)
    routh = routh_hurwitz_test(p)
    stable = routh if routh is not None else (max_re < 0.0)
    if stable != (max_re < 0.0):
        stable = max_re < 0.0
    return HurwitzResult(Tristate.PASS if stable else Tristate.FAIL, max_re)


# ---------------------------------------------------------------------------
# interval (Kharitonov) robustness
# ---------------------------------------------------------------------------

#: ascending-coefficient selection patterns of the four vertex polynomials;
#: each repeats with period four starting at the constant term
_KHARITONOV_PATTERNS = (
    ("lo", "lo", "hi", "hi"),
    ("hi", "hi", "lo", "lo"),
    ("lo", "hi", "hi", "lo"),
    ("hi", "lo", "lo", "hi"),
)


def kharitonov_vertices(ip: IntervalPolynomial):
    """The four Kharitonov vertex polynomials of an interval family.

    The interval family (with invariant degree) is Hurwitz iff all four
    vertices are Hurwitz.
    """
    lo, hi = ip.lo, ip.hi
    if lo[-1] <= 0.0 <= hi[-1] and not (lo[-1] == hi[-1] != 0.0):
        raise DegenerateLeadingCoefficient(
            "leading coefficient interval contains zero; family degree is not invariant"
        )
    out = []
    for pattern in _KHARITONOV_PATTERNS:
        picks = [lo[k] if pattern[k % 4] == "lo" else hi[k] for k in range(lo.size)]
        out.append(Polynomial(picks))
    return tuple(out)


def interval_hurwitz(ip: IntervalPolynomial, boundary_tol: float = BOUNDARY_TOL):
    """Tristate Hurwitz verdict for the whole interval family via Kharitonov.

    Returns ``(verdict, worst_max_real_part)``.
    """
    if ip.degree == 0:
        return Tristate.PASS, -np.inf
    results = [is_hurwitz(v, boundary_tol=boundary_tol) for v in kharitonov_vertices(ip)]
    worst = max(r.max_real_part for r in results)
    if any(r.verdict is Tristate.FAIL for r in results):
        return Tristate.FAIL, worst
    if any(r.verdict is Tristate.INCONCLUSIVE for r in results):
        return Tristate.INCONCLUSIVE, worst
    return Tristate.PASS, worst
