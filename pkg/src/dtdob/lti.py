"""Transfer functions, state-space realizations, and uncertain plant families.

Plants are SISO.  An :class:`UncertainPlantFamily` is a coefficient-interval
set: members have a monic denominator of degree n and a numerator
``g * (monic polynomial of degree n - nu)`` with g > 0 and known bounds on
every coefficient.  Structured families (physical parameters entering the
coefficients nonlinearly) are supported through a parameter box whose induced
coefficient intervals are computed by dense grid extremization; the box is
kept so that downstream grid sweeps can iterate the true members rather than
the conservative coefficient hull.
"""

from __future__ import annotations

import enum
import itertools
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .errors import ImproperTransfer, OutOfBounds, ZeroPolynomial
from .polynomial import IntervalPolynomial, Polynomial, roots

__all__ = [
    "Domain",
    "RationalTransfer",
    "StateSpace",
    "UncertainPlantFamily",
    "ParameterBox",
    "realize_controllable_canonical",
    "transfer_of",
    "sample_member",
    "high_frequency_gain",
    "gain_interval",
]


class Domain(enum.Enum):
    CONTINUOUS_S = "s"
    DISCRETE_Z = "z"


def _coprimality_warning(num: Polynomial, den: Polynomial, tol: float = 1e-7):
    """Warn when numerator and denominator share a root cluster (approximate GCD)."""
    if num.degree < 1 or den.degree < 1:
        return
    zn = roots(num).roots
    zd = roots(den).roots
    scale = 1.0 + max(np.abs(zn).max(initial=0.0), np.abs(zd).max(initial=0.0))
    for z in zn:
        if np.abs(zd - z).min() < tol * scale:
            warnings.warn(
                f"numerator and denominator share an approximate root near {z:.6g}; "
                "transfer is not coprime",
                stacklevel=3,
            )
            return


@dataclass(frozen=True)
class RationalTransfer:
    """Ratio of two real polynomials tagged with its variable domain."""

    num: Polynomial
    den: Polynomial
    domain: Domain = Domain.CONTINUOUS_S

    def __post_init__(self):
        num = self.num if isinstance(self.num, Polynomial) else Polynomial(self.num)
        den = self.den if isinstance(self.den, Polynomial) else Polynomial(self.den)
        if den.is_zero:
            raise ZeroPolynomial("transfer denominator must be nonzero")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        _coprimality_warning(num, den)

    @property
    def relative_degree(self) -> int:
        return self.den.degree - self.num.degree

    @property
    def high_frequency_gain(self) -> float:
        """Ratio of leading numerator to leading denominator coefficient."""
        return self.num.leading / self.den.leading

    @property
    def is_proper(self) -> bool:
        return self.relative_degree >= 0

    @property
    def is_strictly_proper(self) -> bool:
        return self.relative_degree >= 1

    def __call__(self, x):
        return self.num(x) / self.den(x)

    def poles(self) -> np.ndarray:
        return roots(self.den).roots if self.den.degree >= 1 else np.empty(0, complex)

    def zeros(self) -> np.ndarray:
        return roots(self.num).roots if self.num.degree >= 1 else np.empty(0, complex)

    def normalized(self) -> "RationalTransfer":
        """Scale so the denominator is monic."""
        lead = self.den.leading
        return RationalTransfer(Polynomial(self.num.coeffs / lead),
                                Polynomial(self.den.coeffs / lead), self.domain)

    def __repr__(self):
        return (f"RationalTransfer(num={self.num.coeffs.tolist()}, "
                f"den={self.den.coeffs.tolist()}, domain={self.domain.name})")


@dataclass(frozen=True)
class StateSpace:
    """SISO state-space quadruple (A, B, C, D) with scalar feedthrough."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: float

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError("A must be square")
        B = np.asarray(self.B, dtype=float).reshape(n, 1) if n else np.zeros((0, 1))
        C = np.asarray(self.C, dtype=float).reshape(1, n) if n else np.zeros((1, 0))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", float(self.D))

    @property
    def order(self) -> int:
        return self.A.shape[0]


def realize_controllable_canonical(tf: RationalTransfer) -> StateSpace:
    """Controllable canonical realization of a proper transfer.

    The denominator is normalized monic; biproper transfers get their
    feedthrough split off so the remaining numerator is strictly proper.
    """
    if not tf.is_proper:
        raise ImproperTransfer(
            f"cannot realize improper transfer (relative degree {tf.relative_degree})"
        )
    tf = tf.normalized()
    den = tf.den.coeffs
    num = tf.num.coeffs
    n = den.size - 1
    if n == 0:
        return StateSpace(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), num[0])
    if num.size - 1 == n:
        D = num[-1]
        num = num[:-1] - D * den[:-1]
    else:
        D = 0.0
        num = np.pad(num, (0, n - num.size))
    A = np.zeros((n, n))
    if n > 1:
        A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = -den[:-1]
    B = np.zeros((n, 1))
    B[-1, 0] = 1.0
    C = num[:n].reshape(1, n)
    return StateSpace(A, B, C, D)


def transfer_of(ss: StateSpace, domain: Domain = Domain.CONTINUOUS_S) -> RationalTransfer:
    """Transfer function of a state-space model via the determinant identity.

    ``C (xI - A)^-1 B = det(xI - A + B C)/det(xI - A) - 1``.
    """
    n = ss.order
    if n == 0:
        return RationalTransfer(Polynomial([ss.D]), Polynomial([1.0]), domain)
    den = np.poly(ss.A)[::-1]  # ascending
    num = np.poly(ss.A - ss.B @ ss.C)[::-1] - den + ss.D * den
    return RationalTransfer(Polynomial(num), Polynomial(den), domain)


# ---------------------------------------------------------------------------
# uncertain plant families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParameterBox:
    """Physical-parameter box with a map onto (gain, alpha, beta) coefficients.

    ``to_coefficients(params) -> (g, alpha, beta)`` where alpha are the n
    non-leading denominator coefficients (ascending) and beta the n - nu
    non-leading numerator coefficients (ascending).
    """

    names: tuple
    lows: np.ndarray
    highs: np.ndarray
    to_coefficients: Callable[[Sequence[float]], tuple]

    def __post_init__(self):
        lows = np.asarray(self.lows, dtype=float)
        highs = np.asarray(self.highs, dtype=float)
        if lows.shape != highs.shape or lows.size != len(self.names):
            raise ValueError("parameter names and bounds are inconsistent")
        if np.any(lows > highs):
            raise ValueError("parameter lower bounds must not exceed upper bounds")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "lows", lows)
        object.__setattr__(self, "highs", highs)

    def grid(self, points_per_axis: int) -> Iterator[np.ndarray]:
        axes = [np.linspace(lo, hi, points_per_axis) if hi > lo else np.array([lo])
                for lo, hi in zip(self.lows, self.highs)]
        for combo in itertools.product(*axes):
            yield np.asarray(combo)


@dataclass(frozen=True)
class UncertainPlantFamily:
    """Interval family of strictly proper CT plants (monic denominator).

    ``alpha`` bounds cover the n non-leading denominator coefficients and
    ``beta`` bounds the n - nu non-leading numerator coefficients, both in
    ascending powers.  ``structure`` is set when the intervals were induced
    from a parameter box.
    """

    n: int
    nu: int
    g_lo: float
    g_hi: float
    alpha_lo: np.ndarray
    alpha_hi: np.ndarray
    beta_lo: np.ndarray
    beta_hi: np.ndarray
    structure: Optional[ParameterBox] = field(default=None, compare=False)

    def __post_init__(self):
        if not (1 <= self.nu <= self.n):
            raise ValueError("need 1 <= nu <= n")
        if not (0.0 < self.g_lo <= self.g_hi):
            raise ValueError("gain bounds must satisfy 0 < g_lo <= g_hi")
        for attr, size in (("alpha_lo", self.n), ("alpha_hi", self.n),
                           ("beta_lo", self.n - self.nu), ("beta_hi", self.n - self.nu)):
            arr = np.asarray(getattr(self, attr), dtype=float).reshape(size)
            object.__setattr__(self, attr, arr)
        if np.any(self.alpha_lo > self.alpha_hi) or np.any(self.beta_lo > self.beta_hi):
            raise ValueError("interval bounds must satisfy lo <= hi")

    # -- membership -----------------------------------------------------

    def member(self, g: float, alpha: Sequence[float], beta: Sequence[float] = (),
               check: bool = True, tol: float = 1e-9) -> RationalTransfer:
        """The family member with the given coefficient assignment."""
        alpha = np.asarray(alpha, dtype=float).reshape(self.n)
        beta = np.asarray(beta, dtype=float).reshape(self.n - self.nu)
        if check:
            slack = tol * (1.0 + np.abs(np.concatenate([[self.g_lo, self.g_hi],
                                                        self.alpha_lo, self.alpha_hi])).max())
            if not (self.g_lo - slack <= g <= self.g_hi + slack):
                raise OutOfBounds(f"gain {g} outside [{self.g_lo}, {self.g_hi}]")
            if np.any(alpha < self.alpha_lo - slack) or np.any(alpha > self.alpha_hi + slack):
                raise OutOfBounds("denominator coefficients violate their intervals")
            if np.any(beta < self.beta_lo - slack) or np.any(beta > self.beta_hi + slack):
                raise OutOfBounds("numerator coefficients violate their intervals")
        den = Polynomial(np.append(alpha, 1.0))
        num = Polynomial(g * np.append(beta, 1.0))
        return RationalTransfer(num, den, Domain.CONTINUOUS_S)

    def member_from_parameters(self, params: Sequence[float], check: bool = True) -> RationalTransfer:
        if self.structure is None:
            raise ValueError("family carries no parameter structure")
        g, alpha, beta = self.structure.to_coefficients(np.asarray(params, dtype=float))
        return self.member(g, alpha, beta, check=check)

    def contains(self, tf: RationalTransfer, tol: float = 1e-9) -> bool:
        """Coefficient-box membership of a CT transfer (after normalization)."""
        tf = tf.normalized()
        if tf.den.degree != self.n or tf.relative_degree != self.nu:
            return False
        g = tf.high_frequency_gain
        if g <= 0:
            return False
        alpha = tf.den.coeffs[:-1]
        beta = tf.num.coeffs[:-1] / g
        slack = tol * (1.0 + abs(self.g_hi))
        return bool(
            self.g_lo - slack <= g <= self.g_hi + slack
            and np.all(alpha >= self.alpha_lo - slack)
            and np.all(alpha <= self.alpha_hi + slack)
            and np.all(beta >= self.beta_lo - slack)
            and np.all(beta <= self.beta_hi + slack)
        )

    # -- derived interval data -------------------------------------------

    def numerator_interval(self) -> IntervalPolynomial:
        """Monic numerator coefficient intervals (gain stripped; it never moves zeros)."""
        return IntervalPolynomial(np.append(self.beta_lo, 1.0), np.append(self.beta_hi, 1.0))

    def grid_members(self, points_per_axis: int = 3, cap: int = 20000) -> Iterator[RationalTransfer]:
        """Iterate representative members: the parameter-box grid when the family
        is structured, else the coefficient-box grid (vertices plus midpoints)."""
        if self.structure is not None:
            for params in self.structure.grid(points_per_axis):
                yield self.member_from_parameters(params, check=False)
            return
        axes = [np.linspace(self.g_lo, self.g_hi, points_per_axis)
                if self.g_hi > self.g_lo else np.array([self.g_lo])]
        for lo, hi in zip(np.concatenate([self.alpha_lo, self.beta_lo]),
                          np.concatenate([self.alpha_hi, self.beta_hi])):
            axes.append(np.linspace(lo, hi, points_per_axis) if hi > lo else np.array([lo]))
        total = int(np.prod([a.size for a in axes]))
        if total > cap:
            raise ValueError(f"coefficient grid has {total} points; reduce points_per_axis")
        for combo in itertools.product(*axes):
            g = combo[0]
            alpha = np.asarray(combo[1:1 + self.n])
            beta = np.asarray(combo[1 + self.n:])
            yield self.member(g, alpha, beta, check=False)

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_parameter_box(cls, n: int, nu: int, box: ParameterBox,
                           grid_points: int = 21) -> "UncertainPlantFamily":
        """Conservatively embed a parameter-structured family into coefficient
        intervals by extremizing each coefficient over a dense parameter grid."""
        g_vals = []
        alphas = []
        betas = []
        for params in box.grid(grid_points):
            g, alpha, beta = box.to_coefficients(params)
            g_vals.append(float(g))
            alphas.append(np.asarray(alpha, dtype=float).reshape(n))
            betas.append(np.asarray(beta, dtype=float).reshape(n - nu))
        alphas = np.asarray(alphas)
        betas = np.asarray(betas).reshape(len(g_vals), n - nu)
        return cls(
            n=n, nu=nu,
            g_lo=min(g_vals), g_hi=max(g_vals),
            alpha_lo=alphas.min(axis=0), alpha_hi=alphas.max(axis=0),
            beta_lo=betas.min(axis=0) if n > nu else np.empty(0),
            beta_hi=betas.max(axis=0) if n > nu else np.empty(0),
            structure=box,
        )


# -- functional wrappers ------------------------------------------------

def sample_member(fam: UncertainPlantFamily, point) -> RationalTransfer:
    """Family member from a coefficient assignment.

    `point` is a mapping with keys ``g``, ``alpha`` and (when the family has
    finite zeros) ``beta``; alternatively ``params`` selects a member of a
    structured family through its parameter box.
    """
    if "params" in point:
        return fam.member_from_parameters(point["params"])
    return fam.member(point["g"], point.get("alpha", ()), point.get("beta", ()))


def high_frequency_gain(tf: RationalTransfer) -> float:
    if tf.domain is not Domain.CONTINUOUS_S:
        raise ValueError("high-frequency gain is defined for continuous-time transfers")
    return tf.high_frequency_gain


def gain_interval(fam: UncertainPlantFamily) -> tuple:
    return (fam.g_lo, fam.g_hi)
