"""Sampled-data closed-loop simulation.

The continuous-time plant is integrated between samples with classical
fixed-step RK4 under a zero-order-held input and a genuinely continuous
disturbance; the digital controller (nominal feedback plus disturbance
observer) runs as a two-input state machine advanced once per sample.

Signals are declarative (step / sinusoid / sums) so runs serialize and
reproduce bit-for-bit for a given substep count.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .benchmark import two_mass_spring_member
from .discretize import discretize_model, DiscretizationMethod, matrix_exponential_with_integral
from .dob import DobDesign
from .errors import AlgebraicLoop
from .lti import Domain, RationalTransfer, StateSpace, realize_controllable_canonical
from .polynomial import Polynomial, real_poly_from_roots

__all__ = [
    "StepSignal",
    "SineSignal",
    "SumSignal",
    "signal_from_spec",
    "ControllerRealization",
    "realize_controller",
    "SimulationTrace",
    "simulate",
    "TraceClass",
    "classify_trace",
    "frequency_response",
    "exact_sample_propagation",
    "rk4_sample_propagation",
    "write_trace_csv",
    "two_mass_spring_member",
]


# ---------------------------------------------------------------------------
# declarative signals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepSignal:
    amplitude: float = 1.0
    start: float = 0.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= self.start, self.amplitude, 0.0)[()]

    def spec(self):
        return {"type": "step", "amplitude": self.amplitude, "start": self.start}


@dataclass(frozen=True)
class SineSignal:
    amplitude: float
    omega: float
    phase: float = 0.0

    def __call__(self, t):
        return self.amplitude * np.sin(self.omega * np.asarray(t, dtype=float) + self.phase)[()]

    def spec(self):
        return {"type": "sine", "amplitude": self.amplitude,
                "omega": self.omega, "phase": self.phase}


@dataclass(frozen=True)
class SumSignal:
    parts: tuple

    def __call__(self, t):
        return sum(p(t) for p in self.parts)

    def spec(self):
        return {"type": "sum", "parts": [p.spec() for p in self.parts]}


Signal = Union[StepSignal, SineSignal, SumSignal]


def signal_from_spec(spec) -> Signal:
    """Build a signal from its declarative dictionary form."""
    if spec is None:
        return StepSignal(amplitude=0.0)
    kind = spec.get("type")
    if kind == "step":
        return StepSignal(amplitude=float(spec.get("amplitude", 1.0)),
                          start=float(spec.get("start", 0.0)))
    if kind == "sine":
        return SineSignal(amplitude=float(spec["amplitude"]),
                          omega=float(spec["omega"]),
                          phase=float(spec.get("phase", 0.0)))
    if kind == "sum":
        return SumSignal(parts=tuple(signal_from_spec(p) for p in spec["parts"]))
    if kind == "zero":
        return StepSignal(amplitude=0.0)
    raise ValueError(f"unknown signal type {kind!r}")


# ---------------------------------------------------------------------------
# controller realization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ControllerRealization:
    """Combined digital controller with inputs (r, y) and output u.

    Built from three blocks: the discrete nominal controller driven by r - y,
    the Q-filter driven by u, and the inverse-model branch (nominal-inverse
    times Q) driven by y; the disturbance-estimate subtraction is closed
    algebraically, which is loop-free because the Q-filter is strictly proper.
    """

    A: np.ndarray
    B_r: np.ndarray
    B_y: np.ndarray
    C: np.ndarray
    D_r: float
    D_y: float

    @property
    def order(self) -> int:
        return self.A.shape[0]

    def output(self, x: np.ndarray, r: float, y: float) -> float:
        return float(self.C @ x) + self.D_r * r + self.D_y * y

    def advance(self, x: np.ndarray, r: float, y: float) -> np.ndarray:
        return self.A @ x + self.B_r * r + self.B_y * y

    def response(self, z: complex):
        """Transfer pair (u/r, u/y) at one point of the z-plane."""
        n = self.order
        M = np.linalg.solve(z * np.eye(n) - self.A,
                            np.column_stack([self.B_r, self.B_y]))
        h = self.C @ M
        return complex(h[0] + self.D_r), complex(h[1] + self.D_y)


def _realize_shifted(num_w, den_w):
    """Canonical realization built on the shifted variable w = z - 1.

    The companion matrix of the w-basis denominator plus the identity is a
    realization in z; working in w keeps the coefficients of slow (near
    z = 1) blocks order-one instead of hiding them in cancellations of the
    expanded z-coefficients.
    """
    ss = realize_controllable_canonical(RationalTransfer(num_w, den_w, Domain.DISCRETE_Z))
    return StateSpace(ss.A + np.eye(ss.order), ss.B, ss.C, ss.D)


def realize_controller(design: DobDesign) -> ControllerRealization:
    """State-space form of the full observer-based digital controller."""
    if design.q.m_q >= design.q.n_q:
        raise AlgebraicLoop("Q-filter must be strictly proper to avoid a delay-free loop")
    ctrl = discretize_model(design.controller_ct, design.controller_method, design.delta)
    nom = discretize_model(design.nominal_ct, design.nominal_method, design.delta)
    ctrl_num_w = real_poly_from_roots(ctrl.zeros - 1.0, ctrl.lead)
    ctrl_den_w = real_poly_from_roots(ctrl.poles - 1.0)
    nom_num_w = real_poly_from_roots(nom.zeros - 1.0, nom.lead)
    nom_den_w = real_poly_from_roots(nom.poles - 1.0)
    nq_w = design.q.numerator_gamma(1.0)     # (z-1)-basis coefficients verbatim
    dq_w = design.q.denominator_gamma(1.0)

    cblk = _realize_shifted(ctrl_num_w, ctrl_den_w)
    qblk = _realize_shifted(nq_w, dq_w)
    invblk = _realize_shifted(nq_w * nom_den_w, dq_w * nom_num_w)
    if abs(qblk.D) > 1e-14:
        raise AlgebraicLoop("Q-filter realization has direct feedthrough")

    n1, n2, n3 = cblk.order, qblk.order, invblk.order
    n = n1 + n2 + n3
    A = np.zeros((n, n))
    A[:n1, :n1] = cblk.A
    # u = C1 x1 + D1 (r - y) + C2 x2 - C3 x3 - D3 y feeds the Q-filter input
    A[n1:n1 + n2, :n1] = qblk.B @ cblk.C
    A[n1:n1 + n2, n1:n1 + n2] = qblk.A + qblk.B @ qblk.C
    A[n1:n1 + n2, n1 + n2:] = -qblk.B @ invblk.C
    A[n1 + n2:, n1 + n2:] = invblk.A

    B_r = np.zeros(n)
    B_r[:n1] = cblk.B[:, 0]
    B_r[n1:n1 + n2] = qblk.B[:, 0] * cblk.D
    B_y = np.zeros(n)
    B_y[:n1] = -cblk.B[:, 0]
    B_y[n1:n1 + n2] = qblk.B[:, 0] * (-cblk.D - invblk.D)
    B_y[n1 + n2:] = invblk.B[:, 0]

    C = np.zeros(n)
    C[:n1] = cblk.C[0]
    C[n1:n1 + n2] = qblk.C[0]
    C[n1 + n2:] = -invblk.C[0]
    return ControllerRealization(A=A, B_r=B_r, B_y=B_y, C=C,
                                 D_r=cblk.D, D_y=-cblk.D - invblk.D)


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------

def _integrate_sample(A, B, x, u, d, t, h, substeps, record=None):
    """Classical RK4 over one sampling interval with held input u and
    continuous disturbance d(t); `record` collects (t, state) per substep."""
    for j in range(substeps):
        tj = t + j * h
        if record is not None:
            record.append((tj, x))
        k1 = A @ x + B * (u + d(tj))
        k2 = A @ (x + 0.5 * h * k1) + B * (u + d(tj + 0.5 * h))
        k3 = A @ (x + 0.5 * h * k2) + B * (u + d(tj + 0.5 * h))
        k4 = A @ (x + h * k3) + B * (u + d(tj + h))
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


def rk4_sample_propagation(member: RationalTransfer, delta: float,
                           u_sequence, substeps: int = 20) -> np.ndarray:
    """RK4 counterpart of :func:`exact_sample_propagation`: propagate the plant
    state over each sample under the held input sequence (no disturbance).
    Returns the state after every sample."""
    plant = realize_controllable_canonical(member.normalized())
    A, B = plant.A, plant.B[:, 0]
    zero = lambda t: 0.0
    h = delta / substeps
    x = np.zeros(plant.order)
    out = np.empty((len(u_sequence), plant.order))
    for k, u in enumerate(u_sequence):
        x = _integrate_sample(A, B, x, float(u), zero, k * delta, h, substeps)
        out[k] = x
    return out


class TraceClass(enum.Enum):
    BOUNDED = "bounded"
    DIVERGENT = "divergent"


@dataclass(frozen=True)
class SimulationTrace:
    t: np.ndarray
    y: np.ndarray
    u: np.ndarray
    d: np.ndarray
    divergent: bool
    metadata: dict
    t_ct: Optional[np.ndarray] = None
    y_ct: Optional[np.ndarray] = None

    @property
    def max_abs_y(self) -> float:
        return float(np.abs(self.y).max()) if self.y.size else 0.0


def simulate(design: DobDesign, member: RationalTransfer, r: Signal, d: Signal,
             horizon: float, substeps: int = 20, blow_up: float = 1e6,
             fine_output: bool = False) -> SimulationTrace:
    """Run the sampled closed loop: hold u, integrate the plant by RK4 with the
    continuous disturbance, sample y, advance the controller.

    A sample magnitude beyond `blow_up` flags the run divergent and stops it;
    the trace up to that point is returned.  Initial plant and controller
    states are zero.
    """
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    delta = design.delta
    n_samples = int(round(horizon / delta))

    plant = realize_controllable_canonical(member.normalized())
    A, B, C = plant.A, plant.B[:, 0], plant.C[0]
    ctrl = realize_controller(design)

    out_of_family = not design.family.contains(member)
    meta = {
        "delta": delta,
        "substeps": substeps,
        "blow_up": blow_up,
        "horizon": horizon,
        "out_of_family": out_of_family,
        "reference": r.spec(),
        "disturbance": d.spec(),
    }

    h = delta / substeps
    x = np.zeros(A.shape[0])
    xk = np.zeros(ctrl.order)
    ts, ys, us, ds = [], [], [], []
    t_fine, y_fine = [], []
    divergent = False

    for k in range(n_samples + 1):
        t = k * delta
        y = float(C @ x)
        ts.append(t)
        ys.append(y)
        ds.append(float(d(t)))
        if abs(y) > blow_up:
            divergent = True
            us.append(us[-1] if us else 0.0)
            break
        if k == n_samples:
            us.append(us[-1] if us else 0.0)   # trailing hold, for aligned columns
            break
        rk = float(r(t))
        u = ctrl.output(xk, rk, y)
        xk = ctrl.advance(xk, rk, y)
        us.append(u)
        record = [] if fine_output else None
        x = _integrate_sample(A, B, x, u, d, t, h, substeps, record=record)
        if fine_output:
            for tj, xj in record:
                t_fine.append(tj)
                y_fine.append(float(C @ xj))

    meta["divergent"] = divergent
    meta["max_abs_y"] = float(np.abs(ys).max()) if ys else 0.0
    return SimulationTrace(
        t=np.asarray(ts), y=np.asarray(ys), u=np.asarray(us), d=np.asarray(ds),
        divergent=divergent, metadata=meta,
        t_ct=np.asarray(t_fine) if fine_output else None,
        y_ct=np.asarray(y_fine) if fine_output else None,
    )


def classify_trace(trace: SimulationTrace, bound: float) -> TraceClass:
    """Divergent iff the output magnitude ever exceeds the bound."""
    return TraceClass.DIVERGENT if trace.max_abs_y > bound else TraceClass.BOUNDED


def exact_sample_propagation(member: RationalTransfer, delta: float,
                             u_sequence: np.ndarray) -> np.ndarray:
    """Oracle for the piecewise-constant-input case: matrix-exponential
    propagation of the plant state over each sample.  Returns the state
    after every sample (shape: len(u_sequence) x n)."""
    plant = realize_controllable_canonical(member.normalized())
    Ad, Bd = matrix_exponential_with_integral(plant.A, plant.B, delta)
    x = np.zeros(plant.order)
    out = np.empty((len(u_sequence), plant.order))
    for k, u in enumerate(u_sequence):
        x = Ad @ x + Bd[:, 0] * float(u)
        out[k] = x
    return out


# ---------------------------------------------------------------------------
# frequency responses
# ---------------------------------------------------------------------------

def frequency_response(tf: RationalTransfer, omegas: Sequence[float],
                       delta: Optional[float] = None) -> np.ndarray:
    """Evaluate at s = j*omega (continuous) or z = exp(j*omega*delta) (discrete).

    Points landing within 1e-12 of a pole are flagged with a warning and
    evaluate to whatever the division yields (typically huge or inf).
    """
    omegas = np.asarray(omegas, dtype=float)
    if tf.domain is Domain.DISCRETE_Z:
        if delta is None:
            raise ValueError("discrete-time evaluation needs the sampling period")
        points = np.exp(1j * omegas * delta)
    else:
        points = 1j * omegas
    den_vals = tf.den(points)
    num_vals = tf.num(points)
    small = np.abs(den_vals) < 1e-12
    if np.any(small):
        warnings.warn(
            f"{int(small.sum())} evaluation point(s) within 1e-12 of a pole",
            stacklevel=2,
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        return num_vals / den_vals


# ---------------------------------------------------------------------------
# trace export
# ---------------------------------------------------------------------------

def write_trace_csv(trace: SimulationTrace, path, fine_path=None):
    """CSV export, full double precision (17 significant digits)."""
    with open(path, "w") as fh:
        fh.write("t,y,u,d\n")
        for t, y, u, d in zip(trace.t, trace.y, trace.u, trace.d):
            fh.write(f"{t:.17g},{y:.17g},{u:.17g},{d:.17g}\n")
    if fine_path is not None and trace.t_ct is not None:
        with open(fine_path, "w") as fh:
            fh.write("t_ct,y_ct\n")
            for t, y in zip(trace.t_ct, trace.y_ct):
                fh.write(f"{t:.17g},{y:.17g}\n")
