"""Configuration file handling for the command-line front end.

Configs are YAML with nested sections.  Validation is strict: unknown keys
are rejected by name, every computation is driven from the validated tree,
and identical configs produce byte-identical outputs downstream.

Schema (see README for a worked example)::

    family:                 # required for check/design/contour/simulate
      type: two_mass_spring | interval
      # two_mass_spring: optional grid_points (default 21)
      # interval: n, nu, g: [lo, hi], alpha_lo, alpha_hi, beta_lo, beta_hi
    nominal:                # CT transfer or two-mass-spring parameters
      type: two_mass_spring | transfer
      # two_mass_spring: M1, M2, K       transfer: num, den  (ascending)
    controller:
      num: [...]            # ascending coefficients
      den: [...]
    discretization:
      nominal: zoh|fdm|bdm|bt|mpz
      controller: zoh|fdm|bdm|bt|mpz
    q:
      type: explicit | direct | indirect
      # explicit: a: [...], c: [...]     ((z-1)-basis, ascending)
      # direct:   nq, safety (opt), g_n (opt)
      # indirect: ct_a: [...], ct_c: [...], psi, g_n (opt)
    delta: 0.015
    member:                 # plant instance for simulate/contour
      type: two_mass_spring | transfer | nominal
    simulation:
      horizon: 150.0
      substeps: 20
      blow_up: 1.0e6        # optional
      r: {type: step|sine|sum|zero, ...}
      d: {type: step|sine|sum|zero, ...}
    contour:
      deltas: [...]         # explicit list, or log-spaced via
      # delta_min, delta_max, points
    freq:
      omega_min, omega_max, points   # log-spaced grid
    grid_points: 101        # gain grid for item (c) / certification
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
import yaml

from .benchmark import two_mass_spring_family, two_mass_spring_member
from .discretize import DiscretizationMethod
from .dob import DobDesign, QFilter
from .errors import ConfigError
from .lti import Domain, RationalTransfer, UncertainPlantFamily
from .polynomial import Polynomial
from .sim import signal_from_spec

__all__ = ["load_config", "ToolConfig"]

_METHODS = {m.value: m for m in DiscretizationMethod}

_SCHEMA = {
    "family": {"type", "grid_points", "n", "nu", "g",
               "alpha_lo", "alpha_hi", "beta_lo", "beta_hi"},
    "nominal": {"type", "M1", "M2", "K", "num", "den"},
    "controller": {"num", "den"},
    "discretization": {"nominal", "controller"},
    "q": {"type", "a", "c", "nq", "safety", "g_n", "ct_a", "ct_c", "psi"},
    "member": {"type", "M1", "M2", "K", "num", "den"},
    "simulation": {"horizon", "substeps", "blow_up", "r", "d"},
    "contour": {"deltas", "delta_min", "delta_max", "points"},
    "freq": {"omega_min", "omega_max", "points"},
}
_TOP_KEYS = set(_SCHEMA) | {"delta", "grid_points"}
_SIGNAL_KEYS = {"type", "amplitude", "start", "omega", "phase", "parts"}


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"missing key '{key}' in section '{where}'")
    return section[key]


def _check_keys(section: dict, allowed: set, where: str):
    if not isinstance(section, dict):
        raise ConfigError(f"section '{where}' must be a mapping")
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key '{key}' in section '{where}'")


def _check_signal(spec, where: str):
    if spec is None:
        return
    _check_keys(spec, _SIGNAL_KEYS, where)
    for part in spec.get("parts", ()):
        _check_signal(part, where + ".parts")


def _floats(value, where: str) -> list:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"'{where}' must be a non-empty list of numbers")
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(f"'{where}' must contain only numbers") from None


class ToolConfig:
    """Validated configuration with lazy builders for the toolkit objects."""

    def __init__(self, raw: dict):
        if not isinstance(raw, dict):
            raise ConfigError("top level of the config must be a mapping")
        for key in raw:
            if key not in _TOP_KEYS:
                raise ConfigError(f"unknown top-level key '{key}'")
        for name, allowed in _SCHEMA.items():
            if name in raw:
                _check_keys(raw[name], allowed, name)
        if "simulation" in raw:
            _check_signal(raw["simulation"].get("r"), "simulation.r")
            _check_signal(raw["simulation"].get("d"), "simulation.d")
        self.raw = raw

    # -- leaf builders -----------------------------------------------------

    @property
    def delta(self) -> float:
        if "delta" not in self.raw:
            raise ConfigError("missing top-level key 'delta'")
        d = float(self.raw["delta"])
        if d <= 0:
            raise ConfigError("'delta' must be positive")
        return d

    @property
    def grid_points(self) -> int:
        return int(self.raw.get("grid_points", 101))

    def family(self) -> UncertainPlantFamily:
        section = _require(self.raw, "family", "top level")
        kind = _require(section, "type", "family")
        if kind == "two_mass_spring":
            return two_mass_spring_family(int(section.get("grid_points", 21)))
        if kind == "interval":
            g = _floats(_require(section, "g", "family"), "family.g")
            if len(g) != 2:
                raise ConfigError("'family.g' must be [lo, hi]")
            n = int(_require(section, "n", "family"))
            nu = int(_require(section, "nu", "family"))
            return UncertainPlantFamily(
                n=n, nu=nu, g_lo=g[0], g_hi=g[1],
                alpha_lo=_floats(_require(section, "alpha_lo", "family"), "family.alpha_lo"),
                alpha_hi=_floats(_require(section, "alpha_hi", "family"), "family.alpha_hi"),
                beta_lo=_floats(section["beta_lo"], "family.beta_lo") if n > nu else [],
                beta_hi=_floats(section["beta_hi"], "family.beta_hi") if n > nu else [],
            )
        raise ConfigError(f"unknown family type '{kind}'")

    def _transfer(self, section: dict, where: str) -> RationalTransfer:
        kind = section.get("type", "transfer")
        if kind == "two_mass_spring":
            return two_mass_spring_member(float(_require(section, "M1", where)),
                                          float(_require(section, "M2", where)),
                                          float(_require(section, "K", where)))
        if kind == "nominal" and where == "member":
            return self.nominal()
        if kind == "transfer":
            return RationalTransfer(
                Polynomial(_floats(_require(section, "num", where), f"{where}.num")),
                Polynomial(_floats(_require(section, "den", where), f"{where}.den")),
                Domain.CONTINUOUS_S,
            )
        raise ConfigError(f"unknown {where} type '{kind}'")

    def nominal(self) -> RationalTransfer:
        return self._transfer(_require(self.raw, "nominal", "top level"), "nominal")

    def controller(self) -> RationalTransfer:
        return self._transfer(_require(self.raw, "controller", "top level"), "controller")

    def member(self) -> RationalTransfer:
        return self._transfer(_require(self.raw, "member", "top level"), "member")

    def methods(self):
        section = _require(self.raw, "discretization", "top level")
        try:
            return (_METHODS[_require(section, "nominal", "discretization")],
                    _METHODS[_require(section, "controller", "discretization")])
        except KeyError as exc:
            raise ConfigError(f"unknown discretization method {exc}") from None

    def q_section(self) -> dict:
        return _require(self.raw, "q", "top level")

    def q_filter(self) -> QFilter:
        """The Q-filter for analysis commands; synthesis requests are resolved
        by the design command, so here only explicit coefficients are accepted
        (plus the indirect form, which is a fixed reparameterization)."""
        section = self.q_section()
        kind = _require(section, "type", "q")
        if kind == "explicit":
            return QFilter(a=tuple(_floats(_require(section, "a", "q"), "q.a")),
                           c=tuple(_floats(_require(section, "c", "q"), "q.c")))
        if kind == "indirect":
            ct_a = _floats(_require(section, "ct_a", "q"), "q.ct_a")
            ct_c = _floats(_require(section, "ct_c", "q"), "q.ct_c")
            psi = float(_require(section, "psi", "q"))
            nq = len(ct_a)
            return QFilter(a=tuple(ct_a[i] / psi ** (nq - i) for i in range(nq)),
                           c=tuple(ct_c[i] / psi ** (nq - i) for i in range(len(ct_c))))
        raise ConfigError(
            f"q type '{kind}' has no explicit coefficients; run the design command first"
        )

    def design(self) -> DobDesign:
        nom_method, ctrl_method = self.methods()
        return DobDesign(family=self.family(), nominal_ct=self.nominal(),
                         controller_ct=self.controller(), nominal_method=nom_method,
                         controller_method=ctrl_method, q=self.q_filter(),
                         delta=self.delta)

    def simulation(self):
        section = _require(self.raw, "simulation", "top level")
        return {
            "horizon": float(_require(section, "horizon", "simulation")),
            "substeps": int(section.get("substeps", 20)),
            "blow_up": float(section.get("blow_up", 1e6)),
            "r": signal_from_spec(section.get("r")),
            "d": signal_from_spec(section.get("d")),
        }

    def contour_deltas(self) -> np.ndarray:
        section = _require(self.raw, "contour", "top level")
        if "deltas" in section:
            arr = np.asarray(_floats(section["deltas"], "contour.deltas"))
        else:
            lo = float(_require(section, "delta_min", "contour"))
            hi = float(_require(section, "delta_max", "contour"))
            pts = int(_require(section, "points", "contour"))
            arr = np.logspace(math.log10(hi), math.log10(lo), pts)
        if np.any(arr <= 0):
            raise ConfigError("contour deltas must be positive")
        return arr

    def freq_grid(self) -> np.ndarray:
        section = self.raw.get("freq")
        if section is None:
            return np.logspace(-2, 2, 200)
        lo = float(_require(section, "omega_min", "freq"))
        hi = float(_require(section, "omega_max", "freq"))
        pts = int(_require(section, "points", "freq"))
        if pts == 0:
            return np.empty(0)
        return np.logspace(math.log10(lo), math.log10(hi), pts)


def load_config(path) -> ToolConfig:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from None
    return ToolConfig(raw if raw is not None else {})
