"""Command-line front end.

Subcommands: ``discretize | check | design | contour | simulate | freq``.
All numerics live in the library; each command reads a validated config,
calls one library entry point, and writes deterministic reports/CSVs
(shortest round-trip float formatting, fixed row orders).

Exit codes: 0 ok/pass, 1 fail, 2 config error, 3 computation precondition
error, 4 inconclusive.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import design as design_mod
from . import dob, sim
from .config import load_config
from .discretize import DiscretizationMethod, classify_zeros, discretize_model
from .errors import ConfigError, ToolkitError
from .lti import Domain, RationalTransfer
from .polynomial import Tristate

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3
EXIT_INCONCLUSIVE = 4

_METHODS = {m.value: m for m in DiscretizationMethod}


def _fmt(x) -> str:
    return repr(float(x))


def _fmt_list(xs) -> str:
    return "[" + ", ".join(_fmt(x) for x in xs) + "]"


def _fmt_complex(z) -> str:
    return f"{_fmt(z.real)}{'+' if z.imag >= 0 else '-'}{_fmt(abs(z.imag))}j"


def _sorted_complex(arr):
    arr = np.asarray(arr, dtype=complex)
    return arr[np.lexsort((arr.imag, arr.real))]


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(path: Path, text: str, quiet: bool):
    path.write_text(text)
    if not quiet:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_discretize(args) -> int:
    cfg = load_config(args.config)
    delta = float(args.delta) if args.delta is not None else cfg.delta
    method = _METHODS[args.method] if args.method else cfg.methods()[0]
    tf_ct = cfg.nominal()
    model = discretize_model(tf_ct, method, delta)
    tf = model.transfer()
    lines = [
        f"method: {method.value}",
        f"delta: {_fmt(delta)}",
        f"relative_degree: {model.relative_degree}",
        f"num: {_fmt_list(tf.num.coeffs)}",
        f"den: {_fmt_list(tf.den.coeffs)}",
        "poles: " + ", ".join(_fmt_complex(p) for p in _sorted_complex(model.poles)),
    ]
    if method is DiscretizationMethod.ZOH:
        cls = classify_zeros(model, tf_ct, delta)
        lines.append("intrinsic_zeros: "
                     + ", ".join(_fmt_complex(z) for z in _sorted_complex(cls.intrinsic)))
        lines.append("sampling_zeros: "
                     + ", ".join(_fmt_complex(z) for z in _sorted_complex(cls.sampling)))
        lines.append(f"match_error: {_fmt(cls.match_error)}")
    else:
        lines.append("zeros: "
                     + ", ".join(_fmt_complex(z) for z in _sorted_complex(model.zeros)))
    _emit(_out_dir(args) / "discretize.txt", "\n".join(lines) + "\n", args.quiet)
    return EXIT_PASS


_VERDICT_EXIT = {Tristate.PASS: EXIT_PASS, Tristate.FAIL: EXIT_FAIL,
                 Tristate.INCONCLUSIVE: EXIT_INCONCLUSIVE}


def cmd_check(args) -> int:
    cfg = load_config(args.config)
    grid = int(args.grid_points) if args.grid_points else cfg.grid_points
    verdict = dob.theorem1_verdict(cfg.design(), grid_points=grid)
    lines = [
        f"item_a: {verdict.item_a.verdict.value} "
        f"(max real part {_fmt(verdict.item_a.value)}; {verdict.item_a.note})",
        f"item_b: {verdict.item_b.verdict.value} "
        f"(worst zero real part {_fmt(verdict.item_b.value)}; {verdict.item_b.note})",
        f"item_c: {verdict.item_c.verdict.value} "
        f"(worst fast-root modulus {_fmt(verdict.item_c.value)}; {verdict.item_c.note})",
        f"gain_grid_points: {verdict.grid_points}",
        f"overall: {verdict.overall.value}",
    ]
    _emit(_out_dir(args) / "check.txt", "\n".join(lines) + "\n", args.quiet)
    return _VERDICT_EXIT[verdict.overall]


def cmd_design(args) -> int:
    cfg = load_config(args.config)
    section = cfg.q_section()
    grid = int(args.grid_points) if args.grid_points else cfg.grid_points
    mode = args.mode or section.get("type")
    fam = cfg.family()
    if mode == "direct":
        res = design_mod.design_q_direct(
            fam, cfg.methods()[0], nq=int(section["nq"]),
            safety=float(section.get("safety", 0.8)),
            g_n=float(section["g_n"]) if "g_n" in section else None,
            grid_points=grid)
        q = res.q
        lines = [
            "mode: direct",
            f"k_bar: {_fmt(res.k_bar)}",
            f"a0: {_fmt(res.a0)}",
            f"g_n: {_fmt(res.g_n)}",
            f"worst_fast_root_modulus: {_fmt(res.worst_modulus)}",
            f"certified: {str(res.certified).lower()}",
        ]
    elif mode == "indirect":
        res = design_mod.design_q_indirect(
            section["ct_a"], section["ct_c"], float(section["psi"]), fam,
            g_n=float(section["g_n"]) if "g_n" in section else None,
            grid_points=grid)
        q = res.q
        lines = [
            "mode: indirect",
            f"psi: {_fmt(res.psi_ratio)}",
            f"ct_fast_hurwitz: {res.ct_fast_hurwitz.value}",
            f"induced_schur: {res.induced_schur.value}",
            f"worst_fast_root_modulus: {_fmt(res.worst_induced_modulus)}",
        ]
    else:
        raise ConfigError(f"design mode must be direct or indirect, got '{mode}'")
    lines += [
        f"q_a_basis: {_fmt_list(q.a)}",
        f"q_c_basis: {_fmt_list(q.c)}",
        f"q_num_z: {_fmt_list(q.numerator_z().coeffs)}",
        f"q_den_z: {_fmt_list(q.denominator_z().coeffs)}",
    ]
    _emit(_out_dir(args) / "design.txt", "\n".join(lines) + "\n", args.quiet)
    return EXIT_PASS


def cmd_contour(args) -> int:
    cfg = load_config(args.config)
    if args.deltas:
        deltas = np.asarray([float(x) for x in args.deltas.split(",")])
    else:
        deltas = cfg.contour_deltas()
    design = cfg.design()
    from .discretize import validate_sampling_period
    ok, margin = validate_sampling_period(design.family, float(deltas.max()))
    if not ok:
        sys.stderr.write(
            f"error: largest delta {deltas.max():g} fails the sampling-period bound "
            f"(margin {margin:.3g})\n")
        return EXIT_PRECONDITION
    member = cfg.member()
    result = dob.root_contour(design, member, deltas)
    rows = ["delta,kind,re_z,im_z,re_gamma,im_gamma,partition_ok"]
    for ref in _sorted_complex(result.fast_reference):
        rows.append(f"ref,fast,{_fmt(ref.real)},{_fmt(ref.imag)},,,")
    for ref in _sorted_complex(result.slow_reference):
        rows.append(f"ref,slow,,,{_fmt(ref.real)},{_fmt(ref.imag)},")
    for pt in result.points:
        okflag = str(pt.partition_ok).lower()
        for z in pt.fast_z:
            rows.append(f"{_fmt(pt.delta)},fast,{_fmt(z.real)},{_fmt(z.imag)},,,{okflag}")
        for z, gm in zip(pt.slow_z, pt.slow_gamma):
            rows.append(f"{_fmt(pt.delta)},slow,{_fmt(z.real)},{_fmt(z.imag)},"
                        f"{_fmt(gm.real)},{_fmt(gm.imag)},{okflag}")
    _emit(_out_dir(args) / "contour.csv", "\n".join(rows) + "\n", args.quiet)
    return EXIT_PASS


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    spec = cfg.simulation()
    if args.substeps:
        spec["substeps"] = int(args.substeps)
    trace = sim.simulate(cfg.design(), cfg.member(), r=spec["r"], d=spec["d"],
                         horizon=spec["horizon"], substeps=spec["substeps"],
                         blow_up=spec["blow_up"])
    out = _out_dir(args)
    sim.write_trace_csv(trace, out / "trace.csv")
    meta = dict(sorted(trace.metadata.items()))
    (out / "simulate_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    if not args.quiet:
        sys.stdout.write(f"samples: {trace.t.size}\n"
                         f"divergent: {str(trace.divergent).lower()}\n"
                         f"max_abs_y: {_fmt(trace.max_abs_y)}\n"
                         f"out_of_family: {str(meta['out_of_family']).lower()}\n")
    return EXIT_PASS


def cmd_freq(args) -> int:
    cfg = load_config(args.config)
    omegas = cfg.freq_grid()
    design = cfg.design()
    q_tf = design.q.transfer()
    delta = design.delta

    # sensitivity 1/(1 + P (Q (P - Pn) + Pn (1 + P C)) ... evaluated pointwise
    member = cfg.member()
    pd = discretize_model(member, DiscretizationMethod.ZOH, delta).transfer()
    pn = discretize_model(design.nominal_ct, design.nominal_method, delta).transfer()
    cd = discretize_model(design.controller_ct, design.controller_method, delta).transfer()

    rows = ["transfer,omega,re,im,mag_db,phase_deg,flag"]
    qvals = sim.frequency_response(q_tf, omegas, delta=delta)
    zs = np.exp(1j * omegas * delta)
    for name, vals in (("q", qvals), ("sensitivity", _sensitivity(zs, pd, pn, cd, q_tf))):
        for w, v in zip(omegas, vals):
            flag = "pole_proximity" if not np.isfinite(v) else ""
            mag = 20 * np.log10(abs(v)) if v != 0 and np.isfinite(v) else float("-inf")
            rows.append(f"{name},{_fmt(w)},{_fmt(v.real)},{_fmt(v.imag)},"
                        f"{_fmt(mag)},{_fmt(np.degrees(np.angle(v)))},{flag}")
    _emit(_out_dir(args) / "freq.csv", "\n".join(rows) + "\n", args.quiet)
    return EXIT_PASS


def _sensitivity(zs, pd, pn, cd, q_tf):
    """Sampled sensitivity (r - y over r) of the observer-compensated loop."""
    out = np.empty(zs.size, dtype=complex)
    for i, z in enumerate(zs):
        p, n, c, q = pd(z), pn(z), cd(z), q_tf(z)
        den = q * (p - n) + n * (1.0 + p * c)
        out[i] = (n * (1.0 - q)) / den
    return out


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtdob",
        description="Analysis and design of digital disturbance-observer loops",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    handlers = {
        "discretize": cmd_discretize,
        "check": cmd_check,
        "design": cmd_design,
        "contour": cmd_contour,
        "simulate": cmd_simulate,
        "freq": cmd_freq,
    }
    for name, fn in handlers.items():
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the YAML config")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--quiet", action="store_true", help="suppress stdout copies")
        p.set_defaults(handler=fn)
    sub.choices["discretize"].add_argument("--method", choices=sorted(_METHODS))
    sub.choices["discretize"].add_argument("--delta", type=float)
    sub.choices["check"].add_argument("--grid-points", dest="grid_points", type=int)
    sub.choices["design"].add_argument("--mode", choices=["direct", "indirect"])
    sub.choices["design"].add_argument("--grid-points", dest="grid_points", type=int)
    sub.choices["contour"].add_argument("--deltas", help="comma-separated list")
    sub.choices["simulate"].add_argument("--substeps", type=int)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except ToolkitError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
