"""Command-line front end.

Usage::

    sprify check system.json [--method spectral|frequency|both] [--json]
    sprify synth system.json [--q-scale Q] [--out controller.json] [--json]
    sprify verify system.json controller.json [--grid-points N] [--json]
    sprify eval system.json --s "1+2i" [--inverse] [--json]

Exit codes: 0 affirmative, 1 negative, 2 error.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .descriptor import DescriptorSystem, eval_G, eval_G_inverse
from .errors import DimensionError, InfeasibleError, InvalidInputError, PoleError, SprifyError
from .frequency import frequency_sprifiability
from .linalg import DEFAULT_TOL_RANK, is_invertible
from .spectral import DEFAULT_TOL_STAB, spectral_sprifiability
from .synthesis import synthesize
from .verify import default_grid, spr_structural_checks, verify_closed_loop

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_ERROR = 2


class CliError(Exception):
    """Bad input detected by the front end; reported with exit code 2."""


# --- serialization ---------------------------------------------------------

def encode(obj):
    """JSON-ready copy of `obj`: arrays become nested lists and complex
    numbers become ``{"re": ..., "im": ...}``."""
    if isinstance(obj, dict):
        return {k: encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _matrix(data, key, path):
    if key not in data:
        raise CliError(f"{path}: missing key {key!r}")
    try:
        arr = np.array(data[key], dtype=float)
    except (TypeError, ValueError):
        raise CliError(f"{path}: {key} must be a rectangular array of numbers") from None
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise CliError(f"{path}: {key} must be a 2-D array")
    if not np.all(np.isfinite(arr)):
        raise CliError(f"{path}: {key} has non-finite entries")
    return arr


def _read_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise CliError(f"{path}: expected a JSON object")
    return data


def load_system(path):
    """Read a system file: ``{"n", "m", "E", "A", "B", "C", "D"}`` with
    row-major arrays (``n``, ``m`` optional but checked when present)."""
    data = _read_json(path)
    mats = {k: _matrix(data, k, path) for k in "EABCD"}
    try:
        sys_ = DescriptorSystem(**mats)
    except (DimensionError, InvalidInputError) as exc:
        raise CliError(f"{path}: {exc}") from None
    for key, val in (("n", sys_.n), ("m", sys_.m)):
        if key in data and data[key] != val:
            raise CliError(f"{path}: {key}={data[key]} does not match the matrices ({val})")
    return sys_


def system_to_dict(sys_):
    return {"n": sys_.n, "m": sys_.m, **{k: getattr(sys_, k).tolist() for k in "EABCD"}}


def load_controller(path, m):
    data = _read_json(path)
    K = _matrix(data, "K", path)
    L = _matrix(data, "L", path)
    if K.shape != (m, m) or L.shape != (m, m):
        raise CliError(f"{path}: K and L must be {m}x{m} to match the system, "
                       f"got {K.shape} and {L.shape}")
    if not is_invertible(L):
        raise CliError(f"{path}: L must be invertible")
    return K, L


def controller_to_dict(g):
    dec = g.decomposition
    inter = {"N": g.N, "M": g.M, "kappa": g.kappa, "margin": g.margin}
    if dec is not None:
        inter.update(H1=dec.H1, D2=dec.D2)
        if dec.has_R:
            inter.update(A2=dec.A2, B2=dec.B2, C2=dec.C2)
    if g.P is not None:
        inter.update(P=g.P, Q=g.Q)
    return encode({"K": g.K, "L": g.L, "intermediates": inter})


def parse_complex(text):
    """Parse ``"a+bi"``, ``"a-bi"``, ``"a"``, ``"bi"`` (``j`` also accepted)."""
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        z = complex(t)
    except ValueError:
        raise CliError(f"cannot parse complex number {text!r} (expected a+bi)") from None
    if not np.isfinite(z):
        raise CliError(f"complex number must be finite, got {text!r}")
    return z


# --- output ----------------------------------------------------------------

class Printer:
    def __init__(self, stream=None):
        self.stream = sys.stdout if stream is None else stream
        self.color = (os.environ.get("NO_COLOR") is None
                      and hasattr(self.stream, "isatty") and self.stream.isatty())

    def verdict(self, ok, yes, no):
        text = yes if ok else no
        if self.color:
            text = f"\033[{32 if ok else 31}m{text}\033[0m"
        self.line(text)

    def line(self, text=""):
        print(text, file=self.stream)


def _fmt_complex(z):
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:.10g}"
    return f"{z.real:.10g}{z.imag:+.10g}i"


def _fmt_list(values):
    return "[" + ", ".join(_fmt_complex(v) for v in values) + "]"


def _fmt_matrix(M):
    rows = ["  [" + ", ".join(_fmt_complex(v) for v in row) + "]" for row in np.atleast_2d(M)]
    return "\n".join(rows)


def _emit_json(obj):
    print(json.dumps(encode(obj), indent=2))


# --- commands --------------------------------------------------------------

def _spectral_json(r):
    return {"verdict": r.sprifiable, "method": r.method,
            "eigenvalues": list(r.eigenvalues_of_calAinv_calE), "zero_index": r.zero_index,
            "calA_invertible": r.calA_invertible,
            "rank_conditions_hold": r.rank_conditions_hold, "reasons": r.reasons}


def _frequency_json(r):
    return {"verdict": r.sprifiable, "pencil_eigenvalues": list(r.pencil_eigs),
            "classification": r.classification, "ginv_infinity_order": r.ginv_infinity_order,
            "infinity_order_method": r.order_method,
            "uncontrollable_bad": r.uncontrollable_bad, "unobservable_bad": r.unobservable_bad,
            "rank_conditions_hold": r.rank_conditions_hold, "reasons": r.reasons}


def cmd_check(args):
    sys_ = load_system(args.system)
    out = Printer()
    spectral = freq = None
    if args.method in ("spectral", "both"):
        spectral = spectral_sprifiability(sys_, args.tol_rank, args.tol_stab)
    if args.method in ("frequency", "both"):
        freq = frequency_sprifiability(sys_, args.tol_rank, args.tol_stab)

    if spectral is not None and freq is not None:
        if spectral.sprifiable != freq.sprifiable and spectral.rank_conditions_hold:
            print("error: spectral and frequency verdicts disagree "
                  f"(spectral={spectral.sprifiable}, frequency={freq.sprifiable}); "
                  "try adjusting --tol-rank/--tol-stab", file=sys.stderr)
            return EXIT_ERROR
        verdict = freq.sprifiable
    else:
        verdict = (spectral or freq).sprifiable

    if args.json:
        doc = {"verdict": verdict, "method": args.method}
        if spectral is not None:
            doc["spectral"] = _spectral_json(spectral)
            doc.update(eigenvalues=doc["spectral"]["eigenvalues"], zero_index=spectral.zero_index)
        if freq is not None:
            doc["frequency"] = _frequency_json(freq)
            doc.update(ginv_infinity_order=freq.ginv_infinity_order,
                       classification=freq.classification)
        doc["reasons"] = (spectral.reasons if spectral else []) + (freq.reasons if freq else [])
        _emit_json(doc)
    else:
        out.verdict(verdict, "SPRifiable", "not SPRifiable")
        if spectral is not None:
            out.line(f"spectral: {'yes' if spectral.sprifiable else 'no'} ({spectral.method})")
            out.line(f"  eigenvalues of calA^-1 calE: {_fmt_list(spectral.eigenvalues_of_calAinv_calE)}")
            out.line(f"  index of zero: {spectral.zero_index}")
            for r in spectral.reasons:
                out.line(f"  reason: {r}")
        if freq is not None:
            out.line(f"frequency: {'yes' if freq.sprifiable else 'no'}")
            labelled = ", ".join(f"{_fmt_complex(l)} ({c})"
                                 for l, c in zip(freq.pencil_eigs, freq.classification))
            out.line(f"  zero-output eigenvalues: {labelled or 'none'}")
            out.line(f"  order of infinity as a pole of G^-1: {freq.ginv_infinity_order}")
            for r in freq.reasons:
                out.line(f"  reason: {r}")
    return EXIT_OK if verdict else EXIT_NEGATIVE


def cmd_synth(args):
    sys_ = load_system(args.system)
    if args.q_scale is not None and not args.q_scale > 0:
        raise CliError("--q-scale must be positive")
    try:
        g = synthesize(sys_, Q=args.q_scale, tol_rank=args.tol_rank, tol_stab=args.tol_stab)
    except InfeasibleError as exc:
        if args.json:
            _emit_json({"verdict": False, "reasons": [str(exc)]})
        else:
            print(f"infeasible: {exc}")
        return EXIT_NEGATIVE
    doc = controller_to_dict(g)
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    if args.json or not args.out:
        _emit_json({"verdict": True, **doc})
    else:
        out = Printer()
        out.verdict(True, "controller found", "")
        out.line(f"K =\n{_fmt_matrix(g.K)}")
        out.line(f"L =\n{_fmt_matrix(g.L)}")
        out.line(f"written to {args.out}")
    return EXIT_OK


def cmd_verify(args):
    sys_ = load_system(args.system)
    K, L = load_controller(args.controller, sys_.m)
    try:
        grid = default_grid(args.grid_points, args.omega_min, args.omega_max)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    res = verify_closed_loop(sys_, (K, L), grid, args.tol_stab)
    cert = res.certificate
    findings = spr_structural_checks(res.closed_loop, cert)
    ok = res.passed and not findings
    if args.json:
        _emit_json({
            "verdict": ok,
            "K": K, "L": L,
            "stable": res.stable,
            "closed_loop_eigenvalues": list(res.closed_loop_eigenvalues),
            "certificate": {
                "pass": cert.passed, "epsilon": cert.epsilon, "pole_margin": cert.pole_margin,
                "min_hermitian_eig": cert.min_hermitian_eig, "worst_omega": cert.worst_omega,
                "grid_points": int(cert.grid.omegas.size), "caveat": cert.caveat,
            },
            "structural_findings": findings,
            "reasons": cert.reasons,
        })
    else:
        out = Printer()
        out.verdict(ok, "closed loop is stable and SPR", "closed loop is NOT stable and SPR")
        out.line(f"closed-loop eigenvalues: {_fmt_list(res.closed_loop_eigenvalues)}")
        out.line(f"pole margin: {cert.pole_margin:.10g}")
        out.line(f"min Hermitian eigenvalue: {cert.min_hermitian_eig:.10g} at w = {cert.worst_omega:.6g}")
        out.line(f"epsilon: {cert.epsilon:.6g} ({cert.caveat}, {cert.grid.omegas.size} points)")
        for r in cert.reasons + findings:
            out.line(f"reason: {r}")
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_eval(args):
    sys_ = load_system(args.system)
    s = parse_complex(args.s)
    try:
        val = eval_G_inverse(sys_, s) if args.inverse else eval_G(sys_, s)
    except PoleError:
        what = "G^-1" if args.inverse else "G"
        print(f"pole near s = {_fmt_complex(s)} ({what} is not defined there)")
        return EXIT_NEGATIVE
    if np.all(np.abs(val.imag) == 0):
        val = val.real
    if args.json:
        _emit_json({"s": s, "inverse": args.inverse, "value": val})
    else:
        print(_fmt_matrix(val))
    return EXIT_OK


# --- parser ----------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-rank", type=float, default=DEFAULT_TOL_RANK,
                        help="relative rank tolerance (default %(default)g)")
    common.add_argument("--tol-stab", type=float, default=DEFAULT_TOL_STAB,
                        help="eigenvalues need Re < -tol-stab (default %(default)g)")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    p = argparse.ArgumentParser(
        prog="sprify",
        description="Static output feedback making a descriptor system stable and SPR.",
        epilog="Exit codes: 0 affirmative, 1 negative, 2 error. Set NO_COLOR to disable color.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="decide SPRifiability")
    c.add_argument("system", help="system JSON file")
    c.add_argument("--method", choices=("spectral", "frequency", "both"), default="both")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("synth", parents=[common], help="compute gains K and L")
    s.add_argument("system")
    s.add_argument("--q-scale", type=float, default=None,
                   help="use Q = q I in the Lyapunov equation (default identity)")
    s.add_argument("--out", help="write the controller JSON here instead of stdout")
    s.set_defaults(func=cmd_synth)

    v = sub.add_parser("verify", parents=[common], help="certify a closed loop")
    v.add_argument("system")
    v.add_argument("controller", help="controller JSON with K and L")
    v.add_argument("--grid-points", type=int, default=481,
                   help="log-spaced frequencies besides w = 0 (default %(default)s)")
    v.add_argument("--omega-min", type=float, default=1e-6)
    v.add_argument("--omega-max", type=float, default=1e6)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("eval", parents=[common], help="evaluate G(s) or G(s)^-1")
    e.add_argument("system")
    e.add_argument("--s", required=True, help='complex point, e.g. "1+2i", "-3", "0.5i"')
    e.add_argument("--inverse", action="store_true", help="evaluate G^-1 instead of G")
    e.set_defaults(func=cmd_eval)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (CliError, SprifyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
