"""Command-line interface: design, compile, and validate renormalization circuits.

Verbs
-----
design    design one filter pair against a dispersion, write pair/report JSON
sweep     design a (K, L) grid and emit a quality CSV
circuit   factor a pair JSON into a binary circuit JSON (optionally verify)
simulate  build a layer stack, compare MERA vs exact covariance, write reports
cascade   sample scaling/wavelet functions on a dyadic grid as CSV
spectrum  print superoperator and descendant eigenvalues with matched dimensions
flow      print the renormalization flow of a dispersion level by level

Exit codes: 0 success, 1 usage error, 2 numerical failure (machine-readable
JSON payload on stderr).  Outputs are deterministic: identical arguments
produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .circuit import compose, composed_wavelets, decompose, to_lattice_symplectic
from .continuum import (cascade, descendant_spectrum, scaling_function,
                        superoperator_spectrum, wavelet_function)
from .design import DesignParams, design_pair, epsilon_of
from .dispersion import flow, flow_report, parse_dispersion
from .errors import WavergError
from .filters import FilterPair
from .mera import (LayerStack, error_report, exact_p_profile, exact_q_profile,
                   mera_covariance)

USAGE_EXIT = 1
NUMERICAL_EXIT = 2


def _fmt(x: float) -> str:
    """Shortest round-trip decimal; fixed across runs for determinism."""
    return format(float(x), ".17g")


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on bad usage; the contract reserves 2 for
    numerical failures, so remap usage errors to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


class UsageError(Exception):
    pass


def _parse_range(text: str) -> list[int]:
    """'1..4' -> [1, 2, 3, 4]; '3' -> [3]; '1,2,4' -> [1, 2, 4]."""
    out: list[int] = []
    for part in text.split(","):
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return sorted(set(out))


def _design_params(args, K: int, L: int) -> DesignParams:
    kwargs = {}
    if args.grid is not None:
        kwargs["grid_size"] = args.grid
    if args.tol is not None:
        kwargs["tol_positivity"] = args.tol
    return DesignParams(K, L, **kwargs)


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------

def cmd_design(args) -> int:
    d = parse_dispersion(args.dispersion)
    pair, report = design_pair(d, _design_params(args, args.K, args.L))
    eps = epsilon_of(pair, d)
    if args.out:
        pair.save(args.out)
    if args.report:
        payload = report.to_json()
        payload["epsilon"] = eps
        with open(args.report, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(f"designed K={args.K} L={args.L} support={pair.support_length()} "
          f"epsilon={_fmt(eps)} pr_residual={_fmt(pair.pr_residual)}")
    return 0


def cmd_sweep(args) -> int:
    d = parse_dispersion(args.dispersion)
    if args.sweep:
        parts = dict(p.split("=") for p in args.sweep.split(","))
        Ks, Ls = _parse_range(parts["K"]), _parse_range(parts["L"])
    else:
        Ks, Ls = _parse_range(args.K), _parse_range(args.L)
    lines = ["K,L,epsilon,pr_residual,stability_max_abs_eig,positivity_min"]
    for K in Ks:
        for L in Ls:
            try:
                pair, report = design_pair(d, _design_params(args, K, L))
            except WavergError as err:
                print(json.dumps(err.payload() | {"K": K, "L": L},
                                 sort_keys=True), file=sys.stderr)
                lines.append(f"{K},{L},nan,nan,nan,nan")
                continue
            lines.append(",".join([str(K), str(L),
                                   _fmt(epsilon_of(pair, d)),
                                   _fmt(report.pr_residual),
                                   _fmt(report.stability_max_abs),
                                   _fmt(report.positivity_min)]))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_circuit(args) -> int:
    pair = FilterPair.load(getattr(args, "in"))
    circ = decompose(pair)
    if args.out:
        circ.save(args.out)
    print(f"depth={circ.depth} shift={circ.shift}")
    if args.verify:
        rec = compose(circ)
        res = 0.0
        for orig, new in ((pair.g_s, rec.g_s.shift(-circ.shift)),
                          (pair.h_s, rec.h_s.shift(-circ.shift))):
            lo = min(orig.support[0], new.support[0])
            hi = max(orig.support[1], new.support[1])
            res = max(res, max(abs(orig[n] - new[n])
                               for n in range(lo, hi + 1)))
        g_w, h_w = composed_wavelets(circ)
        A, B = to_lattice_symplectic(circ, max(64, 4 * circ.depth))
        sym = float(np.max(np.abs(A.matrix @ B.matrix.T
                                  - np.eye(A.matrix.shape[0]))))
        print(f"round_trip_residual={_fmt(res)} symplectic_residual={_fmt(sym)}")
    return 0


def cmd_simulate(args) -> int:
    layers, N = args.layers, args.N
    if layers < 1:
        raise UsageError("--layers must be >= 1")
    if N % (1 << layers) != 0:
        raise UsageError(
            f"N = {N} must be divisible by 2^layers = {1 << layers}")
    d = parse_dispersion(args.dispersion)
    pair = FilterPair.load(args.pair)
    levels = flow(d, layers - 1)
    squeezes = [float(np.sqrt(dl.omega_pi)) for dl in levels]
    eps = [epsilon_of(pair, dl) for dl in levels]
    stack = LayerStack((pair,) * layers, tuple(squeezes), d,
                       strategy="fixed_after:0", epsilons=tuple(eps))
    quad = args.quad_points
    rep = error_report(stack, N, quad_points=quad)
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(rep.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    if args.csv:
        mera = mera_covariance(stack, N)
        ms = np.arange(1, min(args.csv_range, N // 4) + 1)
        p_prof, _ = exact_p_profile(d, ms.astype(float), quad)
        q_prof, _ = exact_q_profile(d, ms.astype(float), quad, regulated=True)
        lines = ["n,m,exact_p,mera_p,exact_q_reg,mera_q_reg,abs_err_p,abs_err_q"]
        for i, m in enumerate(ms):
            mera_p = mera.p_block[0, m]
            mera_q = mera.q_block[0, m] - mera.q_block[0, 0]
            lines.append(",".join(
                ["0", str(int(m)), _fmt(p_prof[i]), _fmt(mera_p),
                 _fmt(q_prof[i]), _fmt(mera_q),
                 _fmt(abs(p_prof[i] - mera_p)),
                 _fmt(abs(q_prof[i] - mera_q))]))
        with open(args.csv, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    print(f"delta_p={_fmt(rep.delta_p)} bound_p={_fmt(rep.bound_p)} "
          f"dominated={rep.dominated()}")
    return 0


def cmd_cascade(args) -> int:
    pair = FilterPair.load(args.pair)
    J = args.J
    funcs = {
        "phi_g": scaling_function(pair, "g", J),
        "phi_h": scaling_function(pair, "h", J),
        "psi_g": wavelet_function(pair, "g", J),
        "psi_h": wavelet_function(pair, "h", J),
    }
    lo = min(f.support[0] for f in funcs.values())
    hi = max(f.support[1] for f in funcs.values())
    n = int(np.rint((hi - lo) * 2 ** J)) + 1
    x = lo + np.arange(n) * 0.5 ** J
    cols = {name: f.at(x) for name, f in funcs.items()}
    lines = ["x,phi_g,phi_h,psi_g,psi_h"]
    for i in range(n):
        lines.append(",".join([_fmt(x[i])] + [_fmt(cols[c][i]) for c in
                                              ("phi_g", "phi_h", "psi_g", "psi_h")]))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _matched(eigs: np.ndarray, targets: dict[str, float],
             tol: float = 1e-6) -> list[str]:
    out = []
    for label, want in targets.items():
        close = eigs[np.abs(eigs - want) < tol]
        if close.size:
            best = close[np.argmin(np.abs(close - want))]
            out.append(f"  eigenvalue {_fmt(best)} ~ {_fmt(want)}"
                       f" -> scaling dimension {label}")
    return out


def cmd_spectrum(args) -> int:
    pair = FilterPair.load(args.pair)
    ephi, epi = superoperator_spectrum(pair)
    rphi = np.sort(np.real(ephi[np.abs(np.imag(ephi)) < 1e-8]))[::-1]
    rpi = np.sort(np.real(epi[np.abs(np.imag(epi)) < 1e-8]))[::-1]
    print("phi-sector eigenvalues (top 6):",
          " ".join(_fmt(v) for v in rphi[:6]))
    print("\n".join(_matched(rphi, {"0": 1.0})))
    print("pi-sector eigenvalues (top 6):",
          " ".join(_fmt(v) for v in rpi[:6]))
    print("\n".join(_matched(rpi, {"1": 0.5})))
    if args.K:
        desc = descendant_spectrum(pair, args.K)
        print("descendant eigenvalues (top 8):",
              " ".join(_fmt(v) for v in desc[:8]))
        targets = {str(l): 0.5 ** l for l in range(args.K + 1)}
        print("\n".join(_matched(desc, targets)))
    return 0


def cmd_flow(args) -> int:
    d = parse_dispersion(args.dispersion)
    rep = flow_report(d, args.levels, grid=args.grid or 4096)
    print("level,omega_pi,omega_max,fitted_mass")
    for lv in rep.levels:
        mass = "" if lv.mass is None else _fmt(lv.mass)
        print(f"{lv.level},{_fmt(lv.omega_pi)},{_fmt(lv.omega_max)},{mass}")
    print(f"omega_bound={_fmt(rep.omega_bound)}")
    return 0


# ---------------------------------------------------------------------------
# wiring
# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    top = _Parser(prog="waverg", description=__doc__,
                  formatter_class=argparse.RawDescriptionHelpFormatter)
    common = _Parser(add_help=False)
    common.add_argument("--grid", type=int, default=None,
                        help="frequency grid size for design and flow fits")
    common.add_argument("--tol", type=float, default=None,
                        help="positivity tolerance for spectral factorization")
    common.add_argument("--quad-points", type=int, default=1 << 16,
                        dest="quad_points",
                        help="base quadrature points (one Richardson doubling)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads for compiled kernels")
    common.add_argument("--json-errors", action="store_true",
                        help="emit usage errors as JSON on stderr too")

    sub = top.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("design", parents=[common],
                       help="design one filter pair")
    p.add_argument("--dispersion", default="harmonic:m=0")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--out", default=None, help="pair JSON path")
    p.add_argument("--report", default=None, help="design report JSON path")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("sweep", parents=[common],
                       help="design a (K, L) grid, emit quality CSV")
    p.add_argument("--dispersion", default="harmonic:m=0")
    p.add_argument("--K", default="1..3", help="range, e.g. 1..3")
    p.add_argument("--L", default="1..5", help="range, e.g. 1..5")
    p.add_argument("--sweep", default=None, help="combined form K=1..3,L=1..5")
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("circuit", parents=[common],
                       help="factor a pair into a binary circuit")
    p.add_argument("--in", required=True, help="pair JSON path")
    p.add_argument("--out", default=None, help="circuit JSON path")
    p.add_argument("--verify", action="store_true",
                   help="recompose and print the round-trip residual")
    p.set_defaults(func=cmd_circuit)

    p = sub.add_parser("simulate", parents=[common],
                       help="MERA vs exact covariance with error bounds")
    p.add_argument("--pair", required=True, help="pair JSON path")
    p.add_argument("--layers", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--dispersion", default="harmonic:m=0")
    p.add_argument("--report", default=None, help="error report JSON path")
    p.add_argument("--csv", default=None, help="correlation CSV path")
    p.add_argument("--csv-range", type=int, default=32, dest="csv_range",
                   help="largest offset m in the correlation CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("cascade", parents=[common],
                       help="sample scaling/wavelet functions as CSV")
    p.add_argument("--pair", required=True, help="pair JSON path")
    p.add_argument("--J", type=int, default=12, help="dyadic grid depth")
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.set_defaults(func=cmd_cascade)

    p = sub.add_parser("spectrum", parents=[common],
                       help="superoperator and descendant eigenvalues")
    p.add_argument("--pair", required=True, help="pair JSON path")
    p.add_argument("--K", type=int, default=None,
                   help="vanishing moments for the descendant spectrum")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("flow", parents=[common],
                       help="renormalization flow of a dispersion")
    p.add_argument("--dispersion", default="harmonic:m=0")
    p.add_argument("--levels", type=int, default=5)
    p.set_defaults(func=cmd_flow)

    return top


def _set_threads(n: int | None):
    if n is None:
        return
    try:
        import numba
        numba.set_num_threads(n)
    except ImportError:
        pass


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE_EXIT
    _set_threads(args.threads)
    try:
        return args.func(args)
    except UsageError as err:
        if args.json_errors:
            print(json.dumps({"error": "UsageError", "message": str(err)},
                             sort_keys=True), file=sys.stderr)
        else:
            print(f"error: {err}", file=sys.stderr)
        return USAGE_EXIT
    except (FileNotFoundError, ValueError) as err:
        if args.json_errors:
            print(json.dumps({"error": type(err).__name__,
                              "message": str(err)}, sort_keys=True),
                  file=sys.stderr)
        else:
            print(f"error: {err}", file=sys.stderr)
        return USAGE_EXIT
    except WavergError as err:
        print(json.dumps(err.payload(), sort_keys=True), file=sys.stderr)
        return NUMERICAL_EXIT


if __name__ == "__main__":
    sys.exit(main())
