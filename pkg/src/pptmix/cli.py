"""Command-line interface.

Exit codes for ``detect`` and ``bisep``: 0 detected / certified, 1 not,
2 error.  Qubit indices on the command line are 1-based.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from typing import Callable, Sequence

import numpy as np

from . import bisep, cluster, io, sdp, states, witness
from .linalg import PauliString

EXIT_DETECTED = 0
EXIT_NOT_DETECTED = 1
EXIT_ERROR = 2

log = logging.getLogger("pptmix")

NAMED_STATES: dict[str, Callable[[], np.ndarray]] = {
    "ghz3": lambda: states.ghz(3),
    "ghz4": lambda: states.ghz(4),
    "w3": lambda: states.w_state(3),
    "w4": lambda: states.w_state(4),
    "cl4": lambda: states.linear_cluster(4)[0],
    "dicke24": lambda: states.dicke(4, 2),
    "singlet4": states.singlet4,
}

# published white-noise tolerances of the fully decomposable witnesses
TABLE1 = [
    ("GHZ3", "ghz3", 0.571),
    ("GHZ4", "ghz4", 0.533),
    ("W3", "w3", 0.521),
    ("W4", "w4", 0.526),
    ("Cl4", "cl4", 0.615),
    ("D24", "dicke24", 0.539),
    ("Psi_S4", "singlet4", 0.553),
]
TABLE1_TOL = 1e-3


class CliError(Exception):
    pass


def _solver_settings(args) -> sdp.Settings:
    return sdp.Settings(max_iterations=args.max_iterations)


def _observable_basis(args, n: int) -> witness.ObservableBasis | None:
    if getattr(args, "dicke_stage", None):
        return witness.dicke_stage_basis(args.dicke_stage)
    if getattr(args, "observables", None):
        letters = io.read_observables(args.observables)
        basis = witness.ObservableBasis([PauliString(x) for x in letters])
        if getattr(args, "closure", False):
            closed = []
            for x in letters:
                closed.extend(witness.measurement_setting_closure(x) if "I" not in x else [PauliString(x)])
            basis = witness.ObservableBasis(closed)
        if basis.n != n:
            raise CliError(f"observables act on {basis.n} qubits, state has {n}")
        return basis
    return None


def _pure_state(spec: str) -> np.ndarray:
    key = spec.lower()
    if key in NAMED_STATES:
        return NAMED_STATES[key]()
    sf = io.read_state(spec, validate=True)
    rho = sf.matrix
    vals, vecs = np.linalg.eigh(rho)
    if vals[-1] < 1 - 1e-9:
        raise CliError(f"{spec} is not a pure state (largest eigenvalue {vals[-1]:.6f})")
    return vecs[:, -1]


# -- commands -------------------------------------------------------------------------


def cmd_state(args) -> int:
    psi = NAMED_STATES[args.name]()
    rho = states.white_noise_mix(psi, args.noise)
    io.write_state(args.out, rho, {"state": args.name, "noise": repr(args.noise)})
    print(f"wrote {args.name} with noise {args.noise} to {args.out}")
    return 0


def cmd_detect(args) -> int:
    sf = io.read_state(args.state)
    n = len(sf.dims)
    mode = witness.Mode(args.mode)
    basis = _observable_basis(args, n)
    if mode is witness.Mode.RESTRICTED and basis is None:
        raise CliError("restricted mode needs --observables or --dicke-stage")
    res = witness.detect(sf.matrix, mode, basis=basis, all_subsets=args.all_subsets, settings=_solver_settings(args))
    print(f"optimal value  {res.optimal_value:+.9f}")
    print(f"verdict        {res.verdict.value}")
    rep = res.report
    print(
        f"certificate    {'verified' if rep.passed else 'FAILED'} "
        f"(residual {rep.decomposition_residual:.1e}, min eig P {rep.min_eig_p:.1e}, Q {rep.min_eig_q:.1e})"
    )
    if args.out:
        wf = io.witness_file(
            res.certificate.w,
            mode.value,
            res.certificate,
            {
                "solver": "pptmix.sdp",
                "gap_tol": sdp.Settings().gap_tol,
                "feas_tol": sdp.Settings().feas_tol,
                "iterations": res.solution.iterations,
                "state": str(args.state),
            },
        )
        io.write_witness(args.out, wf)
        print(f"witness written to {args.out}")
    if not rep.passed:
        raise CliError("certificate failed verification: " + "; ".join(rep.failures))
    return EXIT_DETECTED if res.detected else EXIT_NOT_DETECTED


def cmd_tolerance(args) -> int:
    psi = _pure_state(args.state)
    n = states.qubit_count(psi)
    mode = witness.Mode(args.mode)
    basis = _observable_basis(args, n)
    if mode is witness.Mode.RESTRICTED and basis is None:
        raise CliError("restricted mode needs --observables or --dicke-stage")
    t0 = time.perf_counter()
    if args.method == "linear":
        p = witness.linear_tolerance(psi, mode, basis=basis, settings=_solver_settings(args))
        print(f"p_tol = {p:.3f}  (exact {p:.6f}, single solve, {time.perf_counter() - t0:.1f} s)")
    else:
        res = witness.tolerance_search(psi, mode, basis=basis, width=args.width, settings=_solver_settings(args))
        print(
            f"p_tol = {res.value:.3f}  (bracket [{res.lower:.5f}, {res.upper:.5f}], "
            f"{res.evaluations} solves, {time.perf_counter() - t0:.1f} s)"
        )
    return 0


def _parse_bset(text: str | None, n: int) -> cluster.BSet:
    if not text:
        return cluster.default_bset(n)
    try:
        one_based = [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise CliError(f"--bset expects comma-separated qubit numbers, got {text!r}") from None
    return cluster.BSet(n, tuple(q - 1 for q in one_based))


def cmd_cluster_witness(args) -> int:
    n = args.n
    if n <= 3:
        raise CliError("the cluster construction needs n >= 4 (undefined for three or fewer qubits)")
    b = _parse_bset(args.bset, n)
    w = cluster.build_cluster_witness(n, b)
    shown = w
    if args.frame == "zz":
        u = cluster.end_hadamards(n)
        shown = u @ w @ u
    terms = io.pauli_terms(shown)
    print(f"B = {{{', '.join(str(q + 1) for q in b.members)}}}  ({len(terms)} Pauli terms, frame {args.frame})")
    if args.out:
        io.write_witness(
            args.out, io.WitnessFile(n, "cluster", terms, None, {"bset": [q + 1 for q in b.members], "frame": args.frame})
        )
        print(f"witness written to {args.out}")
    else:
        for k, v in terms:
            print(f"  {v:+.6f}  {k}")
    tol = cluster.noise_tolerance_exact(n)
    print(f"white-noise tolerance {float(tol):.6f} = {tol}")
    if args.verify:
        rep = cluster.verify_full_decomposability(w, n, b, jobs=args.jobs)
        print(rep.summary())
        print(f"worst eigenvalue margin: Q_M {rep.worst_q:.3e}, P_M {rep.worst_p:.3e}")
        if not rep.passed:
            bad = ", ".join(m.label() for m in rep.failures())
            print(f"failing cuts: {bad}")
            return EXIT_NOT_DETECTED
    return 0


def cmd_monotone(args) -> int:
    sf = io.read_state(args.state)
    value = witness.gme_negativity(sf.matrix, settings=_solver_settings(args))
    print(f"{value:.6f}")
    return 0


def cmd_volume(args) -> int:
    t0 = time.perf_counter()
    est = witness.volume_estimate(args.samples, args.measure, args.mode, seed=args.seed, jobs=args.jobs)
    lo, hi = est.interval()
    print(
        f"{est.measure} {est.mode.value}: {est.detected}/{est.samples} detected, "
        f"fraction {100 * est.fraction:.2f}% +- {100 * est.stderr:.2f}% (95% CI [{100 * lo:.2f}%, {100 * hi:.2f}%]) "
        f"seed {est.seed}, {time.perf_counter() - t0:.0f} s"
    )
    return 0


def cmd_bisep(args) -> int:
    sf = io.read_state(args.state)
    if len(sf.dims) != 3:
        raise CliError("biseparability certificates are implemented for three qubits")
    dec = bisep.certify_biseparable_sym(sf.matrix, settings=_solver_settings(args))
    if dec is None:
        print("no symmetric-subspace decomposition found (inconclusive)")
        return EXIT_NOT_DETECTED
    rep = dec.verify()
    print(f"biseparable: weights {', '.join(f'{p.weight:.4f}' for p in dec.parts)}; margin {dec.margin:.2e}")
    print(f"reconstruction error {rep.reconstruction_error:.1e}, min PPT eigenvalue {rep.min_ppt_eig:.1e}")
    if args.out:
        io.write_decomposition(args.out, dec)
        print(f"decomposition written to {args.out}")
    return EXIT_DETECTED


def cmd_table1(args) -> int:
    print(f"{'state':8} {'computed':>9} {'published':>9} {'diff':>8}  result")
    ok = True
    for label, key, ref in TABLE1:
        psi = NAMED_STATES[key]()
        if args.method == "linear":
            p = witness.linear_tolerance(psi)
        else:
            p = witness.white_noise_tolerance(psi, width=args.width)
        good = abs(p - ref) <= TABLE1_TOL
        ok &= good
        print(f"{label:8} {p:9.5f} {ref:9.3f} {p - ref:+8.5f}  {'pass' if good else 'FAIL'}", flush=True)
    return 0 if ok else EXIT_NOT_DETECTED


# -- parser -------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pptmix", description="PPT-mixture entanglement certification")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--max-iterations", type=int, default=200, help="interior-point iteration cap")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("state", help="write a named state mixed with white noise")
    p.add_argument("name", choices=sorted(NAMED_STATES))
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_state)

    def add_observables(p):
        p.add_argument("--observables", help="JSON list or text file of Pauli strings")
        p.add_argument("--closure", action="store_true", help="add identity-substitution closures of the settings")
        p.add_argument("--dicke-stage", type=int, choices=range(2, 7), help="built-in four-qubit Dicke stage basis")

    p = sub.add_parser("detect", help="solve the witness SDP for a state file")
    p.add_argument("state")
    p.add_argument("--mode", choices=["full", "fully-ppt", "restricted"], default="full")
    add_observables(p)
    p.add_argument("--all-subsets", action="store_true", help="use every proper subset instead of half")
    p.add_argument("--out", help="witness file to write")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("tolerance", help="white-noise tolerance of a named or file state")
    p.add_argument("state", help=f"one of {', '.join(NAMED_STATES)} or a state file")
    p.add_argument("--mode", choices=["full", "fully-ppt", "restricted"], default="full")
    add_observables(p)
    p.add_argument("--method", choices=["bisection", "linear"], default="bisection")
    p.add_argument("--width", type=float, default=5e-4)
    p.set_defaults(func=cmd_tolerance)

    p = sub.add_parser("cluster-witness", help="analytic linear-cluster witness")
    p.add_argument("n", type=int)
    p.add_argument("--bset", help="comma-separated 1-based qubits, default 1,4,7,...")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--frame", choices=["standard", "zz"], default="standard",
                   help="zz: Hadamards on the end qubits so the end generators read Z Z")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_cluster_witness)

    p = sub.add_parser("monotone", help="genuine multipartite negativity")
    p.add_argument("state")
    p.set_defaults(func=cmd_monotone)

    p = sub.add_parser("volume", help="fraction of random three-qubit states detected")
    p.add_argument("--measure", choices=["hs", "bures"], default="hs")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--mode", choices=["full", "fully-ppt"], default="full")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_volume)

    p = sub.add_parser("bisep", help="symmetric-subspace biseparability certificate")
    p.add_argument("state")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bisep)

    p = sub.add_parser("table1", help="reproduce the white-noise tolerance table")
    p.add_argument("--method", choices=["bisection", "linear"], default="bisection")
    p.add_argument("--width", type=float, default=5e-4)
    p.set_defaults(func=cmd_table1)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        return args.func(args)
    except (io.FormatError, CliError, ValueError, sdp.SolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
