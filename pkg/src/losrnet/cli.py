"""Command-line front end.

Every subcommand prints a JSON report with a schema tag, the command line,
the seed and a results payload. Data products (CSV tables, matrices,
certificates) go to ``--out`` when given.

Exit codes: 0 success, 2 usage, 3 domain precondition, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (
    cluster_bound,
    finner_check,
    fidelity_bound_from_z,
    ghz_bound_catalog,
    gisin_check,
    z_correlators,
    z_distribution,
)
from .channels import build_choi, generate_eta_din_2, generate_eta_odd
from .errors import (
    ArgumentError,
    CapacityError,
    NumericalError,
    PreconditionError,
    UnsupportedInputError,
)
from .fidelity import fidelity_22, fidelity_odd, fidelity_recursive
from .graphs import (
    STATEVECTOR_MAX_QUBITS,
    Graph,
    check_certificate,
    extract_ghz,
    verify_certificate_statevector,
)
from .network import SchmidtVector, TriangleConfig, assemble_triangle_structured, ghz_state
from .optimize import (
    TABLE,
    case1_bound,
    case2_solve,
    maximize_schmidt,
    rho_opt,
    sextic_roots,
)
from .tensor import fidelity_with_pure

SCHEMA = "losrnet.report/1"

EXIT_OK, EXIT_USAGE, EXIT_PRECONDITION, EXIT_NUMERICAL = 0, 2, 3, 4


def write_matrix(m: np.ndarray) -> str:
    """Dimension line, then one row per line as ``re im`` pairs."""
    lines = [str(m.shape[0])]
    for row in m:
        lines.append(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in row))
    return "\n".join(lines) + "\n"


def read_matrix(text: str) -> np.ndarray:
    rows = [line.split() for line in text.splitlines() if line.strip()]
    try:
        dim = int(rows[0][0])
        vals = np.array([[float(x) for x in r] for r in rows[1:]])
    except (ValueError, IndexError):
        raise ArgumentError("malformed matrix file") from None
    if vals.shape != (dim, 2 * dim):
        raise ArgumentError(f"matrix file does not hold {dim} rows of {dim} re/im pairs")
    return vals[:, 0::2] + 1j * vals[:, 1::2]


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]
    except ValueError:
        raise ArgumentError(f"cannot parse number list {text!r}") from None


def _emit(path, text: str) -> None:
    if path is None:
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise ArgumentError(f"cannot write {path}: {exc}") from None


# subcommands return the results payload


def cmd_reproduce_table(args) -> dict:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["d_in", "fidelity", "coefficients"])
    rows = []
    for d in range(2, 11):
        rep = maximize_schmidt(fidelity_recursive, d, restarts=args.restarts, seed=args.seed)
        lam = rep.argmax.lambdas
        writer.writerow([d, f"{rep.value:.8f}", " ".join(f"{x:.5f}" for x in lam)])
        published = TABLE[d][0]
        rows.append({
            "d_in": d,
            "fidelity": rep.value,
            "coefficients": lam.tolist(),
            "published": published,
            "deviation": rep.value - published,
            "converged": rep.converged,
        })
    _emit(args.out, buf.getvalue())
    return {"rows": rows}


def cmd_bounds(args) -> dict:
    if args.cluster:
        m, n = args.cluster
        rec = cluster_bound(m, n)
        return {"cluster": [m, n], "lower": rec.lower, "upper": rec.upper, "provenance": rec.provenance}
    rec = ghz_bound_catalog(args.N, args.d)
    out = {"N": rec.N, "d": rec.d, "lower": rec.lower, "upper": rec.upper, "provenance": rec.provenance}
    if (args.N, args.d) == (3, 2) and args.derive:
        case2 = case2_solve(grid_step=args.step)
        census = sextic_roots()
        out["derivation"] = {
            "case2_value": case2.value,
            "case2_argmax": list(case2.z),
            "case2_grid_value": case2.grid_value,
            "sextic_largest_root": census.largest,
            "sextic_real_roots": list(census.roots),
            "sextic_roots_in_unit_interval": census.in_unit_interval,
            "case1_value": case1_bound(),
        }
    return out


def cmd_extract(args) -> dict:
    try:
        g = Graph.from_text(Path(args.graph).read_text())
    except OSError as exc:
        raise ArgumentError(f"cannot read {args.graph}: {exc}") from None
    cert = extract_ghz(g, args.a, args.b, args.c, seed=args.seed)
    text = cert.to_text()
    _emit(args.out, text)
    result = {
        "n": g.n,
        "triple": list(cert.triple),
        "ops": len(cert.ops),
        "certificate": text,
        "graph_replay": check_certificate(g, cert),
        "statevector_fidelity": None,
    }
    if g.n <= STATEVECTOR_MAX_QUBITS:
        result["statevector_fidelity"] = verify_certificate_statevector(g, cert)
    return result


def _construction(d_in: int, d_out: int):
    if d_out == 2:
        return generate_eta_din_2(d_in), "qubit-output"
    if d_out == d_in and d_in % 2 == 1:
        return generate_eta_odd(d_in), "odd-dimension"
    raise ArgumentError(
        f"no construction for d_in={d_in}, d_out={d_out}; supported: "
        "d_out=2 with any d_in >= 2, or d_out=d_in odd >= 3"
    )


def cmd_assemble(args) -> dict:
    spec, family = _construction(args.d_in, args.d_out)
    lam = np.asarray(_floats(args.lam))
    if lam.size != args.d_in:
        raise ArgumentError(f"got {lam.size} coefficients for d_in={args.d_in}")
    sv = SchmidtVector.normalized(lam)
    cfg = TriangleConfig.symmetric(build_choi(spec), sv)
    rho = assemble_triangle_structured(cfg)
    _emit(args.out, write_matrix(rho))
    return {
        "family": family,
        "d_in": args.d_in,
        "d_out": args.d_out,
        "lambda": sv.coefficients.tolist(),
        "ghz_fidelity": fidelity_with_pure(rho, ghz_state(3, args.d_out)),
        "trace": float(np.trace(rho).real),
    }


OBJECTIVES = {
    "recursive": fidelity_recursive,
    "odd": fidelity_odd,
    "two": fidelity_22,
}


def cmd_optimize(args) -> dict:
    objective = OBJECTIVES[args.family]
    rep = maximize_schmidt(objective, args.d_in, restarts=args.restarts, seed=args.seed)
    return {
        "family": args.family,
        "d_in": args.d_in,
        "value": rep.value,
        "squared_coefficients": list(rep.argmax.p),
        "coefficients": rep.argmax.lambdas.tolist(),
        "restarts": rep.restarts,
        "iterations": rep.iterations,
        "converged": rep.converged,
    }


def cmd_check_inequalities(args) -> dict:
    if args.state == "rho-opt":
        rho = rho_opt()
    elif args.state == "ghz":
        rho = ghz_state(3, 2).density()
    else:
        try:
            rho = read_matrix(Path(args.state).read_text())
        except OSError as exc:
            raise ArgumentError(f"cannot read {args.state}: {exc}") from None
    if rho.shape != (8, 8):
        raise UnsupportedInputError("inequality checks need a three-qubit state")
    p = z_distribution(rho, (2, 2, 2))
    finner = finner_check(p)
    gisin = gisin_check(rho)
    z = z_correlators(rho)
    return {
        "finner_slack": finner.slack,
        "finner_outcome": list(finner.outcome),
        "gisin_positive_slack": gisin.positive,
        "gisin_negative_slack": gisin.negative,
        "z": [z.z1, z.z2, z.z3],
        "fidelity_bound_from_z": fidelity_bound_from_z(z),
        "ghz_fidelity": fidelity_with_pure(rho, ghz_state(3, 2)),
        "satisfied": finner.slack >= -1e-9 and gisin.worst >= -1e-9,
    }


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--out", default=None, help="write the data product here")
    common.add_argument("--no-timing", action="store_true",
                        help="omit wall-clock duration so reruns are byte-identical")

    parser = argparse.ArgumentParser(prog="losrnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reproduce-table", parents=[common],
                       help="optimal fidelities of the qubit-output construction, d_in = 2..10")
    p.add_argument("--restarts", type=int, default=32)
    p.set_defaults(func=cmd_reproduce_table)

    p = sub.add_parser("bounds", parents=[common], help="fidelity bounds for GHZ_{N,d} or cluster states")
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--cluster", type=int, nargs=2, metavar=("M", "N"))
    p.add_argument("--derive", action="store_true",
                   help="for N=3, d=2 also run the correlator optimization and sextic root")
    p.add_argument("--step", type=float, default=1e-2, help="grid step of the correlator scan")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("extract", parents=[common], help="GHZ_3 extraction certificate for a graph")
    p.add_argument("graph", help="edge-list file: vertex count, then 'i j' lines")
    p.add_argument("a", type=int)
    p.add_argument("b", type=int)
    p.add_argument("c", type=int)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("assemble", parents=[common], help="triangle output state of a construction")
    p.add_argument("--d-in", type=int, required=True)
    p.add_argument("--d-out", type=int, required=True)
    p.add_argument("--lambda", dest="lam", required=True, help="comma-separated Schmidt coefficients")
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("optimize", parents=[common], help="maximize a fidelity polynomial")
    p.add_argument("--family", choices=sorted(OBJECTIVES), default="recursive")
    p.add_argument("--d-in", type=int, required=True)
    p.add_argument("--restarts", type=int, default=32)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("check-inequalities", parents=[common],
                       help="Finner and Gisin checks on a three-qubit state")
    p.add_argument("state", help="matrix file, or 'rho-opt' or 'ghz'")
    p.set_defaults(func=cmd_check_inequalities)
    return parser


def _command_echo(argv) -> list[str]:
    return ["losrnet", *argv]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        results = args.func(args)
    except (ArgumentError, UnsupportedInputError) as exc:
        code = EXIT_PRECONDITION if isinstance(exc, UnsupportedInputError) else EXIT_USAGE
        print(f"losrnet: error: {exc}", file=sys.stderr)
        return code
    except (PreconditionError, CapacityError) as exc:
        print(f"losrnet: error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except NumericalError as exc:
        print(f"losrnet: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    report = {
        "schema": SCHEMA,
        "command": _command_echo(argv),
        "seed": args.seed,
        "results": results,
        "duration_s": None if args.no_timing else round(time.perf_counter() - start, 6),
    }
    text = json.dumps(report, indent=2, sort_keys=True, default=_jsonable)
    print(text)
    return EXIT_OK


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


if __name__ == "__main__":
    sys.exit(main())
