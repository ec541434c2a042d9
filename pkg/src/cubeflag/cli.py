"""Command line front end: ``cubeflag <subcommand> ...``.

Exit codes: 0 success/PASS, 1 FAIL, 2 input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import tempfile
import time
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import BACKEND
from .certificate import (
    DEFAULT_K,
    Certificate,
    decimal_str,
    make_certificate,
    parse_target,
    verify,
)
from .colouring import CubeColouring, ForbiddenFamily, Mode, canonical
from .constraints import constraint_vectors
from .constructions import ConstructionSpec, build, evaluate
from .flags import FlagType, assemble_problem, build_bases, enumerate_flags, enumerate_h
from .formats import FormatError, dump_constraints, dump_h_list, dump_problem, load_problem, rat, read_family
from .kernels import CapacityError
from .sdp import (
    DEFAULT_SOLVER,
    SdpLayout,
    SolverError,
    bound_residuals,
    emit_sdp,
    parse_solution,
    run_solver,
)

BUILTIN_FAMILIES = ("B", "B1B2", "B3", "B3-", "B4B5", "empty")


class InputError(Exception):
    pass


def load_family(spec: str) -> ForbiddenFamily:
    """A family file path, or the name of a bundled family (B, B1B2, B3, B3-, B4B5, empty)."""
    path = Path(spec)
    if path.exists():
        return read_family(path)
    name = spec[:-4] if spec.endswith(".fam") else spec
    if name in BUILTIN_FAMILIES:
        text = resources.files("cubeflag.families").joinpath(f"{name}.fam").read_text()
        return ForbiddenFamily.parse(text)
    raise InputError(f"no family file or bundled family named {spec!r}")


def parse_shapes(text: str | None):
    if not text:
        return None
    out = []
    for tok in text.split(","):
        s, _, m = tok.partition(":")
        out.append((int(s), int(m)))
    return out


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(path, subcommand: str, params: dict, inputs=(), outputs=(), started: float = 0.0) -> None:
    manifest = {
        "subcommand": subcommand,
        "parameters": params,
        "inputs": {str(p): _digest(p) for p in inputs if p and Path(p).exists()},
        "outputs": {str(p): _digest(p) for p in outputs if p and Path(p).exists()},
        "seconds": round(time.time() - started, 3),
        "tool": f"cubeflag {__version__} ({BACKEND})",
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _manifest_path(args, out: str | None) -> Path | None:
    if getattr(args, "workdir", None):
        Path(args.workdir).mkdir(parents=True, exist_ok=True)
        return Path(args.workdir) / f"manifest-{args.cmd}.json"
    if out:
        return Path(str(out) + ".manifest.json")
    return None


def _params(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


# -- subcommands ----------------------------------------------------------------

def cmd_enumerate(args) -> int:
    t0 = time.time()
    fam = load_family(args.forbid)
    mode = Mode(args.mode)
    hs = enumerate_h(mode, args.dim, fam)
    if args.out:
        Path(args.out).write_text(dump_h_list(mode, args.dim, fam, hs))
    print(len(hs))
    mp = _manifest_path(args, args.out)
    if mp:
        write_manifest(mp, "enumerate", _params(args), [args.forbid], [args.out], t0)
    return 0


def cmd_flags(args) -> int:
    fam = load_family(args.forbid)
    sigma = FlagType(CubeColouring.parse(f"{args.mode} {args.type_dim} {args.type}"))
    basis = enumerate_flags(sigma, args.m, fam, args.l)
    print(f"{len(basis)} flags of dimension {args.m} over {sigma.cube.text()}")
    for f in basis.flags:
        print(f.cube.text())
    return 0


def cmd_assemble(args) -> int:
    t0 = time.time()
    fam = load_family(args.forbid)
    mode = Mode(args.mode)
    bases = build_bases(mode, args.dim, fam, parse_shapes(args.shapes))
    problem = assemble_problem(mode, args.dim, fam, bases)
    if args.constraints:
        if mode is not Mode.PARTIAL:
            raise InputError("constraint rows apply to partial problems only")
        problem.constraints = constraint_vectors(args.dim, fam, problem.h_list)
    Path(args.out).write_text(dump_problem(problem))
    print(
        f"{len(problem.h_list)} H, {len(bases)} bases (sizes {[len(b) for b in bases]}), "
        f"{len(problem.constraints)} constraint rows, averaging bound {rat(max(problem.d))}"
    )
    mp = _manifest_path(args, args.out)
    if mp:
        write_manifest(mp, "assemble", _params(args), [args.forbid], [args.out], t0)
    return 0


def cmd_constraints(args) -> int:
    t0 = time.time()
    fam = load_family(args.forbid)
    hs = enumerate_h(Mode.PARTIAL, args.dim, fam)
    rows = constraint_vectors(args.dim, fam, hs)
    text = dump_constraints(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"{len(rows)} constraint rows over {len(hs)} partial cubes", file=sys.stderr)
    mp = _manifest_path(args, args.out)
    if mp:
        write_manifest(mp, "constraints", _params(args), [args.forbid], [args.out], t0)
    return 0


def cmd_bound(args) -> int:
    t0 = time.time()
    target = parse_target(args.target)
    with open(args.problem) as fh:
        pf = load_problem(fh.read())
    problem = pf.to_problem()
    if not problem.bases:
        raise InputError("problem has no flag bases")
    layout = SdpLayout.for_problem(problem)
    workdir = Path(args.workdir) if args.workdir else Path(tempfile.mkdtemp(prefix="cubeflag-"))
    workdir.mkdir(parents=True, exist_ok=True)
    sdp_path = workdir / "problem.dat-s"
    sol_path = workdir / "problem.sol"
    sdp_path.write_text(emit_sdp(problem))
    run_solver(args.solver_cmd, sdp_path, sol_path, timeout=args.timeout_secs, log_file=workdir / "solver.log")
    sol = parse_solution(sol_path.read_text(), layout)
    worst = float(np.max(bound_residuals(problem, sol)))
    print(f"solver bound {-sol.objective:.9f} (max residual {worst:.2e})")
    if worst > 1e-6:
        print("warning: floating solution violates d + c + alpha <= t by more than 1e-6", file=sys.stderr)
    cert = make_certificate(problem, sol.q_blocks(layout), sol.mu(layout), k=args.round_k)
    Path(args.out_cert).write_text(cert.dumps())
    report = verify(args.problem, args.out_cert, target)
    print(report.text())
    mp = _manifest_path(args, args.out_cert)
    if mp:
        write_manifest(mp, "bound", _params(args), [args.problem], [args.out_cert, sdp_path, sol_path], t0)
    return report.exit_code


def cmd_certify(args) -> int:
    t0 = time.time()
    report = verify(args.problem, args.cert, parse_target(args.target))
    print(report.text())
    mp = _manifest_path(args, None)
    if mp:
        write_manifest(mp, "certify", _params(args), [args.problem, args.cert], [], t0)
    return report.exit_code


def cmd_construct(args) -> int:
    fam = load_family(args.forbid)
    spec = ConstructionSpec(args.kind, args.n, args.k, args.z, args.z2, args.split)
    cube = build(spec)
    d, free = evaluate(cube, fam)
    total = len(cube.word)
    print(f"{cube.blue_count()}/{total} f-free={'true' if free else 'false'}")
    print(f"density {rat(d)}")
    if args.dump:
        print(cube.text())
    return 0


def cmd_canon(args) -> int:
    print(canonical(CubeColouring.parse(args.cube)).text())
    return 0


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cubeflag", description="Certified flag-algebra bounds for hypercube Turan densities")
    ap.add_argument("--version", action="version", version=f"cubeflag {__version__}")
    ap.add_argument("--threads", type=int, default=1, help="worker count (results never depend on it)")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, workdir=True):
        if workdir:
            p.add_argument("--workdir", help="directory for run artefacts and the manifest")

    p = sub.add_parser("enumerate", help="enumerate the F-free family H")
    p.add_argument("--mode", required=True, choices=["vertex", "edge", "partial"])
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--forbid", required=True)
    p.add_argument("--out")
    common(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("flags", help="list the flags over one type")
    p.add_argument("--mode", required=True, choices=["vertex", "edge", "partial"])
    p.add_argument("--type-dim", type=int, required=True)
    p.add_argument("--type", default="", help="type colour word, e.g. B or GGBR")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--l", type=int)
    p.add_argument("--forbid", required=True)
    p.set_defaults(func=cmd_flags)

    p = sub.add_parser("assemble", help="build and write a density problem")
    p.add_argument("--mode", required=True, choices=["vertex", "edge", "partial"])
    p.add_argument("--dim", type=int, required=True, help="dimension l of the H cubes")
    p.add_argument("--forbid", required=True)
    p.add_argument("--shapes", help="comma list of type:flag dimensions, e.g. 1:2,2:3")
    p.add_argument("--constraints", action="store_true", help="add the swap constraint rows (partial only)")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("constraints", help="write the partial-cube constraint rows")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--forbid", required=True)
    p.add_argument("--out")
    common(p)
    p.set_defaults(func=cmd_constraints)

    p = sub.add_parser("bound", help="solve, round and certify a problem")
    p.add_argument("--problem", required=True)
    p.add_argument("--solver-cmd", default=DEFAULT_SOLVER)
    p.add_argument("--timeout-secs", type=float, default=3600.0)
    p.add_argument("--target", required=True)
    p.add_argument("--round-k", type=int, default=DEFAULT_K)
    p.add_argument("--out-cert", required=True)
    common(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("certify", help="verify a certificate exactly")
    p.add_argument("--problem", required=True)
    p.add_argument("--cert", required=True)
    p.add_argument("--target", required=True)
    common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("construct", help="build and check a lower-bound construction")
    p.add_argument("--kind", required=True, choices=["vertex-layered", "edge-layered", "two-halves"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--z", type=int, default=0)
    p.add_argument("--z2", type=int, default=0)
    p.add_argument("--split", type=int, default=0)
    p.add_argument("--forbid", required=True)
    p.add_argument("--dump", action="store_true")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("canon", help="print the canonical form of a cube")
    p.add_argument("cube", help='cube text, e.g. "vertex 2 RBBB"')
    p.set_defaults(func=cmd_canon)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, FormatError, CapacityError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
