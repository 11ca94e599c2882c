"""Command line front end.

::

    hdl --cmd gen-povm --seed 7 --dim 2 --atoms 3 --out povm.json
    hdl --cmd dilate --in povm.json --out dilation.json
    hdl --cmd verify-identity --seed 1 --dim 6 --subdim 2 --out identity.json
    hdl --cmd clark --in shift2.json --alpha-grid 8 --out clark.json   # also writes clark.csv

Exit status: 0 when every residual is under its tolerance, 1 when some
residual is not (the report is still written), 2 for malformed input or
arguments (nothing is written).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from ._parallel import parallel_map
from .clark_spectra import (
    clark_measure, cyclicity_check, perturbation_setup, random_cnu_partial_isometry,
    spectrum_via_char,
)
from .compression_engine import generalized_measure, identity_residual, split
from .config import Tolerances, ZGrid
from .errors import HDLError, InvalidInputError
from .linalg_core import (
    Frame, arc_distance, matrix_from_json, random_frame, random_unitary, vector_from_json,
)
from .naimark_dilation import (
    block_dilation, dilation_to_json, minimalize, perturb_projector, verify_dilation,
)
from .ov_measures import (
    compress_measure, measure_from_json, measure_to_json, random_povm, spectral_measure_of_unitary,
    validate,
)

COMMANDS = ("dilate", "verify-identity", "clark", "gen-povm")


class UsageError(Exception):
    pass


# -- deterministic serialization --------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float printed at 17 significant digits; non-finite floats become null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.floating, np.integer)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(obj) if math.isfinite(obj) else "null"
    if obj is None:
        return "null"
    return json.dumps(str(obj))


# -- argument handling --------------------------------------------------------

def _split_tol_flags(argv):
    rest, tols = [], {}
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok.startswith("--tol."):
            name, eq, val = tok[len("--tol."):].partition("=")
            if not eq:
                if i + 1 >= len(argv):
                    raise UsageError(f"{tok} needs a value")
                i += 1
                val = argv[i]
            try:
                tols[name] = float(val)
            except ValueError:
                raise UsageError(f"{tok}: not a number: {val!r}") from None
        else:
            rest.append(tok)
        i += 1
    return rest, tols


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hdl", description=__doc__.split("\n\n")[0],
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--cmd", required=True, choices=COMMANDS)
    p.add_argument("--in", dest="input_path", type=Path)
    p.add_argument("--out", dest="output_path", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--subdim", type=int)
    p.add_argument("--atoms", type=int, default=3)
    p.add_argument("--alpha-grid", type=int, default=8)
    p.add_argument("--z-radii", default="0.3,0.6,0.9",
                   help="comma separated radii of the evaluation grid")
    p.add_argument("--z-angles", type=int, default=16)
    p.add_argument("--full-space", action="store_true",
                   help="verify-identity: compress to the whole space")
    p.add_argument("--minimal", action="store_true", help="dilate: minimalize before writing")
    p.add_argument("--perturb", type=float, default=0.0,
                   help="dilate: add this much to one projection before verifying (fault injection)")
    p.epilog = "Tolerances: --tol.<name> VALUE, names: " + ", ".join(sorted(Tolerances().values))
    return p


def parse_config(argv):
    rest, tol_overrides = _split_tol_flags(list(argv))
    parser = build_parser()
    try:
        args = parser.parse_args(rest)
    except SystemExit as exc:
        raise UsageError("invalid arguments") from exc
    tols = Tolerances()
    try:
        tols.update(tol_overrides)
        radii = tuple(float(r) for r in args.z_radii.split(",") if r.strip())
        args.grid = ZGrid(radii=radii, angles=args.z_angles)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if args.subdim is not None and args.subdim >= args.dim and args.cmd == "verify-identity":
        raise UsageError("--subdim must be smaller than --dim (use --full-space for K = H)")
    if args.dim < 1 or (args.subdim is not None and args.subdim < 1):
        raise UsageError("--dim and --subdim must be positive")
    args.tolerances = tols
    return args


def _read_json(path: Path):
    if path is None:
        raise UsageError("this command needs --in")
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


# -- commands -----------------------------------------------------------------

def cmd_gen_povm(args):
    rng = np.random.default_rng(args.seed)
    povm = random_povm(args.dim, args.atoms, rng)
    report = validate(povm)
    return {"povm": measure_to_json(povm)}, report.ok, lambda out: _write(out, dumps(measure_to_json(povm)))


def cmd_dilate(args):
    try:
        povm = measure_from_json(_read_json(args.input_path))
    except InvalidInputError as exc:
        raise UsageError(f"{args.input_path}: {exc}") from None
    report = validate(povm)
    if not report.ok:
        raise UsageError(f"{args.input_path}: not a valid POVM: {report}")
    d = block_dilation(povm)
    if args.minimal:
        d = minimalize(d)
    if args.perturb:
        d = perturb_projector(d, args.perturb)
    rep = verify_dilation(d, povm, args.grid, tol=args.tolerances["compression"])
    payload = dilation_to_json(d, rep)
    return payload, rep.passed, lambda out: _write(out, dumps(payload))


def cmd_verify_identity(args):
    if args.input_path is not None:
        obj = _read_json(args.input_path)
        try:
            U = matrix_from_json(obj["U"])
            K = Frame(matrix_from_json(obj["K"])) if "K" in obj else Frame.full(U.shape[0])
        except (KeyError, TypeError) as exc:
            raise UsageError(f"{args.input_path}: missing field {exc}") from None
        except InvalidInputError as exc:
            raise UsageError(f"{args.input_path}: {exc}") from None
    else:
        rng = np.random.default_rng(args.seed)
        U = random_unitary(args.dim, rng)
        if args.full_space:
            K = Frame.full(args.dim)
        else:
            K = random_frame(args.dim, args.subdim or max(1, args.dim // 2), rng)
    try:
        ct = split(U, K)
    except HDLError as exc:
        raise UsageError(str(exc)) from None
    tol = args.tolerances["identity"]
    resid = identity_residual(ct, args.grid)
    B = generalized_measure(ct, args.grid, tol=tol)
    # B_j against K^H E_j K computed afresh from the eigendecomposition
    Bk = compress_measure(spectral_measure_of_unitary(U), K)
    measure_resid = max((float(np.linalg.norm(a - b)) for a, b in zip(B.weights, Bk.weights)), default=0.0)
    ok = resid < tol and B.certificate.passed and measure_resid < args.tolerances["measure"]
    payload = {
        "n": ct.n, "k": ct.k,
        "certificate": {"max_identity_residual": resid, "grid": args.grid.to_dict(), "pass": bool(resid < tol)},
        "measure_certificate": B.certificate.to_dict(),
        "measure_residual": measure_resid,
        "generalized_measure": measure_to_json(B),
        "pass": bool(ok),
    }
    return payload, ok, lambda out: _write(out, dumps(payload))


def _load_setup(args):
    if args.input_path is not None:
        obj = _read_json(args.input_path)
        try:
            S = matrix_from_json(obj["S"])
            k = vector_from_json(obj["k"]) if "k" in obj else None
            kt = vector_from_json(obj["k_tilde"]) if "k_tilde" in obj else None
            return perturbation_setup(S, k, kt)
        except (KeyError, TypeError) as exc:
            raise UsageError(f"{args.input_path}: missing field {exc}") from None
        except InvalidInputError as exc:
            raise UsageError(f"{args.input_path}: {exc}") from None
    rng = np.random.default_rng(args.seed)
    return perturbation_setup(random_cnu_partial_isometry(args.dim, args.subdim or 1, rng))


def cmd_clark(args):
    setup = _load_setup(args)
    tols = args.tolerances
    N = args.alpha_grid
    if N < 1:
        raise UsageError("--alpha-grid must be positive")
    if setup.index == 1:
        As = [np.array([[np.exp(2j * np.pi * j / N)]]) for j in range(N)]
    else:
        rng = np.random.default_rng(args.seed + 1)
        As = [random_unitary(setup.index, rng) for _ in range(N)]

    def one(A):
        rep = spectrum_via_char(setup, A)
        cert = None
        if setup.index == 1:
            sigma = clark_measure(setup, complex(A[0, 0]), args.grid, tol=tols["clark"])
            cert = sigma.certificate
        return rep, cert, cyclicity_check(setup, A)

    results = parallel_map(one, As)
    rows, reports, ok = [], [], True
    for A, (rep, cert, cyclic) in zip(As, results):
        a_theta = float(np.mod(np.angle(np.linalg.det(A)), 2 * np.pi))
        entry = {"alpha_theta": a_theta, "spectrum": rep.to_dict(), "cyclic": bool(cyclic)}
        if cert is not None:
            entry["clark_certificate"] = cert.to_dict()
            ok &= cert.passed
        ok &= rep.hausdorff_gap < tols["gap"] and rep.det_at_eigen < tols["det"] and cyclic
        reports.append(entry)
        if rep.atoms is not None:
            atoms = [(t, m.real) for t, m in zip(rep.atoms.thetas, rep.atoms.masses)]
        else:
            atoms = [(t, math.nan) for t in rep.eigen_direct]
        for t, mass in atoms:
            near = rep.eigen_direct[np.argmin(arc_distance(t, rep.eigen_direct))]
            rows.append([a_theta, t, mass, near, rep.hausdorff_gap])
    payload = {"n": setup.n, "defect_index": setup.index, "reports": reports, "pass": bool(ok)}

    def write(out: Path):
        _write(out, dumps(payload))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha_theta", "atom_theta", "mass", "eigen_theta", "gap"])
        for r in rows:
            w.writerow([_fmt(x) if math.isfinite(x) else "" for x in r])
        _write(out.with_suffix(".csv"), buf.getvalue())

    return payload, ok, write


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    if not text.endswith("\n"):
        text += "\n"
    path.write_text(text)


HANDLERS = {
    "gen-povm": cmd_gen_povm,
    "dilate": cmd_dilate,
    "verify-identity": cmd_verify_identity,
    "clark": cmd_clark,
}


def run(args) -> int:
    """Execute a parsed configuration; returns the exit status."""
    try:
        _, ok, write = HANDLERS[args.cmd](args)
    except UsageError as exc:
        print(f"hdl: error: {exc}", file=sys.stderr)
        return 2
    write(args.output_path)
    if not ok:
        print(f"hdl: tolerance check failed; see {args.output_path}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_config(argv)
    except UsageError as exc:
        print(f"hdl: error: {exc}", file=sys.stderr)
        return 2
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
