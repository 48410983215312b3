"""Command-line entry point for covariance estimation, matching and texture work.

Settings are resolved as: command-line flags, then ``--config FILE``
(flat ``key=value``), then ``COVEXT_*`` environment / ``.env``, then
built-in defaults. The resolved values are echoed on one ``[Config]`` line.

Exit codes: 0 success, 2 usage, 3 malformed file, 4 invalid input or
index-set mismatch, 5 solver divergence or singular-fit failure,
6 hard-constrained problem without solution.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from analysis.bounds import cone_report, singular_free_bound, sufficient_hard_existence
from analysis.weights import hard_weight_from_soft, soft_weight_from_hard
from config.settings import configure_logging, get_int, load_config_file
from estimate.covariance import biased_cov, unbiased_cov
from estimate.records import read_tensor, write_tensor
from grid.formats import write_field_csv
from grid.spec import GridSpec
from simulate.arma2d import default_system, simulate_field
from simulate.study import StudyConfig, run_study
from solve.config import SolverConfig
from solve.dual_solvers import solve
from solve.errors import NoSolutionError, SolverError
from solve.serialization import load_solution, save_solution
from trigcore.errors import FormatError, IndexSetMismatchError
from trigcore.formats import read_coefficients, read_weight, write_coefficients, write_weight
from trigcore.index_set import IndexSet
from trigcore.sequences import HermitianSeq
from trigcore.weights import WeightMatrix
from wiener.images import binarize, read_pnm, write_pbm
from wiener.model import identify, load_model, save_model, synthesize_texture

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FORMAT = 3
EXIT_INPUT = 4
EXIT_SOLVER = 5
EXIT_NO_SOLUTION = 6

# settings that may come from flags, the config file or the environment
_SOLVER_KEYS = {"max_newton_iters": int, "gradient_tol": float, "kkt_tol": float}


def _lambda_box(text: str) -> IndexSet:
    try:
        radii = [int(v) for v in text.split(",")]
    except ValueError:
        raise ValueError(f"--lambda-box expects comma-separated integers, got {text!r}") from None
    return IndexSet.box(*radii)


def _prior(spec: str, index_set: IndexSet) -> HermitianSeq:
    if spec == "me":
        return HermitianSeq.unit(index_set)
    p = read_coefficients(spec)
    index_set.require_same(p.index_set, "covariances and prior")
    return p


def _weight(spec: Optional[str], index_set: IndexSet) -> Optional[WeightMatrix]:
    if spec is None:
        return None
    kind, _, value = spec.partition(":")
    if kind == "scalar":
        try:
            lam = float(value)
        except ValueError:
            raise ValueError(f"Invalid scalar weight {value!r}") from None
        return WeightMatrix.scalar(lam, index_set)
    if kind == "file":
        return read_weight(value, index_set)
    raise ValueError(f"--weight must be scalar:<λ> or file:<path>, got {spec!r}")


def _resolve(args: argparse.Namespace) -> Dict[str, Any]:
    """Merge flags, config file and environment; flags win."""
    file_values = load_config_file(args.config)
    resolved: Dict[str, Any] = {}
    for key, cast in (*_SOLVER_KEYS.items(), ("grid", int), ("seed", int), ("jobs", int)):
        flag = getattr(args, key, None)
        if flag is not None:
            resolved[key] = flag
        elif key in file_values:
            try:
                resolved[key] = cast(file_values[key])
            except ValueError:
                raise ValueError(f"Config file value for {key!r} is not a valid {cast.__name__}: {file_values[key]!r}") from None
    resolved.setdefault("seed", get_int("SEED", 0))
    resolved.setdefault("jobs", get_int("JOBS", 1))
    return resolved


def _solver_config(resolved: Dict[str, Any], index_set: Optional[IndexSet] = None) -> SolverConfig:
    overrides = {k: resolved[k] for k in _SOLVER_KEYS if k in resolved}
    cfg = SolverConfig.from_env(**overrides)
    if index_set is not None and resolved.get("grid"):
        cfg = cfg.with_grid(GridSpec.for_index_set(index_set, resolved["grid"]))
    return cfg


def _echo_config(resolved: Dict[str, Any], cfg: Optional[SolverConfig] = None) -> None:
    items = dict(resolved)
    if cfg is not None:
        items.update(max_newton_iters=cfg.max_newton_iters, gradient_tol=cfg.gradient_tol, kkt_tol=cfg.kkt_tol)
    print("[Config] " + " ".join(f"{k}={items[k]}" for k in sorted(items)))


def cmd_estimate(args: argparse.Namespace, resolved: Dict[str, Any]) -> int:
    lam = _lambda_box(args.lambda_box)
    _echo_config(resolved)
    print(f"[1/2] Reading data record {args.data}...")
    data = read_tensor(args.data)
    estimator = biased_cov if args.mode == "biased" else unbiased_cov
    c = estimator(data, lam)
    print(f"[2/2] Writing {args.mode} covariances...")
    out = write_coefficients(c, args.out)
    print(f"[Done] Covariances: {out}")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace, resolved: Dict[str, Any]) -> int:
    print(f"[1/3] Reading covariances {args.cov}...")
    c = read_coefficients(args.cov)
    lam = c.index_set
    p = _prior(args.prior, lam)
    W = _weight(args.weight, lam)
    if args.mode != "exact" and W is None:
        raise ValueError(f"--weight is required for {args.mode} mode")
    cfg = _solver_config(resolved, lam)
    _echo_config(resolved, cfg)
    print(f"[2/3] Solving ({args.mode} matching)...")
    try:
        sol = solve(c, p, args.mode, W, cfg)
    except NoSolutionError as exc:
        print(f"[Error] {exc}")
        if exc.sufficient_condition is False:
            print("[Hint] W - cc* is not positive definite; enlarge the weight to guarantee a solution")
        return EXIT_NO_SOLUTION
    print("[3/3] Writing solution...")
    out = save_solution(sol, args.out)
    spectrum_path = Path(args.spectrum) if args.spectrum else Path(args.out).with_suffix(".spectrum.csv")
    write_field_csv(sol.spectrum(), spectrum_path)
    diag = sol.diagnostics
    print(f"[Info] iterations={diag.iterations} duality_gap={diag.duality_gap:.3e} min_Q={diag.min_q_grid:.3e}")
    if sol.gamma is not None:
        print(f"[Info] gamma={sol.gamma:.10g}")
    for atom in sol.atoms:
        theta = ", ".join(f"{t:.6f}" for t in atom.theta)
        print(f"[Atom] theta=({theta}) mass={atom.mass:.6f}")
    if sol.kkt is not None and not sol.kkt.ok:
        print(f"[Warn] KKT residuals above tolerance: {', '.join(sol.kkt.flagged())}")
    print(f"[Done] Solution: {out}, spectrum: {spectrum_path}")
    return EXIT_OK


def cmd_convert_weight(args: argparse.Namespace, resolved: Dict[str, Any]) -> int:
    sol = load_solution(args.solution)
    lam = sol.index_set
    W = _weight(args.weight, lam)
    if W is None:
        raise ValueError("--weight is required")
    _echo_config(resolved)
    converted = soft_weight_from_hard(W, sol.q_hat) if args.direction == "hard2soft" else hard_weight_from_soft(W, sol.q_hat)
    scalar = converted.scalar_value()
    if scalar is not None:
        print(f"[Info] converted weight = {scalar:.12g} * I")
    out = write_weight(converted, args.out)
    print(f"[Done] Weight ({args.direction}): {out}")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace, resolved: Dict[str, Any]) -> int:
    c = read_coefficients(args.cov)
    lam = c.index_set
    p = _prior(args.prior, lam)
    W = _weight(args.weight, lam)
    _echo_config(resolved)
    for name, status in cone_report(c).items():
        print(f"[Cone] {name}: {status}")
    if W is not None:
        bound = singular_free_bound(c, p, W)
        verdict = "guaranteed" if bound.guaranteed else "not guaranteed"
        exact = "" if bound.exact_norm else " (upper bound on the induced norm)"
        print(f"[Bound] absolutely continuous solution {verdict}; margin={bound.margin:.6g}{exact}")
        holds = sufficient_hard_existence(c, W)
        print(f"[Bound] hard problem existence condition W > cc*: {'holds' if holds else 'does not hold'}")
    print("[Done] Analysis complete")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, resolved: Dict[str, Any]) -> int:
    if args.system != "default":
        raise ValueError(f"Unknown system {args.system!r}; only 'default' is built in")
    study = StudyConfig(
        steps=args.N,
        window=args.window,
        replicates=args.replicates,
        seed=resolved["seed"],
        prior=args.prior,
        weight_mode=args.weight_mode,
        unbiased_outside=args.unbiased_outside,
        jobs=resolved["jobs"],
    )
    cfg = _solver_config(resolved)
    _echo_config(resolved, cfg)
    if args.save_field:
        field = simulate_field(default_system(), args.N, resolved["seed"])
        print(f"[Info] Example field written to {write_tensor(field, args.save_field)}")
    print(f"[1/2] Running {study.replicates} replicates...")
    result = run_study(study, default_system(), cfg)
    lines: List[str] = [json.dumps({"type": "record", **r.as_dict()}) for r in result.records]
    for name, stats in result.summary().items():
        lines.append(json.dumps({"type": "summary", "procedure": name, "attempts": result.attempts, **stats}))
    print("[2/2] Writing results...")
    if args.out:
        Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"[Done] Results: {args.out}")
    else:
        for line in lines:
            print(line)
        print("[Done]")
    return EXIT_OK


def cmd_texture(args: argparse.Namespace, resolved: Dict[str, Any]) -> int:
    if args.texture_command == "analyze":
        lam = _lambda_box(args.lambda_box)
        cfg = _solver_config(resolved, lam)
        _echo_config(resolved, cfg)
        print(f"[1/3] Reading image {args.image}...")
        image = read_pnm(args.image)
        y = image if Path(args.image).read_bytes()[:2] == b"P4" else binarize(image)
        print(f"[2/3] Identifying Wiener model ({args.weight_mode} matching)...")
        W = WeightMatrix.scalar(args.weight, lam) if args.weight is not None else None
        model = identify(y, lam, W, cfg, mode=args.weight_mode)
        print(f"[3/3] Writing model (tau={model.tau:.6f})...")
        out = save_model(model, args.out)
        print(f"[Done] Model: {out}")
        return EXIT_OK
    _echo_config(resolved)
    model = load_model(args.model)
    print(f"[1/2] Synthesizing {args.size}x{args.size} texture...")
    texture = synthesize_texture(model, args.size, resolved["seed"])
    print("[2/2] Writing bitmap...")
    out = write_pbm(texture, args.out)
    print(f"[Done] Texture: {out} (mean {float(np.mean(texture)):.4f})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Multidimensional rational covariance extension toolkit")
    parser.add_argument("--config", default=None, help="Flat key=value configuration file")
    parser.add_argument("--log-level", default=None, help="Logging level (default: COVEXT_LOG_LEVEL or INFO)")
    parser.add_argument("--seed", type=int, default=None, help="Seed for all randomness (default: COVEXT_SEED or 0)")
    parser.add_argument("--jobs", type=int, default=None, help="Worker threads for replicate simulations")
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="Estimate covariances from a data record")
    p_est.add_argument("--data", required=True, help="Data record (tensor text or .bin file)")
    p_est.add_argument("--lambda-box", required=True, help="Box radii n1[,n2,...] of the index set")
    p_est.add_argument("--mode", choices=["biased", "unbiased"], default="biased")
    p_est.add_argument("-o", "--out", default="covariances.txt", help="Output coefficient file")
    p_est.set_defaults(handler=cmd_estimate)

    p_solve = sub.add_parser("solve", help="Exact, soft or hard covariance matching")
    p_solve.add_argument("--cov", required=True, help="Covariance coefficient file")
    p_solve.add_argument("--prior", default="me", help="Prior coefficient file or 'me' for P = 1")
    p_solve.add_argument("--mode", choices=["exact", "soft", "hard"], default="exact")
    p_solve.add_argument("--weight", default=None, help="scalar:<λ> or file:<path>")
    p_solve.add_argument("--grid", type=int, default=None, help="Grid points per axis")
    p_solve.add_argument("--max-newton-iters", type=int, default=None)
    p_solve.add_argument("--gradient-tol", type=float, default=None)
    p_solve.add_argument("--kkt-tol", type=float, default=None)
    p_solve.add_argument("-o", "--out", default="solution.json", help="Output solution file")
    p_solve.add_argument("--spectrum", default=None, help="Spectrum CSV (default: next to the solution)")
    p_solve.set_defaults(handler=cmd_solve)

    p_conv = sub.add_parser("convert-weight", help="Map a weight between soft and hard formulations")
    p_conv.add_argument("--solution", required=True, help="Solution file providing q̂")
    p_conv.add_argument("--direction", choices=["soft2hard", "hard2soft"], required=True)
    p_conv.add_argument("--weight", required=True, help="scalar:<λ> or file:<path>")
    p_conv.add_argument("-o", "--out", default="weight.txt")
    p_conv.set_defaults(handler=cmd_convert_weight)

    p_an = sub.add_parser("analyze", help="Cone surrogates and sufficient-condition margins")
    p_an.add_argument("--cov", required=True)
    p_an.add_argument("--prior", default="me")
    p_an.add_argument("--weight", default=None)
    p_an.set_defaults(handler=cmd_analyze)

    p_sim = sub.add_parser("simulate", help="Simulation study on the 2-D ARMA system")
    p_sim.add_argument("--system", default="default")
    p_sim.add_argument("--N", type=int, default=500, help="Time steps per axis")
    p_sim.add_argument("--window", type=int, default=9, help="Size of the trailing estimation window")
    p_sim.add_argument("--replicates", type=int, default=100)
    p_sim.add_argument("--prior", choices=["me", "true"], default="me")
    p_sim.add_argument("--weight-mode", choices=["soft", "hard"], default="soft")
    p_sim.add_argument("--unbiased-outside", action="store_true", help="Keep only runs whose unbiased estimate is outside the cone")
    p_sim.add_argument("--save-field", default=None, help="Also write one simulated field in tensor format")
    p_sim.add_argument("--max-newton-iters", type=int, default=None)
    p_sim.add_argument("-o", "--out", default=None, help="JSON-lines output (default: stdout)")
    p_sim.set_defaults(handler=cmd_simulate)

    p_tex = sub.add_parser("texture", help="Wiener-system texture identification and synthesis")
    tex = p_tex.add_subparsers(dest="texture_command", required=True)
    t_an = tex.add_parser("analyze", help="Identify a model from a P5/P4 image")
    t_an.add_argument("--image", required=True)
    t_an.add_argument("--lambda-box", default="2,2")
    t_an.add_argument("--weight-mode", choices=["soft", "hard"], default="soft")
    t_an.add_argument(
        "--weight", type=float, default=None,
        help="Scalar weight λ of the chosen mode (soft default 0.01; hard default mapped from it)",
    )
    t_an.add_argument("--grid", type=int, default=None)
    t_an.add_argument("-o", "--out", default="texture_model.json")
    t_an.set_defaults(handler=cmd_texture)
    t_syn = tex.add_parser("synth", help="Synthesize a binary texture from a model")
    t_syn.add_argument("--model", required=True)
    t_syn.add_argument("--size", type=int, default=500)
    t_syn.add_argument("-o", "--out", default="texture.pbm")
    t_syn.set_defaults(handler=cmd_texture)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        file_values = load_config_file(args.config)
        configure_logging(args.log_level or file_values.get("log_level"))
        resolved = _resolve(args)
        return args.handler(args, resolved)
    except FormatError as exc:
        print(f"[Error] Malformed file: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except IndexSetMismatchError as exc:
        print(f"[Error] Index set mismatch: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NoSolutionError as exc:
        print(f"[Error] {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    except SolverError as exc:
        print(f"[Error] Solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, RuntimeError) as exc:
        print(f"[Error] {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
