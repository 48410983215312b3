"""JSON solution files.

Sections: ``q_coefficients``, ``r_hat``, ``c_hat``, ``gamma``, ``atoms``
(θ in radians, masses), ``kkt`` and ``diagnostics``, plus the prior, the
boundary-projected polynomial and the grid needed to rebuild the spectrum.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from grid.spec import GridSpec
from solve.dual_solvers import DualSolution, SolverDiagnostics
from solve.kkt import KKTReport
from solve.singular import Atom
from trigcore.errors import FormatError
from trigcore.index_set import IndexSet
from trigcore.sequences import HermitianSeq

FORMAT_VERSION = 1


def _seq_to_json(seq: HermitianSeq) -> List[List[float]]:
    return [[float(v.real), float(v.imag)] for v in seq.values]


def _seq_from_json(index_set: IndexSet, rows: Any, name: str) -> HermitianSeq:
    try:
        vals = np.array([complex(float(re), float(im)) for re, im in rows])
        return HermitianSeq(index_set=index_set, values=vals)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"Section {name!r} is malformed: {exc}") from None


def solution_to_dict(solution: DualSolution) -> Dict[str, Any]:
    lam = solution.index_set
    return {
        "format": "covext-solution",
        "version": FORMAT_VERSION,
        "mode": solution.mode,
        "index_set": {"dim": lam.dim, "exponents": [list(k) for k in lam.exponents]},
        "grid": {"points": list(solution.grid.points), "offset": solution.grid.offset},
        "q_coefficients": _seq_to_json(solution.q_hat),
        "q_boundary": _seq_to_json(solution.q_boundary),
        "r_hat": _seq_to_json(solution.r_hat),
        "c_hat": _seq_to_json(solution.c_hat),
        "prior": _seq_to_json(solution.p),
        "gamma": solution.gamma,
        "atoms": [{"theta": list(a.theta), "mass": a.mass} for a in solution.atoms],
        "atom_residual": solution.atom_residual,
        "kkt": solution.kkt.as_dict() if solution.kkt is not None else None,
        "diagnostics": asdict(solution.diagnostics),
    }


def solution_from_dict(data: Dict[str, Any]) -> DualSolution:
    if data.get("format") != "covext-solution":
        raise FormatError("Not a solution file (missing format marker)")
    try:
        lam = IndexSet.from_exponents(data["index_set"]["exponents"])
        grid = GridSpec(points=tuple(data["grid"]["points"]), offset=bool(data["grid"]["offset"]))
        diagnostics = SolverDiagnostics(**data["diagnostics"])
        kkt = KKTReport(**data["kkt"]) if data.get("kkt") is not None else None
        atoms = [Atom(theta=tuple(float(t) for t in a["theta"]), mass=float(a["mass"])) for a in data["atoms"]]
        return DualSolution(
            mode=str(data["mode"]),
            q_hat=_seq_from_json(lam, data["q_coefficients"], "q_coefficients"),
            r_hat=_seq_from_json(lam, data["r_hat"], "r_hat"),
            c_hat=_seq_from_json(lam, data["c_hat"], "c_hat"),
            p=_seq_from_json(lam, data["prior"], "prior"),
            grid=grid,
            diagnostics=diagnostics,
            gamma=data.get("gamma"),
            atoms=atoms,
            atom_residual=float(data.get("atom_residual", 0.0)),
            q_boundary=_seq_from_json(lam, data["q_boundary"], "q_boundary"),
            kkt=kkt,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"Malformed solution file: {exc}") from None


def save_solution(solution: DualSolution, path: str | Path) -> Path:
    out = Path(path)
    with out.open("w", encoding="utf-8") as f:
        json.dump(solution_to_dict(solution), f, indent=2)
    return out


def load_solution(path: str | Path) -> DualSolution:
    p = Path(path)
    try:
        with p.open("r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"Cannot read solution file {p}: {exc}") from None
    return solution_from_dict(data)
