"""Wiener-system texture models: a linear filter followed by a threshold.

A binary texture y is modelled as y = 1{x > τ} where x is a zero-mean,
unit-variance Gaussian field with a rational spectrum P/Q. Identification
estimates τ, transports the binary covariances to Gaussian correlations,
fits P/Q by soft or hard covariance matching and factorizes it into a filter.

Typical usage::

    model = identify(y, IndexSet.box(2, 2))
    texture = synthesize_texture(model, 500, seed=3)
    save_model(model, "texture.json")
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
import scipy.special

from analysis.weights import hard_weight_from_soft
from estimate.covariance import biased_cov
from grid.spec import GridField, GridSpec
from grid.transforms import field_coefficients, synthesize_array
from solve.config import SolverConfig
from solve.dual_solvers import DualSolution, resolve_grid, solve_hard, solve_soft
from trigcore.errors import FormatError
from trigcore.index_set import IndexSet
from trigcore.sequences import HermitianSeq
from trigcore.weights import WeightMatrix
from wiener.factorization import embed_filter, factorize_spectrum
from wiener.price import estimate_threshold, price_forward, price_inverse, price_range

logger = logging.getLogger(__name__)

DEFAULT_WEIGHT = 0.01

Lag = Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class WienerModel:
    tau: float
    p: HermitianSeq
    q: HermitianSeq
    cx: HermitianSeq
    filter: np.ndarray
    grid_points: Tuple[int, ...]
    offset: bool = True

    @property
    def grid(self) -> GridSpec:
        return GridSpec(points=self.grid_points, offset=self.offset)

    def spectrum(self, grid: Optional[GridSpec] = None) -> GridField:
        g = grid or self.grid
        lam = self.q.index_set
        qf = synthesize_array(lam, self.q.values, g).real
        pf = np.maximum(synthesize_array(lam, self.p.values, g).real, 0.0)
        return GridField(grid=g, values=pf / qf)

    def gaussian_covariances(self, lags: Iterable[Lag]) -> Dict[Lag, float]:
        """Correlations of the filtered noise at ``lags`` (unit variance)."""
        h = np.asarray(self.filter)
        power = np.abs(np.fft.fftn(h)) ** 2
        acf = np.fft.ifftn(power).real
        acf = acf / acf.flat[0]
        return {tuple(k): float(acf[tuple(np.mod(k, h.shape))]) for k in lags}

    def predicted_binary_covariances(self, lags: Iterable[Lag]) -> Dict[Lag, float]:
        return {k: price_forward(v, self.tau) for k, v in self.gaussian_covariances(lags).items()}

    @property
    def predicted_mean(self) -> float:
        return float(1.0 - scipy.special.ndtr(self.tau))


def _normalized_filter(spectrum: GridField) -> np.ndarray:
    h = factorize_spectrum(spectrum)
    return h / np.sqrt(float(np.sum(np.abs(h) ** 2)))


def model_from_rational(
    tau: float, p: HermitianSeq, q: HermitianSeq, grid: GridSpec, cx: Optional[HermitianSeq] = None
) -> WienerModel:
    """Model with spectrum P/Q; ``cx`` defaults to its normalized grid moments."""
    lam = q.index_set
    spectrum = GridField(
        grid=grid,
        values=np.maximum(synthesize_array(lam, p.values, grid).real, 0.0) / synthesize_array(lam, q.values, grid).real,
    )
    if cx is None:
        coeffs = field_coefficients(spectrum.values, grid)
        moments = np.array([coeffs[tuple(np.mod(k, grid.points))] for k in lam.exponents])
        cx = HermitianSeq(lam, moments / moments[lam.zero_position].real)
    return WienerModel(
        tau=float(tau), p=p, q=q, cx=cx, filter=_normalized_filter(spectrum), grid_points=grid.points, offset=grid.offset
    )


def binary_covariances(y: np.ndarray, index_set: IndexSet) -> HermitianSeq:
    """Biased estimate of E[y_{t+k} y_t] − E[y]² from the centred field."""
    arr = np.asarray(y, dtype=float)
    return biased_cov(arr - float(np.mean(arr)), index_set)


def _transport(cy: HermitianSeq, tau: float) -> HermitianSeq:
    lam = cy.index_set
    lo, hi = price_range(tau)
    # the lag-0 value is fixed by the threshold; rescale so it maps to c^x_0 = 1
    scale = hi / cy.dc if cy.dc > 0.0 else 1.0
    values = np.zeros(len(lam))
    for i in lam.half_positions:
        target = float(cy.values[i].real) * scale
        if not lo <= target <= hi:
            logger.warning("[Wiener] c^y at lag %s = %.4g outside [%.4g, %.4g]; clamped", lam.exponents[i], target, lo, hi)
            target = float(np.clip(target, lo, hi))
        values[i] = price_inverse(target, tau)
    values[lam.reflection[lam.half_positions]] = values[lam.half_positions]
    values[lam.zero_position] = 1.0
    return HermitianSeq(lam, values)


IDENTIFY_MODES = ("soft", "hard")


def _fit_spectrum(cx: HermitianSeq, p: HermitianSeq, W: Optional[WeightMatrix], mode: str, cfg: SolverConfig) -> DualSolution:
    lam = cx.index_set
    if mode == "soft":
        return solve_soft(cx, p, W if W is not None else WeightMatrix.scalar(DEFAULT_WEIGHT, lam), cfg)
    if W is not None:
        return solve_hard(cx, p, W, cfg)
    soft = solve_soft(cx, p, WeightMatrix.scalar(DEFAULT_WEIGHT, lam), cfg)
    try:
        W_hard = hard_weight_from_soft(WeightMatrix.scalar(DEFAULT_WEIGHT, lam), soft.q_hat)
    except ValueError:
        logger.info("[Wiener] soft fit is trivial; no hard radius to derive, keeping it")
        return soft
    logger.info("[Wiener] hard weight derived from the default soft weight (lambda=%.4g)", W_hard.scalar_value())
    return solve_hard(cx, p, W_hard, cfg)


def identify(
    y: np.ndarray,
    index_set: IndexSet,
    W: Optional[WeightMatrix] = None,
    config: Optional[SolverConfig] = None,
    mode: str = "soft",
) -> WienerModel:
    """Fit a Wiener texture model to the binary field ``y``.

    The spectrum is the approximate covariance-matching estimate with the flat
    prior P ≡ 1. With ``mode="soft"`` ``W`` is the penalty weight (default
    0.01·I). With ``mode="hard"`` ``W`` bounds ‖r − c‖_{W⁻¹} ≤ 1; when omitted
    it is mapped from the default soft weight with :func:`hard_weight_from_soft`.
    """
    if mode not in IDENTIFY_MODES:
        raise ValueError(f"Unknown identification mode {mode!r}; expected one of {IDENTIFY_MODES}")
    arr = np.asarray(y, dtype=float)
    tau = estimate_threshold(arr)
    logger.info("[Wiener] threshold tau = %.6f (mean %.4f)", tau, float(np.mean(arr)))
    cy = binary_covariances(arr, index_set)
    cx = _transport(cy, tau)
    cfg = config or SolverConfig.from_env()
    p = HermitianSeq.unit(index_set)
    sol = _fit_spectrum(cx, p, W, mode, cfg)
    if sol.atoms:
        logger.warning("[Wiener] spectral estimate has %d atom(s); only the regular part is used", len(sol.atoms))
    grid = resolve_grid(index_set, cfg)
    spectrum = sol.spectrum(grid)
    model = WienerModel(
        tau=tau, p=p, q=sol.q_hat, cx=cx, filter=_normalized_filter(spectrum), grid_points=grid.points, offset=grid.offset
    )
    logger.info("[Wiener] identified model on %s grid", "x".join(str(n) for n in grid.points))
    return model


def synthesize_texture(model: WienerModel, size: int | Sequence[int], seed: Optional[int] = None) -> np.ndarray:
    """White noise, periodic filtering, unit-variance scaling and thresholding at τ."""
    dim = len(model.grid_points)
    shape = (int(size),) * dim if isinstance(size, (int, np.integer)) else tuple(int(n) for n in size)
    if len(shape) != dim or min(shape) < 1:
        raise ValueError(f"Texture size {size} does not fit a {dim}-D model")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(shape)
    h = embed_filter(model.filter, shape)
    x = np.fft.ifftn(np.fft.fftn(noise) * np.fft.fftn(h)).real
    rms = float(np.sqrt(np.mean(x * x)))
    if rms > 0.0:
        x = x / rms
    return (x > model.tau).astype(np.uint8)


@dataclass(frozen=True)
class BinaryStatistics:
    mean: float
    covariances: Dict[Lag, float]
    standard_errors: Dict[Lag, float]


def binary_statistics(y: np.ndarray, lags: Iterable[Sequence[int]]) -> BinaryStatistics:
    """Mean and lag covariances E[y_{t+k} y_t] − E[y]² over the overlapping region.

    Standard errors are rough i.i.d. values sqrt(var(product)/n).
    """
    arr = np.asarray(y, dtype=float)
    m = float(np.mean(arr))
    covs: Dict[Lag, float] = {}
    errs: Dict[Lag, float] = {}
    for lag in lags:
        k = tuple(int(v) for v in lag)
        a, b = [], []
        for n, kj in zip(arr.shape, k):
            a.append(slice(max(0, -kj), n - max(0, kj)))
            b.append(slice(max(0, kj), n + min(0, kj)))
        prod = arr[tuple(a)] * arr[tuple(b)]
        covs[k] = float(np.mean(prod)) - m * m
        errs[k] = float(np.std(prod) / np.sqrt(prod.size))
    return BinaryStatistics(mean=m, covariances=covs, standard_errors=errs)


def _seq_json(seq: HermitianSeq) -> list:
    return [[float(v.real), float(v.imag)] for v in seq.values]


def save_model(model: WienerModel, path: str | Path) -> Path:
    h = np.asarray(model.filter)
    data = {
        "format": "covext-wiener",
        "tau": model.tau,
        "exponents": [list(k) for k in model.q.index_set.exponents],
        "p": _seq_json(model.p),
        "q": _seq_json(model.q),
        "cx": _seq_json(model.cx),
        "grid_points": list(model.grid_points),
        "offset": model.offset,
        "filter_real": h.real.ravel().tolist(),
        "filter_imag": h.imag.ravel().tolist() if np.iscomplexobj(h) else None,
    }
    out = Path(path)
    with out.open("w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)
    return out


def load_model(path: str | Path) -> WienerModel:
    p = Path(path)
    try:
        with p.open("r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"Cannot read model file {p}: {exc}") from None
    if data.get("format") != "covext-wiener":
        raise FormatError(f"{p} is not a Wiener model file")
    try:
        lam = IndexSet.from_exponents(data["exponents"])
        points = tuple(int(n) for n in data["grid_points"])
        h = np.array(data["filter_real"], dtype=float)
        if data.get("filter_imag") is not None:
            h = h + 1j * np.array(data["filter_imag"], dtype=float)
        seqs = {
            key: HermitianSeq(lam, [complex(re, im) for re, im in data[key]]) for key in ("p", "q", "cx")
        }
        return WienerModel(
            tau=float(data["tau"]),
            p=seqs["p"],
            q=seqs["q"],
            cx=seqs["cx"],
            filter=h.reshape(points),
            grid_points=points,
            offset=bool(data.get("offset", True)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"Malformed model file {p}: {exc}") from None
