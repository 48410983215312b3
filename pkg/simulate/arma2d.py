"""Two-dimensional recursive (ARMA) filter fields.

The filter is b(e^{iθ})/a(e^{iθ}) with quarter-plane coefficients on
{0..m1}x{0..m2}; its output spectrum is Φ = |b|²/|a|².

Typical usage::

    system = default_system()
    y = simulate_field(system, 500, seed=1)
    c_true = true_covariances(system, IndexSet.box(2, 2))
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.signal

from grid.spec import GridField, GridSpec
from grid.transforms import moments
from trigcore.index_set import IndexSet
from trigcore.sequences import HermitianSeq

logger = logging.getLogger(__name__)

# |y| beyond this is taken as a sign that the recursion is unstable
OVERFLOW_LIMIT = 1e12


class UnstableSystemError(RuntimeError):
    """The recursion of a system blew up during simulation."""


@dataclass(frozen=True, eq=False)
class Arma2D:
    numerator: np.ndarray
    denominator: np.ndarray
    name: str = "custom"

    def __post_init__(self) -> None:
        b = np.array(self.numerator, dtype=float)
        a = np.array(self.denominator, dtype=float)
        if b.ndim != 2 or a.ndim != 2:
            raise ValueError("Arma2D coefficients must be 2-D arrays")
        if b.shape != a.shape:
            raise ValueError(f"Numerator shape {b.shape} differs from denominator shape {a.shape}")
        if a[0, 0] == 0.0:
            raise ValueError("a_(0,0) must be nonzero for the recursion to be evaluable")
        b, a = b / a[0, 0], a / a[0, 0]
        b.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "numerator", b)
        object.__setattr__(self, "denominator", a)

    @property
    def index_set(self) -> IndexSet:
        """Λ = Λ₊ − Λ₊, the support of the coefficients of |b|² and |a|²."""
        m1, m2 = (n - 1 for n in self.numerator.shape)
        return IndexSet.box(m1, m2)

    def _transfer(self, coeffs: np.ndarray, grid: GridSpec) -> np.ndarray:
        t1, t2 = grid.nodes()
        out = np.zeros(grid.points, dtype=np.complex128)
        for (k1, k2), v in np.ndenumerate(coeffs):
            if v != 0.0:
                out += v * np.exp(-1j * (k1 * t1 + k2 * t2))
        return out

    def spectrum(self, grid: GridSpec) -> GridField:
        """Φ = |b|²/|a|² on the grid nodes.

        Raises:
            ValueError: If |a|² is numerically zero at some node.
        """
        if grid.dim != 2:
            raise ValueError(f"Arma2D spectrum needs a 2-D grid, got dimension {grid.dim}")
        den = np.abs(self._transfer(self.denominator, grid)) ** 2
        if float(np.min(den)) < 1e-12:
            raise ValueError(f"Denominator of system {self.name!r} nearly vanishes on the grid (min |a|² = {np.min(den):.3e})")
        num = np.abs(self._transfer(self.numerator, grid)) ** 2
        return GridField(grid=grid, values=num / den)


def default_system() -> Arma2D:
    numerator = np.array(
        [
            [0.9, -0.2, 0.05],
            [0.2, 0.3, 0.05],
            [-0.05, -0.05, 0.1],
        ]
    )
    denominator = np.array(
        [
            [1.0, 0.1, 0.1],
            [-0.2, 0.2, -0.1],
            [0.4, -0.1, -0.2],
        ]
    )
    return Arma2D(numerator=numerator, denominator=denominator, name="default")


def _steps(steps: int | Sequence[int]) -> tuple[int, int]:
    if isinstance(steps, (int, np.integer)):
        shape = (int(steps), int(steps))
    else:
        shape = tuple(int(n) for n in steps)
    if len(shape) != 2 or min(shape) < 1:
        raise ValueError(f"Simulation needs at least one step per axis, got {steps}")
    return shape  # type: ignore[return-value]


def simulate_field(
    system: Arma2D,
    steps: int | Sequence[int],
    seed: Optional[int | np.random.SeedSequence | np.random.Generator] = None,
    noise: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Run the recursion a * y = b * u from zero initial conditions.

    ``u`` is unit-variance white Gaussian noise drawn from
    ``numpy.random.default_rng(seed)`` unless ``noise`` is given. Rows are
    computed in order; within a row the recursion over the second axis is
    a one-dimensional IIR filter.

    Raises:
        UnstableSystemError: If the output overflows.
    """
    shape = _steps(steps)
    if noise is None:
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        u = rng.standard_normal(shape)
    else:
        u = np.asarray(noise, dtype=float)
        if u.shape != shape:
            raise ValueError(f"Noise shape {u.shape} does not match the requested {shape}")
    b, a = system.numerator, system.denominator
    m1 = b.shape[0] - 1
    # moving-average part along the second axis for every numerator row
    ma = [scipy.signal.lfilter(b[j], [1.0], u, axis=1) for j in range(m1 + 1)]
    y = np.zeros(shape)
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(shape[0]):
            v = np.zeros(shape[1])
            for j in range(min(m1, t) + 1):
                v += ma[j][t - j]
                if j > 0:
                    v -= scipy.signal.lfilter(a[j], [1.0], y[t - j])
            y[t] = scipy.signal.lfilter([1.0], a[0], v)
            if not np.all(np.isfinite(y[t])) or float(np.max(np.abs(y[t]))) > OVERFLOW_LIMIT:
                raise UnstableSystemError(f"System {system.name!r} is unstable: output overflowed at row {t}")
    logger.debug("[Simulate] %s field %dx%d, sample variance %.4g", system.name, shape[0], shape[1], float(np.var(y)))
    return y


# adaptive quadrature for true_covariances: start, cap and agreement tolerance
COVARIANCE_GRID_START = 128
COVARIANCE_GRID_MAX = 2048
COVARIANCE_GRID_TOL = 1e-10


def true_covariances(system: Arma2D, index_set: IndexSet, grid: Optional[GridSpec] = None) -> HermitianSeq:
    """Moments of Φ = |b|²/|a|² by grid quadrature.

    With an explicit ``grid`` that grid is used as is. Otherwise the offset grid
    is doubled from 128² until two successive results agree to
    ``COVARIANCE_GRID_TOL``·max(1, |c_0|); poles close to the unit torus need
    fine grids.
    """
    if grid is not None:
        return moments(system.spectrum(grid), index_set)
    g = GridSpec.uniform(2, COVARIANCE_GRID_START, offset=True)
    current = moments(system.spectrum(g), index_set)
    while g.points[0] < COVARIANCE_GRID_MAX:
        g = g.refined(2)
        finer = moments(system.spectrum(g), index_set)
        change = float(np.max(np.abs(finer.values - current.values)))
        current = finer
        if change <= COVARIANCE_GRID_TOL * max(1.0, abs(current.dc)):
            logger.debug("[Simulate] covariances settled on a %dx%d grid (change %.2e)", *g.points, change)
            return current
    logger.warning("[Simulate] covariances still moving on a %dx%d grid (change %.2e)", *g.points, change)
    return current


def numerator_prior(system: Arma2D, index_set: Optional[IndexSet] = None) -> HermitianSeq:
    """Coefficients of P = |b|² on ``index_set`` (default Λ₊ − Λ₊)."""
    lam = index_set or system.index_set
    b = system.numerator
    auto = scipy.signal.correlate(b, b, mode="full")
    centre = np.array(b.shape) - 1
    values = np.zeros(len(lam))
    for i, k in enumerate(lam.exponents):
        pos = centre + np.array(k)
        if np.all(pos >= 0) and np.all(pos < auto.shape):
            values[i] = auto[tuple(pos)]
    return HermitianSeq(index_set=lam, values=values)
