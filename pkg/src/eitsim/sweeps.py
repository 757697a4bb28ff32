"""Parameter sweeps and truncation checks.

Grid points are independent; they run in a process pool capped by the
``EITSIM_THREADS`` environment variable and are returned in grid order.
"""

from __future__ import annotations

import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import spectra
from .dynamics import CorrelationSeries, build_liouvillian, g2_tau, g2_zero, steady_state
from .model import ModelParams

log = logging.getLogger(__name__)

CONVERGENCE_TOL = 1e-3
SWEEP_COLUMNS = ("delta", "g2_zero", "mean_photon", "eit_linewidth", "anharmonicity", "P")


def max_workers(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("EITSIM_THREADS")
    cpus = os.cpu_count() or 1
    if env:
        try:
            return max(1, min(int(env), cpus))
        except ValueError:
            log.warning("ignoring non-integer EITSIM_THREADS=%r", env)
    return cpus


def parallel_map(fn, items, workers: int | None = None) -> list:
    items = list(items)
    workers = min(max_workers(workers), len(items) or 1)
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass
class SweepPoint:
    value: float
    g2_zero: float = math.nan
    mean_photon: float = math.nan
    eit_linewidth: float = math.nan
    anharmonicity: float = math.nan
    P: float = math.nan
    shift_eq9: float = math.nan
    shift_numeric: float = math.nan
    error: str = ""


@dataclass
class SweepResult:
    axis: str
    grid: np.ndarray
    points: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(pt, name) for pt in self.points], dtype=float)

    @property
    def failed(self) -> list:
        return [pt for pt in self.points if pt.error]

    def rows(self) -> list[dict]:
        with_error = bool(self.failed)
        out = []
        for pt in self.points:
            row = {self.axis: pt.value}
            for name in SWEEP_COLUMNS[1:]:
                row[name] = getattr(pt, name)
            if with_error:
                row["error"] = pt.error
            out.append(row)
        return out

    def header(self) -> list[str]:
        cols = [self.axis, *SWEEP_COLUMNS[1:]]
        return cols + (["error"] if self.failed else [])


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a non-empty 1-D sequence")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ValueError("grid must be strictly increasing")
    return grid


def evaluate_point(p: ModelParams) -> SweepPoint:
    """All per-point observables for one parameter set."""
    pt = SweepPoint(value=math.nan)
    lv = build_liouvillian(p, p.space())
    rho = steady_state(lv)
    pt.mean_photon = rho.mean_photon()
    pt.g2_zero = g2_zero(rho)
    report = spectra.blockade_figure(p)
    pt.eit_linewidth = -report.eps0.imag
    pt.anharmonicity = report.anharmonicity
    pt.P = report.P
    try:
        pt.shift_numeric = spectra.pair_shift(p).real
    except spectra.EITIdentificationError as exc:
        log.info("no doubly excited trapping state at %s: %s", p, exc)
    if p.big_delta != 0 and p.omega > 0:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            pt.shift_eq9 = spectra.perturbative_shift(p)
    return pt


def _sweep_job(args):
    p, axis, value = args
    try:
        pt = evaluate_point(p.replace(**{axis: value}))
    except Exception as exc:  # recorded per point; the sweep continues
        pt = SweepPoint(value=math.nan, error=f"{type(exc).__name__}: {exc}")
    pt.value = value
    return pt


def sweep(p: ModelParams, axis: str, grid, workers: int | None = None) -> SweepResult:
    """Evaluate :func:`evaluate_point` along one ``ModelParams`` field."""
    grid = _check_grid(grid)
    if axis not in ModelParams.__dataclass_fields__ or axis in ("n_atoms", "n_max"):
        raise ValueError(f"cannot sweep {axis!r}")
    jobs = [(p, axis, float(v)) for v in grid]
    return SweepResult(axis=axis, grid=grid, points=parallel_map(_sweep_job, jobs, workers))


def sweep_delta(p: ModelParams, grid, workers: int | None = None) -> SweepResult:
    """g2(0) and spectral quantities versus the upper-level detuning delta."""
    grid = _check_grid(grid)
    bound = math.sqrt(p.n_atoms * p.g13**2 + p.omega**2)
    if np.any(np.abs(grid) >= bound):
        warnings.warn(
            f"grid leaves |delta| < sqrt(N g13^2 + omega^2) = {bound:.4g}", stacklevel=2
        )
    return sweep(p, "delta", grid, workers)


def default_delta_grid(p: ModelParams, points: int = 97) -> np.ndarray:
    return np.linspace(-1.2 * p.g13, 1.2 * p.g13, points)


def g2_tau_profile(p: ModelParams, tau_max: float, steps: int) -> CorrelationSeries:
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if tau_max <= 0:
        raise ValueError("tau_max must be > 0")
    return g2_tau(p, np.linspace(0.0, tau_max, int(steps)))


def correlation_time(p: ModelParams) -> float:
    """Inverse amplitude decay rate of the trapping state, ``1 / |Im eps0|``."""
    return 1.0 / -spectra.analyze(p).eps0.imag


@dataclass(frozen=True)
class ConvergenceReport:
    n_max: int
    g2_zero: tuple
    eps0: tuple
    rel_g2: float
    rel_eps0: float
    tol: float = CONVERGENCE_TOL

    @property
    def flagged(self) -> bool:
        return not (self.rel_g2 <= self.tol and self.rel_eps0 <= self.tol)


def convergence_check(p: ModelParams, n_max: int | None = None) -> ConvergenceReport:
    """Compare g2(0) and the trapping eigenvalue at ``n_max`` and ``n_max + 1``."""
    k = p.cutoff if n_max is None else n_max
    if k < 2:
        raise ValueError("convergence_check needs n_max >= 2")
    g2s, eps = [], []
    for cutoff in (k, k + 1):
        q = p.replace(n_max=cutoff)
        g2s.append(g2_zero(steady_state(build_liouvillian(q, q.space()))))
        spec = spectra.manifold_spectrum(q, 1, n_max=cutoff)
        idx, _ = spectra.find_state(spec, spectra.eit_state(q, q.space()))
        eps.append(complex(spec.eigenvalues[idx]))
    rel_g2 = abs(g2s[1] - g2s[0]) / abs(g2s[1])
    rel_eps = abs(eps[1] - eps[0]) / abs(eps[1])
    return ConvergenceReport(k, tuple(g2s), tuple(eps), float(rel_g2), float(rel_eps))


def scan(p: ModelParams, axis: str, values, quantity, workers: int | None = None) -> np.ndarray:
    """Evaluate ``quantity(params)`` for each value of one field."""
    params = [p.replace(**{axis: float(v)}) for v in values]
    return np.array(parallel_map(quantity, params, workers))


def steady_g2(p: ModelParams) -> float:
    return g2_zero(steady_state(build_liouvillian(p, p.space())))


def lossless_anharmonicity(p: ModelParams) -> float:
    return spectra.anharmonicity(p, lossless=True)
