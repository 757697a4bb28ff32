"""Property suite run by ``eitsim check``.

Each check takes a :class:`ModelParams` and returns a :class:`CheckResult`.
All random test states come from a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from . import spectra
from .dynamics import (
    DensityMatrix,
    build_liouvillian,
    g2_tau,
    g2_zero,
    propagate,
    steady_state,
    vec,
)
from .model import (
    ModelParams,
    effective_hamiltonian,
    excitation_number,
    hermitian_hamiltonian,
    jump_operators,
)
from .sweeps import convergence_check


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    limit: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.value:.3e} (limit {self.limit:.1e})"


def _result(name, value, limit, upper=True) -> CheckResult:
    ok = bool(value <= limit) if upper else bool(value >= limit)
    return CheckResult(name, ok, float(value), float(limit))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (x + x.conj().T)


class Context:
    """Lazily shared Liouvillian and steady state for one parameter set."""

    def __init__(self, p: ModelParams):
        self.p = p
        self.space = p.space()
        self._lv = None
        self._rho = None

    @property
    def lv(self):
        if self._lv is None:
            self._lv = build_liouvillian(self.p, self.space)
        return self._lv

    @property
    def rho(self) -> DensityMatrix:
        if self._rho is None:
            self._rho = steady_state(self.lv)
        return self._rho


def check_hamiltonian_hermitian(ctx):
    h = hermitian_hamiltonian(ctx.p, ctx.space, with_drive=True)
    return _result("hamiltonian self-adjoint", abs(h - h.getH()).max(), 0.0)


def check_excitation_conserved(ctx):
    h = effective_hamiltonian(ctx.p, ctx.space)
    n = excitation_number(ctx.space)
    return _result("[H_eff, N_exc] = 0", abs(h @ n - n @ h).max(), 0.0)


def check_effective_identity(ctx):
    h = hermitian_hamiltonian(ctx.p, ctx.space)
    for c in jump_operators(ctx.p, ctx.space):
        h = h - 0.5j * (c.getH() @ c)
    diff = abs(effective_hamiltonian(ctx.p, ctx.space) - h).max()
    return _result("H_eff = H0 - i/2 sum c^dag c", diff, 1e-14)


def check_dissipative_spectrum(ctx):
    ev = la.eigvals(effective_hamiltonian(ctx.p, ctx.space).toarray())
    return _result("max Im eig(H_eff)", ev.imag.max(), 1e-10)


def check_biorthonormal(ctx):
    worst = 0.0
    for n in (1, 2):
        spec = spectra.manifold_spectrum(ctx.p, n)
        worst = max(worst, np.abs(spec.left.conj().T @ spec.right - np.eye(len(spec))).max())
    return _result("manifold bi-orthonormality", worst, 1e-8)


def check_trace_annihilation(ctx, samples: int = 100):
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(samples):
        rho = random_hermitian(ctx.space.dim, rng)
        worst = max(worst, abs(np.trace(ctx.lv.apply(rho))) / np.linalg.norm(rho))
    return _result("|Tr L rho| / ||rho||", worst, 1e-10)


def check_hermiticity_preserved(ctx, samples: int = 100):
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(samples):
        rho = random_hermitian(ctx.space.dim, rng)
        out = ctx.lv.apply(rho)
        worst = max(worst, np.linalg.norm(out - out.conj().T) / np.linalg.norm(rho))
    return _result("||L rho - (L rho)^dag|| / ||rho||", worst, 1e-10)


def check_steady_residual(ctx):
    return _result("steady-state residual", np.linalg.norm(ctx.lv.matrix @ vec(ctx.rho.data)), 1e-9)


def check_positivity(ctx):
    return _result("min eig rho_ss", ctx.rho.min_eigenvalue(), -1e-8, upper=False)


def relaxation_time(ctx) -> float:
    return 1.0 / -spectra.analyze(ctx.p).eps0.imag


def check_propagation_agrees(ctx):
    t = 30.0 * relaxation_time(ctx)
    late = propagate(ctx.lv, DensityMatrix.ground(ctx.space), t)
    return _result("trace distance propagate vs steady", late.trace_distance(ctx.rho), 1e-6)


def check_g2_tail(ctx):
    t = 20.0 * relaxation_time(ctx)
    series = g2_tau(ctx.p, [0.0, t], ctx.lv, ctx.rho)
    return _result("|g2(tau -> inf) - 1|", abs(series.g2[-1] - 1.0), 0.02)


def check_truncation(ctx):
    report = convergence_check(ctx.p)
    return _result("truncation delta g2(0)", max(report.rel_g2, report.rel_eps0), 1e-3)


def check_g2_defined(ctx):
    return _result("g2(0) >= 0", g2_zero(ctx.rho), -1e-8, upper=False)


ALL_CHECKS = (
    check_hamiltonian_hermitian,
    check_excitation_conserved,
    check_effective_identity,
    check_dissipative_spectrum,
    check_biorthonormal,
    check_trace_annihilation,
    check_hermiticity_preserved,
    check_steady_residual,
    check_positivity,
    check_g2_defined,
    check_propagation_agrees,
    check_g2_tail,
    check_truncation,
)


def run_checks(p: ModelParams, checks=ALL_CHECKS) -> list[CheckResult]:
    ctx = Context(p)
    return [check(ctx) for check in checks]


__all__ = ["CheckResult", "run_checks", "ALL_CHECKS", "random_hermitian"]
