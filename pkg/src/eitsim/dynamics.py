"""Driven Lindblad dynamics, steady state and photon correlations.

Density matrices are vectorised by column stacking,
``vec(rho) = rho.reshape(-1, order="F")``, so that
``vec(A rho B) = (B^T kron A) vec(rho)``.  The generator is::

    L rho = -i [H0 + Hd, rho] + sum_c (c rho c^dag - {c^dag c, rho} / 2)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spl

from .hilbert import HilbertSpace, annihilator
from .krylov import PropagationError, expm_action
from .model import ModelParams, hermitian_hamiltonian, jump_operators

LIOUVILLE_CAP = 100_000
RESIDUAL_TOL = 1e-9
COND_MAX = 1e13

__all__ = [
    "CorrelationSeries",
    "DensityMatrix",
    "Liouvillian",
    "NumericalError",
    "PropagationError",
    "UndefinedStatisticError",
    "build_liouvillian",
    "g2_tau",
    "g2_zero",
    "propagate",
    "steady_state",
    "vec",
    "unvec",
]


class NumericalError(RuntimeError):
    """A linear-algebra step failed its accuracy contract."""


class MultipleSteadyStatesError(NumericalError):
    """The Liouvillian null space is degenerate."""


class UndefinedStatisticError(ValueError):
    """A photon statistic was requested for a (numerically) empty cavity."""


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape(dim, dim, order="F")


@dataclass(frozen=True)
class DensityMatrix:
    space: HilbertSpace
    data: np.ndarray

    def expect(self, op) -> complex:
        return complex((op @ self.data).trace())

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def min_eigenvalue(self) -> float:
        h = 0.5 * (self.data + self.data.conj().T)
        return float(np.linalg.eigvalsh(h)[0])

    def trace_distance(self, other: "DensityMatrix") -> float:
        d = self.data - other.data
        return float(0.5 * np.abs(np.linalg.eigvalsh(0.5 * (d + d.conj().T))).sum())

    def mean_photon(self) -> float:
        return float(np.real(np.diag(self.data) @ self.space.photon_numbers))

    @classmethod
    def ground(cls, space: HilbertSpace) -> "DensityMatrix":
        rho = np.zeros((space.dim, space.dim), dtype=complex)
        g = space.ground_index()
        rho[g, g] = 1.0
        return cls(space, rho)


@dataclass(frozen=True)
class Liouvillian:
    space: HilbertSpace
    matrix: sp.csr_matrix

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(rho), self.space.dim)


def build_liouvillian(
    p: ModelParams, space: HilbertSpace, cap: int = LIOUVILLE_CAP
) -> Liouvillian:
    d = space.dim
    if d * d > cap:
        raise NumericalError(f"Liouville dimension {d * d} exceeds cap {cap}")
    eye = sp.identity(d, dtype=complex, format="csr")
    h = hermitian_hamiltonian(p, space, with_drive=True)
    lv = -1j * (sp.kron(eye, h) - sp.kron(h.T, eye))
    for c in jump_operators(p, space):
        cdc = (c.getH() @ c).tocsr()
        lv = lv + sp.kron(c.conj(), c) - 0.5 * sp.kron(eye, cdc) - 0.5 * sp.kron(cdc.T, eye)
    lv = lv.tocsr()
    lv.eliminate_zeros()
    return Liouvillian(space, lv)


def steady_state(lv: Liouvillian) -> DensityMatrix:
    """Unique trace-one null vector via a bordered sparse solve.

    The equation for ``rho[0, 0]`` is replaced by ``Tr rho = 1``; the
    bordered matrix is singular exactly when the null space is degenerate.
    """
    d = lv.space.dim
    n = lv.dim
    trace_row = vec(np.eye(d)).astype(complex)
    mask = np.ones(n)
    mask[0] = 0.0
    bordered = sp.diags(mask) @ lv.matrix + sp.csr_matrix(
        (trace_row[trace_row != 0], (np.zeros(d, dtype=int), np.flatnonzero(trace_row))),
        shape=(n, n),
    )
    bordered = bordered.tocsc()
    try:
        lu = spl.splu(bordered)
    except RuntimeError as exc:
        raise MultipleSteadyStatesError(f"bordered Liouvillian is singular: {exc}") from exc
    inv = spl.LinearOperator(
        (n, n),
        matvec=lu.solve,
        rmatvec=lambda x: lu.solve(x, trans="H"),
        dtype=complex,
    )
    cond = spl.onenormest(bordered) * spl.onenormest(inv)
    if not np.isfinite(cond) or cond > COND_MAX:
        raise MultipleSteadyStatesError(
            f"bordered Liouvillian is numerically singular (cond ~ {cond:.2e}); "
            "the steady state is not unique"
        )
    rhs = np.zeros(n, dtype=complex)
    rhs[0] = 1.0
    x = lu.solve(rhs)
    rho = unvec(x, d)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    residual = np.linalg.norm(lv.matrix @ vec(rho))
    if residual > RESIDUAL_TOL:
        raise NumericalError(f"steady-state residual {residual:.2e} exceeds {RESIDUAL_TOL}")
    return DensityMatrix(lv.space, rho)


def propagate(lv: Liouvillian, rho0: DensityMatrix, t: float) -> DensityMatrix:
    """``rho(t) = exp(L t) rho0``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return DensityMatrix(rho0.space, rho0.data.copy())
    out = expm_action(lv.matrix, vec(rho0.data), [t])[0]
    return DensityMatrix(lv.space, unvec(out, lv.space.dim))


def _photon_ops(space: HilbertSpace):
    a = annihilator(space)
    ad = a.getH().tocsr()
    return a, ad, (ad @ a).tocsr(), (ad @ ad @ a @ a).tocsr()


def g2_zero(rho: DensityMatrix, floor: float = 1e-12) -> float:
    """``<a^dag^2 a^2> / <a^dag a>^2``."""
    _, _, n_op, n2_op = _photon_ops(rho.space)
    mean = rho.expect(n_op).real
    if mean <= floor:
        raise UndefinedStatisticError(f"<a^dag a> = {mean:.3e}: g2 undefined for an empty cavity")
    return rho.expect(n2_op).real / mean**2


@dataclass(frozen=True)
class CorrelationSeries:
    tau: np.ndarray
    g2: np.ndarray
    mean_photon: float

    def rows(self) -> list[dict]:
        return [dict(tau=t, g2=g) for t, g in zip(self.tau, self.g2)]


def g2_tau(
    p: ModelParams,
    tau_grid,
    lv: Liouvillian | None = None,
    rho_ss: DensityMatrix | None = None,
) -> CorrelationSeries:
    """Intensity correlation from the quantum regression theorem.

    ``G2(tau) = Tr[a^dag a exp(L tau)(a rho_ss a^dag)]``, normalised by the
    squared steady-state photon number.
    """
    tau = np.asarray(tau_grid, dtype=float)
    if lv is None:
        lv = build_liouvillian(p, p.space())
    if rho_ss is None:
        rho_ss = steady_state(lv)
    a, ad, n_op, _ = _photon_ops(lv.space)
    mean = rho_ss.expect(n_op).real
    if mean <= 1e-12:
        raise UndefinedStatisticError(f"<a^dag a> = {mean:.3e}: g2 undefined for an empty cavity")
    conditioned = (a @ rho_ss.data) @ ad.toarray()
    states = expm_action(lv.matrix, vec(conditioned), tau)
    # Tr[N X] = sum_ij N_ji X_ij = vec(N^T) . vec(X)
    weights = vec(n_op.toarray().T)
    g2 = (states @ weights).real / mean**2
    return CorrelationSeries(tau=tau, g2=g2, mean_photon=mean)
