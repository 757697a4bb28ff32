"""Physical parameters and the operators of the driven cavity-EIT model.

All rates and detunings are in units of the cavity decay rate ``kappa``.
Interaction-picture Hamiltonian (hbar = 1), summed over atoms k::

    H0 = sum_k [ delta s33 + Delta s44 + omega (s32 + s23)
                 + g13 (a s31 + a^dag s13) + g24 (a s42 + a^dag s24) ]
    Hd = i eps_p (a^dag - a)

Jump operators: sqrt(2 kappa) a, sqrt(gamma31) s13, sqrt(gamma32) s23,
sqrt(gamma4) s24 (level 4 decays entirely to level 2).  The no-jump generator
``H0 - (i/2) sum c^dag c`` then carries ``-i kappa a^dag a`` for the cavity.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .hilbert import (
    HilbertSpace,
    annihilator,
    atomic_sigma,
    build_space,
    photon_number,
)

RATE_FIELDS = ("g13", "g24", "omega", "kappa", "gamma31", "gamma32", "gamma4", "eps_p")

# Fock cutoffs that keep g2(0) converged to < 1e-3 for eps_p <= 0.1 kappa.
DEFAULT_N_MAX = {1: 4, 2: 3}


class ParameterError(ValueError):
    """Invalid model parameters; the message names the offending key."""


class ChiUndefinedError(ParameterError):
    """The Kerr coefficient g24**2 / big_delta needs big_delta != 0."""


@dataclass(frozen=True)
class ModelParams:
    n_atoms: int = 1
    g13: float = 0.0
    g24: float = 0.0
    omega: float = 0.0
    kappa: float = 1.0
    gamma31: float = 0.0
    gamma32: float = 0.0
    gamma4: float = 0.0
    delta: float = 0.0
    big_delta: float = 0.0
    eps_p: float = 0.0
    n_max: int | None = None

    def __post_init__(self):
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 1:
            raise ParameterError(f"n_atoms must be an integer >= 1, got {self.n_atoms!r}")
        if self.n_max is not None and (int(self.n_max) != self.n_max or self.n_max < 0):
            raise ParameterError(f"n_max must be an integer >= 0, got {self.n_max!r}")
        for name in RATE_FIELDS + ("delta", "big_delta"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        for name in RATE_FIELDS:
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be >= 0, got {getattr(self, name)!r}")
        if self.kappa <= 0:
            raise ParameterError(f"kappa must be > 0, got {self.kappa!r}")
        if self.omega == 0 and self.g13 > 0:
            raise ParameterError("omega must be > 0 when g13 > 0 (alpha undefined)")

    @property
    def cutoff(self) -> int:
        if self.n_max is not None:
            return int(self.n_max)
        return DEFAULT_N_MAX.get(self.n_atoms, 2)

    @property
    def alpha(self) -> float:
        if self.omega <= 0:
            raise ParameterError("alpha = n_atoms * g13**2 / omega**2 requires omega > 0")
        return self.n_atoms * self.g13**2 / self.omega**2

    @property
    def chi(self) -> float:
        if self.big_delta == 0:
            raise ChiUndefinedError("chi = g24**2 / big_delta requires big_delta != 0")
        return self.g24**2 / self.big_delta

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def space(self, n_max: int | None = None) -> HilbertSpace:
        return build_space(self.n_atoms, self.cutoff if n_max is None else n_max)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _check_space(p: ModelParams, space: HilbertSpace) -> None:
    if space.n_atoms != p.n_atoms:
        raise ValueError(f"space has {space.n_atoms} atoms, params have {p.n_atoms}")


def drive_hamiltonian(p: ModelParams, space: HilbertSpace) -> sp.csr_matrix:
    a = annihilator(space)
    return (1j * p.eps_p * (a.getH() - a)).tocsr()


def hermitian_hamiltonian(
    p: ModelParams, space: HilbertSpace, with_drive: bool = False
) -> sp.csr_matrix:
    """Self-adjoint part of the model, optionally including the coherent drive."""
    _check_space(p, space)
    a = annihilator(space)
    ad = a.getH().tocsr()
    h = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for k in range(1, space.n_atoms + 1):
        s = lambda i, j: atomic_sigma(space, i, j, k)  # noqa: E731
        h = h + p.delta * s(3, 3) + p.big_delta * s(4, 4)
        h = h + p.omega * (s(3, 2) + s(2, 3))
        h = h + p.g13 * (a @ s(3, 1) + ad @ s(1, 3))
        h = h + p.g24 * (a @ s(4, 2) + ad @ s(2, 4))
    if with_drive:
        h = h + drive_hamiltonian(p, space)
    h = h.tocsr()
    h.eliminate_zeros()
    return h


def jump_operators(p: ModelParams, space: HilbertSpace) -> list[sp.csr_matrix]:
    """Lindblad collapse operators; channels with zero rate are omitted."""
    _check_space(p, space)
    ops = [np.sqrt(2.0 * p.kappa) * annihilator(space)]
    for k in range(1, space.n_atoms + 1):
        for rate, (i, j) in ((p.gamma31, (1, 3)), (p.gamma32, (2, 3)), (p.gamma4, (2, 4))):
            if rate > 0:
                ops.append(np.sqrt(rate) * atomic_sigma(space, i, j, k))
    return [op.tocsr() for op in ops]


def effective_hamiltonian(p: ModelParams, space: HilbertSpace) -> sp.csr_matrix:
    """Non-Hermitian no-jump generator ``H0 - (i/2) sum_c c^dag c`` (drive off)."""
    h = hermitian_hamiltonian(p, space, with_drive=False)
    for c in jump_operators(p, space):
        h = h - 0.5j * (c.getH() @ c)
    return h.tocsr()


def excitation_number(space: HilbertSpace) -> sp.csr_matrix:
    """Diagonal ``a^dag a + sum_k (s22 + s33 + 2 s44)``."""
    weights = np.array([0, 1, 1, 2])
    atomic = weights[space.level_table - 1].sum(axis=1)
    return sp.diags((space.photon_numbers + atomic).astype(complex), format="csr")


def excitation_numbers(space: HilbertSpace) -> np.ndarray:
    """Integer excitation number of every basis state."""
    return np.rint(excitation_number(space).diagonal().real).astype(int)


def kerr_perturbation(p: ModelParams, space: HilbertSpace) -> sp.csr_matrix:
    """Dispersive replacement ``-chi a^dag a sum_k s22`` of the level-4 coupling."""
    _check_space(p, space)
    chi = p.chi
    n = photon_number(space)
    s22 = sum(atomic_sigma(space, 2, 2, k) for k in range(1, space.n_atoms + 1))
    out = (-chi * (n @ s22)).tocsr()
    out.eliminate_zeros()
    return out


def fig2_params(**overrides) -> ModelParams:
    """Single-atom parameter set of the g2(tau) figure."""
    base = dict(
        n_atoms=1, g13=7.5, g24=7.5, kappa=1.0,
        gamma31=0.325, gamma32=0.325, gamma4=0.325,
        delta=0.0, big_delta=0.0, omega=2.5 * 0.325, eps_p=0.1,
    )
    base.update(overrides)
    return ModelParams(**base)


def fig3_params(**overrides) -> ModelParams:
    """Two-atom parameter set of the g2(0)-versus-delta figure (delta swept)."""
    base = dict(
        n_atoms=2, g13=7.5, g24=7.5, kappa=1.0,
        gamma31=0.325, gamma32=0.325, gamma4=0.325,
        delta=7.5, big_delta=0.0, omega=2.5 * 0.325, eps_p=0.01,
    )
    base.update(overrides)
    return ModelParams(**base)
