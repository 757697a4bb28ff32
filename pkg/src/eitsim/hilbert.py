"""Tensor-product Hilbert space of one cavity mode and N four-level atoms.

Basis ordering is fixed: the photon number is the slowest index, followed by
atom 1, ..., atom N (atom N fastest).  A basis label is ``(n, (l1, ..., lN))``
with atomic levels numbered 1..4.  Linear index::

    index = n * 4**N + sum_k (l_k - 1) * 4**(N - k)

Operators are ``scipy.sparse`` CSR matrices of shape ``(dim, dim)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

N_LEVELS = 4
DEFAULT_DIM_CAP = 10_000


class DimensionError(ValueError):
    """Requested space exceeds the configured dimension cap."""


@dataclass(frozen=True)
class HilbertSpace:
    n_atoms: int
    n_max: int

    @property
    def atom_dim(self) -> int:
        return N_LEVELS**self.n_atoms

    @property
    def dim(self) -> int:
        return (self.n_max + 1) * self.atom_dim

    @cached_property
    def labels(self) -> list[tuple[int, tuple[int, ...]]]:
        levels = range(1, N_LEVELS + 1)
        return [
            (n, atoms)
            for n in range(self.n_max + 1)
            for atoms in itertools.product(levels, repeat=self.n_atoms)
        ]

    def index(self, n: int, atoms: tuple[int, ...]) -> int:
        if not 0 <= n <= self.n_max:
            raise IndexError(f"photon number {n} outside [0, {self.n_max}]")
        if len(atoms) != self.n_atoms or any(not 1 <= l <= N_LEVELS for l in atoms):
            raise IndexError(f"invalid atomic configuration {atoms!r}")
        idx = 0
        for level in atoms:
            idx = idx * N_LEVELS + (level - 1)
        return n * self.atom_dim + idx

    def label(self, i: int) -> tuple[int, tuple[int, ...]]:
        return self.labels[i]

    @cached_property
    def photon_numbers(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_max + 1), self.atom_dim)

    @cached_property
    def level_table(self) -> np.ndarray:
        """Integer array ``(dim, n_atoms)`` of the atomic level of each atom."""
        return np.array([atoms for _, atoms in self.labels], dtype=int).reshape(
            self.dim, self.n_atoms
        )

    def basis_vector(self, n: int, atoms: tuple[int, ...]) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(n, atoms)] = 1.0
        return v

    def ground_index(self) -> int:
        return self.index(0, (1,) * self.n_atoms)


def build_space(n_atoms: int, n_max: int, dim_cap: int = DEFAULT_DIM_CAP) -> HilbertSpace:
    """Validated constructor for :class:`HilbertSpace`."""
    if int(n_atoms) != n_atoms or n_atoms < 1:
        raise ValueError(f"n_atoms must be an integer >= 1, got {n_atoms!r}")
    if int(n_max) != n_max or n_max < 0:
        raise ValueError(f"n_max must be an integer >= 0, got {n_max!r}")
    space = HilbertSpace(int(n_atoms), int(n_max))
    if space.dim > dim_cap:
        raise DimensionError(
            f"dimension {space.dim} exceeds cap {dim_cap} "
            f"(n_atoms={n_atoms}, n_max={n_max})"
        )
    return space


def _embed(space: HilbertSpace, cavity: sp.spmatrix | None, atom_ops: dict[int, sp.spmatrix]):
    factors = [cavity if cavity is not None else sp.identity(space.n_max + 1, format="csr")]
    for k in range(1, space.n_atoms + 1):
        factors.append(atom_ops.get(k, sp.identity(N_LEVELS, format="csr")))
    out = factors[0]
    for f in factors[1:]:
        out = sp.kron(out, f, format="csr")
    return out.astype(complex).tocsr()


def identity(space: HilbertSpace) -> sp.csr_matrix:
    return sp.identity(space.dim, dtype=complex, format="csr")


def annihilator(space: HilbertSpace) -> sp.csr_matrix:
    """Cavity lowering operator, truncated at ``n_max``."""
    m = space.n_max + 1
    a = sp.diags([np.sqrt(np.arange(1, m, dtype=float))], [1], shape=(m, m), format="csr")
    return _embed(space, a, {})


def creator(space: HilbertSpace) -> sp.csr_matrix:
    return annihilator(space).getH().tocsr()


def photon_number(space: HilbertSpace) -> sp.csr_matrix:
    return sp.diags(space.photon_numbers.astype(complex), format="csr")


def atomic_sigma(space: HilbertSpace, i: int, j: int, k: int) -> sp.csr_matrix:
    """``|i><j|`` acting on atom ``k`` (1-based), identity elsewhere."""
    if not (1 <= i <= N_LEVELS and 1 <= j <= N_LEVELS):
        raise IndexError(f"atomic levels must lie in 1..{N_LEVELS}, got ({i}, {j})")
    if not 1 <= k <= space.n_atoms:
        raise IndexError(f"atom index {k} outside 1..{space.n_atoms}")
    s = sp.csr_matrix(([1.0], ([i - 1], [j - 1])), shape=(N_LEVELS, N_LEVELS))
    return _embed(space, None, {k: s})


def collective_sigma(space: HilbertSpace, i: int, j: int) -> sp.csr_matrix:
    """Sum of ``atomic_sigma(space, i, j, k)`` over all atoms."""
    out = atomic_sigma(space, i, j, 1)
    for k in range(2, space.n_atoms + 1):
        out = out + atomic_sigma(space, i, j, k)
    return out.tocsr()


def adjoint(op: sp.spmatrix) -> sp.csr_matrix:
    return op.getH().tocsr()
