"""Dressed-state manifolds of the non-Hermitian effective Hamiltonian.

Eigenvalues ``eps`` are interaction-picture energies relative to ``n * w_cav``
in units of kappa; the imaginary part is minus the amplitude decay rate.
Every routine that takes ``lossless=True`` works with the self-adjoint part
``H0`` only (cavity and atomic losses dropped).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
from scipy.optimize import linear_sum_assignment

from .hilbert import HilbertSpace, annihilator, atomic_sigma, build_space, collective_sigma
from .model import (
    ModelParams,
    ParameterError,
    effective_hamiltonian,
    excitation_numbers,
    hermitian_hamiltonian,
    kerr_perturbation,
)

BIORTH_TOL = 1e-8
DEGENERACY_RTOL = 1e-8
EIT_OVERLAP_MIN = 0.8
EIT_AMBIGUOUS = 0.9


class SpectrumError(RuntimeError):
    """Eigen-decomposition failed or produced an ill-conditioned eigenbasis."""


class EITIdentificationError(SpectrumError):
    """No unique manifold eigenstate resembles the cavity-EIT trapping state."""


@dataclass(frozen=True)
class ManifoldSpectrum:
    """Bi-orthonormal eigensystem of one excitation-number block.

    ``right[:, i]`` and ``left[:, i]`` live in the block basis ``indices``
    (full-space basis indices) and satisfy ``left.conj().T @ right == I``.
    Right vectors have unit norm.
    """

    n: int
    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    indices: np.ndarray
    labels: list = field(default_factory=list)
    groups: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def embed(self, block_vector: np.ndarray, dim: int) -> np.ndarray:
        full = np.zeros(dim, dtype=complex)
        full[self.indices] = block_vector
        return full

    def restrict(self, full_vector: np.ndarray) -> np.ndarray:
        return np.asarray(full_vector)[self.indices]

    def overlaps(self, full_vector: np.ndarray) -> np.ndarray:
        """``|<v|R_i>|`` for a normalised full-space vector ``v``."""
        v = self.restrict(full_vector)
        return np.abs(v.conj() @ self.right) / np.linalg.norm(self.right, axis=0)


# ---------------------------------------------------------------------------
# block extraction and diagonalisation


def manifold_block(h, space: HilbertSpace, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Dense restriction of an excitation-conserving operator to ``N_exc = n``.

    Returns ``(block, indices)``.  Raises if ``h`` couples the block to the
    rest of the space (e.g. drive switched on) or if the block is empty or
    cut by the Fock truncation.
    """
    if n > space.n_max:
        raise ValueError(f"manifold n={n} is truncated by n_max={space.n_max}")
    exc = excitation_numbers(space)
    idx = np.flatnonzero(exc == n)
    if idx.size == 0:
        raise ValueError(f"manifold n={n} is empty")
    h = h.tocsr()
    rows = h[idx, :]
    outside = np.setdiff1d(np.arange(space.dim), idx)
    if rows[:, outside].count_nonzero() or h[outside, :][:, idx].count_nonzero():
        raise ValueError("operator does not conserve excitation number (drive on?)")
    return rows[:, idx].toarray(), idx


def _group_degenerate(eigenvalues: np.ndarray) -> list[list[int]]:
    scale = max(np.max(np.abs(eigenvalues)), 1e-300) if eigenvalues.size else 1.0
    tol = DEGENERACY_RTOL * scale
    groups: list[list[int]] = []
    assigned = np.full(eigenvalues.size, -1)
    for i in range(eigenvalues.size):
        if assigned[i] >= 0:
            continue
        assigned[i] = len(groups)
        members = [i]
        stack = [i]
        while stack:
            j = stack.pop()
            close = np.flatnonzero((np.abs(eigenvalues - eigenvalues[j]) <= tol) & (assigned < 0))
            for c in close:
                assigned[c] = assigned[i]
                members.append(int(c))
                stack.append(int(c))
        groups.append(sorted(members))
    return groups


def diagonalize_manifold(
    block: np.ndarray, n: int = -1, indices=None, labels=None
) -> ManifoldSpectrum:
    """Full bi-orthogonal eigensystem of a square complex block.

    Left vectors come from the adjoint problem ``A^H y = conj(lambda) y``,
    re-paired with the right eigenvalues and bi-orthonormalised within
    degenerate groups.
    """
    a = np.asarray(block, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"block must be square, got shape {a.shape}")
    m = a.shape[0]
    try:
        lam, right = la.eig(a)
        mu, y = la.eig(a.conj().T)
    except la.LinAlgError as exc:
        raise SpectrumError(
            f"eigen-solver failed: {exc}; cond(block)={np.linalg.cond(a):.3e}"
        ) from exc

    order = np.lexsort((lam.imag, np.round(lam.real, 12)))
    lam, right = lam[order], right[:, order]
    right = right / np.linalg.norm(right, axis=0)

    cost = np.abs(lam[:, None] - mu.conj()[None, :])
    _, cols = linear_sum_assignment(cost)
    y = y[:, cols]

    groups = _group_degenerate(lam)
    group_of = np.empty(m, dtype=int)
    for g, members in enumerate(groups):
        group_of[members] = g
    overlap = y.conj().T @ right
    overlap[group_of[:, None] != group_of[None, :]] = 0.0
    try:
        left = y @ np.linalg.inv(overlap).conj().T
    except np.linalg.LinAlgError as exc:
        raise SpectrumError(
            f"left/right eigenvectors are not bi-orthogonalisable (defective block?); "
            f"cond(R)={np.linalg.cond(right):.3e}"
        ) from exc
    err = np.max(np.abs(left.conj().T @ right - np.eye(m))) if m else 0.0
    if err > BIORTH_TOL:
        raise SpectrumError(
            f"bi-orthonormality violated by {err:.3e}; cond(R)={np.linalg.cond(right):.3e}"
        )
    idx = np.arange(m) if indices is None else np.asarray(indices)
    return ManifoldSpectrum(
        n=n,
        eigenvalues=lam,
        right=right,
        left=left,
        indices=idx,
        labels=list(labels) if labels is not None else [],
        groups=groups,
    )


def generator(p: ModelParams, space: HilbertSpace, lossless: bool = False, kerr: bool = False):
    """Drive-free generator used for manifold analysis.

    ``kerr=True`` swaps the level-4 coupling for the dispersive term
    ``-chi a^dag a sum s22``.
    """
    q = p.replace(g24=0.0) if kerr else p
    h = hermitian_hamiltonian(q, space) if lossless else effective_hamiltonian(q, space)
    if kerr:
        h = h + kerr_perturbation(p, space)
    return h.tocsr()


def manifold_spectrum(
    p: ModelParams, n: int, lossless: bool = False, kerr: bool = False, n_max: int | None = None
) -> ManifoldSpectrum:
    space = build_space(p.n_atoms, max(n, 1) if n_max is None else n_max)
    h = generator(p, space, lossless=lossless, kerr=kerr)
    block, idx = manifold_block(h, space, n)
    return diagonalize_manifold(block, n=n, indices=idx, labels=[space.labels[i] for i in idx])


# ---------------------------------------------------------------------------
# analytic reference states


def _dark_ratio(p: ModelParams) -> float:
    return p.g13 / p.omega if p.g13 else 0.0


def _dark_creator(p: ModelParams, space: HilbertSpace):
    return annihilator(space).getH() - _dark_ratio(p) * collective_sigma(space, 2, 1)


def eit_state(p: ModelParams, space: HilbertSpace) -> np.ndarray:
    """Normalised trapping state ``(a^dag - (g13/omega) sum s21)|0>``."""
    v0 = space.basis_vector(0, (1,) * space.n_atoms)
    v = _dark_creator(p, space) @ v0
    return v / np.linalg.norm(v)


def eit_pair_state(p: ModelParams, space: HilbertSpace) -> np.ndarray:
    """Normalised double trapping excitation ``(a^dag - (g13/omega) sum s21)^2 |0>``."""
    if space.n_max < 2:
        raise ValueError("eit_pair_state needs n_max >= 2")
    b = _dark_creator(p, space)
    v = b @ (b @ space.basis_vector(0, (1,) * space.n_atoms))
    return v / np.linalg.norm(v)


def unshifted_candidate_state(p: ModelParams, space: HilbertSpace) -> np.ndarray:
    """The delta = 0 two-excitation state in its printed form, normalised.

    ``a^dag^2 + (1/N) sum_{i!=j} (s21^i s21^j + s31^i s31^j)`` on the ground
    state.  Kept for reference; its coefficients are not claimed to be an
    exact eigenvector.
    """
    v0 = space.basis_vector(0, (1,) * space.n_atoms)
    ad = annihilator(space).getH()
    v = ad @ (ad @ v0)
    for i in range(1, space.n_atoms + 1):
        for j in range(1, space.n_atoms + 1):
            if i == j:
                continue
            for lvl in (2, 3):
                v = v + (atomic_sigma(space, lvl, 1, i) @ (atomic_sigma(space, lvl, 1, j) @ v0)) / space.n_atoms
    return v / np.linalg.norm(v)


def find_state(spectrum: ManifoldSpectrum, reference: np.ndarray) -> tuple[int, float]:
    """Index of the eigenstate with maximal overlap with ``reference``."""
    ov = spectrum.overlaps(reference)
    order = np.argsort(ov)[::-1]
    best = int(order[0])
    if ov[best] < EIT_OVERLAP_MIN:
        raise EITIdentificationError(
            f"best overlap {ov[best]:.3f} with the reference state is below {EIT_OVERLAP_MIN}"
        )
    if ov.size > 1 and ov[order[1]] > EIT_AMBIGUOUS:
        raise EITIdentificationError(
            f"ambiguous identification: overlaps {ov[best]:.3f} and {ov[order[1]]:.3f}"
        )
    return best, float(ov[best])


# ---------------------------------------------------------------------------
# closed-form results


def analytic_n1(p: ModelParams) -> tuple[complex, complex, complex]:
    """Approximate single-excitation eigenvalues ``(eps0, eps_plus, eps_minus)``.

    Valid for negligible upper-level width and detuning.
    """
    alpha = p.alpha
    k, om = p.kappa, p.omega
    eps0 = -1j * k / (1 + alpha)
    root = om * np.sqrt(complex(1 + alpha - (k / (2 * om)) ** 2))
    return eps0, -0.5j * k + root, -0.5j * k - root


def analytic_n2_lossless(p: ModelParams) -> np.ndarray:
    """Exact two-excitation spectrum of one atom at zero detunings and losses."""
    if p.n_atoms != 1:
        raise ParameterError("analytic_n2_lossless applies to n_atoms = 1")
    for name in ("delta", "big_delta", "gamma31", "gamma32", "gamma4"):
        if getattr(p, name) != 0:
            raise ParameterError(f"analytic_n2_lossless requires {name} = 0")
    g13, g24, om = p.g13, p.g24, p.omega
    big_g2 = g24**2 + om**2 + 2 * g13**2
    inner = np.sqrt(max(big_g2**2 / 4 - 2 * g13**2 * g24**2, 0.0))
    outer = np.sqrt(np.maximum([big_g2 / 2 - inner, big_g2 / 2 + inner], 0.0))
    return np.sort(np.concatenate([-outer, outer]))


def perturbative_shift(p: ModelParams) -> float:
    """Dispersive level shift of the doubly excited trapping state.

    One atom: ``-chi * 2 alpha / (1 + 2 alpha)``.  Several atoms:
    ``-2 chi alpha / (1 + alpha)**2`` away from delta = 0, and 3/2 of that
    in the degenerate delta = 0 case.
    """
    chi = p.chi
    if abs(p.big_delta) < 10 * p.g24:
        warnings.warn(
            f"|big_delta| = {abs(p.big_delta):g} < 10 g24 = {10 * p.g24:g}: "
            "outside the dispersive regime",
            stacklevel=2,
        )
    alpha = p.alpha
    if p.n_atoms == 1:
        return -chi * 2 * alpha / (1 + 2 * alpha)
    shift = -2 * chi * alpha / (1 + alpha) ** 2
    if abs(p.delta) > 10 * abs(shift):
        return shift
    if p.delta != 0:
        warnings.warn(
            f"|delta| = {abs(p.delta):g} is within the degenerate window "
            f"10|shift| = {10 * abs(shift):g}; using the degenerate result",
            stacklevel=2,
        )
    return 1.5 * shift


def first_order_shift(p: ModelParams) -> float:
    """Degenerate first-order Kerr shift computed numerically at finite N.

    Projects ``-chi a^dag a sum s22`` onto the zero-energy subspace of the
    lossless two-excitation block (g24 = 0) and returns the eigenvalue whose
    eigenvector is closest to the doubly excited trapping state.
    """
    chi = p.chi
    space = build_space(p.n_atoms, 2)
    h0 = hermitian_hamiltonian(p.replace(g24=0.0), space)
    block, idx = manifold_block(h0, space, 2)
    vals, vecs = la.eigh(block)
    scale = max(np.max(np.abs(vals)), 1.0)
    null = vecs[:, np.abs(vals) <= 1e-9 * scale]
    if null.shape[1] == 0:
        raise SpectrumError("no zero-energy two-excitation state (big_delta = 0?)")
    v_kerr = kerr_perturbation(p, space).toarray()[np.ix_(idx, idx)]
    sub = null.conj().T @ v_kerr @ null
    shifts, coeffs = la.eigh((sub + sub.conj().T) / 2)
    target = eit_pair_state(p, space)[idx]
    ov = np.abs(target.conj() @ (null @ coeffs))
    return float(shifts[int(np.argmax(ov))]) if chi else 0.0


# ---------------------------------------------------------------------------
# numerical spectroscopy


@dataclass(frozen=True)
class EITAnalysis:
    """Single- and two-excitation manifolds with the trapping states located."""

    params: ModelParams
    space: HilbertSpace
    n1: ManifoldSpectrum
    n2: ManifoldSpectrum
    eit_index: int
    eit_overlap: float

    @property
    def eps0(self) -> complex:
        return complex(self.n1.eigenvalues[self.eit_index])

    def drive_elements(self) -> np.ndarray:
        """``<L_f| a^dag |R_eit>`` for every two-excitation eigenstate f."""
        ad = annihilator(self.space).getH()
        r = self.n1.embed(self.n1.right[:, self.eit_index], self.space.dim)
        return self.n2.left.conj().T @ (ad @ r)[self.n2.indices]

    def pair_index(self) -> tuple[int, float]:
        return find_state(self.n2, eit_pair_state(self.params, self.space))


def analyze(p: ModelParams, lossless: bool = False, kerr: bool = False) -> EITAnalysis:
    space = build_space(p.n_atoms, 2)
    h = generator(p, space, lossless=lossless, kerr=kerr)
    spectra = {}
    for n in (1, 2):
        block, idx = manifold_block(h, space, n)
        spectra[n] = diagonalize_manifold(
            block, n=n, indices=idx, labels=[space.labels[i] for i in idx]
        )
    i0, ov = find_state(spectra[1], eit_state(p, space))
    return EITAnalysis(p, space, spectra[1], spectra[2], i0, ov)


def pair_shift(p: ModelParams, lossless: bool = False, kerr: bool = False) -> complex:
    """``eps2 - 2 eps0`` for the two-excitation state continuous with two trapping excitations."""
    res = analyze(p, lossless=lossless, kerr=kerr)
    j, _ = res.pair_index()
    return complex(res.n2.eigenvalues[j] - 2 * res.eps0)


def _driven_states(res: EITAnalysis, rtol: float = 1e-6) -> np.ndarray:
    m = np.abs(res.drive_elements())
    return np.flatnonzero(m > rtol * max(m.max(), 1e-300))


def anharmonicity(p: ModelParams, lossless: bool = False, kerr: bool = False) -> float:
    """Distance of the nearest drive-accessible n=2 level from twice the EIT level."""
    res = analyze(p, lossless=lossless, kerr=kerr)
    accessible = _driven_states(res)
    target = 2 * res.eps0.real
    re2 = res.n2.eigenvalues[accessible].real
    return float(np.min(np.abs(re2 - target)))


@dataclass(frozen=True)
class BlockadeReport:
    P: float
    rates: list
    w01: float
    anharmonicity: float
    eps0: complex


def _golden_rule(eps_p, element, eps_final, eps_initial, w_drive):
    width = -2.0 * eps_final.imag
    detuning = w_drive - (eps_final.real - eps_initial.real)
    if width <= 0:
        return 0.0 if abs(element) == 0 else np.inf
    return eps_p**2 * abs(element) ** 2 * width / (detuning**2 + width**2 / 4)


def blockade_figure(p: ModelParams, kerr: bool = False) -> BlockadeReport:
    """Two-photon to one-photon absorption ratio ``P = sum_f W(1->2f) / W(0->1)``.

    Weak-drive Fermi rule with the final-state Lorentzian,
    ``W = eps_p^2 |<L_f|a^dag|R_i>|^2 G_f / ((w - (Re e_f - Re e_i))^2 + G_f^2/4)``,
    ``G_f = -2 Im e_f``, the drive tuned to the EIT transition ``w = Re eps0``.
    """
    if p.eps_p <= 0:
        raise ParameterError("blockade_figure requires eps_p > 0")
    res = analyze(p, kerr=kerr)
    eps0 = res.eps0
    w_drive = eps0.real

    ad = annihilator(res.space).getH()
    ground = res.space.basis_vector(0, (1,) * res.space.n_atoms)
    m01 = res.n1.left[:, res.eit_index].conj() @ (ad @ ground)[res.n1.indices]
    w01 = _golden_rule(p.eps_p, m01, eps0, 0j, w_drive)

    elements = res.drive_elements()
    rates = []
    for f in _driven_states(res):
        w = _golden_rule(p.eps_p, elements[f], complex(res.n2.eigenvalues[f]), eps0, w_drive)
        rates.append((int(f), float(w)))
    total = sum(w for _, w in rates)
    target = 2 * w_drive
    accessible = [f for f, _ in rates]
    anh = float(np.min(np.abs(res.n2.eigenvalues[accessible].real - target))) if accessible else np.nan
    return BlockadeReport(P=float(total / w01), rates=rates, w01=float(w01), anharmonicity=anh, eps0=eps0)


def spectrum_rows(p: ModelParams, manifolds=(1, 2), lossless: bool = False) -> list[dict]:
    """Rows ``(n, index, re_eps, im_eps, overlap_eit)`` for CSV export.

    ``overlap_eit`` is the overlap with the trapping state (n=1) or with the
    doubly excited trapping state (n=2); vacuum for n=0.
    """
    space = build_space(p.n_atoms, max(max(manifolds), 2))
    h = generator(p, space, lossless=lossless)
    refs = {0: space.basis_vector(0, (1,) * space.n_atoms), 1: eit_state(p, space)}
    if space.n_max >= 2:
        refs[2] = eit_pair_state(p, space)
    rows = []
    for n in manifolds:
        block, idx = manifold_block(h, space, n)
        spec = diagonalize_manifold(block, n=n, indices=idx)
        ov = spec.overlaps(refs[n]) if n in refs else np.full(len(spec), np.nan)
        for i, eps in enumerate(spec.eigenvalues):
            rows.append(dict(n=n, index=i, re_eps=eps.real, im_eps=eps.imag, overlap_eit=ov[i]))
    return rows
