"""The lattice matrix, its eigenvector recursions, and transfer matrices.

The matrix N over an :class:`OrderedIndex` has diagonal entries
``frak_h`` and off-diagonal entries ``frak_n`` on strict one-step pairs.
It is upper triangular in index order, so its eigenvalues are the diagonal
values and the left/right eigenvectors solve a forward recursion:

    (h_s - h_t) l_s(t) = sum over pi with s <= pi < t of l_s(pi) N[pi, t]
    (h_t - h_s) r_t(s) = sum over pi with s < pi <= t of N[s, pi] r_t(pi)

with unit normalization on the diagonal.  No general eigensolver is used;
the recursion is the algorithm.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .analytic import PointConfig, frak_h, frak_n
from .errors import DegenerateConfig, DegenerateSpectrum, PoleCollision
from .permutations import (
    OrderedIndex,
    PartialPermutation,
    edge_set,
    leq_step,
)

DEGENERACY_RTOL = 1e-8
POLE_RTOL = 1e-12

Kernel = Callable[[int, int], complex]


@dataclass(frozen=True)
class NMatrix:
    index: OrderedIndex
    pts: PointConfig
    entries: np.ndarray
    diag: np.ndarray


@dataclass(frozen=True)
class EigenSystem:
    """L[s][t] = l_s(t), R[s][t] = r_t(s); L and R are mutually inverse."""

    index: OrderedIndex
    L: np.ndarray
    R: np.ndarray
    diag: np.ndarray


@dataclass(frozen=True)
class TransferMatrix:
    index: OrderedIndex
    lam: complex
    N: int
    entries: np.ndarray
    kind: str


@dataclass(frozen=True)
class DisintegratedMatrix:
    index: OrderedIndex
    nu: complex
    entries: np.ndarray


def _check_config(index: OrderedIndex, pts: PointConfig) -> None:
    if not set(index.vertices) <= set(pts.vertices):
        raise DegenerateConfig("point configuration does not cover the index")
    for fam in (pts.z, pts.w):
        vals = [fam[k] for k in index.vertices]
        for a, b in itertools.combinations(vals, 2):
            if abs(a - b) < 1e-14 * max(1.0, abs(a), abs(b)):
                raise DegenerateConfig("repeated value within a parameter family")


def build_nmatrix(
    index: OrderedIndex, pts: PointConfig, kernel: Kernel | None = None
) -> NMatrix:
    """Assemble the upper-triangular lattice matrix over the index.

    ``kernel(b, a)`` defaults to h(z_b, w_a); passing an arbitrary kernel
    keeps the rational partial-fraction coefficients but replaces every
    kernel value, which leaves the eigenvectors unchanged (rationality).
    """
    _check_config(index, pts)
    n = len(index)
    ent = np.zeros((n, n), dtype=complex)
    for j, tau in enumerate(index.elements):
        ent[j, j] = frak_h(tau, pts, kernel=kernel)
        for i, sig in enumerate(index.elements[:j]):
            if leq_step(sig, tau):
                ent[i, j] = frak_n(sig, tau, pts, kernel=kernel)
    return NMatrix(index, pts, ent, np.diag(ent).copy())


def _gap(diag: np.ndarray, i: int, j: int, tol: float) -> complex:
    g = diag[i] - diag[j]
    if abs(g) < tol:
        raise DegenerateSpectrum(
            f"diagonal gap {abs(g):.3e} below tolerance {tol:.3e}"
        )
    return g


def solve_left_eigenvectors(nm: NMatrix) -> np.ndarray:
    """Rows are left eigenvectors, unit diagonal, forward substitution."""
    n = len(nm.index)
    tol = DEGENERACY_RTOL * max(1.0, np.max(np.abs(nm.diag)))
    L = np.zeros((n, n), dtype=complex)
    for i in range(n):
        L[i, i] = 1.0
        for j in range(i + 1, n):
            s = L[i, i:j] @ nm.entries[i:j, j]
            if s != 0.0:
                L[i, j] = s / _gap(nm.diag, i, j, tol)
    return L


def solve_right_eigenvectors(nm: NMatrix) -> np.ndarray:
    """Columns are right eigenvectors, unit diagonal, backward substitution."""
    n = len(nm.index)
    tol = DEGENERACY_RTOL * max(1.0, np.max(np.abs(nm.diag)))
    R = np.zeros((n, n), dtype=complex)
    for j in range(n):
        R[j, j] = 1.0
        for i in range(j - 1, -1, -1):
            s = nm.entries[i, i + 1 : j + 1] @ R[i + 1 : j + 1, j]
            if s != 0.0:
                R[i, j] = s / _gap(nm.diag, j, i, tol)
    return R


def solve_eigensystem(nm: NMatrix) -> EigenSystem:
    return EigenSystem(
        nm.index, solve_left_eigenvectors(nm), solve_right_eigenvectors(nm), nm.diag
    )


def eigen_residuals(nm: NMatrix, es: EigenSystem) -> float:
    """Max residual of the two eigenvector recursions, for diagnostics."""
    strict = nm.entries - np.diag(nm.diag)
    left = es.L @ strict - (nm.diag[:, None] - nm.diag[None, :]) * es.L
    right = strict @ es.R - (nm.diag[None, :] - nm.diag[:, None]) * es.R
    return max(np.max(np.abs(left)), np.max(np.abs(right)))


def exp_spectral(nm: NMatrix, es: EigenSystem) -> np.ndarray:
    """exp(N) through the eigensystem: R diag(exp h) L."""
    return es.R @ (np.exp(es.diag)[:, None] * es.L)


def exp_series(nm: NMatrix, rtol: float = 1e-16) -> np.ndarray:
    """Scaling-and-squaring Taylor oracle, independent of the eigensystem."""
    A = nm.entries
    norm = np.linalg.norm(A, np.inf)
    s = max(0, int(math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0)
    B = A / (2**s)
    n = A.shape[0]
    out = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    k = 1
    while True:
        term = term @ B / k
        out += term
        if np.linalg.norm(term, np.inf) < rtol * max(1.0, np.linalg.norm(out, np.inf)):
            break
        k += 1
        if k > 200:
            break
    for _ in range(s):
        out = out @ out
    return out


def _pole_check(lam: complex, pts: PointConfig, vertices) -> None:
    scale = max(1.0, abs(lam))
    for k in vertices:
        if abs(lam - pts.w[k]) < POLE_RTOL * scale or abs(
            lam - pts.z[k]
        ) < POLE_RTOL * scale:
            raise PoleCollision(f"lambda={lam} hits a spectral parameter")


def transfer_entry(
    sig_from: PartialPermutation,
    sig_to: PartialPermutation,
    lam: complex,
    pts: PointConfig,
    N: int,
) -> complex:
    """One entry of the one-column transfer operator.

    Sum over subsets F of the shared edge set; each term carries
    N^(|F| - |V(from)|) and resolvent factors at the vertices of the
    target whose outgoing (w side) or incoming (conjugated z side) edge
    is not in F.
    """
    if not sig_from.support <= sig_to.support:
        return 0.0
    aw = {k: 1.0 / (lam - pts.w[k]) for k in sig_to.support}
    az = {k: 1.0 / (lam.conjugate() - pts.z[k].conjugate()) for k in sig_to.support}
    shared = sorted(edge_set(sig_from) & edge_set(sig_to))
    total = complex(0)
    base = -len(sig_from.support)
    for m in range(len(shared) + 1):
        for F in itertools.combinations(shared, m):
            f_out = {e[0] for e in F}
            f_in = {e[1] for e in F}
            term = complex(N) ** (base + m)
            for k in sig_to.support:
                if k not in f_out:
                    term *= aw[k]
                if k not in f_in:
                    term *= az[k]
            total += term
    return total


def build_transfer_A(
    index: OrderedIndex, lam: complex, pts: PointConfig, N: int
) -> TransferMatrix:
    _pole_check(lam, pts, index.vertices)
    n = len(index)
    ent = np.zeros((n, n), dtype=complex)
    for j, tau in enumerate(index.elements):
        for i, sig in enumerate(index.elements):
            if sig.support <= tau.support:
                ent[i, j] = transfer_entry(sig, tau, lam, pts, N)
    return TransferMatrix(index, lam, N, ent, "A")


def build_transfer_B(
    index: OrderedIndex, lam: complex, pts: PointConfig, N: int
) -> TransferMatrix:
    A = build_transfer_A(index, lam, pts, N)
    cyc = np.array([p.n_cycles for p in index.elements])
    scale = np.asarray(float(N) ** (cyc[:, None] - cyc[None, :]))
    return TransferMatrix(index, lam, N, A.entries * scale, "B")


def conditional_F_product(
    lams: Sequence[complex], sigma: PartialPermutation, pts: PointConfig
) -> complex:
    """Exact finite-N conditional expectation: row-empty product entry."""
    index = OrderedIndex.for_vertices(sigma.support or pts.vertices)
    N = len(lams)
    row = np.zeros(len(index), dtype=complex)
    row[index.position(PartialPermutation.empty())] = 1.0
    for lam in lams:
        row = row @ build_transfer_A(index, lam, pts, N).entries
    return complex(row[index.position(sigma)])


def build_M_nu(
    index: OrderedIndex, nu: complex, pts: PointConfig
) -> DisintegratedMatrix:
    """Disintegration of the lattice matrix at a single disc point.

    Every h value in the lattice matrix is replaced by the integrand
    (1/pi) (conj(nu) - conj(z))^{-1} (nu - w)^{-1}; the same substitution
    applies on the diagonal, so that integrating over the disc returns the
    lattice matrix and all disintegrated matrices commute.
    """
    _pole_check(nu, pts, index.vertices)

    def kern(b: int, a: int) -> complex:
        return 1.0 / (
            math.pi
            * (nu.conjugate() - pts.z[b].conjugate())
            * (nu - pts.w[a])
        )

    nm = build_nmatrix(index, pts, kernel=kern)
    return DisintegratedMatrix(index, nu, nm.entries)


def commutator_norm(m1: DisintegratedMatrix, m2: DisintegratedMatrix) -> float:
    c = m1.entries @ m2.entries - m2.entries @ m1.entries
    return float(np.max(np.abs(c)))


def nmatrix_to_json(nm: NMatrix, es: EigenSystem | None = None) -> dict:
    def arr(a: np.ndarray):
        return [[[x.real, x.imag] for x in row] for row in a]

    out = {
        "elements": [p.to_json() for p in nm.index.elements],
        "entries": arr(nm.entries),
        "diag": [[x.real, x.imag] for x in nm.diag],
    }
    if es is not None:
        out["L"] = arr(es.L)
        out["R"] = arr(es.R)
        out["exp"] = arr(exp_spectral(nm, es))
    return out
