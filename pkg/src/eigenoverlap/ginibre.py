"""Finite-N Monte Carlo: sampling, Schur forms, eigenbases, estimators.

Sampling is reproducible and thread-count independent: every sample i of a
run draws from its own counter-based stream keyed by (master seed, i), and
accumulation always happens in sample order.  Estimators work in the
triangular Schur frame; overlap quantities never need the unitary factor
because it cancels in every inner product.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .analytic import PointConfig, separation
from .errors import (
    EigenoverlapError,
    NearDefective,
    NonConvergence,
    ResolventPole,
    WindowOverlap,
)
from .permutations import PartialPermutation

RESOLVENT_MIN_GAP = 1e-10
SPOT_CHECK_EVERY = 100


def substream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for sample ``index`` of a run seeded by ``seed``."""
    key = np.array([seed % 2**64, index % 2**64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass
class GinibreSample:
    N: int
    matrix: np.ndarray
    schur_T: np.ndarray | None = None
    schur_U: np.ndarray | None = None

    @property
    def eigenvalues(self) -> np.ndarray:
        self.ensure_schur()
        return np.diag(self.schur_T)

    def ensure_schur(self) -> None:
        if self.schur_T is None:
            self.schur_U, self.schur_T = schur(self.matrix)


@dataclass
class EigenBasis:
    """Right eigenvectors as columns, left eigenvectors as rows; L R = I."""

    R_cols: np.ndarray
    L_rows: np.ndarray
    eigenvalues: np.ndarray


@dataclass
class MCConfig:
    N: int
    samples: int
    seed: int
    eps: float | None = None
    threads: int = 1


@dataclass
class MCAccumulator:
    """Streaming complex mean with a scalar spread (Welford / Chan merge)."""

    count: int = 0
    mean: complex = 0j
    m2: float = 0.0

    def update(self, value: complex) -> None:
        self.count += 1
        delta = value - self.mean
        self.mean += delta / self.count
        self.m2 += (delta.conjugate() * (value - self.mean)).real

    def merge(self, other: "MCAccumulator") -> None:
        if other.count == 0:
            return
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean, other.m2
            return
        n = self.count + other.count
        delta = other.mean - self.mean
        self.m2 += other.m2 + abs(delta) ** 2 * self.count * other.count / n
        self.mean += delta * other.count / n
        self.count = n

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def stderr(self) -> float:
        return (self.variance / self.count) ** 0.5 if self.count else float("inf")


def sample_ginibre(N: int, stream: np.random.Generator) -> GinibreSample:
    """iid complex Gaussian entries, mean 0, variance 1/N."""
    scale = (2.0 * N) ** -0.5
    M = scale * (
        stream.standard_normal((N, N)) + 1j * stream.standard_normal((N, N))
    )
    return GinibreSample(N, M)


def sample_triangular_fixed_diag(
    lams: Sequence[complex], stream: np.random.Generator
) -> GinibreSample:
    """Upper-triangular model: prescribed diagonal, Gaussian strict upper."""
    N = len(lams)
    scale = (2.0 * N) ** -0.5
    T = scale * (
        stream.standard_normal((N, N)) + 1j * stream.standard_normal((N, N))
    )
    T = np.triu(T, 1)
    np.fill_diagonal(T, np.asarray(lams, dtype=complex))
    return GinibreSample(N, T, schur_T=T, schur_U=np.eye(N, dtype=complex))


def schur(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Complex Schur form M = U T U*; returns (U, T)."""
    try:
        T, U = sla.schur(np.asarray(M, dtype=complex), output="complex")
    except sla.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc
    return U, T


def _schur_T_only(M: np.ndarray) -> np.ndarray:
    t, _, _, _, _, info = lapack.zgees(
        lambda x: False, np.asarray(M, dtype=complex), compute_v=0, sort_t=0
    )
    if info != 0:
        raise NonConvergence(f"QR iteration failed (info={info})")
    return t


def _check_resolvent_gap(eigs: np.ndarray, points) -> None:
    for x in points:
        if np.min(np.abs(eigs - x)) < RESOLVENT_MIN_GAP:
            raise ResolventPole(f"spectral parameter {x} too close to an eigenvalue")


def resolvent_product_trace(
    T: np.ndarray, sigma: PartialPermutation, pts: PointConfig
) -> complex:
    """Product over cycles of Tr prod_a R(z_a)^dag R(w_a), triangular solves."""
    T = np.asarray(T, dtype=complex)
    N = T.shape[0]
    eigs = np.diag(T)
    used = [pts.z[a] for a in sigma.support] + [pts.w[a] for a in sigma.support]
    _check_resolvent_gap(eigs, used)
    eye = np.eye(N, dtype=complex)
    cache: dict[complex, np.ndarray] = {}

    def res(x: complex) -> np.ndarray:
        if x not in cache:
            cache[x] = sla.solve_triangular(T - x * eye, eye)
        return cache[x]

    total = complex(1)
    for cyc in sigma.cycles():
        if len(cyc) == 1:
            a = cyc[0]
            total *= np.vdot(res(pts.z[a]), res(pts.w[a]))
            continue
        prod = None
        for a in cyc:
            factor = res(pts.z[a]).conj().T @ res(pts.w[a])
            prod = factor if prod is None else prod @ factor
        total *= np.trace(prod)
    return complex(total)


def _resolvent_trace_dense(
    M: np.ndarray, sigma: PartialPermutation, pts: PointConfig
) -> complex:
    """Same trace from the unreduced matrix; equal by unitary invariance."""
    M = np.asarray(M, dtype=complex)
    N = M.shape[0]
    eye = np.eye(N, dtype=complex)
    cache: dict[complex, np.ndarray] = {}

    def res(x: complex) -> np.ndarray:
        if x not in cache:
            cache[x] = np.linalg.inv(M - x * eye)
        return cache[x]

    total = complex(1)
    for cyc in sigma.cycles():
        if len(cyc) == 1:
            a = cyc[0]
            total *= np.vdot(res(pts.z[a]), res(pts.w[a]))
            continue
        prod = None
        for a in cyc:
            factor = res(pts.z[a]).conj().T @ res(pts.w[a])
            prod = factor if prod is None else prod @ factor
        total *= np.trace(prod)
    return complex(total)


def _right_vector_T(T: np.ndarray, i: int) -> np.ndarray:
    """Right eigenvector of a triangular matrix, i-th entry normalized to 1."""
    N = T.shape[0]
    y = np.zeros(N, dtype=complex)
    y[i] = 1.0
    if i > 0:
        A = T[:i, :i] - T[i, i] * np.eye(i, dtype=complex)
        y[:i] = sla.solve_triangular(A, -T[:i, i])
    return y


def _left_vector_T(T: np.ndarray, i: int) -> np.ndarray:
    """Left eigenvector of a triangular matrix, i-th entry normalized to 1."""
    N = T.shape[0]
    x = np.zeros(N, dtype=complex)
    x[i] = 1.0
    if i < N - 1:
        A = T[i + 1 :, i + 1 :].T - T[i, i] * np.eye(N - i - 1, dtype=complex)
        x[i + 1 :] = sla.solve_triangular(A, -T[i, i + 1 :], lower=True)
    return x


def eigenbasis(sample: GinibreSample) -> EigenBasis:
    """Biorthogonal eigenbasis from the Schur form.

    Right vectors come from triangular back-substitution rotated by the
    Schur unitary; left rows are the inverse of the right-vector matrix,
    which enforces the delta-pairing by construction.
    """
    sample.ensure_schur()
    T, U = sample.schur_T, sample.schur_U
    eigs = np.diag(T)
    N = sample.N
    scale = max(1.0, float(np.max(np.abs(eigs))))
    gap = np.min(np.abs(eigs[:, None] - eigs[None, :]) + np.eye(N) * 1e9)
    if gap < 1e-12 * scale:
        raise NearDefective(f"minimal eigenvalue gap {gap:.3e}")
    Y = np.zeros((N, N), dtype=complex)
    for i in range(N):
        Y[:, i] = _right_vector_T(T, i)
    R = U @ Y
    L = np.linalg.inv(R)
    return EigenBasis(R_cols=R, L_rows=L, eigenvalues=eigs.copy())


def overlap_trace(basis: EigenBasis, I: dict, J: dict, sigma: PartialPermutation) -> complex:
    """prod over vertices of (l_{J(inv a)} . l_{I(a)}^dag)(r_{I(a)}^dag . r_{J(a)})."""
    inv = sigma.invert()
    L, R = basis.L_rows, basis.R_cols
    out = complex(1)
    for a in sorted(sigma.support):
        out *= np.vdot(L[I[a]], L[J[inv(a)]]) * np.vdot(R[:, I[a]], R[:, J[a]])
    return out


def resolvent_trace_eigen(
    basis: EigenBasis, sigma: PartialPermutation, pts: PointConfig
) -> complex:
    """Resolvent-product trace through the spectral decomposition (oracle).

    Exponential-cost sum over index tuples; intended for small N only.
    """
    import itertools

    eigs = basis.eigenvalues
    N = len(eigs)
    verts = sorted(sigma.support)
    total = complex(0)
    for I_tuple in itertools.product(range(N), repeat=len(verts)):
        I = dict(zip(verts, I_tuple))
        wI = complex(1)
        for a in verts:
            wI *= 1.0 / (eigs[I[a]].conjugate() - pts.z[a].conjugate())
        for J_tuple in itertools.product(range(N), repeat=len(verts)):
            J = dict(zip(verts, J_tuple))
            wJ = complex(1)
            for a in verts:
                wJ *= 1.0 / (eigs[J[a]] - pts.w[a])
            total += wI * wJ * overlap_trace(basis, I, J, sigma)
    return total


def _map_samples(
    samples: int, fn: Callable[[int], object], threads: int
) -> list:
    """Evaluate fn(0..samples-1), in order, optionally on a thread pool."""
    if threads <= 1:
        return [fn(i) for i in range(samples)]
    out = [None] * samples
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for i, val in zip(range(samples), pool.map(fn, range(samples), chunksize=64)):
            out[i] = val
    return out


def _spot_check_sample(M: np.ndarray, sigma, pts, dense_value: complex) -> None:
    U, T = schur(M)
    recon = np.linalg.norm(U @ T @ U.conj().T - M) / max(np.linalg.norm(M), 1e-30)
    if recon > 1e-10:
        raise NonConvergence(f"Schur reconstruction residual {recon:.2e}")
    tri = resolvent_product_trace(T, sigma, pts)
    if abs(tri - dense_value) > 1e-6 * max(1.0, abs(tri)):
        raise EigenoverlapError(
            f"triangular/dense resolvent paths disagree: {tri} vs {dense_value}"
        )


def mc_F_N(cfg: MCConfig, sigma: PartialPermutation, pts: PointConfig) -> MCAccumulator:
    """Estimate the normalized mean N^{-#cycles} F_N over Ginibre draws."""
    if not separation(pts.restrict(sigma.support)).ok_macroscopic:
        raise WindowOverlap("configuration is not macroscopically separated")
    norm = float(cfg.N) ** (-sigma.n_cycles)

    def one(i: int) -> complex:
        M = sample_ginibre(cfg.N, substream(cfg.seed, i)).matrix
        val = _resolvent_trace_dense(M, sigma, pts)
        if i % SPOT_CHECK_EVERY == 0:
            _spot_check_sample(M, sigma, pts, val)
        return norm * val

    acc = MCAccumulator()
    for v in _map_samples(cfg.samples, one, cfg.threads):
        acc.update(v)
    return acc


def mc_F_N_conditioned(
    cfg: MCConfig, sigma: PartialPermutation, pts: PointConfig
) -> MCAccumulator:
    """Estimate the same normalized mean through per-draw eigenvalues.

    For each sampled matrix the Gaussian triangle is integrated out
    exactly (the transfer-product identity), so the per-draw statistic is
    the conditional expectation given the draw's eigenvalues.  Same mean
    as :func:`mc_F_N` by the tower property, but with summable tails: the
    plain per-draw trace has non-summable second moments from
    pseudospectral spikes, which this path avoids.
    """
    from .spectral import conditional_F_product

    if not separation(pts.restrict(sigma.support)).ok_macroscopic:
        raise WindowOverlap("configuration is not macroscopically separated")
    norm = float(cfg.N) ** (-sigma.n_cycles)
    single = len(sigma) == 1

    def one(i: int) -> complex:
        M = sample_ginibre(cfg.N, substream(cfg.seed, i)).matrix
        lam = np.linalg.eigvals(M)
        if single:
            a = sorted(sigma.support)[0]
            fac = 1.0 / (
                (lam - pts.w[a]) * (np.conj(lam) - pts.z[a].conjugate())
            )
            # top-right entry of the ordered product of 2x2 triangular blocks
            suffix = np.cumprod((1.0 + fac / cfg.N)[::-1])[::-1]
            suffix = np.concatenate([suffix[1:], [1.0]])
            val = np.sum(fac * suffix)
        else:
            val = conditional_F_product(lam.tolist(), sigma, pts)
        return norm * complex(val)

    acc = MCAccumulator()
    for v in _map_samples(cfg.samples, one, cfg.threads):
        acc.update(v)
    return acc


def mc_conditional_transfer(
    lams: Sequence[complex],
    sigma: PartialPermutation,
    pts: PointConfig,
    samples: int,
    seed: int,
    threads: int = 1,
) -> MCAccumulator:
    """Mean of F_N over triangular draws with a fixed diagonal."""
    lams = [complex(x) for x in lams]

    def one(i: int) -> complex:
        T = sample_triangular_fixed_diag(lams, substream(seed, i)).schur_T
        return resolvent_product_trace(T, sigma, pts)

    acc = MCAccumulator()
    for v in _map_samples(samples, one, threads):
        acc.update(v)
    return acc


def _window_indices(eigs: np.ndarray, center: complex, eps: float) -> np.ndarray:
    return np.nonzero(np.abs(eigs - center) < eps)[0]


def _spot_check_vectors(T: np.ndarray, xs: dict, ys: dict) -> None:
    """Eigen-residual and biorthogonality of substitution vectors."""
    scale = max(1.0, float(np.max(np.abs(T))))
    eigs = np.diag(T)
    for k, y in ys.items():
        if np.linalg.norm(T @ y - eigs[k] * y) > 1e-8 * scale * np.linalg.norm(y):
            raise EigenoverlapError(f"right eigenvector residual at index {k}")
    for i, x in xs.items():
        for j, y in ys.items():
            pair = np.dot(x, y)
            tol = 1e-8 * max(1.0, np.linalg.norm(x) * np.linalg.norm(y))
            if abs(pair - (1.0 if i == j else 0.0)) > tol:
                raise EigenoverlapError(f"biorthogonality failure at ({i},{j})")


def estimate_rho_hat(
    cfg: MCConfig, sigma: PartialPermutation, pts: PointConfig
) -> MCAccumulator:
    """Window estimator of the correlation function at a configuration.

    Indicator windows of radius eps around every u and v parameter; all
    index tuples hitting the windows contribute the overlap product, scaled
    by eps^{-4 |V|} N^{-#cycles}.  Windows must be pairwise disjoint, which
    silently excludes repeated indices.
    """
    import itertools

    if cfg.eps is None:
        raise ValueError("cfg.eps is required")
    sub = pts.restrict(sigma.support)
    rep = separation(sub)
    if not (cfg.eps < rep.Dist / 2):
        raise WindowOverlap(
            f"eps={cfg.eps} does not give disjoint windows (Dist={rep.Dist:.3f})"
        )
    verts = sorted(sigma.support)
    inv = sigma.invert()
    prefactor = cfg.eps ** (-4.0 * len(verts)) * float(cfg.N) ** (-sigma.n_cycles)

    def one(i: int) -> complex:
        T = _schur_T_only(sample_ginibre(cfg.N, substream(cfg.seed, i)).matrix)
        eigs = np.diag(T)
        iwin = {a: _window_indices(eigs, sub.z[a], cfg.eps) for a in verts}
        jwin = {a: _window_indices(eigs, sub.w[a], cfg.eps) for a in verts}
        if any(len(v) == 0 for v in iwin.values()) or any(
            len(v) == 0 for v in jwin.values()
        ):
            return 0j
        needed = sorted(
            set(np.concatenate([*iwin.values(), *jwin.values()]).tolist())
        )
        X = {k: _left_vector_T(T, k) for k in needed}
        Y = {k: _right_vector_T(T, k) for k in needed}
        if i % SPOT_CHECK_EVERY == 0:
            _spot_check_vectors(T, X, Y)
        total = 0j
        for I_tuple in itertools.product(*(iwin[a] for a in verts)):
            I = dict(zip(verts, I_tuple))
            for J_tuple in itertools.product(*(jwin[a] for a in verts)):
                J = dict(zip(verts, J_tuple))
                term = complex(1)
                for a in verts:
                    term *= np.vdot(X[I[a]], X[J[inv(a)]]) * np.vdot(
                        Y[I[a]], Y[J[a]]
                    )
                total += term
        return prefactor * total

    acc = MCAccumulator()
    for v in _map_samples(cfg.samples, one, cfg.threads):
        acc.update(v)
    return acc


def diag_overlap_windows(
    cfg: MCConfig, centers: Sequence[complex], eps: float
) -> list[MCAccumulator]:
    """Per-eigenvalue self-overlap means over several windows, shared draws.

    Pools Tr(Q_i^dag Q_i)/N over all eigenvalues within eps of each center;
    each window hit is one observation of that window's accumulator.
    """
    centers = [complex(c) for c in centers]
    for c in centers:
        if abs(c) + eps >= 1.0:
            raise ValueError("window must stay inside the unit disc")

    def one(i: int) -> list[list[float]]:
        T = _schur_T_only(sample_ginibre(cfg.N, substream(cfg.seed, i)).matrix)
        eigs = np.diag(T)
        out = []
        spot_xs, spot_ys = {}, {}
        for c in centers:
            hits = []
            for k in _window_indices(eigs, c, eps):
                x = _left_vector_T(T, int(k))
                y = _right_vector_T(T, int(k))
                if i % SPOT_CHECK_EVERY == 0:
                    spot_xs[int(k)], spot_ys[int(k)] = x, y
                hits.append(
                    float(np.vdot(x, x).real * np.vdot(y, y).real) / cfg.N
                )
            out.append(hits)
        if spot_xs:
            _spot_check_vectors(T, spot_xs, spot_ys)
        return out

    accs = [MCAccumulator() for _ in centers]
    for per_center in _map_samples(cfg.samples, one, cfg.threads):
        for acc, hits in zip(accs, per_center):
            for val in hits:
                acc.update(complex(val))
    return accs


def estimate_diag_overlap(cfg: MCConfig, center: complex, eps: float) -> MCAccumulator:
    """Mean of the per-eigenvalue self-overlap over one spectral window."""
    return diag_overlap_windows(cfg, [center], eps)[0]
