import cmath

import numpy as np
import pytest

from eigenoverlap.analytic import PointConfig, h, h_quadrature, separation
from eigenoverlap.errors import DegenerateSpectrum, PoleCollision
from eigenoverlap.permutations import (
    EMPTY,
    OrderedIndex,
    PartialPermutation,
    enumerate_lattice,
    leq,
)
from eigenoverlap.spectral import (
    build_M_nu,
    build_nmatrix,
    build_transfer_A,
    build_transfer_B,
    commutator_norm,
    conditional_F_product,
    eigen_residuals,
    exp_series,
    exp_spectral,
    nmatrix_to_json,
    solve_eigensystem,
    solve_left_eigenvectors,
    transfer_entry,
)

P = PartialPermutation.parse
RNG = np.random.default_rng(99)


def random_config(m, min_dist=0.2):
    while True:
        pts = PointConfig.from_arrays(
            [complex(*RNG.uniform(-0.62, 0.62, 2)) for _ in range(m)],
            [complex(*RNG.uniform(-0.62, 0.62, 2)) for _ in range(m)],
        )
        if pts.inside_disc() and separation(pts).Dist >= min_dist:
            return pts


PTS2 = PointConfig.from_arrays([0.3 + 0.2j, -0.4 + 0.1j], [0.5 - 0.3j, -0.1 - 0.45j])


class TestNMatrix:
    def test_ell1(self):
        idx = enumerate_lattice(1)
        pts = random_config(1)
        nm = build_nmatrix(idx, pts)
        hv = h(pts.z[1], pts.w[1])
        assert np.allclose(nm.entries, [[0, hv], [0, hv]])

    def test_ell2_display(self):
        idx = enumerate_lattice(2)
        nm = build_nmatrix(idx, PTS2)
        z, w = PTS2.z, PTS2.w
        h11, h22 = h(z[1], w[1]), h(z[2], w[2])
        h12, h21 = h(z[1], w[2]), h(z[2], w[1])
        H = (h11 + h22 - h12 - h21) / (
            (w[1] - w[2]) * (z[1].conjugate() - z[2].conjugate())
        )
        expected = np.array(
            [
                [0, h11, h22, 0, H],
                [0, h11, 0, h22, H],
                [0, 0, h22, h11, H],
                [0, 0, 0, h11 + h22, H],
                [0, 0, 0, 0, h12 + h21],
            ]
        )
        assert np.allclose(nm.entries, expected)

    def test_zero_pattern(self):
        idx = enumerate_lattice(3)
        nm = build_nmatrix(idx, random_config(3))
        for i, s in enumerate(idx.elements):
            for j, t in enumerate(idx.elements):
                if i != j and nm.entries[i, j] != 0:
                    assert leq(s, t) and i < j


class TestEigenSystem:
    def test_ell2_tables(self):
        idx = enumerate_lattice(2)
        es = solve_eigensystem(build_nmatrix(idx, PTS2))
        z, w = PTS2.z, PTS2.w
        delta = 1.0 / ((z[2].conjugate() - z[1].conjugate()) * (w[2] - w[1]))
        L = np.array(
            [
                [1, -1, -1, 1, 0],
                [0, 1, 0, -1, 0],
                [0, 0, 1, -1, 0],
                [0, 0, 0, 1, delta],
                [0, 0, 0, 0, 1],
            ]
        )
        R = np.array(
            [
                [1, 1, 1, 1, -delta],
                [0, 1, 0, 1, -delta],
                [0, 0, 1, 1, -delta],
                [0, 0, 0, 1, -delta],
                [0, 0, 0, 0, 1],
            ]
        )
        assert np.allclose(es.L, L, atol=1e-13 * max(1, abs(delta)))
        assert np.allclose(es.R, R, atol=1e-13 * max(1, abs(delta)))

    def test_residuals_and_inverse(self):
        idx = enumerate_lattice(3)
        nm = build_nmatrix(idx, random_config(3))
        es = solve_eigensystem(nm)
        scale = np.max(np.abs(nm.entries))
        assert eigen_residuals(nm, es) <= 1e-11 * scale
        assert np.max(np.abs(es.L @ es.R - np.eye(len(idx)))) <= 1e-11
        assert np.max(np.abs(es.R @ es.L - np.eye(len(idx)))) <= 1e-11

    def test_consistency_across_lattice_sizes(self):
        pts = random_config(3)
        idx2 = OrderedIndex.for_vertices((1, 2))
        idx3 = enumerate_lattice(3)
        L2 = solve_left_eigenvectors(build_nmatrix(idx2, pts.restrict({1, 2})))
        L3 = solve_left_eigenvectors(build_nmatrix(idx3, pts))
        for s in idx2.elements:
            for t in idx2.elements:
                assert L3[idx3.position(s), idx3.position(t)] == pytest.approx(
                    L2[idx2.position(s), idx2.position(t)], abs=1e-12
                )

    def test_degenerate_spectrum(self):
        pts = PointConfig.from_arrays(
            [0.3, 0.3 + 1e-5], [-0.4, -0.4 + 1e-5]
        )
        idx = enumerate_lattice(2)
        with pytest.raises(DegenerateSpectrum):
            solve_left_eigenvectors(build_nmatrix(idx, pts))

    def test_kernel_independence_against_tables(self):
        # random kernel values, same rational structure: tables unchanged
        idx = enumerate_lattice(2)
        table = {
            (b, a): complex(*RNG.uniform(-2, 2, 2)) for b in (1, 2) for a in (1, 2)
        }
        es = solve_eigensystem(
            build_nmatrix(idx, PTS2, kernel=lambda b, a: table[(b, a)])
        )
        z, w = PTS2.z, PTS2.w
        delta = 1.0 / ((z[2].conjugate() - z[1].conjugate()) * (w[2] - w[1]))
        assert es.L[3, 4] == pytest.approx(delta, rel=1e-10)
        assert es.R[0, 4] == pytest.approx(-delta, rel=1e-10)


class TestExponential:
    def test_ell1_entry(self):
        idx = enumerate_lattice(1)
        pts = random_config(1)
        nm = build_nmatrix(idx, pts)
        E = exp_spectral(nm, solve_eigensystem(nm))
        assert E[0, 1] == pytest.approx(cmath.exp(h(pts.z[1], pts.w[1])) - 1)

    def test_ell2_entry(self):
        idx = enumerate_lattice(2)
        nm = build_nmatrix(idx, PTS2)
        E = exp_spectral(nm, solve_eigensystem(nm))
        z, w = PTS2.z, PTS2.w
        pre = 1.0 / ((w[1] - w[2]) * (z[1].conjugate() - z[2].conjugate()))
        want = pre * (
            cmath.exp(h(z[1], w[1]) + h(z[2], w[2]))
            - cmath.exp(h(z[1], w[2]) + h(z[2], w[1]))
        )
        assert E[0, 4] == pytest.approx(want, rel=1e-12)

    def test_series_route(self):
        idx = enumerate_lattice(3)
        nm = build_nmatrix(idx, random_config(3))
        a = exp_spectral(nm, solve_eigensystem(nm))
        b = exp_series(nm)
        assert np.max(np.abs(a - b)) <= 1e-10 * np.max(np.abs(b))
        zero = build_nmatrix(idx, random_config(3), kernel=lambda b_, a_: 0.0)
        assert np.allclose(exp_series(zero), np.eye(len(idx)))


class TestTransfer:
    def test_entries(self):
        pts = PTS2
        lam, N = 0.27 - 0.44j, 7
        a1 = 1.0 / (lam - pts.w[1])
        az1 = 1.0 / (lam.conjugate() - pts.z[1].conjugate())
        got = transfer_entry(P("(1)"), P("(1)"), lam, pts, N)
        assert got == pytest.approx(1 + a1 * az1 / N, rel=1e-12)
        sig = P("(1,2)")
        want = np.prod(
            [1.0 / (lam - pts.w[k]) / (lam.conjugate() - pts.z[k].conjugate())
             for k in (1, 2)]
        )
        assert transfer_entry(EMPTY, sig, lam, pts, N) == pytest.approx(want)

    def test_support_triangularity(self):
        idx = enumerate_lattice(3)
        A = build_transfer_A(idx, 0.31 + 0.12j, random_config(3), 5)
        for i, s in enumerate(idx.elements):
            for j, t in enumerate(idx.elements):
                if not s.support <= t.support:
                    assert A.entries[i, j] == 0

    def test_B_normalization(self):
        idx = enumerate_lattice(2)
        pts = PTS2
        lam, N = 0.61 - 0.24j, 9
        A = build_transfer_A(idx, lam, pts, N)
        B = build_transfer_B(idx, lam, pts, N)
        i_e, i_1 = idx.position(EMPTY), idx.position(P("(1)"))
        assert B.entries[i_e, i_1] == pytest.approx(A.entries[i_e, i_1] / N)
        assert np.allclose(np.diag(B.entries), np.diag(A.entries))
        big = build_transfer_B(idx, lam, pts, 10**7)
        assert np.allclose(np.diag(big.entries), 1.0, atol=1e-5)

    def test_pole_collision(self):
        idx = enumerate_lattice(1)
        pts = PointConfig.from_arrays([0.3], [0.5])
        with pytest.raises(PoleCollision):
            build_transfer_A(idx, 0.5, pts, 4)

    def test_conditional_product(self):
        pts = PointConfig.from_arrays([0.3 + 0.2j], [0.5 - 0.3j])
        lam = 0.1 - 0.6j
        got = conditional_F_product([lam], P("(1)"), pts)
        want = 1.0 / (
            (lam - pts.w[1]) * (lam.conjugate() - pts.z[1].conjugate())
        )
        assert got == pytest.approx(want)
        assert conditional_F_product([lam, 0.2j], EMPTY, pts) == 1.0


class TestDisintegration:
    def test_diagonal_entry(self):
        idx = enumerate_lattice(2)
        nu = 0.17 + 0.39j
        M = build_M_nu(idx, nu, PTS2)
        sig = P("(1,2)")
        inv = sig.invert()
        want = sum(
            1.0
            / (
                np.pi
                * (nu.conjugate() - PTS2.z[a].conjugate())
                * (nu - PTS2.w[inv(a)])
            )
            for a in (1, 2)
        )
        assert M.entries[idx.position(sig), idx.position(sig)] == pytest.approx(want)

    def test_commutation(self):
        idx = enumerate_lattice(3)
        pts = random_config(3)
        m1 = build_M_nu(idx, 0.31 + 0.41j, pts)
        m2 = build_M_nu(idx, -0.22 + 0.17j, pts)
        scale = np.max(np.abs(m1.entries)) * np.max(np.abs(m2.entries))
        assert commutator_norm(m1, m1) == 0.0
        assert commutator_norm(m1, m2) <= 1e-12 * max(1.0, scale)

    def test_disc_integral_recovers_lattice_matrix(self):
        # integrating the disintegrated entries over the disc gives back
        # the h-built entries; checked through the quadrature oracle
        pts = PTS2
        z, w = pts.z, pts.w
        assert abs(h_quadrature(z[1], w[1], 400) - h(z[1], w[1])) < 3e-3
        got = h_quadrature(z[1], w[2], 400) + h_quadrature(z[2], w[1], 400)
        idx = enumerate_lattice(2)
        nm = build_nmatrix(idx, pts)
        j = idx.position(P("(1,2)"))
        assert abs(got - nm.entries[j, j]) < 6e-3


def test_json_dump_shape():
    idx = enumerate_lattice(2)
    nm = build_nmatrix(idx, PTS2)
    out = nmatrix_to_json(nm, solve_eigensystem(nm))
    assert set(out) == {"elements", "entries", "diag", "L", "R", "exp"}
    assert len(out["entries"]) == 5 and len(out["entries"][0]) == 5
    assert out["entries"][0][0] == [0.0, 0.0]
