import numpy as np
import pytest

from eigenoverlap.analytic import PointConfig, rho2, separation
from eigenoverlap.correlate import (
    coincidence_value,
    homogeneity_exponent,
    poly_L,
    rho,
    rho4_closed,
    rho_factorized,
    rho_single_solve,
    vandermonde,
)
from eigenoverlap.errors import CoincidentPoints, DegenerateConfig
from eigenoverlap.permutations import EMPTY, PartialPermutation, enumerate_lattice
from eigenoverlap.spectral import build_nmatrix, exp_spectral, solve_eigensystem
from eigenoverlap.analytic import wirtinger_mixed_fd

P = PartialPermutation.parse
RNG = np.random.default_rng(7722)


def random_config(m, min_dist=0.2):
    while True:
        pts = PointConfig.from_arrays(
            [complex(*RNG.uniform(-0.62, 0.62, 2)) for _ in range(m)],
            [complex(*RNG.uniform(-0.62, 0.62, 2)) for _ in range(m)],
        )
        if pts.inside_disc() and separation(pts).Dist >= min_dist:
            return pts


class TestVandermonde:
    def test_examples(self):
        assert vandermonde({1}, {1: 0.3}) == 1
        assert vandermonde({1, 2}, {1: 0, 2: 0.5}) == pytest.approx(0.5)
        assert vandermonde({1, 2}, {1: 0.5, 2: 0.5}) == 0
        assert vandermonde({1, 2, 3}, {1: 0, 2: 1, 3: 3}) == pytest.approx(6.0)


class TestRho:
    def test_pair_kernel(self):
        for _ in range(20):
            pts = random_config(1, 0.05)
            assert rho(P("(1)"), pts).value == pytest.approx(
                rho2(pts.z[1], pts.w[1]), rel=1e-13
            )

    def test_empty(self):
        assert rho(EMPTY, random_config(1)).value == 1.0

    def test_product_of_fixed_points(self):
        pts = random_config(2)
        got = rho(P("(1)(2)"), pts).value
        want = rho2(pts.z[1], pts.w[1]) * rho2(pts.z[2], pts.w[2])
        assert got == pytest.approx(want, rel=1e-12)

    def test_cli_example_value(self):
        pts = PointConfig.from_arrays([0], [0.5])
        assert rho(P("(1)"), pts).value == pytest.approx(-16.0)

    def test_terms_sum(self):
        pts = random_config(2)
        res = rho(P("(1,2)"), pts)
        assert res.value == pytest.approx(sum(v for _, v in res.terms))
        assert len(res.terms) == 2

    def test_against_four_point_closed_form(self):
        for _ in range(20):
            pts = random_config(2, 0.15)
            got = rho(P("(1,2)"), pts).value
            want = rho4_closed(pts.z[1], pts.w[1], pts.z[2], pts.w[2])
            assert got == pytest.approx(want, rel=1e-11)

    def test_single_solve_rewrite(self):
        pts = random_config(3, 0.18)
        for text in ("(1,2,3)", "(1,2)(3)", "(1)(2)(3)"):
            a = rho(P(text), pts).value
            assert rho_single_solve(P(text), pts) == pytest.approx(a, rel=1e-10)

    def test_degenerate_config(self):
        with pytest.raises(DegenerateConfig):
            rho(P("(1)"), PointConfig.from_arrays([1.2], [0.3]))
        with pytest.raises(DegenerateConfig):
            rho(P("(1,2)"), PointConfig.from_arrays([0.1, 0.1], [0.3, 0.4]))

    def test_hermitian_symmetry(self):
        for text in ("(1)", "(1,2)", "(1,2,3)"):
            sig = P(text)
            pts = random_config(len(sig.support), 0.2)
            a = rho(sig, pts).value
            swapped = PointConfig(pts.vertices, dict(pts.w), dict(pts.z))
            b = rho(sig.invert(), swapped).value
            assert b == pytest.approx(a.conjugate(), rel=1e-10)


class TestFactorization:
    def test_single_cycle_identity(self):
        pts = random_config(2)
        sig = P("(1,2)")
        assert rho_factorized(sig, pts) == pytest.approx(rho(sig, pts).value)

    def test_triple_product(self):
        pts = random_config(3, 0.15)
        got = rho_factorized(P("(1)(2)(3)"), pts)
        want = np.prod([rho2(pts.z[k], pts.w[k]) for k in (1, 2, 3)])
        assert got == pytest.approx(want, rel=1e-11)

    def test_mixed_cycle(self):
        pts = random_config(3, 0.15)
        sig = P("(1,2)(3)")
        assert rho_factorized(sig, pts) == pytest.approx(
            rho(sig, pts).value, rel=1e-9
        )


class TestRho4:
    def test_swap_invariance(self):
        nu = [complex(*RNG.uniform(-0.5, 0.5, 2)) for _ in range(4)]
        a = rho4_closed(*nu)
        b = rho4_closed(nu[2], nu[3], nu[0], nu[1])
        assert a == pytest.approx(b, rel=1e-12)

    def test_pole(self):
        with pytest.raises(CoincidentPoints):
            rho4_closed(0.1, 0.2, 0.3, 0.2)


class TestPolynomials:
    def test_fixed_point(self):
        pts = random_config(1)
        pe = poly_L(P("(1)"), pts)
        assert pe.L_value == pytest.approx(1.0)
        assert pe.R_value == pytest.approx(1.0)

    def test_two_cycle(self):
        pts = random_config(2)
        pe = poly_L(P("(1,2)"), pts)
        assert pe.L_value == pytest.approx(1.0, rel=1e-12)
        assert pe.R_value == pytest.approx(-1.0, rel=1e-12)

    @pytest.mark.parametrize("ell,deg", [(2, 0), (3, 1), (4, 3)])
    def test_homogeneity(self, ell, deg):
        cyc = PartialPermutation.from_cycles([tuple(range(1, ell + 1))])
        pts = random_config(ell)
        for family, want in (("u", deg), ("v", deg), ("joint", 2 * deg)):
            got = homogeneity_exponent(cyc, pts, 1.41, "L", family)
            assert got == pytest.approx(want, abs=1e-9)

    def test_coincidence_vanishing(self):
        pts = random_config(3, 0.25)
        c3 = P("(1,2,3)")
        for which in ("L", "R"):
            val, generic = coincidence_value(c3, pts, 1, 2, which)
            assert abs(val) <= 1e-9 * abs(generic)


def test_rho_matches_mixed_derivative_of_exponential():
    # finite-difference oracle at the pair level: d_u d_vbar of the
    # exponential's top entry reproduces the correlation function
    pts = random_config(1, 0.35)
    u, v = pts.z[1], pts.w[1]

    def top_entry(a, b):
        idx = enumerate_lattice(1)
        nm = build_nmatrix(idx, PointConfig.from_arrays([a], [b]))
        return exp_spectral(nm, solve_eigensystem(nm))[0, 1]

    est = wirtinger_mixed_fd(top_entry, u, v, 1e-4)
    want = rho(P("(1)"), pts).value
    assert abs(est - want) <= 1e-5 * abs(want)
