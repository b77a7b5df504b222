"""Closed-form correlation functions and the cleared polynomials.

The limiting correlation function of a permutation evaluates as a sum over
the full-support downset: each term pairs a right-eigenvector component at
the empty permutation with a left identity-row component of the composed
permutation (on a w-permuted configuration) and a product of two-point
kernels.  Multiplying eigenvector components by both Vandermonde factors
clears denominators into homogeneous polynomials, one per variable family.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytic import PointConfig, rho2, separation
from .errors import CoincidentPoints, DegenerateConfig
from .permutations import (
    OrderedIndex,
    PartialPermutation,
    full_support_downset,
)
from .spectral import (
    build_nmatrix,
    solve_left_eigenvectors,
    solve_right_eigenvectors,
)


@dataclass(frozen=True)
class CorrelationResult:
    sigma: PartialPermutation
    pts: PointConfig
    value: complex
    terms: tuple[tuple[PartialPermutation, complex], ...]


@dataclass(frozen=True)
class PolynomialEval:
    sigma: PartialPermutation
    pts: PointConfig
    L_value: complex
    R_value: complex
    vand_u: complex
    vand_v: complex


def vandermonde(vertices, vals) -> complex:
    """Product of differences over sorted-label pairs; empty/singleton -> 1."""
    vs = sorted(vertices)
    out = complex(1)
    for i, a in enumerate(vs):
        for b in vs[i + 1 :]:
            out *= vals[b] - vals[a]
    return out


def _require_macroscopic(pts: PointConfig) -> None:
    if not pts.inside_disc():
        raise DegenerateConfig("spectral parameters must lie inside the unit disc")
    if not separation(pts).ok_macroscopic:
        raise DegenerateConfig("configuration is not macroscopically separated")


def rho(sigma: PartialPermutation, pts: PointConfig) -> CorrelationResult:
    """Limiting correlation function of a permutation at a configuration.

    Sum over pi in the full-support downset of sigma of

        r_pi(empty) * l_id(sigma o pi^{-1}; z, pi^{-1} w)
                    * prod_a rho2(u_a, v_{pi^{-1}(a)}).

    The left factor is evaluated through the identity row of the
    eigensystem on the w-permuted configuration (recursive property).
    """
    if len(sigma) == 0:
        return CorrelationResult(sigma, pts, 1.0 + 0.0j, ())
    sub = pts.restrict(sigma.support)
    _require_macroscopic(sub)
    index = OrderedIndex.for_vertices(sigma.support)
    ident = PartialPermutation.identity(sigma.support)
    empty = PartialPermutation.empty()
    R = solve_right_eigenvectors(build_nmatrix(index, sub))
    row_empty = R[index.position(empty)]
    terms = []
    for pi in sorted(full_support_downset(sigma), key=index.position):
        inv = pi.invert()
        composed = sigma.compose(inv)
        Lp = solve_left_eigenvectors(build_nmatrix(index, sub.permute_w(pi)))
        lval = Lp[index.position(ident), index.position(composed)]
        kern = complex(1)
        for a in sorted(sigma.support):
            kern *= rho2(sub.z[a], sub.w[inv(a)])
        terms.append((pi, complex(row_empty[index.position(pi)] * lval * kern)))
    value = sum(t for _, t in terms)
    return CorrelationResult(sigma, pts, complex(value), tuple(terms))


def rho_single_solve(sigma: PartialPermutation, pts: PointConfig) -> complex:
    """Same sum without the recursive rewrite: uses l_pi(sigma) directly."""
    if len(sigma) == 0:
        return 1.0 + 0.0j
    sub = pts.restrict(sigma.support)
    _require_macroscopic(sub)
    index = OrderedIndex.for_vertices(sigma.support)
    nm = build_nmatrix(index, sub)
    L = solve_left_eigenvectors(nm)
    R = solve_right_eigenvectors(nm)
    row_empty = R[index.position(PartialPermutation.empty())]
    total = complex(0)
    for pi in full_support_downset(sigma):
        inv = pi.invert()
        kern = complex(1)
        for a in sorted(sigma.support):
            kern *= rho2(sub.z[a], sub.w[inv(a)])
        total += (
            row_empty[index.position(pi)]
            * L[index.position(pi), index.position(sigma)]
            * kern
        )
    return total


def rho_factorized(sigma: PartialPermutation, pts: PointConfig) -> complex:
    """Product of per-cycle correlation functions."""
    out = complex(1)
    for cyc in sigma.cycles():
        loop = PartialPermutation.from_cycles([cyc])
        out *= rho(loop, pts.restrict(loop.support)).value
    return out


def rho4_closed(nu1: complex, nu2: complex, nu3: complex, nu4: complex) -> complex:
    """Closed form for the four-point function; odd slots conjugated."""
    pre = (nu2 - nu4) * (nu1.conjugate() - nu3.conjugate())
    if abs(pre) < 1e-14 * max(1.0, abs(nu1), abs(nu2), abs(nu3), abs(nu4)) ** 2:
        raise CoincidentPoints("prefactor pole in the four-point closed form")
    return (
        rho2(nu1, nu2) * rho2(nu3, nu4) - rho2(nu1, nu4) * rho2(nu3, nu2)
    ) / pre


def _poly_pair(sigma: PartialPermutation, pts: PointConfig) -> PolynomialEval:
    sub = pts.restrict(sigma.support)
    index = OrderedIndex.for_vertices(sigma.support)
    nm = build_nmatrix(index, sub)
    L = solve_left_eigenvectors(nm)
    R = solve_right_eigenvectors(nm)
    ident = PartialPermutation.identity(sigma.support)
    empty = PartialPermutation.empty()
    vu = vandermonde(sigma.support, {k: sub.z[k].conjugate() for k in sigma.support})
    vv = vandermonde(sigma.support, sub.w)
    lval = L[index.position(ident), index.position(sigma)]
    rval = R[index.position(empty), index.position(sigma)]
    return PolynomialEval(
        sigma, pts, complex(vu * vv * lval), complex(vu * vv * rval),
        complex(vu), complex(vv),
    )


def poly_L(sigma: PartialPermutation, pts: PointConfig) -> PolynomialEval:
    """Left polynomial: Vandermondes times the identity-row component."""
    return _poly_pair(sigma, pts)


def poly_R(sigma: PartialPermutation, pts: PointConfig) -> PolynomialEval:
    """Right polynomial: Vandermondes times the empty-row component."""
    return _poly_pair(sigma, pts)


def homogeneity_exponent(
    sigma: PartialPermutation,
    pts: PointConfig,
    t: complex,
    which: str = "L",
    family: str = "joint",
) -> complex:
    """Measured scaling degree of the cleared polynomial.

    ``family`` selects which variable family is scaled by t: the conjugated
    one ("u"), the plain one ("v"), or both ("joint").  The per-family
    degrees both equal comb(|V|-1, 2); the joint degree is their sum.
    """
    t = complex(t)
    if t == 1.0 or t == 0.0:
        raise ValueError("scaling factor must differ from 0 and 1")
    base = _poly_pair(sigma, pts)
    scaled = pts.restrict(sigma.support).scaled(
        tz=t if family in ("u", "joint") else 1.0,
        tw=t if family in ("v", "joint") else 1.0,
    )
    new = _poly_pair(sigma, scaled)
    a = base.L_value if which == "L" else base.R_value
    b = new.L_value if which == "L" else new.R_value
    return np.log(b / a) / np.log(t)


def coincidence_value(
    sigma: PartialPermutation,
    pts: PointConfig,
    i: int,
    j: int,
    which: str,
    deltas=(4e-3, 3e-3, 2e-3, 1e-3),
    direction=(0.7 + 0.2j, 0.3 - 0.6j),
) -> tuple[complex, complex]:
    """Extrapolated polynomial value on a coincidence subspace.

    For the right polynomial the subspace is the straight pairing
    (u_j, v_j) -> (u_i, v_i); the left polynomial pairs each vertex with
    its orbit predecessor, so its subspace is
    (u_j, v_{sigma^{-1}(j)}) -> (u_i, v_{sigma^{-1}(i)}).

    Moving along the line with a real offset, the polynomial restricts to a
    low-degree polynomial in the offset; a polynomial fit reads off the
    exact on-subspace value.  Returns (value at coincidence, generic value).
    """
    if which not in ("L", "R"):
        raise ValueError("which must be 'L' or 'R'")
    inv = sigma.invert()
    wi, wj = (i, j) if which == "R" else (inv(i), inv(j))
    vals = []
    for d in deltas:
        z = dict(pts.z)
        w = dict(pts.w)
        z[j] = z[i] + d * direction[0]
        w[wj] = w[wi] + d * direction[1]
        pe = _poly_pair(sigma, PointConfig(pts.vertices, z, w))
        vals.append(pe.L_value if which == "L" else pe.R_value)
    coeffs = np.polyfit(np.asarray(deltas, dtype=float), np.asarray(vals), len(deltas) - 1)
    generic = _poly_pair(sigma, pts)
    return complex(coeffs[-1]), complex(
        generic.L_value if which == "L" else generic.R_value
    )
