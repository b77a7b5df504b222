"""Scalar special functions and the unit-disc quadrature oracle.

Conventions (fixed once, used everywhere):

* the first argument of ``h`` and ``rho2`` is the conjugated one;
* in a :class:`PointConfig`, the ``z`` family (alias ``u``) is the
  conjugated side and the ``w`` family (alias ``v``) is the plain side.

With these conventions h(a, b) = log((1 - conj(a) b) / |a - b|^2) and the
pair-correlation kernel is rho2(a, b) = -(1 - conj(a) b) / |a - b|^4, the
mixed Wirtinger derivative d/da d/d(conj b) of exp(h(a, b)).
"""

from __future__ import annotations

import cmath
import itertools
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import CoincidentPoints, DegenerateConfig, NotComparable
from .permutations import (
    PartialPermutation,
    hat_nonfixed,
    hat_nonfixed_preimage,
    leq_step,
)

COINCIDENCE_RTOL = 1e-14


def _coincidence_tol(*vals: complex) -> float:
    return COINCIDENCE_RTOL * max(1.0, *(abs(v) for v in vals))


def h(a: complex, b: complex) -> complex:
    """log((1 - conj(a) b) / |a - b|^2), principal branch."""
    if abs(a - b) < _coincidence_tol(a, b):
        raise CoincidentPoints(f"h undefined at coincident points a=b={a}")
    num = 1.0 - a.conjugate() * b
    if abs(num) < _coincidence_tol(a, b):
        raise CoincidentPoints(f"h undefined: 1 - conj(a)b = 0 for a={a}, b={b}")
    return cmath.log(num / abs(a - b) ** 2)


def rho2(nu1: complex, nu2: complex) -> complex:
    """The limiting two-point overlap kernel; first argument conjugated."""
    if abs(nu1 - nu2) < _coincidence_tol(nu1, nu2):
        raise CoincidentPoints(f"rho2 undefined at coincident points {nu1}")
    return -(1.0 - nu1.conjugate() * nu2) / abs(nu1 - nu2) ** 4


@dataclass(frozen=True)
class PointConfig:
    """Vertex-indexed spectral parameters; z is the conjugated family."""

    vertices: tuple[int, ...]
    z: dict[int, complex]
    w: dict[int, complex]

    def __post_init__(self):
        missing = [v for v in self.vertices if v not in self.z or v not in self.w]
        if missing:
            raise ValueError(f"vertices without both z and w values: {missing}")

    @classmethod
    def from_arrays(
        cls, u: Sequence[complex], v: Sequence[complex]
    ) -> "PointConfig":
        """Vertices 1..m with u as the conjugated (z) family and v as w."""
        if len(u) != len(v):
            raise ValueError("u and v must have equal length")
        vs = tuple(range(1, len(u) + 1))
        return cls(vs, {k: complex(x) for k, x in zip(vs, u)},
                   {k: complex(x) for k, x in zip(vs, v)})

    @classmethod
    def from_nu(cls, nu: Sequence[complex]) -> "PointConfig":
        """Interleaved spectral vector: odd entries are the conjugated family."""
        if len(nu) % 2:
            raise ValueError("nu must have even length")
        return cls.from_arrays(nu[0::2], nu[1::2])

    @classmethod
    def from_json(cls, obj) -> "PointConfig":
        if isinstance(obj, str):
            obj = json.loads(obj)
        if not isinstance(obj, dict) or set(obj) != {"points"}:
            raise ValueError("point JSON must be {'points': [...]}")
        vs, z, w = [], {}, {}
        for rec in obj["points"]:
            if set(rec) != {"vertex", "z", "w"}:
                raise ValueError(f"bad point record {rec}")
            k = int(rec["vertex"])
            vs.append(k)
            z[k] = complex(rec["z"][0], rec["z"][1])
            w[k] = complex(rec["w"][0], rec["w"][1])
        return cls(tuple(sorted(vs)), z, w)

    def to_json(self) -> dict:
        return {
            "points": [
                {"vertex": k,
                 "z": [self.z[k].real, self.z[k].imag],
                 "w": [self.w[k].real, self.w[k].imag]}
                for k in self.vertices
            ]
        }

    # u/v aliases: u is the conjugated family, v the plain one.
    @property
    def u(self) -> dict[int, complex]:
        return self.z

    @property
    def v(self) -> dict[int, complex]:
        return self.w

    def restrict(self, vertices: Iterable[int]) -> "PointConfig":
        vs = tuple(sorted(set(vertices)))
        if not set(vs) <= set(self.vertices):
            raise ValueError("cannot restrict to vertices outside the config")
        return PointConfig(vs, {k: self.z[k] for k in vs}, {k: self.w[k] for k in vs})

    def permute_w(self, pi: PartialPermutation) -> "PointConfig":
        """Replace w_a by w_{pi^{-1}(a)}; pi must act on all vertices."""
        inv = pi.invert()
        return PointConfig(
            self.vertices, dict(self.z),
            {k: self.w[inv(k)] for k in self.vertices},
        )

    def scaled(self, tz: complex = 1.0, tw: complex = 1.0) -> "PointConfig":
        """Scale conj(z) by tz and w by tw (z itself picks up conj(tz))."""
        cz = complex(tz).conjugate()
        return PointConfig(
            self.vertices,
            {k: cz * self.z[k] for k in self.vertices},
            {k: complex(tw) * self.w[k] for k in self.vertices},
        )

    def inside_disc(self) -> bool:
        return all(
            abs(x) < 1.0
            for k in self.vertices
            for x in (self.z[k], self.w[k])
        )

    def pairwise_distinct(self) -> bool:
        vals = [self.z[k] for k in self.vertices] + [self.w[k] for k in self.vertices]
        tol = _coincidence_tol(*vals) if vals else 0.0
        return all(abs(a - b) > tol for a, b in itertools.combinations(vals, 2))

    def scale(self) -> float:
        return max(
            [1.0] + [abs(self.z[k]) for k in self.vertices]
            + [abs(self.w[k]) for k in self.vertices]
        )


@dataclass(frozen=True)
class SeparationReport:
    Dist: float
    dist: float

    @property
    def ok_macroscopic(self) -> bool:
        return self.Dist > 0.0


def separation(pts: PointConfig) -> SeparationReport:
    """Minimal cross/within distances and boundary gaps of a configuration."""
    vs = pts.vertices
    zs = [pts.z[k] for k in vs]
    ws = [pts.w[k] for k in vs]
    big = math.inf
    cross = min((abs(a - b) for a in zs for b in ws), default=big)
    within = min(
        (abs(a - b) for fam in (zs, ws) for a, b in itertools.combinations(fam, 2)),
        default=big,
    )
    boundary = min((1.0 - abs(x) for x in zs + ws), default=big)
    paired = min((abs(pts.z[k] - pts.w[k]) for k in vs), default=big)
    return SeparationReport(
        Dist=min(cross, within, boundary), dist=min(paired, boundary)
    )


def frak_h(sigma: PartialPermutation, pts: PointConfig,
           kernel: Callable[[int, int], complex] | None = None) -> complex:
    """Diagonal value: sum over the support of the pair kernel along orbits."""
    if not sigma.support <= set(pts.vertices):
        raise ValueError("sigma acts outside the point configuration")
    if kernel is None:
        kernel = lambda b, a: h(pts.z[b], pts.w[a])
    inv = sigma.invert()
    return sum((kernel(b, inv(b)) for b in sorted(sigma.support)), complex(0))


def partial_fractions(poles: Sequence[complex]) -> list[complex]:
    """Coefficients c_a with prod(x - p_a)^{-1} = sum c_a (x - p_a)^{-1}."""
    cs = []
    for i, p in enumerate(poles):
        c = complex(1)
        for j, q in enumerate(poles):
            if i == j:
                continue
            if abs(p - q) < _coincidence_tol(p, q):
                raise DegenerateConfig(f"repeated pole {p}")
            c /= p - q
        cs.append(c)
    return cs


def frak_n(sigma: PartialPermutation, tau: PartialPermutation, pts: PointConfig,
           kernel: Callable[[int, int], complex] | None = None) -> complex:
    """Off-diagonal entry: partial-fraction combination of kernel values.

    Requires sigma strictly one step below tau.  The sum runs over the
    non-fixed w-side vertices (preimage convention: identity off-support)
    against the non-fixed z-side vertices.
    """
    if sigma == tau or not leq_step(sigma, tau):
        raise NotComparable(f"{sigma!r} is not strictly one step below {tau!r}")
    if kernel is None:
        kernel = lambda b, a: h(pts.z[b], pts.w[a])
    a_side = sorted(hat_nonfixed_preimage(sigma, tau))
    b_side = sorted(hat_nonfixed(sigma, tau))
    cw = partial_fractions([pts.w[a] for a in a_side])
    cz = partial_fractions([pts.z[b].conjugate() for b in b_side])
    total = complex(0)
    for ca, a in zip(cw, a_side):
        for cb, b in zip(cz, b_side):
            total += kernel(b, a) * ca * cb
    return total


def disc_quadrature(
    f: Callable[[np.ndarray], np.ndarray],
    resolution: int,
    singularities: Sequence[complex] = (),
    chunk: int = 64,
) -> complex:
    """Disc average (1/pi) * integral over the unit disc of f.

    Polar midpoint rule on a resolution x (2 resolution) grid.  Cells whose
    center lies within one cell diameter of a singularity are dropped; for
    the simple-pole integrands used here the local contribution cancels by
    angular symmetry, so dropping is the correct leading-order treatment.
    """
    n_r, n_t = resolution, 2 * resolution
    dr, dt = 1.0 / n_r, 2.0 * math.pi / n_t
    theta = (np.arange(n_t) + 0.5) * dt
    eith = np.exp(1j * theta)
    sing = np.asarray(list(singularities), dtype=complex)
    total = 0.0 + 0.0j
    for lo in range(0, n_r, chunk):
        hi = min(lo + chunk, n_r)
        r = ((np.arange(lo, hi) + 0.5) * dr)[:, None]
        nu = r * eith[None, :]
        vals = np.asarray(f(nu), dtype=complex)
        if sing.size:
            diam = np.sqrt(dr**2 + (r * dt) ** 2)
            keep = np.ones(nu.shape, dtype=bool)
            for p in sing:
                keep &= np.abs(nu - p) > diam
            vals = np.where(keep, vals, 0.0)
        total += np.sum(vals * r) * dr * dt
    return complex(total / math.pi)


def h_quadrature(a: complex, b: complex, resolution: int) -> complex:
    """Numerical oracle for h via its defining disc integral."""
    a, b = complex(a), complex(b)

    def integrand(nu):
        return 1.0 / ((np.conj(nu) - a.conjugate()) * (nu - b))

    return disc_quadrature(integrand, resolution, singularities=[a, b])


def frak_n_quadrature(
    sigma: PartialPermutation,
    tau: PartialPermutation,
    pts: PointConfig,
    resolution: int,
) -> complex:
    """Numerical oracle for the off-diagonal entries via the disc integral."""
    if sigma == tau or not leq_step(sigma, tau):
        raise NotComparable(f"{sigma!r} is not strictly one step below {tau!r}")
    inv = sigma.invert()
    pairs = [
        (pts.z[b], pts.w[inv(b) if b in sigma.support else b])
        for b in sorted(hat_nonfixed(sigma, tau))
    ]

    def integrand(nu):
        out = np.ones_like(nu)
        cnu = np.conj(nu)
        for zb, wa in pairs:
            out = out / ((cnu - zb.conjugate()) * (nu - wa))
        return out

    sing = [zb for zb, _ in pairs] + [wa for _, wa in pairs]
    return disc_quadrature(integrand, resolution, singularities=sing)


def wirtinger_mixed_fd(
    f: Callable[[complex, complex], complex],
    a: complex,
    b: complex,
    step: float,
) -> complex:
    """Central-difference estimate of d/da d/d(conj b) f(a, b).

    Wirtinger convention: d/da = (d/dx - i d/dy)/2 in a = x + iy, and
    d/d(conj b) = (d/dx' + i d/dy')/2 in b = x' + iy'.
    """
    s = float(step)

    def da(func_b):  # d/da at fixed inner argument builder
        def g(bb):
            fx = (f(a + s, bb) - f(a - s, bb)) / (2 * s)
            fy = (f(a + 1j * s, bb) - f(a - 1j * s, bb)) / (2 * s)
            return 0.5 * (fx - 1j * fy)
        return g(func_b)

    gx = (da(b + s) - da(b - s)) / (2 * s)
    gy = (da(b + 1j * s) - da(b - 1j * s)) / (2 * s)
    return 0.5 * (gx + 1j * gy)
