"""Command-line front end.

Subcommands wrap the library one to one: lattice enumeration, the lattice
matrix and its eigensystem, closed-form correlations, quadrature
cross-checks, Monte Carlo estimators, and the acceptance-suite runner.

Exit codes: 0 success, 2 validation error, 3 numerical degeneracy,
4 verification failure.
"""

from __future__ import annotations

import json
import os
import sys

import click

from . import acceptance as accept_mod
from .analytic import PointConfig, h, h_quadrature, frak_n, frak_n_quadrature
from .correlate import rho, rho4_closed
from .errors import EigenoverlapError
from .ginibre import (
    MCConfig,
    estimate_diag_overlap,
    estimate_rho_hat,
    mc_conditional_transfer,
    mc_F_N,
    mc_F_N_conditioned,
    substream,
)
from .permutations import (
    OrderedIndex,
    PartialPermutation,
    enumerate_lattice,
    lattice_to_json,
    lt_step,
)
from .spectral import (
    build_nmatrix,
    conditional_F_product,
    exp_spectral,
    nmatrix_to_json,
    solve_eigensystem,
)

EXIT_VALIDATION = 2
EXIT_DEGENERACY = 3
EXIT_VERIFY = 4


def _emit(obj) -> None:
    click.echo(json.dumps(obj, sort_keys=True, separators=(",", ":")))


def _c(x: complex) -> list[float]:
    return [float(x.real), float(x.imag)]


def _load_points(path: str) -> PointConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return PointConfig.from_json(json.load(fh))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise click.UsageError(f"cannot read point configuration: {exc}")


def _load_perm(text: str) -> PartialPermutation:
    try:
        if text.lstrip().startswith("{"):
            return PartialPermutation.from_json(text)
        return PartialPermutation.parse(text)
    except ValueError as exc:
        raise click.UsageError(f"cannot parse permutation: {exc}")


def _default_threads() -> int:
    return int(os.environ.get("OVERLAP_THREADS", "1"))


class _NumericalFailure(click.ClickException):
    exit_code = EXIT_DEGENERACY


def _guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except EigenoverlapError as exc:
        raise _NumericalFailure(f"{type(exc).__name__}: {exc}")


@click.group()
def main() -> None:
    """Eigenvector-overlap correlation functions of the complex Ginibre ensemble."""


@main.command()
@click.option("--ell", type=int, required=True, help="Number of base vertices.")
def lattice(ell: int) -> None:
    """Dump the ordered lattice with its one-step adjacency."""
    idx = _guard(enumerate_lattice, ell)
    _emit(lattice_to_json(idx))


@main.command()
@click.option("--points", "points_path", required=True, type=click.Path())
def nmatrix(points_path: str) -> None:
    """Dump the lattice matrix, eigenvector matrices and exponential."""
    pts = _load_points(points_path)
    idx = _guard(OrderedIndex.for_vertices, pts.vertices)
    nm = _guard(build_nmatrix, idx, pts)
    es = _guard(solve_eigensystem, nm)
    _emit(nmatrix_to_json(nm, es))


@main.command(name="rho")
@click.option("--perm", required=True, help='Cycles, e.g. "(1,2)(3)" or cycle JSON.')
@click.option("--points", "points_path", required=True, type=click.Path())
@click.option("--json", "as_json", is_flag=True, default=True, help="JSON output.")
def rho_cmd(perm: str, points_path: str, as_json: bool) -> None:
    """Closed-form correlation function of a permutation."""
    sigma = _load_perm(perm)
    pts = _load_points(points_path)
    if not sigma.support <= set(pts.vertices):
        raise click.UsageError("permutation acts outside the point configuration")
    res = _guard(rho, sigma, pts)
    _emit(
        {
            "value": _c(res.value),
            "terms": [
                {"pi": p.to_json(), "value": _c(v)} for p, v in res.terms
            ],
        }
    )


@main.command(name="rho4")
@click.option("--nu", nargs=8, type=float, required=True,
              help="Four complex numbers: re im re im re im re im.")
def rho4_cmd(nu) -> None:
    """Closed four-point formula; odd slots are the conjugated family."""
    vals = [complex(nu[2 * k], nu[2 * k + 1]) for k in range(4)]
    _emit({"value": _c(_guard(rho4_closed, *vals))})


@main.command()
@click.option("--points", "points_path", required=True, type=click.Path())
@click.option("--resolution", type=int, default=500, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json", show_default=True)
def quadcheck(points_path: str, resolution: int, fmt: str) -> None:
    """Closed forms against the disc-quadrature oracle."""
    pts = _load_points(points_path)
    idx = _guard(OrderedIndex.for_vertices, pts.vertices)
    rows = []
    for k in pts.vertices:
        closed = _guard(h, pts.z[k], pts.w[k])
        quad = h_quadrature(pts.z[k], pts.w[k], resolution)
        rows.append(
            {"kind": "h", "vertex": k, "closed": _c(closed), "quadrature": _c(quad),
             "abs_error": abs(closed - quad)}
        )
    for j, tau in enumerate(idx.elements):
        for i, sig in enumerate(idx.elements[:j]):
            if lt_step(sig, tau):
                closed = _guard(frak_n, sig, tau, pts)
                quad = frak_n_quadrature(sig, tau, pts, resolution)
                rows.append(
                    {"kind": "n", "from": repr(sig), "to": repr(tau),
                     "closed": _c(closed), "quadrature": _c(quad),
                     "abs_error": abs(closed - quad)}
                )
    if fmt == "csv":
        click.echo("kind,label,closed_re,closed_im,quad_re,quad_im,abs_error")
        for r in rows:
            label = str(r.get("vertex", "")) or f"{r['from']}>{r['to']}"
            click.echo(
                f"{r['kind']},{label},{r['closed'][0]!r},{r['closed'][1]!r},"
                f"{r['quadrature'][0]!r},{r['quadrature'][1]!r},{r['abs_error']!r}"
            )
        return
    _emit({"resolution": resolution, "rows": rows,
           "max_abs_error": max(r["abs_error"] for r in rows)})


@main.command()
@click.argument("estimator",
                type=click.Choice(["fn", "fn-cond", "transfer", "rho-hat", "overlap-diag"]))
@click.option("--n", "n_dim", type=int, required=True)
@click.option("--samples", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--eps", type=float, default=None)
@click.option("--points", "points_path", type=click.Path(), default=None)
@click.option("--perm", default="(1)", show_default=True)
@click.option("--center", nargs=2, type=float, default=(0.0, 0.0), show_default=True)
@click.option("--threads", type=int, default=None)
@click.option("--verify", is_flag=True, help="Exit 4 if |mean-target| > 5 stderr.")
@click.option("--json", "as_json", is_flag=True, default=True)
def mc(estimator, n_dim, samples, seed, eps, points_path, perm, center, threads,
       verify, as_json) -> None:
    """Monte Carlo estimators with closed-form targets."""
    threads = threads if threads is not None else _default_threads()
    cfg = MCConfig(N=n_dim, samples=samples, seed=seed, eps=eps, threads=threads)
    sigma = _load_perm(perm)
    pts = _load_points(points_path) if points_path else None
    if estimator in ("fn", "fn-cond", "transfer", "rho-hat") and pts is None:
        raise click.UsageError(f"--points is required for '{estimator}'")

    if estimator in ("fn", "fn-cond"):
        runner = mc_F_N if estimator == "fn" else mc_F_N_conditioned
        acc = _guard(runner, cfg, sigma, pts)
        idx = OrderedIndex.for_vertices(sigma.support or pts.vertices)
        nm = _guard(build_nmatrix, idx, pts.restrict(sigma.support) if sigma.support else pts)
        es = _guard(solve_eigensystem, nm)
        expN = exp_spectral(nm, es)
        target = complex(
            expN[idx.position(PartialPermutation.empty()), idx.position(sigma)]
        )
    elif estimator == "transfer":
        lam_stream = substream(seed, 2**63)
        lams = []
        while len(lams) < n_dim:
            cand = complex(*lam_stream.uniform(-0.7, 0.7, 2))
            if abs(cand) < 0.75 and all(abs(cand - l) > 0.05 for l in lams):
                used = [pts.z[k] for k in sigma.support] + [pts.w[k] for k in sigma.support]
                if all(abs(cand - x) > 0.05 for x in used):
                    lams.append(cand)
        acc = _guard(
            mc_conditional_transfer, lams, sigma, pts, samples, seed, threads
        )
        target = _guard(conditional_F_product, lams, sigma, pts)
    elif estimator == "rho-hat":
        if eps is None:
            raise click.UsageError("--eps is required for 'rho-hat'")
        acc = _guard(estimate_rho_hat, cfg, sigma, pts)
        target = _guard(rho, sigma, pts).value
    else:  # overlap-diag
        if eps is None:
            raise click.UsageError("--eps is required for 'overlap-diag'")
        c = complex(center[0], center[1])
        acc = _guard(estimate_diag_overlap, cfg, c, eps)
        target = complex(1.0 - abs(c) ** 2)

    sigmas = abs(acc.mean - target) / acc.stderr if acc.stderr > 0 else 0.0
    _emit(
        {"mean": _c(acc.mean), "stderr": acc.stderr, "target": _c(target),
         "sigmas": sigmas, "count": acc.count}
    )
    if verify and acc.stderr > 0 and sigmas > 5.0:
        sys.exit(EXIT_VERIFY)


@main.command(name="accept")
@click.option("--criteria", default="all",
              help="Comma-separated criterion numbers, or 'all' / 'fast'.")
@click.option("--threads", type=int, default=None)
def accept_cmd(criteria: str, threads: int | None) -> None:
    """Run the acceptance suite; one pass/fail line per criterion."""
    threads = threads if threads is not None else _default_threads()
    if criteria == "all":
        wanted = sorted(accept_mod.CRITERIA)
    elif criteria == "fast":
        wanted = [k for k in sorted(accept_mod.CRITERIA) if k not in accept_mod.SLOW]
    else:
        try:
            wanted = sorted(int(x) for x in criteria.split(","))
        except ValueError:
            raise click.UsageError(f"bad criteria list: {criteria!r}")
        unknown = [k for k in wanted if k not in accept_mod.CRITERIA]
        if unknown:
            raise click.UsageError(f"unknown criteria: {unknown}")
    ok = True
    for k in wanted:
        res = accept_mod.run_criterion(k, threads=threads)
        ok &= res.passed
        click.echo(
            f"[{'PASS' if res.passed else 'FAIL'}] criterion {k:2d} "
            f"({res.elapsed:7.2f}s): {res.name}"
            + ("" if res.passed else f" -- {res.detail}")
        )
    if not ok:
        sys.exit(EXIT_VERIFY)


if __name__ == "__main__":
    main()
