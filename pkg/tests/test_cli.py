import json

import pytest
from click.testing import CliRunner

from eigenoverlap.analytic import PointConfig
from eigenoverlap.cli import main
from eigenoverlap.correlate import rho4_closed


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def pts_file(tmp_path):
    def write(u, v, name="pts.json"):
        path = tmp_path / name
        path.write_text(json.dumps(PointConfig.from_arrays(u, v).to_json()))
        return str(path)

    return write


def test_lattice(runner):
    out = runner.invoke(main, ["lattice", "--ell", "2"])
    assert out.exit_code == 0
    data = json.loads(out.output)
    assert len(data["elements"]) == 5
    # every element one-step-precedes the full cycle
    assert sorted(p for p, q in data["precedes"] if q == 4) == [0, 1, 2, 3]


def test_lattice_cap(runner):
    out = runner.invoke(main, ["lattice", "--ell", "9"])
    assert out.exit_code == 3


def test_rho_command(runner, pts_file):
    path = pts_file([0], [0.5])
    out = runner.invoke(main, ["rho", "--perm", "(1)", "--points", path])
    assert out.exit_code == 0
    data = json.loads(out.output)
    assert data["value"] == [-16.0, 0.0]

    out = runner.invoke(main, ["rho", "--perm", "()", "--points", path])
    assert json.loads(out.output)["value"] == [1.0, 0.0]

    out = runner.invoke(
        main, ["rho", "--perm", '{"cycles": [[1]]}', "--points", path]
    )
    assert json.loads(out.output)["value"] == [-16.0, 0.0]


def test_rho_validation_and_degeneracy(runner, pts_file):
    path = pts_file([0], [0.5])
    assert runner.invoke(main, ["rho", "--perm", "(1,2", "--points", path]).exit_code == 2
    assert runner.invoke(main, ["rho", "--perm", "(1,2)", "--points", path]).exit_code == 2
    coincident = pts_file([0.3], [0.3], "bad.json")
    assert (
        runner.invoke(main, ["rho", "--perm", "(1)", "--points", coincident]).exit_code
        == 3
    )


def test_rho4(runner):
    nu = [0.1, 0.0, 0.5, 0.2, -0.3, 0.1, 0.2, -0.4]
    out = runner.invoke(main, ["rho4", "--nu", *map(str, nu)])
    assert out.exit_code == 0
    want = rho4_closed(
        complex(nu[0], nu[1]), complex(nu[2], nu[3]),
        complex(nu[4], nu[5]), complex(nu[6], nu[7]),
    )
    got = json.loads(out.output)["value"]
    assert complex(got[0], got[1]) == pytest.approx(want)


def test_nmatrix(runner, pts_file):
    path = pts_file([0.3 + 0.2j, -0.4 + 0.1j], [0.5 - 0.3j, -0.1 - 0.45j])
    out = runner.invoke(main, ["nmatrix", "--points", path])
    assert out.exit_code == 0
    data = json.loads(out.output)
    assert len(data["elements"]) == 5
    assert len(data["L"]) == 5 and len(data["exp"]) == 5


def test_quadcheck(runner, pts_file):
    path = pts_file([0.35 + 0.1j], [-0.32 - 0.2j])
    out = runner.invoke(main, ["quadcheck", "--points", path, "--resolution", "300"])
    assert out.exit_code == 0
    data = json.loads(out.output)
    assert data["max_abs_error"] < 5e-3
    kinds = {row["kind"] for row in data["rows"]}
    assert kinds == {"h", "n"}


def test_mc_fn_cond_deterministic(runner, pts_file):
    path = pts_file([0.4j], [-0.5])
    args = ["mc", "fn-cond", "--n", "16", "--samples", "80", "--seed", "4",
            "--points", path, "--verify"]
    first = runner.invoke(main, args)
    second = runner.invoke(main, args)
    assert first.exit_code == 0
    assert first.output == second.output
    data = json.loads(first.output)
    assert set(data) == {"mean", "stderr", "target", "sigmas", "count"}
    assert data["count"] == 80


def test_mc_transfer(runner, pts_file):
    path = pts_file([0.3 + 0.2j], [0.5 - 0.3j])
    out = runner.invoke(
        main,
        ["mc", "transfer", "--n", "4", "--samples", "500", "--seed", "2",
         "--points", path, "--verify"],
    )
    assert out.exit_code == 0
    data = json.loads(out.output)
    assert data["sigmas"] <= 5.0


def test_mc_overlap_diag(runner):
    out = runner.invoke(
        main,
        ["mc", "overlap-diag", "--n", "48", "--samples", "60", "--seed", "3",
         "--eps", "0.25", "--center", "0", "0"],
    )
    assert out.exit_code == 0
    data = json.loads(out.output)
    assert data["target"] == [1.0, 0.0]
    assert abs(data["mean"][0] - 1.0) < 0.2


def test_mc_missing_points(runner):
    out = runner.invoke(main, ["mc", "fn", "--n", "8", "--samples", "4"])
    assert out.exit_code == 2


def test_accept_subset(runner):
    out = runner.invoke(main, ["accept", "--criteria", "2"])
    assert out.exit_code == 0
    assert "[PASS] criterion  2" in out.output
    out = runner.invoke(main, ["accept", "--criteria", "99"])
    assert out.exit_code == 2
