"""Smoke tests for the python bindings: each exercises one exported surface
end to end and checks an independently known value or identity."""

import json
import math

import numpy as np
import pytest

import tentlab as tl

SQRT2 = 1.4142135623730951


@pytest.fixture(scope="module")
def lab():
    grid = tl.Grid(dim=1, n=32, period=1.0)
    tg = tl.build_time_grid(1e-3, 0.06, SQRT2)
    coeffs = tl.make_coefficient_field("identity", tl.CoefficientParams(), grid)
    op = tl.DiscreteOperator(coeffs)
    cache = tl.PropagatorCache(op, base_gap=tg.t_min, levels=4)
    return grid, tg, coeffs, op, cache


def test_grid_and_time_grid(lab):
    grid, tg, _, _, _ = lab
    assert grid.num_cells == 32
    assert grid.spacing == pytest.approx(1.0 / 32)
    assert tg.num_nodes >= 6
    nodes = np.asarray(tg.nodes)
    assert nodes[0] == pytest.approx(1e-3)
    # geometric mesh: constant ratio between nodes
    assert np.allclose(nodes[1:] / nodes[:-1], SQRT2)


def test_ball_cells_match_brute_force(lab):
    grid, _, _, _, _ = lab
    cells = set(tl.ball_cells(grid, (0.0, 0.0), 0.08))
    h = grid.spacing
    expected = {i for i in range(32) if min(i * h, 1.0 - i * h) < 0.08}
    expected.add(0)
    assert cells == expected


def test_operator_is_laplacian_on_fourier_mode(lab):
    grid, _, _, op, _ = lab
    n, h = 32, grid.spacing
    k = 3
    mode = np.exp(2j * math.pi * k * np.arange(n) / n)
    lam = (2.0 - 2.0 * math.cos(2.0 * math.pi * k / n)) / (h * h)
    assert np.allclose(op.apply(mode), lam * mode, rtol=1e-8)


def test_semigroup_eigenvalue(lab):
    grid, _, _, _, cache = lab
    n, h = 32, grid.spacing
    k, t = 2, 4e-3
    mode = np.exp(2j * math.pi * k * np.arange(n) / n)
    lam = (2.0 - 2.0 * math.cos(2.0 * math.pi * k / n)) / (h * h)
    out = cache.semigroup_apply(t, mode)
    assert np.allclose(out, math.exp(-t * lam) * mode, rtol=1e-8)


def test_duhamel_identities(lab):
    grid, tg, _, op, cache = lab
    f = tl.random_field(grid, tg, seed=7)
    sol = tl.duhamel_L1(cache, f)
    lhalf = tl.duhamel_Lhalf(cache, f)
    l0 = tl.duhamel_L0(cache, f)
    # gradient operator equals the node-wise gradient of the solution
    assert np.allclose(lhalf.value_matrix(0), sol.grad_u.value_matrix(0), atol=1e-10)
    # maximal-regularity operator equals L applied to the solution
    assert np.allclose(l0.value_matrix(0), sol.lu.value_matrix(0), atol=1e-9)


def test_tent_norm_p2_fubini():
    grid = tl.Grid(dim=1, n=128, period=1.0)
    tg = tl.build_time_grid(4.5e-3, 0.055, 1.189207115002721)
    f = tl.random_field(grid, tg, seed=17)
    vals = np.asarray(f.value_matrix(0))
    nodes = np.asarray(tg.nodes)
    widths = nodes[1:] - nodes[:-1]
    l2 = sum(
        w * np.sum(np.abs(vals[k]) ** 2) / grid.num_cells
        for k, w in enumerate(widths)
    )
    tn = tl.tent_norm(f, tl.TentParams(p=2.0, beta=0.0)).value
    assert 0.9 < tn * tn / (2.0 * l2) < 1.1


def test_field_roundtrip_and_norm_report(lab, tmp_path):
    grid, tg, _, _, _ = lab
    f = tl.random_field(grid, tg, seed=3)
    path = str(tmp_path / "field.json")
    tl.save_field(path, f)
    back = tl.load_field(path)
    assert np.array_equal(np.asarray(back.value_matrix(0)), np.asarray(f.value_matrix(0)))
    report = json.loads(tl.tent_norm(f, tl.TentParams()).serialize())
    assert report["value"] > 0.0


def test_critical_exponents_exact():
    table = json.loads(tl.critical_exponents(n=1, m=2, M="1").serialize())
    assert table["p_M"] == "2/5"
    assert table["p_L_beta"] == "1/2"


def test_run_experiment_deterministic():
    config = json.dumps(
        {
            "grid": {"dim": 1, "n": 32, "refine_n": 64},
            "time": {"t_min": 1e-3, "t_max": 0.04, "ratio": SQRT2},
            "operators": ["L1"],
            "pairs": [[2.0, 0.0]],
            "battery": {"atoms": 1, "noise": 1, "bumps": 1},
            "checks": ["sweep"],
            "seed": 4,
        }
    )
    hash_a, records_a = tl.run_experiment(config)
    hash_b, records_b = tl.run_experiment(config)
    assert hash_a == hash_b
    assert records_a == records_b
    assert records_a
