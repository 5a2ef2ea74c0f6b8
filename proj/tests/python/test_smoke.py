import numpy as np
import pytest

import bdcp


def params(**kw):
    return bdcp.ModelParams(**kw)


def test_philox_matches_numpy():
    ours = bdcp.philox_u64(123, 7, 8)
    bits = np.random.Philox(key=[123, 7], counter=0)
    theirs = bits.random_raw(8)
    assert np.array_equal(ours, theirs)


def test_reaction_rates_on_a_segment():
    g = bdcp.Geometry(1, 1)
    states = np.array([1, 0, 3], dtype=np.uint8)
    p = params(lambda1=2.0, lambda2=1.0, r=0.5)
    rates = bdcp.reaction_rates(g, states, 1, p)
    assert rates == pytest.approx([0.0, 3.0, 0.5, 0.0])
    with pytest.raises(ValueError):
        bdcp.boundary_rates(bdcp.Geometry(1, 2), np.zeros(5, np.uint8), 2, p)


def test_simulation_matches_exact_distribution():
    g = bdcp.Geometry(1, 1)
    p = params(lambda1=1.5, lambda2=0.5, r=0.7)
    init = np.array([1, 2, 0], dtype=np.uint8)
    code = int(sum(int(s) << (2 * i) for i, s in enumerate(init)))
    exact = bdcp.transient_distribution(g, p, code, 0.3)
    assert exact.sum() == pytest.approx(1.0)
    counts = np.zeros(64)
    for r in range(4000):
        out = bdcp.simulate(g, init, p, 0.3, seed=5, replica=r)
        assert out["continuity_defect"] == 0
        counts[out["code"]] += 1
    tv = 0.5 * np.abs(counts / counts.sum() - exact).sum()
    assert tv < 0.06


def test_pde_and_spectral_agree():
    p = params()
    fd = bdcp.solve_pde("cosine:0.2,-0.1,0.15", p, 0.1, h=1 / 32, snapshots=[0.1])
    sp = bdcp.spectral_solve("cosine:0.2,-0.1,0.15", p, 0.1, [0.1], list(fd["u"]), modes=32, tol=1e-6)
    assert fd["rho"].shape == (2, 65, 3)
    assert np.max(np.abs(fd["rho"][-1] - sp[0])) < 1e-3
    assert np.all(fd["rho"] >= -1e-9)
    with pytest.raises(ValueError):
        bdcp.reaction_F([0.8, 0.3, 0.1], p)


def test_coupling_and_discrepancy():
    g = bdcp.Geometry(1, 4)
    same = np.zeros(9, dtype=np.uint8)
    other = same.copy()
    other[4] = 1
    M = bdcp.default_box_M(4, 1)
    q = np.exp(-1 / 4)
    expected = q * (1 - q ** (M - 1)) / (1 - q) / 16
    assert bdcp.discrepancy_h(g, same, other, M, 1) == pytest.approx(expected, rel=1e-12)
    assert bdcp.discrepancy_h(g, same, same, M, 1) == 0.0
    moves = bdcp.coupled_reaction_rates(g, same, same, M, 4, params())
    assert all(m["moves_left"] and m["moves_right"] for m in moves)
    left, right, h = bdcp.simulate_coupled(g, same, same, M, params(scale_N=4), 0.2, 1, 0)
    assert np.array_equal(left, right) and h == 0.0


def test_experiment_roundtrip():
    text = "kind = pde-compare\nsnapshots = 0.05\npde_h = 0.03125\nspectral_modes = 32\ncompare_tol = 0.01\n"
    rep = bdcp.run_experiment(text)
    assert rep["passed"]
    assert "pde-compare.csv" in rep["files"]
    assert rep["files"]["pde-compare.csv"].startswith("# bdcp pde-compare spec_hash=" + rep["spec_hash"])
    again = bdcp.run_experiment(bdcp.canonical_spec(text))
    assert again["spec_hash"] == rep["spec_hash"]
    with pytest.raises(ValueError):
        bdcp.run_experiment("replicas = 0\n")
