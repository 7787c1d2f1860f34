import math

import pytest

import latticelab as ll


def test_version():
    assert ll.__version__ == "0.1.0"


def test_reciprocal_discreteness():
    pts = [[1.0 / n] for n in range(1, 11)]
    assert ll.discreteness_constant(pts) == pytest.approx(1.0 / 90, rel=1e-12)
    radii = ll.isolation_radii([[0.0], [1.0], [3.0]])
    assert radii == [1.0, 1.0, 2.0]


def test_invalid_matrix_raises_value_error():
    with pytest.raises(ValueError):
        ll.discreteness_constant([[0.0, 1.0], [2.0, 0.0]], matrix=True)


def test_inf_convolution_below_g():
    pts = [[j / 100.0] for j in range(101)]
    g = [math.sqrt(p[0]) for p in pts]
    e = ll.inf_convolution(pts, g, 4)
    assert all(a <= b for a, b in zip(e["g_n"], g))
    assert e["lipschitz_constant"] <= 4 + 1e-9
    assert e["achieved_error"] <= e["alpha_n"] + 1e-9


def test_hat_limit_is_indicator():
    r = ll.hat_check(20, 50)
    assert r["outcome"] == "holds"
    assert r["certificate"] == "monotone"
    limit = r["limit"]
    assert limit[r["x0"]] == 1.0
    assert sum(limit) == 1.0


def test_lip_ratios():
    r = ll.lip_counterexample("caseA", 100, 20)
    assert r["lipschitz_g"] == pytest.approx(10.0)
    for t, ratio in zip(r["t"], r["ratios"]):
        assert ratio > 1.0 / (2.0 * math.sqrt(t))


def test_witnesses():
    w = ll.jump_witness()
    assert len(w["coordinates"]) == 20
    assert w["verified"]
    b = ll.block_witness(1.0, 1.0, 5)
    assert len(b["blocks"]) == 5
    assert all(n > 1.0 for n in b["block_norms"])
    with pytest.raises(ll.LimitInLp, match="limit in ℓ_p"):
        ll.block_witness(1.0, 2.0, 3, 1000)


def test_equivalence_and_cli():
    members = [[1.0 / n, 0.0] for n in range(1, 50)] + [[0.0, 0.0]] * 50
    eq, order, buo = ll.buo_equals_order(members, [0.0, 0.0])
    assert eq and order == buo == "holds"
    code, out, err = ll.run_cli(["--version"])
    assert code == 0 and "0.1.0" in out
    code, _, err = ll.run_cli(["check", "--family", "/nonexistent.json"])
    assert code == 2
