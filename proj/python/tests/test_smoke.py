import cmath
import itertools
import math

import pytest

import rigidlab


def brute_sigma(points):
    out = [1.0 + 0j]
    for k in range(1, len(points) + 1):
        out.append(sum(math.prod(c) for c in itertools.combinations(points, k)))
    return out


def test_elem_sym_matches_subsets():
    pts = [0.3 + 0.1j, -1.2 + 0.5j, 2.0 - 0.7j, 0.05j, -0.4 - 0.4j]
    got = rigidlab.elem_sym(pts)
    want = brute_sigma(pts)
    assert len(got) == len(want)
    for a, b in zip(got, want):
        assert abs(a - b) <= 1e-12 * max(1.0, abs(b))


def test_gaf_roots_reproduce_coefficients():
    g = rigidlab.sample_gaf(20, seed=3)
    assert len(g["roots"]) == 20 and not g["flagged"]
    sig = rigidlab.elem_sym(g["roots"])
    n, xi = g["n"], g["xi"]
    for k in range(n + 1):
        lhs = sig[k] * xi[n] / math.sqrt(math.factorial(n) / math.factorial(n - k))
        assert abs(lhs - (-1) ** k * xi[n - k]) <= 1e-7 * max(abs(x) for x in xi)
    assert rigidlab.sample_gaf(20, seed=3)["roots"] == g["roots"]


def test_conditional_density_against_direct_formula():
    omega = [1.5 + 0.2j, -1.1 - 1.3j, 0.4 + 2.2j]
    zeta = [0.2 + 0.1j, -0.3 + 0.4j]
    n = len(omega) + len(zeta)
    pts = zeta + omega
    log_vdm = sum(2 * math.log(abs(a - b)) for a, b in itertools.combinations(pts, 2))
    sig = brute_sigma(pts)
    d = sum(abs(sig[k]) ** 2 / (math.factorial(n) / math.factorial(n - k)) for k in range(n + 1))
    want = log_vdm - (n + 1) * math.log(d)
    assert rigidlab.gaf_cond_logdensity(zeta, omega, n) == pytest.approx(want, rel=1e-10)
    with pytest.raises(rigidlab.ConstraintError):
        rigidlab.gaf_cond_logdensity(zeta, omega, n, s=sum(zeta) + 0.1)
    with pytest.raises(rigidlab.DomainError):
        rigidlab.gaf_log_D(zeta, omega, n + 1)


def test_split_partitions_points():
    pts = [0.1 + 0j, 2.0 + 0j, -0.5j, 3j]
    s = rigidlab.split(pts, radius=1.0, seed=1)
    assert s["m"] == 2
    assert sorted(abs(z) for z in s["omega"]) == [2.0, 3.0]
    assert cmath.isclose(s["s"], 0.1 - 0.5j)


def test_run_experiment_small_and_deterministic():
    cfg = {"experiment": "tails", "n_list": [20], "trials": 3, "master_seed": 4, "workers": 1}
    a = rigidlab.run_experiment(cfg, "csv")
    assert a == rigidlab.run_experiment(cfg, "csv")
    assert a.count("\n") == 4
    j = rigidlab.run_experiment(cfg, "json")
    assert len(j["rows"]) == 3 and "summary" in j
    assert "tails" in rigidlab.experiments()
    with pytest.raises(rigidlab.DomainError):
        rigidlab.run_experiment({"bogus": 1})
