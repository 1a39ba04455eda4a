import math

import numpy as np
import pytest

import levdyn


def test_version():
    assert levdyn.__version__ == "0.1.0"


def test_fixed_point_and_regimes():
    p = levdyn.MapParams(0.845, 0.557)
    assert abs(levdyn.eval_T(p, 0.845) - 0.845) < 1e-12
    assert levdyn.classify(p).tag == "C3-chaotic"
    assert levdyn.classify(levdyn.MapParams(0.258, 0.837)).tag == "C1"
    assert p.with_n(1e3).n == 1e3


def test_errors_map_to_exception_hierarchy():
    with pytest.raises(levdyn.InadmissibleError):
        levdyn.MapParams(0.99, 0.1)
    with pytest.raises(levdyn.DomainError):
        levdyn.MapParams(1.5, 0.5)
    assert issubclass(levdyn.TooShortError, levdyn.Error)
    with pytest.raises(levdyn.TooShortError):
        levdyn.zero_one_test(np.zeros(10))


def test_simulation_is_seeded():
    k = levdyn.NoiseKernel(levdyn.MapParams(0.845, 0.557, 1e3))
    a = levdyn.simulate(k, 0.5, 500, seed=3)
    b = levdyn.simulate(k, 0.5, 500, seed=3)
    assert a.shape == (500,)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, levdyn.simulate(k, 0.5, 500, seed=4))


def test_lyapunov_estimates():
    p = levdyn.MapParams(0.845, 0.557)
    assert abs(levdyn.lyap_deterministic(p) - 0.340) < 0.01
    est = levdyn.lyap_average(levdyn.NoiseKernel(p.with_n(1e9)), realizations=16, steps=5000, seed=1)
    assert est["mean"] > 0.25
    assert est["std_error"] > 0


def test_stationary_density_is_normalized():
    k = levdyn.NoiseKernel(levdyn.MapParams(0.845, 0.557, 1e3))
    s = levdyn.stationary_density(k, bins=512)
    assert s["weights"].shape == (512,)
    assert math.isclose(s["weights"].sum(), 1.0, abs_tol=1e-10)
    assert s["residual"] < 1e-10
    lo, hi = levdyn.confining_interval(k)
    assert 0 < lo < hi < 1


def test_chaos_detection():
    chaotic = levdyn.logistic_orbit(4.0, 0.2, 1000)
    v = levdyn.cdta_classify(chaotic, n_surrogates=40, seed=1)
    assert v["label"] == "chaotic"
    assert v["K"] > v["cutoff"]
    noise = np.random.default_rng(0).normal(size=590)
    v = levdyn.cdta_classify(noise, n_surrogates=40, seed=1)
    assert v["label"] == "stochastic"
    assert v["K"] is None
    assert levdyn.k_cutoff(59) > levdyn.k_cutoff(1180)
