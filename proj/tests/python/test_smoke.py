import math

import pytest

import gplab


def test_kernels_and_gram():
    assert gplab.kernel(gplab.PriorSpec.bm(), 0.3, 0.7) == pytest.approx(0.3, abs=1e-15)
    assert gplab.kernel(gplab.PriorSpec.fbm(0.3), 0.5, 0.5) == pytest.approx(0.5 ** 0.6, rel=1e-14)
    g = gplab.gram(gplab.PriorSpec.fbm(0.5), [0.1, 0.4, 0.9])
    assert g.shape == (3, 3)
    assert g[0, 2] == pytest.approx(0.1)


def test_prior_config_round_trip():
    p = gplab.PriorSpec.sum([gplab.PriorSpec.random_polynomial(1, False), gplab.PriorSpec.riemann_liouville(0.8)])
    text = "".join(f"{k} = {v}\n" for k, v in p.to_config())
    assert gplab.prior_from_config(text).describe() == p.describe()
    with pytest.raises(gplab.ConfigError):
        gplab.prior_from_config("prior.kind = bm\nprior.extra = 1\n")


def test_sample_path_is_deterministic():
    a = gplab.sample_path(gplab.PriorSpec.bm(), 64, 5)
    b = gplab.sample_path(gplab.PriorSpec.bm(), 64, 5)
    assert a == b
    assert a[0] == 0.0
    assert len(gplab.sample_path(gplab.PriorSpec.wavelet(2, 1.0, 3), 8, 1, d=2)) == 81


def test_small_ball_entries():
    out = gplab.small_ball(gplab.PriorSpec.bm(), 64, [0.5, 10.0], 2000, 1)
    assert [e["eps"] for e in out] == [0.5, 10.0]
    assert out[1]["hits"] == 2000


def test_fractional():
    m = 1024
    ones = [1.0] * (m + 1)
    half = gplab.frac_integral(ones, 0.5)
    assert half[-1] == pytest.approx(2 / math.sqrt(math.pi), rel=1e-9)
    t = [i / m for i in range(m + 1)]
    d, violated = gplab.frac_derivative(t, 1.0)
    assert not violated
    assert d[m // 2] == pytest.approx(1.0)
    with pytest.raises(gplab.GplabError):
        gplab.frac_integral(ones, -1.0)


def test_rate_and_decentering():
    eps, slope = gplab.solve_rate(lambda e: e ** -2, 1e-6, 10.0, [16, 256, 4096])
    assert eps == pytest.approx([0.5, 0.25, 0.125], rel=1e-3)
    assert slope == pytest.approx(-0.25, abs=1e-3)
    m = 128
    r = gplab.decentering([i / m for i in range(m + 1)], gplab.PriorSpec.released_bm(), 0.05)
    assert r["value"] <= 1.0 + 1e-9
    assert r["constraint_achieved"] < 0.05


def test_models():
    zero = [0.0] * 257
    d = gplab.density_distances(zero, [1.0] * 257)
    assert d["hellinger"] == pytest.approx(0.0, abs=1e-12)
    mean, var = gplab.whitenoise_posterior([0.4, -1.0], 2.0, 0.0, 1, 1)
    assert mean == pytest.approx([0.2, -0.5])
    assert var == pytest.approx([0.25, 0.25])
    mean, cov = gplab.regression_posterior([0.5], [1.0], gplab.PriorSpec.bm(), math.sqrt(0.5), math.sqrt(0.5))
    assert mean[0] == pytest.approx(0.5)


def test_experiment_and_checks():
    rep = gplab.run_experiment(
        "experiment.setting = whitenoise\nexperiment.n = 256, 1024, 4096\nexperiment.replicates = 4\n"
        "truth.family = besov\ntruth.beta = 1\ntruth.j_obs = 12\nseed = 2\n"
    )
    assert rep["target_slope"] == pytest.approx(-1 / 3)
    assert rep["fitted_slope"] < 0
    assert gplab.child_seed(1, "data", 0) == gplab.child_seed(1, "data", 0)
    assert all(c["pass"] for c in gplab.run_checks(3))
