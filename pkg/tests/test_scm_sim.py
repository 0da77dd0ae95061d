import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from synthbound.errors import ConfigError
from synthbound.scm_sim import (
    SimConfig,
    derive_seed,
    generate,
    mean_identity,
    oracle,
    proxies_bias_sample,
    run_validity_experiment,
    true_bias_population,
    true_bias_sample,
    validity_conditions,
)


def test_defaults_and_scenarios():
    c = SimConfig()
    assert (c.a, c.b, c.c, c.d) == (1.0, 0.5, 1.0, 0.5)
    assert (c.w_prob_pre, c.w_prob_post, c.x_noise_mean_pre, c.treatment_effect) == (0.5, 1.0, 0.0, 2.0)
    assert SimConfig.scenario_a().x_noise_mean_post == 0.5
    assert SimConfig.scenario_b().x_noise_mean_post == 0.1
    n = SimConfig.null()
    assert n.treatment_effect == 0 and n.w_prob_post == n.w_prob_pre and n.x_noise_mean_post == 0


@pytest.mark.parametrize(
    "kw", [{"t_pre": 1}, {"t_post": 0}, {"w_prob_pre": 1.5}, {"w_prob_post": -0.1}, {"seed": -1}, {"seed": 2**64},
           {"ar_rho": 1.0}, {"x_width": 0}]
)
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        SimConfig(**kw)


def test_seed_derivation_is_stable():
    assert derive_seed(1, 0) == derive_seed(1, 0)
    assert len({derive_seed(1, i) for i in range(100)}) == 100
    assert derive_seed(1, 0) != derive_seed(2, 0)
    assert 0 <= derive_seed(2**64 - 1, 5) < 2**64


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**64 - 1))
def test_determinism(seed):
    cfg = SimConfig(seed=seed, t_pre=20, t_post=10, x_width=2, z_width=2)
    a, b = generate(cfg), generate(cfg)
    assert a.panel.values.tobytes() == b.panel.values.tobytes()
    for name in ("z_series", "u_series", "w_series", "i_series", "y_untreated"):
        assert getattr(a, name).tobytes() == getattr(b, name).tobytes()


def test_different_seeds_differ():
    assert not np.array_equal(generate(SimConfig(seed=1)).panel.values, generate(SimConfig(seed=2)).panel.values)


@pytest.mark.parametrize(
    "cfg",
    [SimConfig(seed=3), SimConfig(seed=4, a=2.0, b=-1.0, c=0.5, d=3.0, x_width=3, z_width=2),
     SimConfig(seed=5, ar_rho=0.6), SimConfig(seed=6, stochastic_treatment=True)],
)
def test_mechanism_invariance(cfg):
    ds = generate(cfg)
    y = ds.panel.observed
    x = ds.panel.donors
    u, w, i = ds.u_series, ds.w_series, ds.i_series
    np.testing.assert_array_equal(y, cfg.a * u + cfg.b * w + ds.noise["eps_y"] + cfg.treatment_effect * i)
    np.testing.assert_array_equal(x, cfg.c * u[:, None] + ds.noise["eps_x"])
    np.testing.assert_array_equal(ds.z_series, cfg.d * w[:, None] + ds.noise["eps_z"])
    assert np.all(i[ds.pre] == 0)
    if not cfg.stochastic_treatment:
        assert np.all(i[ds.post] == 1)


def test_panel_shape():
    ds = generate(SimConfig(seed=0, t_pre=30, t_post=7))
    assert ds.panel.treated_unit == "Y" and ds.panel.donor_units == ("X",)
    assert ds.panel.time_index == tuple(range(1, 38))
    assert ds.spec.t0 == 31
    assert generate(SimConfig(x_width=2)).panel.donor_units == ("X1", "X2")


@pytest.mark.parametrize("seed", [0, 1, 2, 17, 123456789])
def test_w_distribution(seed):
    cfg = SimConfig(seed=seed, t_pre=400)
    ds = generate(cfg)
    pre = ds.w_series[ds.pre]
    assert set(np.unique(pre)) <= {0.0, 1.0}
    assert abs(pre.mean() - 0.5) <= 3 * math.sqrt(0.25 / cfg.t_pre)
    assert np.all(ds.w_series[ds.post] == 1.0)


def test_u_distribution():
    u = generate(SimConfig(seed=8, t_pre=50000, t_post=1)).u_series
    assert u.mean() == pytest.approx(1.0, abs=0.02)
    assert u.std() == pytest.approx(1.0, abs=0.02)
    ar = generate(SimConfig(seed=8, t_pre=50000, t_post=1, ar_rho=0.8)).u_series
    assert ar.mean() == pytest.approx(1.0, abs=0.06) and ar.std() == pytest.approx(1.0, abs=0.03)
    assert np.corrcoef(ar[:-1], ar[1:])[0, 1] == pytest.approx(0.8, abs=0.02)


def test_y_jump_at_intervention():
    cfg = SimConfig(seed=9, t_pre=20000, t_post=20000)
    ds = generate(cfg)
    y = ds.panel.observed
    jump = y[ds.post].mean() - y[ds.pre].mean()
    expected = cfg.treatment_effect + cfg.b * (cfg.w_prob_post - cfg.w_prob_pre)
    assert jump == pytest.approx(expected, abs=0.05)


def test_true_bias_population_examples():
    assert true_bias_population(SimConfig()) == 0.25
    assert true_bias_population(SimConfig(w_prob_post=0.5)) == 0
    assert true_bias_population(SimConfig(b=0.5, w_prob_pre=0.0, w_prob_post=1.0)) == 0.5
    assert true_bias_population(SimConfig(b=0.0)) == 0


def test_proxies_bias_examples():
    const = SimConfig(seed=1, d=1.0, w_prob_pre=1.0)
    ds = generate(const)
    flat = replace(ds, z_series=np.full_like(ds.z_series, 0.7))
    assert proxies_bias_sample(flat) == 0
    with pytest.raises(ConfigError):
        proxies_bias_sample(generate(SimConfig(d=0.0)))
    big = generate(SimConfig(seed=2, t_pre=1000, t_post=1000))
    assert proxies_bias_sample(big) == pytest.approx(0.25, abs=0.05)
    assert true_bias_sample(big) == pytest.approx(0.25, abs=0.05)


def test_population_identity():
    cfg = SimConfig(seed=10, t_pre=100000, t_post=1)
    lhs, rhs = mean_identity(generate(cfg))
    assert lhs == pytest.approx(rhs, abs=0.02)
    lhs, rhs = mean_identity(generate(replace(cfg, a=1.5, b=1.0, c=1.5, d=2.0)))
    assert lhs == pytest.approx(rhs, abs=0.02)


def test_validity_conditions_reported():
    c = validity_conditions(SimConfig())
    assert c.observed_weight == 1.0 and c.hidden_weight == 1.0 and c.weights_ok is False
    assert c.observed_mean_shift == 0.5 and c.hidden_mean_shift == 0.25 and c.shifts_ok is True
    b = validity_conditions(SimConfig.scenario_b())
    assert b.observed_mean_shift == pytest.approx(0.1) and b.shifts_ok is False
    assert validity_conditions(SimConfig(a=2.0)).weights_ok is True


def test_oracle_fields():
    o = oracle(generate(SimConfig(seed=4)))
    assert o.true_bias >= 0 and o.proxies_bias >= 0 and o.realized_bound >= 0
    assert math.isnan(oracle(generate(SimConfig(seed=4, d=0.0))).proxies_bias)


def test_experiment_bookkeeping():
    cfg = SimConfig(seed=5)
    s = run_validity_experiment(cfg, 20)
    assert s.replications == len(s.records) == 20
    assert s.coverage == sum(r.covered for r in s.records) / 20
    assert [r.seed for r in s.records] == [derive_seed(5, i) for i in range(20)]
    again = run_validity_experiment(cfg, 20)
    assert [r.oracle for r in again.records] == [r.oracle for r in s.records]
    with pytest.raises(ConfigError):
        run_validity_experiment(cfg, 0)


def test_null_model_realized_bias_is_level_offset_only():
    # With no shift anywhere the realized bias carries no shift component; what
    # remains is the level offset E[Y] - beta E[X] of a no-intercept fit.
    s = run_validity_experiment(SimConfig.null(seed=11), 300)
    offset = 1.25 - 0.75 * 1.0
    assert s.mean_realized_bias == pytest.approx(-offset, abs=0.05)
