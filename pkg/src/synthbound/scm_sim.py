"""Seeded simulator for a one-donor synthetic-control SCM with a hidden shifting latent.

Per period t, with a latent ``u ~ N(1, 1)`` (observed through the donor
proxies X) and a latent ``w ~ Bernoulli(p_t)`` (observed only through the
hidden proxies Z)::

    y = a*u + b*w + effect*I + eps_y
    x_k = c*u + eps_x,k       eps_x ~ N(mu_x(t), 1)
    z_k = d*w + eps_z,k
    I = 0 before t0, 1 from t0 on

The mechanism coefficients never change with t; only the distribution of w
and the mean of the X noise switch at t0.

Randomness: one PCG64 stream per dataset.  Each period consumes, in order,
one uniform for u, w, eps_y, each eps_x column, each eps_z column and two for
I (Bernoulli draw, additive noise).  Normals come from the inverse normal CDF
of those uniforms, so the draw layout is fixed regardless of configuration.
Replication ``i`` of an experiment seeded with ``s`` uses the 64-bit seed
``SeedSequence(s, spawn_key=(i,)).generate_state(1, uint64)[0]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit, ndtri

from .errors import ConfigError
from .estimator import FitMethod, compute_att, fit_weights, predict_counterfactual
from .panel import InterventionSpec, PanelData
from .sensitivity import analyze

_U64 = 2**64
_Z99 = 2.5758293035489004


@dataclass(frozen=True)
class SimConfig:
    a: float = 1.0
    b: float = 0.5
    c: float = 1.0
    d: float = 0.5
    t_pre: int = 100
    t_post: int = 100
    w_prob_pre: float = 0.5
    w_prob_post: float = 1.0
    x_noise_mean_pre: float = 0.0
    x_noise_mean_post: float = 0.5
    treatment_effect: float = 2.0
    seed: int = 0
    u_mean: float = 1.0
    ar_rho: float = 0.0
    x_width: int = 1
    z_width: int = 1
    stochastic_treatment: bool = False

    def __post_init__(self):
        if self.t_pre < 2:
            raise ConfigError(f"t_pre must be >= 2, got {self.t_pre}")
        if self.t_post < 1:
            raise ConfigError(f"t_post must be >= 1, got {self.t_post}")
        for name in ("w_prob_pre", "w_prob_post"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {p}")
        if not 0 <= self.seed < _U64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if not -1.0 < self.ar_rho < 1.0:
            raise ConfigError(f"ar_rho must lie in (-1, 1), got {self.ar_rho}")
        if self.x_width < 1 or self.z_width < 1:
            raise ConfigError("x_width and z_width must be >= 1")

    @classmethod
    def scenario_a(cls, **overrides) -> "SimConfig":
        """Observed proxies shift more than the hidden ones: bound expected to hold."""
        return cls(**overrides)

    @classmethod
    def scenario_b(cls, **overrides) -> "SimConfig":
        """Observed proxies shift less than the hidden ones: bound expected to fail."""
        return cls(**{"x_noise_mean_post": 0.1, **overrides})

    @classmethod
    def null(cls, **overrides) -> "SimConfig":
        """No treatment effect and no distribution shift anywhere."""
        base = {"treatment_effect": 0.0, "w_prob_post": 0.5, "x_noise_mean_post": 0.0}
        return cls(**{**base, **overrides})

    @property
    def n_periods(self) -> int:
        return self.t_pre + self.t_post


@dataclass(frozen=True, eq=False)
class SimDataset:
    panel: PanelData
    z_series: np.ndarray
    u_series: np.ndarray
    w_series: np.ndarray
    i_series: np.ndarray
    y_untreated: np.ndarray
    noise: dict[str, np.ndarray]
    config: SimConfig

    @property
    def spec(self) -> InterventionSpec:
        return InterventionSpec(self.config.t_pre + 1)

    @property
    def pre(self) -> slice:
        return slice(0, self.config.t_pre)

    @property
    def post(self) -> slice:
        return slice(self.config.t_pre, self.config.n_periods)


@dataclass(frozen=True)
class BiasOracle:
    """Ground truth for one dataset.

    ``true_bias`` and ``proxies_bias`` use sample means of the latents;
    ``realized_bias`` is the signed post-period mean of synthetic control
    minus the true untreated outcome.
    """

    true_bias: float
    proxies_bias: float
    realized_bound: float
    realized_bias: float
    beta: float
    avg_att: float


@dataclass(frozen=True)
class ValidityConditions:
    observed_weight: float
    hidden_weight: float
    weights_ok: bool
    observed_mean_shift: float
    hidden_mean_shift: float
    shifts_ok: bool


@dataclass(frozen=True)
class ReplicationRecord:
    index: int
    seed: int
    oracle: BiasOracle
    covered: bool
    covered_true_bias: bool


@dataclass(frozen=True)
class ValidityStats:
    config: SimConfig
    replications: int
    coverage: float
    coverage_true_bias: float
    mean_bound: float
    mean_realized_bias: float
    mean_abs_realized_bias: float
    mean_true_bias: float
    mean_proxies_bias: float
    mean_beta: float
    mean_avg_att: float
    sd_avg_att: float
    att_half_width_99: float
    conditions: ValidityConditions
    records: list[ReplicationRecord] = field(default_factory=list, repr=False)


def derive_seed(seed: int, index: int) -> int:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def generate(config: SimConfig) -> SimDataset:
    cfg = config
    T, kx, kz = cfg.n_periods, cfg.x_width, cfg.z_width
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    width = 3 + kx + kz + 2
    # rng.random() lies on the grid k * 2**-53; shift to the cell midpoint so ndtri stays finite.
    draws = rng.random((T, width)) + 2.0**-54
    col = 0

    def take(n: int = 1) -> np.ndarray:
        nonlocal col
        out = draws[:, col : col + n]
        col += n
        return out

    eta_u = ndtri(take()[:, 0])
    w_unif = take()[:, 0]
    eps_y = ndtri(take()[:, 0])
    eps_x_std = ndtri(take(kx))
    eps_z = ndtri(take(kz))
    i_unif = take()[:, 0]
    eps_i = ndtri(take()[:, 0])

    post = np.arange(T) >= cfg.t_pre
    if cfg.ar_rho == 0.0:
        u = cfg.u_mean + eta_u
    else:
        scale = math.sqrt(1.0 - cfg.ar_rho**2)
        u = np.empty(T)
        u[0] = cfg.u_mean + eta_u[0]
        for t in range(1, T):
            u[t] = cfg.u_mean + cfg.ar_rho * (u[t - 1] - cfg.u_mean) + scale * eta_u[t]
    w = (w_unif < np.where(post, cfg.w_prob_post, cfg.w_prob_pre)).astype(float)
    if cfg.stochastic_treatment:
        i = np.where(post, (i_unif < expit(u)).astype(float) + eps_i, 0.0)
    else:
        i = post.astype(float)
    x_mean = np.where(post, cfg.x_noise_mean_post, cfg.x_noise_mean_pre)[:, None]
    eps_x = eps_x_std + x_mean

    y_untreated = cfg.a * u + cfg.b * w + eps_y
    y = y_untreated + cfg.treatment_effect * i
    x = cfg.c * u[:, None] + eps_x
    z = cfg.d * w[:, None] + eps_z

    donors = ["X"] if kx == 1 else [f"X{k + 1}" for k in range(kx)]
    panel = PanelData(
        time_index=tuple(range(1, T + 1)),
        unit_names=("Y", *donors),
        values=np.column_stack([y, x]),
        treated_unit="Y",
        donor_units=tuple(donors),
    )
    arrays = {"z": z, "u": u, "w": w, "i": i, "y0": y_untreated, "eps_y": eps_y, "eps_x": eps_x, "eps_z": eps_z}
    for arr in arrays.values():
        arr.setflags(write=False)
    return SimDataset(
        panel=panel,
        z_series=z,
        u_series=u,
        w_series=w,
        i_series=i,
        y_untreated=y_untreated,
        noise={"eps_y": eps_y, "eps_x": eps_x, "eps_z": eps_z},
        config=cfg,
    )


def true_bias_population(config: SimConfig) -> float:
    return abs(config.b * (config.w_prob_pre - config.w_prob_post))


def true_bias_sample(dataset: SimDataset) -> float:
    w = dataset.w_series
    return abs(dataset.config.b * (w[dataset.pre].mean() - w[dataset.post].mean()))


def proxies_bias_sample(dataset: SimDataset) -> float:
    cfg = dataset.config
    if cfg.d == 0:
        raise ConfigError("proxies bias needs d != 0", code="zero_proxy_weight")
    z = dataset.z_series
    return abs((cfg.b / cfg.d) * (z[dataset.pre].mean() - z[dataset.post].mean()))


def mean_identity(dataset: SimDataset) -> tuple[float, float]:
    """Pre-period ``mean(Y)`` and ``(a/c) mean(X) + (b/d) mean(Z)``; equal in population."""
    cfg = dataset.config
    pre = dataset.pre
    y = dataset.panel.observed[pre].mean()
    x = dataset.panel.donors[pre].mean()
    z = dataset.z_series[pre].mean()
    return float(y), float(cfg.a / cfg.c * x + cfg.b / cfg.d * z)


def validity_conditions(config: SimConfig) -> ValidityConditions:
    """Population versions of the two requirements for the bound to hold."""
    observed_weight = config.a / config.c if config.c else math.inf
    hidden_weight = config.b / config.d if config.d else math.inf
    x_shift = abs(config.x_noise_mean_post - config.x_noise_mean_pre)
    z_shift = abs(config.d * (config.w_prob_post - config.w_prob_pre))
    return ValidityConditions(
        observed_weight=observed_weight,
        hidden_weight=hidden_weight,
        weights_ok=observed_weight > hidden_weight,
        observed_mean_shift=x_shift,
        hidden_mean_shift=z_shift,
        shifts_ok=x_shift > z_shift,
    )


def oracle(dataset: SimDataset, method: FitMethod | None = None) -> BiasOracle:
    panel, spec = dataset.panel, dataset.spec
    model = fit_weights(panel, spec, method)
    cf = predict_counterfactual(model, panel)
    att = compute_att(panel.observed, cf, spec, panel.time_index)
    report = analyze(panel, spec, model, att)
    realized = float(np.mean(cf[dataset.post] - dataset.y_untreated[dataset.post]))
    return BiasOracle(
        true_bias=true_bias_sample(dataset),
        proxies_bias=proxies_bias_sample(dataset) if dataset.config.d else math.nan,
        realized_bound=report.bound,
        realized_bias=realized,
        beta=float(model.beta[0]),
        avg_att=att.avg_att,
    )


def run_validity_experiment(
    config: SimConfig, replications: int, method: FitMethod | None = None
) -> ValidityStats:
    """Monte Carlo coverage of the bias bound.

    Coverage counts replications with ``bound >= |realized_bias|``;
    ``coverage_true_bias`` uses ``bound >= true_bias`` instead.
    """
    if replications < 1:
        raise ConfigError(f"replications must be >= 1, got {replications}")
    records = []
    for k in range(replications):
        seed = derive_seed(config.seed, k)
        o = oracle(generate(replace(config, seed=seed)), method)
        records.append(
            ReplicationRecord(
                index=k,
                seed=seed,
                oracle=o,
                covered=o.realized_bound >= abs(o.realized_bias),
                covered_true_bias=o.realized_bound >= o.true_bias,
            )
        )
    get = lambda attr: np.array([getattr(r.oracle, attr) for r in records])  # noqa: E731
    att = get("avg_att")
    sd = float(att.std(ddof=1)) if replications > 1 else 0.0
    return ValidityStats(
        config=config,
        replications=replications,
        coverage=sum(r.covered for r in records) / replications,
        coverage_true_bias=sum(r.covered_true_bias for r in records) / replications,
        mean_bound=float(get("realized_bound").mean()),
        mean_realized_bias=float(get("realized_bias").mean()),
        mean_abs_realized_bias=float(np.abs(get("realized_bias")).mean()),
        mean_true_bias=float(get("true_bias").mean()),
        mean_proxies_bias=float(get("proxies_bias").mean()),
        mean_beta=float(get("beta").mean()),
        mean_avg_att=float(att.mean()),
        sd_avg_att=sd,
        att_half_width_99=_Z99 * sd / math.sqrt(replications),
        conditions=validity_conditions(config),
        records=records,
    )
