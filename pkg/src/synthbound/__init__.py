"""Linear synthetic control with an observable bias bound under latent distribution shift."""

from .errors import (
    ConfigError,
    ConvergenceError,
    DataError,
    NumericalError,
    PanelError,
    RankDeficientError,
    SynthBoundError,
    UnderdeterminedError,
)
from .estimator import AttResult, FitMethod, FitVariant, WeightModel, compute_att, fit_weights, predict_counterfactual
from .io import AnalysisConfig, load_panel_csv, read_wide_csv
from .panel import Diagnostic, InterventionSpec, PanelData, Period, PeriodSlice, period_means, split_pre_post, validate
from .report import ReportBundle, format_table, run_analysis, write_bundle
from .scm_sim import (
    BiasOracle,
    SimConfig,
    SimDataset,
    ValidityStats,
    generate,
    proxies_bias_sample,
    run_validity_experiment,
    true_bias_population,
)
from .sensitivity import SensitivityReport, Verdict, analyze, assess, bias_bound, effective_n, proxy_mean_shifts

__version__ = "0.1.0"
