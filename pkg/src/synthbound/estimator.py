"""Linear synthetic-control weights, counterfactual prediction and ATT."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import ConfigError, DataError, RankDeficientError, UnderdeterminedError
from .panel import InterventionSpec, PanelData, ensure_valid, split_pre_post
from .solvers import active_set_lsq


class FitVariant(str, Enum):
    OLS_NO_INTERCEPT = "ols"
    NNLS = "nnls"
    SIMPLEX = "simplex"


@dataclass(frozen=True)
class FitMethod:
    variant: FitVariant = FitVariant.OLS_NO_INTERCEPT
    zero_tolerance: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "variant", FitVariant(self.variant))
        if not self.zero_tolerance >= 0:
            raise ConfigError(f"zero_tolerance must be >= 0, got {self.zero_tolerance}")


@dataclass(frozen=True, eq=False)
class WeightModel:
    """Fitted donor weights.

    ``beta`` holds the reported coefficients (entries with magnitude at or
    below ``method.zero_tolerance`` are exactly zero); ``raw_beta`` keeps the
    solver output.
    """

    donor_names: tuple[str, ...]
    beta: np.ndarray
    method: FitMethod
    pre_rmse: float
    raw_beta: np.ndarray
    iterations: int = 0

    @property
    def weights(self) -> dict[str, float]:
        return {d: float(b) for d, b in zip(self.donor_names, self.beta)}


@dataclass(frozen=True, eq=False)
class AttResult:
    time_index: tuple
    post_times: tuple
    observed: np.ndarray
    counterfactual: np.ndarray
    att_per_period: np.ndarray
    running_att: np.ndarray
    avg_att: float


def _collinear_columns(X: np.ndarray, names: Sequence[str]) -> list[str]:
    _, s, vt = np.linalg.svd(X, full_matrices=True)
    cutoff = np.finfo(float).eps * max(X.shape) * (s[0] if s.size else 0.0)
    rank = int((s > cutoff).sum())
    null = vt[rank:]
    involved = np.any(np.abs(null) > 1e-8, axis=0)
    return [n for n, hit in zip(names, involved) if hit]


def fit_weights(panel: PanelData, spec: InterventionSpec, method: FitMethod | None = None) -> WeightModel:
    """Fit donor weights on the pre-intervention rows.

    Raises
    ------
    UnderdeterminedError
        OLS with fewer pre periods than donors.
    RankDeficientError
        OLS with collinear donor columns; ``.collinear`` names them.
    ConvergenceError
        The NNLS/simplex solver hit its iteration cap.
    """
    method = method or FitMethod()
    ensure_valid(panel)
    pre, _ = split_pre_post(panel, spec)
    names = panel.donor_units
    if not names:
        raise DataError("no donor units", code="no_donors")
    X = panel.donors[pre.start : pre.stop]
    y = panel.observed[pre.start : pre.stop]
    iterations = 0
    if method.variant is FitVariant.OLS_NO_INTERCEPT:
        if len(pre) < len(names):
            raise UnderdeterminedError(
                f"{len(pre)} pre periods for {len(names)} donors; OLS needs at least as many periods as donors"
            )
        raw, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
        if rank < len(names):
            bad = _collinear_columns(X, names)
            raise RankDeficientError(f"donor matrix has rank {rank} < {len(names)}; collinear: {', '.join(bad)}", bad)
    else:
        raw, iterations = active_set_lsq(X, y, simplex=method.variant is FitVariant.SIMPLEX)
    beta = np.where(np.abs(raw) <= method.zero_tolerance, 0.0, raw)
    if method.variant is FitVariant.SIMPLEX and beta.sum() > 0:
        beta = beta / beta.sum()
    resid = y - X @ beta
    beta.setflags(write=False)
    raw = np.array(raw)
    raw.setflags(write=False)
    return WeightModel(
        donor_names=tuple(names),
        beta=beta,
        method=method,
        pre_rmse=float(np.sqrt(np.mean(resid**2))),
        raw_beta=raw,
        iterations=iterations,
    )


def predict_counterfactual(model: WeightModel, panel: PanelData) -> np.ndarray:
    """Weighted donor combination for every period, pre and post."""
    X = panel.columns(model.donor_names)
    return X @ model.beta


def compute_att(
    observed: np.ndarray,
    counterfactual: np.ndarray,
    spec: InterventionSpec,
    time_index: Sequence,
) -> AttResult:
    observed = np.asarray(observed, dtype=float)
    counterfactual = np.asarray(counterfactual, dtype=float)
    time_index = tuple(time_index)
    if not (observed.shape == counterfactual.shape == (len(time_index),)):
        raise DataError(
            f"misaligned series: observed {observed.shape}, counterfactual {counterfactual.shape}, "
            f"{len(time_index)} time labels",
            code="misaligned_series",
        )
    try:
        t0 = time_index.index(spec.t0)
    except ValueError:
        raise DataError(f"t0={spec.t0!r} not in time index", code="unknown_time") from None
    att = observed[t0:] - counterfactual[t0:]
    running = np.cumsum(att) / np.arange(1, att.size + 1)
    return AttResult(
        time_index=time_index,
        post_times=time_index[t0:],
        observed=observed,
        counterfactual=counterfactual,
        att_per_period=att,
        running_att=running,
        avg_att=float(running[-1]),
    )
