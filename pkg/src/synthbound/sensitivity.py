"""Observable worst-case bias bound for a fitted linear synthetic control.

The bound is ``N * max|beta_i| * max|mean_pre(x_i) - mean_post(x_i)|`` where
both maxima and the count ``N`` run over donors whose reported weight is
nonzero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

from .estimator import AttResult, WeightModel
from .errors import DataError
from .panel import InterventionSpec, PanelData, ensure_valid, period_means, split_pre_post


class Verdict(str, Enum):
    ROBUST = "Robust"
    SENSITIVE = "Sensitive"


@dataclass(frozen=True)
class BiasBound:
    n_effective: int
    max_abs_beta: float
    max_proxy_shift: float
    bound: float
    betas: dict[str, float] = field(default_factory=dict)
    shifts: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class SensitivityReport:
    n_effective: int
    max_abs_beta: float
    max_proxy_shift: float
    bound: float
    avg_att: float
    verdict: Verdict
    explanation: str
    betas: dict[str, float] = field(default_factory=dict)
    shifts: dict[str, float] = field(default_factory=dict)
    pre_means: dict[str, float] = field(default_factory=dict)
    post_means: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n_effective": self.n_effective,
            "max_abs_beta": self.max_abs_beta,
            "max_proxy_shift": self.max_proxy_shift,
            "bound": self.bound,
            "avg_att": self.avg_att,
            "verdict": self.verdict.value,
            "explanation": self.explanation,
            "donors": [
                {
                    "name": d,
                    "beta": self.betas[d],
                    "pre_mean": self.pre_means.get(d),
                    "post_mean": self.post_means.get(d),
                    "shift": self.shifts.get(d),
                }
                for d in self.betas
            ],
        }


def proxy_mean_shifts(panel: PanelData, spec: InterventionSpec, donors: Sequence[str]) -> dict[str, float]:
    """Absolute change in each donor's mean between the pre and post periods."""
    pre, post = split_pre_post(panel, spec)
    before = period_means(panel, pre, donors)
    after = period_means(panel, post, donors)
    return {d: abs(before[d] - after[d]) for d in donors}


def effective_n(model: WeightModel) -> int:
    return int(sum(1 for b in model.beta if b != 0))


def bias_bound(model: WeightModel, shifts: Mapping[str, float]) -> BiasBound:
    active = [(d, float(b)) for d, b in zip(model.donor_names, model.beta) if b != 0]
    missing = [d for d, _ in active if d not in shifts]
    if missing:
        raise DataError(f"no proxy shift for donors: {', '.join(missing)}", code="missing_shift")
    n = len(active)
    if n == 0:
        max_beta = max_shift = 0.0
    else:
        max_beta = max(abs(b) for _, b in active)
        max_shift = max(float(shifts[d]) for d, _ in active)
    return BiasBound(
        n_effective=n,
        max_abs_beta=max_beta,
        max_proxy_shift=max_shift,
        bound=n * max_beta * max_shift,
        betas={d: float(b) for d, b in zip(model.donor_names, model.beta)},
        shifts={d: float(shifts[d]) for d in model.donor_names if d in shifts},
    )


def assess(bound: float, avg_att: float) -> tuple[Verdict, str]:
    """Robust only when the effect strictly exceeds the worst-case bias."""
    if bound < 0:
        raise ValueError(f"bound must be non-negative, got {bound}")
    if abs(avg_att) > bound:
        return Verdict.ROBUST, (
            f"|average ATT| = {abs(avg_att):.4g} > bound {bound:.4g}: the sign of the effect "
            "survives a worst-case shift in an unobserved latent of comparable weight."
        )
    return Verdict.SENSITIVE, (
        f"|average ATT| = {abs(avg_att):.4g} <= bound {bound:.4g}: a worst-case shift in an "
        "unobserved latent could account for the whole estimated effect."
    )


def analyze(panel: PanelData, spec: InterventionSpec, model: WeightModel, att: AttResult) -> SensitivityReport:
    ensure_valid(panel)
    pre, post = split_pre_post(panel, spec)
    donors = list(model.donor_names)
    before = period_means(panel, pre, donors)
    after = period_means(panel, post, donors)
    shifts = {d: abs(before[d] - after[d]) for d in donors}
    frag = bias_bound(model, shifts)
    verdict, text = assess(frag.bound, att.avg_att)
    return SensitivityReport(
        n_effective=frag.n_effective,
        max_abs_beta=frag.max_abs_beta,
        max_proxy_shift=frag.max_proxy_shift,
        bound=frag.bound,
        avg_att=att.avg_att,
        verdict=verdict,
        explanation=text,
        betas=frag.betas,
        shifts=frag.shifts,
        pre_means=before,
        post_means=after,
    )
