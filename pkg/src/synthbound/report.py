"""Analysis pipeline, report bundles and the summary table."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError
from .estimator import AttResult, WeightModel, compute_att, fit_weights, predict_counterfactual
from .io import AnalysisConfig, coerce_time, fmt, load_panel_csv
from .panel import InterventionSpec, PanelData, split_pre_post
from .plot import emit_plot_svg
from .sensitivity import SensitivityReport, analyze

SERIES_FILE = "series.csv"
DONORS_FILE = "donors.csv"
REPORT_FILE = "report.json"
TABLE_FILE = "table.txt"
PLOT_FILE = "plot.svg"


@dataclass(frozen=True)
class TableRow:
    label: str
    n: int
    max_beta: float
    max_proxy_change: float
    bound: float
    avg_att: float


@dataclass(frozen=True, eq=False)
class ReportBundle:
    config: AnalysisConfig
    panel: PanelData
    spec: InterventionSpec
    model: WeightModel
    att: AttResult
    sensitivity: SensitivityReport

    @property
    def table_row(self) -> TableRow:
        s = self.sensitivity
        return TableRow(self.config.label or self.config.treated_unit, s.n_effective, s.max_abs_beta,
                        s.max_proxy_shift, s.bound, s.avg_att)


def run_analysis(config: AnalysisConfig) -> ReportBundle:
    """load -> validate -> split -> fit -> counterfactual -> ATT -> sensitivity."""
    panel = load_panel_csv(config.resolved_data_path(), config)
    spec = InterventionSpec(coerce_time(config.intervention_time, panel.time_index))
    split_pre_post(panel, spec)
    model = fit_weights(panel, spec, config.fit_method)
    cf = predict_counterfactual(model, panel)
    att = compute_att(panel.observed, cf, spec, panel.time_index)
    return ReportBundle(config, panel, spec, model, att, analyze(panel, spec, model, att))


def format_table(rows: Sequence[TableRow]) -> str:
    head = ("Data", "N", "Max. Beta", "Max. Proxy Change", "Bound", "average ATT")
    body = [
        (r.label, str(r.n), f"{r.max_beta:.2f}", f"{r.max_proxy_change:.2f}", f"±{r.bound:.2f}", f"{r.avg_att:.2f}")
        for r in rows
    ]
    widths = [max(len(x) for x in col) for col in zip(head, *body)]
    line = "+" + "+".join("-" * (w + 2) for w in widths) + "+"
    fmt_row = lambda cells: "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"  # noqa: E731
    return "\n".join([line, fmt_row(head), line, *(fmt_row(b) for b in body), line]) + "\n"


def write_bundle(bundle: ReportBundle, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    panel, att, s = bundle.panel, bundle.att, bundle.sensitivity
    t0 = panel.row_of(bundle.spec.t0)
    with (out / SERIES_FILE).open("w", newline="", encoding="utf-8") as fh:
        fh.write("time,period,observed,counterfactual,att,running_att\n")
        for k, t in enumerate(panel.time_index):
            if k < t0:
                fh.write(f"{t},pre,{fmt(att.observed[k])},{fmt(att.counterfactual[k])},,\n")
            else:
                j = k - t0
                fh.write(
                    f"{t},post,{fmt(att.observed[k])},{fmt(att.counterfactual[k])},"
                    f"{fmt(att.att_per_period[j])},{fmt(att.running_att[j])}\n"
                )
    with (out / DONORS_FILE).open("w", newline="", encoding="utf-8") as fh:
        fh.write("donor,beta,raw_beta,pre_mean,post_mean,shift\n")
        for name, raw in zip(bundle.model.donor_names, bundle.model.raw_beta):
            fh.write(
                f"{name},{fmt(s.betas[name])},{fmt(raw)},{fmt(s.pre_means[name])},"
                f"{fmt(s.post_means[name])},{fmt(s.shifts[name])}\n"
            )
    payload = {
        "label": bundle.table_row.label,
        "treated_unit": panel.treated_unit,
        "intervention_time": bundle.spec.t0,
        "fit_method": bundle.model.method.variant.value,
        "zero_tolerance": bundle.model.method.zero_tolerance,
        "pre_rmse": bundle.model.pre_rmse,
        **s.to_dict(),
    }
    (out / REPORT_FILE).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    (out / TABLE_FILE).write_text(format_table([bundle.table_row]), encoding="utf-8")
    emit_plot_svg(out / PLOT_FILE, panel.time_index, att.observed, att.counterfactual, bundle.spec.t0, s.bound,
                  title=bundle.table_row.label)
    return out


def _read_csv(path: Path) -> list[dict[str, str]]:
    if not path.exists():
        raise DataError(f"bundle file missing: {path}", code="missing_file")
    with path.open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def table_row_from_bundle(bundle_dir: str | Path) -> TableRow:
    """Recompute the table row from the bundle's CSV files alone."""
    d = Path(bundle_dir)
    donors = _read_csv(d / DONORS_FILE)
    series = _read_csv(d / SERIES_FILE)
    active = [r for r in donors if float(r["beta"]) != 0]
    n = len(active)
    max_beta = max((abs(float(r["beta"])) for r in active), default=0.0)
    max_shift = max((float(r["shift"]) for r in active), default=0.0)
    att = np.array([float(r["att"]) for r in series if r["period"] == "post"])
    if att.size == 0:
        raise DataError(f"{d / SERIES_FILE}: no post-period rows", code="empty_slice")
    avg = float((np.cumsum(att) / np.arange(1, att.size + 1))[-1])
    label = d.name
    if (d / REPORT_FILE).exists():
        label = json.loads((d / REPORT_FILE).read_text(encoding="utf-8")).get("label", label)
    return TableRow(label, n, max_beta, max_shift, n * max_beta * max_shift, avg)
