"""Command-line interface: ``synthbound {fit,simulate,report,convert}``.

Exit codes: 0 success, 2 config error, 3 data error, 4 numerical error.
Failures print a single ``error: <code>: <message>`` line on stderr.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, replace
from pathlib import Path

from .errors import ConfigError, SynthBoundError
from .estimator import compute_att, fit_weights, predict_counterfactual
from .io import (
    AnalysisConfig,
    SCENARIOS,
    fmt,
    load_sim_config,
    long_to_wide,
    write_sim_dataset,
    write_wide_csv,
)
from .plot import emit_plot_svg
from .report import format_table, run_analysis, table_row_from_bundle, write_bundle
from .scm_sim import SimConfig, ValidityStats, derive_seed, generate, run_validity_experiment
from .sensitivity import analyze

DEFAULT_REPS = 100


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="synthbound",
        description="Linear synthetic control with an observable bias bound under latent distribution shift.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit a synthetic control on a CSV panel and emit a report bundle")
    f.add_argument("--config", required=True, help="analysis config file (key = value lines)")
    f.add_argument("--out", help="output directory (overrides output_dir in the config)")

    s = sub.add_parser("simulate", help="Monte Carlo validity check of the bound on simulated data")
    s.add_argument("--config", help="simulation config file (SimConfig fields, scenario, replications)")
    s.add_argument("--scenario", choices=sorted(SCENARIOS), help="base scenario (default a)")
    s.add_argument("--seed", type=_u64, help="unsigned 64-bit seed")
    s.add_argument("--reps", type=_positive, help=f"number of replications (default {DEFAULT_REPS})")
    s.add_argument("--out", default="out/simulate", help="output directory")

    r = sub.add_parser("report", help="print the summary table recomputed from bundle CSVs")
    r.add_argument("bundles", nargs="+", help="bundle directories written by `fit`")
    r.add_argument("--out", help="also write the table to this file")

    c = sub.add_parser("convert", help="pivot a long (unit, time, value) CSV into the wide panel format")
    c.add_argument("--long", required=True, dest="long_path", help="input long-format CSV")
    c.add_argument("--unit-col", required=True)
    c.add_argument("--time-col", required=True)
    c.add_argument("--value-col", required=True)
    c.add_argument("--units", help="comma-separated units to keep, in output column order")
    c.add_argument("--out", required=True, help="output wide CSV path")
    return p


def _cmd_fit(args) -> int:
    config = AnalysisConfig.from_file(args.config)
    out = Path(args.out) if args.out else Path(config.output_dir)
    bundle = run_analysis(config)
    write_bundle(bundle, out)
    sys.stdout.write(format_table([bundle.table_row]))
    sys.stdout.write(bundle.sensitivity.explanation + "\n")
    return 0


def _write_stats(stats: ValidityStats, out: Path) -> None:
    with (out / "replications.csv").open("w", newline="", encoding="utf-8") as fh:
        fh.write("replication,seed,beta,bound,realized_bias,true_bias,proxies_bias,avg_att,covered,covered_true_bias\n")
        for r in stats.records:
            o = r.oracle
            fh.write(
                f"{r.index},{r.seed},{fmt(o.beta)},{fmt(o.realized_bound)},{fmt(o.realized_bias)},"
                f"{fmt(o.true_bias)},{fmt(o.proxies_bias)},{fmt(o.avg_att)},{int(r.covered)},{int(r.covered_true_bias)}\n"
            )
    rows = {f"config.{k}": v for k, v in asdict(stats.config).items()}
    rows.update({f"condition.{k}": v for k, v in asdict(stats.conditions).items()})
    for key in ("replications", "coverage", "coverage_true_bias", "mean_bound", "mean_realized_bias",
                "mean_abs_realized_bias", "mean_true_bias", "mean_proxies_bias", "mean_beta", "mean_avg_att",
                "sd_avg_att", "att_half_width_99"):
        rows[key] = getattr(stats, key)
    with (out / "stats.csv").open("w", newline="", encoding="utf-8") as fh:
        fh.write("key,value\n")
        for k, v in rows.items():
            text = fmt(v) if isinstance(v, float) else str(v)
            fh.write(f"{k},{text}\n")


def _cmd_simulate(args) -> int:
    if args.config:
        config, reps = load_sim_config(args.config)
        if args.scenario:
            raise ConfigError("--scenario cannot be combined with --config; set `scenario` in the file")
    else:
        config, reps = SCENARIOS[args.scenario or "a"](), None
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    reps = args.reps or reps or DEFAULT_REPS
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    stats = run_validity_experiment(config, reps)
    _write_stats(stats, out)

    first = generate(replace(config, seed=derive_seed(config.seed, 0)))
    write_sim_dataset(first, out / "dataset.csv")
    model = fit_weights(first.panel, first.spec)
    cf = predict_counterfactual(model, first.panel)
    att = compute_att(first.panel.observed, cf, first.spec, first.panel.time_index)
    rep = analyze(first.panel, first.spec, model, att)
    write_wide_csv(out / "dataset.fit.csv", first.panel.time_index,
                   {"observed": first.panel.observed, "counterfactual": cf, "untreated": first.y_untreated})
    emit_plot_svg(out / "plot.svg", first.panel.time_index, first.panel.observed, cf, first.spec.t0, rep.bound,
                  title="Simulated replication 0")

    c = stats.conditions
    sys.stdout.write(
        f"replications          {stats.replications}\n"
        f"coverage (|bias|)     {stats.coverage:.3f}\n"
        f"coverage (true bias)  {stats.coverage_true_bias:.3f}\n"
        f"mean bound            {stats.mean_bound:.4f}\n"
        f"mean realized bias    {stats.mean_realized_bias:.4f}\n"
        f"mean true bias        {stats.mean_true_bias:.4f}\n"
        f"mean beta             {stats.mean_beta:.4f}\n"
        f"mean avg ATT          {stats.mean_avg_att:.4f} (99% half-width {stats.att_half_width_99:.4f})\n"
        f"a/c > b/d             {c.observed_weight:.4g} > {c.hidden_weight:.4g}: {c.weights_ok}\n"
        f"|dE X| > |dE Z|       {c.observed_mean_shift:.4g} > {c.hidden_mean_shift:.4g}: {c.shifts_ok}\n"
    )
    return 0


def _cmd_report(args) -> int:
    text = format_table([table_row_from_bundle(b) for b in args.bundles])
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    return 0


def _cmd_convert(args) -> int:
    units = [u.strip() for u in args.units.split(",")] if args.units else None
    times, names, values = long_to_wide(
        args.long_path, unit_col=args.unit_col, time_col=args.time_col, value_col=args.value_col, units=units
    )
    write_wide_csv(args.out, times, {n: values[:, j] for j, n in enumerate(names)})
    sys.stdout.write(f"wrote {len(times)} rows x {len(names)} units to {args.out}\n")
    return 0


COMMANDS = {"fit": _cmd_fit, "simulate": _cmd_simulate, "report": _cmd_report, "convert": _cmd_convert}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except SynthBoundError as exc:
        msg = " ".join(str(exc).split())
        sys.stderr.write(f"error: {exc.code}: {msg}\n")
        return exc.exit_status


if __name__ == "__main__":
    raise SystemExit(main())
