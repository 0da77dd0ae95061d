"""Wide-CSV panels, ``key = value`` config files and bundled dataset snapshots."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DataError
from .estimator import FitMethod, FitVariant
from .panel import PanelData, ensure_valid
from .scm_sim import SimConfig, SimDataset

BUNDLED_PREFIX = "bundled:"
BUNDLED = ("california", "germany")
MISSING = ("", "NA")


def fmt(x: float) -> str:
    """Full-precision, platform-stable float text."""
    return repr(float(x))


def _parse_label(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        return text


def _parse_labels(texts: Sequence[str]) -> tuple:
    parsed = [_parse_label(t) for t in texts]
    if all(isinstance(p, int) for p in parsed):
        return tuple(parsed)
    return tuple(t.strip() for t in texts)


def coerce_time(label, time_index: Sequence):
    """Convert a config-file time label to the type used by ``time_index``."""
    if time_index and isinstance(time_index[0], int) and isinstance(label, str):
        try:
            return int(label)
        except ValueError:
            return label
    return label


def resolve_data_path(path: str | Path, base: Path | None = None) -> Path:
    text = str(path)
    if text.startswith(BUNDLED_PREFIX):
        name = text[len(BUNDLED_PREFIX) :]
        if name not in BUNDLED:
            raise ConfigError(f"unknown bundled dataset {name!r}; available: {', '.join(BUNDLED)}")
        target = Path(str(resources.files("synthbound") / "datasets" / f"{name}.csv"))
        if not target.exists():
            raise DataError(
                f"bundled snapshot {name!r} is not present at {target}; see datasets/README.md "
                "for how to add it with `synthbound convert`",
                code="missing_snapshot",
            )
        return target
    p = Path(text)
    if not p.is_absolute() and base is not None:
        p = base / p
    return p


def read_wide_csv(path: str | Path) -> tuple[tuple, tuple[str, ...], np.ndarray]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}", code="missing_file")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file", code="empty_file")
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "time":
        raise DataError(f"{path}: first header must be 'time', got {header[:1]}", code="bad_header")
    units = header[1:]
    dupes = sorted({u for u in units if units.count(u) > 1})
    if dupes:
        raise DataError(f"{path}: duplicate unit header(s): {', '.join(dupes)}", code="duplicate_unit")
    body = [r for r in rows[1:] if r and any(c.strip() for c in r)]
    values = np.empty((len(body), len(units)))
    for i, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise DataError(f"{path}: row {i} has {len(row)} cells, expected {len(header)}", code="ragged_row")
        for j, cell in enumerate(row[1:]):
            if cell.strip() in MISSING:
                values[i - 2, j] = math.nan
                continue
            try:
                values[i - 2, j] = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: malformed numeric cell {cell!r} at row {i}, column {units[j]!r}",
                    code="malformed_cell",
                ) from None
    times = _parse_labels([r[0] for r in body])
    for a, b in zip(times, times[1:]):
        if not a < b:
            raise DataError(f"{path}: time column not strictly increasing at {a!r} -> {b!r}", code="unsorted_time")
    return times, tuple(units), values


def load_panel_csv(
    path: str | Path,
    config: "AnalysisConfig | None" = None,
    *,
    treated_unit: str | None = None,
    donor_units: Sequence[str] | None = None,
) -> PanelData:
    """Read a wide CSV (``time`` first, one column per unit) into a validated panel."""
    times, units, values = read_wide_csv(path)
    if config is not None:
        treated_unit = treated_unit or config.treated_unit
        donor_units = donor_units or config.donor_units
    if treated_unit is None:
        treated_unit = units[0]
    if donor_units is None:
        donor_units = [u for u in units if u != treated_unit]
    missing = [u for u in (treated_unit, *donor_units) if u not in units]
    if missing:
        raise ConfigError(f"{path}: columns not found: {', '.join(missing)}", code="unknown_column")
    panel = PanelData(times, units, values, treated_unit, tuple(donor_units))
    ensure_valid(panel)
    return panel


def write_wide_csv(path: str | Path, times: Sequence, columns: Mapping[str, Iterable[float]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    cols = [list(columns[n]) for n in names]
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(["time", *names]) + "\n")
        for k, t in enumerate(times):
            fh.write(",".join([str(t), *(fmt(c[k]) for c in cols)]) + "\n")


def write_panel_csv(panel: PanelData, path: str | Path) -> None:
    write_wide_csv(path, panel.time_index, {u: panel.column(u) for u in panel.unit_names})


def latents_path(path: str | Path) -> Path:
    p = Path(path)
    return p.with_name(p.name[: -len(p.suffix)] + ".latents.csv" if p.suffix else p.name + ".latents.csv")


def write_sim_dataset(dataset: SimDataset, path: str | Path) -> tuple[Path, Path]:
    """Observed panel to ``path``; latents and untreated outcome to the ``.latents.csv`` sidecar."""
    write_panel_csv(dataset.panel, path)
    side = latents_path(path)
    z = dataset.z_series
    zcols = {"Z": z[:, 0]} if z.shape[1] == 1 else {f"Z{k + 1}": z[:, k] for k in range(z.shape[1])}
    write_wide_csv(
        side,
        dataset.panel.time_index,
        {"u": dataset.u_series, "w": dataset.w_series, "I": dataset.i_series, "Y0": dataset.y_untreated, **zcols},
    )
    return Path(path), side


def long_to_wide(
    path: str | Path, *, unit_col: str, time_col: str, value_col: str, units: Sequence[str] | None = None,
    delimiter: str | None = None,
) -> tuple[tuple, tuple[str, ...], np.ndarray]:
    """Pivot a long (unit, time, value) file, e.g. a canonical public dataset, into wide form."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}", code="missing_file")
    with path.open(newline="", encoding="utf-8") as fh:
        sample = fh.read(4096)
        fh.seek(0)
        if delimiter is None:
            delimiter = ";" if sample.count(";") > sample.count(",") else ","
        reader = csv.DictReader(fh, delimiter=delimiter)
        table: dict[str, dict[str, float]] = {}
        for n, row in enumerate(reader, start=2):
            try:
                unit, t, v = row[unit_col].strip(), row[time_col].strip(), row[value_col].strip()
            except KeyError as exc:
                raise DataError(f"{path}: missing column {exc}", code="bad_header") from None
            if units is not None and unit not in units:
                continue
            try:
                table.setdefault(unit, {})[t] = float(v) if v not in MISSING else math.nan
            except ValueError:
                raise DataError(f"{path}: malformed value {v!r} at row {n}", code="malformed_cell") from None
    names = tuple(units) if units is not None else tuple(sorted(table))
    absent = [u for u in names if u not in table]
    if absent:
        raise DataError(f"{path}: units not found: {', '.join(absent)}", code="unknown_column")
    raw_times = sorted({t for u in names for t in table[u]})
    labels = _parse_labels(raw_times)
    order = sorted(range(len(raw_times)), key=lambda k: labels[k])
    raw_times = [raw_times[k] for k in order]
    times = tuple(labels[k] for k in order)
    values = np.array([[table[u].get(t, math.nan) for u in names] for t in raw_times])
    return times, names, values


# ---------------------------------------------------------------- config files


def parse_kv(text: str, source: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{n}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in out:
            raise ConfigError(f"{source}:{n}: duplicate key {key!r}")
        out[key] = value
    return out


def _read_kv(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"no such config file: {path}", code="missing_config")
    return parse_kv(path.read_text(encoding="utf-8"), str(path))


@dataclass(frozen=True)
class AnalysisConfig:
    data_path: str
    treated_unit: str
    donor_units: tuple[str, ...]
    intervention_time: object
    fit_method: FitMethod = FitMethod()
    output_dir: str = "out"
    label: str = ""
    base_dir: Path | None = None

    def __post_init__(self):
        if not self.donor_units:
            raise ConfigError("donor_units must not be empty")
        if self.treated_unit in self.donor_units:
            raise ConfigError("treated_unit must not be listed in donor_units")

    @classmethod
    def from_mapping(cls, kv: Mapping[str, str], base_dir: Path | None = None) -> "AnalysisConfig":
        required = ("data_path", "treated_unit", "donor_units", "intervention_time")
        missing = [k for k in required if k not in kv]
        if missing:
            raise ConfigError(f"missing config keys: {', '.join(missing)}")
        known = set(required) | {"fit_method", "zero_tolerance", "output_dir", "label"}
        unknown = sorted(set(kv) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            method = FitMethod(
                FitVariant(kv.get("fit_method", "ols")),
                float(kv.get("zero_tolerance", "1e-8")),
            )
        except ValueError as exc:
            raise ConfigError(f"bad fit settings: {exc}") from None
        donors = tuple(d.strip() for d in kv["donor_units"].split(",") if d.strip())
        return cls(
            data_path=kv["data_path"],
            treated_unit=kv["treated_unit"],
            donor_units=donors,
            intervention_time=_parse_label(kv["intervention_time"]),
            fit_method=method,
            output_dir=kv.get("output_dir", "out"),
            label=kv.get("label", ""),
            base_dir=base_dir,
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "AnalysisConfig":
        path = Path(path)
        return cls.from_mapping(_read_kv(path), base_dir=path.parent)

    def resolved_data_path(self) -> Path:
        return resolve_data_path(self.data_path, self.base_dir)


_SIM_FIELDS = {f.name: f for f in fields(SimConfig)}
SCENARIOS = {"a": SimConfig.scenario_a, "b": SimConfig.scenario_b, "null": SimConfig.null}


def sim_config_from_mapping(kv: Mapping[str, str]) -> tuple[SimConfig, int | None]:
    """Build a ``SimConfig`` (plus optional ``replications``) from string settings."""
    kv = dict(kv)
    scenario = kv.pop("scenario", "a")
    reps = kv.pop("replications", None)
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}")
    overrides: dict[str, object] = {}
    for key, text in kv.items():
        if key not in _SIM_FIELDS:
            raise ConfigError(f"unknown simulation key {key!r}")
        kind = _SIM_FIELDS[key].type
        try:
            if kind == "bool":
                if text.lower() not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(text)
                overrides[key] = text.lower() in ("true", "1", "yes")
            elif kind == "int":
                overrides[key] = int(text)
            else:
                overrides[key] = float(text)
        except ValueError:
            raise ConfigError(f"bad value for {key!r}: {text!r}") from None
    try:
        reps_n = int(reps) if reps is not None else None
    except ValueError:
        raise ConfigError(f"bad value for 'replications': {reps!r}") from None
    return SCENARIOS[scenario](**overrides), reps_n


def load_sim_config(path: str | Path) -> tuple[SimConfig, int | None]:
    return sim_config_from_mapping(_read_kv(path))
