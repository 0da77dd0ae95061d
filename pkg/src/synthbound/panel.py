"""Balanced single-treated-unit panels and pre/post splitting."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Hashable, Sequence

import numpy as np

from .errors import PanelError

TimeLabel = Hashable


@dataclass(frozen=True)
class Diagnostic:
    """One violated panel invariant."""

    code: str
    message: str
    unit: str | None = None
    time: TimeLabel | None = None

    def __str__(self) -> str:
        return self.message


@dataclass(frozen=True, eq=False)
class PanelData:
    """Outcome table with rows = time points and columns = units.

    The array is copied and frozen on construction; instances are safe to
    share between threads.
    """

    time_index: tuple
    unit_names: tuple[str, ...]
    values: np.ndarray
    treated_unit: str
    donor_units: tuple[str, ...]
    _col: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 2:
            raise PanelError(f"values must be 2-D, got shape {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "time_index", tuple(self.time_index))
        object.__setattr__(self, "unit_names", tuple(self.unit_names))
        object.__setattr__(self, "donor_units", tuple(self.donor_units))
        col: dict[str, int] = {}
        for j, name in enumerate(self.unit_names):
            col.setdefault(name, j)
        object.__setattr__(self, "_col", col)

    @property
    def n_periods(self) -> int:
        return len(self.time_index)

    def column(self, unit: str) -> np.ndarray:
        try:
            return self.values[:, self._col[unit]]
        except KeyError:
            raise PanelError(f"unknown unit {unit!r}", code="unknown_unit") from None

    def columns(self, units: Sequence[str]) -> np.ndarray:
        """Matrix with one column per requested unit, in request order."""
        return np.column_stack([self.column(u) for u in units]) if units else np.empty((self.n_periods, 0))

    @property
    def observed(self) -> np.ndarray:
        return self.column(self.treated_unit)

    @property
    def donors(self) -> np.ndarray:
        return self.columns(self.donor_units)

    def row_of(self, label: TimeLabel) -> int:
        try:
            return self.time_index.index(label)
        except ValueError:
            raise PanelError(f"time label {label!r} not in time index", code="unknown_time") from None


@dataclass(frozen=True)
class InterventionSpec:
    """``t0`` is the first treated period; it belongs to the post period."""

    t0: TimeLabel


class Period(Enum):
    PRE = "pre"
    POST = "post"


@dataclass(frozen=True)
class PeriodSlice:
    which: Period
    start: int
    stop: int

    @property
    def rows(self) -> range:
        return range(self.start, self.stop)

    def __len__(self) -> int:
        return self.stop - self.start


def validate(panel: PanelData) -> list[Diagnostic]:
    """Return every invariant violation found in ``panel`` (empty when valid)."""
    out: list[Diagnostic] = []
    names = panel.unit_names
    seen: set[str] = set()
    for name in names:
        if name in seen:
            out.append(Diagnostic("duplicate_unit", f"duplicate unit name {name!r}", unit=name))
        seen.add(name)
    if panel.values.shape != (len(panel.time_index), len(names)):
        out.append(
            Diagnostic(
                "shape_mismatch",
                f"values shape {panel.values.shape} does not match "
                f"{len(panel.time_index)} periods x {len(names)} units",
            )
        )
        return out
    if panel.treated_unit not in seen:
        out.append(Diagnostic("unknown_treated", f"treated unit {panel.treated_unit!r} is not a column", unit=panel.treated_unit))
    if panel.treated_unit in panel.donor_units:
        out.append(Diagnostic("treated_in_donors", "treated unit in donor set", unit=panel.treated_unit))
    donor_seen: set[str] = set()
    for d in panel.donor_units:
        if d not in seen:
            out.append(Diagnostic("unknown_donor", f"donor {d!r} is not a column", unit=d))
        if d in donor_seen:
            out.append(Diagnostic("duplicate_donor", f"donor {d!r} listed twice", unit=d))
        donor_seen.add(d)
    for a, b in zip(panel.time_index, panel.time_index[1:]):
        try:
            increasing = a < b
        except TypeError:
            increasing = False
        if not increasing:
            out.append(Diagnostic("time_not_increasing", f"time index not strictly increasing at {a!r} -> {b!r}", time=b))
    used = [panel.treated_unit, *panel.donor_units]
    for name in dict.fromkeys(used):
        if name not in seen:
            continue
        bad = np.flatnonzero(~np.isfinite(panel.values[:, panel._col[name]]))
        for r in bad:
            t = panel.time_index[r]
            out.append(Diagnostic("missing_value", f"missing value for unit {name!r} at time {t!r}", unit=name, time=t))
    return out


def ensure_valid(panel: PanelData) -> None:
    problems = validate(panel)
    if problems:
        raise PanelError("; ".join(str(p) for p in problems))


def split_pre_post(panel: PanelData, spec: InterventionSpec) -> tuple[PeriodSlice, PeriodSlice]:
    t0_row = panel.row_of(spec.t0)
    if t0_row < 2:
        raise PanelError(f"fewer than 2 pre periods before t0={spec.t0!r}", code="too_few_pre_periods")
    return PeriodSlice(Period.PRE, 0, t0_row), PeriodSlice(Period.POST, t0_row, panel.n_periods)


def period_means(panel: PanelData, slice: PeriodSlice, units: Sequence[str]) -> dict[str, float]:
    if len(slice) == 0:
        raise PanelError(f"empty {slice.which.value} slice", code="empty_slice")
    block = panel.columns(units)[slice.start : slice.stop]
    return {u: float(m) for u, m in zip(units, block.mean(axis=0))}
