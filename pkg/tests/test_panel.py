import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from synthbound.errors import PanelError
from synthbound.panel import (
    InterventionSpec,
    Period,
    PanelData,
    period_means,
    split_pre_post,
    validate,
)

from conftest import make_panel


def three_unit_panel():
    t = np.arange(10, dtype=float)
    return make_panel(t, np.column_stack([t + 1, 2 * t]))


def test_valid_panel_has_no_diagnostics():
    assert validate(three_unit_panel()) == []


def test_treated_in_donor_set():
    p = three_unit_panel()
    bad = PanelData(p.time_index, p.unit_names, p.values, "T", ("T", "D0"))
    diags = validate(bad)
    assert [d.code for d in diags] == ["treated_in_donors"]
    assert str(diags[0]) == "treated unit in donor set"


def test_nan_in_donor_is_named():
    p = three_unit_panel()
    values = np.array(p.values)
    values[3, 2] = np.nan
    diags = validate(PanelData(p.time_index, p.unit_names, values, p.treated_unit, p.donor_units))
    assert len(diags) == 1
    assert diags[0].code == "missing_value"
    assert diags[0].unit == "D1" and diags[0].time == 4


@pytest.mark.parametrize(
    "times, names, code",
    [
        ([1, 2, 2, 4, 5, 6, 7, 8, 9, 10], None, "time_not_increasing"),
        (None, ["D0", "D0"], "duplicate_unit"),
    ],
)
def test_other_invariants(times, names, code):
    t = np.arange(10, dtype=float)
    p = make_panel(t, np.column_stack([t, t + 1]), times=times, names=names)
    assert code in {d.code for d in validate(p)}


def test_unknown_donor():
    p = three_unit_panel()
    bad = PanelData(p.time_index, p.unit_names, p.values, "T", ("D0", "Nope"))
    assert [d.code for d in validate(bad)] == ["unknown_donor"]


def test_panel_is_immutable():
    p = three_unit_panel()
    with pytest.raises(ValueError):
        p.values[0, 0] = 1.0


def test_split_fig4_convention():
    pre, post = split_pre_post(three_unit_panel(), InterventionSpec(6))
    assert pre.which is Period.PRE and post.which is Period.POST
    assert list(pre.rows) == [0, 1, 2, 3, 4]
    assert list(post.rows) == [5, 6, 7, 8, 9]


def test_split_requires_two_pre_periods():
    p = three_unit_panel()
    with pytest.raises(PanelError, match="fewer than 2 pre periods"):
        split_pre_post(p, InterventionSpec(1))
    with pytest.raises(PanelError, match="fewer than 2 pre periods"):
        split_pre_post(p, InterventionSpec(2))
    split_pre_post(p, InterventionSpec(3))


def test_split_unknown_t0():
    with pytest.raises(PanelError):
        split_pre_post(three_unit_panel(), InterventionSpec(99))


def test_split_california_years():
    years = list(range(1970, 2001))
    y = np.linspace(1, 2, len(years))
    p = make_panel(y, np.column_stack([y, y**2]), times=years)
    pre, post = split_pre_post(p, InterventionSpec(1989))
    assert [years[r] for r in pre.rows] == list(range(1970, 1989))
    assert [years[r] for r in post.rows] == list(range(1989, 2001))


@given(n=st.integers(3, 60), data=st.data())
def test_split_is_partition(n, data):
    k = data.draw(st.integers(2, n - 1))
    t = np.arange(n, dtype=float)
    p = make_panel(t, t[:, None] + 1)
    pre, post = split_pre_post(p, InterventionSpec(p.time_index[k]))
    assert len(pre) + len(post) == n
    assert pre.stop == post.start and pre.start == 0 and post.stop == n


def test_period_means_basic():
    p = make_panel([5.0, 5, 5, 5], np.array([[1.0, 2, 3, 9]]).T)
    pre, post = split_pre_post(p, InterventionSpec(4))
    assert period_means(p, pre, ["T"]) == {"T": 5.0}
    assert period_means(p, pre, ["D0"]) == {"D0": 2.0}
    with pytest.raises(PanelError):
        period_means(p, pre, ["nope"])


def test_period_means_empty_slice():
    from synthbound.panel import PeriodSlice

    p = three_unit_panel()
    with pytest.raises(PanelError):
        period_means(p, PeriodSlice(Period.PRE, 0, 0), ["D0"])


@settings(max_examples=50)
@given(st.permutations(list(range(8))))
def test_period_means_row_permutation_invariant(perm):
    base = np.array([3.0, -1.5, 2.25, 7.0, 0.5, 1e3, -2.0, 4.0])
    # Pre-slice covers rows 0..7; a trailing post row is required.
    vals = np.append(base[list(perm)], 0.0)
    p = make_panel(vals, vals[:, None])
    pre, _ = split_pre_post(p, InterventionSpec(9))
    assert period_means(p, pre, ["T"])["T"] == pytest.approx(base.mean(), rel=1e-14)


def test_period_means_sampling_distribution():
    hits = 0
    seeds = 1000
    for s in range(seeds):
        draws = np.random.default_rng(s).normal(0.5, 1.0, 101)
        p = make_panel(draws, draws[:, None])
        pre, _ = split_pre_post(p, InterventionSpec(101))
        hits += abs(period_means(p, pre, ["T"])["T"] - 0.5) < 0.3
    assert hits / seeds >= 0.99
