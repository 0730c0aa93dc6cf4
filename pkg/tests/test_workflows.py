import math

import numpy as np
import pytest

from endfire_de.em import ModelParams
from endfire_de.model import ArrayLayout, evaluate
from endfire_de.workflows import (
    DesignResult,
    SensitivitySpec,
    default_de_config,
    design_parasitic,
    optimize_active,
    optimize_parasitic,
    pattern_export,
    sensitivity,
    ula_baseline,
)

P = ModelParams()


@pytest.fixture(scope="module")
def active():
    return {N: optimize_active(N, P, seed=0) for N in (2, 3, 4, 5)}


@pytest.fixture(scope="module")
def parasitic():
    return {N: optimize_parasitic(N, P, seed=0) for N in (2, 3, 4, 5)}


@pytest.fixture(scope="module")
def ula():
    return {N: ula_baseline(N, P) for N in range(2, 8)}


def reference_design(ref, N):
    t = ref["parasitic_layouts"][str(N)]
    loads = np.array([np.nan if x is None else x for x in t["loads_ohm"]])
    L = ArrayLayout.from_wavelengths(t["positions_lambda"], P)
    rep = evaluate(L, P, "parasitic", feed=t["feed"], loads=loads)
    return DesignResult("parasitic", P, L, rep, rep.currents, feed=t["feed"], loads=loads)


def test_default_config_interpolates():
    lo, hi = default_de_config(2, "active"), default_de_config(7, "active")
    assert (lo.NP, lo.iterations) == (10, 20)
    assert (hi.NP, hi.iterations) == (105, 150)
    par = default_de_config(7, "parasitic")
    assert (par.NP, par.iterations) == (91, 100)
    assert lo.bounds == ((0.05, 0.5),)
    assert default_de_config(4, "active", NP=8).NP == 8
    with pytest.raises(ValueError):
        default_de_config(1, "active")


def test_active_two_and_three_elements(active):
    a2, a3 = active[2], active[3]
    assert a2.positions_lambda[1] == pytest.approx(0.27, abs=0.01)
    assert a2.realized_gain_db == pytest.approx(5.85, abs=0.05)
    assert a3.positions_lambda == pytest.approx([0, 0.41, 0.70], abs=0.01)


def test_active_five_element_size(active):
    assert active[5].layout.size / P.lam == pytest.approx(1.58, abs=0.02)


def test_active_currents_match_reference_amplitudes(active, ref):
    for N in (3, 4):
        amp = np.abs(active[N].normalized_currents)
        assert np.max(amp) == 1.0
        assert amp == pytest.approx(ref["active_layouts"][str(N)]["amplitude"], abs=0.03)


def test_parasitic_two_element(parasitic):
    d = parasitic[2]
    assert d.positions_lambda[1] == pytest.approx(0.21, abs=0.01)
    assert d.feed == 1
    assert d.loads[0] == pytest.approx(4.07, abs=0.1)
    assert d.realized_gain_db == pytest.approx(6.21, abs=0.05)


def test_parasitic_four_element_loads(parasitic):
    X = np.delete(parasitic[4].loads, parasitic[4].feed)
    assert X == pytest.approx([-5.21, -53.31, -48.11], abs=0.5)
    assert parasitic[4].realized_gain_db == pytest.approx(9.88, abs=0.05)


def test_recompute_self_consistency(active, parasitic, ula):
    for d in (*active.values(), *parasitic.values(), ula[4]):
        assert d.recompute().realized_gain_db == pytest.approx(d.realized_gain_db, abs=1e-9)


def test_monotone_in_n_and_architecture_order(active, parasitic, ula):
    for group in (active, parasitic):
        g = [group[N].realized_gain_db for N in sorted(group)]
        assert np.all(np.diff(g) > 0)
    for N in (2, 3, 4, 5):
        assert parasitic[N].realized_gain_db >= active[N].realized_gain_db >= ula[N].realized_gain_db
        assert parasitic[N].layout.size <= (N - 1) * 0.5 * P.lam
        assert active[N].layout.size <= (N - 1) * 0.5 * P.lam


def test_ula(ula, ref):
    for N, d in ula.items():
        assert d.realized_gain_db == pytest.approx(ref["realized_gain_db"]["ula"][str(N)], abs=0.05)
    assert ula[7].layout.size / P.lam == pytest.approx(3.0)
    with pytest.raises(ValueError):
        ula_baseline(0)


def test_design_parasitic_feed_choice():
    L = ArrayLayout.from_wavelengths([0, 0.36, 0.574], P)
    rep, feed, X = design_parasitic(L, P)
    for f in range(3):
        other, _, _ = design_parasitic(L, P, feed=f)
        if other.feasible:
            assert other.realized_gain <= rep.realized_gain
    assert feed == 1 and np.isnan(X[feed])


def test_design_parasitic_rejects_negative_resistance():
    rep, feed, X = design_parasitic(ArrayLayout.from_wavelengths([0, 0.05, 0.1], P), P)
    assert not rep.feasible and feed is None and X is None


def test_optimizer_dimension_check():
    with pytest.raises(ValueError):
        optimize_active(3, P, default_de_config(2, "active"))


def test_sensitivity_degenerate_sweep(ref):
    d = reference_design(ref, 5)
    rows = sensitivity(d, SensitivitySpec(scale=0.0, samples=5))
    for r in rows:
        assert r.gain_range_db[0] == pytest.approx(d.realized_gain_db, abs=1e-9)
        assert r.gain_range_db[1] == pytest.approx(d.realized_gain_db, abs=1e-9)


def test_sensitivity_sweep_values(ref):
    d = reference_design(ref, 5)
    rows = {r.parameter: r for r in sensitivity(d)}
    assert set(rows) == {"X1", "X3", "X4", "X5", "d1", "d2", "d3", "d4", "d5"}
    assert rows["X4"].values == pytest.approx((-62.65, -56.69), abs=0.01)
    assert rows["d2"].values == pytest.approx((0.3895, 0.4305), abs=1e-4)
    assert rows["d1"].values == pytest.approx((-0.0205, 0.0205), abs=1e-4)
    # translating the whole array changes nothing
    assert rows["d1"].gain_range_db[1] - rows["d1"].gain_range_db[0] < 1e-9
    assert all(len(r.samples_db) == 21 for r in rows.values())


def test_sensitivity_flags_infeasible_points():
    L = ArrayLayout.from_wavelengths([0, 0.21], P)
    rep, feed, X = design_parasitic(L, P)
    d = DesignResult("parasitic", P, L, rep, rep.currents, feed=feed, loads=X)
    # factors run from -4 to 6; a gap scaled to zero or below has no layout
    r = sensitivity(d, SensitivitySpec(scale=5.0, samples=41, targets=["d2"]))[0]
    factors = np.linspace(-4, 6, 41)
    assert r.infeasible == int(np.sum(factors <= 1e-12))
    assert np.array_equal(np.isnan(r.samples_db), factors <= 1e-12)
    assert np.all(np.isfinite(r.gain_range_db))


def test_sensitivity_validation(ref):
    d = reference_design(ref, 3)
    with pytest.raises(ValueError):
        SensitivitySpec(scale=-1.5)
    with pytest.raises(ValueError):
        sensitivity(d, SensitivitySpec(targets=["X2"]))  # the feed
    with pytest.raises(ValueError):
        sensitivity(d, SensitivitySpec(targets=["d9"]))
    with pytest.raises(ValueError):
        sensitivity(ula_baseline(3), SensitivitySpec())


def test_azimuth_peak_is_endfire(ref):
    for N in range(2, 8):
        s = pattern_export(reference_design(ref, N), "azimuth", 1.0)
        k = int(np.argmax(s.realized_gain_db))
        assert s.phi_deg[k] == 0.0 and s.theta_deg[k] == 90.0
    s = pattern_export(reference_design(ref, 2))
    assert np.max(s.realized_gain_db) == pytest.approx(6.21, abs=0.05)


def test_sphere_mean_gain_is_efficiency(ref):
    d = reference_design(ref, 3)
    s = pattern_export(d, "sphere", 1.0)
    th = np.unique(s.theta_deg)
    G = s.gain_linear.reshape(th.size, -1)
    t = np.deg2rad(th)
    # trapezoid in theta with sin weight, uniform in phi
    mean = np.trapezoid(G.mean(axis=1) * np.sin(t), t) / 2
    assert mean == pytest.approx(d.report.e_cd, rel=1e-3)


def test_pattern_validation(ref):
    d = reference_design(ref, 2)
    with pytest.raises(ValueError):
        pattern_export(d, resolution=0.01)
    with pytest.raises(ValueError):
        pattern_export(d, cut="elevation")
