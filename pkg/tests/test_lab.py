"""Verification-lab tests: scenario validity, construction, trials, reports."""

import json
import math

import numpy as np
import pytest

from specbounds.core import (
    SpectralPartition,
    eigen_decompose,
    HermitianMatrix,
    operator_norm,
    spectral_projection,
)
from specbounds.errors import ConfigurationError
from specbounds.lab import (
    Layout,
    PerturbationKind,
    ScenarioSpec,
    _attribute_sigma,
    _substream,
    build_perturbation,
    build_unperturbed,
    ground_state_identity_check,
    random_scenario,
    run_regime_suite,
    run_trial,
    strength_limit,
    verify_bounds,
)

GS = Layout.GROUND_STATE
FG = Layout.FINITE_GAP
IL = Layout.INTERLACED
SUB = Layout.SUBORDINATED
GEN = PerturbationKind.GENERIC
OFF = PerturbationKind.OFF_DIAGONAL


def _spec(layout=GS, sigma=(0.0,), comp=(1.0, 2.0), kind=GEN, strength=0.3,
          seed=7):
    return ScenarioSpec(layout=layout, sigma_levels=sigma,
                        complement_levels=comp, perturbation=kind,
                        strength=strength, seed=seed)


# -------------------------------------------------------------- scenario spec


def test_spec_basic_properties():
    s = _spec(sigma=(0.0,), comp=(1.5, 4.0))
    assert s.dim == 3
    assert s.d == 1.5
    assert s.gap_length is None
    fg = _spec(layout=FG, sigma=(0.0, 0.5), comp=(-2.0, 3.0, 4.0))
    assert fg.d == 2.0
    assert fg.gap_length == 5.0


@pytest.mark.parametrize("bad", [
    dict(sigma=()),                                    # empty side
    dict(sigma=(0.0, 1.0)),                            # GS needs one level
    dict(sigma=(0.0,), comp=(0.0, 1.0)),               # duplicate level
    dict(sigma=(2.0,), comp=(1.0, 3.0)),               # GS not below all
    dict(sigma=(0.0,), strength=-0.1),                 # negative strength
    dict(sigma=(math.nan,),),                          # non-finite level
])
def test_spec_rejects_invalid(bad):
    with pytest.raises(ConfigurationError):
        _spec(**bad)


def test_spec_layout_patterns():
    # subordinated: sigma strictly below the complement
    _spec(layout=SUB, sigma=(0.0, 1.0), comp=(3.0, 4.0))
    with pytest.raises(ConfigurationError):
        _spec(layout=SUB, sigma=(0.0, 3.5), comp=(3.0, 4.0))
    # finite gap: complement strictly on both sides, none inside the hull
    _spec(layout=FG, sigma=(0.0, 1.0), comp=(-1.0, 2.0))
    with pytest.raises(ConfigurationError):
        _spec(layout=FG, sigma=(0.0, 1.0), comp=(2.0, 3.0))
    with pytest.raises(ConfigurationError):
        _spec(layout=FG, sigma=(0.0, 1.0), comp=(-1.0, 0.5, 2.0))
    # interlaced: sigma occupies the even merged positions
    _spec(layout=IL, sigma=(0.0, 2.0), comp=(1.0,))
    _spec(layout=IL, sigma=(0.0, 2.0), comp=(1.0, 3.0, 4.0))
    with pytest.raises(ConfigurationError):
        _spec(layout=IL, sigma=(0.0, 1.0), comp=(2.0,))
    with pytest.raises(ConfigurationError):
        _spec(layout=IL, sigma=(0.0,), comp=(1.0,))


def test_strength_limits():
    assert strength_limit(GS, GEN) == 0.5
    assert strength_limit(IL, GEN) == 0.5
    assert strength_limit(FG, OFF) == pytest.approx(math.sqrt(2.0), abs=0.0)
    assert strength_limit(IL, OFF) == pytest.approx(math.sqrt(3.0) / 2, abs=0.0)
    # tan-2-theta needs no smallness assumption, so these are unbounded.
    assert strength_limit(GS, OFF) == math.inf
    assert strength_limit(SUB, OFF) == math.inf


def test_random_scenarios_satisfy_their_layouts():
    # Construction goes through ScenarioSpec, which enforces the layout
    # patterns; here we additionally pin dims and strength ranges.
    for layout in Layout:
        for kind in PerturbationKind:
            for i in range(40):
                rng = _substream(1000 + i, 0)
                s = random_scenario(layout, kind, rng)
                assert s.layout is layout and s.perturbation is kind
                assert 2 <= s.dim <= 40
                if layout in (FG, IL):
                    assert s.dim >= 3
                limit = strength_limit(layout, kind)
                if math.isfinite(limit):
                    assert 0.0 < s.strength < limit
                else:
                    assert 0.0 < s.strength <= 10.0


def test_random_scenario_dim_override():
    rng = _substream(3, 0)
    s = random_scenario(GS, GEN, rng, dim=2)
    assert s.dim == 2
    with pytest.raises(ConfigurationError):
        random_scenario(FG, GEN, _substream(3, 0), dim=2)


# -------------------------------------------------------------- construction


def test_build_unperturbed_spectrum_matches_levels():
    s = _spec(layout=FG, sigma=(0.0, 0.5), comp=(-2.0, 3.0, 4.0), seed=11)
    a, partition = build_unperturbed(s)
    ed = eigen_decompose(a)
    expected = np.sort(np.array([0.0, 0.5, -2.0, 3.0, 4.0]))
    assert np.max(np.abs(ed.eigenvalues - expected)) <= 1e-10
    assert partition.sigma_indices == (1, 2)
    assert partition.d == 2.0


def test_build_unperturbed_deterministic():
    s = _spec(seed=42)
    a1, _ = build_unperturbed(s)
    a2, _ = build_unperturbed(s)
    assert np.array_equal(a1.entries, a2.entries)


def test_perturbation_norm_and_kind():
    rng = _substream(5, 0)
    for i in range(100):
        layout = (GS, SUB, FG, IL)[i % 4]
        kind = (GEN, OFF)[i % 2]
        s = random_scenario(layout, kind, rng, dim=int(rng.integers(
            2 if layout in (GS, SUB) else 3, 41)))
        a, partition = build_unperturbed(s)
        p = spectral_projection(eigen_decompose(a), partition.sigma_indices)
        v = build_perturbation(s, p)
        nv = operator_norm(v)
        target = s.strength * s.d
        assert nv == pytest.approx(target, rel=1e-12)
        if kind is OFF:
            diff = p.matrix - p.complement().matrix
            anti = v.entries @ diff + diff @ v.entries
            assert float(np.linalg.norm(anti, 2)) <= 1e-12 * nv


def test_zero_strength_gives_zero_matrix():
    s = _spec(strength=0.0)
    a, partition = build_unperturbed(s)
    p = spectral_projection(eigen_decompose(a), partition.sigma_indices)
    v = build_perturbation(s, p)
    assert operator_norm(v) == 0.0


def test_perturbation_dim_mismatch():
    s = _spec()
    other = spectral_projection(
        eigen_decompose(HermitianMatrix(np.diag([0.0, 1.0]))), (0,)
    )
    with pytest.raises(ConfigurationError):
        build_perturbation(s, other)


# -------------------------------------------------------------------- trials


def test_run_trial_record_coherence():
    rec = run_trial(_spec(layout=IL, sigma=(0.0, 2.0), comp=(1.0, 3.0, 4.0),
                          kind=OFF, strength=0.4, seed=9), index=3)
    assert rec.index == 3
    assert rec.layout == "interlaced" and rec.kind == "off-diagonal"
    assert rec.x == pytest.approx(0.4, rel=1e-12)
    assert set(rec.margins) == set(rec.bounds)
    for name, m in rec.margins.items():
        assert m == rec.bounds[name] - rec.theta
    assert rec.min_margin == min(rec.margins.values())
    assert rec.ok


def test_trial_bounds_follow_regime():
    gs_gen = run_trial(_spec(layout=GS, kind=GEN, strength=0.3, seed=1))
    assert set(gs_gen.bounds) == {"dk_sin2", "gen_sin2", "gen_opt"}
    il_gen = run_trial(_spec(layout=IL, sigma=(0.0, 2.0), comp=(1.0, 3.0, 4.0),
                             kind=GEN, strength=0.3, seed=1))
    assert set(il_gen.bounds) == {"gen_sin2", "gen_opt"}
    sub_off_strong = run_trial(_spec(layout=SUB, sigma=(0.0,), comp=(1.0, 2.0),
                                     kind=OFF, strength=4.0, seed=1))
    assert set(sub_off_strong.bounds) == {"dk_tan2"}
    assert sub_off_strong.checks["gap_empty"]
    fg_off = run_trial(_spec(layout=FG, sigma=(0.0, 0.5),
                             comp=(-2.0, 3.0, 4.0), kind=OFF, strength=1.2,
                             seed=1))
    assert set(fg_off.bounds) == {"tan"}
    fg_off_mild = run_trial(_spec(layout=FG, sigma=(0.0, 0.5),
                                  comp=(-2.0, 3.0, 4.0), kind=OFF,
                                  strength=0.5, seed=1))
    assert set(fg_off_mild.bounds) == {"tan", "kmm", "ms", "off_opt"}


def test_ground_state_trapping_check_present():
    rec = run_trial(_spec(layout=GS, kind=OFF, strength=0.7, seed=2))
    assert rec.checks["trapping"]
    assert rec.checks["gap_empty"]
    assert rec.ok


def test_attribution_cross_check_raises_on_mismatch():
    # Feed an eigensystem whose spectrum moved far beyond the claimed radius.
    partition = SpectralPartition.from_eigenvalues(np.array([0.0, 10.0]), (0,))
    ed_h = eigen_decompose(HermitianMatrix(np.diag([5.0, 10.0])))
    with pytest.raises(ConfigurationError, match="attribution"):
        _attribute_sigma(ed_h, partition, GEN, norm_v=1.0, eps=0.0, tol=1e-12)


# ------------------------------------------------------------------- suites


def test_verify_bounds_deterministic_reports():
    spec = _spec(layout=FG, sigma=(0.0, 1.0), comp=(-2.0, 3.5, 4.0), kind=OFF,
                 strength=1.3, seed=123)
    r1 = verify_bounds(spec, 8)
    r2 = verify_bounds(spec, 8)
    assert r1.to_json() == r2.to_json()
    assert r1.to_csv() == r2.to_csv()
    assert r1.failure_count == 0
    with pytest.raises(ConfigurationError):
        verify_bounds(spec, 0)


def test_report_json_schema():
    rep = run_regime_suite(IL, OFF, 5, seed=7)
    doc = json.loads(rep.to_json())
    assert doc["schema_version"] == 1
    assert doc["suite"]["layout"] == "interlaced"
    assert doc["suite"]["kind"] == "off-diagonal"
    assert doc["suite"]["trials"] == 5
    assert len(doc["records"]) == 5
    rec = doc["records"][0]
    for key in ("index", "seed", "dim", "d", "norm_v", "x", "theta", "bounds",
                "margins", "min_margin", "checks", "ok"):
        assert key in rec
    assert doc["aggregates"]["failure_count"] == 0


def test_report_csv_round_trip_floats():
    rep = run_regime_suite(GS, GEN, 4, seed=3)
    lines = rep.to_csv().splitlines()
    header = lines[0].split(",")
    assert header[:5] == ["index", "layout", "kind", "dim", "seed"]
    assert len(lines) == 5
    row = dict(zip(header, lines[1].split(",")))
    # 17 significant digits reproduce the binary double exactly.
    assert float(row["theta"]) == rep.records[0].theta
    assert float(row["bound_dk_sin2"]) == rep.records[0].bounds["dk_sin2"]


def test_regime_suite_stress_strength_pinning():
    rep = run_regime_suite(SUB, OFF, 9, seed=5, stress_strength=10.0)
    xs = [rec.x for rec in rep.records]
    assert xs[0] == pytest.approx(10.0, rel=1e-12)
    assert xs[4] == pytest.approx(10.0, rel=1e-12)
    assert xs[8] == pytest.approx(10.0, rel=1e-12)
    assert rep.failure_count == 0


def test_fixed_strength_mini_suites():
    # Near-critical generic ground state: the sin-2-theta bound still holds.
    gs = run_regime_suite(GS, GEN, 50, seed=11, strength=0.49)
    assert gs.failure_count == 0
    cap = 0.5 * math.asin(0.98)
    assert all(rec.theta <= cap + 1e-9 for rec in gs.records)
    # Finite-gap off-diagonal beyond sqrt(3)/2: only arctan applies.
    fg = run_regime_suite(FG, OFF, 50, seed=12, strength=1.3)
    assert fg.failure_count == 0
    assert all(set(rec.bounds) == {"tan"} for rec in fg.records)
    assert all(rec.theta <= math.atan(1.3) + 1e-9 for rec in fg.records)


def test_ground_state_identity_small():
    worst = ground_state_identity_check(100, 20, seed=5)
    assert worst <= 1e-10
