"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with `pytest tests/test_acceptance.py -v -s`).

All tolerances are fixed here, not tuned elsewhere:
  1. fringe spacing 2.63 +- 0.03 fs (runtime < 1 s)
  2. maximum visibility 0.86 +- 0.03 at the experimental parameters (< 1 s)
  3. sigma/1000 drives the maximum visibility to 1.0 within 1e-3
  4. compensating delays: tau_B within +-30 fs of 410 fs, tau_A within
     +-15 fs of 31 fs, numeric optimizer within 0.5 fs of the closed form
  5. quartz anchors: 1 mm -> 31 +- 3 fs and 440 fs -> 14.2 +- 0.7 mm
  6. pair arrival-time flatness: constant per-class delays hold the worst
     mismatch over 256 azimuths below 5 fs, also at doubled thickness (< 5 s)
  7. orthogonal-analyzer scan visibility below 1e-6
  8. polarization visibility equals the space-time maximum within 0.01 at
     pi/4, and is exactly 1 with the fixed analyzer at 0
  9. property suite: analytic vs finite-difference group index (< 1e-6),
     monotone angle-dependent index, thickness linearity, overlap-window
     boundary convention, scale-free visibility, byte-identical CLI output
"""

import math
import time

import numpy as np

import spdc_cascade as sc
from spdc_cascade.analysis import ScanSeries
from spdc_cascade.cli import main as cli_main

QUARTER = math.pi / 4
PSI = math.radians(43.65)


def report(criterion, passed, detail):
    marker = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE {criterion}: {marker} - {detail}")
    assert passed, detail


def reference_params():
    pump = sc.PumpSpec(395.0, 1.0)
    crystal = sc.CrystalSpec(sc.BBO, 1.07, PSI, +1)
    return sc.params_from_crystal(crystal, pump)


def test_criterion_1_fringe_period():
    start = time.perf_counter()
    params = reference_params()
    tau_a, tau_b = sc.optimal_delays(params.times)
    series = sc.delay_scan(
        params,
        sc.AnalyzerDelayConfig(QUARTER, QUARTER, tau_a, 0.0),
        tau_b - 50.0,
        tau_b + 50.0,
        0.25,
    )
    spacing = sc.measure_fringe_spacing(series)
    elapsed = time.perf_counter() - start
    report(
        "1 (fringe period)",
        abs(spacing - 2.63) <= 0.03 and elapsed < 1.0,
        f"spacing {spacing:.4f} fs (target 2.63 +- 0.03), runtime {elapsed:.2f} s",
    )


def test_criterion_2_maximum_visibility():
    start = time.perf_counter()
    visibility = sc.max_visibility(reference_params())
    elapsed = time.perf_counter() - start
    report(
        "2 (maximum visibility)",
        abs(visibility - 0.86) <= 0.03 and elapsed < 1.0,
        f"visibility {visibility:.4f} (target 0.86 +- 0.03), runtime {elapsed:.2f} s",
    )


def test_criterion_3_monochromatic_limit():
    params = reference_params()
    narrowed = params.with_sigma(params.sigma / 1000.0)
    visibility = sc.max_visibility(narrowed)
    report(
        "3 (monochromatic limit)",
        abs(visibility - 1.0) <= 1e-3,
        f"visibility {visibility:.6f} at sigma/1000 (target 1.0 +- 1e-3)",
    )


def test_criterion_4_optimal_delays():
    params = reference_params()
    tau_a, tau_b = sc.optimal_delays(params.times)
    numeric = sc.optimize_delays_numeric(
        params, ((tau_a - 50.0, tau_a + 50.0), (tau_b - 50.0, tau_b + 50.0))
    )
    ok = (
        abs(tau_b - 410.0) <= 30.0
        and abs(tau_a - 31.0) <= 15.0
        and abs(numeric.tau_a - tau_a) <= 0.5
        and abs(numeric.tau_b - tau_b) <= 0.5
    )
    report(
        "4 (optimal delays)",
        ok,
        f"closed form ({tau_a:.2f}, {tau_b:.2f}) fs vs targets (31 +- 15, 410 +- 30); "
        f"numeric offset ({abs(numeric.tau_a - tau_a):.3f}, {abs(numeric.tau_b - tau_b):.3f}) fs",
    )


def test_criterion_5_quartz_anchors():
    one_mm = sc.quartz_calibration(sc.QUARTZ, 790.0, 1.0)
    mm_440 = sc.delay_to_quartz_thickness(sc.QUARTZ, 790.0, 440.0)
    ok = abs(one_mm - 31.0) <= 3.0 and abs(mm_440 - 14.2) <= 0.7
    report(
        "5 (quartz anchors)",
        ok,
        f"1 mm -> {one_mm:.2f} fs (target 31 +- 3); 440 fs -> {mm_440:.2f} mm (target 14.2 +- 0.7)",
    )


def test_criterion_6_flatness():
    start = time.perf_counter()
    pump = sc.PumpSpec(395.0, 1.0)
    mismatches = {}
    for thickness in (1.07, 2.14):
        c1 = sc.CrystalSpec(sc.BBO, thickness, PSI, +1)
        c2 = sc.CrystalSpec(sc.BBO, thickness, PSI, -1)
        base = sc.emission_time_map(c1, c2, pump)  # 256 azimuth points
        delays = sc.map_flattening_delays(base)
        mismatches[thickness] = sc.pairing_mismatch(base.with_delays(delays))
    elapsed = time.perf_counter() - start
    ok = all(m < 5.0 for m in mismatches.values()) and elapsed < 5.0
    report(
        "6 (flatness)",
        ok,
        f"mismatch {mismatches[1.07]:.3f} fs at 1.07 mm, {mismatches[2.14]:.3f} fs at "
        f"2.14 mm (bound 5 fs), runtime {elapsed:.2f} s",
    )


def test_criterion_7_orthogonal_analyzer_null():
    params = reference_params()
    tau_a, tau_b = sc.optimal_delays(params.times)
    series = sc.delay_scan(
        params,
        sc.AnalyzerDelayConfig(0.0, math.pi / 2, tau_a, 0.0),
        tau_b - 50.0,
        tau_b + 50.0,
        0.25,
    )
    visibility = sc.extract_visibility(series)
    report(
        "7 (orthogonal-analyzer null)",
        visibility < 1e-6,
        f"visibility {visibility:.2e} (bound 1e-6)",
    )


def test_criterion_8_polarization_equality():
    params = reference_params()
    tau_a, tau_b = sc.fringe_locked_delays(params)
    quarter_scan = sc.polarization_scan(
        params, tau_a, tau_b, QUARTER, 0.0, 2 * math.pi, math.pi / 64
    )
    vis_quarter = sc.extract_visibility(quarter_scan)
    vis_max = sc.max_visibility(params)
    zero_scan = sc.polarization_scan(
        params, tau_a, tau_b, 0.0, 0.0, 2 * math.pi, math.pi / 64
    )
    vis_zero = sc.extract_visibility(zero_scan)
    ok = abs(vis_quarter - vis_max) <= 0.01 and abs(vis_zero - 1.0) <= 1e-12
    report(
        "8 (polarization/space-time equality)",
        ok,
        f"pi/4 scan {vis_quarter:.4f} vs max {vis_max:.4f} (within 0.01); "
        f"analyzer-at-0 scan {vis_zero:.15f} (exactly 1)",
    )


def test_criterion_9_property_suite(tmp_path, capsys):
    checks = []

    # analytic group index vs central finite differences (step 0.01 nm)
    worst = 0.0
    for model, lams in ((sc.BBO, (395.0, 532.0, 790.0)), (sc.QUARTZ, (500.0, 790.0, 1200.0))):
        for lam in lams:
            for theta in (None, QUARTER, math.pi / 2):
                if theta is None:
                    n = lambda x: sc.index_ordinary(model, x)
                else:
                    n = lambda x: sc.index_extraordinary(model, x, theta)
                fd = n(lam) - lam * (n(lam + 0.01) - n(lam - 0.01)) / 0.02
                worst = max(worst, abs(sc.group_index(model, lam, theta) - fd))
    checks.append(("group index vs finite differences", worst < 1e-6, f"worst {worst:.2e}"))

    # monotone angle dependence of the extraordinary index
    thetas = np.linspace(0.0, math.pi / 2, 200)
    values = [sc.index_extraordinary(sc.BBO, 790.0, t) for t in thetas]
    mono = all(a > b for a, b in zip(values, values[1:]))
    checks.append(("n_e(theta) monotone", mono, "strictly decreasing for BBO"))

    # propagation times scale linearly in thickness
    pump = sc.PumpSpec(395.0, 1.0)
    t1 = sc.propagation_times(sc.CrystalSpec(sc.BBO, 1.07, PSI), pump)
    t2 = sc.propagation_times(sc.CrystalSpec(sc.BBO, 2.14, PSI), pump)
    linear = all(
        abs(b - 2 * a) <= 1e-9 * abs(b) for a, b in zip(t1.as_tuple(), t2.as_tuple())
    )
    checks.append(("thickness linearity", linear, "doubling L doubles every time"))

    # overlap-window boundary convention: boundary points are outside
    params = reference_params()
    t = params.times
    lo = t.t_o - t.t_e2
    hi = 3 * t.t_o - 2 * t.t_e - t.t_e2
    rect_ok = (
        sc.rect_window(params, 0.0, lo) == 0.0
        and sc.rect_window(params, 0.0, hi) == 0.0
        and sc.rect_window(params, 0.0, 0.5 * (lo + hi)) == 1.0
    )
    checks.append(("overlap-window boundaries open", rect_ok, "edges map to 0, interior to 1"))

    # visibility is invariant under uniform rate scaling
    xs = np.linspace(0.0, 8 * math.pi, 500)
    rates = 1.2 + np.cos(xs)
    v1 = sc.extract_visibility(ScanSeries("delay_fs", xs, rates, {"fringe_period_fs": 2 * math.pi}))
    v2 = sc.extract_visibility(
        ScanSeries("delay_fs", xs, 123.0 * rates, {"fringe_period_fs": 2 * math.pi})
    )
    checks.append(("visibility scale invariance", abs(v1 - v2) < 1e-12, f"|dv| {abs(v1 - v2):.1e}"))

    # identical config + command give byte-identical output files
    config = tmp_path / "reference.ini"
    config.write_text(
        "[crystal]\nmaterial = bbo\nthickness_mm = 1.07\ncut_angle_deg = 43.65\n"
        "cascade = true\n\n[pump]\ncenter_nm = 395\nbandwidth_nm = 1.0\n"
    )
    outputs = []
    for tag in ("a", "b"):
        out = tmp_path / f"scan_{tag}.csv"
        assert cli_main(["scan", "--config", str(config), "--out", str(out)]) == 0
        outputs.append(out.read_bytes())
    capsys.readouterr()
    checks.append(("deterministic CLI output", outputs[0] == outputs[1], "scan reruns identical"))

    all_ok = all(ok for _, ok, _ in checks)
    detail = "; ".join(f"{name}: {'ok' if ok else 'FAILED ' + info}" for name, ok, info in checks)
    report("9 (property suite)", all_ok, detail)
