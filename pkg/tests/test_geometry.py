import math

import numpy as np
import pytest
from scipy.optimize import brentq

import spdc_cascade as sc
from spdc_cascade.geometry import _cone_residual
from spdc_cascade.materials import SellmeierForm, DispersionModel

PSI = math.radians(43.65)


# --- phase-matched cones -----------------------------------------------------

def test_cones_enclose_axis_and_external_circles_intersect(crystal1, pump):
    pair = sc.phase_match_cones(crystal1, pump)
    assert pair.o_cone.encloses_pump_axis
    assert pair.e_cone.encloses_pump_axis
    # type-II signature: cone axes on opposite sides of the pump beam
    assert pair.o_cone.tilt * pair.e_cone.tilt < 0
    hits = sc.cone_intersections(pair.external_o, pair.external_e)
    assert len(hits) == 2
    for h in hits:
        h = h / np.linalg.norm(h)
        # crossing points sit in the x-z plane between the two cones
        assert abs(h[1]) < 1e-9
        assert h[2] > 0.99


def test_external_cones_are_refraction_widened(crystal1, pump):
    pair = sc.phase_match_cones(crystal1, pump)
    n = sc.index_ordinary(sc.BBO, pump.degenerate_nm)
    assert pair.external_o.half_angle == pytest.approx(n * pair.o_cone.half_angle, rel=5e-3)


def test_cone_direction_solves_phase_matching(crystal1, pump):
    rng = np.random.default_rng(7)
    for phi in rng.uniform(0, 2 * math.pi, 8):
        for pol in ("o", "e"):
            d = sc.cone_direction(crystal1, pump, pol, phi)
            assert np.linalg.norm(d) == pytest.approx(1.0, abs=1e-12)
            assert math.atan2(d[1], d[0]) % (2 * math.pi) == pytest.approx(
                phi % (2 * math.pi), abs=1e-9
            )
            u = math.acos(d[2])
            assert abs(_cone_residual(crystal1, pump, pol, u, phi)) < 1e-12


def test_cone_direction_matches_circular_fit_in_plane(crystal1, pump):
    pair = sc.phase_match_cones(crystal1, pump)
    for phi in (math.pi / 2, 3 * math.pi / 2):
        d = sc.cone_direction(crystal1, pump, "o", phi)
        assert math.acos(d[2]) == pytest.approx(pair.o_cone.polar_angle_at(phi), abs=1e-10)


def test_collinear_cut_angle_by_residual_scan_oracle(pump):
    # oracle: dense scan of the collinear phase-matching residual over psi
    lam_p, lam_dc = pump.center_nm, pump.degenerate_nm

    def residual(psi):
        return (
            2 * sc.index_extraordinary(sc.BBO, lam_p, psi)
            - sc.index_ordinary(sc.BBO, lam_dc)
            - sc.index_extraordinary(sc.BBO, lam_dc, psi)
        )

    grid = np.linspace(math.radians(35), math.radians(55), 4001)
    vals = np.array([residual(p) for p in grid])
    crossings = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    assert crossings.size == 1
    i = crossings[0]
    psi_scan = brentq(residual, grid[i], grid[i + 1], xtol=1e-12)

    psi_c = sc.collinear_cut_angle(sc.BBO, pump)
    assert psi_c == pytest.approx(psi_scan, abs=1e-9)

    # at the collinear cut angle the cones are tangent to the pump axis
    crystal = sc.CrystalSpec(sc.BBO, 1.07, psi_c)
    pair = sc.phase_match_cones(crystal, pump)
    for cone in (pair.o_cone, pair.e_cone):
        assert cone.half_angle - abs(cone.tilt) == pytest.approx(0.0, abs=1e-6)
        assert cone.half_angle > math.radians(1.0)


def test_below_threshold_not_phase_matchable(pump):
    crystal = sc.CrystalSpec(sc.BBO, 1.07, math.radians(40.0))
    with pytest.raises(sc.NotPhaseMatchableError) as err:
        sc.phase_match_cones(crystal, pump)
    assert err.value.residual is not None
    assert err.value.residual > 0


def test_detached_cone_misses_far_azimuth(pump):
    # between the solvability limit and the collinear angle the cones do not
    # enclose the pump axis: the tilt side solves, the opposite side does not
    crystal = sc.CrystalSpec(sc.BBO, 1.07, math.radians(42.5))
    d = sc.cone_direction(crystal, pump, "o", 3 * math.pi / 2)
    assert d[1] < 0
    with pytest.raises(sc.NotPhaseMatchableError):
        sc.cone_direction(crystal, pump, "o", math.pi / 2)


# --- path lengths ------------------------------------------------------------

def near_vacuum_crystal(thickness=2.0):
    form = SellmeierForm("power_series", (1.0000002,))
    model = DispersionModel("vacuumish", form, form, (100.0, 10000.0))
    return sc.CrystalSpec(model, thickness, PSI)


def test_path_length_axial_is_thickness(crystal1):
    assert sc.internal_path_length(crystal1, (0, 0, 1), 790.0) == crystal1.thickness_mm


def test_path_length_sixty_degrees_doubles(crystal1):
    # refraction-free check: in an index-1 medium a 60 deg ray sees 2L
    crystal = near_vacuum_crystal(thickness=2.0)
    d = (0.0, math.sin(math.radians(60)), math.cos(math.radians(60)))
    assert sc.internal_path_length(crystal, d, 790.0) == pytest.approx(4.0, rel=1e-4)
    # with a real index the internal angle shrinks and the path is shorter
    assert sc.internal_path_length(crystal1, d, 790.0) < 2 * crystal1.thickness_mm / math.cos(
        math.radians(60)
    )


def test_path_length_composes_with_phase_matching(crystal1, pump):
    pair = sc.phase_match_cones(crystal1, pump)
    phi = math.pi / 2
    d_ext = pair.external_o.direction_at(phi)
    u_int = pair.o_cone.polar_angle_at(phi)
    expected = crystal1.thickness_mm / math.cos(u_int)
    got = sc.internal_path_length(crystal1, d_ext, pump.degenerate_nm, polarization="o")
    assert got == pytest.approx(expected, rel=5e-6)


def test_path_length_e_polarization_self_consistent(crystal1, pump):
    pair = sc.phase_match_cones(crystal1, pump)
    phi = 3 * math.pi / 2
    d_ext = pair.external_e.direction_at(phi)
    u_int = pair.e_cone.polar_angle_at(phi)
    got = sc.internal_path_length(crystal1, d_ext, pump.degenerate_nm, polarization="e")
    assert got == pytest.approx(crystal1.thickness_mm / math.cos(u_int), rel=5e-6)


def test_path_length_never_below_thickness(crystal1):
    rng = np.random.default_rng(11)
    for _ in range(25):
        v = rng.normal(size=3)
        v[2] = abs(v[2]) + 0.2
        v /= np.linalg.norm(v)
        path = sc.internal_path_length(crystal1, v, 790.0)
        assert path >= crystal1.thickness_mm
    assert sc.internal_path_length(crystal1, (0, 0, 1), 790.0) == crystal1.thickness_mm


def test_path_length_rejects_grazing_and_backward():
    crystal = near_vacuum_crystal()
    with pytest.raises(sc.DegenerateGeometryError):
        sc.internal_path_length(crystal, (0.0, 1.0, 1e-9), 790.0)
    with pytest.raises(sc.DegenerateGeometryError):
        sc.internal_path_length(crystal, (0.0, 0.5, -0.8), 790.0)


# --- emission times ----------------------------------------------------------

def test_single_crystal_mode_reproduces_two_photon_state_times(crystal1, pump):
    absent = sc.CrystalSpec(sc.BBO, 0.0, PSI, axis_sign=-1)
    times = sc.propagation_times(crystal1, pump)
    on_axis = sc.class_emission_times(crystal1, absent, pump, (0, 0, 1))
    # H (ordinary) photon at (t_p + t_o)/2, V (extraordinary) at (t_p + t_e)/2
    assert on_axis["1o"] == pytest.approx(0.5 * (times.t_p + times.t_o), rel=1e-12)
    assert on_axis["1e"] == pytest.approx(0.5 * (times.t_p + times.t_e), rel=1e-12)
    # mean lead of the faster photon
    lead = on_axis["1o"] - on_axis["1e"]
    assert lead == pytest.approx(0.5 * abs(times.t_o - times.t_e), rel=1e-12)


def test_zero_thickness_cascade_gives_zero_times(pump):
    c1 = sc.CrystalSpec(sc.BBO, 0.0, PSI, +1)
    c2 = sc.CrystalSpec(sc.BBO, 0.0, PSI, -1)
    emission_map = sc.emission_time_map(c1, c2, pump, phi_grid=sc.geometry.default_phi_grid(64))
    for name in ("1e", "1o", "2e", "2o"):
        assert np.all(emission_map.times[name] == 0.0)


def test_emission_map_validation(crystal1, crystal2, pump):
    with pytest.raises(ValueError, match="opposite axis signs"):
        sc.emission_time_map(crystal1, crystal1, pump)
    with pytest.raises(ValueError, match="nonnegative"):
        sc.emission_time_map(crystal1, crystal2, pump, delays={"1e": -1.0})
    with pytest.raises(ValueError, match="unknown photon classes"):
        sc.emission_time_map(crystal1, crystal2, pump, delays={"3e": 1.0})
    mismatch_cut = sc.CrystalSpec(sc.BBO, 1.07, PSI + 0.01, -1)
    with pytest.raises(ValueError, match="mirror-symmetric"):
        sc.emission_time_map(crystal1, mismatch_cut, pump)


def test_reference_delays_flatten_pairings(base_map):
    delayed = base_map.with_delays({"1e": 410.0, "2e": 31.0})
    assert sc.pairing_mismatch(delayed) < 5.0


def test_flattening_delays_near_closed_form(base_map, crystal1, pump):
    auto = sc.map_flattening_delays(base_map)
    tau_a, tau_b = sc.optimal_delays(sc.propagation_times(crystal1, pump))
    # on-cone constant delays sit a few fs from the on-axis closed form
    assert auto["1e"] == pytest.approx(tau_b, abs=10.0)
    assert auto["2e"] == pytest.approx(tau_a, abs=10.0)
    assert sc.pairing_mismatch(base_map.with_delays(auto)) < 1.0


def test_flatness_survives_thickness_doubling(base_map, doubled_map):
    m1 = sc.pairing_mismatch(base_map.with_delays(sc.map_flattening_delays(base_map)))
    m2 = sc.pairing_mismatch(doubled_map.with_delays(sc.map_flattening_delays(doubled_map)))
    assert m1 < 5.0
    assert m2 < 5.0
    # times, and with them the residual mismatch, scale linearly in thickness
    assert m2 == pytest.approx(2 * m1, rel=1e-3)


def test_wrong_delay_shows_up_as_mismatch(base_map):
    delayed = base_map.with_delays({"2e": 31.0})  # 1e left uncompensated
    assert sc.pairing_mismatch(delayed) == pytest.approx(410.0, abs=15.0)


def test_pairing_mismatch_zero_for_identical_curves():
    phi = sc.geometry.default_phi_grid(64)
    curve = np.linspace(100.0, 120.0, phi.size)
    emission_map = sc.EmissionTimeMap(
        phi, {"1e": curve, "2o": curve.copy(), "1o": curve + 3, "2e": curve + 3}
    )
    assert sc.pairing_mismatch(emission_map) == 0.0


def test_pairing_mismatch_requires_dense_grid():
    phi = sc.geometry.default_phi_grid(32)
    curve = np.zeros(phi.size)
    emission_map = sc.EmissionTimeMap(
        phi, {"1e": curve, "2o": curve, "1o": curve, "2e": curve}
    )
    with pytest.raises(ValueError, match="64"):
        sc.pairing_mismatch(emission_map)


def test_map_mirror_symmetry_about_the_axis_plane(base_map):
    # reflection x -> -x maps phi -> pi - phi and leaves the device unchanged
    phi = base_map.phi_grid
    n = phi.size
    for name in ("1e", "1o", "2e", "2o"):
        t = base_map.times[name]
        # phi_k -> pi - phi_k lands back on the grid (uniform, endpoint-free)
        mirrored = np.array([(math.pi - p) % (2 * math.pi) for p in phi])
        idx = np.rint(mirrored / (2 * math.pi / n)).astype(int) % n
        assert np.allclose(t[idx], t, atol=1e-9)


def test_beam_selection_requires_distinct_directions():
    sc.BeamSelection(math.pi / 2, 3 * math.pi / 2)
    with pytest.raises(ValueError):
        sc.BeamSelection(0.3, 0.3 + 2 * math.pi)


def test_mismatch_at_beam_azimuths(base_map):
    delayed = base_map.with_delays(sc.map_flattening_delays(base_map))
    total = sc.pairing_mismatch(delayed)
    for phi in (math.pi / 2, 3 * math.pi / 2):
        at = sc.mismatch_at_azimuth(delayed, phi)
        assert at["phi_rad"] == pytest.approx(phi, abs=0.02)
        assert 0.0 <= at["1e_2o"] <= total
        assert 0.0 <= at["1o_2e"] <= total


def test_map_csv_format(base_map):
    csv = base_map.with_delays({"1e": 410.0, "2e": 31.0}).to_csv()
    lines = csv.strip().split("\n")
    assert lines[0] == "phi_deg,t_1e_fs,t_1o_fs,t_2e_fs,t_2o_fs"
    assert len(lines) == 1 + base_map.phi_grid.size
    first = lines[1].split(",")
    assert float(first[0]) == 0.0
    for tok in first[1:]:
        assert len(tok.replace(".", "").replace("-", "").lstrip("0")) <= 6
        assert float(tok) > 0
