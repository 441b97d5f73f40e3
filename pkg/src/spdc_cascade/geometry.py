"""Emission geometry of the two-crystal type-II down-conversion cascade.

The pump propagates along +z; the optic axes of the two crystals lie in the
y-z plane at angles +psi and -psi to the pump.  Degenerate phase matching
(energy conservation plus vector momentum conservation, with the e-wave
index taken at its actual angle to the optic axis) is solved exactly by 1-D
root finding:

  * per azimuth phi, for the internal emission direction of the o- or
    e-polarized photon of a given crystal (`cone_direction`), and
  * in the plane of the optic axes, for the extreme opening angles that
    summarize each cone as axis direction + half-opening angle
    (`phase_match_cones`).

Azimuth phi is measured from the x-axis to the projection of the photon
k-vector onto the x-y plane, so the cone tilts sit at phi = 90/270 deg.

Emission times for the four photon classes (born in crystal 1 or 2, o- or
e-polarized) are averages over the birth position, i.e. pair creation at the
generating crystal's centre: half the pump transit to get there, then the
photon's own group delay over the remaining material, with per-direction
path lengths (L/cos of the internal polar angle) and per-direction e-wave
indices.  Times are referenced to the pump pulse entering the first crystal
and reported at the exit face of the second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .constants import C_NM_PER_FS
from .errors import DegenerateGeometryError, NotPhaseMatchableError
from .materials import (
    CrystalSpec,
    PumpSpec,
    group_index,
    index_extraordinary,
    index_ordinary,
)

_U_MAX = 0.35  # rad; generous internal polar-angle bound for the root search

CLASS_NAMES = ("1e", "1o", "2e", "2o")


def optic_axis(crystal: CrystalSpec) -> np.ndarray:
    """Unit vector of the crystal's optic axis (y-z plane)."""
    return np.array(
        [0.0, crystal.axis_sign * math.sin(crystal.cut_angle), math.cos(crystal.cut_angle)]
    )


def _angle_to_axis(kx, ky, kz, ax):
    dot = (ky * ax[1] + kz * ax[2]) / math.sqrt(kx * kx + ky * ky + kz * kz)
    return math.acos(max(-1.0, min(1.0, dot)))


def _pump_index(crystal: CrystalSpec, pump: PumpSpec) -> float:
    # pump is e-polarized and travels along z, at the cut angle to the axis
    return index_extraordinary(crystal.model, pump.center_nm, crystal.cut_angle)


def _cone_residual(crystal, pump, pol, u, phi):
    """Momentum-conservation residual for emission at polar angle u, azimuth phi.

    Wavevectors are expressed in units of the degenerate photon's vacuum
    wavenumber; the pump then has magnitude 2*n_pump along z.  The residual
    is |k_pump - k_photon| minus the index required for the conjugate
    photon to be phase matched in that direction; a root means the pair
    (photon at (u, phi), conjugate at the recoil direction) conserves both
    energy and momentum.
    """
    model = crystal.model
    lam = pump.degenerate_nm
    ax = optic_axis(crystal)
    su, cu = math.sin(u), math.cos(u)
    dx, dy, dz = su * math.cos(phi), su * math.sin(phi), cu
    if pol == "o":
        n = index_ordinary(model, lam)
    else:
        n = index_extraordinary(model, lam, _angle_to_axis(dx, dy, dz, ax))
    rx, ry, rz = -n * dx, -n * dy, 2.0 * _pump_index(crystal, pump) - n * dz
    m = math.sqrt(rx * rx + ry * ry + rz * rz)
    if pol == "o":
        theta_r = _angle_to_axis(rx, ry, rz, ax)
        return m - index_extraordinary(model, lam, theta_r)
    return m - index_ordinary(model, lam)


def cone_direction(crystal: CrystalSpec, pump: PumpSpec, pol: str, phi: float) -> np.ndarray:
    """Internal unit emission direction of the pol-cone at azimuth phi.

    Solves the exact phase-matching condition along the ray of azimuth phi.
    Raises NotPhaseMatchableError when the cone does not reach this azimuth.
    """
    if pol not in ("o", "e"):
        raise ValueError("polarization must be 'o' or 'e'")
    f = lambda u: _cone_residual(crystal, pump, pol, u, phi)
    lo, hi = 1e-12, _U_MAX
    flo = f(lo)
    if flo < 0.0:
        u = brentq(f, lo, hi, xtol=1e-13, rtol=8.9e-16)
    else:
        # cone does not enclose the pump axis; look for a bracket further out
        grid = np.linspace(lo, hi, 256)
        vals = np.array([f(u) for u in grid])
        sign_change = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
        if sign_change.size == 0:
            raise NotPhaseMatchableError(
                f"no phase-matched {pol}-emission at azimuth {phi:.4f} rad "
                f"(smallest residual {vals.min():.3e})",
                residual=float(vals.min()),
            )
        i = sign_change[0]
        u = brentq(f, grid[i], grid[i + 1], xtol=1e-13, rtol=8.9e-16)
    su = math.sin(u)
    return np.array([su * math.cos(phi), su * math.sin(phi), math.cos(u)])


def _inplane_extremes(crystal, pump, pol):
    """Signed polar angles (toward +y) where the cone crosses the y-z plane."""
    def f(a):
        return _cone_residual(crystal, pump, pol, abs(a), math.pi / 2 if a >= 0 else 3 * math.pi / 2)

    grid = np.linspace(-_U_MAX, _U_MAX, 701)
    vals = np.array([f(a) for a in grid])
    brackets = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    roots = [brentq(f, grid[i], grid[i + 1], xtol=1e-13, rtol=8.9e-16) for i in brackets]
    if not roots:
        raise NotPhaseMatchableError(
            f"{pol}-cone not phase matchable at cut angle "
            f"{math.degrees(crystal.cut_angle):.3f} deg "
            f"(smallest residual {vals.min():.3e})",
            residual=float(vals.min()),
        )
    if len(roots) == 1:  # tangency: the cone degenerates to a single ray here
        roots = [roots[0], roots[0]]
    return min(roots), max(roots)


@dataclass(frozen=True)
class Cone:
    """Circular-cone summary: axis direction and half-opening angle (rad)."""

    axis: np.ndarray
    half_angle: float

    @property
    def tilt(self) -> float:
        """Signed tilt of the cone axis toward +y, rad."""
        return math.atan2(self.axis[1], self.axis[2])

    @property
    def encloses_pump_axis(self) -> bool:
        return self.half_angle > abs(self.tilt)

    def polar_angle_at(self, phi: float) -> float:
        """Polar angle of the cone point at azimuth phi (circular model)."""
        a = math.cos(self.tilt)
        b = math.sin(self.tilt) * math.sin(phi)
        r = math.hypot(a, b)
        x = math.cos(self.half_angle) / r
        if abs(x) > 1.0:
            raise NotPhaseMatchableError(f"cone does not reach azimuth {phi:.4f} rad")
        return math.atan2(b, a) + math.acos(x)

    def direction_at(self, phi: float) -> np.ndarray:
        u = self.polar_angle_at(phi)
        return np.array([math.sin(u) * math.cos(phi), math.sin(u) * math.sin(phi), math.cos(u)])


@dataclass(frozen=True)
class ConePair:
    """o- and e-emission cones of one crystal, inside and outside the exit face."""

    o_cone: Cone
    e_cone: Cone
    external_o: Cone
    external_e: Cone


@dataclass(frozen=True)
class BeamSelection:
    """The two distinct output azimuths used as beams A and B.

    The experiment selects the non-overlap regions: the tops of the two
    cones at phi = 90 and 270 deg, where each direction belongs to a single
    cone of each crystal.
    """

    phi_a: float
    phi_b: float

    def __post_init__(self):
        two_pi = 2.0 * math.pi
        if math.isclose(self.phi_a % two_pi, self.phi_b % two_pi, abs_tol=1e-9):
            raise ValueError("beams A and B must be distinct directions")


def _cone_from_extremes(a_minus, a_plus):
    tilt = 0.5 * (a_plus + a_minus)
    half = 0.5 * (a_plus - a_minus)
    return Cone(axis=np.array([0.0, math.sin(tilt), math.cos(tilt)]), half_angle=half)


def phase_match_cones(crystal: CrystalSpec, pump: PumpSpec) -> ConePair:
    """Solve the degenerate type-II phase matching for both emission cones.

    The cones are summarized by their in-plane extremes (exact solutions of
    the vector phase-matching condition); external cones apply Snell
    refraction at the exit face with the ordinary index for the o-cone and
    the direction-dependent index for the e-cone.
    """
    lam = pump.degenerate_nm
    ax = optic_axis(crystal)
    cones = {}
    ext = {}
    for pol in ("o", "e"):
        a_minus, a_plus = _inplane_extremes(crystal, pump, pol)
        cones[pol] = _cone_from_extremes(a_minus, a_plus)
        refracted = []
        for a in (a_minus, a_plus):
            if pol == "o":
                n = index_ordinary(crystal.model, lam)
            else:
                n = index_extraordinary(
                    crystal.model, lam, _angle_to_axis(0.0, math.sin(a), math.cos(a), ax)
                )
            refracted.append(math.copysign(math.asin(min(1.0, n * math.sin(abs(a)))), a))
        ext[pol] = _cone_from_extremes(min(refracted), max(refracted))
    return ConePair(o_cone=cones["o"], e_cone=cones["e"], external_o=ext["o"], external_e=ext["e"])


def cone_intersections(c1: Cone, c2: Cone) -> list:
    """Directions common to two circular cones (0, 1 or 2 unit vectors)."""
    a1, a2 = c1.axis, c2.axis
    c12 = float(np.dot(a1, a2))
    det = 1.0 - c12 * c12
    if det < 1e-15:
        return []
    p1, p2 = math.cos(c1.half_angle), math.cos(c2.half_angle)
    x = (p1 - p2 * c12) / det
    y = (p2 - p1 * c12) / det
    rad = 1.0 - (x * x + y * y + 2.0 * x * y * c12)
    if rad < -1e-14:
        return []
    rad = max(rad, 0.0)
    u = np.cross(a1, a2)
    u /= np.linalg.norm(u)
    z = math.sqrt(rad)
    base = x * a1 + y * a2
    if z < 1e-12:
        return [base / np.linalg.norm(base)]
    return [base + z * u, base - z * u]


def collinear_cut_angle(model, pump: PumpSpec, lo=math.radians(5.0), hi=math.radians(85.0)) -> float:
    """Cut angle at which degenerate collinear phase matching is exact.

    Root of 2*n_e(psi, lam_p) = n_o(lam_dc) + n_e(psi, lam_dc); at this psi
    the emission cones pass through the pump axis.
    """
    lam_p, lam_dc = pump.center_nm, pump.degenerate_nm

    def f(psi):
        return (
            2.0 * index_extraordinary(model, lam_p, psi)
            - index_ordinary(model, lam_dc)
            - index_extraordinary(model, lam_dc, psi)
        )

    grid = np.linspace(lo, hi, 1601)
    vals = np.array([f(p) for p in grid])
    brackets = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    if brackets.size == 0:
        raise NotPhaseMatchableError(
            "no collinear degenerate phase matching for any cut angle in range",
            residual=float(np.abs(vals).min()),
        )
    i = brackets[0]
    return brentq(f, grid[i], grid[i + 1], xtol=1e-12)


def internal_path_length(
    crystal: CrystalSpec, direction, lam_nm: float, polarization: str = "o"
) -> float:
    """Path length (mm) through the slab for an externally given direction.

    The internal polar angle follows from Snell refraction at the entrance
    face (normal along z) with the ordinary index, or self-consistently with
    the angle-dependent index for e-polarized rays.  The ray must travel
    forward; grazing directions are rejected.
    """
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    if d[2] < 1e-6:
        raise DegenerateGeometryError("direction must have a positive pump-axis component")
    sin_ext = math.hypot(d[0], d[1])
    if sin_ext == 0.0:
        return crystal.thickness_mm
    phi = math.atan2(d[1], d[0])
    ax = optic_axis(crystal)
    if polarization == "o":
        n = index_ordinary(crystal.model, lam_nm)
        sin_int = sin_ext / n
    elif polarization == "e":
        # n depends on the internal direction; iterate to self-consistency
        sin_int = sin_ext / index_ordinary(crystal.model, lam_nm)
        for _ in range(200):
            ki = (sin_int * math.cos(phi), sin_int * math.sin(phi), math.sqrt(1 - sin_int**2))
            n = index_extraordinary(crystal.model, lam_nm, _angle_to_axis(*ki, ax))
            new = sin_ext / n
            if abs(new - sin_int) < 1e-14:
                sin_int = new
                break
            sin_int = new
    else:
        raise ValueError("polarization must be 'o' or 'e'")
    cos_int = math.sqrt(max(0.0, 1.0 - sin_int * sin_int))
    if cos_int < 1e-6:
        raise DegenerateGeometryError("refracted ray is grazing; path length undefined")
    return crystal.thickness_mm / cos_int


# ---------------------------------------------------------------------------
# emission times


def class_emission_times(
    crystal1: CrystalSpec, crystal2: CrystalSpec, pump: PumpSpec, direction
) -> dict:
    """Average emission times (fs) of the four photon classes along one
    internal direction, referenced to the pump entering crystal 1.

    Classes: '1e'/'1o' born at the centre of crystal 1, '2e'/'2o' at the
    centre of crystal 2.  Photons from crystal 1 also traverse the full
    second crystal; e-polarized ones see the second axis under a different
    angle and therefore a different group index.
    """
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    if d[2] <= 0:
        raise DegenerateGeometryError("emission direction must point forward")
    sec_u = 1.0 / d[2]
    lam_dc = pump.degenerate_nm
    th1 = _angle_to_axis(d[0], d[1], d[2], optic_axis(crystal1))
    th2 = _angle_to_axis(d[0], d[1], d[2], optic_axis(crystal2))

    def photon_time(crystal, theta):
        if crystal.thickness_mm == 0.0:
            return 0.0
        ng = group_index(crystal.model, lam_dc, theta)
        return crystal.thickness_mm * 1e6 * sec_u * ng / C_NM_PER_FS

    def pump_time(crystal):
        if crystal.thickness_mm == 0.0:
            return 0.0
        ng = group_index(crystal.model, pump.center_nm, crystal.cut_angle)
        return crystal.thickness_mm * 1e6 * ng / C_NM_PER_FS

    tp1, tp2 = pump_time(crystal1), pump_time(crystal2)
    to1, to2 = photon_time(crystal1, None), photon_time(crystal2, None)
    te1, te2 = photon_time(crystal1, th1), photon_time(crystal2, th2)
    return {
        "1e": 0.5 * tp1 + 0.5 * te1 + te2,
        "1o": 0.5 * tp1 + 0.5 * to1 + to2,
        "2e": tp1 + 0.5 * tp2 + 0.5 * te2,
        "2o": tp1 + 0.5 * tp2 + 0.5 * to2,
    }


@dataclass(frozen=True)
class EmissionTimeMap:
    """Per-azimuth average emission times for the four photon classes.

    Each class is evaluated on its own phase-matched cone; `times` holds the
    values in fs with the fixed per-class delays already added.
    """

    phi_grid: np.ndarray
    times: dict
    applied_delays: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.phi_grid) <= 0):
            raise ValueError("phi grid must be strictly increasing")
        for name in CLASS_NAMES:
            if name not in self.times:
                raise ValueError(f"missing class {name!r} in times")

    def with_delays(self, delays: dict) -> "EmissionTimeMap":
        """Return a copy with additional fixed per-class delays added."""
        new_times = {c: self.times[c] + delays.get(c, 0.0) for c in CLASS_NAMES}
        merged = {
            c: self.applied_delays.get(c, 0.0) + delays.get(c, 0.0) for c in CLASS_NAMES
        }
        return EmissionTimeMap(self.phi_grid, new_times, merged)

    def to_csv(self) -> str:
        lines = ["phi_deg,t_1e_fs,t_1o_fs,t_2e_fs,t_2o_fs"]
        for i, phi in enumerate(self.phi_grid):
            row = [math.degrees(phi)] + [self.times[c][i] for c in CLASS_NAMES]
            lines.append(",".join(f"{v:.6g}" for v in row))
        return "\n".join(lines) + "\n"


def default_phi_grid(n: int = 256) -> np.ndarray:
    return np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)


def emission_time_map(
    crystal1: CrystalSpec,
    crystal2: CrystalSpec,
    pump: PumpSpec,
    delays: dict | None = None,
    phi_grid=None,
) -> EmissionTimeMap:
    """Angle-resolved emission-time map of the cascade.

    For every azimuth the four classes are evaluated at the exact
    phase-matched direction of their own cone (e-cone or o-cone of the
    generating crystal), with per-direction path lengths and e-indices.
    """
    if crystal1.axis_sign == crystal2.axis_sign:
        raise ValueError("cascade crystals must have opposite axis signs")
    if not math.isclose(crystal1.cut_angle, crystal2.cut_angle, abs_tol=1e-12):
        raise ValueError("cascade crystals must have mirror-symmetric cut angles")
    delays = dict(delays or {})
    unknown = set(delays) - set(CLASS_NAMES)
    if unknown:
        raise ValueError(f"unknown photon classes in delays: {sorted(unknown)}")
    if any(v < 0 for v in delays.values()):
        raise ValueError("per-class delays must be nonnegative")
    if phi_grid is None:
        phi_grid = default_phi_grid()
    phi_grid = np.asarray(phi_grid, dtype=float)

    sources = {"1e": (crystal1, "e"), "1o": (crystal1, "o"), "2e": (crystal2, "e"), "2o": (crystal2, "o")}
    times = {c: np.empty(phi_grid.size) for c in CLASS_NAMES}
    for i, phi in enumerate(phi_grid):
        for cname, (crystal, pol) in sources.items():
            d = cone_direction(crystal, pump, pol, phi)
            times[cname][i] = class_emission_times(crystal1, crystal2, pump, d)[cname]
    for cname in CLASS_NAMES:
        times[cname] += delays.get(cname, 0.0)
    return EmissionTimeMap(phi_grid, times, dict(delays))


def pairing_mismatch(emission_map: EmissionTimeMap) -> float:
    """Worst residual arrival-time difference of the interfering pairs.

    max over phi of max(|t_1e - t_2o|, |t_1o - t_2e|), delays included.
    The photons of a pair exit along (nearly) the same cone, so equal times
    mean which-crystal information is erased for every output direction.
    """
    if emission_map.phi_grid.size < 64:
        raise ValueError("emission map must cover at least 64 azimuth points")
    t = emission_map.times
    d_b = np.abs(t["1e"] - t["2o"])
    d_a = np.abs(t["1o"] - t["2e"])
    return float(max(d_b.max(), d_a.max()))


def mismatch_at_azimuth(emission_map: EmissionTimeMap, phi: float) -> dict:
    """Residual pair mismatches at the grid azimuth nearest to phi (fs)."""
    grid = emission_map.phi_grid
    i = int(np.argmin(np.abs((grid - phi + math.pi) % (2.0 * math.pi) - math.pi)))
    t = emission_map.times
    return {
        "phi_rad": float(grid[i]),
        "1e_2o": float(abs(t["1e"][i] - t["2o"][i])),
        "1o_2e": float(abs(t["1o"][i] - t["2e"][i])),
    }


def map_flattening_delays(undelayed: EmissionTimeMap) -> dict:
    """Constant per-class delays that best flatten the pair mismatches.

    The midrange of (t_2o - t_1e) over the grid is the minimax-optimal
    constant delay for the 1e photons, likewise (t_1o - t_2e) for 2e.
    Expects a map built with zero applied delays.
    """
    t = undelayed.times
    d_b = t["2o"] - t["1e"]
    d_a = t["1o"] - t["2e"]
    return {
        "1e": float(0.5 * (d_b.max() + d_b.min())),
        "2e": float(0.5 * (d_a.max() + d_a.min())),
    }
