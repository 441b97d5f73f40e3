"""Dispersion engine for uniaxial crystals (beta-BBO, crystalline quartz).

Phase and group refractive indices versus wavelength and propagation angle,
and wave-packet propagation times through a crystal slab.  All dispersion
relations are closed-form Sellmeier-type expressions evaluated with the
wavelength in micrometres; group indices use the analytic derivative

    n_g = n - lambda * dn/dlambda,

never finite differences (finite differences are kept as a test oracle).

Embedded coefficient sources:
    beta-BBO : Kato-form Sellmeier set as tabulated by United Crystals /
               Newlight Photonics (https://www.newlightphotonics.com),
               the same set used by SPDCalc.org.
    quartz   : power-series set for crystalline quartz from Newlight
               Photonics (https://www.newlightphotonics.com/v1/quartz-properties.html).

Additional materials can be supplied at run time from a key-value text file,
see `load_dispersion_model`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import C_NM_PER_FS, TWO_PI
from .errors import WavelengthRangeError


@dataclass(frozen=True)
class SellmeierForm:
    """One closed-form n^2(lambda) expression, lambda in um.

    kind "resonant":     n^2 = c0 + c1/(lam^2 - c2) + c3*lam^2
    kind "power_series": n^2 = c0 + c1*lam^2 + c2/lam^2 + c3/lam^4
                                + c4/lam^6 + c5/lam^8
    """

    kind: str
    coefficients: tuple

    def __post_init__(self):
        if self.kind not in ("resonant", "power_series"):
            raise ValueError(f"unknown Sellmeier form {self.kind!r}")
        n = len(self.coefficients)
        if self.kind == "resonant" and n != 4:
            raise ValueError("resonant form takes 4 coefficients")
        if self.kind == "power_series" and not 1 <= n <= 6:
            raise ValueError("power_series form takes 1..6 coefficients")

    def n_squared(self, lam_um: float) -> float:
        c = self.coefficients
        l2 = lam_um * lam_um
        if self.kind == "resonant":
            return c[0] + c[1] / (l2 - c[2]) + c[3] * l2
        acc = c[0]
        if len(c) > 1:
            acc += c[1] * l2
        p = 1.0
        for ck in c[2:]:
            p *= l2
            acc += ck / p
        return acc

    def dn2_dlam(self, lam_um: float) -> float:
        """d(n^2)/dlambda, per um."""
        c = self.coefficients
        l2 = lam_um * lam_um
        if self.kind == "resonant":
            return -2.0 * lam_um * c[1] / (l2 - c[2]) ** 2 + 2.0 * lam_um * c[3]
        acc = 0.0
        if len(c) > 1:
            acc += 2.0 * lam_um * c[1]
        for k, ck in enumerate(c[2:], start=1):
            acc += -2.0 * k * ck / lam_um ** (2 * k + 1)
        return acc


@dataclass(frozen=True)
class DispersionModel:
    """A uniaxial crystal: ordinary and principal extraordinary dispersion."""

    name: str
    sellmeier_o: SellmeierForm
    sellmeier_e: SellmeierForm
    valid_range_nm: tuple

    def check_range(self, lam_nm: float, interior: bool = False):
        lo, hi = self.valid_range_nm
        ok = lo < lam_nm < hi if interior else lo <= lam_nm <= hi
        if not ok:
            kind = "strict interior of" if interior else "interval"
            raise WavelengthRangeError(
                f"{lam_nm} nm outside the {kind} [{lo}, {hi}] nm valid for {self.name}"
            )


def index_ordinary(model: DispersionModel, lam_nm: float) -> float:
    """Ordinary phase index n_o(lambda)."""
    model.check_range(lam_nm)
    return math.sqrt(model.sellmeier_o.n_squared(lam_nm / 1000.0))


def index_principal_e(model: DispersionModel, lam_nm: float) -> float:
    """Principal extraordinary index n_e(lambda) (propagation at 90 deg)."""
    model.check_range(lam_nm)
    return math.sqrt(model.sellmeier_e.n_squared(lam_nm / 1000.0))


def index_extraordinary(model: DispersionModel, lam_nm: float, theta: float) -> float:
    """Extraordinary index at angle theta between wavevector and optic axis.

    Standard uniaxial index ellipse:
        1/n(theta)^2 = cos^2(theta)/n_o^2 + sin^2(theta)/n_e^2
    """
    model.check_range(lam_nm)
    lam_um = lam_nm / 1000.0
    no2 = model.sellmeier_o.n_squared(lam_um)
    ne2 = model.sellmeier_e.n_squared(lam_um)
    c, s = math.cos(theta), math.sin(theta)
    return 1.0 / math.sqrt(c * c / no2 + s * s / ne2)


def group_index(model: DispersionModel, lam_nm: float, theta: float | None = None) -> float:
    """Group index n_g = n - lambda*dn/dlambda, from the analytic derivative.

    theta=None gives the ordinary wave; otherwise the extraordinary wave at
    angle theta to the optic axis.  The wavelength must lie strictly inside
    the model's validity interval so the derivative is trustworthy.
    """
    model.check_range(lam_nm, interior=True)
    lam_um = lam_nm / 1000.0
    if theta is None:
        n2 = model.sellmeier_o.n_squared(lam_um)
        dn2 = model.sellmeier_o.dn2_dlam(lam_um)
        n = math.sqrt(n2)
        # dn/dlam = (dn2/dlam) / (2n); lambda*dn/dlambda is unit-invariant
        return n - lam_um * dn2 / (2.0 * n)
    no2 = model.sellmeier_o.n_squared(lam_um)
    ne2 = model.sellmeier_e.n_squared(lam_um)
    dno2 = model.sellmeier_o.dn2_dlam(lam_um)
    dne2 = model.sellmeier_e.dn2_dlam(lam_um)
    c2, s2 = math.cos(theta) ** 2, math.sin(theta) ** 2
    inv_n2 = c2 / no2 + s2 / ne2
    n = 1.0 / math.sqrt(inv_n2)
    # d(1/n^2)/dlam = -c2*dno2/no2^2 - s2*dne2/ne2^2  ->  dn/dlam = -n^3/2 * d(1/n^2)/dlam
    dinv = -c2 * dno2 / no2**2 - s2 * dne2 / ne2**2
    dn = -0.5 * n**3 * dinv
    return n - lam_um * dn


@dataclass(frozen=True)
class CrystalSpec:
    """One uniaxial crystal of the source.

    cut_angle is the angle psi between the optic axis and the pump
    direction; axis_sign distinguishes the +psi and -psi crystals of a
    cascade.  thickness may be zero to represent an absent crystal
    (single-crystal mode of the source).
    """

    model: DispersionModel
    thickness_mm: float
    cut_angle: float
    axis_sign: int = +1

    def __post_init__(self):
        if self.thickness_mm < 0:
            raise ValueError("crystal thickness must be >= 0 mm")
        if not 0.0 < self.cut_angle < math.pi / 2:
            raise ValueError("cut angle must lie in (0, pi/2) rad")
        if self.axis_sign not in (+1, -1):
            raise ValueError("axis_sign must be +1 or -1")


@dataclass(frozen=True)
class PumpSpec:
    """Pulsed pump: centre wavelength and intensity-FWHM bandwidth (both nm).

    The spectral intensity is modelled as exp[-2 (w - w_bar)^2 / sigma^2];
    sigma is derived from the FWHM bandwidth via
        dw_fwhm = 2 pi c dlambda / lambda^2,   sigma = dw_fwhm / sqrt(2 ln 2).
    """

    center_nm: float
    bandwidth_fwhm_nm: float

    def __post_init__(self):
        if self.center_nm <= 0 or self.bandwidth_fwhm_nm <= 0:
            raise ValueError("pump wavelength and bandwidth must be positive")

    @property
    def omega_bar(self) -> float:
        """Centre angular frequency, rad/fs."""
        return TWO_PI * C_NM_PER_FS / self.center_nm

    @property
    def sigma(self) -> float:
        """Gaussian spectral width sigma, rad/fs."""
        dw_fwhm = TWO_PI * C_NM_PER_FS * self.bandwidth_fwhm_nm / self.center_nm**2
        return dw_fwhm / math.sqrt(2.0 * math.log(2.0))

    @property
    def degenerate_nm(self) -> float:
        """Wavelength of degenerate down-converted photons."""
        return 2.0 * self.center_nm


@dataclass(frozen=True)
class PropagationTimes:
    """Propagation times through one crystal of the cascade, all in fs.

    t_p  : pump pulse (e-polarized, at the cut angle to the optic axis)
    t_o  : o-polarized down-converted photon
    t_e  : e-polarized down-converted photon in its generating crystal
    t_e2 : the same e photon crossing the other crystal of the cascade,
           whose optic axis it sees under a different angle
    """

    t_p: float
    t_o: float
    t_e: float
    t_e2: float

    def as_tuple(self):
        return (self.t_p, self.t_o, self.t_e, self.t_e2)


def propagation_times(
    crystal: CrystalSpec,
    pump: PumpSpec,
    e_angle_dc: float | None = None,
    e_angle_dc_prime: float | None = None,
) -> PropagationTimes:
    """Group-delay propagation times t = L*n_g/c through one crystal.

    e_angle_dc is the angle between the e photon's internal wavevector and
    the generating crystal's optic axis; e_angle_dc_prime the angle to the
    other crystal's axis.  Both default to the cut angle, i.e. evaluation
    on the pump axis, where the two coincide by mirror symmetry.
    """
    if e_angle_dc is None:
        e_angle_dc = crystal.cut_angle
    if e_angle_dc_prime is None:
        e_angle_dc_prime = crystal.cut_angle
    lam_dc = pump.degenerate_nm
    length_fs = crystal.thickness_mm * 1e6 / C_NM_PER_FS
    return PropagationTimes(
        t_p=length_fs * group_index(crystal.model, pump.center_nm, crystal.cut_angle),
        t_o=length_fs * group_index(crystal.model, lam_dc),
        t_e=length_fs * group_index(crystal.model, lam_dc, e_angle_dc),
        t_e2=length_fs * group_index(crystal.model, lam_dc, e_angle_dc_prime),
    )


# ---------------------------------------------------------------------------
# built-in materials

BBO = DispersionModel(
    name="bbo",
    # n_o^2 = 2.7359 + 0.01878/(l^2 - 0.01822) - 0.01354 l^2   (l in um)
    sellmeier_o=SellmeierForm("resonant", (2.7359, 0.01878, 0.01822, -0.01354)),
    # n_e^2 = 2.3753 + 0.01224/(l^2 - 0.01667) - 0.01516 l^2
    sellmeier_e=SellmeierForm("resonant", (2.3753, 0.01224, 0.01667, -0.01516)),
    valid_range_nm=(220.0, 1060.0),
)

QUARTZ = DispersionModel(
    name="quartz",
    sellmeier_o=SellmeierForm(
        "power_series",
        (2.3573, -0.01170, 0.01054, 1.3414e-4, -4.4537e-7, 5.9236e-8),
    ),
    sellmeier_e=SellmeierForm(
        "power_series",
        (2.3849, -0.01259, 0.01079, 1.6518e-4, -1.9474e-6, 9.3648e-8),
    ),
    valid_range_nm=(185.0, 1500.0),
)

BUILTIN_MODELS = {"bbo": BBO, "quartz": QUARTZ}


def load_dispersion_model(path) -> DispersionModel:
    """Read a DispersionModel from a flat key-value text file.

    Expected keys (one per line, ``key = value``, '#' starts a comment)::

        name           = mycrystal
        valid_range_nm = 200 1100
        o.form         = resonant
        o.coefficients = 2.7359 0.01878 0.01822 -0.01354
        e.form         = resonant
        e.coefficients = 2.3753 0.01224 0.01667 -0.01516

    Unknown keys are rejected so typos cannot silently change a material.
    """
    required = {"name", "valid_range_nm", "o.form", "o.coefficients", "e.form", "e.coefficients"}
    entries = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in required:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            if key in entries:
                raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
            entries[key] = value
    missing = required - set(entries)
    if missing:
        raise ValueError(f"{path}: missing keys: {sorted(missing)}")
    lo, hi = (float(tok) for tok in entries["valid_range_nm"].split())
    if not 0 < lo < hi:
        raise ValueError(f"{path}: invalid wavelength range {lo}..{hi} nm")
    forms = {}
    for pol in ("o", "e"):
        coeffs = tuple(float(tok) for tok in entries[f"{pol}.coefficients"].split())
        forms[pol] = SellmeierForm(entries[f"{pol}.form"], coeffs)
    return DispersionModel(
        name=entries["name"],
        sellmeier_o=forms["o"],
        sellmeier_e=forms["e"],
        valid_range_nm=(lo, hi),
    )


def get_model(name_or_path: str) -> DispersionModel:
    """Resolve a built-in material name or a material definition file."""
    key = name_or_path.lower()
    if key in BUILTIN_MODELS:
        return BUILTIN_MODELS[key]
    return load_dispersion_model(name_or_path)
