"""Simulation and optimization toolkit for cascaded type-II down-conversion
entangled-photon sources: crystal dispersion and propagation times,
angle-resolved emission-time maps, coincidence-rate interference patterns,
fringe visibility analysis and birefringent delay-line prescriptions."""

from .analysis import (
    DelayOptimum,
    DelayPrescription,
    ScanSeries,
    delay_scan,
    delay_to_quartz_thickness,
    extract_visibility,
    measure_fringe_spacing,
    optimize_delays_numeric,
    polarization_scan,
    prescribe_delays,
    quartz_calibration,
    visibility_curve,
)
from .errors import (
    ConfigError,
    DegenerateGeometryError,
    DegenerateParametersError,
    NotPhaseMatchableError,
    UndefinedVisibilityError,
    WavelengthRangeError,
)
from .geometry import (
    BeamSelection,
    Cone,
    ConePair,
    EmissionTimeMap,
    class_emission_times,
    collinear_cut_angle,
    cone_direction,
    cone_intersections,
    emission_time_map,
    internal_path_length,
    map_flattening_delays,
    mismatch_at_azimuth,
    pairing_mismatch,
    phase_match_cones,
)
from .interference import (
    AnalyzerDelayConfig,
    InterferenceParams,
    coincidence_rate,
    contrast_diagnostics,
    envelope,
    fringe_locked_delays,
    fringe_period,
    max_visibility,
    optimal_delays,
    params_from_crystal,
    rect_window,
)
from .materials import (
    BBO,
    QUARTZ,
    CrystalSpec,
    DispersionModel,
    PropagationTimes,
    PumpSpec,
    SellmeierForm,
    get_model,
    group_index,
    index_extraordinary,
    index_ordinary,
    index_principal_e,
    load_dispersion_model,
    propagation_times,
)

__version__ = "0.1.0"
