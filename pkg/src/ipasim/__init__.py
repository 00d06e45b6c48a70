"""Simulation toolkit for visible-light injection attacks on LiNbO3
Mach-Zehnder variable optical attenuators in QKD transmitters.

The package is organized in layers: ``photorefractive`` models the per-arm
space-charge dynamics, ``device`` assembles two arms into an interferometric
attenuator, ``calibration`` pins the defaults to bench behavior, ``attack``
drives exposure programs (pre-treatment, closed-loop pulse injection,
re-initialization), ``security`` evaluates the decoy-state BB84 consequences,
and ``budget`` prices the injection path of a real link.  ``config``,
``runio`` and ``cli`` wrap everything in a reproducible command-line surface.
"""

__version__ = "0.1.0"

from .attack import (
    INIT_POWER_W,
    ExposureResult,
    ExposureTrace,
    InitResult,
    IrradiationProgram,
    PreTreatmentPlan,
    PreTreatResult,
    PulseController,
    PulseResult,
    PulseTrace,
    Segment,
    initialize_device,
    pre_treat,
    pulse_inject_to_target,
    run_program,
    single_period_gain_db,
)
from .budget import (
    BUILTIN_COMPONENTS,
    BUILTIN_FIBER_DB_PER_KM,
    COUPLING_SCHEMES,
    ComponentLoss,
    CouplingScheme,
    InjectionPath,
    LossValue,
    MarginReport,
    PowerValue,
    countermeasure_margin,
    coupling_plan_loss,
    delivered_power,
    path_loss,
    required_eve_power,
    standard_path,
)
from .calibration import calibration_summary, default_device, default_geometry, default_material
from .device import AttenuationSample, MziDevice, VoltageCurve, curve_rms_db
from .photorefractive import (
    ArmState,
    DecayMode,
    GeometryParams,
    MaterialParams,
    buildup_time_constant,
    evolve_field,
    photoconductivity,
    saturated_phase_shift,
    steady_state_field,
)
from .security import (
    AttackParams,
    BracketError,
    DecoyBounds,
    KeyRate,
    QkdScenario,
    SecurityResult,
    TailBounded,
    attack_success_probability,
    binary_entropy,
    decoy_bounds,
    evaluate_scenario,
    key_rate,
    pns_photon_distribution,
    single_photon_truth,
    sweep_key_rates,
    tagged_fraction_actual,
    tagged_fraction_estimated,
    zero_key_threshold,
)

__all__ = [
    "__version__",
    "ArmState",
    "AttackParams",
    "AttenuationSample",
    "BracketError",
    "BUILTIN_COMPONENTS",
    "BUILTIN_FIBER_DB_PER_KM",
    "COUPLING_SCHEMES",
    "ComponentLoss",
    "CouplingScheme",
    "DecayMode",
    "DecoyBounds",
    "ExposureResult",
    "ExposureTrace",
    "GeometryParams",
    "INIT_POWER_W",
    "InitResult",
    "InjectionPath",
    "IrradiationProgram",
    "KeyRate",
    "LossValue",
    "MarginReport",
    "MaterialParams",
    "MziDevice",
    "PowerValue",
    "PreTreatResult",
    "PreTreatmentPlan",
    "PulseController",
    "PulseResult",
    "PulseTrace",
    "QkdScenario",
    "SecurityResult",
    "Segment",
    "TailBounded",
    "VoltageCurve",
    "attack_success_probability",
    "binary_entropy",
    "buildup_time_constant",
    "calibration_summary",
    "countermeasure_margin",
    "coupling_plan_loss",
    "curve_rms_db",
    "decoy_bounds",
    "default_device",
    "default_geometry",
    "default_material",
    "delivered_power",
    "evaluate_scenario",
    "evolve_field",
    "initialize_device",
    "key_rate",
    "path_loss",
    "photoconductivity",
    "pns_photon_distribution",
    "pre_treat",
    "pulse_inject_to_target",
    "required_eve_power",
    "run_program",
    "saturated_phase_shift",
    "single_period_gain_db",
    "single_photon_truth",
    "standard_path",
    "steady_state_field",
    "sweep_key_rates",
    "tagged_fraction_actual",
    "tagged_fraction_estimated",
    "zero_key_threshold",
]
