"""Photorefractive response of Ti-indiffused LiNbO3 waveguides under
continuous visible irradiation.

Charge model: absorption of the irradiation beam excites carriers that are
redistributed by the bulk photovoltaic current and by drift in whatever field
is applied across the electrodes.  The resulting space-charge field relaxes
exponentially toward a steady state set by the ratio of photovoltaic drive to
total conductivity,

    e_inf = (kappa * alpha * P - sigma_ph(P) * e_app) / (sigma_d + sigma_ph(P))

with dielectric relaxation time tau = eps_r * eps0 / (sigma_d + sigma_ph(P)).
The Pockels effect converts the space-charge field into a guided-index change;
the device layer (``ipasim.device``) maps per-arm index responses onto
interferometer phase.

Photoconductivity grows linearly with power at low power and sublinearly above
a crossover (two-center transport).  The saturated per-arm response

    f(P) = A * P / (1 + sigma_ph(P) / sigma_d)

reduces to A*P / (1 + B*P) below the crossover and continues monotonically but
sublinearly above it; the sublinear branch is stitched continuously at the
crossover.

Unit conventions: ``P`` is the per-arm optical power in watts delivered to the
waveguide (beam geometry is absorbed into the transport constants, so the
photovoltaic and photoconductive coefficients are lumped per-watt quantities).
Fields are V/m, conductivities S/m, times seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

VACUUM_PERMITTIVITY_F_PER_M = 8.8541878128e-12


class DecayMode(str, Enum):
    """What the space-charge field does while the irradiation is off."""

    FROZEN = "frozen"          # trapped charge persists indefinitely
    DARK_DECAY = "dark_decay"  # field relaxes to zero with the dark time constant


@dataclass(frozen=True)
class MaterialParams:
    """Transport and electro-optic constants of one waveguide arm.

    Observable behavior depends only on the lumped products exposed as
    ``response_amplitude``, ``response_saturation``, ``field_response`` and
    ``tau_dark_s``; the individual factors are one physically sensible split
    (see ``ipasim.calibration`` for how the defaults are pinned to measured
    device behavior).
    """

    refractive_index: float        # guided-mode index at the signal wavelength
    r33_m_per_v: float             # electro-optic coefficient
    mode_overlap: float            # optical/static field overlap, dimensionless
    photovoltaic_const: float      # kappa, V*m per (absorbed W/m) in lumped units
    absorption_per_m: float        # alpha at the irradiation wavelength
    photocond_per_w: float         # a, photoconductivity per absorbed watt
    dark_conductivity_s_per_m: float
    rel_permittivity: float
    sublinear_exponent: int = 2    # m in sigma_ph ~ P**(1/m) above the crossover
    crossover_power_w: float = 7e-6

    def __post_init__(self) -> None:
        for name in (
            "refractive_index",
            "r33_m_per_v",
            "mode_overlap",
            "photovoltaic_const",
            "absorption_per_m",
            "photocond_per_w",
            "dark_conductivity_s_per_m",
            "rel_permittivity",
            "crossover_power_w",
        ):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"MaterialParams.{name} must be positive")
        if self.sublinear_exponent < 1 or self.sublinear_exponent != int(self.sublinear_exponent):
            raise ValueError("sublinear_exponent must be an integer >= 1")

    @property
    def response_amplitude(self) -> float:
        """A: low-power slope of the saturated index response, per watt."""
        n3r = self.refractive_index**3 * self.r33_m_per_v * self.mode_overlap
        return (
            n3r
            * self.photovoltaic_const
            * self.photocond_per_w
            / (2.0 * self.dark_conductivity_s_per_m)
        )

    @property
    def response_saturation(self) -> float:
        """B: inverse of the power where photoconductivity equals sigma_d."""
        return self.photocond_per_w * self.absorption_per_m / self.dark_conductivity_s_per_m

    @property
    def field_response(self) -> float:
        """G: index response per unit space-charge field, m/V.

        ``f = G * e_s`` for any space-charge field, so the dynamic state of an
        arm is fully described by ``e_s``.
        """
        n3r = self.refractive_index**3 * self.r33_m_per_v * self.mode_overlap
        return n3r * self.photocond_per_w / (2.0 * self.absorption_per_m)

    @property
    def tau_dark_s(self) -> float:
        """Dielectric relaxation time with no irradiation."""
        return (
            self.rel_permittivity
            * VACUUM_PERMITTIVITY_F_PER_M
            / self.dark_conductivity_s_per_m
        )

    @property
    def high_regime_coeff(self) -> float:
        """Prefactor of the sublinear photoconductivity branch.

        Fixed by continuity at the crossover power.
        """
        m = self.sublinear_exponent
        lin = self.photocond_per_w * self.absorption_per_m
        return lin * self.crossover_power_w ** (1.0 - 1.0 / m)


@dataclass(frozen=True)
class GeometryParams:
    """Waveguide and electrode geometry of the interferometer arms."""

    arm_length_m: float
    electrode_length_m: float
    electrode_gap_m: float
    signal_wavelength_m: float
    irradiation_wavelength_m: float
    effective_length_m: float      # interaction length weighting the index change

    def __post_init__(self) -> None:
        for name in (
            "arm_length_m",
            "electrode_length_m",
            "electrode_gap_m",
            "signal_wavelength_m",
            "irradiation_wavelength_m",
            "effective_length_m",
        ):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"GeometryParams.{name} must be positive")
        if self.electrode_length_m > self.arm_length_m:
            raise ValueError("electrode_length_m cannot exceed arm_length_m")

    @property
    def phase_scale_rad(self) -> float:
        """D: phase accumulated per unit index response over one arm."""
        return 2.0 * math.pi * self.arm_length_m / self.signal_wavelength_m


def field_coupling(mat: MaterialParams, geo: GeometryParams) -> float:
    """C: drift correction to the per-arm phase, rad per (V/m) of applied field.

    The saturated per-arm phase is ``(D - C * e_app) * f(P)``; C/D sets the
    asymmetry between the arms when the exposure happens under bias.
    """
    return (
        2.0
        * mat.photocond_per_w
        * math.pi
        * geo.electrode_length_m
        / (mat.photovoltaic_const * geo.signal_wavelength_m)
    )


def photoconductivity(mat: MaterialParams, power_w: float) -> float:
    """sigma_ph(P): linear below the crossover, ~P**(1/m) above it."""
    if power_w < 0.0:
        raise ValueError("power_w must be >= 0")
    if power_w <= mat.crossover_power_w:
        return mat.photocond_per_w * mat.absorption_per_m * power_w
    return mat.high_regime_coeff * power_w ** (1.0 / mat.sublinear_exponent)


def buildup_time_constant(mat: MaterialParams, power_w: float) -> float:
    """Dielectric relaxation time under irradiation, strictly decreasing in P."""
    sigma = mat.dark_conductivity_s_per_m + photoconductivity(mat, power_w)
    return mat.rel_permittivity * VACUUM_PERMITTIVITY_F_PER_M / sigma


def steady_state_field(
    mat: MaterialParams, power_w: float, e_app_v_per_m: float = 0.0
) -> float:
    """Space-charge field the arm relaxes toward under constant conditions.

    The photovoltaic term drives the field up with intensity; the drift term
    screens a fraction sigma_ph/sigma of the applied field.
    """
    sigma_ph = photoconductivity(mat, power_w)
    sigma = mat.dark_conductivity_s_per_m + sigma_ph
    drive = mat.photovoltaic_const * mat.absorption_per_m * power_w
    return (drive - sigma_ph * e_app_v_per_m) / sigma


def saturated_index_response(mat: MaterialParams, power_w: float) -> float:
    """f(P): steady-state index response to irradiation alone."""
    sigma_ph = photoconductivity(mat, power_w)
    return (
        mat.response_amplitude
        * power_w
        / (1.0 + sigma_ph / mat.dark_conductivity_s_per_m)
    )


def saturated_index_change(
    mat: MaterialParams, power_w: float, e_app_v_per_m: float = 0.0
) -> float:
    """Microscopic steady-state index change, 0.5 * n^3 * r33 * gamma * e_inf.

    Relates to the effective response by delta_n = f * L / l_eff when the
    applied field is zero or the photoconductivity is in its linear regime.
    """
    n3r = mat.refractive_index**3 * mat.r33_m_per_v * mat.mode_overlap
    return 0.5 * n3r * steady_state_field(mat, power_w, e_app_v_per_m)


def saturated_phase_shift(
    mat: MaterialParams,
    geo: GeometryParams,
    power_w: float,
    e_app_v_per_m: float = 0.0,
) -> float:
    """Steady-state single-arm phase shift, (D - C * e_app) * f(P), in rad."""
    d_scale = geo.phase_scale_rad
    c_scale = field_coupling(mat, geo)
    return (d_scale - c_scale * e_app_v_per_m) * saturated_index_response(mat, power_w)


@dataclass(frozen=True)
class ArmState:
    """Dynamic state of one arm: space-charge field and accumulated exposure."""

    field_v_per_m: float = 0.0
    exposure_s: float = 0.0

    def index_response(self, mat: MaterialParams) -> float:
        return mat.field_response * self.field_v_per_m


def evolve_field(
    mat: MaterialParams,
    field_v_per_m: float,
    power_w: float,
    e_app_v_per_m: float,
    dt_s: float,
    decay_mode: DecayMode = DecayMode.FROZEN,
) -> float:
    """Advance the space-charge field by ``dt_s`` under constant conditions.

    Exact exponential step, so composing two steps of dt/2 matches one step of
    dt to machine precision and dt may be chosen for trace resolution only.
    With the irradiation off the field either holds (``FROZEN``) or relaxes to
    zero with the dark time constant (``DARK_DECAY``).
    """
    if dt_s < 0.0:
        raise ValueError("dt_s must be >= 0")
    if power_w < 0.0:
        raise ValueError("power_w must be >= 0")
    if power_w == 0.0:
        if decay_mode is DecayMode.FROZEN:
            return field_v_per_m
        return field_v_per_m * math.exp(-dt_s / mat.tau_dark_s)
    target = steady_state_field(mat, power_w, e_app_v_per_m)
    tau = buildup_time_constant(mat, power_w)
    # expm1 keeps full relative precision when dt << tau, where the
    # equivalent target + (f0-target)*exp(-dt/tau) cancels catastrophically
    return field_v_per_m + (field_v_per_m - target) * math.expm1(-dt_s / tau)


def evolve_arm(
    mat: MaterialParams,
    state: ArmState,
    power_w: float,
    e_app_v_per_m: float,
    dt_s: float,
    decay_mode: DecayMode = DecayMode.FROZEN,
) -> ArmState:
    """ArmState counterpart of :func:`evolve_field`; exposure clock only ticks
    while power is applied."""
    field = evolve_field(mat, state.field_v_per_m, power_w, e_app_v_per_m, dt_s, decay_mode)
    exposure = state.exposure_s + (dt_s if power_w > 0.0 else 0.0)
    return replace(state, field_v_per_m=field, exposure_s=exposure)
