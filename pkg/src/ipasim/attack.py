"""Irradiation programs against a VOA and their closed-loop variants.

Three attack styles are modeled:

* **Pre-treatment**: saturate the device at a chosen drive voltage before
  deployment, then remove beam and field together.  The stored space-charge
  pattern shifts the zero-volt bias phase; the shift has an even part from the
  differential illumination and an odd-in-voltage part from drift, so the
  treatment voltage steers where the curve lands.
* **Pulse injection**: periodic bright pulses with a duty-cycle controller
  that walks the output magnification to a target and holds it.  With
  ``DecayMode.DARK_DECAY`` the controller must keep injecting to fight
  relaxation, so the holding duty stays positive.
* **Initialization**: long moderate exposure at zero volts that drives both
  arms to a reproducible saturated state, erasing the attenuation history.

All exposure stepping uses the exact exponential integrator from
``ipasim.photorefractive``; ``dt_s`` only sets trace resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .device import MziDevice
from .photorefractive import DecayMode, steady_state_field


@dataclass(frozen=True)
class Segment:
    power_w: float
    duration_s: float

    def __post_init__(self) -> None:
        if self.power_w < 0.0:
            raise ValueError("segment power must be >= 0")
        if self.duration_s <= 0.0:
            raise ValueError("segment duration must be positive")


@dataclass(frozen=True)
class IrradiationProgram:
    """Piecewise-constant injected power vs time.

    Pulse-train programs remember their pulse width so trace resolution can
    be validated against it.
    """

    segments: tuple[Segment, ...]
    pulse_width_s: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValueError("program needs at least one segment")

    @classmethod
    def cw(cls, power_w: float, duration_s: float) -> "IrradiationProgram":
        return cls((Segment(power_w, duration_s),))

    @classmethod
    def steps(cls, pairs: list[tuple[float, float]]) -> "IrradiationProgram":
        return cls(tuple(Segment(p, d) for p, d in pairs))

    @classmethod
    def pulse_train(
        cls, peak_power_w: float, period_s: float, pulse_width_s: float, count: int
    ) -> "IrradiationProgram":
        if not 0.0 < pulse_width_s <= period_s:
            raise ValueError("need 0 < pulse_width_s <= period_s")
        if count < 1:
            raise ValueError("count must be >= 1")
        on = Segment(peak_power_w, pulse_width_s)
        segs: list[Segment] = []
        for _ in range(count):
            segs.append(on)
            if pulse_width_s < period_s:
                segs.append(Segment(0.0, period_s - pulse_width_s))
        return cls(tuple(segs), pulse_width_s=pulse_width_s)

    @property
    def total_duration_s(self) -> float:
        return sum(s.duration_s for s in self.segments)


@dataclass(frozen=True)
class ExposureTrace:
    """Sampled observables during an exposure, measured at the run voltage."""

    t_s: np.ndarray
    power_w: np.ndarray
    delta_theta_rad: np.ndarray
    transmittance: np.ndarray
    attenuation_db: np.ndarray
    m_db: np.ndarray

    @property
    def final_m_db(self) -> float:
        return float(self.m_db[-1])


@dataclass(frozen=True)
class ExposureResult:
    device: MziDevice
    trace: ExposureTrace


class _TraceBuilder:
    def __init__(self, baseline_mu: float) -> None:
        if baseline_mu <= 0.0:
            raise ValueError("baseline output must be positive")
        self.base = baseline_mu
        self.mu_in = 1.0
        self.rows: list[tuple[float, float, float, float, float, float]] = []

    def add(self, t: float, power: float, dev: MziDevice, v_app: float) -> None:
        theta = dev.total_phase(v_app)
        out = dev.output_mpn(self.mu_in, v_app)
        trans = dev.transmittance(v_app)
        atten = -10.0 * math.log10(trans) if trans > 0.0 else math.inf
        m = 10.0 * math.log10(out / self.base) if out > 0.0 else -math.inf
        self.rows.append((t, power, theta, trans, atten, m))

    def build(self) -> ExposureTrace:
        cols = list(zip(*self.rows))
        return ExposureTrace(*(np.array(c, dtype=float) for c in cols))


def run_program(
    device: MziDevice,
    program: IrradiationProgram,
    mu_in: float,
    v_app_v: float,
    dt_s: float,
) -> ExposureResult:
    """Apply a power program at fixed drive voltage, sampling every ``dt_s``.

    Magnification is measured against the device's own output at t = 0, so a
    zero-power program on a frozen device gives a flat 0 dB series.  For
    pulse-train programs ``dt_s`` must resolve the pulse (at most a quarter
    width), otherwise the trace would alias the duty structure.
    """
    if dt_s <= 0.0:
        raise ValueError("dt_s must be positive")
    if program.pulse_width_s is not None and dt_s > program.pulse_width_s / 4.0:
        raise ValueError("dt_s too coarse for pulse train: need dt_s <= pulse_width_s / 4")
    tb = _TraceBuilder(device.output_mpn(mu_in, v_app_v))
    tb.mu_in = mu_in
    tb.add(0.0, program.segments[0].power_w, device, v_app_v)
    t = 0.0
    dev = device
    for seg in program.segments:
        left = seg.duration_s
        while left > 0.0:
            step = min(dt_s, left)
            dev = dev.exposed(seg.power_w, v_app_v, step)
            left -= step
            t += step
            tb.add(t, seg.power_w, dev, v_app_v)
    return ExposureResult(dev, tb.build())


# -- pre-treatment and initialization ----------------------------------------


@dataclass(frozen=True)
class PreTreatmentPlan:
    """Saturating exposure at a fixed drive voltage."""

    v_app_v: float = 0.0
    i_ir_w: float = 12e-6
    saturation_epsilon: float = 1e-4

    def __post_init__(self) -> None:
        if self.i_ir_w < 0.0:
            raise ValueError("i_ir_w must be >= 0")
        if not 0.0 < self.saturation_epsilon < 0.1:
            raise ValueError("saturation_epsilon must be in (0, 0.1)")


@dataclass(frozen=True)
class SaturationRun:
    device: MziDevice
    converged: bool
    steps: int
    elapsed_s: float
    trace: ExposureTrace


def _saturate(
    device: MziDevice,
    power_w: float,
    v_app_v: float,
    dt_s: float,
    saturation_epsilon: float,
    max_steps: int,
) -> SaturationRun:
    """Step until both arms are within ``saturation_epsilon`` of steady state.

    The criterion is the projected relative field move over one relaxation
    time, so it is insensitive to ``dt_s``.  Running out of the step budget
    reports converged = False with the partial state, it does not raise.
    """
    if power_w <= 0.0:
        raise ValueError("saturation runs need positive power")
    if dt_s <= 0.0:
        raise ValueError("dt_s must be positive")
    p1, p2 = device.split_irradiation(power_w)
    e1, e2 = device.arm_fields(v_app_v)
    targets = (
        steady_state_field(device.material, p1, e1),
        steady_state_field(device.material, p2, e2),
    )

    def settled(dev: MziDevice) -> bool:
        k = 1.0 - math.exp(-1.0)
        for target, arm in zip(targets, (dev.arm1, dev.arm2)):
            scale = max(abs(target), 1e-30)
            if abs(target - arm.field_v_per_m) * k / scale > saturation_epsilon:
                return False
        return True

    tb = _TraceBuilder(device.transmittance(v_app_v))
    tb.add(0.0, power_w, device, v_app_v)
    dev = device
    steps = 0
    while steps < max_steps and not settled(dev):
        dev = dev.exposed(power_w, v_app_v, dt_s)
        steps += 1
        tb.add(steps * dt_s, power_w, dev, v_app_v)
    return SaturationRun(dev, settled(dev), steps, steps * dt_s, tb.build())


@dataclass(frozen=True)
class PreTreatResult:
    device: MziDevice
    converged: bool
    steps: int
    elapsed_s: float
    bias_shift_rad: float
    trace: ExposureTrace


def pre_treat(
    device: MziDevice,
    plan: PreTreatmentPlan,
    dt_s: float = 60.0,
    max_steps: int = 100_000,
) -> PreTreatResult:
    """Saturate at the plan's voltage, then hand the device off dark.

    Beam and field are removed together, which traps the stored charge, so
    the returned device is in frozen decay mode regardless of how the input
    was configured.  The reported shift is the change of the zero-volt bias
    phase relative to the starting state.
    """
    if plan.i_ir_w == 0.0:
        trace = _single_row_trace(device, plan.v_app_v)
        return PreTreatResult(device, True, 0, 0.0, 0.0, trace)
    run = _saturate(device, plan.i_ir_w, plan.v_app_v, dt_s, plan.saturation_epsilon, max_steps)
    treated = replace(run.device, decay_mode=DecayMode.FROZEN)
    shift = treated.total_phase(0.0) - device.total_phase(0.0)
    return PreTreatResult(treated, run.converged, run.steps, run.elapsed_s, shift, run.trace)


def _single_row_trace(device: MziDevice, v_app_v: float) -> ExposureTrace:
    tb = _TraceBuilder(device.transmittance(v_app_v))
    tb.add(0.0, 0.0, device, v_app_v)
    return tb.build()


@dataclass(frozen=True)
class InitResult:
    device: MziDevice
    converged: bool
    steps: int
    elapsed_s: float
    trace: ExposureTrace


INIT_POWER_W = 4.39e-6


def initialize_device(
    device: MziDevice,
    dt_s: float = 60.0,
    power_w: float = INIT_POWER_W,
    saturation_epsilon: float = 1e-6,
    max_steps: int = 200_000,
) -> InitResult:
    """Drive both arms to the reproducible zero-volt saturated state.

    Whatever attenuation history the device carries, the end state depends
    only on the exposure power, so the voltage curve is restored to the
    post-initialization reference.  The epsilon here is much tighter than for
    pre-treatment: near a deep working point the dB curve is steeply
    sensitive to residual phase, and the restore tolerance budget is small.
    """
    run = _saturate(device, power_w, 0.0, dt_s, saturation_epsilon, max_steps)
    return InitResult(run.device, run.converged, run.steps, run.elapsed_s, run.trace)


# -- closed-loop pulse injection ----------------------------------------------


SETTLE_PERIODS = 5


@dataclass(frozen=True)
class PulseController:
    """Duty-cycle regulation of periodic bright pulses.

    Each period fires one pulse of width duty * period at the peak power,
    waits out the rest of the period dark, measures the magnification, and
    nudges the duty by ``gain_duty_per_db`` times the dB error, clamped to
    [duty_min, duty_max].  The clamped incremental update is what produces
    the ramp-then-hold shape: the duty rails high while the error is large
    and walks itself down to the replenishment level once the target is
    reached.  Measurement is the simulator's noiseless magnification unless
    ``noise_db`` is set, which adds Gaussian dB noise to each reading.
    """

    target_m_db: float
    duty_min: float = 1e-5
    duty_max: float = 1.0
    gain_duty_per_db: float = 0.1
    settle_tol_db: float = 0.1
    period_s: float = 10.0
    peak_power_w: float = 12e-6
    noise_db: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.duty_min < self.duty_max <= 1.0:
            raise ValueError("need 0 < duty_min < duty_max <= 1")
        if self.gain_duty_per_db <= 0.0:
            raise ValueError("gain_duty_per_db must be positive")
        if self.settle_tol_db <= 0.0:
            raise ValueError("settle_tol_db must be positive")
        if self.period_s <= 0.0 or self.peak_power_w <= 0.0:
            raise ValueError("period_s and peak_power_w must be positive")
        if self.noise_db < 0.0:
            raise ValueError("noise_db must be >= 0")


@dataclass(frozen=True)
class PulseTrace:
    t_s: np.ndarray
    duty: np.ndarray
    power_w: np.ndarray
    m_db: np.ndarray
    error_db: np.ndarray


@dataclass(frozen=True)
class PulseResult:
    device: MziDevice
    feasible: bool
    settled: bool
    periods: int
    saturated_m_db: float
    final_duty: float
    ramp_duty_max: float      # nan if the run settled without leaving tolerance
    holding_duty_mean: float  # mean duty over the hold window or terminal streak
    held_max_abs_error_db: float  # worst error in the hold window; nan if none ran
    trace: PulseTrace


def single_period_gain_db(
    device: MziDevice, ctrl: PulseController, mu_in: float, v_app_v: float
) -> float:
    """Magnification gained by one full-duty period from the given state.

    The relaxation law makes this the largest move any single period can
    produce from states at or above this one, so evaluated on a pristine
    device it bounds how far the closed loop can overshoot its target.
    """
    baseline = device.output_mpn(mu_in, v_app_v)
    after = device.exposed(ctrl.peak_power_w, v_app_v, ctrl.period_s)
    return after.magnification_db(v_app_v, baseline, mu_in)


def pulse_inject_to_target(
    device: MziDevice,
    ctrl: PulseController,
    mu_in: float,
    v_app_v: float,
    max_periods: int = 2000,
    hold_periods: int = 0,
    rng: Optional[np.random.Generator] = None,
) -> PulseResult:
    """Run the duty-cycle loop until the magnification settles on target.

    Targets beyond the saturated magnification at the peak power are reported
    as infeasible, never silently saturated; the device comes back untouched.
    The loop starts at duty_min, fires every period (the clamp keeps the duty
    strictly positive), and terminates once the error stays within tolerance
    for ``SETTLE_PERIODS`` consecutive periods, or at ``max_periods`` with
    settled = False.  A nonzero ``hold_periods`` keeps the loop regulating
    that many extra periods after settling, to demonstrate the hold; with
    ``DecayMode.DARK_DECAY`` the duty then rides at the level whose
    per-period build-up replenishes one period of decay.
    """
    baseline = device.output_mpn(mu_in, v_app_v)
    if baseline <= 0.0:
        raise ValueError("baseline output must be positive")
    sat_m = device.equilibrated(ctrl.peak_power_w, v_app_v).magnification_db(
        v_app_v, baseline, mu_in
    )
    empty = PulseTrace(*(np.empty(0) for _ in range(5)))
    if abs(ctrl.target_m_db) > sat_m:
        return PulseResult(
            device, False, False, 0, sat_m, math.nan, math.nan, math.nan, math.nan, empty
        )
    if ctrl.noise_db > 0.0 and rng is None:
        raise ValueError("noise_db > 0 needs an rng")

    rows: list[tuple[float, float, float, float, float]] = []
    dev = device
    duty = ctrl.duty_min
    streak = 0
    settled_at: Optional[int] = None
    period = 0
    while period < max_periods:
        period += 1
        dev = dev.exposed(ctrl.peak_power_w, v_app_v, duty * ctrl.period_s)
        if duty < 1.0:
            dev = dev.exposed(0.0, v_app_v, (1.0 - duty) * ctrl.period_s)
        m = dev.magnification_db(v_app_v, baseline, mu_in)
        if ctrl.noise_db > 0.0:
            m += ctrl.noise_db * float(rng.standard_normal())
        error = ctrl.target_m_db - m
        rows.append((period * ctrl.period_s, duty, ctrl.peak_power_w, m, error))
        if settled_at is None:
            streak = streak + 1 if abs(error) <= ctrl.settle_tol_db else 0
            if streak >= SETTLE_PERIODS:
                settled_at = period
        if settled_at is not None and period - settled_at >= hold_periods:
            break
        duty = float(
            np.clip(duty + ctrl.gain_duty_per_db * error, ctrl.duty_min, ctrl.duty_max)
        )

    cols = list(zip(*rows))
    trace = PulseTrace(*(np.array(c, dtype=float) for c in cols))
    settled = settled_at is not None
    if settled and hold_periods > 0:
        hold_lo = settled_at           # rows after the settle period
    elif settled:
        hold_lo = settled_at - streak  # the terminal in-tolerance streak
    else:
        hold_lo = len(rows)
    hold_duty = trace.duty[hold_lo:]
    hold_err = trace.error_db[settled_at:] if settled and hold_periods > 0 else trace.error_db[:0]
    ramp = trace.duty[: settled_at - streak] if settled else trace.duty
    return PulseResult(
        device=dev,
        feasible=True,
        settled=settled,
        periods=period,
        saturated_m_db=sat_m,
        final_duty=float(trace.duty[-1]),
        ramp_duty_max=float(np.max(ramp)) if ramp.size else math.nan,
        holding_duty_mean=float(np.mean(hold_duty)) if hold_duty.size else math.nan,
        held_max_abs_error_db=float(np.max(np.abs(hold_err))) if hold_err.size else math.nan,
        trace=trace,
    )
