"""Scenario configuration: flat-sectioned INI with a total schema.

Every tunable of the simulator lives under one typed, unit-suffixed key
(``_w``, ``_db``, ``_s``, ``_nm``, ...).  A config is accepted only if every
section and key is known and every value parses and passes its range check;
nothing runs on a partially-understood file.  Defaults reproduce the
calibrated bench device, so an empty file, or no file at all, is already a
complete scenario.

The canonical serialization (sorted ``section.key = value`` lines with
shortest round-trip float formatting) feeds the run hash.  The output
directory is deliberately excluded from the hash: where results land is not
part of the scenario's identity, and the determinism guarantee (same hash,
same CSV bytes) is expected to hold across different output directories.

User-defined budget components get their own ``[component:<name>]`` sections
whose keys are ``<wavelength>_nm_db`` entries; values are plain dB numbers or
instrument-floor strings like ``>78``.
"""

from __future__ import annotations

import hashlib
import math
import re
from configparser import ConfigParser
from configparser import Error as IniError
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Mapping, Optional, Union

from . import budget as budget_mod
from . import calibration
from .attack import PreTreatmentPlan, PulseController
from .budget import ComponentLoss, InjectionPath, LossValue, parse_loss_entry
from .device import MziDevice
from .photorefractive import DecayMode, GeometryParams, MaterialParams
from .security import ESTIMATORS, QkdScenario


class ConfigError(ValueError):
    """Anything wrong with a scenario config; messages carry the key path."""


# -- value parsing and range checks --------------------------------------------

Check = Callable[[object], Optional[str]]


def _parse_float(raw: str, path: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{path}: expected a number, got {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{path}: must be finite")
    return value


def _parse_int(raw: str, path: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{path}: expected an integer, got {raw!r}") from None


def _parse_bool(raw: str, path: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"{path}: expected true or false, got {raw!r}")


def _parse_str(raw: str, path: str) -> str:
    return raw.strip()


def _parse_float_list(raw: str, path: str) -> tuple[float, ...]:
    items = [s.strip() for s in raw.split(",")]
    if items == [""]:
        return ()
    return tuple(_parse_float(s, path) for s in items)


def _parse_str_list(raw: str, path: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in raw.split(",") if s.strip())


def _require(pred: Callable[[object], bool], message: str) -> Check:
    return lambda v: None if pred(v) else message


_POSITIVE = _require(lambda v: v > 0, "must be > 0")
_NON_NEGATIVE = _require(lambda v: v >= 0, "must be >= 0")
_UNIT_OPEN = _require(lambda v: 0 < v < 1, "must be in (0, 1)")
_EACH_POSITIVE = _require(lambda v: all(x > 0 for x in v), "every entry must be > 0")
_EACH_NON_NEGATIVE = _require(lambda v: all(x >= 0 for x in v), "every entry must be >= 0")


def _choice(*options: str) -> Check:
    return _require(lambda v: v in options, "must be one of: " + ", ".join(options))


@dataclass(frozen=True)
class _Key:
    default: object
    parse: Callable[[str, str], object]
    checks: tuple[Check, ...] = ()


def _float_key(default: float, *checks: Check) -> _Key:
    return _Key(default, _parse_float, checks)


def _int_key(default: int, *checks: Check) -> _Key:
    return _Key(default, _parse_int, checks)


# -- schema ---------------------------------------------------------------------

_COMPONENT_SECTION = re.compile(r"component:([a-z][a-z0-9_]*)")
_COMPONENT_KEY = re.compile(r"(\d+)_nm_db")


@lru_cache(maxsize=None)
def _schema() -> dict[str, dict[str, _Key]]:
    # Material and geometry defaults are the fitted bench calibration; any key
    # can be overridden individually without retriggering the fit.
    mat = calibration.default_material()
    geo = calibration.default_geometry()
    return {
        "material": {
            "refractive_index": _float_key(mat.refractive_index, _POSITIVE),
            "r33_m_per_v": _float_key(mat.r33_m_per_v, _POSITIVE),
            "mode_overlap": _float_key(mat.mode_overlap, _POSITIVE),
            "photovoltaic_const": _float_key(mat.photovoltaic_const, _POSITIVE),
            "absorption_per_m": _float_key(mat.absorption_per_m, _POSITIVE),
            "photocond_per_w": _float_key(mat.photocond_per_w, _POSITIVE),
            "dark_conductivity_s_per_m": _float_key(
                mat.dark_conductivity_s_per_m, _POSITIVE
            ),
            "rel_permittivity": _float_key(mat.rel_permittivity, _POSITIVE),
            "sublinear_exponent": _int_key(
                mat.sublinear_exponent, _require(lambda v: v >= 1, "must be >= 1")
            ),
            "crossover_power_w": _float_key(mat.crossover_power_w, _POSITIVE),
        },
        "geometry": {
            "arm_length_m": _float_key(geo.arm_length_m, _POSITIVE),
            "electrode_length_m": _float_key(geo.electrode_length_m, _POSITIVE),
            "electrode_gap_m": _float_key(geo.electrode_gap_m, _POSITIVE),
            "signal_wavelength_nm": _float_key(geo.signal_wavelength_m * 1e9, _POSITIVE),
            "irradiation_wavelength_nm": _float_key(
                geo.irradiation_wavelength_m * 1e9, _POSITIVE
            ),
            "effective_length_m": _float_key(geo.effective_length_m, _POSITIVE),
        },
        "device": {
            "v_pi_v": _float_key(calibration.V_PI_V, _POSITIVE),
            "working_point_v": _float_key(calibration.WORKING_POINT_V),
            "residual_bias_rad": _float_key(
                calibration.RESIDUAL_BIAS_RAD,
                _require(lambda v: 0 < v < math.pi, "must be in (0, pi)"),
            ),
            "signal_split": _float_key(calibration.SIGNAL_SPLIT, _UNIT_OPEN),
            "irradiation_split": _float_key(calibration.IRRADIATION_SPLIT, _UNIT_OPEN),
            "irradiation_coupling_db": _float_key(
                calibration.IRRADIATION_COUPLING_DB, _NON_NEGATIVE
            ),
            "polarization_loss_db": _float_key(
                0.0, _require(lambda v: 0 <= v <= 0.93, "must be in [0, 0.93]")
            ),
            "decay_mode": _Key(
                DecayMode.DARK_DECAY.value, _parse_str, (_choice("frozen", "dark_decay"),)
            ),
        },
        "pe_curve": {
            "powers_w": _Key(
                (3e-9, 3e-8, 3e-7, 1e-6, 3e-6, 6.26e-6, 1.2e-5, 2e-5),
                _parse_float_list,
                (_EACH_POSITIVE,),
            ),
            "trace_points": _int_key(200, _require(lambda v: v >= 2, "must be >= 2")),
            "trace_duration_tau": _float_key(5.0, _POSITIVE),
        },
        "voltage_curve": {
            "v_min_v": _float_key(-12.0),
            "v_max_v": _float_key(12.0),
            "points": _int_key(481, _require(lambda v: v >= 2, "must be >= 2")),
            "pretreat_voltages_v": _Key(
                (-20.0, -15.0, 0.0, 15.0, 20.0), _parse_float_list
            ),
            "pretreat_power_w": _float_key(12e-6, _NON_NEGATIVE),
        },
        "pre_treat": {
            "v_app_v": _float_key(0.0),
            "i_ir_w": _float_key(12e-6, _NON_NEGATIVE),
            "saturation_epsilon": _float_key(
                1e-4, _require(lambda v: 0 < v < 0.1, "must be in (0, 0.1)")
            ),
            "dt_s": _float_key(60.0, _POSITIVE),
            "max_steps": _int_key(100_000, _POSITIVE),
        },
        "init": {
            "power_w": _float_key(4.39e-6, _POSITIVE),
            "saturation_epsilon": _float_key(
                1e-6, _require(lambda v: 0 < v < 0.1, "must be in (0, 0.1)")
            ),
            "dt_s": _float_key(60.0, _POSITIVE),
            "max_steps": _int_key(200_000, _POSITIVE),
        },
        "pulse": {
            "target_m_db": _float_key(30.0),
            "duty_min": _float_key(1e-5, _UNIT_OPEN),
            "duty_max": _float_key(1.0, _require(lambda v: 0 < v <= 1, "must be in (0, 1]")),
            "gain_duty_per_db": _float_key(0.1, _POSITIVE),
            "settle_tol_db": _float_key(0.1, _POSITIVE),
            "period_s": _float_key(10.0, _POSITIVE),
            "peak_power_w": _float_key(12e-6, _POSITIVE),
            "noise_db": _float_key(0.0, _NON_NEGATIVE),
            "max_periods": _int_key(2000, _POSITIVE),
            "hold_periods": _int_key(0, _NON_NEGATIVE),
            "seed": _int_key(1, _NON_NEGATIVE),
        },
        "qkd": {
            "mu": _float_key(0.8, _POSITIVE),
            "nu": _float_key(0.1, _POSITIVE),
            "alpha_db_per_km": _float_key(0.2, _NON_NEGATIVE),
            "eta_bob": _float_key(0.1, _require(lambda v: 0 < v <= 1, "must be in (0, 1]")),
            "y0": _float_key(6e-7, _require(lambda v: 0 <= v < 1, "must be in [0, 1)")),
            "e_det": _float_key(
                0.005, _require(lambda v: 0 <= v <= 0.5, "must be in [0, 0.5]")
            ),
            "e0": _float_key(0.5, _require(lambda v: 0 <= v <= 1, "must be in [0, 1]")),
            "f_ec": _float_key(1.16, _require(lambda v: v >= 1, "must be >= 1")),
            "n_trunc": _int_key(80, _require(lambda v: v >= 20, "must be >= 20")),
            "m_db_grid": _Key(
                (0.0, 4.0, 5.0, 6.0, 6.5), _parse_float_list, (_EACH_NON_NEGATIVE,)
            ),
            "distance_min_km": _float_key(0.0, _NON_NEGATIVE),
            "distance_max_km": _float_key(150.0, _NON_NEGATIVE),
            "distance_step_km": _float_key(2.0, _POSITIVE),
            "m_search_low_db": _float_key(4.0, _NON_NEGATIVE),
            "m_search_high_db": _float_key(9.0, _NON_NEGATIVE),
            "threshold_tol_db": _float_key(1e-3, _POSITIVE),
            "estimator": _Key("decoy", _parse_str, (_choice(*ESTIMATORS),)),
        },
        "budget": {
            "wavelength_nm": _int_key(405, _POSITIVE),
            "fiber_length_km": _float_key(1.0, _NON_NEGATIVE),
            "components": _Key(("dwdm_c33",), _parse_str_list),
            "coupling_scheme": _Key(
                "none", _parse_str, (_choice("none", *sorted(budget_mod.COUPLING_SCHEMES)),)
            ),
            "target_power_w": _float_key(3e-9, _POSITIVE),
            "eve_max_power_w": _float_key(1.0, _POSITIVE),
        },
        "output": {
            "directory": _Key("ipasim-out", _parse_str),
            "svg": _Key(False, _parse_bool),
        },
    }


# -- config object ----------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario: schema values plus user-defined budget components."""

    values: Mapping[str, Mapping[str, object]]
    components: Mapping[str, Mapping[int, LossValue]]

    def get(self, section: str, key: str) -> object:
        return self.values[section][key]

    def with_value(self, section: str, key: str, value: object) -> "ScenarioConfig":
        """Copy with one validated override (used for CLI flag merging)."""
        spec = _schema().get(section, {}).get(key)
        if spec is None:
            raise ConfigError(f"{section}.{key}: unknown key")
        _run_checks(value, spec, f"{section}.{key}")
        values = {s: dict(kv) for s, kv in self.values.items()}
        values[section][key] = value
        return ScenarioConfig(values, self.components)


def _run_checks(value: object, spec: _Key, path: str) -> None:
    for check in spec.checks:
        message = check(value)
        if message is not None:
            raise ConfigError(f"{path}: {message}")


def default_config() -> ScenarioConfig:
    return parse_config("")


def parse_config(text: str) -> ScenarioConfig:
    parser = ConfigParser(interpolation=None, strict=True)
    parser.optionxform = str  # keys are case-sensitive, all lowercase
    try:
        parser.read_string(text)
    except IniError as exc:
        raise ConfigError(f"config syntax: {exc}") from None
    if parser.defaults():
        raise ConfigError("a [DEFAULT] section is not supported")

    schema = _schema()
    values = {s: {k: spec.default for k, spec in keys.items()} for s, keys in schema.items()}
    components: dict[str, dict[int, LossValue]] = {}

    for section in parser.sections():
        if section.startswith("component:"):
            match = _COMPONENT_SECTION.fullmatch(section)
            if match is None:
                raise ConfigError(
                    f"[{section}]: component names must match [a-z][a-z0-9_]*"
                )
            name = match.group(1)
            if name in budget_mod.BUILTIN_COMPONENTS:
                raise ConfigError(f"[{section}]: '{name}' shadows a built-in component")
            entries: dict[int, LossValue] = {}
            for key, raw in parser.items(section):
                key_match = _COMPONENT_KEY.fullmatch(key)
                if key_match is None:
                    raise ConfigError(
                        f"{section}.{key}: unknown key (expected '<wavelength>_nm_db')"
                    )
                try:
                    entries[int(key_match.group(1))] = parse_loss_entry(raw.strip())
                except ValueError as exc:
                    raise ConfigError(f"{section}.{key}: {exc}") from None
            if not entries:
                raise ConfigError(f"[{section}]: needs at least one wavelength entry")
            components[name] = entries
            continue
        if section not in schema:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in parser.items(section):
            spec = schema[section].get(key)
            if spec is None:
                raise ConfigError(f"{section}.{key}: unknown key")
            path = f"{section}.{key}"
            value = spec.parse(raw, path)
            _run_checks(value, spec, path)
            values[section][key] = value

    cfg = ScenarioConfig(values, components)
    _validate_cross(cfg)
    return cfg


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def _validate_cross(cfg: ScenarioConfig) -> None:
    """Constraints that couple keys; per-key ranges are already enforced."""
    vc = cfg.values["voltage_curve"]
    if not vc["v_max_v"] > vc["v_min_v"]:
        raise ConfigError("voltage_curve.v_max_v: must exceed v_min_v")
    pulse = cfg.values["pulse"]
    if not pulse["duty_min"] < pulse["duty_max"]:
        raise ConfigError("pulse.duty_min: must be below duty_max")
    qkd = cfg.values["qkd"]
    if not qkd["nu"] < qkd["mu"]:
        raise ConfigError("qkd.nu: decoy intensity must be below signal intensity mu")
    if not qkd["distance_max_km"] >= qkd["distance_min_km"]:
        raise ConfigError("qkd.distance_max_km: must be >= distance_min_km")
    if not qkd["m_search_high_db"] > qkd["m_search_low_db"]:
        raise ConfigError("qkd.m_search_high_db: must exceed m_search_low_db")
    if not cfg.values["pe_curve"]["powers_w"]:
        raise ConfigError("pe_curve.powers_w: needs at least one power")
    if not qkd["m_db_grid"]:
        raise ConfigError("qkd.m_db_grid: needs at least one magnification")

    b = cfg.values["budget"]
    wavelength = int(b["wavelength_nm"])
    if b["fiber_length_km"] > 0 and wavelength not in budget_mod.BUILTIN_FIBER_DB_PER_KM:
        known = ", ".join(str(w) for w in sorted(budget_mod.BUILTIN_FIBER_DB_PER_KM))
        raise ConfigError(
            f"budget.wavelength_nm: no fiber loss data at {wavelength} nm (known: {known})"
        )
    catalog = set(budget_mod.BUILTIN_COMPONENTS) | set(cfg.components)
    for name in b["components"]:
        if name not in catalog:
            raise ConfigError(
                f"budget.components: unknown component '{name}' "
                f"(known: {', '.join(sorted(catalog))})"
            )
        entries = cfg.components.get(name)
        has_wl = wavelength in entries if entries is not None else (
            wavelength in budget_mod.BUILTIN_COMPONENTS[name].loss_db
        )
        if not has_wl:
            raise ConfigError(
                f"budget.components: '{name}' has no loss entry at {wavelength} nm"
            )
    if b["coupling_scheme"] != "none" and wavelength != 405:
        raise ConfigError(
            "budget.coupling_scheme: coupling schemes are specified at 405 nm only"
        )


# -- canonical serialization and hashing ------------------------------------------


def _canon_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_canon_value(v) for v in value)
    return str(value)


def canonical_text(cfg: ScenarioConfig) -> str:
    """Sorted one-line-per-key rendering; the hash input.

    ``output.directory`` is excluded on purpose: run placement is not part of
    the scenario identity.
    """
    lines = []
    for section in sorted(cfg.values):
        for key in sorted(cfg.values[section]):
            if section == "output" and key == "directory":
                continue
            lines.append(f"{section}.{key} = {_canon_value(cfg.values[section][key])}")
    for name in sorted(cfg.components):
        for wavelength in sorted(cfg.components[name]):
            loss = cfg.components[name][wavelength]
            rendered = (">" if loss.lower_bound else "") + repr(loss.db)
            lines.append(f"component:{name}.{wavelength}_nm_db = {rendered}")
    return "\n".join(lines) + "\n"


def config_sha256(cfg: ScenarioConfig) -> str:
    return hashlib.sha256(canonical_text(cfg).encode("ascii")).hexdigest()


def to_ini_text(cfg: ScenarioConfig) -> str:
    """Round-trippable INI rendering of the full effective config."""
    chunks = []
    for section, keys in cfg.values.items():
        chunks.append(f"[{section}]")
        chunks.extend(f"{key} = {_canon_value(value)}" for key, value in keys.items())
        chunks.append("")
    for name in sorted(cfg.components):
        chunks.append(f"[component:{name}]")
        for wavelength in sorted(cfg.components[name]):
            loss = cfg.components[name][wavelength]
            rendered = (">" if loss.lower_bound else "") + repr(loss.db)
            chunks.append(f"{wavelength}_nm_db = {rendered}")
        chunks.append("")
    return "\n".join(chunks)


# -- domain object builders --------------------------------------------------------


def build_material(cfg: ScenarioConfig) -> MaterialParams:
    m = cfg.values["material"]
    try:
        return MaterialParams(
            refractive_index=m["refractive_index"],
            r33_m_per_v=m["r33_m_per_v"],
            mode_overlap=m["mode_overlap"],
            photovoltaic_const=m["photovoltaic_const"],
            absorption_per_m=m["absorption_per_m"],
            photocond_per_w=m["photocond_per_w"],
            dark_conductivity_s_per_m=m["dark_conductivity_s_per_m"],
            rel_permittivity=m["rel_permittivity"],
            sublinear_exponent=m["sublinear_exponent"],
            crossover_power_w=m["crossover_power_w"],
        )
    except ValueError as exc:
        raise ConfigError(f"material: {exc}") from None


def build_geometry(cfg: ScenarioConfig) -> GeometryParams:
    g = cfg.values["geometry"]
    try:
        return GeometryParams(
            arm_length_m=g["arm_length_m"],
            electrode_length_m=g["electrode_length_m"],
            electrode_gap_m=g["electrode_gap_m"],
            # divide instead of multiplying by 1e-9 so defaults land on the
            # same float as literals like 1550e-9
            signal_wavelength_m=g["signal_wavelength_nm"] / 1e9,
            irradiation_wavelength_m=g["irradiation_wavelength_nm"] / 1e9,
            effective_length_m=g["effective_length_m"],
        )
    except ValueError as exc:
        raise ConfigError(f"geometry: {exc}") from None


def build_device(cfg: ScenarioConfig) -> MziDevice:
    d = cfg.values["device"]
    bias = (
        math.pi
        + d["residual_bias_rad"]
        - 2.0 * math.pi * d["working_point_v"] / d["v_pi_v"]
    )
    try:
        return MziDevice(
            material=build_material(cfg),
            geometry=build_geometry(cfg),
            bias_phase_rad=bias,
            v_pi_v=d["v_pi_v"],
            signal_split=d["signal_split"],
            irradiation_split=d["irradiation_split"],
            irradiation_coupling_db=d["irradiation_coupling_db"],
            polarization_loss_db=d["polarization_loss_db"],
            decay_mode=DecayMode(d["decay_mode"]),
        )
    except ValueError as exc:
        raise ConfigError(f"device: {exc}") from None


def working_point_v(cfg: ScenarioConfig) -> float:
    return float(cfg.get("device", "working_point_v"))


def build_pretreat_plan(cfg: ScenarioConfig) -> PreTreatmentPlan:
    p = cfg.values["pre_treat"]
    return PreTreatmentPlan(
        v_app_v=p["v_app_v"],
        i_ir_w=p["i_ir_w"],
        saturation_epsilon=p["saturation_epsilon"],
    )


def build_controller(cfg: ScenarioConfig) -> PulseController:
    p = cfg.values["pulse"]
    try:
        return PulseController(
            target_m_db=p["target_m_db"],
            duty_min=p["duty_min"],
            duty_max=p["duty_max"],
            gain_duty_per_db=p["gain_duty_per_db"],
            settle_tol_db=p["settle_tol_db"],
            period_s=p["period_s"],
            peak_power_w=p["peak_power_w"],
            noise_db=p["noise_db"],
        )
    except ValueError as exc:
        raise ConfigError(f"pulse: {exc}") from None


def build_scenario(cfg: ScenarioConfig) -> QkdScenario:
    q = cfg.values["qkd"]
    try:
        return QkdScenario(
            mu=q["mu"],
            nu=q["nu"],
            alpha_db_per_km=q["alpha_db_per_km"],
            eta_bob=q["eta_bob"],
            y0=q["y0"],
            e_det=q["e_det"],
            e0=q["e0"],
            f_ec=q["f_ec"],
            n_trunc=q["n_trunc"],
        )
    except ValueError as exc:
        raise ConfigError(f"qkd: {exc}") from None


def build_distances_km(cfg: ScenarioConfig) -> tuple[float, ...]:
    q = cfg.values["qkd"]
    lo, hi, step = q["distance_min_km"], q["distance_max_km"], q["distance_step_km"]
    count = int((hi - lo) / step + 1e-9) + 1
    return tuple(lo + i * step for i in range(count))


def build_path(cfg: ScenarioConfig) -> InjectionPath:
    b = cfg.values["budget"]
    extras = {
        name: ComponentLoss(name, dict(entries))
        for name, entries in cfg.components.items()
    }
    path = budget_mod.standard_path(b["fiber_length_km"], b["components"], extras)
    scheme = b["coupling_scheme"]
    if scheme != "none":
        loss = budget_mod.coupling_plan_loss(scheme)
        coupler = ComponentLoss(
            f"coupling:{scheme}", {405: LossValue(loss.irradiation_loss_405_db)}
        )
        path = path.concat(InjectionPath(components=(coupler,)))
    return path
