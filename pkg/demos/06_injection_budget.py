"""Can the attacker actually deliver the treatment power through the link?

Walks the injection path component by component at the irradiation
wavelength and asks what launch power Eve needs at her end of the fiber to
land a given treatment power on the attenuator.  Catalog entries measured
only as "beyond the analyzer floor" carry a lower-bound flag that
propagates through every sum, so an isolator in the path turns the answer
into "at least this much", which is already beyond any plausible source.
"""

from ipasim.budget import (
    countermeasure_margin,
    coupling_plan_loss,
    path_loss,
    required_eve_power,
    standard_path,
)

WAVELENGTH_NM = 405
ANCHOR_W = 3e-9     # delivered power that already magnifies the source 8.3 dB
TREATMENT_W = 1.2e-5  # the pre-treatment / pulse peak power
EVE_MAX_W = 1.0     # a generous bench source

plain = standard_path(1.0, ("dwdm_c33",))
loss = path_loss(plain, WAVELENGTH_NM)
print(f"1 km fiber + add/drop filter at {WAVELENGTH_NM} nm: {loss.db:.1f} dB")
for target, label in ((ANCHOR_W, "8.3 dB magnification"),
                      (TREATMENT_W, "full treatment power")):
    need = required_eve_power(plain, WAVELENGTH_NM, target)
    print(f"  {target:8.1e} W delivered ({label}): "
          f"launch {need.watts * 1e3:9.3f} mW")
report = countermeasure_margin(plain, WAVELENGTH_NM, EVE_MAX_W, ANCHOR_W)
print(f"  a {EVE_MAX_W:.0f} W source clears the anchor target with "
      f"{-report.margin_db:.1f} dB to spare ({report.verdict})")

print()
for blocker in ("isolator", "circulator"):
    guarded = standard_path(1.0, (blocker,))
    loss = path_loss(guarded, WAVELENGTH_NM)
    need = required_eve_power(guarded, WAVELENGTH_NM, ANCHOR_W)
    mark = ">" if loss.lower_bound else " "
    print(f"fiber + one {blocker}: loss {mark}{loss.db:.0f} dB, "
          f"anchor target needs {mark}{need.watts:.2f} W")
    report = countermeasure_margin(guarded, WAVELENGTH_NM, EVE_MAX_W, ANCHOR_W)
    print(f"  verdict with the {EVE_MAX_W:.0f} W source: {report.verdict}")

print()
print("the blocker losses are lower bounds from the measurement floor, so")
print("the real required power is higher still.")

print()
print("coupling plans for reaching the attenuator input inside the module:")
for scheme in ("bs_5050", "bs_9010", "bs_991", "mzi_scheme"):
    plan = coupling_plan_loss(scheme)
    print(f"  {plan.name:10s}  signal penalty {plan.signal_loss_1550_db:5.2f} dB, "
          f"irradiation loss {plan.irradiation_loss_405_db:5.2f} dB")

# CLI version: ipasim budget --out runs/budget
