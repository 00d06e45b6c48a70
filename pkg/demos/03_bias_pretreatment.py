"""Steering the curve shift with the applied voltage during irradiation.

During exposure the applied field adds to (or screens) the photovoltaic
field, so the sign and size of the final bias shift depend on the voltage
held while the attacker irradiates.  Strong negative voltages push the
shift past a full fringe; near +20 V the applied field cancels the
build-up almost exactly.
"""

from ipasim.attack import PreTreatmentPlan, pre_treat
from ipasim.calibration import WORKING_POINT_V, default_device

dev = default_device()
baseline_mu = dev.output_mpn(1.0, WORKING_POINT_V)
power = 1.2e-5  # treatment power, W delivered to the attenuator input

print(f"treating at {power * 1e6:.0f} uW until the arm fields settle "
      f"(epsilon 1e-4):")
print(f"{'held V':>7}  {'shift (rad)':>11}  {'hours':>6}  {'m at wp (dB)':>12}")
for v_hold in (-20.0, -15.0, 0.0, 15.0, 20.0):
    plan = PreTreatmentPlan(v_app_v=v_hold, i_ir_w=power)
    res = pre_treat(dev, plan)
    assert res.converged
    m_db = res.device.magnification_db(WORKING_POINT_V, baseline_mu)
    print(f"{v_hold:7.0f}  {res.bias_shift_rad:11.4f}  "
          f"{res.elapsed_s / 3600.0:6.2f}  {m_db:12.3f}")

print()
print("shift decreases monotonically with held voltage and spans more than")
print("2*pi across the +-20 V range, so any residual magnification target")
print("is reachable by picking the right treatment voltage.")

# CLI version: ipasim attack pre-treat --out runs/pre
