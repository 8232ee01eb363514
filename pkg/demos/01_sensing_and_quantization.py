"""A first look at the synthetic tactile sensor.

The rig squeezes a deformable pipette between two 10x10 force pads.  Each
pad reports newtons per taxel in [0, 9]; anything under 1 N counts as
"no contact".  This script renders a few frames and shows how forces are
byte-quantized at file and wire boundaries.
"""

import numpy as np

from tiltxter import (
    ContactParams,
    class_of_degrees,
    dequantize_force,
    quantize_force,
    render_contact,
)

SHADES = " .:-=+*#%@"


def ascii_grid(forces):
    rows = []
    for row in forces:
        rows.append("".join(SHADES[int(v / 9.0 * (len(SHADES) - 1))] for v in row))
    return "\n".join(rows)


params = ContactParams(rng_seed=1)

# The pipette leaves a Gaussian-profile band across the pad.  Tilt 0 is a
# horizontal band, +/-90 a vertical one; closing the gripper (0..30)
# presses harder and widens the contact.
for deg in (0, 45, 90):
    frame = render_contact(class_of_degrees(deg), gripper_pos=20, params=params)
    print(f"\n--- tilt {deg:+d} deg, closure 20, right finger ---")
    print(ascii_grid(frame.right.forces))

# Closure sweep: total force grows monotonically with gripper position.
totals = [render_contact(class_of_degrees(0), g, params).right.forces.sum()
          for g in (0, 10, 20, 30)]
print("\ntotal force vs closure 0/10/20/30:", np.round(totals, 1))

# Forces stay float64 in memory and become bytes only at boundaries:
# 0 N -> 0, 9 N -> 255, everything else rounds onto the 256-step scale.
for f in (0.0, 1.0, 4.5, 9.0):
    q = quantize_force(f)
    print(f"quantize {f:4.1f} N -> byte {q:3d} -> back to {dequantize_force(q):.4f} N")

# The worst round-trip error is half a quantization step.
grid = np.linspace(0, 9, 1000)
err = np.abs(dequantize_force(quantize_force(grid)) - grid).max()
print(f"max round-trip error over [0,9]: {err:.5f} N (half step = {9 / 255 / 2:.5f})")
