"""Stage-2 rendering: predefined tilt patterns AND-ed with live contact.

Instead of showing the operator the raw (blurry) downsized forces, the
classifier picks the tilt class and the renderer lights only the cells of
that class's line pattern that actually carry contact.
"""

import numpy as np

from tiltxter import (
    ALL_TILTS,
    ContactParams,
    apply_mask,
    bank,
    bicubic_downsize,
    class_of_degrees,
    encode_electrode,
    render_contact,
)


def show(mask_or_grid, on="#", off="."):
    arr = np.asarray(mask_or_grid)
    return "\n".join("".join(on if v else off for v in row) for row in arr)


# The bank: one 5x4 line pattern per class, rasterized through the grid
# center.  +90 and -90 share a pattern (same line).  The thumb side is
# the horizontal mirror because the finger pads face each other.
for cls in ALL_TILTS:
    print(f"\nindex-finger pattern for {cls.degrees:+d} deg:")
    print(show(bank()[cls].index_finger.cells))

# Masking: take a real 45-degree contact, downsize it, and AND it with
# the 45-degree pattern.  Only pattern cells with >= 1 N survive, and
# they keep their analog force so harder contact still feels stronger.
frame = render_contact(class_of_degrees(45), 28, ContactParams(rng_seed=3))
small = bicubic_downsize(frame.right.forces)
masked = apply_mask(small, bank()[class_of_degrees(45)].index_finger)
print("\ndownsized forces:")
print(np.round(small.values, 1))
print("after AND with the 45-deg pattern:")
print(np.round(masked.values, 1))

# Electrode encoding: off below the 1 N detection floor, then a jump to
# byte 64 (an electrode that is on must be clearly felt) rising to 255
# at the 9 N full scale.
stimulus = encode_electrode(masked)
print("electrode bytes:")
print(stimulus.intensities)
print("carrier:", stimulus.carrier_hz, "Hz")
