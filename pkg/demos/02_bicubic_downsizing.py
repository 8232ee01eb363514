"""Stage-1 rendering: squeezing 10x10 sensor frames onto the 5x4 electrode grid.

Bicubic resampling (Catmull-Rom kernel, pixel-center alignment) keeps the
contact shape smooth while shrinking it to electrode resolution.
"""

import numpy as np

from tiltxter import ContactParams, bicubic_downsize, class_of_degrees, kernel_weight, render_contact

# The kernel: 1 at the center, 0 at integer knots, small negative lobes.
ts = np.linspace(-2, 2, 9)
print("t      :", "  ".join(f"{t:5.2f}" for t in ts))
print("W(t)   :", "  ".join(f"{kernel_weight(t):5.2f}" for t in ts))

# Those four-tap weights always sum to one, so flat fields pass through
# untouched -- constant in, constant out.
flat = bicubic_downsize(np.full((10, 10), 3.0))
print("\nconstant 3.0 N field stays:", flat.values.min(), "..", flat.values.max())

# A tilted band keeps its orientation through the reduction.
frame = render_contact(class_of_degrees(45), 25, ContactParams(rng_seed=2, noise_sigma=0.0))
small = bicubic_downsize(frame.right.forces)
print("\n10x10 input (rounded):")
print(np.round(frame.right.forces, 1))
print("\n5x4 downsized (rounded):")
print(np.round(small.values, 2))

# Mirroring the sensor mirrors the output exactly -- the alignment was
# chosen so left/right symmetry survives the resampling.
mirrored = bicubic_downsize(frame.right.forces[:, ::-1])
print("\nmirror symmetry max deviation:",
      np.abs(mirrored.values - small.values[:, ::-1]).max())
