"""Shared physical constants and unit conventions.

Internal units throughout the package: wavelengths in nm, times in fs,
lengths of optical elements in mm, angles in rad.  Degrees and nm are
accepted only at the configuration boundary.
"""

import math

# speed of light, nm/fs (exact)
C_NM_PER_FS = 299.792458

TWO_PI = 2.0 * math.pi
