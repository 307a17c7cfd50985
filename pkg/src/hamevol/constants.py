"""Physical constants and unit conversions (natural units, hbar = c = 1).

Lengths are expressed in 1/eV and energies in eV throughout the package.
"""

import math

#: fermi -> 1/MeV
FERMI_MEV = 1.0 / 197.326
#: metre -> 1/eV
M_EV = FERMI_MEV * 1e15 / 1e6
#: centimetre -> 1/eV
CM_EV = 1e-2 * M_EV

#: Fermi constant in 1/eV^2. Deliberately 1.66e-23 rather than the measured
#: 1.1664e-23, so results stay comparable with earlier runs of this model
GF = 1.66e-23
#: Avogadro number
NA = 6.022e23

#: Radius of the Sun in 1/eV
RSUN = 6.961e8 * M_EV
#: Radius of the Earth in 1/eV
REARTH = 6.378e6 * M_EV

#: One N_A / cm^3 expressed in eV^3
AVOGADRO_PER_CM3_EV3 = NA / CM_EV**3

#: Matter potential (eV) per unit electron density (N_A / cm^3) for neutrinos
POTENTIAL_PER_DENSITY = math.sqrt(2.0) * GF * AVOGADRO_PER_CM3_EV3
