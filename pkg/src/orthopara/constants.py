"""Physical constants shared across the package.

All energies are handled internally in eV, times in seconds, rates in s^-1.
"""

# Reduced Planck constant, eV*s (CODATA).  The single source of hbar for the
# whole package; do not redefine elsewhere.
HBAR_EV_S = 6.582119569e-16

# Wavenumber-to-energy conversion: 1 cm^-1 in eV.  Accepted at the parsing
# boundary only; everything downstream works in eV.
EV_PER_CM1 = 1.239841984e-4

# Absolute tolerance on |alpha|^2 + |beta|^2 = 1 for amplitude pairs.
NORM_TOL = 1e-12
