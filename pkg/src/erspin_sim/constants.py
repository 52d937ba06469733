"""Physical constants used throughout the simulator.

All values are CODATA 2018. They are pinned here rather than taken from
scipy.constants so that derived quantities stay reproducible across scipy
releases (scipy tracks the newest CODATA adjustment).
"""

BOHR_MAGNETON = 9.2740100783e-24  # J/T
PLANCK = 6.62607015e-34           # J s (exact)
HBAR = 1.054571817e-34            # J s
BOLTZMANN = 1.380649e-23          # J/K (exact)
