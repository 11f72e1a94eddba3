"""
Physical constant defaults.

This module centralizes the constant values used throughout the toolkit.
Settings can be overridden via environment variables (or a .env file).
"""

import os

from dotenv import load_dotenv

load_dotenv()

# CODATA 2018
HBAR = float(os.environ.get("GOUY_HBAR", 1.054571817e-34))
ATOMIC_MASS_UNIT = float(os.environ.get("GOUY_AMU", 1.66053907e-27))

# C70 fullerene: 70 carbon atoms at the standard atomic weight 12.011 u
C70_MASS_U = float(os.environ.get("GOUY_C70_MASS_U", 70 * 12.011))
