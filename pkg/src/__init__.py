"""
gouy - matter-wave Gouy phase toolkit.

This is the main package containing all modules for the toolkit: closed-form
Gaussian wave-packet evolution, partially coherent states, a numerical
oracle, and the analysis of fullerene slit-diffraction widths.
"""

__version__ = "1.0.0"
