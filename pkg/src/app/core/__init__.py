"""
Core physics of the gouy toolkit.

This package contains the computational components:
- Wavepacket: constants, particle records and derived scales
- Gaussian: closed-form pure packet evolution and the optical analogue
- Coherence: partially coherent states, detector blur and FWHM inversion
- Experiment: slit-width curves and the delta_kx fit
- Oracle: grid propagation and the closed-form verification suite
- Output: structured result records
"""
