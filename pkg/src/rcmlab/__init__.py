"""
rcmlab: the random connection model at desk scale.

Simulation of the model on periodic boxes, Ornstein-Zernike deconvolution on
FFT grids, and numerical certification of lace-expansion diagram bounds.
"""

__version__ = "0.1.0"
