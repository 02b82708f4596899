"""Non-perturbative Moyal quantization of the phase plane.

Star products by oscillatory quadrature, quantization into twisted pair
kernels, the action on prequantum sections, polarized states, and the
lattice path integral whose kernel reproduces the Moyal kernel.
"""

from .core import PhaseField, PhaseGrid, PhasePoint, QuadratureWeights
from .groupoid import PairKernel, dequantize, quantize, twisted_convolve
from .lattice import (DegenerateFresnelError, DiskTriangulation, LatticeConfig, VertexAssignment,
                      discrete_action, kernel_fresnel, lattice_star, triangulate_disk)
from .rep import (Polarization, Profile1D, Section, act_kernel, act_polarized, act_triangle,
                  fourier_intertwiner, ladder_check, make_polarized, polarization_residual,
                  transport_phase)
from .starprod import EvaluationSet, hbar_scan, moyal_direct, moyal_fast, moyal_series

__version__ = "0.1.0"

__all__ = [
    "PhaseField", "PhaseGrid", "PhasePoint", "QuadratureWeights",
    "PairKernel", "quantize", "dequantize", "twisted_convolve",
    "DegenerateFresnelError", "DiskTriangulation", "LatticeConfig", "VertexAssignment",
    "discrete_action", "kernel_fresnel", "lattice_star", "triangulate_disk",
    "Polarization", "Profile1D", "Section", "act_kernel", "act_polarized", "act_triangle",
    "fourier_intertwiner", "ladder_check", "make_polarized", "polarization_residual",
    "transport_phase",
    "EvaluationSet", "hbar_scan", "moyal_direct", "moyal_fast", "moyal_series",
]
