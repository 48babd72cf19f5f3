"""Numerical model of the driven 0-pi superconducting qubit.

Submodules
----------
circuit      mesh matrices, irrotational constraint and effective capacitance
parameters   parameter sets, kinetic coefficients and flux configurations
basis        truncated single-mode operators and Kronecker-sum operators
hamiltonian  static and drive Hamiltonians
spectrum     eigensolves, flux sweeps, avoided crossings, potential planes
noise        flux-noise transition rates and relaxation
dynamics     Magnus propagation, survival records and amplitude statistics
cli          preset runner (``python -m zeropi``)
"""
from .basis import HilbertSpace, KronSum
from .circuit import CircuitTopology, reduce_circuit, zero_pi_topology
from .dynamics import DrivenSystem, EvolutionRecord, Propagator, evolve, magnus_step
from .hamiltonian import ZeroPiModel, build_H0, build_Ht
from .noise import NoiseModel, flux_derivative_operator, transition_rate
from .parameters import PARAMETER_SETS, SET1, SET2, SET3, FluxConfiguration, ParameterSet, kinetic_coefficients
from .spectrum import AvoidedCrossing, SpectrumSweep, eigensolve, find_avoided_crossings, sweep_flux

__all__ = [
    "AvoidedCrossing",
    "CircuitTopology",
    "DrivenSystem",
    "EvolutionRecord",
    "FluxConfiguration",
    "HilbertSpace",
    "KronSum",
    "NoiseModel",
    "PARAMETER_SETS",
    "ParameterSet",
    "Propagator",
    "SET1",
    "SET2",
    "SET3",
    "SpectrumSweep",
    "ZeroPiModel",
    "build_H0",
    "build_Ht",
    "eigensolve",
    "evolve",
    "find_avoided_crossings",
    "flux_derivative_operator",
    "kinetic_coefficients",
    "magnus_step",
    "reduce_circuit",
    "sweep_flux",
    "transition_rate",
    "zero_pi_topology",
]
