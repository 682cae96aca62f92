"""Simulation and verification toolkit for p-rotor walks on Z."""
from .params import PerturbationParams, WalkParams, derive_perturbation
from .walk import Trajectory, run_walk, run_walk_streaming

__all__ = ["PerturbationParams", "WalkParams", "derive_perturbation", "Trajectory",
           "run_walk", "run_walk_streaming"]
__version__ = "0.1.0"
