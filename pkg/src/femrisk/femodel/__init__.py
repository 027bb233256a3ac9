"""Desk-scale nonlinear voxel finite-element surrogate."""

from ._kernel import KERNEL_IMPL
from .curves import (ForceDisplacementCurve, NoYieldDetected, detect_yield_load,
                     energy_to_failure, ultimate_load)
from .grid import VoxelGrid, load_grid, rotate_grid, save_grid, uniform_grid
from .loadcases import (LOAD_CASES, FeResult, LoadCase, compute_fe_parameters,
                        extract_result, solve_load_case)
from .material import (MaterialModel, ash_density, element_fields,
                       element_properties, material_from_file, material_to_file)
from .solver import (BoundaryCondition, SolveControl, fall_bc, solve, stance_bc)

__all__ = [
    "KERNEL_IMPL",
    "ForceDisplacementCurve", "NoYieldDetected", "detect_yield_load",
    "energy_to_failure", "ultimate_load",
    "VoxelGrid", "load_grid", "rotate_grid", "save_grid", "uniform_grid",
    "LOAD_CASES", "FeResult", "LoadCase", "compute_fe_parameters",
    "extract_result", "solve_load_case",
    "MaterialModel", "ash_density", "element_fields", "element_properties",
    "material_from_file", "material_to_file",
    "BoundaryCondition", "SolveControl", "fall_bc", "solve", "stance_bc",
]
