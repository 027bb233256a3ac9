"""The four loading conditions and the twelve-parameter extraction.

Stance loads the top face with the bottom fully fixed.  The three fall
cases share fall boundary conditions (bottom held vertically, transverse
motion free, corner pins) and differ by rotating the density phantom about
the long axis: posterior 0, posterolateral 45, lateral 90 degrees.
"""

from __future__ import annotations

from dataclasses import dataclass


from ..datamodel import FeParameterSet
from ..errors import NumericalError
from .curves import (ForceDisplacementCurve, NoYieldDetected, detect_yield_load,
                     energy_to_failure, ultimate_load)
from .grid import VoxelGrid, rotate_grid
from .material import MaterialModel
from .solver import BoundaryCondition, SolveControl, fall_bc, solve, stance_bc


@dataclass(frozen=True)
class LoadCase:
    name: str
    kind: str            # "stance" or "fall"
    rotation_deg: float  # phantom rotation about the long axis

    def boundary_condition(self, dims) -> BoundaryCondition:
        if self.kind == "stance":
            return stance_bc(dims)
        return fall_bc(dims)


LOAD_CASES = (
    LoadCase("stance", "stance", 0.0),
    LoadCase("posterior", "fall", 0.0),
    LoadCase("posterolateral", "fall", 45.0),
    LoadCase("lateral", "fall", 90.0),
)


@dataclass(frozen=True)
class FeResult:
    yield_load: float
    ultimate_load: float
    energy: float
    converged: bool
    increments: int
    yield_detected: bool
    peak_at_end: bool


def solve_load_case(grid: VoxelGrid, material: MaterialModel, case: LoadCase,
                    control: SolveControl) -> ForceDisplacementCurve:
    """Rotate the phantom per the load case and run the solver."""
    g = rotate_grid(grid, case.rotation_deg)
    bc = case.boundary_condition(g.dims)
    return solve(g, material, bc, control)


def extract_result(curve: ForceDisplacementCurve,
                   yield_policy: str = "error") -> FeResult:
    """Pull (yield, ultimate, energy) from a solved curve.

    yield_policy "error" raises when no yield was detected;
    "ultimate" substitutes the ultimate load (flagged in the result).
    """
    ult, idx, peak_at_end = ultimate_load(curve)
    energy = energy_to_failure(curve)
    try:
        yld = detect_yield_load(curve)
        detected = True
    except NoYieldDetected:
        if yield_policy == "error":
            raise
        yld = ult
        detected = False
    yld = min(yld, ult)
    return FeResult(yield_load=yld, ultimate_load=ult, energy=energy,
                    converged=True, increments=curve.force.size - 1,
                    yield_detected=detected, peak_at_end=peak_at_end)


def compute_fe_parameters(grid: VoxelGrid, material: MaterialModel,
                          control: SolveControl,
                          yield_policy: str = "error") -> FeParameterSet:
    """Run all four load cases and assemble the twelve FE parameters."""
    values = {}
    prefix = {"stance": "S", "posterior": "P", "posterolateral": "PL", "lateral": "L"}
    for case in LOAD_CASES:
        try:
            curve = solve_load_case(grid, material, case, control)
            res = extract_result(curve, yield_policy)
        except (NumericalError, NoYieldDetected) as exc:
            raise NumericalError(f"load case {case.name} failed: {exc}") from exc
        p = prefix[case.name]
        values[f"{p}y"] = res.yield_load
        values[f"{p}u"] = res.ultimate_load
        values[f"{p}energy"] = res.energy
    return FeParameterSet(**values)
