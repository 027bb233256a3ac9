"""Density-dependent material: ash-density conversion and the power-law
modulus / yield-stress maps, with element-level property averaging.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields

import numpy as np

from ..errors import DataError
from .grid import VoxelGrid

ASH_INTERCEPT = 0.0633
ASH_SLOPE = 0.887


def ash_density(rho_cha):
    """Ash density (g/cm^3) from calibrated QCT density."""
    rho = np.asarray(rho_cha, dtype=float)
    if np.any(rho < 0):
        raise DataError("rho_cha must be non-negative")
    out = ASH_INTERCEPT + ASH_SLOPE * rho
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MaterialModel:
    """Power-law modulus and yield maps plus post-yield shape.

    E(rho_ash) = c_E * rho_ash^p_E (MPa), clamped at E_min;
    sigma_y(rho_ash) = c_S * rho_ash^p_S (MPa).  Post yield: a plateau at
    f_plateau * sigma_y up to eps_plateau equivalent plastic strain, then
    linear softening with slope f_soft * E down to a floor.
    """

    c_E: float = 14900.0
    p_E: float = 1.86
    c_S: float = 102.0
    p_S: float = 1.8
    nu: float = 0.3
    f_plateau: float = 1.0
    f_soft: float = -0.05
    E_min: float = 0.01
    eps_plateau: float = 0.01
    floor_frac: float = 0.05

    def __post_init__(self):
        if min(self.c_E, self.p_E, self.c_S, self.p_S) <= 0:
            raise DataError("power-law constants must be positive")
        if not 0.0 < self.nu < 0.5:
            raise DataError("nu must be in (0, 0.5)")
        if not 0.0 < self.f_plateau <= 1.0:
            raise DataError("f_plateau must be in (0, 1]")
        if self.f_soft > 0:
            raise DataError("f_soft must be <= 0")
        if self.E_min <= 0:
            raise DataError("E_min must be positive")
        if self.eps_plateau <= 0 or not 0.0 <= self.floor_frac < 1.0:
            raise DataError("bad post-yield parameters")

    def modulus(self, rho_ash):
        e = self.c_E * np.power(np.asarray(rho_ash, dtype=float), self.p_E)
        return np.maximum(e, self.E_min)

    def yield_stress(self, rho_ash):
        return self.c_S * np.power(np.asarray(rho_ash, dtype=float), self.p_S)

    @classmethod
    def from_json(cls, doc: dict) -> "MaterialModel":
        known = {f.name for f in fields(cls)}
        bad = set(doc) - known
        if bad:
            raise DataError(f"unknown material fields: {sorted(bad)}")
        return cls(**doc)

    def to_json(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def element_fields(grid: VoxelGrid, material: MaterialModel):
    """Per-element (modulus, yield stress) arrays for a 1:1 voxel mesh.

    Each property is evaluated per voxel from the ash density and then
    used directly (one voxel per element).
    """
    rho_ash = ash_density(grid.rho_cha)
    return material.modulus(rho_ash), material.yield_stress(rho_ash)


def element_properties(grid: VoxelGrid, element_index, material: MaterialModel,
                       span=(1, 1, 1)):
    """Volume-fraction-weighted element properties.

    element_index addresses an element made of `span` voxels per axis
    starting at voxel element_index * span.  Properties are computed per
    voxel and averaged with equal volume fractions (the lattice is uniform).
    """
    ex, ey, ez = element_index
    sx, sy, sz = span
    nx, ny, nz = grid.dims
    x0, y0, z0 = ex * sx, ey * sy, ez * sz
    if x0 < 0 or y0 < 0 or z0 < 0 or x0 + sx > nx or y0 + sy > ny or z0 + sz > nz:
        raise DataError(f"element index {element_index} out of range for span {span}")
    block = grid.rho_cha[x0:x0 + sx, y0:y0 + sy, z0:z0 + sz]
    rho_ash = ash_density(block)
    e = float(np.mean(material.modulus(rho_ash)))
    sy_ = float(np.mean(material.yield_stress(rho_ash)))
    return max(e, material.E_min), sy_


def material_to_file(material: MaterialModel, control, path) -> None:
    doc = {"material": material.to_json(), "control": control.to_json()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def material_from_file(path):
    from .solver import SolveControl
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"material file not found: {path}")
    except json.JSONDecodeError as exc:
        raise DataError(f"bad material JSON: {exc}")
    material = MaterialModel.from_json(doc.get("material", {}))
    control = SolveControl.from_json(doc.get("control", {}))
    return material, control
