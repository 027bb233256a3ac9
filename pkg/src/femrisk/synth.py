"""Seeded synthetic cohort generator.

Each (sex x fracture-status) group is calibrated to target means and SDs
for age, height, weight and the twelve FE parameters.  Within a group, the
FE parameters share one latent "strength" factor so the generated cohort
shows a dominant first principal component; the factor is shifted downward
for fracture groups and drives aBMD_CT and a simulated FRAX score.

Generation is per-subject seeded: the output is a pure function of
(spec, seed) and invariant to generation order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from math import sqrt
from typing import Optional

import numpy as np

from .datamodel import Cohort, FeParameterSet, LOAD_CASE_PARAMS, SubjectRecord
from .errors import DataError

GROUPS = ("male_control", "male_fx", "female_control", "female_fx")
GROUP_SEX = {"male_control": "M", "male_fx": "M",
             "female_control": "F", "female_fx": "F"}
GROUP_FX = {"male_control": 0, "male_fx": 1, "female_control": 0, "female_fx": 1}

CONTINUOUS_VARS = ("age", "height", "weight",
                   "Sy", "Su", "Senergy", "Py", "Pu", "Penergy",
                   "PLy", "PLu", "PLenergy", "Ly", "Lu", "Lenergy")
FE_VARS = CONTINUOUS_VARS[3:]


@dataclass(frozen=True)
class CohortSpec:
    doc: dict

    def __post_init__(self):
        g = self.doc.get("groups", {})
        if set(g) != set(GROUPS):
            raise DataError(f"spec must define exactly the groups {GROUPS}")
        for name, grp in g.items():
            if grp["n"] < 2:
                raise DataError(f"group {name}: n must be >= 2")
            for var in CONTINUOUS_VARS:
                if var not in grp["variables"]:
                    raise DataError(f"group {name}: missing variable {var}")
                v = grp["variables"][var]
                if v["sd"] <= 0:
                    raise DataError(f"group {name}/{var}: SD must be positive")
        for var, l in self.doc["loadings"].items():
            if not 0.0 < l < 1.0:
                raise DataError(f"loading for {var} must be in (0, 1)")
        floor_frac = self.doc.get("floor_frac", 0.01)
        for name, grp in g.items():
            for var in FE_VARS:
                v = grp["variables"][var]
                if floor_frac * v["mean"] > v["mean"] + 4.0 * v["sd"]:
                    raise DataError(f"group {name}/{var}: infeasible truncation floor")

    @property
    def groups(self) -> dict:
        return self.doc["groups"]


def default_spec() -> CohortSpec:
    """The shipped spec with the reference group statistics embedded."""
    text = resources.files("femrisk.data").joinpath("table1_default.json").read_text()
    return CohortSpec(json.loads(text))


def load_spec(path) -> CohortSpec:
    with open(path, encoding="utf-8") as fh:
        return CohortSpec(json.load(fh))


def _mix_seed(seed: int, group_idx: int, subj_idx: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed & 0xFFFFFFFFFFFFFFFF,
                               spawn_key=(group_idx, subj_idx)))


def _draw_subject(spec: CohortSpec, group: str, group_idx: int, subj_idx: int,
                  seed: int) -> SubjectRecord:
    doc = spec.doc
    grp = doc["groups"][group]
    rng = _mix_seed(seed, group_idx, subj_idx)
    fx = GROUP_FX[group]
    sex = GROUP_SEX[group]
    floor_frac = doc.get("floor_frac", 0.01)

    z0 = rng.standard_normal()
    vals = {}
    for var in CONTINUOUS_VARS:
        tgt = grp["variables"][var]
        loading = doc["loadings"].get(var, 0.0)
        eps = rng.standard_normal()
        v = tgt["mean"] + tgt["sd"] * (loading * z0 + sqrt(1.0 - loading**2) * eps)
        floor = max(floor_frac * tgt["mean"], 1e-6)
        vals[var] = max(v, floor)

    # Enforce yield <= ultimate per load case by ordering the drawn pair.
    for _, (yname, uname, _e) in LOAD_CASE_PARAMS.items():
        lo, hi = sorted((vals[yname], vals[uname]))
        vals[yname], vals[uname] = lo, hi

    hs_probs = doc["healstat_probs"]["fx" if fx else "control"]
    healstat = int(rng.choice(5, p=hs_probs)) + 1
    bmdmed = int(rng.random() < doc["bmdmed_p"]["fx" if fx else "control"])

    # Shifted strength factor: lower for fracture groups; drives aBMD/FRAX.
    zf = z0 + doc["fx_factor_shift"] * fx
    ab = doc["abmd_ct"]["male" if sex == "M" else "female"]
    l_a = doc["abmd_ct"]["loading"]
    abmd = ab["mean"] + ab["sd"] * (l_a * zf + sqrt(1.0 - l_a**2) * rng.standard_normal())
    abmd = max(abmd, 0.05)

    frax_prob: Optional[float] = None
    fr = doc.get("frax", {})
    if fr.get("enabled", False):
        age_tgt = grp["variables"]["age"]
        age_z = (vals["age"] - age_tgt["mean"]) / age_tgt["sd"]
        risk = -zf + fr["age_coef"] * age_z + fr["noise_sd"] * rng.standard_normal()
        eta = fr["offset"] + fr["scale"] * risk
        frax_prob = float(1.0 / (1.0 + np.exp(-eta)))

    fe = FeParameterSet(**{k: vals[k] for k in FE_VARS})
    return SubjectRecord(
        id=f"{group}_{subj_idx:05d}", sex=sex,
        age=vals["age"], height=vals["height"], weight=vals["weight"],
        healstat=healstat, bmdmed=bmdmed, abmd_ct=abmd, fx=fx,
        fe=fe, frax_prob=frax_prob,
    )


def generate_cohort(spec: CohortSpec, seed: int,
                    n_override: Optional[dict] = None) -> Cohort:
    """Generate a cohort.  n_override maps group name -> subject count."""
    records = []
    for gi, group in enumerate(GROUPS):
        n = spec.groups[group]["n"] if n_override is None else n_override.get(
            group, spec.groups[group]["n"])
        if n < 2:
            raise DataError(f"group {group}: n must be >= 2")
        for si in range(n):
            records.append(_draw_subject(spec, group, gi, si, seed))
    return Cohort(tuple(records))


@dataclass(frozen=True)
class CalibrationCell:
    group: str
    variable: str
    z_mean: float
    sd_ratio: float
    flagged: bool


def calibration_check(cohort: Cohort, spec: CohortSpec,
                      z_limit: float = 4.0,
                      ratio_bounds=(0.7, 1.4)) -> list[CalibrationCell]:
    """Per-(group, variable) z-scores of sample means and SD ratios."""
    out = []
    for group in GROUPS:
        sx = GROUP_SEX[group]
        fx = GROUP_FX[group]
        members = [r for r in cohort if r.sex == sx and r.fx == fx]
        if not members:
            raise DataError(f"empty group {group}")
        n = len(members)
        for var in CONTINUOUS_VARS:
            tgt = spec.groups[group]["variables"][var]
            if var in FE_VARS:
                sample = np.array([getattr(r.fe, var) for r in members])
            else:
                sample = np.array([getattr(r, var) for r in members])
            se = tgt["sd"] / sqrt(n)
            z = (sample.mean() - tgt["mean"]) / se
            ratio = sample.std(ddof=1) / tgt["sd"]
            flagged = abs(z) > z_limit or not ratio_bounds[0] <= ratio <= ratio_bounds[1]
            out.append(CalibrationCell(group=group, variable=var,
                                       z_mean=float(z), sd_ratio=float(ratio),
                                       flagged=flagged))
    return out
