import numpy as np
import pytest

from femrisk.datamodel import Cohort, FeParameterSet, SubjectRecord


def make_fe(scale: float = 1.0) -> FeParameterSet:
    base = {
        "Sy": 7000.0, "Su": 9000.0, "Senergy": 9500.0,
        "Py": 2300.0, "Pu": 3300.0, "Penergy": 4300.0,
        "PLy": 2200.0, "PLu": 3200.0, "PLenergy": 4100.0,
        "Ly": 2250.0, "Lu": 3250.0, "Lenergy": 4200.0,
    }
    return FeParameterSet(**{k: v * scale for k, v in base.items()})


def make_record(id="s1", sex="M", fx=0, fe_scale=1.0, frax=None) -> SubjectRecord:
    return SubjectRecord(id=id, sex=sex, age=76.0, height=172.0, weight=80.0,
                         healstat=2, bmdmed=0, abmd_ct=0.55, fx=fx,
                         fe=make_fe(fe_scale), frax_prob=frax)


@pytest.fixture(scope="session")
def small_cohort() -> Cohort:
    """Synthetic cohort at reduced group sizes, for fast pipeline tests."""
    from femrisk.synth import default_spec, generate_cohort
    n = {"male_control": 40, "male_fx": 20, "female_control": 50, "female_fx": 25}
    return generate_cohort(default_spec(), seed=11, n_override=n)


@pytest.fixture(scope="session")
def full_cohort() -> Cohort:
    """Synthetic cohort at the default group sizes (345 subjects)."""
    from femrisk.synth import default_spec, generate_cohort
    return generate_cohort(default_spec(), seed=42)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
