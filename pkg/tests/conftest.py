import pytest

import platoonshape as ps


@pytest.fixture(scope="session")
def params():
    return ps.SafetyParams(vehicle_length_l=6.0, a_min=4.0)


@pytest.fixture(scope="session")
def section_v_profile(params):
    """The evaluation scenario profile: 2.6 s -> 1.74 s odd gap, steepness 0.057."""
    return ps.design_profile(2.6, 1.74, 0.057, 0.0, params)


@pytest.fixture(scope="session")
def gains():
    return ps.ControllerGains(p=0.5, p0=0.25, p1=1.0)


@pytest.fixture(scope="session")
def ideal_trace(section_v_profile, gains):
    """One shared ideal-entry run of the evaluation scenario, 10 vehicles."""
    cfg = ps.ScenarioConfig(profile=section_v_profile, gains=gains, n_vehicles=10)
    return ps.simulate_platoon(cfg)
