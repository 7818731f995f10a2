import numpy as np
import pytest

from wallscribe.config import AppConfig
from wallscribe.contact import ContactParams, Surface, contact_frame
from wallscribe.model import UamParams


@pytest.fixture(scope="session")
def cfg():
    return AppConfig()


@pytest.fixture(scope="session")
def params():
    return UamParams()


@pytest.fixture(scope="session")
def surface():
    return Surface(p0=np.array([2.0, 0.0, 1.0]), n_in=np.array([1.0, 0.0, 0.0]))


@pytest.fixture(scope="session")
def frame(surface):
    return contact_frame(surface, np.array([0.0, 0.0, -1.0]))


@pytest.fixture(scope="session")
def cp():
    return ContactParams()


# --- expensive shared artifacts: the letter-I pipeline is planned and
# simulated once per session and reused by the sim/metrics/acceptance tests


@pytest.fixture(scope="session")
def letter_plan(cfg):
    import time

    from wallscribe import pipeline
    from wallscribe.letters import letter_strokes

    t0 = time.perf_counter()
    res = pipeline.plan_strokes(letter_strokes("I"), cfg)
    res.plan_seconds = time.perf_counter() - t0
    return res


@pytest.fixture(scope="session")
def letter_log(letter_plan, cfg):
    from wallscribe import pipeline

    return pipeline.simulate(letter_plan.trajectory, cfg, seed=42)


@pytest.fixture(scope="session")
def letter_target(letter_plan, cfg):
    from wallscribe import pipeline

    return pipeline.target_raster(letter_plan.waypoints, cfg)


@pytest.fixture(scope="session")
def letter_report(letter_log, letter_plan, letter_target, cfg):
    from wallscribe import pipeline

    return pipeline.evaluate(letter_log, letter_plan.trajectory, letter_target, cfg)
