import numpy as np
import pytest

from grasp_metrics import HandPose, synthesize_population


def random_pose(rng: np.random.Generator, sigma: float = 0.05) -> HandPose:
    """A valid jittered pose; sigma large enough to avoid degenerate geometry."""
    base = synthesize_population(1, int(rng.integers(0, 2**32)), jitter_sigma=sigma)
    return base[0]


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)


@pytest.fixture
def pose(rng) -> HandPose:
    return random_pose(rng)
