import pytest

from skateseg.core import H36M17, PoseSequence
from skateseg.taxonomy import Level, build_taxonomy


@pytest.fixture(scope="session")
def set_taxonomy():
    return build_taxonomy(Level.SET)


@pytest.fixture(scope="session")
def element_taxonomy():
    return build_taxonomy(Level.ELEMENT)


@pytest.fixture
def random_pose():
    """Factory for random mm-scale 3D pose sequences on the default rig."""

    def make(rng, t=5, confidence=False):
        frames = rng.normal(scale=300.0, size=(t, 17, 3)) + rng.normal(scale=2000.0, size=3)
        conf = rng.uniform(0.0, 1.0, size=(t, 17)) if confidence else None
        return PoseSequence(rig=H36M17, frames=frames, fps=30.0,
                            confidence=conf)

    return make
