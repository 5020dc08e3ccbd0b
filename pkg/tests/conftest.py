"""
Pytest configuration and shared fixtures.

Provides random generators, minimal samples and synthetic scenes for all tests.
"""

import numpy as np
import pytest


def _matching_error(a, b):
    a = [np.asarray(x) for x in a]
    b = [np.asarray(x) for x in b]
    assert len(a) == len(b)
    remaining = list(b)
    worst = 0.0
    for x in a:
        dists = [np.abs(x - y).max() for y in remaining]
        k = int(np.argmin(dists))
        worst = max(worst, dists[k])
        remaining.pop(k)
    return worst


@pytest.fixture
def matching_error():
    """
    Largest coordinate distance after nearest-neighbour matching of two
    solution lists of equal length.
    """
    return _matching_error


@pytest.fixture
def rng():
    """Fresh seeded generator for each test."""
    return np.random.default_rng(1234)


@pytest.fixture
def minimal_sample(rng):
    """
    Three exact gravity-aligned correspondences and the solution
    (Tx, Ty, Tz, t) that generated them.
    """
    from vertical_relpose.solver import synthetic_samples
    return synthetic_samples(rng)


@pytest.fixture
def minimal_system(minimal_sample):
    """Coplanarity system of the minimal sample."""
    from vertical_relpose.coplanarity import build_system
    samples, _ = minimal_sample
    return build_system(samples)


@pytest.fixture
def scene_config():
    """Small synthetic config: defaults with few trials."""
    from vertical_relpose.simulation import SceneConfig
    return SceneConfig(trials=10)


@pytest.fixture
def sideway_instance(scene_config):
    """Noiseless sideway scene, trial 0."""
    from vertical_relpose.simulation import generate_scene
    return generate_scene(scene_config, 0)


@pytest.fixture
def sample_data():
    """
    Sideway sample in the correspondence-file layout.

    Returns a fresh copy for each test to avoid mutations.
    """
    from vertical_relpose.samples import load_sample
    return load_sample("sideway")


@pytest.fixture
def sample_file(tmp_path, sample_data):
    """Sideway sample written as JSON."""
    from vertical_relpose.correspondences import write_correspondences
    return write_correspondences(tmp_path / "pair.json", sample_data)


@pytest.fixture
def tmp_out_dir(tmp_path):
    """
    Temporary directory for outputs.

    Automatically cleaned up after test completes.
    """
    out = tmp_path / "out"
    out.mkdir()
    return out
