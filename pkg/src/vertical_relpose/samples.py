"""
Sample correspondence sets for testing and quick start.

Each sample is a noiseless synthetic scene in the correspondence-file layout
(see :mod:`vertical_relpose.correspondences`), ground truth included. Use as
a starting point for your own files or for testing the library.

Examples:
    Quick start with sample data:

    >>> from vertical_relpose import load_sample, parse_correspondences, estimate_from_rays
    >>> data = parse_correspondences(load_sample("sideway"))
    >>> est = estimate_from_rays(data.correspondences(), data.vertical1, data.vertical2)

    Write a sample to disk for the CLI:

    >>> from vertical_relpose import write_correspondences
    >>> write_correspondences("pair.json", load_sample("planar"))
"""

from typing import Literal
import copy

from .correspondences import correspondences_to_dict
from .simulation import SceneConfig, SyntheticInstance, generate_scene

SampleName = Literal["sideway", "forward", "planar"]

# Scene settings of each sample; seeds are fixed so samples never change
SAMPLE_SCENES = {
    "sideway": SceneConfig(motion="sideway", points=8, seed=11),
    "forward": SceneConfig(motion="forward", points=8, seed=12),
    "planar": SceneConfig(motion="sideway", planar=True, points=8, seed=13),
}


def sample_instance(name: SampleName) -> SyntheticInstance:
    """The synthetic scene behind a sample."""
    if name not in SAMPLE_SCENES:
        raise ValueError(
            f"Unknown sample: '{name}'. Available: {', '.join(SAMPLE_SCENES)}"
        )
    return generate_scene(SAMPLE_SCENES[name], trial=0)


def instance_to_dict(instance: SyntheticInstance, noisy: bool = False) -> dict:
    """
    Correspondence-file dictionary of a synthetic instance.

    Args:
        instance: Scene from :func:`generate_scene`
        noisy: Write the noisy pixels and measured verticals instead of the
            exact ones

    Returns:
        Dictionary with ``ground_truth`` holding the true pose
    """
    pixels = instance.noisy_pixels if noisy else instance.pixels
    v1 = instance.measured_vertical1 if noisy else instance.vertical1
    v2 = instance.measured_vertical2 if noisy else instance.vertical2
    truth = {
        "rotation": [float(x) for x in instance.rotation.ravel()],
        "translation": [float(x) for x in instance.translation],
    }
    return correspondences_to_dict(
        instance.intrinsics, instance.intrinsics, v1, v2, pixels, ground_truth=truth
    )


def load_sample(name: SampleName = "sideway") -> dict:
    """
    Load a sample correspondence set by name.

    Args:
        name: One of:
            - 'sideway': baseline along X
            - 'forward': baseline along the optical axis
            - 'planar': sideway motion, every point on the plane Z = 2

    Returns:
        Dictionary in the correspondence-file layout (a fresh copy)

    Raises:
        ValueError: If name is not recognized

    Examples:
        >>> data = load_sample("forward")
        >>> len(data["matches"])
        8
    """
    return copy.deepcopy(instance_to_dict(sample_instance(name)))
