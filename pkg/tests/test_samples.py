"""
Tests for sample data module.

Ensures sample correspondence sets are correctly structured and accessible.
"""

import numpy as np
import pytest

from vertical_relpose import load_sample, parse_correspondences
from vertical_relpose.geometry import is_rotation
from vertical_relpose.samples import SAMPLE_SCENES, instance_to_dict, sample_instance


class TestLoadSample:
    """Tests for load_sample function"""

    @pytest.mark.parametrize("name", ["sideway", "forward", "planar"])
    def test_layout(self, name):
        """Every sample has the correspondence-file keys and 8 matches"""
        data = load_sample(name)
        assert isinstance(data, dict)
        assert list(data) == [
            "intrinsics1", "intrinsics2", "vertical1", "vertical2", "matches", "ground_truth",
        ]
        assert len(data["matches"]) == 8

    @pytest.mark.parametrize("name", ["sideway", "forward", "planar"])
    def test_parses(self, name):
        """Samples pass file validation"""
        assert len(parse_correspondences(load_sample(name))) == 8

    def test_default_is_sideway(self):
        """The default sample is the sideway one"""
        assert load_sample() == load_sample("sideway")

    def test_ground_truth(self):
        """The stored pose is a rotation and a unit baseline"""
        truth = load_sample("forward")["ground_truth"]
        assert is_rotation(np.reshape(truth["rotation"], (3, 3)))
        assert np.linalg.norm(truth["translation"]) == pytest.approx(1.0)

    def test_planar_depths(self):
        """The planar sample's points lie on Z = 2"""
        np.testing.assert_allclose(sample_instance("planar").world_points[:, 2], 2.0)

    def test_returns_copy(self):
        """Modifying returned data doesn't affect subsequent loads"""
        data1 = load_sample("sideway")
        data1["matches"].clear()
        data2 = load_sample("sideway")
        assert len(data2["matches"]) == 8

    def test_invalid_sample_name(self):
        """Raises ValueError for unknown sample names"""
        with pytest.raises(ValueError, match="Unknown sample"):
            load_sample("diagonal")

    def test_samples_are_stable(self):
        """Fixed seeds give the same sample every time"""
        assert load_sample("planar") == load_sample("planar")
        assert set(SAMPLE_SCENES) == {"sideway", "forward", "planar"}


class TestInstanceToDict:
    """Tests for instance_to_dict"""

    def test_noisy_uses_measured_data(self):
        """noisy=True writes the noisy pixels and measured verticals"""
        instance = sample_instance("sideway")
        exact = instance_to_dict(instance)
        noisy = instance_to_dict(instance, noisy=True)
        assert noisy["vertical1"] == [float(x) for x in instance.measured_vertical1]
        assert noisy["matches"][0]["u1"] == instance.noisy_pixels[0][0].u
        assert exact["matches"][0]["u1"] == instance.pixels[0][0].u
