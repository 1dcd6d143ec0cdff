import numpy as np
import pytest

from styleopt import ArmModel, Trajectory, default_arm, ee_path, forward_kinematics, rotate_base

from oracles import fk_reference, rot_z_3x3


class TestArmModel:
    def test_default_arm(self):
        arm = default_arm()
        assert arm.dof == 3
        assert arm.link_lengths == (1.0, 1.0)
        assert arm.base_height == 0.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(dof=1, link_lengths=()),
            dict(dof=3, link_lengths=(1.0,)),  # needs dof-1 links
            dict(dof=3, link_lengths=(1.0, -0.5)),
            dict(dof=3, link_lengths=(0.0, 0.0)),
            dict(dof=2, link_lengths=(np.nan,)),
            dict(dof=3, link_lengths=(1.0, 1.0), joint_limits=((0, 1),)),
            dict(dof=2, link_lengths=(1.0,), joint_limits=((1.0, -1.0), (0, 1))),
            dict(dof=3, link_lengths=(1.0, 1.0), base_height=-0.1),
        ],
    )
    def test_rejects_invalid_models(self, kwargs):
        with pytest.raises(ValueError):
            ArmModel(**kwargs)

    def test_json_round_trip(self):
        arm = ArmModel(dof=4, link_lengths=(0.8, 1.1, 0.5), joint_limits=((-3, 3),) * 4, base_height=0.2)
        assert ArmModel.from_json(arm.to_json()) == arm


class TestForwardKinematics:
    def test_zero_config_points_straight_up(self):
        pose = forward_kinematics(default_arm(), [0.0, 0.0, 0.0])
        assert np.allclose(pose.position, [0.0, 0.0, 2.0], atol=1e-12)
        assert np.allclose(pose.pointing, [0.0, 0.0, 1.0], atol=1e-12)

    @pytest.mark.parametrize("theta", [0.4, -1.3, 2.9, np.pi])
    def test_base_yaw_alone_keeps_vertical_pose(self, theta):
        pose = forward_kinematics(default_arm(), [theta, 0.0, 0.0])
        assert np.allclose(pose.position, [0.0, 0.0, 2.0], atol=1e-12)

    def test_bent_pose_matches_transform_chain(self):
        # frozen from the homogeneous-transform reference
        pose = forward_kinematics(default_arm(), [np.pi / 2, np.pi / 2, 0.0])
        assert np.allclose(pose.position, [0.0, 2.0, 0.0], atol=1e-12)
        assert np.allclose(pose.pointing, [0.0, 1.0, 0.0], atol=1e-12)

    def test_random_configs_match_transform_chain(self):
        arm = ArmModel(dof=4, link_lengths=(0.8, 1.1, 0.5), base_height=0.2)
        rng = np.random.default_rng(0)
        for _ in range(100):
            q = rng.uniform(-np.pi, np.pi, size=arm.dof)
            pose = forward_kinematics(arm, q)
            pos_ref, point_ref = fk_reference(arm.link_lengths, arm.base_height, q)
            assert np.allclose(pose.position, pos_ref, atol=1e-9)
            assert np.allclose(pose.pointing, point_ref, atol=1e-9)

    def test_pointing_is_always_unit(self):
        arm = default_arm()
        rng = np.random.default_rng(1)
        q = rng.uniform(-np.pi, np.pi, size=(1000, 3))
        norms = [np.linalg.norm(forward_kinematics(arm, qi).pointing) for qi in q]
        assert np.allclose(norms, 1.0, atol=1e-9)

    def test_rejects_bad_configs(self):
        arm = default_arm()
        with pytest.raises(ValueError):
            forward_kinematics(arm, [0.0, 0.0])
        with pytest.raises(ValueError):
            forward_kinematics(arm, [0.0, np.nan, 0.0])


class TestEePath:
    def test_constant_trajectory(self):
        x = Trajectory(waypoints=np.zeros((10, 3)))
        path = ee_path(default_arm(), x)
        assert len(path) == 10
        for pose in path:
            assert np.allclose(pose.position, [0.0, 0.0, 2.0])
            assert np.allclose(pose.pointing, [0.0, 0.0, 1.0])

    def test_yaw_only_motion_spins_pointing(self):
        x = Trajectory(waypoints=np.array([[0.0, 0.5, 0.2], [1.1, 0.5, 0.2]]))
        a, b = ee_path(default_arm(), x)
        assert np.isclose(a.position[2], b.position[2])
        assert np.isclose(np.hypot(*a.position[:2]), np.hypot(*b.position[:2]))
        assert np.isclose(a.pointing[2], b.pointing[2])

    def test_length_matches_waypoints(self):
        rng = np.random.default_rng(2)
        x = Trajectory(waypoints=rng.normal(size=(7, 3)))
        assert len(ee_path(default_arm(), x)) == 7

    def test_dof_mismatch(self):
        with pytest.raises(ValueError):
            ee_path(default_arm(), Trajectory(waypoints=np.zeros((5, 4))))


class TestRotateBase:
    def test_adds_theta_to_base_joint(self):
        q = rotate_base([0.0, 0.3, 0.2], np.pi)
        assert np.allclose(q, [np.pi, 0.3, 0.2])

    def test_zero_theta_is_identity(self):
        q0 = np.array([0.4, -0.2, 1.0])
        assert np.array_equal(rotate_base(q0, 0.0), q0)

    def test_wraps_into_half_open_interval(self):
        assert np.isclose(rotate_base([3.0, 0.0, 0.0], 1.0)[0], 4.0 - 2 * np.pi)
        assert rotate_base([np.pi, 0.0, 0.0], 0.0)[0] == np.pi  # pi stays pi, not -pi

    def test_position_rotates_with_base(self):
        # frozen check: q=(0, pi/2, 0) reaches (2,0,0); a quarter turn moves it to (0,2,0)
        arm = default_arm()
        before = forward_kinematics(arm, [0.0, np.pi / 2, 0.0]).position
        after = forward_kinematics(arm, rotate_base([0.0, np.pi / 2, 0.0], np.pi / 2)).position
        assert np.allclose(before, [2.0, 0.0, 0.0], atol=1e-12)
        assert np.allclose(after, [0.0, 2.0, 0.0], atol=1e-12)

    def test_equivariance_on_random_configs(self):
        arm = default_arm()
        rng = np.random.default_rng(3)
        for _ in range(1000):
            q = rng.uniform(-np.pi, np.pi, size=3)
            theta = rng.uniform(-2 * np.pi, 2 * np.pi)
            pose = forward_kinematics(arm, q)
            rotated = forward_kinematics(arm, rotate_base(q, theta))
            rz = rot_z_3x3(theta)
            assert np.allclose(rotated.position, rz @ pose.position, atol=1e-9)
            assert np.allclose(rotated.pointing, rz @ pose.pointing, atol=1e-9)
            # height and ground radius are invariants of the rotation
            assert np.isclose(rotated.position[2], pose.position[2], atol=1e-9)
            assert np.isclose(
                np.hypot(*rotated.position[:2]), np.hypot(*pose.position[:2]), atol=1e-9
            )

    def test_rejects_non_finite_theta(self):
        with pytest.raises(ValueError):
            rotate_base([0.0, 0.0, 0.0], np.inf)
