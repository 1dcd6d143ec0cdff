import numpy as np
import pytest

from styleopt import (
    FeaturizedCost,
    MlpCost,
    PreferencePair,
    TrainerSettings,
    Trajectory,
    augment_rotations,
    default_arm,
    extract_features,
    pair_loss,
    preference_probability,
    update_weights,
)
from styleopt.learning import (
    featurized_loss_and_grad,
    mlp_loss_and_param_grads,
    mlp_pair_batch,
    pair_feature_deltas,
)

from oracles import relative_error

W_SAD = np.array([0.97, 0.42, -0.50])
ARM = default_arm()


def random_trajectory(rng, t=8, d=3):
    return Trajectory(waypoints=rng.uniform(-1.2, 1.2, size=(t, d)))


def random_pairs(rng, n, t=8, label_by=None):
    pairs = []
    for i in range(n):
        pair = PreferencePair(
            x_a=random_trajectory(rng, t),
            x_b=random_trajectory(rng, t),
            pair_id=f"p{i}",
        )
        if label_by is not None:
            c_a = label_by(pair.x_a)
            c_b = label_by(pair.x_b)
            pair = pair.with_label("A" if c_a <= c_b else "B")
        pairs.append(pair)
    return pairs


def sad_value(x):
    return float(W_SAD @ extract_features(ARM, x).as_array(False))


class TestPreferenceProbability:
    def test_equal_costs_half(self):
        x = random_trajectory(np.random.default_rng(30))
        cost = FeaturizedCost(style_name="s", w=W_SAD)
        assert preference_probability(cost, ARM, x, x) == 0.5

    def test_known_logistic_value(self):
        # cost gap of ln 3 gives probability 0.75 for the cheaper side
        rng = np.random.default_rng(31)
        x_a = Trajectory(waypoints=np.tile([0.0, 0.0, 0.0], (6, 1)))
        x_b = random_trajectory(rng, 6)
        phi_a = extract_features(ARM, x_a).as_array(False)
        phi_b = extract_features(ARM, x_b).as_array(False)
        # height-only weight scaled so C(x_b) - C(x_a) = ln 3 exactly
        scale = np.log(3.0) / (phi_b[1] - phi_a[1])
        cost = FeaturizedCost(style_name="s", w=np.array([0.0, scale, 0.0]))
        p = preference_probability(cost, ARM, x_a, x_b)
        assert np.isclose(p, 0.75, atol=1e-12)

    def test_swap_symmetry_and_normalization(self):
        rng = np.random.default_rng(32)
        for _ in range(200):
            w = rng.uniform(-25.0, 25.0, size=3)  # cost values span roughly [-50, 50]
            cost = FeaturizedCost(style_name="s", w=w)
            x_a, x_b = random_trajectory(rng), random_trajectory(rng)
            p_ab = preference_probability(cost, ARM, x_a, x_b)
            p_ba = preference_probability(cost, ARM, x_b, x_a)
            assert abs(p_ab + p_ba - 1.0) < 1e-12


class TestPairLoss:
    def test_equal_costs_ln2(self):
        x = random_trajectory(np.random.default_rng(33))
        pair = PreferencePair(x_a=x, x_b=x, pair_id="p", label="A")
        cost = FeaturizedCost(style_name="s", w=W_SAD)
        assert np.isclose(pair_loss(cost, ARM, pair), np.log(2.0), atol=1e-12)

    def test_wrong_side_of_three_to_one(self):
        # P(A) = 0.75 but the label is B: loss is -ln 0.25
        rng = np.random.default_rng(34)
        x_a, x_b = random_trajectory(rng), random_trajectory(rng)
        cost = FeaturizedCost(style_name="s", w=W_SAD)
        # rescale weights so the preference is exactly 3:1
        gap = sad_value(x_b) - sad_value(x_a)
        cost = FeaturizedCost(style_name="s", w=W_SAD * (np.log(3.0) / gap))
        pair = PreferencePair(x_a=x_a, x_b=x_b, pair_id="p", label="B")
        assert np.isclose(pair_loss(cost, ARM, pair), -np.log(0.25), atol=1e-9)

    def test_monotone_in_cost_margin(self):
        rng = np.random.default_rng(35)
        x_a, x_b = random_trajectory(rng), random_trajectory(rng)
        pair = PreferencePair(x_a=x_a, x_b=x_b, pair_id="p", label="A")
        gap = sad_value(x_b) - sad_value(x_a)
        scales = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) * np.sign(gap)
        losses = [pair_loss(FeaturizedCost(style_name="s", w=W_SAD * s), ARM, pair) for s in scales]
        assert np.all(np.diff(losses) < 0.0)  # larger margin for the chosen side, smaller loss

    def test_unlabeled_pair_rejected(self):
        x = random_trajectory(np.random.default_rng(36))
        pair = PreferencePair(x_a=x, x_b=x, pair_id="p")
        with pytest.raises(ValueError):
            pair_loss(FeaturizedCost(style_name="s", w=W_SAD), ARM, pair)


class TestAugmentRotations:
    def labeled_pair(self, rng):
        return PreferencePair(
            x_a=random_trajectory(rng), x_b=random_trajectory(rng), pair_id="p", label="B"
        )

    def test_zero_k_empty(self):
        pair = self.labeled_pair(np.random.default_rng(37))
        assert augment_rotations(pair, 0, np.random.default_rng(0)) == []

    def test_labels_and_origin(self):
        pair = self.labeled_pair(np.random.default_rng(38))
        out = augment_rotations(pair, 5, np.random.default_rng(1))
        assert len(out) == 5
        assert all(p.label == "B" for p in out)
        assert all(p.origin == "augmented" for p in out)
        assert len({p.pair_id for p in out}) == 5

    def test_featurized_training_sees_no_difference(self):
        rng = np.random.default_rng(39)
        pair = self.labeled_pair(rng)
        cost = FeaturizedCost(style_name="s", w=W_SAD)
        base_loss = pair_loss(cost, ARM, pair)
        for aug in augment_rotations(pair, 8, rng):
            phi_a = extract_features(ARM, aug.x_a).as_array(False)
            phi_orig = extract_features(ARM, pair.x_a).as_array(False)
            assert np.allclose(phi_a, phi_orig, atol=1e-9)
            assert np.isclose(pair_loss(cost, ARM, aug), base_loss, atol=1e-9)

    def test_errors(self):
        pair = self.labeled_pair(np.random.default_rng(40))
        with pytest.raises(ValueError):
            augment_rotations(pair, -1, np.random.default_rng(0))
        unlabeled = PreferencePair(x_a=pair.x_a, x_b=pair.x_b, pair_id="q")
        with pytest.raises(ValueError):
            augment_rotations(unlabeled, 2, np.random.default_rng(0))


class TestFeaturizedGradient:
    def test_matches_closed_form_per_pair(self):
        # gradient = (P(A) - I(A)) * (phi_B - phi_A), computed independently
        rng = np.random.default_rng(41)
        cost = FeaturizedCost(style_name="s", w=rng.normal(size=3))
        pairs = random_pairs(rng, 1, label_by=sad_value)
        pair = pairs[0]
        deltas = pair_feature_deltas(cost, ARM, pairs)
        _, grad = featurized_loss_and_grad(cost.w, deltas)
        p_a = preference_probability(cost, ARM, pair.x_a, pair.x_b)
        i_a = 1.0 if pair.label == "A" else 0.0
        phi_a = extract_features(ARM, pair.x_a).as_array(False)
        phi_b = extract_features(ARM, pair.x_b).as_array(False)
        assert np.allclose(grad, (p_a - i_a) * (phi_b - phi_a), atol=1e-12)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(42)
        cost = FeaturizedCost(style_name="s", w=rng.normal(size=3))
        pairs = random_pairs(rng, 12, label_by=sad_value)
        deltas = pair_feature_deltas(cost, ARM, pairs)
        loss, grad = featurized_loss_and_grad(cost.w, deltas)
        eps = 1e-6
        fd = np.zeros_like(cost.w)
        for j in range(3):
            wp = cost.w.copy()
            wp[j] += eps
            lp, _ = featurized_loss_and_grad(wp, deltas)
            wp[j] -= 2 * eps
            lm, _ = featurized_loss_and_grad(wp, deltas)
            fd[j] = (lp - lm) / (2 * eps)
        assert relative_error(grad, fd) < 1e-6

    def test_identical_features_give_zero_gradient(self):
        rng = np.random.default_rng(43)
        x = random_trajectory(rng)
        pair = PreferencePair(x_a=x, x_b=rotate_copy(x, rng), pair_id="p", label="A")
        cost = FeaturizedCost(style_name="s", w=np.array([0.3, -0.2, 0.1]))
        new_cost, report = update_weights(
            cost, ARM, [pair], TrainerSettings(epochs_per_round=50, rng_seed=0)
        )
        assert np.array_equal(new_cost.w, cost.w)
        assert np.isclose(report.final_loss, np.log(2.0), atol=1e-9)

    def test_convexity_along_segments(self):
        rng = np.random.default_rng(44)
        pairs = random_pairs(rng, 15, label_by=sad_value)
        cost = FeaturizedCost(style_name="s", w=np.zeros(3))
        deltas = pair_feature_deltas(cost, ARM, pairs)
        for _ in range(20):
            w0, w1 = rng.normal(size=3), rng.normal(size=3)
            l0, _ = featurized_loss_and_grad(w0, deltas)
            l1, _ = featurized_loss_and_grad(w1, deltas)
            lm, _ = featurized_loss_and_grad(0.5 * (w0 + w1), deltas)
            assert lm <= 0.5 * (l0 + l1) + 1e-12


def rotate_copy(x, rng):
    from styleopt import rotate_trajectory

    return rotate_trajectory(x, float(rng.uniform(-np.pi, np.pi)))


class TestUpdateWeights:
    def test_training_decreases_loss(self):
        rng = np.random.default_rng(45)
        pairs = random_pairs(rng, 20, label_by=sad_value)
        cost = FeaturizedCost(style_name="s", w=np.zeros(3))
        new_cost, report = update_weights(
            cost, ARM, pairs, TrainerSettings(epochs_per_round=50, rng_seed=0)
        )
        assert report.final_loss < report.initial_loss
        assert np.isclose(report.initial_loss, np.log(2.0), atol=1e-12)  # zero weights
        assert report.pairs_used == 20 and report.augmented_pairs == 0

    def test_mlp_training_decreases_loss(self):
        rng = np.random.default_rng(46)
        pairs = random_pairs(rng, 8, label_by=sad_value)
        cost = MlpCost.initialize("s", dof=3, rng_seed=0)
        new_cost, report = update_weights(
            cost, ARM, pairs, TrainerSettings(epochs_per_round=60, augmentation_factor=2, rng_seed=0)
        )
        assert report.final_loss < report.initial_loss
        assert report.pairs_used == 8 and report.augmented_pairs == 16

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(47)
        pairs = random_pairs(rng, 4, label_by=sad_value)
        cost = MlpCost.initialize("s", dof=3, rng_seed=1)
        settings = TrainerSettings(epochs_per_round=20, augmentation_factor=3, rng_seed=9)
        a, _ = update_weights(cost, ARM, pairs, settings)
        b, _ = update_weights(cost, ARM, pairs, settings)
        for wa, wb in zip(a.weights, b.weights):
            assert np.array_equal(wa, wb)

    def test_label_flip_symmetry(self):
        rng = np.random.default_rng(48)
        pairs = random_pairs(rng, 10, label_by=sad_value)
        flipped = [
            PreferencePair(
                x_a=p.x_b,
                x_b=p.x_a,
                pair_id=p.pair_id,
                label="B" if p.label == "A" else "A",
            )
            for p in pairs
        ]
        cost = FeaturizedCost(style_name="s", w=np.array([0.1, 0.2, -0.3]))
        settings = TrainerSettings(epochs_per_round=40, rng_seed=0)
        a, ra = update_weights(cost, ARM, pairs, settings)
        b, rb = update_weights(cost, ARM, flipped, settings)
        assert np.array_equal(a.w, b.w)
        assert ra.final_loss == rb.final_loss

    def test_errors(self):
        cost = FeaturizedCost(style_name="s", w=np.zeros(3))
        with pytest.raises(ValueError):
            update_weights(cost, ARM, [], TrainerSettings())
        rng = np.random.default_rng(49)
        unlabeled = PreferencePair(x_a=random_trajectory(rng), x_b=random_trajectory(rng), pair_id="p")
        with pytest.raises(ValueError):
            update_weights(cost, ARM, [unlabeled], TrainerSettings())

    def test_epoch_defaults_per_family(self):
        s = TrainerSettings()
        assert s.epochs_for(FeaturizedCost(style_name="s", w=np.zeros(3))) == 200
        assert s.epochs_for(MlpCost.initialize("s", dof=3, rng_seed=0)) == 500
        assert TrainerSettings(epochs_per_round=7).epochs_for(MlpCost.initialize("s", dof=3, rng_seed=0)) == 7


class TestMlpLossGradient:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(50)
        pairs = random_pairs(rng, 2, t=5, label_by=sad_value)
        for point in range(5):
            cost = MlpCost.initialize("s", dof=3, rng_seed=200 + point)
            u, steps, chosen, other = mlp_pair_batch(cost, ARM, pairs)
            params = [w.copy() for w in cost.weights]
            loss, grads = mlp_loss_and_param_grads(params, u, steps, chosen, other)
            fd = []
            eps = 1e-6
            for i in range(len(params)):
                g = np.zeros_like(params[i])
                flat = params[i].ravel()
                gflat = g.ravel()
                for j in range(flat.size):
                    orig = flat[j]
                    flat[j] = orig + eps
                    lp, _ = mlp_loss_and_param_grads(params, u, steps, chosen, other)
                    flat[j] = orig - eps
                    lm, _ = mlp_loss_and_param_grads(params, u, steps, chosen, other)
                    flat[j] = orig
                    gflat[j] = (lp - lm) / (2 * eps)
                fd.append(g)
            flat_g = np.concatenate([g.ravel() for g in grads])
            flat_fd = np.concatenate([g.ravel() for g in fd])
            assert relative_error(flat_g, flat_fd) < 1e-3
