import numpy as np
import pytest

from numgen.flow import (
    ClassifierConfig,
    NetConfig,
    SampleConfig,
    TrainBatch,
    TrainConfig,
    VelocityNet,
    classify_coarse_to_fine,
    count_loss,
    euler_sample,
    forward_interpolate,
    grad_check,
    load_model,
    make_pairs,
    sample_timesteps,
    save_model,
    train,
    train_step,
    velocity_target,
)
from numgen.flow.classifier import _STAGE_REFINE
from numgen.flow.data import image_to_unit, unit_to_image
from numgen.noise import PriorConfig, sample_noise
from numgen.seeds import derive_seed

SMALL = NetConfig(height=16, width=16, hidden=24, k_max=4)


@pytest.fixture(scope="module")
def small_model():
    return VelocityNet(SMALL, seed=3)


def _toy_batch(rng, b=8, cfg=SMALL):
    x0 = rng.standard_normal((b, 1, cfg.height, cfg.width)).astype(np.float32)
    counts = rng.integers(1, cfg.k_max + 1, b)
    return TrainBatch(x0, counts)


class TestInterpolation:
    def test_endpoints_exact(self, rng):
        x0 = rng.standard_normal((1, 16, 16)).astype(np.float32)
        eps = rng.standard_normal((1, 16, 16)).astype(np.float32)
        assert np.array_equal(forward_interpolate(x0, eps, 0.0), x0)
        assert np.array_equal(forward_interpolate(x0, eps, 1.0), eps)

    def test_midpoint_matches_loop(self, rng):
        x0 = rng.standard_normal((1, 4, 4)).astype(np.float32)
        eps = rng.standard_normal((1, 4, 4)).astype(np.float32)
        got = forward_interpolate(x0, eps, 0.5)
        for c in range(1):
            for i in range(4):
                for j in range(4):
                    expected = np.float32(0.5) * x0[c, i, j] + np.float32(0.5) * eps[c, i, j]
                    assert got[c, i, j] == pytest.approx(expected, abs=1e-7)

    def test_shape_mismatch_rejected(self, rng):
        with pytest.raises(ValueError):
            forward_interpolate(np.zeros((1, 4, 4)), np.zeros((1, 5, 5)), 0.5)

    def test_t_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            forward_interpolate(np.zeros((1, 2, 2)), np.zeros((1, 2, 2)), 1.5)

    def test_velocity_target_identities(self, rng):
        x0 = rng.standard_normal((1, 8, 8)).astype(np.float32)
        assert np.array_equal(velocity_target(x0, x0), np.zeros_like(x0))
        eps = rng.standard_normal((1, 8, 8)).astype(np.float32)
        assert np.array_equal(velocity_target(np.zeros_like(eps), eps), eps)

    def test_finite_difference_of_path_matches_target(self, rng):
        x0 = rng.standard_normal((1, 8, 8)).astype(np.float64)
        eps = rng.standard_normal((1, 8, 8)).astype(np.float64)
        h = 1e-6
        fd = (forward_interpolate(x0, eps, 0.4 + h) - forward_interpolate(x0, eps, 0.4)) / h
        assert np.abs(fd - velocity_target(x0, eps)).max() < 1e-6


class TestTimesteps:
    def test_uniform_in_unit_interval(self, rng):
        t = sample_timesteps(rng, 1000, "uniform")
        assert (t >= 0).all() and (t < 1).all()

    def test_logit_normal_early_bias(self):
        rng = np.random.default_rng(0)
        t = sample_timesteps(rng, 10_000, "logit_normal", mu=-1.5, sigma=1.0)
        assert (t > 0).all() and (t < 1).all()
        assert t.mean() < 0.35

    def test_logit_normal_zero_mu_centered(self):
        rng = np.random.default_rng(1)
        t = sample_timesteps(rng, 10_000, "logit_normal", mu=0.0, sigma=1.0)
        assert abs(t.mean() - 0.5) < 0.02


class TestTrainStep:
    def test_loss_decreases_over_short_run(self, rng):
        x0 = rng.standard_normal((64, 1, 16, 16)).astype(np.float32) * 0.5
        counts = rng.integers(1, 5, 64)
        config = TrainConfig(batch_size=8, steps=60, learning_rate=0.05, seed=1)
        model, losses = train(x0, counts, config, SMALL)
        assert np.mean(losses[-10:]) < losses[0]

    def test_deterministic_per_seed_and_step(self, rng):
        batch = _toy_batch(np.random.default_rng(0))
        config = TrainConfig(seed=9)
        m1 = VelocityNet(SMALL, seed=1)
        m2 = VelocityNet(SMALL, seed=1)
        l1 = train_step(m1, batch, config, step_index=17)
        l2 = train_step(m2, batch, config, step_index=17)
        assert l1 == l2
        for k in m1.params:
            assert np.array_equal(m1.params[k], m2.params[k])

    def test_shared_noise_batching_hook(self, small_model, rng):
        batch = _toy_batch(np.random.default_rng(2))
        seen = {}

        def hook(x0, eps, t, c):
            seen["eps"] = eps

        config = TrainConfig(shared_noise_batching=True, seed=3)
        train_step(VelocityNet(SMALL, seed=0), batch, config, 0, on_batch=hook)
        eps = seen["eps"]
        assert all(np.array_equal(eps[i], eps[0]) for i in range(eps.shape[0]))

    def test_fresh_noise_differs_across_batch(self, rng):
        batch = _toy_batch(np.random.default_rng(2))
        seen = {}
        config = TrainConfig(shared_noise_batching=False, seed=3)
        train_step(VelocityNet(SMALL, seed=0), batch, config, 0,
                   on_batch=lambda x0, eps, t, c: seen.update(eps=eps))
        eps = seen["eps"]
        assert not np.array_equal(eps[0], eps[1])

    def test_cond_dropout_uses_null_token(self, rng):
        batch = _toy_batch(np.random.default_rng(4), b=64)
        seen = {}
        config = TrainConfig(cond_dropout_prob=0.5, seed=5)
        train_step(VelocityNet(SMALL, seed=0), batch, config, 0,
                   on_batch=lambda x0, eps, t, c: seen.update(c=c))
        dropped = (seen["c"] == 0).mean()
        assert 0.2 < dropped < 0.8
        assert (batch.counts > 0).all()  # original counts untouched

    def test_prior_applied_to_training_noise(self, rng):
        gen = np.random.default_rng(6)
        batch = _toy_batch(gen)
        batch.latent_boxes = [[(2.0, 2.0, 6.0, 6.0)] for _ in range(batch.x0.shape[0])]
        seen_plain, seen_prior = {}, {}
        train_step(VelocityNet(SMALL, seed=0), batch, TrainConfig(seed=7), 0,
                   on_batch=lambda x0, eps, t, c: seen_plain.update(eps=eps))
        config = TrainConfig(seed=7, prior=PriorConfig("uniform_scaled", gamma=0.1))
        train_step(VelocityNet(SMALL, seed=0), batch, config, 0,
                   on_batch=lambda x0, eps, t, c: seen_prior.update(eps=eps))
        diff = seen_plain["eps"] != seen_prior["eps"]
        assert diff.any()
        # far corner is outside the box: unchanged
        assert np.array_equal(seen_plain["eps"][:, :, 12:, 12:], seen_prior["eps"][:, :, 12:, 12:])

    def test_prior_without_boxes_rejected(self, rng):
        batch = _toy_batch(np.random.default_rng(8))
        config = TrainConfig(prior=PriorConfig("fixed"), seed=0)
        with pytest.raises(ValueError):
            train_step(VelocityNet(SMALL, seed=0), batch, config, 0)


class TestEulerSample:
    def test_deterministic(self, small_model):
        eps = sample_noise(1, 16, 16, 4)
        config = SampleConfig(ode_steps=8, cfg_scale=1.5, seed=5)
        a = euler_sample(small_model, eps, 2, config)
        b = euler_sample(small_model, eps, 2, config)
        assert np.array_equal(a, b)

    def test_single_step_identity(self):
        # with small noise and a small model the clamp is a no-op, so one
        # Euler step is exactly eps - v(eps, t=1)
        model = VelocityNet(SMALL, seed=2)
        for p in ("w1", "w2", "w3", "emb"):
            model.params[p] *= np.float32(0.05)
        eps = sample_noise(1, 16, 16, 0) * np.float32(0.3)
        config = SampleConfig(ode_steps=1, cfg_scale=0.0)
        got = euler_sample(model, eps, 1, config)
        v = model.forward(eps[None], np.array([1.0], dtype=np.float32),
                          np.array([1], dtype=np.int64))[0]
        assert np.array_equal(got, eps - np.float32(1.0) * v)

    def test_prior_changes_pixels_near_boxes(self, small_model):
        eps = sample_noise(1, 16, 16, 6)
        plain = euler_sample(small_model, eps, 3, SampleConfig(ode_steps=8, seed=7))
        prior = euler_sample(small_model, eps, 3, SampleConfig(
            ode_steps=8, seed=7, prior=PriorConfig("uniform_scaled", gamma=0.1)))
        assert np.abs(plain - prior).max() > 0

    def test_output_clamped(self, small_model):
        eps = sample_noise(1, 16, 16, 8) * np.float32(3.0)
        out = euler_sample(small_model, eps, 1, SampleConfig(ode_steps=2, cfg_scale=0.0))
        assert out.min() >= -1.0 and out.max() <= 1.0

    def test_count_out_of_range_rejected(self, small_model):
        with pytest.raises(ValueError):
            euler_sample(small_model, sample_noise(1, 16, 16, 0), 99, SampleConfig())

    def test_cfg_zero_skips_unconditional_branch(self, small_model):
        eps = sample_noise(1, 16, 16, 9)
        a = euler_sample(small_model, eps, 2, SampleConfig(ode_steps=4, cfg_scale=0.0))
        # cfg 1.0 equals conditional-only velocity analytically
        b = euler_sample(small_model, eps, 2, SampleConfig(ode_steps=4, cfg_scale=1.0))
        assert np.allclose(a, b, atol=1e-5)


class TestCountLoss:
    def test_same_pairs_same_loss(self, small_model, rng):
        x = rng.standard_normal((1, 16, 16)).astype(np.float32)
        pairs = make_pairs(6, x.shape, seed=11)
        assert count_loss(small_model, x, 2, pairs) == count_loss(small_model, x, 2, pairs)

    def test_single_pair_matches_direct_formula(self, small_model, rng):
        x = rng.standard_normal((1, 16, 16)).astype(np.float32)
        pairs = make_pairs(1, x.shape, seed=12)
        t, eps = pairs[0]
        x_t = forward_interpolate(x, eps, np.float32(t))
        v = small_model.forward(x_t[None], np.array([t], dtype=np.float32),
                                np.array([3], dtype=np.int64))[0]
        expected = float(np.mean((v.astype(np.float64) - (eps - x).astype(np.float64)) ** 2))
        assert count_loss(small_model, x, 3, pairs) == pytest.approx(expected, rel=1e-6)

    def test_empty_pairs_rejected(self, small_model):
        with pytest.raises(ValueError):
            count_loss(small_model, np.zeros((1, 16, 16), dtype=np.float32), 1, [])


class TestClassifier:
    def test_degenerate_config_equals_exhaustive_argmin(self, small_model, rng):
        for trial in range(10):
            x = rng.standard_normal((1, 16, 16)).astype(np.float32) * 0.5
            config = ClassifierConfig(candidates=(1, 2, 3, 4), coarse_timesteps=6,
                                      top_m=4, refine_timesteps=6, seed=trial)
            result = classify_coarse_to_fine(small_model, x, config)
            pairs = make_pairs(6, x.shape, derive_seed(trial, _STAGE_REFINE))
            losses = {k: count_loss(small_model, x, k, pairs) for k in (1, 2, 3, 4)}
            expected = min(losses.items(), key=lambda kv: (kv[1], kv[0]))[0]
            assert result.k_hat == expected

    def test_top_set_size_and_membership(self, small_model, rng):
        x = rng.standard_normal((1, 16, 16)).astype(np.float32)
        config = ClassifierConfig(candidates=(1, 2, 3, 4), coarse_timesteps=4,
                                  top_m=2, refine_timesteps=8, seed=0)
        result = classify_coarse_to_fine(small_model, x, config)
        assert len(result.top_set) == 2
        assert result.k_hat in result.top_set
        assert set(result.refined_losses) == set(result.top_set)

    def test_rankings_are_permutations(self, small_model, rng):
        x = rng.standard_normal((1, 16, 16)).astype(np.float32)
        config = ClassifierConfig(candidates=(1, 2, 3, 4), coarse_timesteps=4,
                                  top_m=2, refine_timesteps=4, seed=1)
        result = classify_coarse_to_fine(small_model, x, config)
        assert sorted(result.coarse_ranking()) == [1, 2, 3, 4]
        assert sorted(result.refined_ranking()) == [1, 2, 3, 4]
        assert result.rank_of(result.k_hat, "refined") == 1

    def test_invalid_configs_rejected(self):
        with pytest.raises(ValueError):
            ClassifierConfig(candidates=())
        with pytest.raises(ValueError):
            ClassifierConfig(candidates=(1, 2), top_m=5)


class TestGradCheck:
    def test_full_model_under_tolerance(self, rng):
        model = VelocityNet(SMALL, seed=5)
        x0 = rng.standard_normal((1, 16, 16)).astype(np.float32)
        assert grad_check(model, x0, 2, n_checks=64, seed=0) < 1e-3

    def test_linear_model_near_exact(self, rng):
        model = VelocityNet(NetConfig(height=16, width=16, hidden=24, k_max=4,
                                      activation="identity"), seed=6)
        x0 = rng.standard_normal((1, 16, 16)).astype(np.float32)
        assert grad_check(model, x0, 1, n_checks=64, seed=1) < 1e-6

    def test_zero_init_last_layer_closed_form(self):
        cfg = NetConfig(height=8, width=8, hidden=6, time_dim=2, count_dim=2,
                        k_max=3)
        model = VelocityNet(cfg, seed=7).astype(np.float64)
        model.params["w3"][:] = 0.0
        model.params["b3"][:] = 0.0
        rng = np.random.default_rng(8)
        x0 = rng.standard_normal((1, 1, 8, 8))
        eps = rng.standard_normal((1, 1, 8, 8))
        t = np.array([0.5])
        c = np.array([2])
        x_t = forward_interpolate(x0, eps, t)
        target = velocity_target(x0, eps)
        loss, grads = model.loss_and_grads(x_t, t, c, target)
        # with v = 0 the loss gradient for the last layer reduces to a plain
        # correlation of the (negative, scaled) target with the activations
        _, cache = model._forward_cached(x_t, t, c)
        a2 = cache[7]  # (B, H, W, hidden)
        a2p = np.zeros((1, 10, 10, 6))
        a2p[:, 1:-1, 1:-1, :] = a2
        dv = -2.0 * target[0, 0] / target.size
        expected = np.zeros((6, 3, 3))
        for ki in range(3):
            for kj in range(3):
                for ch in range(6):
                    expected[ch, ki, kj] = np.sum(dv * a2p[0, ki:ki + 8, kj:kj + 8, ch])
        got = grads["w3"].reshape(3, 3, 6)
        assert np.allclose(got, expected.transpose(1, 2, 0), atol=1e-12)
        assert loss == pytest.approx(float(np.mean(target ** 2)))


class TestCheckpoint:
    def test_round_trip(self, tmp_path, rng):
        model = VelocityNet(SMALL, seed=9)
        save_model(model, tmp_path / "ckpt", extra={"background_gray": 200})
        loaded, extra = load_model(tmp_path / "ckpt")
        assert extra == {"background_gray": 200}
        assert loaded.config == model.config
        for k in model.params:
            assert np.array_equal(loaded.params[k], model.params[k])
        x = rng.standard_normal((2, 1, 16, 16)).astype(np.float32)
        t = np.array([0.3, 0.8], dtype=np.float32)
        c = np.array([1, 2])
        assert np.array_equal(model.forward(x, t, c), loaded.forward(x, t, c))


class TestDataConversion:
    def test_unit_round_trip(self):
        img = np.arange(256, dtype=np.uint8).reshape(16, 16)
        assert np.array_equal(unit_to_image(image_to_unit(img)), img)

    def test_range(self):
        x = image_to_unit(np.array([[0, 255]], dtype=np.uint8))
        assert x.min() >= -1.0 and x.max() <= 1.0
