import json

import numpy as np
import pytest

from choicebandit.envs import (ADVERSARIAL_KINDS, StochasticEnv, draw_reward, load_loss_csv,
                               make_adversarial_losses, make_mnl_env, make_nl_env,
                               make_nl_large_env, save_loss_csv)


def test_testbed_shapes_and_structure(rng):
    assert make_mnl_env(rng).n == 10
    nl = make_nl_env(rng)
    assert nl.n == 9
    large = make_nl_large_env(rng)
    assert large.n == 25 and large.optimal_arm == 0
    assert large.means[0] == pytest.approx(large.means[1:].max() + 2.0)


def test_testbed_mean_distributions():
    rng = np.random.default_rng(0)
    mnl = np.array([make_mnl_env(rng).means for _ in range(4000)])
    assert abs(mnl.mean() - 4.0) < 0.02 and abs(mnl.std() - 1.0) < 0.02
    nl = np.array([make_nl_env(rng).means for _ in range(4000)])
    assert abs(nl[:, :3].mean() - 7.5) < 0.03 and abs(nl[:, 3:].mean() - 2.5) < 0.03


def test_draw_reward_noise(rng):
    env = StochasticEnv([0.0, 3.0], 2.0)
    r = draw_reward(env, np.ones(100_000, dtype=int), rng)
    assert abs(r.mean() - 3.0) < 0.03 and abs(r.std() - 2.0) < 0.03
    assert draw_reward(StochasticEnv([1.5], 0.0), 0, rng) == 1.5


def test_env_validation_and_json(tmp_path):
    with pytest.raises(ValueError):
        StochasticEnv([], 1.0)
    with pytest.raises(ValueError):
        StochasticEnv([1.0], -1.0)
    path = tmp_path / "env.json"
    path.write_text(json.dumps({"means": [1, 2, 0.5], "noise_sd": 0.5}))
    env = StochasticEnv.from_json(path)
    assert env.optimal_arm == 1 and env.noise_sd == 0.5
    assert StochasticEnv.from_json('{"means": [3]}').n == 1


@pytest.mark.parametrize("kind", ADVERSARIAL_KINDS)
def test_adversarial_losses_in_range(kind, rng):
    losses = make_adversarial_losses(kind, 5, 400, rng)
    assert losses.shape == (400, 5)
    assert losses.min() >= -1.0 and losses.max() <= 0.0


def test_single_best_and_switching(rng):
    single = make_adversarial_losses("single-best-arm", 4, 100, rng, best_arm=2)
    assert np.all(np.argmax(single, axis=1) == 2)
    switching = make_adversarial_losses("switching-best", 4, 100, rng, period=25)
    assert list(np.argmax(switching, axis=1)[::25]) == [0, 1, 2, 3]
    with pytest.raises(ValueError):
        make_adversarial_losses("nope", 2, 3, rng)


def test_loss_csv_round_trip(tmp_path, rng):
    losses = make_adversarial_losses("uniform-random", 3, 20, rng)
    path = tmp_path / "losses.csv"
    save_loss_csv(losses, path)
    np.testing.assert_array_equal(load_loss_csv(path), losses)
    with_header = tmp_path / "h.csv"
    with_header.write_text("a,b\n-0.5,-0.25\n0,-1\n")
    np.testing.assert_array_equal(load_loss_csv(with_header), [[-0.5, -0.25], [0, -1]])
    bad = tmp_path / "bad.csv"
    bad.write_text("-0.5,0.25\n")
    with pytest.raises(ValueError):
        load_loss_csv(bad)
