"""Shared fixtures: a small but competent classifier for pipeline tests."""

import pytest

from tiltxter.simulate import ContactParams, gen_dataset, split_dataset
from tiltxter.tiltnet import TiltNet, TrainConfig, train


@pytest.fixture(scope="session")
def trained_toy_model():
    """Model trained on a thinned dataset: fast, yet reliable on clean
    centered frames (the +/-90 pair stays inherently ambiguous)."""
    params = ContactParams(rng_seed=123, noise_sigma=0.1, jitter=0.5)
    records = [r for r in gen_dataset(params, reps_per_cell=4) if r.gripper_pos % 3 == 0]
    train_set, val_set, _ = split_dataset(records, seed=123)
    model = TiltNet(seed=123)
    model, _ = train(model, train_set, val_set, TrainConfig(epochs=12, batch_size=32, seed=123))
    return model
