from pathlib import Path

import numpy as np
import pytest

from avm_toy.data import make_dataset
from avm_toy.model import Denoiser
from avm_toy.schedule import DiffusionSchedule
from avm_toy.train import train

PRETRAINED = Path(__file__).resolve().parent.parent / "checkpoints" \
    / "pretrained.npz"


@pytest.fixture(scope="session")
def schedule():
    return DiffusionSchedule()


@pytest.fixture(scope="session")
def training_run(schedule):
    """A live short training run: its loss curve feeds the training
    criterion (halving within 2000 steps, fresh weights, no checkpoint)."""
    rng = np.random.default_rng(0)
    model = Denoiser(dtype=np.float32)
    dataset = make_dataset(64, rng).astype(np.float32)
    losses = train(model, dataset, steps=2000, schedule=schedule,
                   batch_size=4, lr=2e-3, seed=0)
    return model, losses


@pytest.fixture(scope="session")
def trained_model():
    """The shipped checkpoint (scripts/pretrain.py reproduces it); quality
    tests need the fully converged model, not the short criterion run."""
    if not PRETRAINED.is_file():
        pytest.skip("checkpoints/pretrained.npz missing; "
                    "run scripts/pretrain.py")
    return Denoiser.load(PRETRAINED)


@pytest.fixture(scope="session")
def trained_ckpt(trained_model):
    return PRETRAINED
