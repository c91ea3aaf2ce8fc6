"""Shared fixtures: a tiny synthetic corpus and small model configs."""

from __future__ import annotations

import numpy as np
import pytest

from wlann.dataio import generate_synthetic_corpus, load_corpus_splits
from wlann.model.config import (
    AstBranchConfig,
    AugmentConfig,
    CnnBranchConfig,
    OptimizerConfig,
    WlannConfig,
)


@pytest.fixture(scope="session")
def tiny_corpus_dir(tmp_path_factory):
    """A 6-events-per-class synthetic corpus, generated once per session."""
    root = tmp_path_factory.mktemp("tiny_corpus")
    generate_synthetic_corpus(6, seed=5, out_dir=root)
    return root


@pytest.fixture(scope="session")
def tiny_corpus(tiny_corpus_dir):
    corpus, train, intra, inter = load_corpus_splits(tiny_corpus_dir)
    return corpus, train, intra, inter


def small_train_config(**overrides) -> WlannConfig:
    """A 1-second float32 config that trains in seconds on a laptop core."""
    defaults = dict(
        fixed_input_seconds=1.0,
        cnn=CnnBranchConfig(kernel=80, initial_stride=5, block_strides=(4, 4, 4),
                            channel_widths=(8, 8, 15, 15)),
        ast=AstBranchConfig(embed_dim=8, depth=1, heads=2),
        gru_hidden=4,
        num_classes=7,
        augment=AugmentConfig(time_warp_frames=0, freq_mask_width=0, freq_mask_count=0),
        optimizer=OptimizerConfig(learning_rate=1e-2, batch_size=8),
        dtype="float32",
        seed=0,
    )
    defaults.update(overrides)
    return WlannConfig(**defaults)


@pytest.fixture
def small_config() -> WlannConfig:
    return small_train_config()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
