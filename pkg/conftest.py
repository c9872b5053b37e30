"""Fixtures compartidas de la batería de tests."""
import numpy as np
import pytest

from eeg_generator import SynthSpec, generate_synthetic
from evaluation import SplitPlan, score_splits
from pipeline import PipelineConfig


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))


@pytest.fixture(scope='session')
def separable_trials():
    """Dos clases con ERD total y ritmos muy por encima del ruido."""
    return generate_synthetic(SynthSpec(n_trials=30, snr=20.0, erd_depth=1.0, seed=11))


@pytest.fixture(scope='session')
def small_trials():
    return generate_synthetic(SynthSpec(n_trials=20, snr=4.0, erd_depth=0.8, seed=5))


@pytest.fixture(scope='session')
def small_pipeline():
    return PipelineConfig(bands=('alpha', 'beta', 'smr'), classifiers=('lda', 'qda', 'knn'))


@pytest.fixture(scope='session')
def small_cache(small_trials, small_pipeline):
    return score_splits(small_trials, small_pipeline, SplitPlan.kfold(4, seed=3), threads=2)
