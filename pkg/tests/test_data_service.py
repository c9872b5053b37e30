import json

import numpy as np
import pytest

import config
from data_service import (
    MANIFEST_NAME,
    load_bundle,
    load_dataset,
    load_results,
    read_manifest,
    save_bundle,
    save_dataset,
    select_classes,
    train_bundle,
)
from dsp import TrialSet
from eeg_generator import SynthSpec, generate_synthetic
from errors import (
    BundleVersionError,
    CorruptBundleError,
    DataError,
    DatasetError,
    DimensionError,
    InvalidSamplingRateError,
    MissingFileError,
    RaggedDataError,
    UnknownLabelError,
)
from fusion import FusionConfig
from pipeline import PipelineConfig


def write_dataset(root, trials, fs=250.0, channels=('C3', 'C4'), classes=('left', 'right')):
    """trials: lista de (label, filas) donde cada fila es una lista de valores por canal."""
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for index, (label, rows) in enumerate(trials):
        name = f"trial_{index:04d}.csv"
        lines = [','.join(channels)] + [','.join(str(v) for v in row) for row in rows]
        (root / name).write_text('\n'.join(lines) + '\n', encoding='utf-8')
        entries.append({'file': name, 'label': label})
    manifest = {
        'format': config.DATASET_FORMAT,
        'name': 'fixture',
        'fs': fs,
        'channels': list(channels),
        'classes': list(classes),
        'trials': entries,
    }
    (root / MANIFEST_NAME).write_text(json.dumps(manifest), encoding='utf-8')
    return root


TWO_TRIALS = [
    ('left', [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]),
    ('right', [[-1.0, 0.5], [0.0, 0.25], [1.0, 0.125]]),
]


@pytest.fixture(scope='module')
def bundle_data():
    train = generate_synthetic(SynthSpec(n_trials=20, seed=31))
    held_out = generate_synthetic(SynthSpec(n_trials=6, seed=32))
    fusion = FusionConfig(('alpha', 'beta'), ('lda', 'knn'), 'choquet', 'mean')
    pipeline = PipelineConfig(bands=('alpha', 'beta'), classifiers=('lda', 'knn'))
    return train_bundle(train, fusion, pipeline), held_out


class TestLoadDataset:

    def test_two_trials(self, tmp_path):
        ts = load_dataset(write_dataset(tmp_path / 'ds', TWO_TRIALS))
        assert ts.samples.shape == (2, 2, 3)
        assert ts.samples[0].tolist() == [[1.0, 3.0, 5.0], [2.0, 4.0, 6.0]]
        assert ts.labels.tolist() == [0, 1]
        assert ts.classes == ('left', 'right')
        assert ts.name == 'fixture'

    def test_manifest_path_is_accepted(self, tmp_path):
        root = write_dataset(tmp_path / 'ds', TWO_TRIALS)
        assert len(load_dataset(root / MANIFEST_NAME)) == 2

    def test_save_load_is_lossless(self, tmp_path, capsys):
        original = generate_synthetic(SynthSpec(n_trials=4, duration=0.4, seed=9))
        save_dataset(original, tmp_path / 'synth')
        assert '💾' in capsys.readouterr().out
        loaded = load_dataset(tmp_path / 'synth')
        assert np.array_equal(loaded.samples, original.samples)
        assert np.array_equal(loaded.labels, original.labels)
        assert loaded.channels == original.channels
        assert loaded.classes == original.classes
        assert loaded.fs == original.fs
        assert (tmp_path / 'synth' / 'trial_0000.csv').is_file()

    def test_missing_manifest_names_path(self, tmp_path):
        with pytest.raises(MissingFileError, match='nowhere'):
            load_dataset(tmp_path / 'nowhere')

    def test_missing_trial_file(self, tmp_path):
        root = write_dataset(tmp_path / 'ds', TWO_TRIALS)
        (root / 'trial_0001.csv').unlink()
        with pytest.raises(MissingFileError, match='trial_0001.csv'):
            load_dataset(root)

    def test_ragged_row(self, tmp_path):
        trials = [('left', [[1.0, 2.0], [3.0], [5.0, 6.0]]), TWO_TRIALS[1]]
        with pytest.raises(RaggedDataError, match='row 2'):
            load_dataset(write_dataset(tmp_path / 'ds', trials))

    def test_trials_of_different_length(self, tmp_path):
        trials = [TWO_TRIALS[0], ('right', [[0.0, 0.0], [1.0, 1.0]])]
        with pytest.raises(RaggedDataError):
            load_dataset(write_dataset(tmp_path / 'ds', trials))

    def test_non_numeric_value(self, tmp_path):
        trials = [('left', [[1.0, 'x'], [3.0, 4.0]]), ('right', [[0.0, 0.0], [1.0, 1.0]])]
        with pytest.raises(DatasetError, match='row 1'):
            load_dataset(write_dataset(tmp_path / 'ds', trials))

    def test_unknown_label(self, tmp_path):
        trials = [TWO_TRIALS[0], ('feet', TWO_TRIALS[1][1])]
        with pytest.raises(UnknownLabelError, match='feet'):
            read_manifest(write_dataset(tmp_path / 'ds', trials))

    @pytest.mark.parametrize('fs', [0.0, -250.0])
    def test_non_positive_sampling_rate(self, tmp_path, fs):
        with pytest.raises(InvalidSamplingRateError):
            read_manifest(write_dataset(tmp_path / 'ds', TWO_TRIALS, fs=fs))

    def test_wrong_format(self, tmp_path):
        root = write_dataset(tmp_path / 'ds', TWO_TRIALS)
        data = json.loads((root / MANIFEST_NAME).read_text(encoding='utf-8'))
        data['format'] = 99
        (root / MANIFEST_NAME).write_text(json.dumps(data), encoding='utf-8')
        with pytest.raises(DatasetError):
            read_manifest(root)

    def test_broken_json(self, tmp_path):
        root = tmp_path / 'ds'
        root.mkdir()
        (root / MANIFEST_NAME).write_text('{"format": 1,', encoding='utf-8')
        with pytest.raises(DatasetError):
            read_manifest(root)

    def test_data_errors_exit_with_two(self, tmp_path):
        with pytest.raises(DataError) as excinfo:
            load_dataset(tmp_path / 'nowhere')
        assert excinfo.value.exit_code == 2


class TestSelectClasses:

    def test_subset_is_relabelled(self):
        ts = generate_synthetic(SynthSpec(n_trials=4, n_classes=4, duration=1.0))
        sub = select_classes(ts, ['feet', 'left'])
        assert sub.classes == ('feet', 'left')
        assert len(sub) == 8
        assert sub.labels.tolist() == [1, 0] * 4
        assert np.array_equal(sub.samples[0], ts.samples[0])

    def test_unknown_class(self):
        ts = generate_synthetic(SynthSpec(n_trials=4, duration=1.0))
        with pytest.raises(UnknownLabelError):
            select_classes(ts, ['left', 'tongue'])


class TestBundle:

    def test_round_trip_predicts_identically(self, bundle_data, tmp_path):
        bundle, held_out = bundle_data
        path = save_bundle(bundle, tmp_path / 'model.json')
        restored = load_bundle(path, expected_channels=held_out.channels)
        before, after = bundle.predict(held_out), restored.predict(held_out)
        assert np.array_equal(before.scores, after.scores)
        assert np.array_equal(before.decisions, after.decisions)
        assert restored.fusion == bundle.fusion
        assert restored.classes == ('left', 'right')

    def test_unresolvable_band_is_dropped(self):
        ts = generate_synthetic(SynthSpec(n_trials=6, seed=4))
        bundle = train_bundle(ts, FusionConfig(('delta', 'alpha'), ('lda',)))
        assert bundle.fusion.bands == ('alpha',)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingFileError):
            load_bundle(tmp_path / 'absent.json')

    def test_truncated_file(self, bundle_data, tmp_path):
        path = save_bundle(bundle_data[0], tmp_path / 'model.json')
        text = path.read_text(encoding='utf-8')
        path.write_text(text[: len(text) // 2], encoding='utf-8')
        with pytest.raises(CorruptBundleError):
            load_bundle(path)

    def test_not_a_bundle(self, tmp_path):
        path = tmp_path / 'other.json'
        path.write_text(json.dumps({'format': 1, 'kind': 'results'}), encoding='utf-8')
        with pytest.raises(CorruptBundleError):
            load_bundle(path)

    def test_missing_field(self, bundle_data, tmp_path):
        data = bundle_data[0].to_dict()
        del data['model']
        path = tmp_path / 'model.json'
        path.write_text(json.dumps(data), encoding='utf-8')
        with pytest.raises(CorruptBundleError):
            load_bundle(path)

    def test_malformed_sampling_rate(self, bundle_data, tmp_path):
        data = bundle_data[0].to_dict()
        data['fs'] = 'abc'
        path = tmp_path / 'model.json'
        path.write_text(json.dumps(data), encoding='utf-8')
        with pytest.raises(CorruptBundleError, match='malformed'):
            load_bundle(path)

    def test_future_format(self, bundle_data, tmp_path):
        path = save_bundle(bundle_data[0], tmp_path / 'model.json')
        data = json.loads(path.read_text(encoding='utf-8'))
        data['format'] = config.BUNDLE_FORMAT + 1
        path.write_text(json.dumps(data), encoding='utf-8')
        with pytest.raises(BundleVersionError):
            load_bundle(path)

    def test_channel_mismatch(self, bundle_data, tmp_path):
        path = save_bundle(bundle_data[0], tmp_path / 'model.json')
        with pytest.raises(DimensionError):
            load_bundle(path, expected_channels=('C3', 'C4', 'CP3'))

    def test_predict_rejects_other_montage(self, bundle_data):
        bundle, held_out = bundle_data
        renamed = TrialSet(held_out.samples, held_out.labels, held_out.fs, ('a', 'b', 'c', 'd'), held_out.classes)
        with pytest.raises(DimensionError):
            bundle.predict(renamed)

    def test_predict_rejects_other_sampling_rate(self, bundle_data):
        bundle, held_out = bundle_data
        resampled = TrialSet(held_out.samples, held_out.labels, 500.0, held_out.channels, held_out.classes)
        with pytest.raises(InvalidSamplingRateError, match='500'):
            bundle.predict(resampled)


class TestLoadResults:

    def test_reads_json(self, tmp_path):
        path = tmp_path / 'results.json'
        path.write_text(json.dumps({'n_classes': 2}), encoding='utf-8')
        assert load_results(path) == {'n_classes': 2}

    def test_missing(self, tmp_path):
        with pytest.raises(MissingFileError):
            load_results(tmp_path / 'results.json')

    def test_invalid(self, tmp_path):
        path = tmp_path / 'results.json'
        path.write_text('not json', encoding='utf-8')
        with pytest.raises(DatasetError):
            load_results(path)
