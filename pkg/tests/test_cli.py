import csv
import json

import pytest

from cli import main

SMALL = ['--bands', 'alpha,beta', '--classifiers', 'lda,knn', '--folds', '3', '--seed', '5']


@pytest.fixture(scope='module')
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp('data') / 'synth'
    assert main(['synth', '--out', str(root), '--trials', '12', '--seed', '4']) == 0
    return root


@pytest.fixture(scope='module')
def evaluated(dataset, tmp_path_factory):
    out = tmp_path_factory.mktemp('evaluate')
    code = main(['evaluate', '--data', str(dataset), '--freq-agg', 'choquet', '--class-agg', 'min', '--out', str(out)] + SMALL)
    assert code == 0
    return out / 'results.json'


def read_json(path):
    with open(path, encoding='utf-8') as f:
        return json.load(f)


class TestSynthAndEvaluate:

    def test_synth_writes_manifest(self, dataset):
        manifest = read_json(dataset / 'manifest.json')
        assert manifest['classes'] == ['left', 'right']
        assert len(manifest['trials']) == 24
        assert (dataset / 'trial_0023.csv').is_file()

    def test_results_file(self, evaluated, dataset):
        data = read_json(evaluated)
        assert data['command'] == 'evaluate'
        assert data['n_classes'] == 2
        assert data['n_test_trials'] == 24
        assert data['run']['fusion']['freq_agg'] == 'choquet'
        assert data['run']['data'] == str(dataset)
        assert len(data['cv']['accuracies']) == 3
        assert 0.0 <= data['cv']['mean'] <= 1.0
        assert sorted(data['base_correctness']) == ['alpha/knn', 'alpha/lda', 'beta/knn', 'beta/lda']

    def test_synthetic_data_without_path(self, tmp_path, capsys):
        code = main(['evaluate', '--trials', '8', '--out', str(tmp_path)] + SMALL)
        assert code == 0
        assert 'Exactitud media' in capsys.readouterr().out
        assert read_json(tmp_path / 'results.json')['run']['synth']['n_trials'] == 8

    def test_holdout_plan(self, dataset, tmp_path):
        code = main(['evaluate', '--data', str(dataset), '--holdout', '4', '--out', str(tmp_path)] + SMALL)
        assert code == 0
        assert len(read_json(tmp_path / 'results.json')['cv']['accuracies']) == 4


class TestUsageErrors:

    def test_mff_with_unequal_aggregators(self, dataset, tmp_path, capsys):
        code = main([
            'evaluate', '--data', str(dataset), '--mode', 'mff',
            '--freq-agg', 'choquet', '--class-agg', 'min', '--out', str(tmp_path),
        ])
        assert code == 1
        assert 'mff requires equal aggregators' in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        assert main(['evaluate', '--bogus']) == 1
        assert '❌' in capsys.readouterr().err

    def test_unknown_aggregator(self, dataset, tmp_path):
        assert main(['evaluate', '--data', str(dataset), '--freq-agg', 'median3', '--out', str(tmp_path)]) == 1

    def test_data_with_synth_flags(self, dataset, tmp_path):
        assert main(['evaluate', '--data', str(dataset), '--snr', '2', '--out', str(tmp_path)]) == 1

    def test_missing_command(self):
        assert main([]) == 1

    def test_missing_dataset_is_a_data_error(self, tmp_path, capsys):
        assert main(['evaluate', '--data', str(tmp_path / 'absent'), '--out', str(tmp_path)]) == 2
        assert '❌' in capsys.readouterr().err


class TestGridAndSearch:

    def test_grid_csv(self, dataset, tmp_path):
        args = ['grid', '--data', str(dataset), '--bands', 'all', '--classifiers', 'lda', '--folds', '3', '--out', str(tmp_path)]
        assert main(args) == 0
        with open(tmp_path / 'grid.csv', newline='', encoding='utf-8') as f:
            rows = list(csv.reader(f))
        assert len(rows) == 18
        assert rows[0][0] == 'freq_agg'
        best = read_json(tmp_path / 'results.json')['grid']['best']
        assert 0.0 <= best['accuracy'] <= 1.0

    def test_search_is_thread_independent(self, dataset, tmp_path):
        outputs = []
        for threads in ('1', '3'):
            out = tmp_path / f"threads-{threads}"
            args = ['search', '--data', str(dataset), '--pairs', 'mean:mean,choquet:min', '--threads', threads, '--out', str(out)]
            assert main(args + SMALL) == 0
            outputs.append((out / 'search.csv').read_bytes())
        assert outputs[0] == outputs[1]
        # 3 subconjuntos de bandas x 3 de clasificadores x 2 pares
        assert len(outputs[0].decode('utf-8').strip().splitlines()) == 1 + 18

    def test_malformed_pair(self, dataset, tmp_path):
        assert main(['search', '--data', str(dataset), '--pairs', 'mean', '--out', str(tmp_path)] + SMALL) == 1


class TestStatistics:

    def test_itr(self, evaluated, capsys):
        assert main(['itr', '--results', str(evaluated), '--minutes', '2']) == 0
        assert 'bits/min' in capsys.readouterr().out

    def test_itr_with_explicit_accuracy(self, evaluated, capsys):
        assert main(['itr', '--results', str(evaluated), '--minutes', '1', '--observations', '10', '--accuracy', '1.0']) == 0
        # 2 clases con P = 1: 1 bit por ensayo
        out = capsys.readouterr().out
        assert 'B = 1.0000' in out
        assert 'ITR = 10.00' in out

    def test_qstat(self, evaluated, capsys):
        assert main(['qstat', '--results', str(evaluated)]) == 0
        assert '4 clasificadores base' in capsys.readouterr().out

    def test_missing_results(self, tmp_path):
        assert main(['itr', '--results', str(tmp_path / 'results.json'), '--minutes', '1']) == 2


class TestTrainPredict:

    def test_round_trip(self, dataset, tmp_path):
        bundle = tmp_path / 'model.json'
        code = main(['train', '--data', str(dataset), '--freq-agg', 'mean', '--class-agg', 'max', '--bundle', str(bundle)] + SMALL)
        assert code == 0
        assert read_json(bundle)['kind'] == 'emf-bundle'
        assert main(['predict', '--bundle', str(bundle), '--data', str(dataset), '--out', str(tmp_path)]) == 0
        data = read_json(tmp_path / 'predictions.json')
        assert len(data['predictions']) == 24
        assert set(data['predictions']) <= {'left', 'right'}
        assert 0.0 <= data['accuracy'] <= 1.0

    def test_corrupt_bundle(self, dataset, tmp_path):
        bundle = tmp_path / 'model.json'
        bundle.write_text('{"kind": "emf-bun', encoding='utf-8')
        assert main(['predict', '--bundle', str(bundle), '--data', str(dataset), '--out', str(tmp_path)]) == 2


class TestStudies:

    def test_sweep(self, dataset, tmp_path):
        assert main(['sweep', '--data', str(dataset), '--caps', '1,2', '--out', str(tmp_path)] + SMALL) == 0
        with open(tmp_path / 'sweep.csv', newline='', encoding='utf-8') as f:
            rows = list(csv.reader(f))
        assert [r[0] for r in rows] == ['components', '1', '2']

    def test_compare(self, dataset, tmp_path):
        assert main(['compare', '--data', str(dataset), '--out', str(tmp_path)] + SMALL) == 0
        names = [row['name'] for row in read_json(tmp_path / 'results.json')['frameworks']]
        assert names[-1] == 'emf'
        assert 'mff' in names
