import csv
import json

import numpy as np
import pytest

import reports
from aggregation import AGGREGATORS, AggregatorId
from classifiers import ClassifierId
from evaluation import CvResult, FrameworkRow, GridResult, SearchResult, SplitPlan
from fusion import FusionConfig, FusionMode

BASE = FusionConfig(('alpha', 'beta'), ('lda', 'knn'))


@pytest.fixture
def grid():
    matrix = np.linspace(0.5, 0.9, len(AGGREGATORS) ** 2).reshape(len(AGGREGATORS), len(AGGREGATORS))
    return GridResult(AGGREGATORS, matrix, matrix[..., None], BASE)


@pytest.fixture
def search():
    band_subsets = (('alpha',), ('beta',), ('alpha', 'beta'))
    classifier_subsets = ((ClassifierId.LDA,), (ClassifierId.LDA, ClassifierId.KNN))
    pairs = ((AggregatorId.MEAN, AggregatorId.MEAN), (AggregatorId.CHOQUET, AggregatorId.MIN))
    means = np.arange(12, dtype=float).reshape(3, 2, 2) / 20.0
    order = np.argsort(-means.ravel(), kind='stable')
    return SearchResult(band_subsets, classifier_subsets, pairs, means, np.full_like(means, 0.01), order)


def read_csv(path):
    with open(path, newline='', encoding='utf-8') as f:
        return list(csv.reader(f))


class TestGridCsv:

    def test_layout(self, grid, tmp_path):
        rows = read_csv(reports.write_grid_csv(grid, tmp_path / 'out' / 'grid.csv'))
        assert len(rows) == 18
        assert all(len(r) == 18 for r in rows)
        assert rows[0] == ['freq_agg'] + [a.value for a in AGGREGATORS]
        assert [r[0] for r in rows[1:]] == [a.value for a in AGGREGATORS]

    def test_values(self, grid, tmp_path):
        rows = read_csv(reports.write_grid_csv(grid, tmp_path / 'grid.csv'))
        assert rows[1][1] == '0.5000000000'
        assert rows[-1][-1] == '0.9000000000'
        assert float(rows[3][5]) == pytest.approx(grid.matrix[2, 4], abs=1e-10)

    def test_console_table(self, grid):
        text = reports.format_grid(grid)
        assert len(text.splitlines()) == 18
        assert 'choquet' in text
        assert '0.900' in text


class TestSearchCsv:

    def test_header_and_order(self, search, tmp_path):
        rows = read_csv(reports.write_search_csv(search, tmp_path / 'search.csv'))
        assert rows[0] == ['rank', 'bands', 'classifiers', 'freq_agg', 'class_agg', 'accuracy', 'std']
        assert len(rows) == 1 + 12
        assert rows[1] == ['1', 'alpha+beta', 'lda+knn', 'choquet', 'min', '0.5500000000', '0.0100000000']
        assert [r[0] for r in rows[1:]] == [str(i) for i in range(1, 13)]
        accuracies = [float(r[5]) for r in rows[1:]]
        assert accuracies == sorted(accuracies, reverse=True)

    def test_top_limit(self, search, tmp_path):
        rows = read_csv(reports.write_search_csv(search, tmp_path / 'search.csv', top=3))
        assert len(rows) == 4

    def test_rows_helper(self, search):
        rows = reports.search_rows(search.top(2))
        assert rows[1][:5] == ['2', 'alpha+beta', 'lda+knn', 'mean', 'mean']

    def test_console_table(self, search):
        text = reports.format_search(search.top(5))
        lines = text.splitlines()
        assert len(lines) == 2 + 5
        assert 'alpha+beta' in lines[2]


class TestResults:

    def test_deterministic_bytes(self, tmp_path):
        data = {'b': np.float64(0.25), 'a': np.arange(3), 'nested': {'z': 1, 'y': [np.int64(2)]}}
        first = reports.write_results(data, tmp_path / 'one.json').read_bytes()
        second = reports.write_results(dict(reversed(list(data.items()))), tmp_path / 'two.json').read_bytes()
        assert first == second
        assert first.endswith(b'\n')
        assert json.loads(first) == {'a': [0, 1, 2], 'b': 0.25, 'nested': {'y': [2], 'z': 1}}

    def test_unserialisable_value(self, tmp_path):
        with pytest.raises(TypeError):
            reports.write_results({'x': object()}, tmp_path / 'bad.json')

    def test_sweep_csv(self, tmp_path):
        plan = SplitPlan.kfold(3, seed=1)
        sweep = [
            (1, CvResult(BASE, plan, (0.6, 0.7, 0.8), 0.7, 0.1, 0)),
            (2, CvResult(BASE, plan, (0.9, 0.9, 0.9), 0.9, 0.0, 0)),
        ]
        rows = read_csv(reports.write_sweep_csv(sweep, tmp_path / 'sweep.csv'))
        assert rows == [
            ['components', 'accuracy', 'std'],
            ['1', '0.7000000000', '0.1000000000'],
            ['2', '0.9000000000', '0.0000000000'],
        ]


class TestFrameworks:

    def test_table_and_dict(self):
        rows = [
            FrameworkRow('trad-lda', 0.71, 0.05, FusionConfig(('alpha',), ('lda',), mode=FusionMode.TRADITIONAL)),
            FrameworkRow('emf', 0.83, 0.04, FusionConfig(('alpha', 'beta'), ('lda', 'knn'), 'choquet', 'min')),
        ]
        text = reports.format_frameworks(rows)
        lines = text.splitlines()
        assert len(lines) == 3
        assert lines[1].rstrip().endswith('-')
        assert lines[2].endswith('choquet/min')
        data = reports.frameworks_to_dict(rows)
        assert data[1]['name'] == 'emf'
        assert data[1]['fusion']['freq_agg'] == 'choquet'
        assert json.dumps(data)
