"""
Salidas de la evaluación: CSV (rejilla, ranking de la búsqueda, barrido CSP),
results.json y tablas para consola.

Nada de lo que se escribe en disco lleva marcas de tiempo: con la misma
semilla los ficheros salen idénticos byte a byte.
"""
import csv
import json
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from evaluation import CvResult, FrameworkRow, GridResult, SearchEntry, SearchResult

PathLike = Union[str, Path]

_FLOAT_FMT = '{:.10f}'


def _fmt(value: float) -> str:
    return _FLOAT_FMT.format(value)


def _prepare(path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _json_default(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def write_grid_csv(grid: GridResult, path: PathLike) -> Path:
    """Matriz 17x17: filas = agregador de frecuencia, columnas = agregador de clasificador."""
    path = _prepare(path)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(['freq_agg'] + [a.value for a in grid.aggregators])
        for agg, row in zip(grid.aggregators, grid.matrix):
            writer.writerow([agg.value] + [_fmt(v) for v in row])
    print(f"💾 Rejilla guardada en {path}")
    return path


def search_rows(entries: Iterable[SearchEntry]) -> List[List[str]]:
    return [
        [
            str(e.rank),
            '+'.join(e.bands),
            '+'.join(c.value for c in e.classifiers),
            e.freq_agg.value,
            e.class_agg.value,
            _fmt(e.accuracy),
            _fmt(e.std),
        ]
        for e in entries
    ]


def write_search_csv(result: SearchResult, path: PathLike, top: int = None) -> Path:
    path = _prepare(path)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(['rank', 'bands', 'classifiers', 'freq_agg', 'class_agg', 'accuracy', 'std'])
        writer.writerows(search_rows(result.top(top)))
    print(f"💾 Ranking de la búsqueda guardado en {path}")
    return path


def write_sweep_csv(sweep: Sequence[Tuple[int, CvResult]], path: PathLike) -> Path:
    path = _prepare(path)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(['components', 'accuracy', 'std'])
        for cap, res in sweep:
            writer.writerow([cap, _fmt(res.mean), _fmt(res.std)])
    print(f"💾 Barrido CSP guardado en {path}")
    return path


def write_results(data: dict, path: PathLike) -> Path:
    path = _prepare(path)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2, sort_keys=True, default=_json_default)
        f.write('\n')
    print(f"💾 Resultados guardados en {path}")
    return path


# --- Consola ---

def format_grid(grid: GridResult) -> str:
    names = [a.value for a in grid.aggregators]
    width = max(len(n) for n in names) + 1
    lines = [' ' * width + ''.join(f"{n[:6]:>7}" for n in names)]
    for name, row in zip(names, grid.matrix):
        lines.append(f"{name:<{width}}" + ''.join(f"{v:7.3f}" for v in row))
    return '\n'.join(lines)


def format_search(entries: Sequence[SearchEntry]) -> str:
    header = f"{'#':>4}  {'bandas':<32} {'clasificadores':<20} {'frec':<9} {'clasif':<9} {'exactitud':>9}"
    lines = [header, '-' * len(header)]
    for e in entries:
        lines.append(
            f"{e.rank:>4}  {'+'.join(e.bands):<32} {'+'.join(c.value for c in e.classifiers):<20} "
            f"{e.freq_agg.value:<9} {e.class_agg.value:<9} {e.accuracy:>9.4f}"
        )
    return '\n'.join(lines)


def format_frameworks(rows: Sequence[FrameworkRow]) -> str:
    lines = [f"{'marco':<16} {'exactitud':>9} {'desv.':>7}  agregadores"]
    for row in rows:
        aggs = f"{row.fusion.freq_agg.value}/{row.fusion.class_agg.value}" if row.fusion.mode.value != 'traditional' else '-'
        lines.append(f"{row.name:<16} {row.accuracy:>9.4f} {row.std:>7.4f}  {aggs}")
    return '\n'.join(lines)


def frameworks_to_dict(rows: Sequence[FrameworkRow]) -> List[dict]:
    return [
        {'name': r.name, 'accuracy': r.accuracy, 'std': r.std, 'fusion': r.fusion.to_dict()}
        for r in rows
    ]
